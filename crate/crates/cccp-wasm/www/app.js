// Demo page wiring: calls the three wasm exports and draws the results on
// plain canvases. Build the module first:
//   wasm-pack build --target web crates/cccp-wasm
// then serve this directory together with the generated pkg/ next to it.

import init, { hitting_curve, trajectory_mean, instance_summary } from "./pkg/cccp_wasm.js";

const $ = (id) => document.getElementById(id);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, 10);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - 10, h - pad);
  ctx.stroke();
}

function plotCurve(points) {
  const canvas = $("curve");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 48];
  axes(ctx, w, h, pad);

  const finite = points.filter((q) => q.h0_log10 !== null);
  if (finite.length === 0) return;
  const xs = points.map((q) => q.p);
  const yMax = Math.max(...finite.map((q) => q.ub_log10 ?? q.h0_log10));
  const x = (p) => pad + ((p - xs[0]) / (xs[xs.length - 1] - xs[0] || 1)) * (w - pad - 20);
  const y = (v) => h - pad - (Math.max(v, 0) / (yMax || 1)) * (h - pad - 20);

  // Bound band.
  ctx.fillStyle = "rgba(70, 130, 180, 0.15)";
  ctx.beginPath();
  finite.forEach((q, i) => {
    const yy = y(q.ub_log10 ?? q.h0_log10);
    i === 0 ? ctx.moveTo(x(q.p), yy) : ctx.lineTo(x(q.p), yy);
  });
  [...finite].reverse().forEach((q) => ctx.lineTo(x(q.p), y(q.lb_log10)));
  ctx.closePath();
  ctx.fill();

  // Exact curve.
  ctx.strokeStyle = "#1f4e79";
  ctx.lineWidth = 2;
  ctx.beginPath();
  finite.forEach((q, i) => {
    i === 0 ? ctx.moveTo(x(q.p), y(q.h0_log10)) : ctx.lineTo(x(q.p), y(q.h0_log10));
  });
  ctx.stroke();

  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText("p", w - 18, h - pad + 16);
  ctx.fillText("log10 E[T]", 4, 18);
  ctx.fillText(xs[0].toFixed(2), pad - 10, h - pad + 16);
  ctx.fillText(xs[xs.length - 1].toFixed(2), w - 44, h - pad + 16);
  ctx.fillText(yMax.toFixed(1), 4, y(yMax) + 4);
  ctx.fillText("0", pad - 14, h - pad + 4);

  // Regime change markers.
  let last = points[0].regime;
  ctx.save();
  ctx.setLineDash([3, 3]);
  ctx.strokeStyle = "#aaa";
  for (const q of points) {
    if (q.regime !== last) {
      ctx.beginPath();
      ctx.moveTo(x(q.p), h - pad);
      ctx.lineTo(x(q.p), 14);
      ctx.stroke();
      ctx.fillText(q.regime, x(q.p) + 3, 26);
      last = q.regime;
    }
  }
  ctx.restore();
}

function plotTrajectory(report) {
  const canvas = $("traj");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 48];
  axes(ctx, w, h, pad);

  const pts = report.points;
  const tMax = pts[pts.length - 1].t || 1;
  const x = (t) => pad + (t / tMax) * (w - pad - 20);
  const y = (f) => h - pad - f * (h - pad - 20);

  // q* line.
  ctx.save();
  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = "#b00";
  ctx.beginPath();
  ctx.moveTo(pad, y(report.q_star));
  ctx.lineTo(w - 10, y(report.q_star));
  ctx.stroke();
  ctx.restore();

  // Closed-form marginal.
  ctx.strokeStyle = "#1f4e79";
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach((q, i) => (i === 0 ? ctx.moveTo(x(q.t), y(q.theory)) : ctx.lineTo(x(q.t), y(q.theory))));
  ctx.stroke();

  // Simulation dots (thinned).
  ctx.fillStyle = "rgba(20, 20, 20, 0.6)";
  const stride = Math.max(1, Math.floor(pts.length / 400));
  for (let i = 0; i < pts.length; i += stride) {
    ctx.fillRect(x(pts[i].t) - 1, y(pts[i].mean_fraction) - 1, 2.5, 2.5);
  }

  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText("t", w - 16, h - pad + 16);
  ctx.fillText("|S_t|/n", 4, 18);
  ctx.fillText("q* = " + report.q_star.toFixed(4), w - 120, y(report.q_star) - 6);
  ctx.fillText("t_mix = " + report.t_mix, pad + 6, 26);
  ctx.fillText("1", pad - 14, y(1) + 4);
  ctx.fillText("0", pad - 14, h - pad + 4);
}

function showSummary(s) {
  if (s.error) {
    $("summary").textContent = "error: " + s.error;
    return;
  }
  const fin = (v) => (v === null ? "overflows f64 (see log10 bounds)" : "10^" + v.toFixed(3));
  $("summary").textContent = [
    `regime          ${s.regime}`,
    `q*              ${s.q_star.toPrecision(6)}`,
    `marginal t_mix  ${s.t_mix} rounds`,
    `E[T] exact      ${fin(s.h0_log10)}`,
    `rigorous bounds 10^${s.lb_log10.toFixed(3)} .. 10^${s.ub_log10 === null ? "inf" : s.ub_log10.toFixed(3)}`,
    `scale estimate  10^${s.scale_log10.toFixed(3)}`,
  ].join("\n");
}

function guard(parse) {
  const data = JSON.parse(parse);
  if (data.error) {
    alert(data.error);
    return null;
  }
  return data;
}

async function main() {
  await init();
  $("curve-run").onclick = () => {
    const data = guard(hitting_curve(+$("curve-n").value, 0, +$("curve-pmax").value, 120));
    if (data) plotCurve(data);
  };
  $("traj-run").onclick = () => {
    const data = guard(
      trajectory_mean(
        +$("traj-n").value,
        +$("traj-p").value,
        +$("traj-horizon").value,
        +$("traj-runs").value,
        BigInt($("traj-seed").value),
      ),
    );
    if (data) plotTrajectory(data);
  };
  $("sum-run").onclick = () => {
    showSummary(JSON.parse(instance_summary(+$("sum-n").value, +$("sum-p").value)));
  };
  $("curve-run").click();
  $("traj-run").click();
  $("sum-run").click();
}

main();
