import init, { run_trace, mixing_contraction, advise } from "./pkg/ddrs_web.js";

const COLORS = ["#1f77b4", "#d62728"];

function request() {
  const req = {};
  for (const el of document.querySelectorAll("#params [name]")) {
    if (el.type === "checkbox") req[el.name] = el.checked;
    else if (el.tagName === "SELECT") req[el.name] = el.value;
    else req[el.name] = Number(el.value);
  }
  return req;
}

// Log-scale line plot; each series is a list of [x, y] with y > 0.
function plot(canvas, series, labels) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  ctx.clearRect(0, 0, w, h);
  const pts = series.flat().filter(([, y]) => y > 0 && Number.isFinite(y));
  if (pts.length === 0) return;
  const xmax = Math.max(...pts.map(([x]) => x), 1);
  const ly = pts.map(([, y]) => Math.log10(y));
  const lo = Math.floor(Math.min(...ly)), hi = Math.ceil(Math.max(...ly));
  const pad = { l: 42, r: 8, t: 8, b: 20 };
  const sx = (x) => pad.l + (x / xmax) * (w - pad.l - pad.r);
  const sy = (v) => pad.t + ((hi - v) / Math.max(hi - lo, 1)) * (h - pad.t - pad.b);
  ctx.font = "10px sans-serif";
  ctx.fillStyle = "#666";
  ctx.strokeStyle = "#eee";
  const step = Math.max(1, Math.ceil((hi - lo) / 6));
  for (let e = lo; e <= hi; e += step) {
    ctx.beginPath();
    ctx.moveTo(pad.l, sy(e));
    ctx.lineTo(w - pad.r, sy(e));
    ctx.stroke();
    ctx.fillText(`1e${e}`, 2, sy(e) + 3);
  }
  ctx.fillText(String(xmax), w - pad.r - 24, h - 4);
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    let started = false;
    for (const [x, y] of s) {
      if (!(y > 0)) continue;
      const [px, py] = [sx(x), sy(Math.log10(y))];
      if (started) ctx.lineTo(px, py);
      else ctx.moveTo(px, py);
      started = true;
    }
    ctx.stroke();
    ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.fillText(labels[i], w - pad.r - 90, pad.t + 12 * (i + 1));
  });
}

function field(records, key) {
  return records.map((r) => [r.k, r[key]]);
}

function run() {
  const status = document.getElementById("status");
  status.textContent = "";
  const req = request();
  const json = JSON.stringify(req);
  try {
    const trace = JSON.parse(run_trace(json));
    const labels = ["DDRS", "baseline"];
    for (const [id, key] of [["stationarity", "stationarity_sq"], ["consensus", "consensus_sq"], ["ds", "ds"]]) {
      plot(document.getElementById(id), [field(trace.ddrs, key), field(trace.baseline, key)], labels);
    }
    const errors = [trace.ddrs_error, trace.baseline_error].filter(Boolean);
    status.textContent = `α = ${trace.alpha.toPrecision(4)}, σ₂ = ${trace.sigma2.toPrecision(4)}` +
      (errors.length ? ` (stopped early: ${errors.join("; ")})` : "");
    const mix = JSON.parse(mixing_contraction(json, 30));
    plot(document.getElementById("mixing"),
      [mix.ratio.map((v, i) => [i + 1, v]), mix.bound.map((v, i) => [i + 1, v])], ["measured", "σ₂ᵗ"]);
    document.getElementById("advice").textContent = JSON.stringify(JSON.parse(advise(json)), null, 2);
  } catch (e) {
    status.textContent = String(e);
  }
}

await init();
document.getElementById("go").addEventListener("click", run);
run();
