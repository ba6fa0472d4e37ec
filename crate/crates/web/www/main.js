import init, { backoffCurve, mismatchCurve, throughputCurve } from "./pkg/relrate_web.js";

const logspace = (lo, hi, count) =>
  Array.from({ length: count }, (_, i) => Math.round(10 ** (lo + ((hi - lo) * i) / (count - 1))));

const linspace = (lo, hi, count) => Array.from({ length: count }, (_, i) => lo + ((hi - lo) * i) / (count - 1));

function field(section, name) {
  const el = section.querySelector(`[name=${name}]`);
  return el.tagName === "SELECT" ? el.value : Number(el.value);
}

// series: [{ xs, ys, color }]; NaN points are skipped
function plot(canvas, series, { logX = false, logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const pad = { l: 70, r: 15, t: 10, b: 40 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([x, y]) => isFinite(x) && isFinite(y));
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const margin = 0.05 * (y1 - y0);
  y0 -= margin;
  y1 += margin;
  const px = (x) => pad.l + ((x - x0) / (x1 - x0)) * w;
  const py = (y) => pad.t + h - ((y - y0) / (y1 - y0)) * h;

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad.l, pad.t, w, h);
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(fmt(logX ? 10 ** x : x), px(x) - 20, pad.t + h + 16);
    ctx.fillText(fmt(logY ? 10 ** y : y), 4, py(y) + 4);
  }
  ctx.fillText(xLabel, pad.l + w / 2 - 10, canvas.height - 4);
  ctx.fillText(yLabel, pad.l + 6, pad.t + 14);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    let pen = false;
    s.xs.forEach((x, i) => {
      const X = tx(x);
      const Y = ty(s.ys[i]);
      if (!isFinite(X) || !isFinite(Y)) { pen = false; return; }
      pen ? ctx.lineTo(px(X), py(Y)) : ctx.moveTo(px(X), py(Y));
      pen = true;
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

const fmt = (v) => (Math.abs(v) >= 1e4 || (Math.abs(v) < 1e-2 && v !== 0) ? v.toExponential(1) : +v.toPrecision(3));

function wire(id, run) {
  const section = document.getElementById(id);
  const err = section.querySelector(".err");
  const go = () => {
    err.textContent = "";
    try {
      run(section, section.querySelector("canvas"));
    } catch (e) {
      err.textContent = e.message ?? String(e);
    }
  };
  section.querySelector("button").addEventListener("click", go);
  go();
}

await init();

wire("backoff", (s, canvas) => {
  const ns = logspace(1, 6, 40);
  const eps = field(s, "eps");
  const ys = backoffCurve(field(s, "selector"), field(s, "constraint"), eps, field(s, "xi"), field(s, "beta"), Float64Array.from(ns));
  plot(canvas, [
    { xs: ns, ys: Array.from(ys), color: "#1f5fbf" },
    { xs: ns, ys: ns.map(() => eps), color: "#777", dash: [4, 4] },
  ], { logX: true, logY: true, xLabel: "n", yLabel: "eps_n" });
});

wire("mismatch", (s, canvas) => {
  const channel = field(s, "channel");
  const params = channel === "rician" ? linspace(0, 8, 33) : linspace(0.5, 2, 31);
  const eps = field(s, "eps");
  const v = mismatchCurve(channel, Float64Array.from(params), eps, field(s, "n"));
  const k = params.length;
  plot(canvas, [
    { xs: params, ys: Array.from(v.slice(0, k)), color: "#1f5fbf" },
    { xs: params, ys: Array.from(v.slice(k)), color: "#c0392b", dash: [2, 3] },
    { xs: params, ys: params.map(() => eps), color: "#777", dash: [4, 4] },
  ], { logY: true, xLabel: channel === "rician" ? "k" : "m", yLabel: "mean outage" });
});

wire("throughput", (s, canvas) => {
  const ns = logspace(1, 4, 10);
  const eps = field(s, "eps");
  const v = throughputCurve(
    field(s, "selector"), field(s, "constraint"), eps, field(s, "xi"), field(s, "beta"),
    field(s, "channel"), field(s, "param"), Float64Array.from(ns), field(s, "trials"), BigInt(field(s, "seed")),
  );
  const k = ns.length;
  plot(canvas, [
    { xs: ns, ys: Array.from(v.slice(0, k)), color: "#1f5fbf" },
    { xs: ns, ys: Array.from(v.slice(k, 2 * k), (p) => p / eps), color: "#c0392b", dash: [2, 3] },
  ], { logX: true, xLabel: "n", yLabel: "omega" });
});
