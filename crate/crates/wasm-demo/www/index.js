import init, { virtualAnchors, measure, boundMap } from "./pkg/mint_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const agent = { x: 5, y: 3 };
const C = 299792458;

function params() {
  return { w: num("w"), h: num("h"), ax: num("ax"), ay: num("ay"), fc: num("fc") * 1e9, omega: num("omega") };
}

// world (m) -> canvas pixels, fitted to the box [x0, x1] x [y0, y1]
function view(canvas, x0, x1, y0, y1) {
  const s = Math.min(canvas.width / (x1 - x0), canvas.height / (y1 - y0));
  return {
    s,
    px: (x) => (x - x0) * s,
    py: (y) => canvas.height - (y - y0) * s,
    inv: (u, v) => ({ x: u / s + x0, y: (canvas.height - v) / s + y0 }),
  };
}

let geoView = null;

function drawGeometry() {
  const p = params();
  const g = JSON.parse(virtualAnchors(p.w, p.h, p.ax, p.ay, Math.round(num("order"))));
  const xs = g.vas.map((v) => v.x), ys = g.vas.map((v) => v.y);
  const pad = 1;
  const cv = $("geo"), ctx = cv.getContext("2d");
  geoView = view(cv, Math.min(0, ...xs) - pad, Math.max(p.w, ...xs) + pad, Math.min(0, ...ys) - pad, Math.max(p.h, ...ys) + pad);
  const { px, py } = geoView;
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#000";
  ctx.lineWidth = 2;
  for (const [a, b] of g.room) {
    ctx.beginPath(); ctx.moveTo(px(a[0]), py(a[1])); ctx.lineTo(px(b[0]), py(b[1])); ctx.stroke();
  }
  ctx.lineWidth = 1;
  const colors = ["#000", "#06c", "#c60", "#690"];
  for (const v of g.vas) {
    ctx.strokeStyle = "rgba(0,0,0,0.15)";
    ctx.beginPath(); ctx.moveTo(px(v.x), py(v.y)); ctx.lineTo(px(agent.x), py(agent.y)); ctx.stroke();
    ctx.fillStyle = colors[v.order];
    ctx.beginPath(); ctx.arc(px(v.x), py(v.y), v.order === 0 ? 6 : 4, 0, 2 * Math.PI); ctx.fill();
  }
  ctx.fillStyle = "#d00";
  ctx.fillRect(px(agent.x) - 5, py(agent.y) - 5, 10, 10);
}

function drawSignal() {
  const p = params();
  const m = JSON.parse(measure(p.w, p.h, p.ax, p.ay, agent.x, agent.y, p.fc, p.omega, Math.round(num("seed"))));
  const cv = $("sig"), ctx = cv.getContext("2d");
  const ranges = m.t_ns.map((t) => t * 1e-9 * C);
  const rmax = ranges[ranges.length - 1];
  const X = (r) => (r / rmax) * cv.width, Y = (a) => cv.height - 10 - a * (cv.height - 20);
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#bbb";
  for (const r of m.true_ranges) { ctx.beginPath(); ctx.moveTo(X(r), 0); ctx.lineTo(X(r), cv.height); ctx.stroke(); }
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  m.magnitude.forEach((a, i) => (i ? ctx.lineTo(X(ranges[i]), Y(a)) : ctx.moveTo(X(ranges[i]), Y(a))));
  ctx.stroke();
  ctx.fillStyle = "#d00";
  for (const r of m.est_ranges) { ctx.beginPath(); ctx.moveTo(X(r), 0); ctx.lineTo(X(r) - 5, 10); ctx.lineTo(X(r) + 5, 10); ctx.fill(); }
  ctx.fillStyle = "#000";
  ctx.fillText(`0 m`, 2, cv.height - 1);
  ctx.fillText(`${rmax.toFixed(1)} m`, cv.width - 40, cv.height - 1);
}

function drawBound() {
  const p = params();
  const b = JSON.parse(boundMap(p.w, p.h, p.ax, p.ay, p.fc, p.omega, 0.1));
  const cv = $("bound"), ctx = cv.getContext("2d");
  const v = view(cv, 0, p.w, 0, p.h);
  const logs = b.rmse_bound.filter(Number.isFinite).map(Math.log10);
  const lo = Math.min(...logs), hi = Math.max(...logs);
  ctx.clearRect(0, 0, cv.width, cv.height);
  for (let j = 0; j < b.ny; j++) {
    for (let i = 0; i < b.nx; i++) {
      const val = b.rmse_bound[j * b.nx + i];
      const t = Number.isFinite(val) ? (Math.log10(val) - lo) / (hi - lo || 1) : 1;
      const g = Math.round(255 * t);
      ctx.fillStyle = `rgb(${g},${g},${Math.min(255, g + 40)})`;
      const x = i * b.dx, y = j * b.dx;
      ctx.fillRect(v.px(x), v.py(y + b.dx), b.dx * v.s + 1, b.dx * v.s + 1);
    }
  }
  ctx.fillStyle = "#d00";
  ctx.beginPath(); ctx.arc(v.px(p.ax), v.py(p.ay), 6, 0, 2 * Math.PI); ctx.fill();
  $("scale").textContent = `range ${(10 ** lo * 1000).toFixed(2)} mm to ${(10 ** hi * 1000).toFixed(2)} mm`;
}

function guarded(f) {
  return () => {
    try { f(); $("err").textContent = ""; } catch (e) { $("err").textContent = String(e); }
  };
}

const refresh = guarded(() => { drawGeometry(); drawSignal(); });

await init();
for (const id of ["w", "h", "ax", "ay", "order", "fc", "omega", "seed"]) $(id).addEventListener("change", refresh);
$("geo").addEventListener("click", (ev) => {
  const r = $("geo").getBoundingClientRect();
  const q = geoView.inv(ev.clientX - r.left, ev.clientY - r.top);
  agent.x = q.x; agent.y = q.y;
  refresh();
});
$("map").addEventListener("click", guarded(drawBound));
refresh();
