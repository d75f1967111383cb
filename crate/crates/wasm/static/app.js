// Demo page driver: loads the wasm module and wires the three panels.
// Build the module first (see README): wasm-bindgen writes ./pkg/.

let wasm;
try {
  wasm = await import("./pkg/lasso_sens_wasm.js");
  await wasm.default();
} catch (e) {
  const el = document.getElementById("boot-error");
  el.hidden = false;
  el.textContent =
    "Could not load the WebAssembly module (" + e + ").\n" +
    "Build it first:\n" +
    "  cargo build -p lasso-sens-wasm --target wasm32-unknown-unknown --release\n" +
    "  wasm-bindgen --target web --out-dir crates/wasm/static/pkg \\\n" +
    "    target/wasm32-unknown-unknown/release/lasso_sens_wasm.wasm\n" +
    "then serve this directory over HTTP.";
  throw e;
}

const COLORS = ["#53b1fd", "#4ade80", "#f87171", "#fbbf24", "#c084fc"];

function clearCanvas(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

// Minimal line plot: series = [{pts: [[x,y],...], color, dash?}], optional
// log-x, shaded vertical band, and a vertical marker line.
function plot(canvas, series, opts = {}) {
  const ctx = clearCanvas(canvas);
  const W = canvas.width, H = canvas.height;
  const pad = { l: 48, r: 12, t: 10, b: 26 };

  const xs = [], ys = [];
  for (const s of series) for (const [x, y] of s.pts) {
    if (Number.isFinite(x) && Number.isFinite(y)) { xs.push(x); ys.push(y); }
  }
  if (!xs.length) return;
  const tx = opts.logx ? Math.log10 : (v) => v;
  let x0 = Math.min(...xs.map(tx)), x1 = Math.max(...xs.map(tx));
  let y0 = Math.min(...ys, 0), y1 = Math.max(...ys);
  if (x1 - x0 < 1e-12) { x0 -= 1; x1 += 1; }
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const ypad = 0.06 * (y1 - y0);
  y0 -= ypad; y1 += ypad;

  const X = (v) => pad.l + ((tx(v) - x0) / (x1 - x0)) * (W - pad.l - pad.r);
  const Y = (v) => H - pad.b - ((v - y0) / (y1 - y0)) * (H - pad.t - pad.b);

  if (opts.band) {
    ctx.fillStyle = "rgba(248,113,113,0.10)";
    ctx.fillRect(X(opts.band[0]), pad.t, X(opts.band[1]) - X(opts.band[0]), H - pad.t - pad.b);
  }

  // axes
  ctx.strokeStyle = "#2c3848";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t); ctx.lineTo(pad.l, H - pad.b); ctx.lineTo(W - pad.r, H - pad.b);
  ctx.stroke();
  if (y0 < 0 && y1 > 0) {
    ctx.strokeStyle = "#222b37";
    ctx.beginPath(); ctx.moveTo(pad.l, Y(0)); ctx.lineTo(W - pad.r, Y(0)); ctx.stroke();
  }
  ctx.fillStyle = "#8194ab";
  ctx.font = "11px ui-monospace, monospace";
  const fmt = (v) => Math.abs(v) >= 1000 || (Math.abs(v) < 0.01 && v !== 0) ? v.toExponential(1) : v.toPrecision(3);
  for (let i = 0; i <= 4; i++) {
    const yv = y0 + (i / 4) * (y1 - y0);
    ctx.fillText(fmt(yv), 4, Y(yv) + 4);
    const xv = x0 + (i / 4) * (x1 - x0);
    const label = opts.logx ? fmt(Math.pow(10, xv)) : fmt(xv);
    ctx.fillText(label, pad.l + (i / 4) * (W - pad.l - pad.r) - 10, H - 8);
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 1.8;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let started = false;
    for (const [x, y] of s.pts) {
      if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
      if (!started) { ctx.moveTo(X(x), Y(y)); started = true; }
      else ctx.lineTo(X(x), Y(y));
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }

  if (opts.marker !== undefined) {
    ctx.strokeStyle = "#dce6f2";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(X(opts.marker), pad.t); ctx.lineTo(X(opts.marker), H - pad.b);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function badge(label, state) {
  const cls = state === true ? "on" : state === false ? "off" : "warn";
  return `<span class="badge ${cls}">${label}</span>`;
}

// ----- panel A: counterexample explorer -----

const pathCanvas = document.getElementById("path-canvas");
const pathSlider = document.getElementById("path-slider");

// solution-path curves over the lambda range come from the closed form the
// module reports; the shaded band marks the non-uniqueness region
const pathGrid = [];
for (let l = 0.05; l <= 2.45 + 1e-9; l += 0.02) pathGrid.push(l);
const pathCurves = [[], [], []];
for (const l of pathGrid) {
  const d = JSON.parse(wasm.example_path(l));
  for (let i = 0; i < 3; i++) pathCurves[i].push([l, d.reference[i]]);
}

function renderPath() {
  const lambda = parseFloat(pathSlider.value);
  document.getElementById("path-lambda").textContent = lambda.toFixed(2);
  const d = JSON.parse(wasm.example_path(lambda));

  const series = pathCurves.map((pts, i) => ({ pts, color: COLORS[i] }));
  // current solver point as short horizontal ticks
  for (let i = 0; i < 3; i++) {
    series.push({
      pts: [[Math.max(lambda - 0.03, 0.05), d.x[i]], [Math.min(lambda + 0.03, 2.45), d.x[i]]],
      color: "#ffffff", width: 3,
    });
  }
  plot(pathCanvas, series, { band: [0.05, 1.0], marker: lambda });

  const a = d.assumptions || {};
  document.getElementById("path-badges").innerHTML =
    badge("weak: " + (a.weak ?? "n/a"), a.weak === "holds" ? true : a.weak === "fails" ? false : null) +
    badge("intermediate", !!a.intermediate) +
    badge("strong", !!a.strong) +
    (d.family ? badge("non-unique family", false) : "");
  const deriv = d.derivative_wrt_lambda
    ? `dS/d&lambda; = [${d.derivative_wrt_lambda.map((v) => v.toFixed(3)).join(", ")}], L<sub>&lambda;</sub> = ${d.lipschitz_lambda.toFixed(3)}`
    : "solution map not differentiable in this regime";
  document.getElementById("path-stats").innerHTML =
    `<b>x&#772;</b> = [${d.x.map((v) => v.toFixed(4)).join(", ")}] &nbsp; ` +
    `margin = ${(a.strong_margin ?? 0).toFixed(4)} &nbsp; gap = ${d.dual_gap.toExponential(1)}<br>${deriv}` +
    (d.family ? `<br>family: t &isin; [0, ${d.family.t_max.toFixed(3)}) between [${d.family.endpoint_low.map((v)=>v.toFixed(2)).join(", ")}] and [${d.family.endpoint_high.map((v)=>v.toFixed(2)).join(", ")}]` : "");
}
pathSlider.addEventListener("input", renderPath);
renderPath();

// ----- panel B: sweep explorer -----

const sweepBtn = document.getElementById("sweep-run");
sweepBtn.addEventListener("click", () => {
  sweepBtn.disabled = true;
  setTimeout(() => {
    try {
      const s = +document.getElementById("sweep-s").value;
      const m = +document.getElementById("sweep-m").value;
      const n = +document.getElementById("sweep-n").value;
      const seed = BigInt(Math.max(0, +document.getElementById("sweep-seed").value));
      const trial = BigInt(Math.max(0, +document.getElementById("sweep-trial").value));
      const grid = +document.getElementById("sweep-grid").value;
      const d = JSON.parse(wasm.sweep_curves(s, m, n, seed, trial, grid));

      const err = d.rows.map((r) => [r.lambda, r.error]);
      const bound = d.rows.filter((r) => r.bound !== null).map((r) => [r.lambda, r.bound]);
      plot(document.getElementById("sweep-canvas"),
        [
          { pts: err, color: COLORS[2] },
          { pts: bound, color: COLORS[0], dash: [6, 4] },
        ],
        { logx: true, marker: d.lambda_star });

      document.getElementById("sweep-badges").innerHTML =
        badge("strong at &lambda;*", d.strong_holds_at_star) +
        badge("noise &le; &Vert;b&Vert;/3", d.noise_within_bound) +
        badge(`s* = ${d.support_size_star}`, null);
      document.getElementById("sweep-stats").innerHTML =
        `<b>&lambda;*</b> = ${d.lambda_star.toPrecision(4)} &nbsp; ` +
        `&sigma;<sub>min</sub>(A<sub>I</sub>) = ${d.sigma_min_I === null ? "n/a" : d.sigma_min_I.toPrecision(4)} &nbsp; ` +
        `<b>L</b> = ${d.L === null ? "unavailable (A_I rank deficient)" : d.L.toPrecision(4)}<br>` +
        `bound dominates error on [${d.validity_lo.toPrecision(3)}, ${d.validity_hi.toPrecision(3)}] &nbsp; ` +
        `ground-truth error at &lambda;*: ${d.ground_truth_error.toPrecision(3)}<br>` +
        `red: &Vert;x&#772;(&lambda;) &minus; x&#772;(&lambda;*)&Vert;, dashed blue: L&#8901;|&lambda; &minus; &lambda;*|`;
    } catch (e) {
      document.getElementById("sweep-stats").textContent = "error: " + e;
    } finally {
      sweepBtn.disabled = false;
    }
  }, 20);
});
sweepBtn.click();

// ----- panel C: analyze an instance -----

const anBtn = document.getElementById("an-run");
anBtn.addEventListener("click", () => {
  try {
    const out = wasm.analyze_instance(
      document.getElementById("an-matrix").value,
      document.getElementById("an-rhs").value,
      parseFloat(document.getElementById("an-lambda").value),
    );
    const d = JSON.parse(out);
    const a = d.assumptions || {};
    document.getElementById("an-badges").innerHTML =
      badge("weak: " + (a.weak ?? "n/a"), a.weak === "holds" ? true : a.weak === "fails" ? false : null) +
      badge("intermediate", !!a.intermediate) +
      badge("strong", !!a.strong) +
      (d.lipschitz_lambda !== undefined ? badge(`L_lambda = ${d.lipschitz_lambda.toPrecision(4)}`, null) : "");
    document.getElementById("an-out").textContent = JSON.stringify(d, null, 2);
  } catch (e) {
    document.getElementById("an-badges").innerHTML = "";
    document.getElementById("an-out").textContent = "error: " + e;
  }
});
anBtn.click();
