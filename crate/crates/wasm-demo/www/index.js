import init, { comparePair, compareExpected, familyError } from "./pkg/rankdiff_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fmtP(p) {
  if (p < 1e-15) return "<1e-15";
  return p < 1e-4 ? p.toExponential(4) : p.toFixed(4);
}

// Standard normal density with both rejection tails beyond |z| shaded.
function drawDensity(canvas, z) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const lim = Math.max(4, Math.min(Math.abs(z) + 1, 12));
  const xs = (x) => ((x + lim) / (2 * lim)) * w;
  const ys = (y) => h - 20 - (y / 0.4) * (h - 40);
  const pdf = (x) => Math.exp(-0.5 * x * x) / Math.sqrt(2 * Math.PI);
  ctx.clearRect(0, 0, w, h);

  ctx.fillStyle = "rgba(200, 40, 40, 0.35)";
  for (const sign of [-1, 1]) {
    ctx.beginPath();
    const from = sign * Math.abs(z);
    const to = sign * lim;
    ctx.moveTo(xs(from), ys(0));
    for (let i = 0; i <= 100; i++) {
      const x = from + ((to - from) * i) / 100;
      ctx.lineTo(xs(x), ys(pdf(x)));
    }
    ctx.lineTo(xs(to), ys(0));
    ctx.fill();
  }

  ctx.strokeStyle = "#333";
  ctx.beginPath();
  for (let i = 0; i <= 400; i++) {
    const x = -lim + (2 * lim * i) / 400;
    i === 0 ? ctx.moveTo(xs(x), ys(pdf(x))) : ctx.lineTo(xs(x), ys(pdf(x)));
  }
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(0, ys(0));
  ctx.lineTo(w, ys(0));
  ctx.stroke();

  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#888";
  for (const c of [-2.576, -1.96, 1.96, 2.576]) {
    ctx.beginPath();
    ctx.moveTo(xs(c), ys(0));
    ctx.lineTo(xs(c), ys(0.4));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.strokeStyle = "#b00020";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(xs(z), ys(0));
  ctx.lineTo(xs(z), ys(0.42));
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = "#222";
  ctx.fillText(`z = ${z.toFixed(4)}`, Math.min(xs(z) + 4, w - 80), 12);
}

function describe(r) {
  const lines = [
    `t = ${r.t_left.toFixed(2)} / ${r.t_right.toFixed(2)}   pooled p = ${r.pooled_p.toFixed(4)}`,
    `z = ${r.z.toFixed(4)}   p (two-sided) = ${fmtP(r.p_value)}`,
  ];
  for (const l of r.levels) {
    lines.push(`alpha ${l.alpha}: raw ${l.significant ? "yes" : "no"}, adjusted (< ${l.per_test_alpha.toPrecision(4)}) ${l.adjusted_significant ? "yes" : "no"}`);
  }
  lines.push(r.verdict + (r.direction ? `, ${r.direction}` : ""));
  if (r.warning) lines.push("warning: expected cell count below 5");
  return lines.join("\n");
}

function show(outId, plotId, run) {
  const out = $(outId);
  try {
    const r = JSON.parse(run());
    out.classList.remove("err");
    out.textContent = describe(r);
    drawDensity($(plotId), r.z);
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function updatePair() {
  show("pair-out", "pair-plot", () => comparePair(num("pp1"), num("n1"), num("pp2"), num("n2"), Math.max(1, num("m"))));
}

function updateExpected() {
  show("expected-out", "expected-plot", () => compareExpected(num("epp"), num("en"), num("eexp")));
}

function runFamily() {
  const out = $("family-out");
  try {
    const r = JSON.parse(familyError(num("fk"), num("fn"), num("fp"), num("ft"), num("fs")));
    out.classList.remove("err");
    out.textContent = [
      `${r.pairs} pairwise tests per trial, ${r.trials} trials`,
      `uncorrected family-wise error: ${r.uncorrected_rate.toFixed(4)}  (1 - 0.95^${r.pairs} = ${r.independent_bound.toFixed(4)} if tests were independent)`,
      `Bonferroni family-wise error:  ${r.bonferroni_rate.toFixed(4)}  (target <= 0.05, MC s.e. ${r.std_error.toFixed(4)})`,
    ].join("\n");
    drawBars($("family-plot"), [["uncorrected", r.uncorrected_rate], ["Bonferroni", r.bonferroni_rate]]);
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function drawBars(canvas, bars) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const x0 = 110;
  bars.forEach(([label, v], i) => {
    const y = 20 + i * 50;
    ctx.fillStyle = "#222";
    ctx.fillText(label, 10, y + 20);
    ctx.fillStyle = i === 0 ? "#c0392b" : "#2e7d32";
    ctx.fillRect(x0, y, (w - x0 - 20) * v, 30);
  });
  const x05 = x0 + (w - x0 - 20) * 0.05;
  ctx.strokeStyle = "#555";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(x05, 10);
  ctx.lineTo(x05, h - 10);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillText("0.05", x05 + 3, h - 12);
}

await init();
for (const id of ["pp1", "n1", "pp2", "n2", "m"]) $(id).addEventListener("input", updatePair);
for (const id of ["epp", "en", "eexp"]) $(id).addEventListener("input", updateExpected);
$("frun").addEventListener("click", runFamily);
updatePair();
updateExpected();
runFamily();
