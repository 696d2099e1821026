import init, { decompose, random_state } from "./pkg/bsa_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(6);

function werner(y) {
  const flat = new Array(32).fill(0);
  for (let i = 0; i < 4; i++) flat[2 * 5 * i] = (1 - y) / 4;
  for (const [i, j] of [[0, 0], [0, 3], [3, 0], [3, 3]]) flat[2 * (4 * i + j)] += y / 2;
  return flat;
}

function toRows(flat) {
  const rows = [];
  for (let i = 0; i < 4; i++) {
    const row = [];
    for (let j = 0; j < 4; j++) {
      const k = 2 * (4 * i + j);
      row.push([flat[k], flat[k + 1]]);
    }
    rows.push(row);
  }
  return rows;
}

function fromRows(rows) {
  if (!Array.isArray(rows) || rows.length !== 4) throw new Error("expected 4 rows");
  return rows.flatMap((row, i) => {
    if (!Array.isArray(row) || row.length !== 4) throw new Error(`row ${i}: expected 4 entries`);
    return row.flatMap((z) => [Number(z[0]), Number(z[1])]);
  });
}

function complexList(flat) {
  const out = [];
  for (let k = 0; k < flat.length; k += 2) out.push(`${fmt(flat[k])}${flat[k + 1] < 0 ? "-" : "+"}${fmt(Math.abs(flat[k + 1]))}i`);
  return out;
}

function describe(s) {
  const v = s.verification;
  const lines = [
    `λ                 ${fmt(s.lambda)}`,
    `path              ${s.path}`,
    `concurrence       ${fmt(s.concurrence)}`,
    `1 − λ             ${fmt(s.entanglement_measure)}`,
  ];
  if (s.psi.length) lines.push(`ψ                 ${complexList(s.psi).join("  ")}`);
  lines.push("ρ_s");
  for (let i = 0; i < 4; i++) lines.push("  " + complexList(s.rho_s.slice(8 * i, 8 * i + 8)).join("  "));
  lines.push(`verified          ${v.verdict}`);
  lines.push(`reconstruction    ${v.reconstruction_residual.toExponential(2)}`);
  lines.push(`min eig ρ_s, ρ_s^T_B  ${v.rho_s_min_eig.toExponential(2)}, ${v.rho_s_pt_min_eig.toExponential(2)}`);
  return lines.join("\n");
}

function show(el, f) {
  try {
    el.textContent = describe(JSON.parse(f()));
    el.className = "";
  } catch (e) {
    el.textContent = String(e.message ?? e);
    el.className = "bad";
  }
}

function updateWerner() {
  const y = Number($("y").value);
  $("y-value").textContent = y.toFixed(2);
  show($("werner-out"), () => decompose(new Float64Array(werner(y))));
}

function runEditor() {
  show($("out"), () => decompose(new Float64Array(fromRows(JSON.parse($("matrix").value)))));
}

await init();
$("y").addEventListener("input", updateWerner);
$("draw").addEventListener("click", () => {
  const flat = random_state(Number($("rank").value), Number($("seed").value));
  $("matrix").value = JSON.stringify(toRows(flat)).replaceAll("]],", "]],\n");
  runEditor();
});
$("run").addEventListener("click", runEditor);
$("matrix").value = JSON.stringify(toRows(werner(0.8))).replaceAll("]],", "]],\n");
updateWerner();
runEditor();
