import init, { solve, synth, bounds, simulate } from "./pkg/lincon_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = { linconts: "#1f6fb2", linconklucb: "#d9822b" };

function parseArms() {
  const mu = [], r = [];
  for (const line of $("arms").value.split("\n")) {
    const t = line.split("#")[0].trim();
    if (!t) continue;
    const [a, b] = t.split(/[\s,;]+/).map(Number);
    mu.push(a);
    r.push(b);
  }
  return { mu: new Float64Array(mu), r: new Float64Array(r) };
}

const eta = () => Number($("eta").value);
const fmt = (v, d = 4) => (v === null || v === undefined || !isFinite(v) ? "-" : v.toFixed(d));

function axes(ctx, w, h, pad, xmax, ymax, xlabel, ylabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  for (let k = 0; k <= 4; k++) {
    const x = pad + ((w - 1.5 * pad) * k) / 4;
    const y = h - pad - ((h - 1.5 * pad) * k) / 4;
    ctx.fillText(fmtTick((xmax * k) / 4), x - 10, h - pad + 14);
    ctx.fillText(fmtTick((ymax * k) / 4), 2, y + 4);
  }
  ctx.fillText(xlabel, w - pad - 20, h - 6);
  ctx.fillText(ylabel, pad + 4, pad / 2 + 10);
  return {
    x: (v) => pad + ((w - 1.5 * pad) * v) / xmax,
    y: (v) => h - pad - ((h - 1.5 * pad) * v) / ymax,
  };
}

function fmtTick(v) {
  if (v === 0) return "0";
  if (Math.abs(v) >= 1000) return (v / 1000).toFixed(v >= 10000 ? 0 : 1) + "k";
  return Math.abs(v) < 1 ? v.toFixed(2) : v.toFixed(v < 10 ? 1 : 0);
}

function drawGeometry(arms, res) {
  const cv = $("lp-canvas");
  const ctx = cv.getContext("2d");
  const vals = Array.from(arms.mu, (m, i) => m * arms.r[i]);
  const ymax = Math.max(0.05, ...vals) * 1.1;
  const s = axes(ctx, cv.width, cv.height, 40, 1, ymax, "μ", "μr");

  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(s.x(eta()), s.y(0));
  ctx.lineTo(s.x(eta()), s.y(ymax));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillText("η", s.x(eta()) + 3, s.y(ymax) + 12);

  if (res && !res.error) {
    const sup = res.support;
    if (sup.length === 2) {
      ctx.strokeStyle = "#b03a2e";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(s.x(arms.mu[sup[0]]), s.y(vals[sup[0]]));
      ctx.lineTo(s.x(arms.mu[sup[1]]), s.y(vals[sup[1]]));
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    const rate = res.x.reduce((acc, x, i) => acc + x * arms.mu[i], 0);
    ctx.fillStyle = "#b03a2e";
    ctx.beginPath();
    ctx.arc(s.x(rate), s.y(res.objective), 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
  vals.forEach((v, i) => {
    const onSupport = res && !res.error && res.x[i] > 0;
    ctx.fillStyle = onSupport ? "#b03a2e" : "#1f6fb2";
    ctx.beginPath();
    ctx.arc(s.x(arms.mu[i]), s.y(v), onSupport ? 4.5 : 3, 0, 2 * Math.PI);
    ctx.fill();
    if (arms.mu.length <= 20) ctx.fillText(String(i + 1), s.x(arms.mu[i]) + 5, s.y(v) - 4);
  });
}

function renderTable(arms, res) {
  const rows = ["<tr><th>arm</th><th>μ</th><th>r</th><th>x*</th><th>ψ</th><th>ξ</th></tr>"];
  for (let i = 0; i < arms.mu.length; i++) {
    const x = res && !res.error ? res.x[i] : null;
    const psi = res && !res.error && res.psi.length ? res.psi[i] : null;
    const xi = res && !res.error ? res.xi[i] : null;
    rows.push(
      `<tr class="${x > 0 ? "support" : ""}"><td>${i + 1}</td><td>${fmt(arms.mu[i], 3)}</td>` +
        `<td>${fmt(arms.r[i], 3)}</td><td>${fmt(x)}</td><td>${fmt(psi)}</td><td>${fmt(xi)}</td></tr>`
    );
  }
  if (res && !res.error) {
    rows.push(`<tr><td colspan="6">r* = ${fmt(res.objective, 5)}, λ = ${fmt(res.lambda, 5)}, ν = ${fmt(res.nu, 5)}</td></tr>`);
  }
  $("lp-table").innerHTML = rows.join("");
}

function renderBounds(arms) {
  const out = JSON.parse(bounds(arms.mu, arms.r, eta(), Number($("gamma").value), Number($("bound-t").value)));
  if (out.error) {
    $("bounds-out").textContent = out.error;
    return;
  }
  const lines = [
    `regret    <= ${fmt(out.regret_leading, 2)} + ${fmt(out.regret_sqrt, 2)} + ${out.remainder}`,
    `violation <= ${fmt(out.violation_leading, 2)} + ${fmt(out.violation_sqrt, 2)} + ${out.remainder}`,
    "",
    "arm      xi    d(mu,xi)      y       z      L(T)   note",
  ];
  for (const a of out.arms) {
    lines.push(
      `${String(a.arm + 1).padStart(3)} ${fmt(a.xi).padStart(7)} ${fmt(a.kl_mu_xi).padStart(9)} ` +
        `${fmt(a.y).padStart(7)} ${fmt(a.z).padStart(7)} ${fmt(a.l_t, 1).padStart(9)}   ${a.vacuous ?? ""}`
    );
  }
  $("bounds-out").textContent = lines.join("\n");
}

function refresh() {
  $("eta-val").textContent = eta().toFixed(3);
  const arms = parseArms();
  const res = JSON.parse(solve(arms.mu, arms.r, eta()));
  $("lp-err").textContent = res.error ?? "";
  drawGeometry(arms, res);
  renderTable(arms, res);
  renderBounds(arms);
}

function generate(kind) {
  const out = JSON.parse(synth(kind, Number($("n").value), NaN, Number($("gen-seed").value)));
  if (out.error) {
    $("lp-err").textContent = out.error;
    return;
  }
  $("arms").value = out.mu.map((m, i) => `${m.toFixed(4)}, ${out.r[i].toFixed(4)}`).join("\n");
  $("eta").value = out.eta;
  refresh();
}

function plotCurves(canvas, t, policies, key, label) {
  const ctx = canvas.getContext("2d");
  const ymax = Math.max(1e-9, ...policies.flatMap((p) => p[key])) * 1.05;
  const s = axes(ctx, canvas.width, canvas.height, 44, t[t.length - 1], ymax, "t", label);
  policies.forEach((p, k) => {
    ctx.strokeStyle = COLORS[p.name] ?? "#333";
    ctx.lineWidth = 2;
    ctx.beginPath();
    t.forEach((ti, j) => (j ? ctx.lineTo(s.x(ti), s.y(p[key][j])) : ctx.moveTo(s.x(ti), s.y(p[key][j]))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(p.name, canvas.width - 110, 20 + 14 * k);
  });
  ctx.lineWidth = 1;
}

function runSimulation() {
  const arms = parseArms();
  $("sim-status").textContent = "running...";
  $("sim-err").textContent = "";
  // Let the status text paint before the synchronous call.
  setTimeout(() => {
    const t0 = performance.now();
    const out = JSON.parse(
      simulate(
        arms.mu,
        arms.r,
        eta(),
        Number($("sim-t").value),
        Number($("sim-runs").value),
        Number($("sim-seed").value),
        Number($("sim-c").value)
      )
    );
    if (out.error) {
      $("sim-err").textContent = out.error;
      $("sim-status").textContent = "";
      return;
    }
    plotCurves($("regret-canvas"), out.t, out.policies, "regret", "regret");
    plotCurves($("violation-canvas"), out.t, out.policies, "violation", "violation");
    $("sim-status").textContent = `done in ${((performance.now() - t0) / 1000).toFixed(1)} s`;
  }, 20);
}

await init();
for (const id of ["arms", "eta", "gamma", "bound-t"]) $(id).addEventListener("input", refresh);
$("gen-coupon").addEventListener("click", () => generate("coupon"));
$("gen-edx").addEventListener("click", () => generate("edx"));
$("simulate").addEventListener("click", runSimulation);
refresh();
