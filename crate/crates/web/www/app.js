import init, { analyzeToy, analyzeCsv, rankogramsToy, questionCounts } from "./pkg/credhier_web.js";

const $ = (id) => document.getElementById(id);

const KIND_TITLES = {
  ranked_permutation: "Ranked permutations",
  permutation: "Permutations",
  ranked_combination: "Ranked combinations",
  combination: "Combinations",
  partial_hierarchy: "Partial hierarchies",
  rank_set: "Rank sets (HDR)",
};

function source() {
  return document.querySelector("input[name=source]:checked").value;
}

function params() {
  return {
    k: Number($("k").value),
    seed: Number($("seed").value),
    tau: Number($("tau").value),
    mid: Number($("mid").value),
    trim: $("trim").checked,
  };
}

function drawRankograms(data, tau) {
  const cv = $("rankograms");
  const g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  if (!data) return;
  const n = data.length;
  const w = cv.width / n;
  const h = cv.height - 30;
  data.forEach((t, i) => {
    const x0 = i * w + 10;
    const bw = (w - 20) / t.probabilities.length;
    t.probabilities.forEach((p, r) => {
      g.fillStyle = t.hdr.includes(r + 1) ? "#3a6ea5" : "#c8d6e5";
      g.fillRect(x0 + r * bw + 1, 10 + h * (1 - p), bw - 2, h * p);
    });
    g.fillStyle = "#222";
    g.fillText(`${t.treatment}  HDR mass ${t.hdr_pi_hat.toFixed(3)}`, x0, cv.height - 8);
  });
  g.fillStyle = "#888";
  g.fillText(`τ = ${tau.toFixed(2)}`, cv.width - 60, 12);
}

function drawCatalog(doc) {
  const table = $("catalog");
  table.innerHTML = "";
  const hide = $("hide").checked;
  const kept = doc.entries.filter((e) => !e.redundant).length;
  $("summary").textContent = `(${doc.entries.length} credible, ${kept} retained)`;
  const byKind = new Map();
  for (const e of doc.entries) {
    if (hide && e.redundant) continue;
    if (!byKind.has(e.kind)) byKind.set(e.kind, []);
    byKind.get(e.kind).push(e);
  }
  for (const [kind, rows] of byKind) {
    rows.sort((a, b) => b.pi_hat - a.pi_hat);
    const head = table.insertRow();
    head.className = "kind";
    head.innerHTML = `<th colspan="3">${KIND_TITLES[kind]}</th>`;
    for (const e of rows) {
      const tr = table.insertRow();
      if (e.redundant) tr.className = "redundant";
      const why = e.trimmed_by.map((r) => `rule ${r.rule} via ${r.witness.join(" & ")}`).join("; ");
      tr.insertCell().textContent = e.display;
      const p = tr.insertCell();
      p.className = "num";
      p.textContent = e.pi_hat.toFixed(3);
      tr.insertCell().textContent = why;
    }
  }
}

function drawCounts(rows) {
  const cv = $("counts");
  const g = cv.getContext("2d");
  const pad = 40;
  const maxLog = Math.ceil(rows[rows.length - 1].log10_total);
  const x = (n) => pad + ((n - 2) / (rows.length - 1)) * (cv.width - 2 * pad);
  const y = (v) => cv.height - pad - (v / maxLog) * (cv.height - 2 * pad);
  g.strokeStyle = "#ccc";
  g.fillStyle = "#666";
  for (let v = 0; v <= maxLog; v += 5) {
    g.beginPath();
    g.moveTo(pad, y(v));
    g.lineTo(cv.width - pad, y(v));
    g.stroke();
    g.fillText(`1e${v}`, 4, y(v) + 4);
  }
  g.strokeStyle = "#3a6ea5";
  g.beginPath();
  rows.forEach((r, i) => (i ? g.lineTo(x(r.n), y(r.log10_total)) : g.moveTo(x(r.n), y(r.log10_total))));
  g.stroke();
  rows.forEach((r) => {
    if (r.n % 2 === 0) g.fillText(String(r.n), x(r.n) - 4, cv.height - pad + 14);
  });
  g.fillText("treatments", cv.width / 2 - 25, cv.height - 8);
  cv.title = rows.map((r) => `n=${r.n}: ${r.total}`).join("\n");
}

function refresh() {
  const p = params();
  $("tau-out").textContent = p.tau.toFixed(2);
  $("error").textContent = "";
  try {
    let doc;
    if (source() === "toy") {
      drawRankograms(JSON.parse(rankogramsToy(p.k, p.seed, p.tau)), p.tau);
      doc = JSON.parse(analyzeToy(p.k, p.seed, p.tau, p.mid, p.trim));
    } else {
      drawRankograms(null, p.tau);
      doc = JSON.parse(analyzeCsv($("csv").value, p.tau, p.mid, $("higher").checked, p.trim));
    }
    drawCatalog(doc);
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

await init();
drawCounts(JSON.parse(questionCounts(30)));
for (const el of document.querySelectorAll("input, textarea")) el.addEventListener("input", refresh);
refresh();
