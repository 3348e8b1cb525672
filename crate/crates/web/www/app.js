import init, { recommend, whatIf, pilot } from "./pkg/pitchfit_web.js";

const ATTRIBUTES = [
  ["A1", "offensive strength"], ["A2", "defensive strength"], ["A3", "midfield control"],
  ["A4", "transition speed"], ["A5", "high press"], ["A6", "width"],
  ["A7", "resilience"], ["A8", "residual energy"], ["A9", "morale"],
  ["A10", "time management"], ["A11", "tactical cohesion"], ["A12", "technical base"],
  ["A13", "physical base"], ["A14", "relational cohesion"],
];
const PILOT = { A1: 0.85, A2: 0.5, A4: 0.85, A5: 0.5, A8: 0.35 };

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x == null ? "" : x.toFixed(4));

function buildTeamControls() {
  const box = $("team");
  for (const [id, label] of ATTRIBUTES) {
    const on = id in PILOT;
    const row = document.createElement("div");
    row.className = "row" + (on ? "" : " off");
    row.innerHTML =
      `<input type="checkbox" id="on-${id}" ${on ? "checked" : ""}>` +
      `<label for="v-${id}">${id} ${label}</label>` +
      `<input type="range" id="v-${id}" min="0" max="1" step="0.05" value="${PILOT[id] ?? 0.5}">` +
      `<output for="v-${id}"></output>`;
    box.appendChild(row);
    $(`on-${id}`).addEventListener("change", (e) => {
      row.classList.toggle("off", !e.target.checked);
      refreshWhatIfChoices();
    });
  }
}

function refreshWhatIfChoices() {
  const select = $("wi-attr");
  const current = select.value || "A8";
  select.innerHTML = "";
  for (const [id, label] of ATTRIBUTES) {
    if (!$(`on-${id}`).checked) continue;
    const opt = new Option(`${id} ${label}`, id);
    select.add(opt);
  }
  if ([...select.options].some((o) => o.value === current)) select.value = current;
}

function request() {
  const team = {};
  for (const [id] of ATTRIBUTES) {
    if ($(`on-${id}`).checked) team[id] = Number($(`v-${id}`).value);
  }
  return {
    team,
    state: { time_remaining: Number($("time").value), score_state: Number($("score").value) },
  };
}

function rankingTable(table, entries) {
  table.innerHTML =
    "<tr><th>#</th><th>strategy</th><th>euclid</th><th>adapted</th><th>score</th></tr>" +
    entries
      .map((e) =>
        `<tr class="${e.rank === 1 ? "top" : ""}"><td>${e.rank}</td><td>${e.name}</td>` +
        `<td>${fmt(e.d_eucl)}</td><td>${fmt(e.d_adapt)}</td><td>${fmt(e.d_comb)}</td></tr>`)
      .join("");
}

function radar(svg, series) {
  const r = 140;
  const n = series.points.length;
  const at = (i, v) => {
    const a = (2 * Math.PI * i) / n - Math.PI / 2;
    return [Math.cos(a) * r * v, Math.sin(a) * r * v];
  };
  const poly = (k, color) =>
    `<polygon points="${series.points.map((p, i) => at(i, p[k]).join(",")).join(" ")}" ` +
    `fill="${color}" fill-opacity="0.2" stroke="${color}" stroke-width="2"/>`;
  let out = "";
  for (const ring of [0.25, 0.5, 0.75, 1]) {
    out += `<polygon points="${series.points.map((_, i) => at(i, ring).join(",")).join(" ")}" fill="none" stroke="#ddd"/>`;
  }
  series.points.forEach((p, i) => {
    const [x, y] = at(i, 1.12);
    out += `<text x="${x}" y="${y}" text-anchor="middle" dominant-baseline="middle">${p[0]}</text>`;
  });
  if (n >= 3) out += poly(2, "#cf222e") + poly(1, "#0969da");
  out += `<text x="-170" y="165" style="fill:#0969da">team</text>`;
  out += `<text x="-120" y="165" style="fill:#cf222e">${series.strategy}</text>`;
  svg.innerHTML = out;
}

function guarded(fn) {
  try {
    fn();
  } catch (e) {
    $("error").textContent = e.message ?? String(e);
  }
}

function updateRecommendation() {
  guarded(() => {
    const out = JSON.parse(recommend(JSON.stringify(request()), $("library").value));
    rankingTable($("ranking"), out.entries);
    radar($("radar"), out.radar);
  });
}

function updateWhatIf() {
  guarded(() => {
    const attr = $("wi-attr").value;
    const overrides = { time_remaining: Number($("wi-time").value), team: {} };
    if (attr) overrides.team[attr] = Number($("wi-value").value);
    const out = JSON.parse(whatIf(JSON.stringify({ base: request(), overrides }), $("library").value));
    $("whatif").innerHTML =
      "<tr><th>#</th><th>strategy</th><th>was</th><th>change</th></tr>" +
      out.rank_deltas
        .slice()
        .sort((a, b) => a.rank - b.rank)
        .map((d) => {
          const cls = d.delta > 0 ? "up" : d.delta < 0 ? "down" : "";
          const sign = d.delta > 0 ? "+" : "";
          return `<tr class="${d.rank === 1 ? "top" : ""}"><td>${d.rank}</td><td>${d.name}</td>` +
            `<td>${d.base_rank}</td><td class="${cls}">${d.delta ? sign + d.delta : ""}</td></tr>`;
        })
        .join("");
  });
}

function updatePilot() {
  guarded(() => {
    const out = JSON.parse(
      pilot(Number($("an-high").value), Number($("an-medium").value), Number($("an-low").value)));
    $("pilot").innerHTML =
      "<tr><th>#</th><th>strategy</th><th>euclid</th><th>adapted</th></tr>" +
      out.rows
        .map((r) => `<tr class="${r.rank === 1 ? "top" : ""}"><td>${r.rank}</td><td>${r.name}</td>` +
          `<td>${fmt(r.d_eucl)}</td><td>${fmt(r.d_adapt)}</td></tr>`)
        .join("");
  });
}

function syncOutputs() {
  for (const out of document.querySelectorAll("output")) {
    const input = $(out.htmlFor.value);
    if (input) out.value = Number(input.value).toFixed(2);
  }
}

function updateAll() {
  $("error").textContent = "";
  syncOutputs();
  updateRecommendation();
  updateWhatIf();
  updatePilot();
}

await init();
buildTeamControls();
refreshWhatIfChoices();
document.body.addEventListener("input", updateAll);
document.body.addEventListener("change", updateAll);
updateAll();
