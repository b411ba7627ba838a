import type { HealthResponse, MetricsResponse, ServiceConfig } from "../types";
import { LEARNERS, STRATEGIES } from "../types";
import { escapeHtml, fmt } from "../format";

function options(values: readonly string[], current: string): string {
  return values
    .map(
      (v) =>
        `<option value="${v}" ${v === current ? "selected" : ""}>${v}</option>`,
    )
    .join("");
}

function curveTable(metrics: MetricsResponse): string {
  const rows = metrics.curve
    .map(
      (p) => `
      <tr>
        <td class="num">${p.round}</td>
        <td class="num">${p.labeled_size}</td>
        <td class="num">${fmt(p.accuracy)}</td>
        <td class="num">${fmt(p.precision_1)}</td>
        <td class="num">${fmt(p.recall_1)}</td>
        <td class="num">${fmt(p.f1_1)}</td>
        <td class="num">${fmt(p.f1_0)}</td>
      </tr>`,
    )
    .join("");
  return `
  <table class="curve">
    <thead><tr>
      <th>round</th><th>labeled</th><th>accuracy</th>
      <th>precision (trusted)</th><th>recall (trusted)</th>
      <th>F1 trusted</th><th>F1 untrusted</th>
    </tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

export function renderDashboard(
  metrics: MetricsResponse | null,
  config: ServiceConfig | null,
  health: HealthResponse | null,
): string {
  if (!metrics || !metrics.model_trained || metrics.curve.length === 0) {
    return `<p class="empty">seed training pending</p>`;
  }
  const retraining = health?.retraining
    ? `<span class="pill busy">retraining</span>`
    : "";
  const picker = config
    ? `
    <form class="config" data-form="config">
      <label>strategy
        <select name="strategy">${options(STRATEGIES, config.strategy)}</select>
      </label>
      <label>learner
        <select name="learner">${options(LEARNERS, config.learner)}</select>
      </label>
      <label>batch size
        <input name="batch_size" type="number" min="1"
               value="${config.batch_size}">
      </label>
      <button data-action="apply-config">apply for next selection</button>
    </form>`
    : "";
  return `
  <div class="dash-head">
    <h1>learning curve</h1>
    <span class="pill">learner ${escapeHtml(metrics.learner)}</span>
    <span class="pill">strategy ${escapeHtml(metrics.strategy)}</span>
    <span class="pill">round ${metrics.round_index}</span>
    ${retraining}
  </div>
  <canvas id="curve-chart" width="640" height="280"></canvas>
  ${curveTable(metrics)}
  ${picker}`;
}
