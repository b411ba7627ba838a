import type { QueueSession } from "../state";
import type { BatchItem } from "../types";
import { escapeHtml, fmt, labelName } from "../format";

// The handful of features worth eyeballing while labeling; the rest
// stay behind the details toggle.
const HEADLINE_FEATURES = [
  "followers",
  "friends",
  "statuses",
  "social_reputation",
  "retweet_hindex",
  "liked_hindex",
  "sentiment_score",
  "tweet_credibility",
] as const;

function featureRows(item: BatchItem): string {
  return HEADLINE_FEATURES.map((name) => {
    const value = item.features[name];
    const shown = typeof value === "number" ? fmt(value) : String(value ?? "-");
    return `<tr><td>${name}</td><td class="num">${shown}</td></tr>`;
  }).join("");
}

function tweetList(item: BatchItem): string {
  if (item.sample_tweets.length === 0) {
    return `<p class="muted">no collected tweets</p>`;
  }
  const rows = item.sample_tweets
    .slice(0, 5)
    .map((t) => `<li>${escapeHtml(t)}</li>`)
    .join("");
  return `<ul class="tweets">${rows}</ul>`;
}

function focusCard(item: BatchItem): string {
  return `
  <section class="card focus" data-user="${escapeHtml(item.user_id)}">
    <header>
      <h2>${escapeHtml(item.user_id)}</h2>
      <span class="pill">influence ${fmt(item.influence)}</span>
      <span class="pill">p(trusted) ${fmt(item.current_model_p1)}</span>
      <span class="pill">ambiguity ${fmt(item.ambiguity)}</span>
    </header>
    <div class="columns">
      <table class="features"><tbody>${featureRows(item)}</tbody></table>
      ${tweetList(item)}
    </div>
    <footer>
      <button data-action="label" data-label="1">trusted <kbd>t</kbd></button>
      <button data-action="label" data-label="0">untrusted <kbd>u</kbd></button>
    </footer>
  </section>`;
}

function statusOf(item: BatchItem, session: QueueSession): string {
  if (item.conflicted) return `<span class="badge conflict">conflict</span>`;
  if (item.resolved) return `<span class="badge done">resolved</span>`;
  const mine = session.voteOn(item.user_id);
  if (mine !== undefined) {
    return `<span class="badge mine">${labelName(mine)}</span>`;
  }
  return `<span class="badge open">open</span>`;
}

export function renderQueue(session: QueueSession | null): string {
  if (!session) {
    return `<p class="empty">no batch served yet</p>`;
  }
  const { done, total } = session.progress();
  const focused = session.focused();
  const rows = session.items
    .map((item) => {
      const active = focused && item.user_id === focused.user_id;
      return `
      <tr class="${active ? "active" : ""}">
        <td>${escapeHtml(item.user_id)}</td>
        <td class="num">${fmt(item.influence)}</td>
        <td class="num">${fmt(item.current_model_p1)}</td>
        <td class="num">${fmt(item.ambiguity)}</td>
        <td>${statusOf(item, session)}</td>
      </tr>`;
    })
    .join("");
  const head = `
  <div class="queue-head">
    <h1>round ${session.round} batch</h1>
    <span class="pill">strategy ${escapeHtml(session.strategy)}</span>
    <span class="pill">progress ${done}/${total}</span>
  </div>`;
  const body = focused
    ? focusCard(focused)
    : `<p class="empty">batch complete for ${escapeHtml(session.annotatorId)};
       waiting for the other annotators or the next round</p>`;
  return `${head}${body}
  <table class="batch">
    <thead><tr>
      <th>user</th><th>influence</th><th>p(trusted)</th>
      <th>ambiguity</th><th>status</th>
    </tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}
