import type { ConflictsResponse } from "../types";
import { escapeHtml, fmt, labelName } from "../format";

export function renderConflicts(conflicts: ConflictsResponse | null): string {
  if (!conflicts || conflicts.items.length === 0) {
    return `<p class="empty">no conflicting labels</p>`;
  }
  const cards = conflicts.items
    .map((item) => {
      const votes = Object.entries(item.labels)
        .map(
          ([annotator, label]) =>
            `<li><code>${escapeHtml(annotator)}</code> said
             <strong>${labelName(label)}</strong></li>`,
        )
        .join("");
      const tweets = item.sample_tweets
        .slice(0, 3)
        .map((t) => `<li>${escapeHtml(t)}</li>`)
        .join("");
      return `
      <section class="card conflict" data-user="${escapeHtml(item.user_id)}">
        <header>
          <h2>${escapeHtml(item.user_id)}</h2>
          <span class="pill">influence ${fmt(item.influence)}</span>
        </header>
        <ul class="votes">${votes}</ul>
        ${tweets ? `<ul class="tweets">${tweets}</ul>` : ""}
        <footer>
          <button data-action="adjudicate"
                  data-user="${escapeHtml(item.user_id)}"
                  data-label="1">final: trusted</button>
          <button data-action="adjudicate"
                  data-user="${escapeHtml(item.user_id)}"
                  data-label="0">final: untrusted</button>
        </footer>
      </section>`;
    })
    .join("");
  return `<h1>conflicts (${conflicts.items.length})</h1>${cards}`;
}
