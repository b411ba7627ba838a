import type { BatchItem, BatchResponse, LabelRow } from "./types";

/** One annotator's pass over a served batch.
 *
 * The server is the source of truth; this only tracks which items the
 * local annotator has already voted on so the queue can advance. Voting
 * again on the same user replaces the previous vote (the server treats a
 * (user_id, annotator_id) resubmission the same way), so nothing here
 * ever double-counts.
 */
export class QueueSession {
  readonly round: number;
  readonly strategy: string;
  readonly items: BatchItem[];
  private votes = new Map<string, 0 | 1>();
  private cursor = 0;

  constructor(batch: BatchResponse, readonly annotatorId: string) {
    this.round = batch.round;
    this.strategy = batch.strategy;
    this.items = batch.items;
  }

  /** Items this annotator can still act on. */
  private actionable(item: BatchItem): boolean {
    return !item.resolved && !item.conflicted && !this.votes.has(item.user_id);
  }

  focused(): BatchItem | null {
    const n = this.items.length;
    for (let step = 0; step < n; step++) {
      const item = this.items[(this.cursor + step) % n];
      if (item && this.actionable(item)) {
        this.cursor = (this.cursor + step) % n;
        return item;
      }
    }
    return null;
  }

  /** Build the label row for the focused item; null when nothing is left. */
  rowFor(label: 0 | 1): LabelRow | null {
    const item = this.focused();
    if (!item) return null;
    return { user_id: item.user_id, label, annotator_id: this.annotatorId };
  }

  /** Record an accepted vote and move focus onward. */
  accept(row: LabelRow): void {
    this.votes.set(row.user_id, row.label);
    this.cursor += 1;
  }

  voteOn(userId: string): 0 | 1 | undefined {
    return this.votes.get(userId);
  }

  progress(): { done: number; total: number } {
    let done = 0;
    for (const item of this.items) {
      if (item.resolved || this.votes.has(item.user_id)) done += 1;
    }
    return { done, total: this.items.length };
  }

  /** True once this annotator has nothing actionable left. */
  exhausted(): boolean {
    return this.focused() === null;
  }
}
