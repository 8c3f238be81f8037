// Form session logic: entry validation, submit gating, and the result
// table model. Pure data transforms, so the whole module is unit-testable
// without a DOM. Estimates are always taken verbatim from the service
// response; nothing here computes or adjusts a converted score.

import type { ConvertRequest, ConvertResponse, InventoryInfo } from './types.js';

export interface EntryState {
  raw: string;
  score: number | null;
  error: string | null;
}

export function parseEntry(raw: string): EntryState {
  const trimmed = raw.trim();
  if (trimmed === '') {
    return { raw, score: null, error: null }; // incomplete, not yet wrong
  }
  if (!/^-?\d+$/.test(trimmed)) {
    return { raw, score: null, error: 'enter a whole number' };
  }
  const value = Number(trimmed);
  if (value < 0 || value > 4) {
    return { raw, score: null, error: 'scores run from 0 to 4' };
  }
  return { raw, score: value, error: null };
}

export interface ResultRow {
  itemId: string;
  text: string;
  estimate: number;
  estimateLabel: string;
  method: 'linked' | 'fallback';
  sourceItem: string;
  similarity: number;
}

export interface ResultGroup {
  heading: string | null;
  rows: ResultRow[];
}

/** Rows in target item order, grouped under optional item group headings. */
export function resultGroups(
  response: ConvertResponse,
  target: InventoryInfo,
): ResultGroup[] {
  const groups: ResultGroup[] = [];
  const index = new Map<string | null, ResultGroup>();
  for (const item of target.items) {
    const estimate = response.estimates[item.item_id];
    if (estimate === undefined) {
      throw new Error(`service response missing estimate for ${item.item_id}`);
    }
    const link = response.link_info[item.item_id];
    const method = response.method[item.item_id];
    const heading = item.group ?? null;
    let group = index.get(heading);
    if (!group) {
      group = { heading, rows: [] };
      index.set(heading, group);
      groups.push(group);
    }
    group.rows.push({
      itemId: item.item_id,
      text: item.text,
      estimate,
      estimateLabel: item.scale_labels[estimate] ?? String(estimate),
      method: method ?? 'linked',
      sourceItem: link?.source_item ?? '',
      similarity: link?.similarity ?? 0,
    });
  }
  return groups;
}

export class FormSession {
  inventories: InventoryInfo[] = [];
  sourceId: string | null = null;
  targetId: string | null = null;
  entries = new Map<string, EntryState>();
  result: ConvertResponse | null = null;
  pending = false;
  offendingItems: string[] = [];

  setInventories(inventories: InventoryInfo[]): void {
    this.inventories = inventories;
  }

  inventory(id: string | null): InventoryInfo | null {
    return this.inventories.find((inv) => inv.inventory_id === id) ?? null;
  }

  get source(): InventoryInfo | null {
    return this.inventory(this.sourceId);
  }

  get target(): InventoryInfo | null {
    return this.inventory(this.targetId);
  }

  selectSource(id: string | null): void {
    if (id === this.sourceId) return;
    this.sourceId = id;
    this.entries = new Map();
    const source = this.source;
    if (source) {
      for (const item of source.items) {
        this.entries.set(item.item_id, parseEntry(''));
      }
    }
    this.clearResult();
  }

  selectTarget(id: string | null): void {
    if (id === this.targetId) return;
    this.targetId = id;
    this.clearResult(); // direction change invalidates prior estimates
  }

  clearResult(): void {
    this.result = null;
    this.offendingItems = [];
  }

  setEntry(itemId: string, raw: string): EntryState {
    const state = parseEntry(raw);
    this.entries.set(itemId, state);
    this.offendingItems = this.offendingItems.filter((id) => id !== itemId);
    return state;
  }

  /** Every source item has a valid 0..4 entry. */
  get complete(): boolean {
    const source = this.source;
    if (!source) return false;
    return source.items.every((item) => this.entries.get(item.item_id)?.score != null);
  }

  get canSubmit(): boolean {
    return (
      !this.pending &&
      this.sourceId !== null &&
      this.targetId !== null &&
      this.sourceId !== this.targetId &&
      this.complete
    );
  }

  buildRequest(): ConvertRequest {
    if (!this.canSubmit || !this.sourceId || !this.targetId) {
      throw new Error('form is not ready to submit');
    }
    const responses: Record<string, number> = {};
    for (const item of this.source!.items) {
      responses[item.item_id] = this.entries.get(item.item_id)!.score!;
    }
    return {
      source: this.sourceId,
      target: this.targetId,
      mode: 'deterministic',
      responses,
    };
  }
}
