import { describe, expect, it } from 'vitest';

import { FormSession, parseEntry, resultGroups } from '../src/form.js';
import type { ConvertResponse, InventoryInfo } from '../src/types.js';

const LABELS = ['None', 'Mild', 'Moderate', 'Severe', 'Very severe'];

function inventory(id: string, itemIds: string[], groups?: (string | undefined)[]): InventoryInfo {
  return {
    inventory_id: id,
    name: `Inventory ${id}`,
    reference_period: 'past week',
    items: itemIds.map((itemId, i) => ({
      item_id: itemId,
      text: `symptom ${itemId}`,
      scale_labels: LABELS,
      ...(groups?.[i] ? { group: groups[i] } : {}),
    })),
  };
}

describe('parseEntry', () => {
  it('accepts integers zero through four', () => {
    for (const raw of ['0', '1', '2', '3', '4', ' 2 ']) {
      const state = parseEntry(raw);
      expect(state.error).toBeNull();
      expect(state.score).toBe(Number(raw.trim()));
    }
  });

  it('rejects out-of-range values', () => {
    for (const raw of ['7', '5', '-1', '12']) {
      const state = parseEntry(raw);
      expect(state.score).toBeNull();
      expect(state.error).toMatch(/0 to 4/);
    }
  });

  it('rejects non-integers', () => {
    for (const raw of ['2.5', 'abc', '1e2', '2,0']) {
      expect(parseEntry(raw).error).toMatch(/whole number/);
    }
  });

  it('treats blank as incomplete, not invalid', () => {
    const state = parseEntry('   ');
    expect(state.score).toBeNull();
    expect(state.error).toBeNull();
  });
});

describe('FormSession', () => {
  function session(): FormSession {
    const s = new FormSession();
    s.setInventories([inventory('src', ['a1', 'a2']), inventory('dst', ['b1', 'b2'])]);
    s.selectSource('src');
    s.selectTarget('dst');
    return s;
  }

  it('creates one entry per source item in inventory order', () => {
    const s = session();
    expect([...s.entries.keys()]).toEqual(['a1', 'a2']);
  });

  it('blocks submission until every entry is valid', () => {
    const s = session();
    expect(s.canSubmit).toBe(false);
    s.setEntry('a1', '3');
    expect(s.canSubmit).toBe(false); // a2 still blank
    s.setEntry('a2', '7');
    expect(s.canSubmit).toBe(false); // out of range
    s.setEntry('a2', '0');
    expect(s.canSubmit).toBe(true);
  });

  it('blocks submission while a request is pending', () => {
    const s = session();
    s.setEntry('a1', '1');
    s.setEntry('a2', '1');
    s.pending = true;
    expect(s.canSubmit).toBe(false);
  });

  it('blocks same-inventory direction', () => {
    const s = session();
    s.setEntry('a1', '1');
    s.setEntry('a2', '1');
    s.selectTarget('src');
    expect(s.canSubmit).toBe(false);
  });

  it('builds a deterministic request from entries', () => {
    const s = session();
    s.setEntry('a1', '4');
    s.setEntry('a2', '0');
    expect(s.buildRequest()).toEqual({
      source: 'src',
      target: 'dst',
      mode: 'deterministic',
      responses: { a1: 4, a2: 0 },
    });
  });

  it('swapping either direction clears stale results', () => {
    const s = session();
    const response: ConvertResponse = {
      estimates: { b1: 1, b2: 2 },
      method: { b1: 'linked', b2: 'linked' },
      link_info: {
        b1: { source_item: 'a1', similarity: 0.9 },
        b2: { source_item: 'a2', similarity: 0.8 },
      },
    };
    s.result = response;
    s.selectTarget('src');
    expect(s.result).toBeNull();

    s.result = response;
    s.selectSource('dst');
    expect(s.result).toBeNull();
  });

  it('editing an offending item clears its highlight', () => {
    const s = session();
    s.offendingItems = ['a1', 'a2'];
    s.setEntry('a1', '2');
    expect(s.offendingItems).toEqual(['a2']);
  });
});

describe('resultGroups', () => {
  const response: ConvertResponse = {
    estimates: { b1: 3, b2: 0, b3: 2 },
    method: { b1: 'linked', b2: 'fallback', b3: 'linked' },
    link_info: {
      b1: { source_item: 'a1', similarity: 0.91 },
      b2: { source_item: 'a2', similarity: 0.2 },
      b3: { source_item: 'a1', similarity: 0.7 },
    },
  };

  it('keeps target inventory item order, flat without groups', () => {
    const groups = resultGroups(response, inventory('dst', ['b1', 'b2', 'b3']));
    expect(groups).toHaveLength(1);
    expect(groups[0]!.heading).toBeNull();
    expect(groups[0]!.rows.map((r) => r.itemId)).toEqual(['b1', 'b2', 'b3']);
    expect(groups[0]!.rows.map((r) => r.estimate)).toEqual([3, 0, 2]);
  });

  it('groups under headings when items carry a group field', () => {
    const inv = inventory('dst', ['b1', 'b2', 'b3'], ['Somatic', 'Affective', 'Somatic']);
    const groups = resultGroups(response, inv);
    expect(groups.map((g) => g.heading)).toEqual(['Somatic', 'Affective']);
    expect(groups[0]!.rows.map((r) => r.itemId)).toEqual(['b1', 'b3']);
    expect(groups[1]!.rows.map((r) => r.itemId)).toEqual(['b2']);
  });

  it('carries method badges, link info, and anchor labels', () => {
    const groups = resultGroups(response, inventory('dst', ['b1', 'b2', 'b3']));
    const rows = groups[0]!.rows;
    expect(rows[0]!.method).toBe('linked');
    expect(rows[1]!.method).toBe('fallback');
    expect(rows[0]!.similarity).toBeCloseTo(0.91);
    expect(rows[0]!.estimateLabel).toBe('Severe');
  });

  it('rejects a response missing an estimate', () => {
    expect(() => resultGroups(response, inventory('dst', ['b1', 'b9']))).toThrow(/b9/);
  });
});
