// UI/API equivalence against the recorded service captures: the form must
// send exactly the golden request, display the golden response verbatim,
// and agree with the command-line conversion of the same inputs.

import { readFileSync } from 'node:fs';

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { FormSession, resultGroups } from '../src/form.js';
import type { ConvertRequest, ConvertResponse, InventoryInfo } from '../src/types.js';

function fixture<T>(name: string): T {
  const url = new URL(`../../fixtures/golden/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, 'utf-8')) as T;
}

const goldenRequest = fixture<ConvertRequest>('convert_request.json');
const goldenResponse = fixture<ConvertResponse>('convert_response.json');
const inventories = fixture<InventoryInfo[]>('inventories_response.json');

function cliEstimates(): Record<string, number> {
  const url = new URL('../../fixtures/golden/cli_convert_output.csv', import.meta.url);
  const lines = readFileSync(url, 'utf-8').trim().split('\n').slice(1);
  const estimates: Record<string, number> = {};
  for (const line of lines) {
    const [, , itemId, score] = line.split(',');
    estimates[itemId!] = Number(score);
  }
  return estimates;
}

function goldenSession(): FormSession {
  const session = new FormSession();
  session.setInventories(inventories);
  session.selectSource(goldenRequest.source);
  session.selectTarget(goldenRequest.target);
  for (const [itemId, score] of Object.entries(goldenRequest.responses)) {
    session.setEntry(itemId, String(score));
  }
  return session;
}

describe('golden equivalence', () => {
  it('the form reproduces the golden request exactly', () => {
    expect(goldenSession().buildRequest()).toEqual(goldenRequest);
  });

  it('displayed estimates equal the API body and the CLI conversion', async () => {
    const log: unknown[] = [];
    const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
      log.push({ url, body: JSON.parse(init!.body as string) });
      return new Response(JSON.stringify(goldenResponse), {
        status: 200,
        headers: { 'Content-Type': 'application/json' },
      });
    };
    const session = goldenSession();
    const client = new ApiClient('', fetchImpl);
    session.result = await client.convert(session.buildRequest());

    const target = inventories.find((inv) => inv.inventory_id === goldenRequest.target)!;
    const rows = resultGroups(session.result, target).flatMap((group) => group.rows);
    const displayed = Object.fromEntries(rows.map((row) => [row.itemId, row.estimate]));

    expect(displayed).toEqual(goldenResponse.estimates);
    expect(displayed).toEqual(cliEstimates());
    expect(log).toHaveLength(1); // every estimate came from this one API call
  });

  it('result rows follow the target inventory order with method badges', () => {
    const target = inventories.find((inv) => inv.inventory_id === goldenRequest.target)!;
    const rows = resultGroups(goldenResponse, target).flatMap((group) => group.rows);
    expect(rows.map((row) => row.itemId)).toEqual(
      [...target.items]
        .sort(
          (a, b) =>
            rows.findIndex((r) => r.itemId === a.item_id) -
            rows.findIndex((r) => r.itemId === b.item_id),
        )
        .map((item) => item.item_id),
    );
    for (const row of rows) {
      expect(goldenResponse.method[row.itemId]).toBe(row.method);
      expect(goldenResponse.link_info[row.itemId]!.similarity).toBeCloseTo(row.similarity);
    }
  });

  it('displayed values track the response, proving no local computation', async () => {
    const mutated: ConvertResponse = JSON.parse(JSON.stringify(goldenResponse));
    const firstItem = Object.keys(mutated.estimates)[0]!;
    mutated.estimates[firstItem] = (mutated.estimates[firstItem]! + 2) % 5;
    const fetchImpl = async (): Promise<Response> =>
      new Response(JSON.stringify(mutated), {
        status: 200,
        headers: { 'Content-Type': 'application/json' },
      });
    const session = goldenSession();
    session.result = await new ApiClient('', fetchImpl).convert(session.buildRequest());
    const target = inventories.find((inv) => inv.inventory_id === goldenRequest.target)!;
    const rows = resultGroups(session.result, target).flatMap((group) => group.rows);
    const displayed = Object.fromEntries(rows.map((row) => [row.itemId, row.estimate]));
    expect(displayed).toEqual(mutated.estimates);
    expect(displayed).not.toEqual(goldenResponse.estimates);
  });

  it('groups the demo target inventory under its group headings', () => {
    const target = inventories.find((inv) => inv.inventory_id === goldenRequest.target)!;
    const groups = resultGroups(goldenResponse, target);
    expect(groups.map((g) => g.heading)).toEqual(['Somatic', 'Affective', 'Cognitive']);
  });
});
