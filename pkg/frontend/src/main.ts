// DOM wiring for the conversion form. All state lives in FormSession;
// this file only reflects it into the page and forwards events.

import { ApiClient, ApiValidationError } from './api.js';
import { FormSession, resultGroups } from './form.js';
import type { InventoryInfo } from './types.js';

declare global {
  interface Window {
    CROSSWALK_API_BASE?: string;
  }
}

const api = new ApiClient(window.CROSSWALK_API_BASE ?? '');
const session = new FormSession();

const el = {
  banner: document.getElementById('banner') as HTMLDivElement,
  source: document.getElementById('source-select') as HTMLSelectElement,
  target: document.getElementById('target-select') as HTMLSelectElement,
  form: document.getElementById('entry-form') as HTMLDivElement,
  submit: document.getElementById('submit') as HTMLButtonElement,
  results: document.getElementById('results') as HTMLDivElement,
};

function showBanner(message: string, retry?: () => void): void {
  el.banner.replaceChildren();
  el.banner.textContent = message;
  if (retry) {
    const button = document.createElement('button');
    button.textContent = 'Retry';
    button.addEventListener('click', retry);
    el.banner.appendChild(button);
  }
  el.banner.hidden = false;
}

function hideBanner(): void {
  el.banner.hidden = true;
}

function fillSelect(select: HTMLSelectElement, inventories: InventoryInfo[]): void {
  select.replaceChildren(new Option('choose an inventory', ''));
  for (const inv of inventories) {
    select.appendChild(new Option(`${inv.name} (${inv.inventory_id})`, inv.inventory_id));
  }
}

function renderForm(): void {
  el.form.replaceChildren();
  const source = session.source;
  if (!source) {
    el.submit.disabled = true;
    return;
  }
  const table = document.createElement('table');
  const caption = table.createCaption();
  caption.textContent = `Enter integer scores 0–4 (${source.reference_period})`;
  for (const item of source.items) {
    const row = table.insertRow();
    const label = row.insertCell();
    label.textContent = item.text;
    label.title = item.scale_labels
      .map((anchor, level) => `${level} = ${anchor}`)
      .join(', ');
    const cell = row.insertCell();
    const input = document.createElement('input');
    input.type = 'text';
    input.inputMode = 'numeric';
    input.dataset.itemId = item.item_id;
    input.setAttribute('aria-label', item.text);
    const error = document.createElement('span');
    error.className = 'entry-error';
    input.addEventListener('input', () => {
      const state = session.setEntry(item.item_id, input.value);
      error.textContent = state.error ?? '';
      row.classList.toggle('invalid', state.error !== null);
      row.classList.remove('offending');
      updateSubmit();
    });
    cell.appendChild(input);
    cell.appendChild(error);
  }
  el.form.appendChild(table);
  updateSubmit();
}

function updateSubmit(): void {
  el.submit.disabled = !session.canSubmit;
}

function markOffending(): void {
  for (const input of el.form.querySelectorAll<HTMLInputElement>('input[data-item-id]')) {
    const row = input.closest('tr');
    row?.classList.toggle(
      'offending',
      session.offendingItems.includes(input.dataset.itemId ?? ''),
    );
  }
}

function renderResults(): void {
  el.results.replaceChildren();
  const target = session.target;
  if (!session.result || !target) return;
  const heading = document.createElement('h2');
  heading.textContent = `Estimated ${target.name} scores`;
  el.results.appendChild(heading);
  const table = document.createElement('table');
  for (const group of resultGroups(session.result, target)) {
    if (group.heading) {
      const row = table.insertRow();
      const cell = row.insertCell();
      cell.colSpan = 3;
      cell.className = 'group-heading';
      cell.textContent = group.heading;
    }
    for (const item of group.rows) {
      const row = table.insertRow();
      row.insertCell().textContent = item.text;
      const score = row.insertCell();
      score.textContent = String(item.estimate);
      score.title = item.estimateLabel;
      const badge = row.insertCell();
      const mark = document.createElement('span');
      mark.className = `badge ${item.method}`;
      mark.textContent = item.method;
      mark.title =
        item.method === 'linked'
          ? `most similar source item ${item.sourceItem}, similarity ${item.similarity.toFixed(2)}`
          : `estimated from converted items (best link ${item.sourceItem}, similarity ${item.similarity.toFixed(2)})`;
      badge.appendChild(mark);
    }
  }
  el.results.appendChild(table);
}

async function submit(): Promise<void> {
  if (!session.canSubmit) return;
  session.pending = true;
  updateSubmit();
  hideBanner();
  try {
    const request = session.buildRequest();
    session.result = await api.convert(request);
    session.offendingItems = [];
    renderResults();
  } catch (error) {
    if (error instanceof ApiValidationError) {
      session.offendingItems = error.offendingItems;
      showBanner(`Conversion rejected: ${error.message}`);
    } else {
      // network trouble: keep whatever results were already on screen
      showBanner('Could not reach the conversion service. Check the server and try again.');
    }
  } finally {
    session.pending = false;
    updateSubmit();
    markOffending();
  }
}

async function loadInventories(): Promise<void> {
  hideBanner();
  try {
    session.setInventories(await api.inventories());
  } catch {
    showBanner('Failed to load inventories from the service.', () => void loadInventories());
    return;
  }
  fillSelect(el.source, session.inventories);
  fillSelect(el.target, session.inventories);
}

el.source.addEventListener('change', () => {
  session.selectSource(el.source.value || null);
  renderForm();
  renderResults();
});
el.target.addEventListener('change', () => {
  session.selectTarget(el.target.value || null);
  renderResults();
  updateSubmit();
});
el.submit.addEventListener('click', () => void submit());

void loadInventories();
