// Typed client for the crosswalk service. All conversion math happens on
// the server; this module only moves JSON.

import type {
  ApiValidationDetail,
  ConvertRequest,
  ConvertResponse,
  CrosswalkInfo,
  InventoryInfo,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiValidationError extends Error {
  readonly status: number;
  readonly offendingItems: string[];

  constructor(status: number, message: string, offendingItems: string[]) {
    super(message);
    this.status = status;
    this.offendingItems = offendingItems;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = '', fetchImpl: FetchLike = (input, init) => fetch(input, init)) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchImpl = fetchImpl;
  }

  async inventories(): Promise<InventoryInfo[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/inventories`);
    if (!response.ok) {
      throw new Error(`inventory listing failed (${response.status})`);
    }
    return response.json();
  }

  async crosswalks(): Promise<CrosswalkInfo[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/crosswalks`);
    if (!response.ok) {
      throw new Error(`crosswalk listing failed (${response.status})`);
    }
    return response.json();
  }

  async convert(request: ConvertRequest): Promise<ConvertResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/convert`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
    if (response.status === 422 || response.status === 404) {
      const body = await response.json().catch(() => ({ detail: 'conversion rejected' }));
      const detail = body.detail as ApiValidationDetail | string;
      if (typeof detail === 'string') {
        throw new ApiValidationError(response.status, detail, []);
      }
      throw new ApiValidationError(response.status, detail.message, detail.offending_items ?? []);
    }
    if (!response.ok) {
      throw new Error(`conversion failed (${response.status})`);
    }
    return response.json();
  }
}
