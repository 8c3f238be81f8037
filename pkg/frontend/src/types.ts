// Payload shapes of the conversion service /v1 endpoints.

export interface InventoryItem {
  item_id: string;
  text: string;
  scale_labels: string[];
  group?: string;
}

export interface InventoryInfo {
  inventory_id: string;
  name: string;
  reference_period: string;
  items: InventoryItem[];
}

export interface CrosswalkInfo {
  source: string;
  target: string;
  tau: number;
  backend_tag: string;
}

export interface ConvertRequest {
  source: string;
  target: string;
  mode: 'deterministic';
  responses: Record<string, number>;
}

export interface LinkInfo {
  source_item: string;
  similarity: number;
}

export interface ConvertResponse {
  estimates: Record<string, number>;
  method: Record<string, 'linked' | 'fallback'>;
  link_info: Record<string, LinkInfo>;
}

export interface ApiValidationDetail {
  message: string;
  offending_items: string[];
}
