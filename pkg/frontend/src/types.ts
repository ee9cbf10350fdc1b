// Wire types mirroring the service's /v1 JSON API. Field names are the
// canonical serialization schema; do not rename.

export type LabelKind = "true_positive" | "false_positive";

export interface WireLabel {
  class_id: string;
  kind: LabelKind;
  bug_id: string | null;
}

export interface WireEvent {
  event_id: string;
  error_code: string;
  error_message: string;
  sql_type: string;
  sql_subtype: string;
  request_type: string;
  trace_excerpt: string | null;
}

export interface WireNeighbor extends WireLabel {
  training_row_id: number;
  distance: number;
}

export interface WireClassification extends WireLabel {
  event_id: string;
  probability: number;
  confidence: number;
  uncertain: boolean;
  neighbors: WireNeighbor[];
  event: WireEvent;
}

export interface ClassificationsPage {
  replay_id: string;
  capture_id: string;
  model_version: number;
  total: number;
  page: number;
  page_size: number;
  items: WireClassification[];
}

export interface ReplaySummary {
  replay_id: string;
  capture_id: string;
  received_at: string;
  model_version: number;
  total: number;
  uncertain: number;
}

export interface ClassInfo {
  class_id: string;
  kind: LabelKind;
  count: number;
}

export interface ModelInfo {
  version: number;
  created_at: string;
  training_size: number;
  classes: ClassInfo[];
  weights: Record<string, number>;
  k: number;
  thresholds: { min_probability: number; min_confidence: number };
}

export interface ProjectionPoint {
  training_row_id: number;
  class_id: string;
  x: number;
  y: number;
}

export interface Projection {
  version: number;
  points: ProjectionPoint[];
}

export interface Correction {
  event: WireEvent;
  predicted: WireLabel;
  corrected: WireLabel;
  operator_id: string;
  note: string | null;
}

export interface CorrectionReceipt {
  accepted: number;
  duplicates: number;
  new_classes: string[];
}

export interface RetrainResult {
  old_version: number;
  new_version: number;
  training_size: number;
}
