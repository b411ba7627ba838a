// Response and request shapes of the annotation service JSON API.
// The UI renders these verbatim; it derives no numbers of its own.

export interface HealthResponse {
  status: string;
  dataset_loaded: boolean;
  model_trained: boolean;
  retraining: boolean;
  last_error?: string;
}

export type FeatureMap = Record<string, number | string | boolean | null>;

export interface BatchItem {
  user_id: string;
  features: FeatureMap;
  influence: number | null;
  sample_tweets: string[];
  current_model_p1: number;
  ambiguity: number;
  resolved: boolean;
  conflicted: boolean;
}

export interface BatchResponse {
  round: number;
  strategy: string;
  items: BatchItem[];
}

export interface LabelRow {
  user_id: string;
  label: 0 | 1;
  annotator_id: string;
}

export interface LabelResult {
  accepted: number;
  conflicts: string[];
}

export interface ConflictItem {
  user_id: string;
  labels: Record<string, number>;
  features: FeatureMap;
  influence: number | null;
  sample_tweets: string[];
}

export interface ConflictsResponse {
  items: ConflictItem[];
}

export interface CurvePoint {
  round: number;
  labeled_size: number;
  accuracy: number;
  precision_0: number;
  recall_0: number;
  f1_0: number;
  precision_1: number;
  recall_1: number;
  f1_1: number;
}

export interface MetricsResponse {
  curve: CurvePoint[];
  learner: string;
  strategy: string;
  round_index: number;
  model_trained: boolean;
}

export interface ServiceConfig {
  strategy: string;
  learner: string;
  batch_size: number;
  learner_params: Record<string, unknown>;
  annotators_required: number;
  base_seed: number;
}

export interface ConfigPatch {
  strategy?: string;
  learner?: string;
  batch_size?: number;
  learner_params?: Record<string, unknown>;
}

export interface UserScore {
  user_id: string;
  raw: FeatureMap;
  normalized: FeatureMap;
  influence: number | null;
}

export const STRATEGIES = ["uncertainty", "margin", "entropy", "random"] as const;
export const LEARNERS = ["rf", "svm", "mlp"] as const;
