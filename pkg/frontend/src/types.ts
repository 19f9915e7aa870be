/**
 * Wire types for the /api/v1 review service.
 * Field names mirror the server payloads exactly; do not rename.
 */

export interface ServiceMeta {
  api: string;
  service_version: string;
  drug_classes: string[];
  symptoms: string[];
  flags: string[];
}

export interface PostPayload {
  id: string;
  text: string;
  source: string;
  created_at: string | null;
}

/** LLM output for one post; drug null means the model answered Unknown. */
export interface Suggestion {
  post_id: string;
  status: 'ok' | 'parse_failed' | 'transport_failed';
  drug: string | null;
  symptoms: string[];
  rationale: string;
  raw_response: string;
}

export interface Decision {
  annotator: string;
  drug: string;
  symptoms: string[];
  flags: string[];
  ts: string;
}

export interface Highlight {
  phrase: string;
  label: string;
  offset: number;
}

export type RecordStatus = 'pending' | 'decided' | 'conflict';

/** One queue item as served by /queue/next and /items/{id}. */
export interface RecordView {
  post: PostPayload;
  post_id: string;
  round: number;
  seq: number;
  suggestion: Suggestion | null;
  decisions: Decision[];
  adjudication: Decision | null;
  status: RecordStatus;
  highlights: {
    drugs: Highlight[];
    symptoms: Highlight[];
  };
}

/** Body of POST /items/{id}/decision and /items/{id}/adjudication. */
export interface DecisionBody {
  annotator: string;
  drug: string;
  symptoms: string[];
  flags: string[];
}

export interface DecisionResponse {
  post_id: string;
  status: RecordStatus;
  corrections: number;
}

export interface QueueStats {
  pending: number;
  decided: number;
  conflict: number;
  corrected: number;
  correction_rate: number;
  kappa_drug: number | null;
  kappa_symptoms: number | null;
  round: number;
}

export interface RoundReport {
  round: number;
  suggested: number;
  decided: number;
  corrected: number;
  correction_rate: number;
  kappa_drug: Record<string, unknown> | null;
  kappa_symptoms: Record<string, unknown> | null;
}
