/** JSON shapes of the identification service; mirrored verbatim. */

export interface SegmentationParams {
  median_window: number;
  gamma: number;
  cv_mu: number;
  cv_lambda1: number;
  cv_lambda2: number;
  cv_iterations: number;
  cv_tol: number;
  area_min: number;
  area_max: number;
}

export interface SegmentResponse {
  mask_png: string;
  dark_thread_png: string;
  bright_thread_png: string;
  params_used: SegmentationParams;
  width: number;
  height: number;
}

export type Cloud = [number, number][];

export interface Candidate {
  individual_id: string;
  scale_id: string;
  dissimilarity: number;
  /** Raw numeric literal exactly as the server serialized it. */
  dissimilarity_raw: string;
  method: string;
  aligned_query_cloud: Cloud;
  record_cloud: Cloud;
}

export interface AdvisoryThreshold {
  eer: number | null;
  eer_threshold: number | null;
}

export type SessionStatus = "pending_review" | "confirmed" | "enrolled_new";

export interface IdentifySession {
  session_id: string;
  status: SessionStatus;
  decided_individual: string | null;
  method: string;
  top_n: number;
  candidates: Candidate[];
  skipped: [string, string, string][];
  advisory_threshold: AdvisoryThreshold | null;
  query_mask_png: string;
}

export interface GalleryRecordView {
  individual_id: string;
  scale_id: string;
  width: number;
  height: number;
  spot_count: number;
  light_condition: string;
  provenance: string;
}

export interface GalleryView {
  manifest_version: number;
  individual_count: number;
  records: GalleryRecordView[];
}

export interface EnrollResponse {
  individual_id: string;
  scale_id: string;
  manifest_version: number;
}

export type Decision = { match: string } | { new_individual: string };

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}
