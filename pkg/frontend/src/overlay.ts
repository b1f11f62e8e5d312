/** Render model for the candidate comparison view.
 *
 * Clouds and scores come from the session unmodified; the only client-side
 * addition is the advisory badge, which compares the best server score to
 * the server-provided threshold.
 */

import { Cloud, IdentifySession } from "./types.js";

export interface CandidateOverlay {
  individualId: string;
  scaleId: string;
  /** Exactly the bytes the server sent for this score. */
  dissimilarityDisplay: string;
  queryCloud: Cloud;
  candidateCloud: Cloud;
}

export interface OverlayView {
  sessionId: string;
  pending: boolean;
  candidates: CandidateOverlay[];
  /** Set when an advisory threshold exists and the best score exceeds it. */
  likelyNewIndividual: boolean;
  advisoryThreshold: number | null;
}

export function candidateOverlayView(session: IdentifySession): OverlayView {
  const candidates = session.candidates.map((c) => ({
    individualId: c.individual_id,
    scaleId: c.scale_id,
    dissimilarityDisplay: c.dissimilarity_raw,
    queryCloud: c.aligned_query_cloud,
    candidateCloud: c.record_cloud,
  }));
  const threshold = session.advisory_threshold?.eer_threshold ?? null;
  const best = session.candidates[0];
  return {
    sessionId: session.session_id,
    pending: session.status === "pending_review",
    candidates,
    likelyNewIndividual:
      threshold !== null && best !== undefined && best.dissimilarity > threshold,
    advisoryThreshold: threshold,
  };
}
