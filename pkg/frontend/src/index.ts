export { ApiClient, extractRawDissimilarities } from "./api.js";
export {
  cropAndOrient,
  cropRect,
  decodePng,
  encodePng,
  rotateQuarter,
  validateRect,
} from "./crop.js";
export type { CropRect, RgbaImage } from "./crop.js";
export { candidateOverlayView } from "./overlay.js";
export type { CandidateOverlay, OverlayView } from "./overlay.js";
export { ReviewWorkstation } from "./review.js";
export type { Selection, Stage } from "./review.js";
export * from "./types.js";
