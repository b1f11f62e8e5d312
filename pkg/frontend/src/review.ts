/** Forward-only review state machine.
 *
 * upload -> crop_orient -> segment_review -> candidate_review -> done.
 * Back-navigation is allowed only through explicit goBack(); nothing is
 * decided client-side — every advance past segment/identify/confirm stores
 * the server response verbatim and the UI renders that.
 */

import { ApiClient } from "./api.js";
import { CropRect, RgbaImage, cropAndOrient, decodePng, encodePng } from "./crop.js";
import { Decision, IdentifySession, SegmentResponse } from "./types.js";

export type Stage =
  | "upload"
  | "crop_orient"
  | "segment_review"
  | "candidate_review"
  | "done";

const ORDER: Stage[] = [
  "upload",
  "crop_orient",
  "segment_review",
  "candidate_review",
  "done",
];

export type Selection =
  | { kind: "candidate"; index: number }
  | { kind: "new_individual"; individualId: string };

export class ReviewWorkstation {
  private stage: Stage = "upload";
  private original: RgbaImage | null = null;
  private oriented: RgbaImage | null = null;
  private segmentResponse: SegmentResponse | null = null;
  private session: IdentifySession | null = null;
  private selection: Selection | null = null;
  private confirmInFlight: Promise<IdentifySession> | null = null;

  constructor(private readonly api: ApiClient) {}

  get currentStage(): Stage {
    return this.stage;
  }

  get currentSession(): IdentifySession | null {
    return this.session;
  }

  get segmentation(): SegmentResponse | null {
    return this.segmentResponse;
  }

  get selectedChoice(): Selection | null {
    return this.selection;
  }

  private advanceTo(next: Stage): void {
    if (ORDER.indexOf(next) !== ORDER.indexOf(this.stage) + 1) {
      throw new Error(`cannot advance from ${this.stage} to ${next}`);
    }
    this.stage = next;
  }

  /** Explicit single-step back-navigation; decisions are never undone. */
  goBack(): void {
    const index = ORDER.indexOf(this.stage);
    if (this.stage === "done") {
      throw new Error("cannot navigate back from a decided session");
    }
    if (index === 0) {
      throw new Error("already at the first stage");
    }
    this.stage = ORDER[index - 1]!;
    if (this.stage === "crop_orient") this.segmentResponse = null;
    if (this.stage === "segment_review") {
      this.session = null;
      this.selection = null;
    }
  }

  upload(imagePng: Uint8Array): void {
    if (this.stage !== "upload") {
      throw new Error(`upload is not available at stage ${this.stage}`);
    }
    this.original = decodePng(imagePng);
    this.advanceTo("crop_orient");
  }

  /** Crop/orient client-side, then submit exactly those pixels to /segment. */
  async submitCrop(rect: CropRect, turns: number): Promise<SegmentResponse> {
    if (this.stage !== "crop_orient" || this.original === null) {
      throw new Error(`crop is not available at stage ${this.stage}`);
    }
    this.oriented = cropAndOrient(this.original, rect, turns);
    this.segmentResponse = await this.api.segment(encodePng(this.oriented));
    this.advanceTo("segment_review");
    return this.segmentResponse;
  }

  /** Bytes submitted to the server for the current crop (for verification). */
  orientedPng(): Uint8Array {
    if (this.oriented === null) {
      throw new Error("no oriented crop yet");
    }
    return encodePng(this.oriented);
  }

  async acceptSegmentation(topN = 5): Promise<IdentifySession> {
    if (this.stage !== "segment_review" || this.segmentResponse === null) {
      throw new Error(`identify is not available at stage ${this.stage}`);
    }
    const maskPng = Buffer.from(this.segmentResponse.mask_png, "base64");
    this.session = await this.api.identify(new Uint8Array(maskPng), { topN });
    this.advanceTo("candidate_review");
    return this.session;
  }

  select(selection: Selection): void {
    if (this.stage !== "candidate_review" || this.session === null) {
      throw new Error(`selection is not available at stage ${this.stage}`);
    }
    if (
      selection.kind === "candidate" &&
      (selection.index < 0 || selection.index >= this.session.candidates.length)
    ) {
      throw new Error(`candidate index ${selection.index} out of range`);
    }
    this.selection = selection;
  }

  get confirmEnabled(): boolean {
    return this.stage === "candidate_review" && this.selection !== null;
  }

  /** Submit the decision. Idempotent: a double-click while the request is in
   * flight (or after it resolved) reuses the single confirm request. */
  confirm(): Promise<IdentifySession> {
    if (this.confirmInFlight !== null) {
      return this.confirmInFlight;
    }
    if (!this.confirmEnabled || this.session === null || this.selection === null) {
      return Promise.reject(
        new Error("confirm requires a pending session and a selection"),
      );
    }
    const decision: Decision =
      this.selection.kind === "candidate"
        ? { match: this.session.candidates[this.selection.index]!.individual_id }
        : { new_individual: this.selection.individualId };
    this.confirmInFlight = this.api
      .confirm(this.session.session_id, decision)
      .then((session) => {
        this.session = session;
        this.advanceTo("done");
        return session;
      })
      .catch((err) => {
        this.confirmInFlight = null; // allow retry after a failure
        throw err;
      });
    return this.confirmInFlight;
  }
}
