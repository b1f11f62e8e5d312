/** Thin fetch client for the identification service.
 *
 * This is the only module that talks to the network; everything the UI shows
 * (scores, rankings, clouds) is taken from these responses unmodified.
 */

import {
  ApiError,
  Candidate,
  Decision,
  EnrollResponse,
  GalleryView,
  IdentifySession,
  SegmentResponse,
  SegmentationParams,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** Annotate each candidate with the server's exact numeric literal so the UI
 * can display dissimilarities byte-for-byte as sent, never reformatted. */
export function extractRawDissimilarities(body: string): string[] {
  const raw: string[] = [];
  const pattern = /"dissimilarity"\s*:\s*([0-9eE+.-]+)/g;
  for (const match of body.matchAll(pattern)) {
    raw.push(match[1]!);
  }
  return raw;
}

async function parseOrThrow(res: Response): Promise<string> {
  const body = await res.text();
  if (!res.ok) {
    let detail = body;
    try {
      detail = JSON.parse(body).detail ?? body;
    } catch {
      /* non-JSON error body; report it verbatim */
    }
    throw new ApiError(res.status, detail);
  }
  return body;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async segment(
    imagePng: Uint8Array,
    params?: Partial<SegmentationParams>,
  ): Promise<SegmentResponse> {
    const form = new FormData();
    form.append("file", new Blob([imagePng as BlobPart], { type: "image/png" }), "scale.png");
    if (params) {
      form.append("params_json", JSON.stringify(params));
    }
    const res = await this.fetchImpl(this.url("/segment"), {
      method: "POST",
      body: form,
    });
    return JSON.parse(await parseOrThrow(res)) as SegmentResponse;
  }

  async identify(
    maskPng: Uint8Array,
    options: { method?: string; topN?: number } = {},
  ): Promise<IdentifySession> {
    const form = new FormData();
    form.append("file", new Blob([maskPng as BlobPart], { type: "image/png" }), "mask.png");
    if (options.method) form.append("method", options.method);
    if (options.topN !== undefined) form.append("top_n", String(options.topN));
    const res = await this.fetchImpl(this.url("/identify"), {
      method: "POST",
      body: form,
    });
    const body = await parseOrThrow(res);
    return attachRawScores(JSON.parse(body) as IdentifySession, body);
  }

  async getSession(sessionId: string): Promise<IdentifySession> {
    const res = await this.fetchImpl(this.url(`/sessions/${sessionId}`));
    const body = await parseOrThrow(res);
    return attachRawScores(JSON.parse(body) as IdentifySession, body);
  }

  async confirm(sessionId: string, decision: Decision): Promise<IdentifySession> {
    const res = await this.fetchImpl(this.url(`/sessions/${sessionId}/confirm`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
    const body = await parseOrThrow(res);
    return attachRawScores(JSON.parse(body) as IdentifySession, body);
  }

  async gallery(): Promise<GalleryView> {
    const res = await this.fetchImpl(this.url("/gallery"));
    return JSON.parse(await parseOrThrow(res)) as GalleryView;
  }

  async enroll(
    maskPng: Uint8Array,
    individualId: string,
    scaleId?: string,
  ): Promise<EnrollResponse> {
    const form = new FormData();
    form.append("file", new Blob([maskPng as BlobPart], { type: "image/png" }), "mask.png");
    form.append("individual_id", individualId);
    if (scaleId) form.append("scale_id", scaleId);
    const res = await this.fetchImpl(this.url("/gallery/individuals"), {
      method: "POST",
      body: form,
    });
    return JSON.parse(await parseOrThrow(res)) as EnrollResponse;
  }
}

function attachRawScores(
  session: IdentifySession,
  body: string,
): IdentifySession {
  const raw = extractRawDissimilarities(body);
  session.candidates.forEach((candidate: Candidate, i: number) => {
    candidate.dissimilarity_raw = raw[i] ?? String(candidate.dissimilarity);
  });
  return session;
}
