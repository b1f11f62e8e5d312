"""Local HTTP facade for the enroll / identify / confirm review loop."""

from __future__ import annotations

import base64
import json
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, UploadFile

from . import gallery as gallery_mod
from . import imaging, matching
from .errors import GalleryConflictError, InvalidInputError, InvalidParameterError
from .segmentation import SegmentationParams, segment_scale

MAX_UPLOAD_BYTES = 16 * 1024 * 1024

STATUS_PENDING = "pending_review"
STATUS_CONFIRMED = "confirmed"
STATUS_ENROLLED = "enrolled_new"


def _b64_png(mask) -> str:
    return base64.b64encode(imaging.encode_mask_png(mask)).decode("ascii")


def _cloud_json(cloud) -> list:
    return [[float(x), float(y)] for x, y in np.asarray(cloud)]


def _read_upload(upload: UploadFile) -> bytes:
    data = upload.file.read(MAX_UPLOAD_BYTES + 1)
    if len(data) > MAX_UPLOAD_BYTES:
        raise HTTPException(
            status_code=413, detail=f"upload exceeds limit of {MAX_UPLOAD_BYTES} bytes"
        )
    return data


def create_app(gallery_dir, default_params: SegmentationParams | None = None) -> FastAPI:
    gallery_dir = Path(gallery_dir)
    if not (gallery_dir / "manifest.json").exists():
        gallery_mod.save_gallery(gallery_mod.Gallery(), gallery_dir)
    sessions_dir = gallery_dir / "sessions"
    sessions_dir.mkdir(exist_ok=True)
    params = default_params or SegmentationParams()

    app = FastAPI(title="spotid review service")
    app.state.gallery = gallery_mod.load_gallery(gallery_dir)

    def advisory_threshold():
        roc_path = gallery_dir / "eval" / "roc.json"
        if roc_path.exists():
            data = json.loads(roc_path.read_text())
            return {"eer": data.get("eer"), "eer_threshold": data.get("eer_threshold")}
        return None

    def save_session(session: dict) -> None:
        (sessions_dir / f"{session['session_id']}.json").write_text(
            json.dumps(session)
        )

    def load_session(session_id: str) -> dict:
        path = sessions_dir / f"{session_id}.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return json.loads(path.read_text())

    @app.post("/segment")
    def post_segment(
        file: UploadFile = File(...),
        params_json: str | None = Form(default=None),
    ):
        data = _read_upload(file)
        try:
            import io

            from PIL import Image, UnidentifiedImageError

            try:
                with Image.open(io.BytesIO(data)) as im:
                    rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
            except UnidentifiedImageError:
                raise HTTPException(status_code=422, detail="cannot decode image")
            run_params = params
            if params_json:
                run_params = SegmentationParams.from_dict(json.loads(params_json))
            result = segment_scale(rgb, run_params)
        except InvalidParameterError as err:
            raise HTTPException(status_code=422, detail=str(err))
        return {
            "mask_png": _b64_png(result.mask),
            "dark_thread_png": _b64_png(result.dark_thread_mask),
            "bright_thread_png": _b64_png(result.bright_thread_mask),
            "params_used": result.params_used.to_dict(),
            "width": result.mask.shape[1],
            "height": result.mask.shape[0],
        }

    @app.post("/identify")
    def post_identify(
        file: UploadFile = File(...),
        method: str = Form(default=matching.METHOD_ICP_PROCRUSTES),
        top_n: int = Form(default=5),
    ):
        gallery = app.state.gallery
        if not gallery.records:
            raise HTTPException(status_code=409, detail="gallery is empty")
        if method not in matching.METHODS:
            raise HTTPException(status_code=422, detail=f"unknown method {method!r}")
        mask = imaging.decode_mask_png(_read_upload(file))
        try:
            ranked = matching.identify(
                mask, gallery, method=method, with_alignment=True
            )
        except InvalidInputError as err:
            raise HTTPException(status_code=409, detail=str(err))
        candidates = [
            {
                "individual_id": s.individual_id,
                "scale_id": s.scale_id,
                "dissimilarity": s.dissimilarity,
                "method": s.method,
                "aligned_query_cloud": _cloud_json(s.aligned_query_cloud),
                "record_cloud": _cloud_json(s.record_cloud),
            }
            for s in ranked.scores[:top_n]
        ]
        session = {
            "session_id": uuid.uuid4().hex,
            "status": STATUS_PENDING,
            "decided_individual": None,
            "method": method,
            "top_n": top_n,
            "candidates": candidates,
            "skipped": ranked.skipped,
            "advisory_threshold": advisory_threshold(),
            "query_mask_png": _b64_png(mask),
        }
        save_session(session)
        return session

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return load_session(session_id)

    @app.post("/sessions/{session_id}/confirm")
    def post_confirm(session_id: str, decision: dict):
        session = load_session(session_id)
        if session["status"] != STATUS_PENDING:
            raise HTTPException(
                status_code=409, detail="session already decided"
            )
        has_match = "match" in decision
        has_new = "new_individual" in decision
        if has_match == has_new:
            raise HTTPException(
                status_code=422,
                detail="decision must be exactly one of 'match' or 'new_individual'",
            )
        if has_match:
            individual = str(decision["match"])
            if individual not in app.state.gallery.individuals():
                raise HTTPException(
                    status_code=422, detail=f"unknown individual {individual!r}"
                )
            session["status"] = STATUS_CONFIRMED
            session["decided_individual"] = individual
        else:
            individual = str(decision["new_individual"])
            mask = imaging.decode_mask_png(
                base64.b64decode(session["query_mask_png"])
            )
            try:
                app.state.gallery = gallery_mod.enroll(
                    app.state.gallery, individual, mask
                )
            except GalleryConflictError as err:
                raise HTTPException(status_code=409, detail=str(err))
            except InvalidInputError as err:
                raise HTTPException(status_code=422, detail=str(err))
            session["status"] = STATUS_ENROLLED
            session["decided_individual"] = individual
        save_session(session)
        return session

    @app.get("/gallery")
    def get_gallery():
        gallery = app.state.gallery
        return {
            "manifest_version": gallery.manifest_version,
            "individual_count": len(gallery.individuals()),
            "records": [
                {
                    "individual_id": r.individual_id,
                    "scale_id": r.scale_id,
                    "width": r.width,
                    "height": r.height,
                    "spot_count": len(r.cloud),
                    "light_condition": r.light_condition,
                    "provenance": r.provenance,
                }
                for r in gallery.records
            ],
        }

    @app.post("/gallery/individuals")
    def post_individual(
        file: UploadFile = File(...),
        individual_id: str = Form(...),
        scale_id: str | None = Form(default=None),
        light_condition: str = Form(default="normal"),
        provenance: str = Form(default="ground_truth"),
    ):
        mask = imaging.decode_mask_png(_read_upload(file))
        try:
            app.state.gallery = gallery_mod.enroll(
                app.state.gallery,
                individual_id,
                mask,
                scale_id=scale_id,
                light_condition=light_condition,
                provenance=provenance,
            )
        except GalleryConflictError as err:
            raise HTTPException(status_code=409, detail=str(err))
        except InvalidInputError as err:
            raise HTTPException(status_code=422, detail=str(err))
        record = app.state.gallery.records[-1]
        return {
            "individual_id": record.individual_id,
            "scale_id": record.scale_id,
            "manifest_version": app.state.gallery.manifest_version,
        }

    return app
