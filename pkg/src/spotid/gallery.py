"""Persistent store of enrolled individuals and their scale samples.

Directory layout:

    <root>/manifest.json
    <root>/masks/<individual>_<scale>.png
    <root>/clouds/<individual>_<scale>.csv

The centroid cloud is derived data: it is regenerated from the mask and
verified on load rather than trusted.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import imaging
from .errors import (
    GalleryConflictError,
    GalleryIntegrityError,
    InvalidInputError,
    InvalidParameterError,
)
from .matching import extract_centroids

LIGHT_CONDITIONS = ("normal", "ideal", "hard_exposed")
PROVENANCES = ("ground_truth", "automatic")

_CLOUD_TOL = 1e-6


@dataclass(frozen=True)
class GalleryRecord:
    individual_id: str
    scale_id: str
    mask_path: Path | None
    cloud: np.ndarray
    width: int
    height: int
    light_condition: str = "normal"
    provenance: str = "ground_truth"
    mask: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.individual_id or not self.scale_id:
            raise InvalidInputError("individual_id and scale_id must be non-empty")
        if self.light_condition not in LIGHT_CONDITIONS:
            raise InvalidInputError(f"unknown light condition {self.light_condition!r}")
        if self.provenance not in PROVENANCES:
            raise InvalidInputError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "cloud", np.asarray(self.cloud, dtype=np.float64))

    @property
    def key(self) -> tuple[str, str]:
        return (self.individual_id, self.scale_id)


@dataclass
class Gallery:
    records: list[GalleryRecord] = field(default_factory=list)
    manifest_version: int = 0
    root: Path | None = None

    def mask_of(self, record: GalleryRecord) -> np.ndarray:
        if record.mask is not None:
            return record.mask
        if record.mask_path is None:
            raise GalleryIntegrityError(
                f"record {record.individual_id}:{record.scale_id} has no mask"
            )
        return imaging.load_mask(record.mask_path)

    def get(self, individual_id: str, scale_id: str) -> GalleryRecord:
        for r in self.records:
            if r.key == (individual_id, scale_id):
                return r
        raise InvalidInputError(f"no record {individual_id}:{scale_id}")

    def individuals(self) -> list[str]:
        return sorted({r.individual_id for r in self.records})


def record_from_mask(
    individual_id: str,
    scale_id: str,
    mask,
    light_condition: str = "normal",
    provenance: str = "ground_truth",
    mask_path: Path | None = None,
) -> GalleryRecord:
    mask = imaging.check_mask(mask)
    return GalleryRecord(
        individual_id=individual_id,
        scale_id=scale_id,
        mask_path=mask_path,
        cloud=extract_centroids(mask),
        width=mask.shape[1],
        height=mask.shape[0],
        light_condition=light_condition,
        provenance=provenance,
        mask=mask,
    )


def in_memory_gallery(masks_by_key: dict, **record_kwargs) -> Gallery:
    """Build an unpersisted gallery from {(individual, scale): mask}."""
    records = [
        record_from_mask(ind, sc, mask, **record_kwargs)
        for (ind, sc), mask in masks_by_key.items()
    ]
    return Gallery(records=records)


def _mask_name(record: GalleryRecord) -> str:
    return f"{record.individual_id}_{record.scale_id}.png"


def _cloud_name(record: GalleryRecord) -> str:
    return f"{record.individual_id}_{record.scale_id}.csv"


def save_cloud_csv(cloud, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in np.asarray(cloud, dtype=np.float64):
            writer.writerow([repr(float(x)), repr(float(y))])


def load_cloud_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise InvalidInputError(f"cloud CSV {path} must start with header 'x,y'")
    if len(rows) == 1:
        return np.empty((0, 2))
    return np.array([[float(r[0]), float(r[1])] for r in rows[1:]])


def save_gallery(gallery: Gallery, root) -> Gallery:
    """Persist manifest, masks and cloud sidecars under `root`."""
    root = Path(root)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    (root / "clouds").mkdir(parents=True, exist_ok=True)
    entries = []
    new_records = []
    for record in gallery.records:
        mask = gallery.mask_of(record)
        mask_path = root / "masks" / _mask_name(record)
        imaging.save_mask(mask, mask_path)
        save_cloud_csv(record.cloud, root / "clouds" / _cloud_name(record))
        entries.append(
            {
                "individual_id": record.individual_id,
                "scale_id": record.scale_id,
                "mask": f"masks/{_mask_name(record)}",
                "cloud": f"clouds/{_cloud_name(record)}",
                "width": record.width,
                "height": record.height,
                "light_condition": record.light_condition,
                "provenance": record.provenance,
            }
        )
        new_records.append(replace(record, mask_path=mask_path, mask=mask))
    manifest = {"manifest_version": gallery.manifest_version, "records": entries}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return Gallery(records=new_records, manifest_version=gallery.manifest_version, root=root)


def load_gallery(path) -> Gallery:
    """Load and validate a gallery; any invariant breach names the record."""
    path = Path(path)
    manifest_path = path if path.is_file() else path / "manifest.json"
    root = manifest_path.parent
    if not manifest_path.exists():
        raise GalleryIntegrityError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as err:
        raise GalleryIntegrityError(f"malformed manifest: {err}") from err

    records = []
    seen = set()
    for entry in manifest.get("records", []):
        key = (entry.get("individual_id"), entry.get("scale_id"))
        name = f"{key[0]}:{key[1]}"
        if key in seen:
            raise GalleryIntegrityError(f"duplicate record {name}")
        seen.add(key)
        mask_path = root / entry["mask"]
        if not mask_path.exists():
            raise GalleryIntegrityError(f"record {name}: missing mask {mask_path}")
        mask = imaging.load_mask(mask_path)
        if mask.shape != (entry["height"], entry["width"]):
            raise GalleryIntegrityError(
                f"record {name}: mask dimensions {mask.shape[::-1]} do not match "
                f"manifest ({entry['width']}, {entry['height']})"
            )
        cloud = load_cloud_csv(root / entry["cloud"])
        derived = extract_centroids(mask)
        if derived.shape != cloud.shape or (
            derived.size and np.abs(derived - cloud).max() > _CLOUD_TOL
        ):
            raise GalleryIntegrityError(
                f"record {name}: cached cloud does not match mask centroids"
            )
        records.append(
            GalleryRecord(
                individual_id=entry["individual_id"],
                scale_id=entry["scale_id"],
                mask_path=mask_path,
                cloud=cloud,
                width=entry["width"],
                height=entry["height"],
                light_condition=entry.get("light_condition", "normal"),
                provenance=entry.get("provenance", "ground_truth"),
            )
        )
    return Gallery(
        records=records,
        manifest_version=int(manifest.get("manifest_version", 0)),
        root=root,
    )


def enroll(
    gallery: Gallery,
    individual_id: str,
    mask,
    scale_id: str | None = None,
    light_condition: str = "normal",
    provenance: str = "ground_truth",
) -> Gallery:
    """Persist a new scale sample and return the updated gallery.

    Enrollment is serialized through a manifest-version compare-and-swap:
    a concurrent writer raises GalleryConflictError, never silently loses data.
    """
    if gallery.root is None:
        raise InvalidInputError("gallery is not persisted; save it first")
    if scale_id is None:
        existing = [r.scale_id for r in gallery.records if r.individual_id == individual_id]
        k = len(existing) + 1
        while f"s{k}" in existing:
            k += 1
        scale_id = f"s{k}"
    if any(r.key == (individual_id, scale_id) for r in gallery.records):
        raise InvalidInputError(f"duplicate record {individual_id}:{scale_id}")

    on_disk = load_gallery(gallery.root)
    if on_disk.manifest_version != gallery.manifest_version:
        raise GalleryConflictError(
            f"manifest version changed ({gallery.manifest_version} -> "
            f"{on_disk.manifest_version}); reload and retry"
        )

    record = record_from_mask(
        individual_id, scale_id, mask, light_condition, provenance
    )
    updated = Gallery(
        records=list(gallery.records) + [record],
        manifest_version=gallery.manifest_version + 1,
        root=gallery.root,
    )
    return save_gallery(updated, gallery.root)


@dataclass(frozen=True)
class TransformBounds:
    max_rotation_deg: float = 20.0
    max_translation_frac: float = 0.1  # of the image side


def _poisson_disc(rng, n_points, width, height, margin, min_dist, max_tries=50000):
    """Dart-throwing Poisson-disc sampling inside the margin box."""
    points = []
    tries = 0
    while len(points) < n_points and tries < max_tries:
        tries += 1
        p = rng.uniform([margin, margin], [width - margin, height - margin])
        if all(np.hypot(*(p - q)) >= min_dist for q in points):
            points.append(p)
    if len(points) < n_points:
        raise InvalidParameterError(
            f"could not place {n_points} spots with spacing {min_dist} "
            f"in a {width}x{height} frame"
        )
    return np.array(points)


def _rasterize_spots(points, width, height, radius):
    yy, xx = np.mgrid[:height, :width]
    mask = np.zeros((height, width), dtype=bool)
    for x, y in points:
        mask |= (xx - x) ** 2 + (yy - y) ** 2 <= radius**2
    return mask


def generate_synthetic_corpus(
    individuals: int,
    samples_per: int,
    jitter_sigma: float = 1.0,
    transform_bounds: TransformBounds | None = None,
    seed: int = 0,
    width: int = 256,
    height: int = 256,
    spot_radius: float = 3.0,
    spots_range: tuple[int, int] = (10, 40),
    out_dir=None,
) -> tuple[Gallery, dict]:
    """Seeded synthetic gallery standing in for the restricted field corpus.

    Per individual: a Poisson-disc base spot layout. Per sample: Gaussian
    positional jitter plus a random in-bounds rigid transform, rasterized to a
    mask. Returns the gallery and a {(individual, scale): individual} map.
    """
    if individuals < 1 or samples_per < 1:
        raise InvalidParameterError("counts must be >= 1")
    bounds = transform_bounds or TransformBounds()
    rng = np.random.default_rng(seed)
    from .registration import RigidTransform

    center = np.array([width / 2.0, height / 2.0])
    # margin keeps spots inside the frame after rotation + translation
    margin = spot_radius + bounds.max_translation_frac * max(width, height) + 0.15 * max(
        width, height
    )
    records = []
    identity_map = {}
    for i in range(individuals):
        ind = f"ind{i:03d}"
        n_spots = int(rng.integers(spots_range[0], spots_range[1] + 1))
        base = _poisson_disc(
            rng, n_spots, width, height, margin, min_dist=4.5 * spot_radius
        )
        for s in range(samples_per):
            sc = f"s{s + 1}"
            pts = base + rng.normal(0.0, jitter_sigma, size=base.shape)
            theta = np.deg2rad(
                rng.uniform(-bounds.max_rotation_deg, bounds.max_rotation_deg)
            )
            shift = rng.uniform(
                -bounds.max_translation_frac, bounds.max_translation_frac, size=2
            ) * np.array([width, height])
            tf = RigidTransform.from_angle(theta)
            pts = tf.apply(pts - center) + center + shift
            mask = _rasterize_spots(pts, width, height, spot_radius)
            records.append(record_from_mask(ind, sc, mask))
            identity_map[(ind, sc)] = ind
    gallery = Gallery(records=records)
    if out_dir is not None:
        gallery = save_gallery(gallery, out_dir)
    return gallery, identity_map
