import numpy as np
import pytest


def disk_mask(shape, cx, cy, r):
    yy, xx = np.mgrid[: shape[0], : shape[1]]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r**2


def make_disk_image(size=64, cx=32, cy=32, r=12, fg=0.9, bg=0.1):
    d = disk_mask((size, size), cx, cy, r)
    return np.where(d, fg, bg), d


def make_split_scene(seed=1, height=128, width=192, n_spots=14, radius=7):
    """Half-dark / half-overexposed spotted scene with constructed GT.

    Spots are bright on both halves: saturated on the overexposed half,
    clearly above background on the dark half.
    """
    rng = np.random.default_rng(seed)
    gt = np.zeros((height, width), bool)
    yy, xx = np.mgrid[:height, :width]
    pts = []
    tries = 0
    while len(pts) < n_spots and tries < 5000:
        tries += 1
        x = rng.uniform(radius + 3, width - radius - 3)
        y = rng.uniform(radius + 3, height - radius - 3)
        if all((x - a) ** 2 + (y - b) ** 2 > (2.6 * radius) ** 2 for a, b in pts):
            pts.append((x, y))
    for x, y in pts:
        gt |= (xx - x) ** 2 + (yy - y) ** 2 <= radius**2
    dark_side = xx < width // 2
    intensity = np.where(
        gt,
        np.where(dark_side, 0.85, 1.0),
        np.where(dark_side, 0.4, 0.5),
    )
    rgb = np.repeat(intensity[:, :, None], 3, axis=2)
    return rgb, gt, dark_side


def label_components_bfs(mask):
    """Independent 8-connected labeling (no scipy) used by test oracles."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=int)
    current = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or labels[sy, sx]:
                continue
            current += 1
            stack = [(sy, sx)]
            labels[sy, sx] = current
            while stack:
                y, x = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not labels[ny, nx]:
                            labels[ny, nx] = current
                            stack.append((ny, nx))
    return labels, current


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
