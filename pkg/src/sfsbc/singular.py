"""Singular points: bright plateaus where the surface slope vanishes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import BadInputError, DegenerateImageError
from .grid import IrradianceImage

DEFAULT_MIN_SEP = 5.0


@dataclass(frozen=True)
class SingularPoint:
    id: int
    pixel: tuple[int, int]
    brightness: float
    kind: str = "interior"  # or "boundary-adjacent", "anchor", "unknown"
    region: frozenset = field(default=frozenset(), repr=False, compare=False)

    def to_json(self) -> dict:
        return {"id": self.id, "row": self.pixel[0], "col": self.pixel[1], "brightness": self.brightness}


def estimate_emax(img: IrradianceImage) -> float:
    if img.e.size == 0:
        raise BadInputError("empty image")
    return float(img.e.max())


def _centroid(e, pixels):
    rows = np.array([p[0] for p in pixels], dtype=float)
    cols = np.array([p[1] for p in pixels], dtype=float)
    wts = np.array([e[p] for p in pixels])
    return (float(rows @ wts / wts.sum()), float(cols @ wts / wts.sum()))


def _label_bright(mask):
    labels, _ = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    edge = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))) - {0}
    return labels, edge


def background_mask(img: IrradianceImage, eps_sing: float = 0.02) -> np.ndarray:
    """Bright pixels connected to the image border: the flat surroundings of the object."""
    labels, edge = _label_bright(img.e >= (1.0 - eps_sing) * img.e_max)
    return np.isin(labels, sorted(edge))


def detect_singular_points(
    img: IrradianceImage, eps_sing: float = 0.02, min_sep: float = DEFAULT_MIN_SEP
) -> list[SingularPoint]:
    """One point per bright 8-connected component, at its brightness-weighted centroid.

    Components touching the image border are background (flat surroundings
    of the object) and are not vertices. Components whose centroids lie
    closer than ``min_sep`` pixels are merged.
    """
    if not 0.0 < eps_sing < 1.0:
        raise BadInputError(f"eps_sing must lie in (0, 1), got {eps_sing}")
    if min_sep < 1:
        raise BadInputError(f"min_sep must be >= 1, got {min_sep}")
    e = img.e
    mask = e >= (1.0 - eps_sing) * img.e_max
    labels, edge_labels = _label_bright(mask)
    h, w = e.shape
    comps = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if lab in edge_labels:
            continue
        ii, jj = np.nonzero(labels[sl] == lab)
        pixels = [(int(i + sl[0].start), int(j + sl[1].start)) for i, j in zip(ii, jj)]
        comps.append(pixels)
    if not comps:
        if mask.sum() > 0.5 * mask.size:
            raise DegenerateImageError("image is essentially flat: the bright region covers most of the frame")
        raise DegenerateImageError("no singular point found (no interior pixel reaches e_max)")
    if max(len(c) for c in comps) > 0.5 * mask.size:
        raise DegenerateImageError("a single bright plateau covers more than half of the image")

    # Merge components whose centroids are too close, closest pair first.
    cents = [_centroid(e, c) for c in comps]
    while len(comps) > 1:
        best = None
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                dist = np.hypot(cents[a][0] - cents[b][0], cents[a][1] - cents[b][1])
                if dist < min_sep and (best is None or dist < best[0]):
                    best = (dist, a, b)
        if best is None:
            break
        _, a, b = best
        comps[a] = comps[a] + comps[b]
        cents[a] = _centroid(e, comps[a])
        del comps[b], cents[b]

    found = []
    for pixels, (ci, cj) in zip(comps, cents):
        pix = (int(round(ci)), int(round(cj)))
        region = frozenset(pixels)
        if pix not in region:  # non-convex plateau: snap to the brightest member nearest the centroid
            pix = min(pixels, key=lambda p: ((p[0] - ci) ** 2 + (p[1] - cj) ** 2, p))
        margin = min(pix[0], pix[1], h - 1 - pix[0], w - 1 - pix[1])
        kind = "boundary-adjacent" if margin < min_sep else "interior"
        found.append((ci, cj, pix, region, kind))
    found.sort(key=lambda t: (t[2], t[0], t[1]))
    return [
        SingularPoint(k, pix, float(e[pix]), kind, region) for k, (_, _, pix, region, kind) in enumerate(found)
    ]
