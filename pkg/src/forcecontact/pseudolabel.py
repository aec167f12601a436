"""Contacted-object selection from masked flow and epipolar error.

For each contact-labeled frame: extract the masked optical flow of every
object proposal, score each proposal by its mean Sampson epipolar error under
the pose-derived fundamental matrix, take the argmax, and accept it only if
enough of its pixels unproject within a 3D distance of the hand centroid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError
from .geometry import CameraModel, sampson_error, unproject


@dataclass
class MaskProposal:
    """One object mask proposal with its concept noun."""

    mask_id: str
    concept: str
    mask: np.ndarray  # (H, W) bool

    def __post_init__(self):
        self.mask = np.asarray(self.mask).astype(bool)
        if self.mask.ndim != 2:
            raise SchemaError(f"mask {self.mask_id}: expected 2-d raster")


@dataclass
class HandObservation:
    hand: str
    centroid: np.ndarray  # (3,) world meters
    visible: bool = True

    def __post_init__(self):
        self.centroid = np.asarray(self.centroid, dtype=np.float64).reshape(3)
        if self.visible and not np.isfinite(self.centroid).all():
            raise SchemaError("visible hand must have a finite centroid")


@dataclass
class ProposalScore:
    mask_id: str
    mean_sampson: float | None  # None when too few pixels survive striding
    n_pixels: int
    gate_count: int = -1  # -1 = gate not evaluated for this proposal


@dataclass
class PseudolabelResult:
    """Per-hand selection outcome plus per-proposal diagnostics."""

    hand: str
    selected_id: str | None
    scores: list[ProposalScore] = field(default_factory=list)
    gate_dist_max: float = 0.0
    gate_n_min: int = 0
    reason: str = "ok"  # ok | gate_failed | no_proposals | hand_not_visible | static_scene


def masked_mean_sampson(
    F,
    flow,
    mask,
    stride: int = 2,
    min_pixels: int = 50,
) -> tuple[float | None, int]:
    """Mean Sampson error over the in-mask flow correspondences.

    Pixels are sampled on a regular grid with the given stride; the
    correspondence for pixel x is ``x + flow[:, y, x]``.  Invalid
    correspondences (non-finite flow, zero Sampson denominator) are dropped
    from the mean.  Returns ``(None, n)`` when fewer than ``min_pixels``
    valid pixels remain, in which case the proposal is skipped.
    """
    flow = np.asarray(flow, dtype=np.float64)
    mask = np.asarray(mask).astype(bool)
    if flow.ndim != 3 or flow.shape[0] != 2:
        raise SchemaError(f"flow must be (2, H, W), got {flow.shape}")
    if mask.shape != flow.shape[1:]:
        raise SchemaError("mask and flow dimensions differ")
    if stride < 1:
        raise SchemaError("stride must be >= 1")
    sub = mask[::stride, ::stride]
    ys, xs = np.nonzero(sub)
    ys = ys * stride
    xs = xs * stride
    if xs.size == 0:
        return None, 0
    du = flow[0, ys, xs]
    dv = flow[1, ys, xs]
    ok = np.isfinite(du) & np.isfinite(dv)
    xi = np.column_stack([xs[ok].astype(np.float64), ys[ok].astype(np.float64)])
    xj = xi + np.column_stack([du[ok], dv[ok]])
    errs = sampson_error(F, xi, xj)
    errs = errs[np.isfinite(errs)]
    if errs.size < min_pixels:
        return None, int(errs.size)
    return float(np.mean(errs)), int(errs.size)


def proximity_count(
    mask,
    depth,
    cam: CameraModel,
    centroid,
    dist_max: float,
) -> int:
    """Number of in-mask valid-depth pixels whose unprojections lie within
    ``dist_max`` meters of the hand centroid, at full raster resolution."""
    mask = np.asarray(mask).astype(bool)
    depth = np.asarray(depth, dtype=np.float64)
    if depth.shape != mask.shape:
        raise SchemaError("depth and mask dimensions differ")
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return 0
    d = depth[ys, xs]
    valid = np.isfinite(d) & (d > 0)
    if not valid.any():
        return 0
    px = np.column_stack([xs[valid].astype(np.float64), ys[valid].astype(np.float64)])
    pts = unproject(px, d[valid], cam)
    dist = np.linalg.norm(pts - np.asarray(centroid, dtype=np.float64), axis=1)
    return int(np.count_nonzero(dist <= dist_max))


def select_contacted_object(
    proposals: list[MaskProposal],
    scores: list[tuple[float | None, int]],
    hand: HandObservation,
    depth,
    cam: CameraModel,
    dist_max: float = 0.15,
    n_min: int = 50,
    static_eps: float = 1e-9,
) -> PseudolabelResult:
    """Argmax-by-mean-Sampson selection with the 3D hand-proximity gate.

    Ties break deterministically: higher pixel count, then lexicographically
    smallest mask id.  When every score is below ``static_eps`` the frame
    carries no motion evidence and no proposal is accepted (flagged
    ``static_scene``).  An invisible hand yields no supervision at all.
    """
    result = PseudolabelResult(
        hand=hand.hand, selected_id=None, gate_dist_max=dist_max, gate_n_min=n_min
    )
    result.scores = [
        ProposalScore(mask_id=p.mask_id, mean_sampson=s, n_pixels=n)
        for p, (s, n) in zip(proposals, scores)
    ]
    if not hand.visible:
        result.reason = "hand_not_visible"
        return result
    if not proposals:
        result.reason = "no_proposals"
        return result
    for p, sc in zip(proposals, result.scores):
        sc.gate_count = proximity_count(p.mask, depth, cam, hand.centroid, dist_max)
    scored = [
        (p, s, n)
        for p, (s, n) in zip(proposals, scores)
        if s is not None
    ]
    if not scored:
        result.reason = "no_proposals"
        return result
    if all(s < static_eps for _, s, _ in scored):
        result.reason = "static_scene"
        return result
    # argmax on score; ties -> larger pixel count, then smallest id
    best = max(scored, key=lambda psn: (psn[1], psn[2], _NegStr(psn[0].mask_id)))
    candidate, _, _ = best
    count = next(
        sc.gate_count for sc in result.scores if sc.mask_id == candidate.mask_id
    )
    if count >= n_min:
        result.selected_id = candidate.mask_id
    else:
        result.reason = "gate_failed"
    return result


class _NegStr(str):
    """Reverses string comparison so max() prefers the smallest id."""

    def __lt__(self, other):
        return str.__gt__(self, other)

    def __gt__(self, other):
        return str.__lt__(self, other)
