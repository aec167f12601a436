"""Two-view epipolar geometry kernels.

Conventions, fixed across every file format and function here: pixel centers
at integer coordinates, origin top-left, x right, y down; poses are
world-from-camera (``p_world = R @ p_cam + t``); intrinsics have zero skew.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMotionError, SchemaError

ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus a world-from-camera pose."""

    K: np.ndarray
    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K, dtype=np.float64)
        R = np.asarray(self.R, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64).reshape(3)
        if K.shape != (3, 3) or R.shape != (3, 3):
            raise SchemaError("K and R must be 3x3")
        if K[0, 0] <= 0 or K[1, 1] <= 0:
            raise SchemaError("focal lengths must be positive")
        if K[0, 1] != 0.0 or K[1, 0] != 0.0 or K[2, 0] != 0.0 or K[2, 1] != 0.0 or K[2, 2] != 1.0:
            raise SchemaError("K must be zero-skew with unit bottom-right entry")
        if not np.allclose(R.T @ R, np.eye(3), atol=ORTHONORMAL_TOL):
            raise SchemaError("R is not orthonormal")
        if np.linalg.det(R) < 0:
            raise SchemaError("R must be a proper rotation (det +1)")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_params(cls, fx, fy, cx, cy, pose) -> "CameraModel":
        """Build from focal/principal parameters and a 4x4 world-from-camera
        pose matrix."""
        pose = np.asarray(pose, dtype=np.float64)
        if pose.shape != (4, 4):
            raise SchemaError("pose must be 4x4")
        K = np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])
        return cls(K=K, R=pose[:3, :3], t=pose[:3, 3])

    def k_inv(self) -> np.ndarray:
        fx, fy = self.K[0, 0], self.K[1, 1]
        cx, cy = self.K[0, 2], self.K[1, 2]
        return np.array(
            [[1.0 / fx, 0.0, -cx / fx], [0.0, 1.0 / fy, -cy / fy], [0.0, 0.0, 1.0]]
        )


def cross_matrix(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(3)
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def relative_pose(cam_i: CameraModel, cam_j: CameraModel) -> tuple[np.ndarray, np.ndarray]:
    """(R_rel, t_rel) mapping camera-i coordinates into camera-j."""
    R_rel = cam_j.R.T @ cam_i.R
    t_rel = cam_j.R.T @ (cam_i.t - cam_j.t)
    return R_rel, t_rel


def fundamental_from_poses(
    cam_i: CameraModel,
    cam_j: CameraModel,
    t_min: float = 1e-3,
) -> np.ndarray:
    """Fundamental matrix from known poses, unit Frobenius norm.

    ``F = K_j^-T [t_rel]x R_rel K_i^-1``.  A relative translation below
    ``t_min`` meters means the epipolar constraint carries no information
    (pure rotation), which is a degenerate-motion error, not a zero matrix.
    """
    R_rel, t_rel = relative_pose(cam_i, cam_j)
    norm_t = float(np.linalg.norm(t_rel))
    if norm_t <= t_min:
        raise DegenerateMotionError(
            f"relative translation {norm_t:.6g} m <= t_min {t_min:.6g} m"
        )
    F = cam_j.k_inv().T @ cross_matrix(t_rel) @ R_rel @ cam_i.k_inv()
    return F / np.linalg.norm(F)


def sampson_error(F, x_i, x_j) -> np.ndarray | float:
    """First-order epipolar error of correspondences under F, in pixels^2.

    ``e = (x_j^T F x_i)^2 / ((F x_i)_1^2 + (F x_i)_2^2 + (F^T x_j)_1^2 +
    (F^T x_j)_2^2)`` with unit-last-coordinate homogeneous lifts.  A zero
    denominator marks an invalid correspondence and reports NaN, never
    infinity; callers drop those points.

    Accepts single points (shape (2,)) or batches (shape (n, 2)).
    """
    F = np.asarray(F, dtype=np.float64)
    xi = np.asarray(x_i, dtype=np.float64)
    xj = np.asarray(x_j, dtype=np.float64)
    single = xi.ndim == 1
    xi = np.atleast_2d(xi)
    xj = np.atleast_2d(xj)
    if xi.shape != xj.shape or xi.shape[1] != 2:
        raise SchemaError("x_i and x_j must both be (n, 2) pixel arrays")
    ones = np.ones((xi.shape[0], 1))
    hi = np.hstack([xi, ones])
    hj = np.hstack([xj, ones])
    Fxi = hi @ F.T
    Ftxj = hj @ F
    num = np.sum(hj * Fxi, axis=1) ** 2
    den = Fxi[:, 0] ** 2 + Fxi[:, 1] ** 2 + Ftxj[:, 0] ** 2 + Ftxj[:, 1] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(den > 0, num / den, np.nan)
    return float(e[0]) if single else e


def unproject(pixels, depths, cam: CameraModel) -> np.ndarray:
    """Pixels plus camera-frame depths to world points.

    ``p_cam = depth * K^-1 (u, v, 1)``, then ``p_world = R p_cam + t``.
    Non-positive or non-finite depths yield NaN rows (excluded pixels).
    """
    px = np.atleast_2d(np.asarray(pixels, dtype=np.float64))
    d = np.atleast_1d(np.asarray(depths, dtype=np.float64))
    if px.shape[0] != d.shape[0] or px.shape[1] != 2:
        raise SchemaError("pixels must be (n, 2) with one depth per pixel")
    hom = np.hstack([px, np.ones((px.shape[0], 1))])
    rays = hom @ cam.k_inv().T
    pts = rays * d[:, None]
    world = pts @ cam.R.T + cam.t
    bad = ~(np.isfinite(d) & (d > 0))
    world[bad] = np.nan
    return world


def project(points, cam: CameraModel) -> np.ndarray:
    """World points to pixel coordinates; points at or behind the camera
    plane project to NaN."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != 3:
        raise SchemaError("points must be (n, 3)")
    cam_pts = (pts - cam.t) @ cam.R
    z = cam_pts[:, 2]
    with np.errstate(invalid="ignore", divide="ignore"):
        uv = (cam_pts @ cam.K.T)[:, :2] / z[:, None]
    uv[~(z > 0)] = np.nan
    return uv
