"""Basis-point selection: K-means centers plus per-cluster covariances.

Each cluster becomes one basis point.  The cluster mean is the center
and the cluster's empirical covariance, optionally collapsed to a sphere
or to zero, becomes the blur attached to that center.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidConfigError
from .kernels import BasisSet, BlurredBasis

__all__ = ["Clustering", "CovMode", "kmeans", "local_covariances"]

_MODES = ("full", "sphere", "zero")


@dataclass(frozen=True)
class Clustering:
    """K-means result: centers, per-point assignment, cluster sizes."""

    centers: np.ndarray
    assignment: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class CovMode:
    """How cluster spread turns into a basis covariance.

    ``kind`` selects full empirical covariance, its spherical collapse
    (same trace, isotropic), or zero (plain point basis).  ``ridge`` is
    relative: full covariances get ridge * trace/d added to the diagonal.
    """

    kind: str = "full"
    ridge: float = 1e-6

    def __post_init__(self):
        if self.kind not in _MODES:
            raise InvalidConfigError(
                f"mode must be one of {_MODES}, got {self.kind!r}"
            )
        if self.ridge < 0:
            raise InvalidConfigError(f"ridge must be nonnegative, got {self.ridge}")


def kmeans(points, m, seed, max_iters=100):
    """Lloyd's algorithm with k-means++ seeding, deterministic per seed.

    Empty clusters are reseeded to the point farthest from its nearest
    center.  Returns a Clustering whose assignment is recomputed against
    the final centers, so every point sits with its nearest center.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 1 <= m <= n:
        raise InvalidConfigError(f"need 1 <= M <= N, got M={m} with N={n}")
    rng = np.random.default_rng(seed)
    centers = [points[rng.integers(n)]]
    for _ in range(m - 1):
        d2 = np.min(
            ((points[:, None, :] - np.array(centers)[None, :, :]) ** 2).sum(-1),
            axis=1,
        )
        centers.append(points[rng.choice(n, p=d2 / d2.sum())])
    current = np.array(centers)
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - current[None, :, :]) ** 2).sum(-1)
        assign = np.argmin(d2, axis=1)
        updated = np.array(
            [
                points[assign == k].mean(0)
                if np.any(assign == k)
                else points[np.argmax(d2.min(1))]
                for k in range(m)
            ]
        )
        if np.allclose(updated, current):
            break
        current = updated
    d2 = ((points[:, None, :] - current[None, :, :]) ** 2).sum(-1)
    assign = np.argmin(d2, axis=1)
    counts = np.bincount(assign, minlength=m)
    return Clustering(centers=current, assignment=assign, counts=counts)


def local_covariances(clustering, points, mode, precision=1e6):
    """Turn a clustering into a basis set under the given covariance mode.

    Full mode uses the 1/n empirical covariance of each cluster plus a
    relative ridge; sphere keeps only its trace, spread evenly over the
    diagonal; zero drops it entirely.  Clusters too small for a full
    covariance estimate (fewer than two points) fall back to sphere, and
    the returned fallback tuple records which ones did.
    """
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    bases = []
    fallbacks = []
    for k in range(len(clustering.centers)):
        members = points[clustering.assignment == k]
        center = clustering.centers[k]
        if mode.kind == "zero" or len(members) < 2:
            full = np.zeros((d, d))
            if mode.kind == "full" and len(members) < 2:
                fallbacks.append(k)
        else:
            diff = members - center
            full = diff.T @ diff / len(members)
        if mode.kind == "sphere" or (mode.kind == "full" and len(members) < 2):
            cov = np.eye(d) * np.trace(full) / d
        elif mode.kind == "full":
            cov = full + np.eye(d) * (mode.ridge * np.trace(full) / d)
        else:
            cov = full
        bases.append(BlurredBasis(center=center, cov=cov, precision=precision))
    return BasisSet(bases=tuple(bases)), tuple(fallbacks)
