"""Covariance algebra and closed-form Gaussian mutual informations.

Every quantity here concerns a centered triple ``(X1, U, X2)`` feeding the
additive channel ``Y = X1 + X2 + Z`` with ``Z ~ N(0, sigma2)``. Rates are in
nats per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidCovarianceError",
    "Cov3",
    "ChannelParams",
    "PentagonBounds",
    "TOL_PSD",
    "is_in_kg",
    "markovize",
    "gaussian_pentagon",
    "conditional_variance",
]

# relative to the largest diagonal entry
TOL_PSD = 1e-10


class InvalidCovarianceError(ValueError):
    """Raised for a matrix that is not a valid (PSD) covariance."""


@dataclass(frozen=True)
class Cov3:
    """Covariance of ``(X1, U, X2)``, upper triangle only."""

    k11: float
    k12: float
    k13: float
    k22: float
    k23: float
    k33: float

    def __post_init__(self):
        m = self.matrix()
        if not np.all(np.isfinite(m)):
            raise InvalidCovarianceError("covariance entries must be finite")
        scale = max(float(np.max(np.diag(m))), 0.0)
        if min(self.k11, self.k22, self.k33) < -TOL_PSD * max(scale, 1e-300):
            raise InvalidCovarianceError(f"negative variance on the diagonal: {self}")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -TOL_PSD * scale:
            raise InvalidCovarianceError(
                f"matrix is not positive semi-definite (min eigenvalue {lam_min:.3e})"
            )

    @classmethod
    def from_matrix(cls, m) -> "Cov3":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise InvalidCovarianceError(f"expected a 3x3 matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise InvalidCovarianceError("matrix is not symmetric")
        return cls(m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2])

    @classmethod
    def identity(cls) -> "Cov3":
        return cls(1.0, 0.0, 0.0, 1.0, 0.0, 1.0)

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.k11, self.k12, self.k13],
                [self.k12, self.k22, self.k23],
                [self.k13, self.k23, self.k33],
            ],
            dtype=float,
        )

    def clamped(self) -> np.ndarray:
        """PSD projection of :meth:`matrix` (tiny negative eigenvalues set to 0)."""
        m = self.matrix()
        w, v = np.linalg.eigh(m)
        if w[0] >= 0.0:
            return m
        w = np.clip(w, 0.0, None)
        out = (v * w) @ v.T
        return 0.5 * (out + out.T)


def _as_cov3(k) -> Cov3:
    if isinstance(k, Cov3):
        return k
    return Cov3.from_matrix(k)


@dataclass(frozen=True)
class ChannelParams:
    """Parameters of the Gaussian MAC with conferencing encoders.

    Attributes
    ----------
    p1, p2 : float
        Average power constraints of transmitters 1 and 2.
    sigma2 : float
        Noise variance, strictly positive.
    c12, c21 : float
        Conference pipe capacities in nats per channel use.
    q : float
        Variance of the interference sequence. Only the simulator uses it.
    """

    p1: float = 1.0
    p2: float = 1.0
    sigma2: float = 1.0
    c12: float = 0.0
    c21: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "sigma2", "c12", "c21", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real, got {v!r}")
            if v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v!r}")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be strictly positive")


@dataclass(frozen=True)
class PentagonBounds:
    """Right-hand sides of the four rate constraints for one input law.

    ``R1 <= b1``, ``R2 <= b2``, ``R1 + R2 <= b12_cond`` and ``R1 + R2 <= b12``.
    The conference offsets are already included in ``b1``, ``b2`` and
    ``b12_cond``.
    """

    b1: float
    b2: float
    b12_cond: float
    b12: float

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b12_cond, self.b12])

    def __sub__(self, other: "PentagonBounds") -> np.ndarray:
        return self.as_array() - other.as_array()


def conditional_variance(m: np.ndarray, a: np.ndarray, cond: list[int]) -> float:
    """Variance of ``a @ X`` given the coordinates ``cond`` of ``X ~ N(0, m)``.

    Zero-variance directions of the conditioning block are dropped through
    the pseudo-inverse, which is the same as conditioning only on the
    non-degenerate components.
    """
    a = np.asarray(a, dtype=float)
    total = float(a @ m @ a)
    if not cond:
        return max(total, 0.0)
    c = np.asarray(cond)
    scc = m[np.ix_(c, c)]
    sac = a @ m[:, c]
    # cutoff relative to the whole matrix, not the block: a lone near-zero
    # conditioning variance must count as degenerate
    cut = TOL_PSD * max(float(np.max(np.diag(m))), 1e-300)
    w, v = np.linalg.eigh(scc)
    keep = w > cut
    proj = sac @ v[:, keep]
    out = total - float(np.sum(proj**2 / w[keep]))
    return max(out, 0.0)


def is_in_kg(k, tol: float = 1e-9) -> bool:
    """Whether ``k`` is the covariance of a Gaussian Markov triple X1 - U - X2.

    Either ``k22 != 0`` and ``k13 k22 == k12 k23``, or the middle variable is
    deterministic and uncorrelated with both ends. Comparisons use ``tol``,
    with the product test scaled by the largest absolute entry of ``k``.

    Raises
    ------
    InvalidCovarianceError
        If ``k`` is not positive semi-definite.
    """
    k = _as_cov3(k)
    scale = float(np.max(np.abs(k.matrix())))
    if scale == 0.0:
        scale = 1.0
    if abs(k.k22) > tol:
        return abs(k.k13 * k.k22 - k.k12 * k.k23) <= tol * scale
    return abs(k.k12) <= tol and abs(k.k13) <= tol and abs(k.k23) <= tol


def markovize(k) -> Cov3:
    """Covariance of ``(X1, V, X2)`` with ``V = E[X1 | U]`` for a Gaussian triple.

    For jointly Gaussian centered variables ``V = (k12 / k22) U``. The
    ``(X1, X2)`` block is untouched. A deterministic ``U`` gives ``V = 0``.
    """
    k = _as_cov3(k)
    if k.k22 <= TOL_PSD * max(k.k11, k.k22, k.k33, 1e-300):
        return Cov3(k.k11, 0.0, k.k13, 0.0, 0.0, k.k33)
    g = k.k12 / k.k22
    v = g * k.k12
    w = g * k.k23
    return Cov3(k.k11, v, k.k13, v, w, k.k33)


def gaussian_pentagon(k, params: ChannelParams, tol: float = 1e-9) -> PentagonBounds:
    """Pentagon bounds of a centered Gaussian triple with covariance ``k``.

    Parameters
    ----------
    k : Cov3 or array_like
        Covariance of ``(X1, U, X2)``.
    params : ChannelParams
        Channel; ``q`` is ignored.
    tol : float
        Relative slack allowed on the power constraints.

    Returns
    -------
    PentagonBounds
    """
    k = _as_cov3(k)
    if k.k11 > params.p1 * (1 + tol) + tol or k.k33 > params.p2 * (1 + tol) + tol:
        raise ValueError(
            f"covariance violates the power constraints: k11={k.k11}, k33={k.k33}, "
            f"p1={params.p1}, p2={params.p2}"
        )
    m = k.clamped()
    s2 = params.sigma2
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 0.0, 1.0])
    both = e1 + e2
    v1 = conditional_variance(m, e1, [1, 2])
    v2 = conditional_variance(m, e2, [0, 1])
    v12u = conditional_variance(m, both, [1])
    v12 = conditional_variance(m, both, [])
    return PentagonBounds(
        b1=0.5 * math.log1p(v1 / s2) + params.c12,
        b2=0.5 * math.log1p(v2 / s2) + params.c21,
        b12_cond=0.5 * math.log1p(v12u / s2) + params.c12 + params.c21,
        b12=0.5 * math.log1p(v12 / s2),
    )
