"""Brute-force checks of Gaussian dominance with finite-support Markov triples.

A :class:`DiscreteTriple` is a Markov chain ``X1 - U - X2`` in which ``U``
takes ``m`` values and, given ``U``, ``X1`` and ``X2`` are independent with at
most ``a`` mass points each. Its pentagon is evaluated exactly up to
quadrature error: every conditional output law is a Gaussian mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .ginfo import ChannelParams, Cov3, PentagonBounds, gaussian_pentagon, is_in_kg
from .quadrature import adaptive_simpson

__all__ = [
    "MAX_SUPPORT",
    "DiscreteTriple",
    "DominationReport",
    "mixture_entropy",
    "discrete_pentagon",
    "v_projection_discrete",
    "check_domination",
    "random_markov_triple",
    "run_suite",
    "format_record",
]

MAX_SUPPORT = 8
QUAD_TOL = 1e-9
QUAD_BUDGET = 2**18
_PROB_TOL = 1e-12


def _check_probs(p, what):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"{what} must be finite and nonnegative")
    if abs(p.sum() - 1.0) > _PROB_TOL * max(1, p.size):
        raise ValueError(f"{what} must sum to 1 (got {p.sum()!r})")
    return p


@dataclass(frozen=True, eq=False)
class DiscreteTriple:
    """Finite-support Markov triple ``X1 - U - X2``.

    Attributes
    ----------
    u_probs : ndarray, shape (m,)
    x1_points, x1_probs : ndarray, shape (m, a)
        Row ``u`` is the conditional law of ``X1`` given ``U = u``.
    x2_points, x2_probs : ndarray, shape (m, a)
        Same for ``X2``.
    """

    u_probs: np.ndarray
    x1_points: np.ndarray
    x1_probs: np.ndarray
    x2_points: np.ndarray
    x2_probs: np.ndarray

    def __post_init__(self):
        u = _check_probs(self.u_probs, "u_probs")
        m = u.size
        if not 1 <= m <= MAX_SUPPORT:
            raise ValueError(f"U support must be between 1 and {MAX_SUPPORT}, got {m}")
        arrays = {}
        for name in ("x1_points", "x1_probs", "x2_points", "x2_probs"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if arr.shape[0] != m:
                raise ValueError(f"{name} needs one row per U atom")
            if not 1 <= arr.shape[1] <= MAX_SUPPORT:
                raise ValueError(f"{name}: at most {MAX_SUPPORT} mass points per atom")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            arrays[name] = arr
        for pts, prb in (("x1_points", "x1_probs"), ("x2_points", "x2_probs")):
            if arrays[pts].shape != arrays[prb].shape:
                raise ValueError(f"{pts} and {prb} shapes differ")
            for row in arrays[prb]:
                _check_probs(row, prb)
        object.__setattr__(self, "u_probs", u)
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        u.setflags(write=False)

    @property
    def m(self) -> int:
        return self.u_probs.size

    def cond_mean(self, which: int) -> np.ndarray:
        pts, prb = self._pair(which)
        return np.sum(pts * prb, axis=1)

    def second_moment(self, which: int) -> float:
        pts, prb = self._pair(which)
        return float(self.u_probs @ np.sum(pts**2 * prb, axis=1))

    def _pair(self, which):
        if which == 1:
            return self.x1_points, self.x1_probs
        if which == 2:
            return self.x2_points, self.x2_probs
        raise ValueError("which must be 1 or 2")


def mixture_entropy(means, weights, sigma2: float, tol: float = QUAD_TOL) -> float:
    """Differential entropy (nats) of ``sum_j w_j N(mu_j, sigma2)``.

    Integrates ``-f log f`` by adaptive Simpson over ``[min mu - 10 sigma,
    max mu + 10 sigma]``.

    Raises
    ------
    QuadratureError
        When the tolerance is not reached within the interval budget.
    """
    means = np.asarray(means, dtype=float).ravel()
    weights = _check_probs(np.asarray(weights, dtype=float).ravel(), "weights")
    if means.shape != weights.shape:
        raise ValueError("means and weights differ in length")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    keep = weights > 0
    means, weights = means[keep], weights[keep]
    means, inverse = np.unique(means, return_inverse=True)
    weights = np.bincount(inverse, weights=weights)
    lw = np.log(weights)
    s = math.sqrt(sigma2)
    log_norm = 0.5 * math.log(2.0 * math.pi * sigma2)

    def integrand(y):
        d = y[:, None] - means[None, :]
        lf = logsumexp(lw[None, :] - 0.5 * d * d / sigma2, axis=1) - log_norm
        return -np.exp(lf) * lf

    return adaptive_simpson(
        integrand, means[0] - 10.0 * s, means[-1] + 10.0 * s, tol=tol, budget=QUAD_BUDGET
    )


def _sum_atoms(t: DiscreteTriple, u: int):
    pts = (t.x1_points[u][:, None] + t.x2_points[u][None, :]).ravel()
    prb = (t.x1_probs[u][:, None] * t.x2_probs[u][None, :]).ravel()
    return pts, prb


def discrete_pentagon(t: DiscreteTriple, params: ChannelParams) -> PentagonBounds:
    """Pentagon bounds of a discrete Markov triple, by mixture entropies.

    Given ``(X2, U) = (x2, u)`` the output is a mixture over ``X1``'s atoms
    shifted by ``x2``; the shift leaves the entropy unchanged, so one
    entropy per ``u`` suffices for each conditional term.
    """
    s2 = params.sigma2
    h_noise = 0.5 * math.log(2.0 * math.pi * math.e * s2)
    pu = t.u_probs
    h1 = np.zeros(t.m)
    h2 = np.zeros(t.m)
    h12 = np.zeros(t.m)
    all_pts, all_prb = [], []
    for u in range(t.m):
        if pu[u] == 0:
            continue
        h1[u] = mixture_entropy(t.x1_points[u], t.x1_probs[u], s2)
        h2[u] = mixture_entropy(t.x2_points[u], t.x2_probs[u], s2)
        pts, prb = _sum_atoms(t, u)
        h12[u] = mixture_entropy(pts, prb, s2)
        all_pts.append(pts)
        all_prb.append(pu[u] * prb)
    pts = np.concatenate(all_pts)
    prb = np.concatenate(all_prb)
    h_y = mixture_entropy(pts, prb / prb.sum(), s2)
    return PentagonBounds(
        b1=max(float(pu @ h1) - h_noise, 0.0) + params.c12,
        b2=max(float(pu @ h2) - h_noise, 0.0) + params.c21,
        b12_cond=max(float(pu @ h12) - h_noise, 0.0) + params.c12 + params.c21,
        b12=max(h_y - h_noise, 0.0),
    )


def v_projection_discrete(t: DiscreteTriple) -> Cov3:
    """Covariance of ``(X1, V, X2)`` with ``V = E[X1 | U] - E[X1]``, by finite sums."""
    pu = t.u_probs
    m1 = t.cond_mean(1)
    m2 = t.cond_mean(2)
    ex1 = float(pu @ m1)
    ex2 = float(pu @ m2)
    v = m1 - ex1
    var1 = t.second_moment(1) - ex1**2
    var2 = t.second_moment(2) - ex2**2
    # X1 and X2 are conditionally independent given U
    c12 = float(pu @ (v * (m1 - ex1)))
    c13 = float(pu @ ((m1 - ex1) * (m2 - ex2)))
    c23 = float(pu @ (v * (m2 - ex2)))
    return Cov3(max(var1, 0.0), c12, c13, c12, c23, max(var2, 0.0))


@dataclass(frozen=True)
class DominationReport:
    chain_holds: bool
    margins: np.ndarray
    in_kg: bool
    discrete: PentagonBounds
    gaussian: PentagonBounds


def check_domination(t: DiscreteTriple, params: ChannelParams, tol: float = 1e-4) -> DominationReport:
    """Compare a discrete triple's pentagon with its Gaussian Markov dominator.

    The dominator is the centered Gaussian triple whose covariance is that of
    ``(X1, V, X2)``. The check holds when that covariance lies in K_G and each
    of the four discrete bounds is at most the Gaussian one plus ``tol``.
    """
    d = discrete_pentagon(t, params)
    kv = v_projection_discrete(t)
    in_kg = is_in_kg(kv, 1e-9)
    g = gaussian_pentagon(kv, params)
    margins = g - d
    holds = bool(in_kg and np.all(margins >= -tol))
    return DominationReport(holds, margins, in_kg, d, g)


def random_markov_triple(seed: int, m: int, a: int, p1_cap: float = 1.0,
                         p2_cap: float = 1.0) -> DiscreteTriple:
    """Seeded random Markov triple with supports ``m`` (for ``U``) and ``a``.

    Mass points are uniform on [-2, 2], probabilities Dirichlet(1). An input
    whose second moment exceeds its cap is rescaled onto the cap.
    """
    if not (1 <= m <= MAX_SUPPORT and 1 <= a <= MAX_SUPPORT):
        raise ValueError(f"supports must be between 1 and {MAX_SUPPORT}")
    rng = np.random.default_rng(seed)
    u_probs = rng.dirichlet(np.ones(m))
    rows = []
    for cap in (p1_cap, p2_cap):
        pts = rng.uniform(-2.0, 2.0, size=(m, a))
        prb = rng.dirichlet(np.ones(a), size=m)
        second = float(u_probs @ np.sum(pts**2 * prb, axis=1))
        if second > cap:
            pts = pts * math.sqrt(cap / second)
        rows.append((pts, prb))
    return DiscreteTriple(u_probs, rows[0][0], rows[0][1], rows[1][0], rows[1][1])


def run_suite(params: ChannelParams, n_triples: int = 1000, seed: int = 0,
              max_support: int = 4, tol: float = 1e-4):
    """Check ``n_triples`` seeded triples; yields ``(seed, m, a, report)``.

    Triple ``i`` uses seed ``seed + i`` and cycles through every support
    combination up to ``max_support``.
    """
    if not 1 <= max_support <= MAX_SUPPORT:
        raise ValueError(f"max_support must be between 1 and {MAX_SUPPORT}")
    for i in range(n_triples):
        m = 1 + i % max_support
        a = 1 + (i // max_support) % max_support
        s = seed + i
        t = random_markov_triple(s, m, a, params.p1, params.p2)
        yield s, m, a, check_domination(t, params, tol)


def format_record(seed: int, m: int, a: int, rep: DominationReport) -> str:
    mg = rep.margins
    return (
        f"seed={seed} m={m} a={a} margin_b1={mg[0]:.6e} margin_b2={mg[1]:.6e} "
        f"margin_b12_cond={mg[2]:.6e} margin_b12={mg[3]:.6e} in_kg={str(rep.in_kg).lower()} "
        f"chain_holds={str(rep.chain_holds).lower()}"
    )
