"""Rate regions of the conferencing MAC as unions over power splits.

Two families are built here. ``CG`` is the capacity region, a union of
pentagons indexed by the private-power fractions ``(beta1, beta2)``. ``ACH``
is the region reached by the successive-decoding dirty-paper scheme; each of
its members adds two extra single-user constraints to the pentagon.

A region is stored through its support function on a grid of directions
``(lam, 1 - lam)``; this yields the closed convex hull of the union, which is
what time-sharing makes achievable.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ginfo import ChannelParams, PentagonBounds

__all__ = [
    "RegionKind",
    "PowerSplit",
    "RatePair",
    "AchBounds",
    "RateRegion",
    "RegionComparison",
    "cg_bounds",
    "ach_bounds",
    "direction_grid",
    "build_region",
    "pentagon_region",
    "cooperation_region",
    "contains",
    "hausdorff",
    "verify_regions_equal",
    "sweep_params",
    "verify_sweep",
    "write_csv",
    "CSV_HEADER",
]

CSV_HEADER = ("lambda", "support", "R1", "R2", "beta1", "beta2")

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class RegionKind(str, enum.Enum):
    CG = "cg"
    ACH = "ach"


@dataclass(frozen=True)
class PowerSplit:
    """Fractions of each user's power spent on its private message."""

    beta1: float
    beta2: float

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        if not (math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise ValueError("rates must be finite")
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError("rates must be nonnegative")


class AchBounds(NamedTuple):
    a1: float
    a1_sd: float
    a2: float
    a2_sd: float
    a12_cond: float
    a12: float


def _half_log1p(x):
    return 0.5 * np.log1p(x)


def _cg_arrays(params: ChannelParams, beta1, beta2):
    p1, p2, s2 = params.p1, params.p2, params.sigma2
    priv1 = beta1 * p1
    priv2 = beta2 * p2
    cross = 2.0 * np.sqrt(p1 * p2 * (1.0 - beta1) * (1.0 - beta2))
    b1 = _half_log1p(priv1 / s2) + params.c12
    b2 = _half_log1p(priv2 / s2) + params.c21
    b12c = _half_log1p((priv1 + priv2) / s2) + params.c12 + params.c21
    b12 = _half_log1p((p1 + p2 + cross) / s2)
    return b1, b2, b12c, b12


def _common_term(params: ChannelParams, beta1, beta2):
    # rate of the common codeword decoded first, everything private as noise
    p0 = (np.sqrt((1.0 - beta1) * params.p1) + np.sqrt((1.0 - beta2) * params.p2)) ** 2
    noise = beta1 * params.p1 + beta2 * params.p2 + params.sigma2
    return _half_log1p(p0 / noise)


def _ach_arrays(params: ChannelParams, beta1, beta2):
    b1, b2, b12c, b12 = _cg_arrays(params, beta1, beta2)
    common = _common_term(params, beta1, beta2)
    a1_sd = _half_log1p(beta1 * params.p1 / params.sigma2) + common
    a2_sd = _half_log1p(beta2 * params.p2 / params.sigma2) + common
    return b1, a1_sd, b2, a2_sd, b12c, b12


def cg_bounds(params: ChannelParams, split: PowerSplit) -> PentagonBounds:
    """Pentagon of the capacity region for one power split."""
    b = _cg_arrays(params, split.beta1, split.beta2)
    return PentagonBounds(*(float(x) for x in b))


def ach_bounds(params: ChannelParams, split: PowerSplit) -> AchBounds:
    """Six constraints of the successive-decoding region for one power split.

    ``a1``, ``a2``, ``a12_cond`` and ``a12`` coincide with :func:`cg_bounds`.
    ``a1_sd`` and ``a2_sd`` bound each rate by what one user's private layer
    plus the whole common layer can carry.
    """
    return AchBounds(*(float(x) for x in _ach_arrays(params, split.beta1, split.beta2)))


def _effective(kind: RegionKind, params: ChannelParams, beta1, beta2):
    """(max R1, max R2, max R1 + R2) of the member polygon for each split."""
    if kind is RegionKind.CG:
        b1, b2, b12c, b12 = _cg_arrays(params, beta1, beta2)
        return b1, b2, np.minimum(b12c, b12)
    a1, a1_sd, a2, a2_sd, a12c, a12 = _ach_arrays(params, beta1, beta2)
    return np.minimum(a1, a1_sd), np.minimum(a2, a2_sd), np.minimum(a12c, a12)


def _polygon_max(lam, r1max, r2max, smax):
    """Maximise ``lam R1 + (1 - lam) R2`` over ``{R >= 0, R1 <= r1max,
    R2 <= r2max, R1 + R2 <= smax}`` by comparing its two dominant vertices.

    Returns the value and the maximising point, broadcasting over inputs.
    """
    x_a = np.minimum(r1max, smax)
    y_a = np.minimum(r2max, smax - x_a)
    y_b = np.minimum(r2max, smax)
    x_b = np.minimum(r1max, smax - y_b)
    va = lam * x_a + (1.0 - lam) * y_a
    vb = lam * x_b + (1.0 - lam) * y_b
    pick_a = va >= vb
    return (
        np.where(pick_a, va, vb),
        np.where(pick_a, x_a, x_b),
        np.where(pick_a, y_a, y_b),
    )


def direction_grid(n_dir: int) -> np.ndarray:
    """Uniform grid of ``lam`` on [0, 1] that always contains 0, 1/2 and 1.

    For even ``n_dir`` the grid point nearest to 1/2 is moved onto 1/2, so the
    grid keeps exactly ``n_dir`` entries (``n_dir = 2`` yields three).
    """
    if n_dir < 2:
        raise ValueError("n_dir must be at least 2")
    if n_dir == 2:
        return np.array([0.0, 0.5, 1.0])
    lam = np.linspace(0.0, 1.0, n_dir)
    lam[n_dir // 2] = 0.5
    return lam


@dataclass
class RateRegion:
    """Convex, downward-closed rate region held as support-function samples.

    Attributes
    ----------
    directions : ndarray, shape (n_dir,)
        ``lam`` values; the direction vector is ``(lam, 1 - lam)``.
    support_values : ndarray, shape (n_dir,)
        Max of ``lam R1 + (1 - lam) R2`` over the region.
    points : ndarray, shape (n_dir, 2)
        A rate pair attaining each support value.
    splits : ndarray, shape (n_dir, 2)
        Power split whose member polygon attains it (NaN when not applicable).
    boundary : ndarray, shape (V, 2)
        Vertices of the outer polygon, counterclockwise from the origin.
    resolution : tuple
        ``(n_beta, n_dir)`` used for the build.
    """

    directions: np.ndarray
    support_values: np.ndarray
    points: np.ndarray
    splits: np.ndarray
    boundary: np.ndarray = field(default=None)
    resolution: tuple = (0, 0)
    kind: str = ""

    def __post_init__(self):
        if self.boundary is None:
            self.boundary = _outer_polygon(self.directions, self.support_values)

    @property
    def max_sum_rate(self) -> float:
        i = int(np.argmin(np.abs(self.directions - 0.5)))
        return 2.0 * float(self.support_values[i])

    def boundary_pairs(self) -> list[RatePair]:
        return [RatePair(max(float(x), 0.0), max(float(y), 0.0)) for x, y in self.boundary]


def _clip(poly: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    """Keep the part of a convex polygon with ``a x + b y <= c``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.zeros((0, 2))


def _outer_polygon(lam: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Intersection of the half-planes with the nonnegative quadrant."""
    i1 = int(np.argmax(lam))
    i0 = int(np.argmin(lam))
    xmax = h[i1] / lam[i1] if lam[i1] > 0 else np.inf
    ymax = h[i0] / (1.0 - lam[i0]) if lam[i0] < 1 else np.inf
    if not np.isfinite(xmax):
        xmax = float(np.max(h / np.maximum(lam, 1e-300)))
    if not np.isfinite(ymax):
        ymax = float(np.max(h / np.maximum(1.0 - lam, 1e-300)))
    poly = np.array([[0.0, 0.0], [xmax, 0.0], [xmax, ymax], [0.0, ymax]])
    for l, v in zip(lam, h):
        poly = _clip(poly, l, 1.0 - l, v)
        if len(poly) == 0:
            break
    # drop consecutive duplicates produced by tangent cuts
    keep = [poly[0]] if len(poly) else []
    for p in poly[1:]:
        if np.hypot(*(p - keep[-1])) > 1e-14:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= 1e-14:
        keep.pop()
    return np.array(keep)


def _golden_max(f, lo, hi, iters=44):
    """Vectorised golden-section maximisation of ``f`` on ``[lo, hi]``.

    One new evaluation per iteration. The interval ends are candidates too,
    so maxima on the boundary of the power-split square are found exactly.
    """
    a, b = lo.copy(), hi.copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        # keep [a, d] when the left probe wins, else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new = np.where(left, b - _INVPHI * (b - a), a + _INVPHI * (b - a))
        fn = f(new)
        c, d = np.where(left, new, d), np.where(left, c, new)
        fc, fd = np.where(left, fn, fd), np.where(left, fc, fn)
    x = np.where(fc >= fd, c, d)
    v = np.maximum(fc, fd)
    for cand in (lo, hi):
        vc = f(cand)
        better = vc > v
        x = np.where(better, cand, x)
        v = np.where(better, vc, v)
    return x, v


def _nested_max(obj, lo1, hi1, lo2, hi2, iters=44):
    """Maximise ``obj(b1, b2)`` on a box: golden search over ``b1`` of the
    golden-search maximum over ``b2``. Exact for jointly concave ``obj``,
    including maxima on ridges where coordinate search stalls."""

    def inner(b1):
        return _golden_max(lambda t: obj(b1, t), lo2, hi2, iters)

    b1, _ = _golden_max(lambda t: inner(t)[1], lo1, hi1, iters)
    b2, v = inner(b1)
    return b1, b2, v


def build_region(
    kind,
    params: ChannelParams,
    n_beta: int = 201,
    n_dir: int = 181,
    refine: bool = True,
) -> RateRegion:
    """Support-function description of the ``CG`` or ``ACH`` region.

    For each direction the member polygon of every split on an ``n_beta`` by
    ``n_beta`` grid is maximised in closed form. With ``refine`` the best
    split is then polished by a nested golden-section search in a window of
    half-width ``2 / n_beta``. For ``CG`` the objective is concave in the
    split (a minimum of concave log terms), so a second nested search over
    the whole square finds the global maximum; the best value found becomes
    the support value.
    """
    kind = RegionKind(kind)
    if n_beta < 2:
        raise ValueError("n_beta must be at least 2")
    lam = direction_grid(n_dir)
    g = np.linspace(0.0, 1.0, n_beta)
    bb1, bb2 = np.meshgrid(g, g, indexing="ij")
    bb1, bb2 = bb1.ravel(), bb2.ravel()
    r1m, r2m, sm = _effective(kind, params, bb1, bb2)

    nd = len(lam)
    best = np.empty(nd)
    beta = np.empty((nd, 2))
    for i, l in enumerate(lam):
        vals, _, _ = _polygon_max(l, r1m, r2m, sm)
        j = int(np.argmax(vals))
        best[i] = vals[j]
        beta[i] = bb1[j], bb2[j]

    if refine:

        def objective(b1, b2):
            x, y, s = _effective(kind, params, b1, b2)
            return _polygon_max(lam, x, y, s)[0]

        w = 2.0 / n_beta
        boxes = [(np.clip(beta[:, 0] - w, 0.0, 1.0), np.clip(beta[:, 0] + w, 0.0, 1.0),
                  np.clip(beta[:, 1] - w, 0.0, 1.0), np.clip(beta[:, 1] + w, 0.0, 1.0))]
        if kind is RegionKind.CG:
            boxes.append((np.zeros(nd), np.ones(nd), np.zeros(nd), np.ones(nd)))
        for box in boxes:
            t1, t2, val = _nested_max(objective, *box)
            better = val > best
            best = np.where(better, val, best)
            beta[better, 0] = t1[better]
            beta[better, 1] = t2[better]

    x, y, s = _effective(kind, params, beta[:, 0], beta[:, 1])
    vals, px, py = _polygon_max(lam, x, y, s)
    return RateRegion(
        directions=lam,
        support_values=vals,
        points=np.column_stack([px, py]),
        splits=beta.copy(),
        resolution=(n_beta, nd),
        kind=kind.value,
    )


def pentagon_region(bounds: PentagonBounds, n_dir: int = 181) -> RateRegion:
    """Region of a single pentagon on the standard direction grid."""
    lam = direction_grid(n_dir)
    vals, px, py = _polygon_max(
        lam, bounds.b1, bounds.b2, min(bounds.b12_cond, bounds.b12)
    )
    vals = np.broadcast_to(vals, lam.shape).astype(float)
    pts = np.column_stack([np.broadcast_to(px, lam.shape), np.broadcast_to(py, lam.shape)])
    return RateRegion(
        directions=lam,
        support_values=vals,
        points=pts.astype(float),
        splits=np.full((len(lam), 2), np.nan),
        resolution=(1, len(lam)),
        kind="pentagon",
    )


def cooperation_region(params: ChannelParams, n_dir: int = 181) -> RateRegion:
    """Full-cooperation region ``R1 + R2 <= 1/2 log(1 + (sqrt P1 + sqrt P2)^2 / sigma2)``."""
    s = 0.5 * math.log1p((math.sqrt(params.p1) + math.sqrt(params.p2)) ** 2 / params.sigma2)
    return pentagon_region(PentagonBounds(s, s, s, s), n_dir)


def contains(region: RateRegion, pair, tol: float = 1e-9) -> bool:
    """True iff ``pair`` satisfies every stored support constraint up to ``tol``."""
    r1, r2 = (pair.r1, pair.r2) if isinstance(pair, RatePair) else pair
    lam = region.directions
    lhs = lam * r1 + (1.0 - lam) * r2
    return bool(np.all(lhs <= region.support_values + tol))


def hausdorff(a: RateRegion, b: RateRegion) -> float:
    """Sup-distance of the support functions on the shared direction grid.

    Raises
    ------
    ValueError
        If the two regions were sampled on different direction grids.
    """
    if a.directions.shape != b.directions.shape or not np.array_equal(
        a.directions, b.directions
    ):
        raise ValueError("regions were built on different direction grids")
    return float(np.max(np.abs(a.support_values - b.support_values)))


@dataclass(frozen=True)
class RegionComparison:
    equal: bool
    distance: float
    worst_direction: float
    ach_excess: float
    tol: float


def verify_regions_equal(
    params: ChannelParams,
    n_beta: int = 201,
    n_dir: int = 181,
    tol: float = 2e-3,
    refine: bool = True,
) -> RegionComparison:
    """Compare the successive-decoding region with the capacity region.

    ``ach_excess`` is the largest amount by which ``ACH`` pokes out of ``CG``
    in any direction; it must stay within ``tol`` for ``equal`` to hold.
    """
    cg = build_region(RegionKind.CG, params, n_beta, n_dir, refine)
    ach = build_region(RegionKind.ACH, params, n_beta, n_dir, refine)
    diff = np.abs(cg.support_values - ach.support_values)
    i = int(np.argmax(diff))
    dist = float(diff[i])
    excess = float(np.max(ach.support_values - cg.support_values))
    return RegionComparison(
        equal=bool(dist <= tol and excess <= tol),
        distance=dist,
        worst_direction=float(cg.directions[i]),
        ach_excess=excess,
        tol=tol,
    )


def sweep_params() -> list[ChannelParams]:
    """36 channels: ``P1 = P2`` in {0.5, 1, 4}, ``sigma2`` in {0.5, 1} and
    unordered conference pairs drawn from {0, 0.2, 1}."""
    levels = (0.0, 0.2, 1.0)
    pairs = [(a, b) for i, a in enumerate(levels) for b in levels[i:]]
    return [
        ChannelParams(p, p, s2, c12, c21)
        for p in (0.5, 1.0, 4.0)
        for s2 in (0.5, 1.0)
        for c12, c21 in pairs
    ]


def verify_sweep(n_beta: int = 201, n_dir: int = 181, tol: float = 2e-3, refine: bool = True):
    """:func:`verify_regions_equal` on every channel of :func:`sweep_params`."""
    return [(p, verify_regions_equal(p, n_beta, n_dir, tol, refine)) for p in sweep_params()]


def write_csv(region: RateRegion, out=None, units: str = "nats") -> str:
    """Write one row per direction; returns the CSV text.

    Rate columns are divided by ``log 2`` when ``units == "bits"``.
    """
    if units not in ("nats", "bits"):
        raise ValueError(f"unknown units {units!r}")
    f = 1.0 / math.log(2.0) if units == "bits" else 1.0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for l, h, (x, y), (b1, b2) in zip(
        region.directions, region.support_values, region.points, region.splits
    ):
        w.writerow([f"{v:.9g}" for v in (l, h * f, x * f, y * f, b1, b2)])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text
