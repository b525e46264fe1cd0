"""Monte Carlo simulation of conferencing plus layered dirty-paper coding.

Channel: ``Y = X1 + X2 + S + Z`` where ``S ~ N(0, q)`` is known to both
transmitters after the conference and ``Z`` has variance ``sigma2``.

Scheme, for decode order common -> private 1 -> private 2:

* the conference moves ``min(C12, R1)`` nats of message 1 and
  ``min(C21, R2)`` nats of message 2 to the other encoder, forming the
  common message ``w0``; the remainders ``w1``, ``w2`` stay private;
* ``w0`` is dirty-paper coded for power ``P0``, noise
  ``beta1 P1 + beta2 P2 + sigma2`` and interference ``S``; each encoder sends
  its share ``sqrt(bar_beta_k P_k / P0)`` of the result, which the channel
  adds coherently;
* ``w1`` is coded for power ``beta1 P1``, noise ``beta2 P2 + sigma2`` and
  interference ``s1_scale S``; ``w2`` for ``beta2 P2``, noise ``sigma2`` and
  ``s2_scale S``;
* the receiver finds each layer's auxiliary codeword by nearest neighbour
  search against the scaled residual, then subtracts that codeword.

Each dirty-paper code is a random binning code: ``bins`` groups of
``codewords_per_bin`` words drawn uniformly on a sphere, in antipodal pairs.
The encoder picks the word of the message's bin closest to ``alpha * s`` and
transmits the difference.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special, stats

from .ginfo import ChannelParams
from .regions import PowerSplit

__all__ = [
    "DESK_SCALE_LIMIT",
    "DeskScaleError",
    "SimConfig",
    "Codebook",
    "Codebooks",
    "SimReport",
    "message_count",
    "conference_split",
    "conference_merge",
    "make_codebooks",
    "dpc_encode",
    "channel",
    "transmit",
    "successive_decode",
    "run_trials",
    "wilson_interval",
    "config_from_dict",
    "expected_max_cosine",
    "expected_user_powers",
]

DESK_SCALE_LIMIT = 2**22
NOISE_MODELS = ("gaussian", "uniform")
DECODE_ORDERS = ("common-1-2", "common-2-1")

_CODEBOOK_STREAM = 1
_TRIAL_STREAM = 2
_ROLE_IDS = {"common": 0, "private1": 1, "private2": 2}
_CHUNK_CELLS = 2**23


class DeskScaleError(ValueError):
    """The configuration needs more codewords than a desk machine should enumerate."""


def message_count(n: int, rate: float) -> int:
    """``floor(exp(n * rate))``; raises :class:`DeskScaleError` when absurdly large."""
    x = n * rate
    if x > math.log(DESK_SCALE_LIMIT) + 1.0:
        raise DeskScaleError(
            f"exp({x:.2f}) messages exceed the desk-scale limit of {DESK_SCALE_LIMIT}"
        )
    return max(int(math.floor(math.exp(x) + 1e-9)), 1)


@dataclass(frozen=True)
class SimConfig:
    """One simulation run. ``rates`` are target ``(R1, R2)`` in nats."""

    params: ChannelParams
    split: PowerSplit
    rates: tuple
    n: int
    trials: int
    master_seed: int = 0
    noise_model: str = "gaussian"
    decode_order: str = "common-1-2"

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("blocklength n must be at least 8")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if len(self.rates) != 2 or min(self.rates) < 0:
            raise ValueError("rates must be a nonnegative pair")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {NOISE_MODELS}")
        if self.decode_order not in DECODE_ORDERS:
            raise ValueError(f"decode_order must be one of {DECODE_ORDERS}")
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))

    @property
    def sizes(self) -> dict:
        """Message-set sizes before and after the conference.

        ``M1 = M1a x M1b`` with ``|M1a| = floor(exp(n min(C12, R1)))`` and
        ``|M1b| = floor(floor(exp(n R1)) / |M1a|)``, so ``|M1|`` never exceeds
        ``floor(exp(n R1))``; likewise for user 2.
        """
        n, (r1, r2), p = self.n, self.rates, self.params
        k1a = message_count(n, min(p.c12, r1))
        k2a = message_count(n, min(p.c21, r2))
        # product message sets keep the conferenced and private parts
        # independent and uniform
        k1b = max(message_count(n, r1) // k1a, 1)
        k2b = max(message_count(n, r2) // k2a, 1)
        return {
            "m1": k1a * k1b,
            "m2": k2a * k2b,
            "m1a": k1a,
            "m2a": k2a,
            "m1b": k1b,
            "m2b": k2b,
        }


def config_from_dict(d: dict) -> SimConfig:
    """Build a :class:`SimConfig` from the JSON schema shared with the CLI."""
    allowed = {"p1", "p2", "sigma2", "c12", "c21", "q", "beta1", "beta2", "r1", "r2",
               "n", "trials", "seed", "noise_model", "decode_order"}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    params = ChannelParams(
        **{k: float(d[k]) for k in ("p1", "p2", "sigma2", "c12", "c21", "q") if k in d}
    )
    return SimConfig(
        params=params,
        split=PowerSplit(float(d.get("beta1", 0.5)), float(d.get("beta2", 0.5))),
        rates=(float(d.get("r1", 0.0)), float(d.get("r2", 0.0))),
        n=int(d.get("n", 64)),
        trials=int(d.get("trials", 100)),
        master_seed=int(d.get("seed", 0)),
        noise_model=d.get("noise_model", "gaussian"),
        decode_order=d.get("decode_order", "common-1-2"),
    )


def conference_split(m1: int, m2: int, config: SimConfig) -> tuple[int, int, int]:
    """Single-round conference.

    ``m1 = m1a + |M1a| * m1b``; ``m1a`` crosses the pipe, whose alphabet has
    ``|M1a| = floor(exp(n min(C12, R1)))`` letters. Returns ``(w0, w1, w2)``
    with ``w0 = m1a + |M1a| * m2a``.
    """
    sz = config.sizes
    if not (0 <= m1 < sz["m1"] and 0 <= m2 < sz["m2"]):
        raise ValueError("message index out of range")
    m1a, m1b = m1 % sz["m1a"], m1 // sz["m1a"]
    m2a, m2b = m2 % sz["m2a"], m2 // sz["m2a"]
    return m1a + sz["m1a"] * m2a, m1b, m2b


def conference_merge(w0, w1, w2, config: SimConfig):
    """Inverse of :func:`conference_split`; works elementwise on arrays."""
    sz = config.sizes
    m1a, m2a = np.mod(w0, sz["m1a"]), np.floor_divide(w0, sz["m1a"])
    return m1a + sz["m1a"] * np.asarray(w1), m2a + sz["m2a"] * np.asarray(w2)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Random binning code for one layer.

    ``entries`` holds ``bins * codewords_per_bin`` words, bin ``b`` occupying
    rows ``b * codewords_per_bin`` onwards. ``power`` is the transmit power
    of the layer, ``word_power`` the per-symbol energy of every word.
    """

    role: str
    rate: float
    bins: int
    codewords_per_bin: int
    power: float
    noise: float
    alpha: float
    interference_scale: float
    word_power: float
    entries: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.bins * self.codewords_per_bin

    def bin_words(self, b) -> np.ndarray:
        L = self.codewords_per_bin
        return self.entries.reshape(self.bins, L, -1)[b]


@dataclass(frozen=True, eq=False)
class Codebooks:
    common: Codebook
    private1: Codebook
    private2: Codebook
    p0: float
    share1: float
    share2: float
    s1_scale: float
    s2_scale: float
    order: tuple
    backoff: float = 1.0
    expected_powers: tuple = (0.0, 0.0)

    def stages(self) -> list[Codebook]:
        return [getattr(self, r) for r in self.order]


def expected_max_cosine(n: int, count: int, antipodal: bool = False) -> float:
    """Mean of the largest cosine between a fixed direction and ``count``
    uniform directions in ``R^n``.

    Each cosine ``t`` satisfies ``(1 + t) / 2 ~ Beta((n - 1) / 2, (n - 1) / 2)``.
    With ``antipodal`` the directions come in pairs ``(d, -d)``, so a pair
    contributes ``|t|``.
    """
    if count <= 1:
        return 0.0
    t = np.linspace(-1.0, 1.0, 40001)
    a = 0.5 * (n - 1)
    cdf = stats.beta.cdf(0.5 * (1.0 + t), a, a)
    if antipodal:
        pairs, singles = divmod(count, 2)
        with np.errstate(divide="ignore"):
            log_pair = np.where(t > 0, np.log(np.clip(2.0 * cdf - 1.0, 0.0, None)), -np.inf)
            log_single = np.log(cdf)
        cdf_max = np.exp(pairs * log_pair + (singles * log_single if singles else 0.0))
    else:
        cdf_max = np.exp(count * stats.beta.logcdf(0.5 * (1.0 + t), a, a))
    return float(1.0 - np.trapezoid(cdf_max, t))


def _mean_norm(n: int) -> float:
    """``E|g| / sqrt(n)`` for ``g ~ N(0, I_n)``."""
    return math.sqrt(2.0 / n) * math.exp(special.gammaln(0.5 * (n + 1)) - special.gammaln(0.5 * n))


@dataclass(frozen=True)
class _LayerPlan:
    role: str
    bins: int
    per_bin: int
    power: float
    noise: float
    alpha: float
    scale: float
    cos: float  # expected best cosine between a bin word and S


def _word_power(plan: _LayerPlan, target: float, q: float, kappa: float) -> float:
    """Word energy giving expected layer power ``target``.

    The encoder sends ``x = u - alpha t S``; with ``|u|^2 = n rho``,
    ``E|x|^2 / n = rho - 2 alpha t cos sqrt(rho q) kappa + alpha^2 t^2 q``, a
    quadratic in ``sqrt(rho)``.
    """
    if plan.power == 0:
        return 0.0
    a = plan.alpha * plan.scale * plan.cos * math.sqrt(q) * kappa
    disc = a * a + target - (plan.alpha * plan.scale) ** 2 * q
    if disc < 0:
        raise ValueError(
            f"{plan.role}: bins of {plan.per_bin} words cannot keep power {target:.4g} "
            f"against interference of variance {q * plan.scale**2:.4g} at this blocklength"
        )
    return (a + math.sqrt(disc)) ** 2


def _layer_moments(plan, rho, q, kappa):
    """(E|x|^2 / n, mean of <x, S/|S|> / sqrt(n) split into its two parts)."""
    at = plan.alpha * plan.scale
    g = math.sqrt(rho) * plan.cos
    own = rho - 2.0 * at * g * math.sqrt(q) * kappa + at * at * q
    return own, g, at


def _cross(mi, mj, q, kappa):
    # E<x_i, x_j> / n: given S the two selections are independent and the
    # parts orthogonal to S average out, leaving the product of projections
    _, gi, ai = mi
    _, gj, aj = mj
    return gi * gj - (gi * aj + gj * ai) * math.sqrt(q) * kappa + ai * aj * q


def expected_user_powers(plans, rhos, share1, share2, q, n):
    """Expected per-symbol transmit powers of both users for given word energies."""
    kappa = _mean_norm(n)
    mom = {p.role: _layer_moments(p, rhos[p.role], q, kappa) for p in plans}
    c, p1, p2 = mom["common"], mom["private1"], mom["private2"]
    u1 = share1**2 * c[0] + p1[0] + 2.0 * share1 * _cross(c, p1, q, kappa)
    u2 = share2**2 * c[0] + p2[0] + 2.0 * share2 * _cross(c, p2, q, kappa)
    return u1, u2


def _draw_words(plan: _LayerPlan, n: int, rho: float, seed_seq) -> np.ndarray:
    total = plan.bins * plan.per_bin
    words = np.zeros((total, n))
    if rho == 0:
        return words
    rng = np.random.default_rng(seed_seq)
    L = plan.per_bin
    # antipodal pairs (w, -w) keep every bin centroid at zero; with one word
    # per bin the pairs straddle consecutive bins instead
    if L == 1:
        # odd sizes end with a regular simplex triple so the mean stays zero
        tail = 3 if total % 2 and total >= 3 else total % 2
        pairs = (total - tail) // 2
        base = rng.standard_normal((pairs, n))
        base *= math.sqrt(n * rho) / np.linalg.norm(base, axis=1, keepdims=True)
        words[0:2 * pairs:2] = base
        words[1:2 * pairs:2] = -base
        if tail == 1:
            w = rng.standard_normal(n)
            words[-1] = w * math.sqrt(n * rho) / np.linalg.norm(w)
        elif tail == 3:
            q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
            ang = 2.0 * math.pi * np.arange(3) / 3.0
            words[-3:] = math.sqrt(n * rho) * (np.outer(np.cos(ang), q[:, 0])
                                                + np.outer(np.sin(ang), q[:, 1]))
        return words
    half = -(-L // 2)
    base = rng.standard_normal((plan.bins, half, n))
    base *= math.sqrt(n * rho) / np.linalg.norm(base, axis=2, keepdims=True)
    per = np.empty((plan.bins, 2 * half, n))
    per[:, 0::2] = base
    per[:, 1::2] = -base
    return per[:, :L].reshape(total, n)


def make_codebooks(config: SimConfig) -> Codebooks:
    """Draw the three layer codebooks and the derived scaling constants.

    Word energies are set so each layer's expected transmit power matches
    its budget; if the common/private cross term would then push a user
    above its power constraint, all layer budgets are backed off by a common
    factor until the expected powers are at most ``P1`` and ``P2``.

    Raises
    ------
    DeskScaleError
        If any layer needs more than ``DESK_SCALE_LIMIT`` codewords.
    """
    p, sp, n = config.params, config.split, config.n
    sz = config.sizes
    priv1, priv2 = sp.beta1 * p.p1, sp.beta2 * p.p2
    c1 = math.sqrt((1.0 - sp.beta1) * p.p1)
    c2 = math.sqrt((1.0 - sp.beta2) * p.p2)
    p0 = (c1 + c2) ** 2
    share1 = c1 / math.sqrt(p0) if p0 > 0 else 0.0
    share2 = c2 / math.sqrt(p0) if p0 > 0 else 0.0
    # transmit budgets add up exactly: share_k^2 P0 + beta_k P_k = P_k
    assert abs(share1**2 * p0 + priv1 - p.p1) <= 1e-12 * max(1.0, p.p1)
    assert abs(share2**2 * p0 + priv2 - p.p2) <= 1e-12 * max(1.0, p.p2)

    noise0 = priv1 + priv2 + p.sigma2
    # equals 1 - P0 / (P1 + P2 + 2 sqrt(bar_beta1 bar_beta2 P1 P2) + sigma2)
    s1_scale = 1.0 - p0 / (p0 + noise0)
    if config.decode_order == "common-1-2":
        order = ("common", "private1", "private2")
        first_power, second_power = priv1, priv2
    else:
        order = ("common", "private2", "private1")
        first_power, second_power = priv2, priv1
    s2_scale = (1.0 - first_power / (first_power + second_power + p.sigma2)) * s1_scale

    bins = {"common": sz["m1a"] * sz["m2a"], "private1": sz["m1b"], "private2": sz["m2b"]}
    plans = []
    for role, power, noise, scale in (
        ("common", p0, noise0, 1.0),
        (order[1], first_power, second_power + p.sigma2, s1_scale),
        (order[2], second_power, p.sigma2, s2_scale),
    ):
        alpha = power / (power + noise) if power > 0 else 0.0
        q_eff = p.q * scale * scale
        if power > 0 and q_eff > 0:
            per_bin = message_count(n, 0.5 * math.log((power + alpha * alpha * q_eff) / power))
        else:
            per_bin = 1
        total = bins[role] * per_bin
        if total > DESK_SCALE_LIMIT:
            raise DeskScaleError(f"{role} codebook needs {total} codewords (> {DESK_SCALE_LIMIT})")
        cos = expected_max_cosine(n, per_bin, antipodal=per_bin >= 2)
        plans.append(_LayerPlan(role, bins[role], per_bin, power, noise, alpha, scale, cos))

    kappa = _mean_norm(n)

    def energies(gamma):
        return {pl.role: _word_power(pl, gamma * pl.power, p.q, kappa) for pl in plans}

    def excess(gamma):
        u1, u2 = expected_user_powers(plans, energies(gamma), share1, share2, p.q, n)
        return max(u1 - p.p1, u2 - p.p2)

    backoff = 1.0
    if excess(1.0) > 1e-12:
        lo, hi = 1.0, 1.0
        while excess(lo) > 0:
            hi, lo = lo, lo / 2.0
            if lo < 1e-6:
                raise ValueError("no power backoff keeps the expected powers within budget")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if excess(mid) <= 0 else (lo, mid)
        backoff = lo
    rhos = energies(backoff)
    e1, e2 = expected_user_powers(plans, rhos, share1, share2, p.q, n)
    assert e1 <= p.p1 * (1 + 1e-9) + 1e-12 and e2 <= p.p2 * (1 + 1e-9) + 1e-12

    books = {}
    for pl in plans:
        seed = np.random.SeedSequence([config.master_seed, _CODEBOOK_STREAM, _ROLE_IDS[pl.role]])
        words = _draw_words(pl, n, rhos[pl.role], seed)
        if rhos[pl.role] > 0:
            mean_energy = float(np.mean(words**2))
            if abs(mean_energy - rhos[pl.role]) > 0.05 * rhos[pl.role]:
                raise AssertionError(f"{pl.role} codebook energy {mean_energy:.4g} off target")
        words.setflags(write=False)
        books[pl.role] = Codebook(
            pl.role, math.log(pl.bins) / n, pl.bins, pl.per_bin, pl.power, pl.noise,
            pl.alpha, pl.scale, rhos[pl.role], words,
        )
    return Codebooks(books["common"], books["private1"], books["private2"], p0, share1,
                     share2, s1_scale, s2_scale, order, backoff, (e1, e2))


def dpc_encode(book: Codebook, message_bin, s_scaled):
    """Dirty-paper encode one message (or a batch).

    Picks the word ``u`` of the bin closest to ``alpha * s_scaled``, lowest
    index on ties, and returns ``(u, x)`` with ``x = u - alpha * s_scaled``.
    """
    s = np.asarray(s_scaled, dtype=float)
    single = s.ndim == 1
    b = np.atleast_1d(np.asarray(message_bin))
    if np.any((b < 0) | (b >= book.bins)):
        raise ValueError("message bin out of range")
    s2 = np.atleast_2d(s)
    target = book.alpha * s2
    words = book.bin_words(b)  # (T, L, n)
    d = np.sum((words - target[:, None, :]) ** 2, axis=2)
    idx = np.argmin(d, axis=1)
    u = words[np.arange(len(b)), idx]
    x = u - target
    if single:
        return u[0], x[0]
    return u, x


def channel(x1, x2, s, z):
    """``y = x1 + x2 + s + z`` elementwise; all inputs must share a shape."""
    x1, x2, s, z = (np.asarray(v, dtype=float) for v in (x1, x2, s, z))
    if not (x1.shape == x2.shape == s.shape == z.shape):
        raise ValueError("channel inputs must have equal lengths")
    return x1 + x2 + s + z


@dataclass
class Transmission:
    """Everything produced for one batch of blocks, for inspection and tests."""

    w: tuple
    u: dict
    x: dict
    x1: np.ndarray
    x2: np.ndarray
    s: np.ndarray
    y: np.ndarray


def transmit(books: Codebooks, w0, w1, w2, s, z) -> Transmission:
    """Encode a batch of ``(w0, w1, w2)`` against interference ``s`` and send it."""
    s = np.atleast_2d(np.asarray(s, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    bins = {"common": w0, "private1": w1, "private2": w2}
    u, x = {}, {}
    for b in books.stages():
        u[b.role], x[b.role] = dpc_encode(b, bins[b.role], b.interference_scale * s)
    x1 = books.share1 * x["common"] + x["private1"]
    x2 = books.share2 * x["common"] + x["private2"]
    y = channel(x1, x2, s, z)
    return Transmission((w0, w1, w2), u, x, x1, x2, s, y)


def _nearest(book: Codebook, y: np.ndarray) -> np.ndarray:
    """Index of the word closest to ``alpha * y`` for each row of ``y``."""
    words = book.entries
    norms = np.einsum("ij,ij->i", words, words)
    t = y.shape[0]
    out = np.empty(t, dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(book.size, 1))
    for i in range(0, t, step):
        ay = book.alpha * y[i:i + step]
        d = norms[None, :] - 2.0 * ay @ words.T
        out[i:i + step] = np.argmin(d, axis=1)
    return out


def successive_decode(y, books: Codebooks, genie=None):
    """Decode layer by layer, subtracting each decided auxiliary codeword.

    ``genie`` optionally maps a role to the true bin indices; such layers
    skip the search and strip the word the encoder actually used
    (``genie[role + "_word"]``).

    Returns ``(w0_hat, w1_hat, w2_hat, residuals)`` where ``residuals[k]`` is
    the signal seen by stage ``k + 1``.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    genie = genie or {}
    decided = {}
    residual = y.copy()
    residuals = []
    for b in books.stages():
        if b.role in genie:
            decided[b.role] = np.asarray(genie[b.role])
            word = np.asarray(genie[b.role + "_word"])
        else:
            idx = _nearest(b, residual)
            decided[b.role] = idx // b.codewords_per_bin
            word = b.entries[idx]
        # the two common shares add back to the full auxiliary word
        coeff = books.share1 + books.share2 if b.role == "common" else 1.0
        if b.role == "common" and books.p0 == 0:
            coeff = 0.0
        residual = residual - coeff * word
        residuals.append(residual)
    return decided["common"], decided["private1"], decided["private2"], residuals


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


@dataclass(frozen=True)
class SimReport:
    trials_run: int
    n: int
    errors_common: int
    errors_m1: int
    errors_m2: int
    errors_joint: int
    empirical_power_1: float
    empirical_power_2: float
    wilson_interval_joint: tuple

    @property
    def joint_error_rate(self) -> float:
        return self.errors_joint / self.trials_run

    @property
    def wilson_half_width(self) -> float:
        lo, hi = self.wilson_interval_joint
        return 0.5 * (hi - lo)

    def power_bound(self, p: float) -> float:
        """``P + 3 sqrt(2 P^2 / (n trials))``."""
        return p + 3.0 * math.sqrt(2.0 * p * p / (self.n * self.trials_run))

    def power_ok(self, params: ChannelParams) -> bool:
        return (self.empirical_power_1 <= self.power_bound(params.p1)
                and self.empirical_power_2 <= self.power_bound(params.p2))

    def to_text(self) -> str:
        d = asdict(self)
        lo, hi = d.pop("wilson_interval_joint")
        d["wilson_joint_low"], d["wilson_joint_high"] = lo, hi
        d["joint_error_rate"] = self.joint_error_rate
        return "".join(f"{k}={_fmt(v)}\n" for k, v in d.items())

    @classmethod
    def from_text(cls, text: str) -> "SimReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if line.strip())
        ints = ("trials_run", "n", "errors_common", "errors_m1", "errors_m2", "errors_joint")
        return cls(
            **{k: int(kv[k]) for k in ints},
            empirical_power_1=float(kv["empirical_power_1"]),
            empirical_power_2=float(kv["empirical_power_2"]),
            wilson_interval_joint=(float(kv["wilson_joint_low"]), float(kv["wilson_joint_high"])),
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _draw_trial(config: SimConfig, i: int):
    rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, _TRIAL_STREAM, i]))
    sz = config.sizes
    n, p = config.n, config.params
    m1 = int(rng.integers(sz["m1"]))
    m2 = int(rng.integers(sz["m2"]))
    s = rng.normal(0.0, math.sqrt(p.q), n) if p.q > 0 else np.zeros(n)
    if config.noise_model == "gaussian":
        z = rng.normal(0.0, math.sqrt(p.sigma2), n)
    else:
        w = math.sqrt(3.0 * p.sigma2)
        z = rng.uniform(-w, w, n)
    return m1, m2, s, z


def run_trials(config: SimConfig, books: Codebooks | None = None, batch: int = 250) -> SimReport:
    """Run ``config.trials`` independent blocks and count decoding errors.

    Trial ``i`` draws its messages, interference and noise from its own
    stream seeded by ``(master_seed, i)``, so the report depends on the
    configuration only.
    """
    if books is None:
        books = make_codebooks(config)
    T = config.trials
    err = np.zeros((T, 4), dtype=bool)
    pw = np.zeros((T, 2))
    for start in range(0, T, batch):
        idx = range(start, min(T, start + batch))
        draws = [_draw_trial(config, i) for i in idx]
        m1 = np.array([d[0] for d in draws])
        m2 = np.array([d[1] for d in draws])
        s = np.stack([d[2] for d in draws])
        z = np.stack([d[3] for d in draws])
        w = [conference_split(a, b, config) for a, b in zip(m1, m2)]
        w0, w1, w2 = (np.array(c) for c in zip(*w))
        tx = transmit(books, w0, w1, w2, s, z)
        h0, h1, h2, _ = successive_decode(tx.y, books)
        m1_hat, m2_hat = conference_merge(h0, h1, h2, config)
        sl = slice(start, start + len(draws))
        err[sl, 0] = h0 != w0
        err[sl, 1] = m1_hat != m1
        err[sl, 2] = m2_hat != m2
        err[sl, 3] = (m1_hat != m1) | (m2_hat != m2)
        pw[sl, 0] = np.mean(tx.x1**2, axis=1)
        pw[sl, 1] = np.mean(tx.x2**2, axis=1)
    counts = err.sum(axis=0)
    return SimReport(
        trials_run=T,
        n=config.n,
        errors_common=int(counts[0]),
        errors_m1=int(counts[1]),
        errors_m2=int(counts[2]),
        errors_joint=int(counts[3]),
        empirical_power_1=float(np.mean(pw[:, 0])),
        empirical_power_2=float(np.mean(pw[:, 1])),
        wilson_interval_joint=wilson_interval(int(counts[3]), T),
    )
