import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confmac.ginfo import ChannelParams, is_in_kg
from confmac.oracle import (
    DiscreteTriple,
    check_domination,
    discrete_pentagon,
    format_record,
    mixture_entropy,
    random_markov_triple,
    run_suite,
    v_projection_discrete,
)
from confmac.quadrature import QuadratureError, adaptive_simpson

from reference import mixture_entropy_mc, mixture_entropy_mp

H_UNIT = 0.5 * math.log(2 * math.pi * math.e)
CONF = ChannelParams(1.0, 1.0, 1.0, 0.1, 0.1)


def _point_mass_triple(m=1):
    z = np.zeros((m, 1))
    return DiscreteTriple(np.full(m, 1.0 / m), z, np.ones((m, 1)), z, np.ones((m, 1)))


class TestQuadrature:
    def test_polynomial_exact(self):
        assert adaptive_simpson(lambda x: x**3 - x, 0.0, 2.0) == pytest.approx(2.0, abs=1e-12)

    def test_gaussian_integral(self):
        v = adaptive_simpson(lambda x: np.exp(-x * x / 2), -12.0, 12.0, tol=1e-12)
        assert v == pytest.approx(math.sqrt(2 * math.pi), abs=1e-11)

    def test_budget(self):
        with pytest.raises(QuadratureError):
            adaptive_simpson(lambda x: np.sin(1.0 / (x + 1e-9)), 0.0, 1.0, tol=1e-14, budget=200)

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            adaptive_simpson(np.sin, 1.0, 1.0)


class TestMixtureEntropy:
    def test_single_gaussian(self):
        assert mixture_entropy([0.0], [1.0], 1.0) == pytest.approx(H_UNIT, abs=1e-9)

    def test_scales_with_variance(self):
        assert mixture_entropy([3.0], [1.0], 4.0) == pytest.approx(H_UNIT + math.log(2), abs=1e-9)

    def test_collapsing_mixture(self):
        h = [mixture_entropy([-c, c], [0.5, 0.5], 1.0) for c in (1e-1, 1e-2, 1e-3)]
        gaps = [x - H_UNIT for x in h]
        assert gaps[0] > gaps[1] > gaps[2] >= -1e-9
        assert gaps[2] < 1e-6

    def test_duplicates_merge(self):
        a = mixture_entropy([0.0, 0.0, 1.0], [0.25, 0.25, 0.5], 1.0)
        b = mixture_entropy([0.0, 1.0], [0.5, 0.5], 1.0)
        assert a == pytest.approx(b, abs=1e-12)

    def test_binary_against_high_precision(self):
        h = mixture_entropy([-1.0, 1.0], [0.5, 0.5], 1.0)
        assert h == pytest.approx(mixture_entropy_mp([-1, 1], [0.5, 0.5], 1.0), abs=1e-8)
        assert h == pytest.approx(1.7557693535, abs=1e-9)

    def test_binary_against_sampling(self):
        est = mixture_entropy_mc([-1.0, 1.0], [0.5, 0.5], 1.0, n_samples=10**6)
        assert mixture_entropy([-1.0, 1.0], [0.5, 0.5], 1.0) == pytest.approx(est, abs=1e-4)

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            mixture_entropy([0.0, 1.0], [0.5, 0.6], 1.0)
        with pytest.raises(ValueError):
            mixture_entropy([0.0], [1.0], 0.0)

    def test_far_apart_atoms(self):
        # two well separated components: entropy is H_UNIT + log 2
        h = mixture_entropy([-40.0, 40.0], [0.5, 0.5], 1.0)
        assert h == pytest.approx(H_UNIT + math.log(2), abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(-3, 3), min_size=1, max_size=6),
        st.floats(0.05, 4.0),
        st.integers(0, 2**31),
    )
    def test_between_noise_floor_and_gaussian(self, means, s2, seed):
        w = np.random.default_rng(seed).dirichlet(np.ones(len(means)))
        h = mixture_entropy(means, w, s2)
        var = float(w @ (np.array(means) - w @ np.array(means)) ** 2)
        assert h >= 0.5 * math.log(2 * math.pi * math.e * s2) - 1e-8
        assert h <= 0.5 * math.log(2 * math.pi * math.e * (s2 + var)) + 1e-8


class TestDiscreteTriple:
    def test_support_limit(self):
        with pytest.raises(ValueError):
            DiscreteTriple(np.full(9, 1 / 9), np.zeros((9, 1)), np.ones((9, 1)),
                           np.zeros((9, 1)), np.ones((9, 1)))

    def test_probabilities_checked(self):
        with pytest.raises(ValueError):
            DiscreteTriple([0.5, 0.6], np.zeros((2, 1)), np.ones((2, 1)),
                           np.zeros((2, 1)), np.ones((2, 1)))

    def test_immutable(self):
        t = random_markov_triple(0, 2, 2)
        with pytest.raises(ValueError):
            t.x1_points[0, 0] = 5.0


class TestDiscretePentagon:
    def test_deterministic_triple(self):
        b = discrete_pentagon(_point_mass_triple(), CONF)
        assert b.as_array() == pytest.approx([0.1, 0.1, 0.2, 0.0], abs=1e-9)

    def test_uninformative_u(self):
        b = discrete_pentagon(_point_mass_triple(2), CONF)
        assert b.as_array() == pytest.approx([0.1, 0.1, 0.2, 0.0], abs=1e-9)

    def test_binary_input_three_bounds_agree(self):
        pts = np.tile([-1.0, 1.0], (2, 1))
        prb = np.full((2, 2), 0.5)
        t = DiscreteTriple([0.5, 0.5], pts, prb, np.zeros((2, 1)), np.ones((2, 1)))
        b = discrete_pentagon(t, ChannelParams())
        assert b.b1 == pytest.approx(b.b12_cond, abs=1e-9)
        assert b.b1 == pytest.approx(b.b12, abs=1e-9)
        mi = mixture_entropy_mc([-1.0, 1.0], [0.5, 0.5], 1.0, n_samples=10**6) - H_UNIT
        assert b.b1 == pytest.approx(mi, abs=1e-4)
        assert b.b2 == pytest.approx(0.0, abs=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4))
    def test_chain_rule(self, seed, m, a):
        b = discrete_pentagon(random_markov_triple(seed, m, a), ChannelParams())
        assert b.b12_cond >= max(b.b1, b.b2) - 1e-7
        assert min(b.as_array()) >= 0.0


class TestProjection:
    def test_independent_of_u(self):
        pts = np.tile([-1.0, 0.5, 2.0], (2, 1))
        prb = np.tile([0.2, 0.5, 0.3], (2, 1))
        t = DiscreteTriple([0.4, 0.6], pts, prb, pts, prb)
        k = v_projection_discrete(t)
        assert k.k22 == pytest.approx(0.0, abs=1e-15)
        assert k.k12 == pytest.approx(0.0, abs=1e-15)

    def test_copy_of_u(self):
        x = np.array([[-1.0], [1.0]])
        t = DiscreteTriple([0.5, 0.5], x, np.ones((2, 1)), np.zeros((2, 1)), np.ones((2, 1)))
        k = v_projection_discrete(t)
        assert (k.k11, k.k12, k.k22) == pytest.approx((1.0, 1.0, 1.0))

    def test_against_joint_enumeration(self):
        t = random_markov_triple(42, 3, 3)
        cells = []
        for u in range(3):
            for i in range(3):
                for j in range(3):
                    p = t.u_probs[u] * t.x1_probs[u, i] * t.x2_probs[u, j]
                    cells.append((p, u, t.x1_points[u, i], t.x2_points[u, j]))
        p = np.array([c[0] for c in cells])
        uu = np.array([c[1] for c in cells])
        x1 = np.array([c[2] for c in cells])
        x2 = np.array([c[3] for c in cells])
        # V = E[X1 | U] - E[X1], computed from the joint table
        cond = np.array([np.sum((p * x1)[uu == u]) / np.sum(p[uu == u]) for u in range(3)])
        v = cond[uu] - np.sum(p * x1)
        z = np.column_stack([x1 - p @ x1, v, x2 - p @ x2])
        want = (z * p[:, None]).T @ z
        assert np.allclose(v_projection_discrete(t).matrix(), want, atol=1e-14)

    @settings(max_examples=50)
    @given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 8))
    def test_always_in_kg(self, seed, m, a):
        assert is_in_kg(v_projection_discrete(random_markov_triple(seed, m, a)), 1e-9)


def _gauss_hermite_triple(atoms, a=0.6, b=0.5, noise=0.5):
    # U ~ N(0,1), X1 = a U + E1, X2 = b U + E2, all quantised to `atoms` points
    x, w = np.polynomial.hermite_e.hermegauss(atoms)
    w = w / w.sum()
    u_probs = w
    x1 = a * x[:, None] + noise * x[None, :]
    x2 = b * x[:, None] + noise * x[None, :]
    prb = np.tile(w, (atoms, 1))
    return DiscreteTriple(u_probs, x1, prb, x2, prb)


class TestDomination:
    def test_deterministic(self):
        rep = check_domination(_point_mass_triple(), CONF)
        assert rep.chain_holds
        assert rep.discrete.as_array() == pytest.approx([0.1, 0.1, 0.2, 0.0], abs=1e-9)

    def test_gauss_hermite_margins_shrink(self):
        p = ChannelParams(1.0, 1.0, 1.0, 0.1, 0.1)
        m4 = check_domination(_gauss_hermite_triple(4), p)
        m8 = check_domination(_gauss_hermite_triple(8), p)
        assert m4.chain_holds and m8.chain_holds
        assert np.max(np.abs(m8.margins)) < np.max(np.abs(m4.margins))
        assert np.max(np.abs(m8.margins)) < 0.02

    def test_small_suite(self):
        reps = list(run_suite(CONF, n_triples=48, seed=1000))
        assert len(reps) == 48
        assert all(r.chain_holds and r.in_kg for _, _, _, r in reps)
        assert {(m, a) for _, m, a, _ in reps} == {(m, a) for m in range(1, 5) for a in range(1, 5)}

    def test_record_format(self):
        rep = check_domination(random_markov_triple(3, 2, 2), CONF)
        line = format_record(3, 2, 2, rep)
        keys = [kv.split("=")[0] for kv in line.split()]
        assert keys == ["seed", "m", "a", "margin_b1", "margin_b2", "margin_b12_cond",
                        "margin_b12", "in_kg", "chain_holds"]


class TestRandomTriples:
    def test_deterministic(self):
        a = random_markov_triple(7, 3, 4)
        b = random_markov_triple(7, 3, 4)
        for name in ("u_probs", "x1_points", "x1_probs", "x2_points", "x2_probs"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_caps(self):
        t = random_markov_triple(0, 3, 3, 1.0, 1.0)
        assert t.second_moment(1) <= 1.0 + 1e-9
        assert t.second_moment(2) <= 1.0 + 1e-9

    def test_rescaled_inputs_hit_cap(self):
        for seed in range(20):
            t = random_markov_triple(seed, 4, 4, 0.5, 0.5)
            for k in (1, 2):
                assert t.second_moment(k) <= 0.5 + 1e-9

    def test_bad_support(self):
        with pytest.raises(ValueError):
            random_markov_triple(0, 9, 2)
        with pytest.raises(ValueError):
            next(run_suite(CONF, 1, max_support=9))
