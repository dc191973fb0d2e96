import itertools
import math

import numpy as np
import pytest
from scipy.special import zeta as hurwitz_zeta

from mzdual.nested_sum import (
    EvalConfig,
    IndexWeight,
    InvalidParamsError,
    Link,
    NestedSumSpec,
    NonConvergentError,
    Prefactor,
    decay_exponent,
    evaluate,
    lgamma_diff,
    pochhammer_log,
    tail_power_log,
    tail_extrapolate,
    truncated_sum,
)

ZETA2 = math.pi**2 / 6
ZETA3 = 1.2020569031595942854


def single(b=2, a=0, prefactors=(), alpha=1.0, beta=1.0):
    return NestedSumSpec((IndexWeight(a=a, b=b, prefactors=prefactors),), (), alpha, beta)


class TestEvaluate:
    def test_basel(self):
        # sum 1/(m+1)^2
        res = evaluate(single(b=2, beta=1.0))
        assert res.converged
        assert abs(res.value - ZETA2) < 1e-10

    def test_half_shift(self):
        # sum 1/(m+1/2)^2 = pi^2/2
        res = evaluate(single(b=2, beta=0.5))
        assert abs(res.value - math.pi**2 / 2) < 1e-9

    def test_depth_two_strict(self):
        # sum_{0<=m1<m2} (m1+1)^-1 (m2+1)^-2 = zeta(3)
        spec = NestedSumSpec(
            (IndexWeight(b=1), IndexWeight(b=2)), (Link.STRICT,), 1.0, 1.0
        )
        res = evaluate(spec)
        assert abs(res.value - ZETA3) < 1e-9

    def test_err_estimate_reported(self):
        res = evaluate(single(b=3))
        assert res.err_estimate > 0
        assert abs(res.value - hurwitz_zeta(3, 1)) <= 10 * res.err_estimate

    def test_invalid_params(self):
        with pytest.raises(InvalidParamsError):
            evaluate(single(alpha=-0.5))
        with pytest.raises(InvalidParamsError):
            evaluate(single(beta=0.0))

    def test_non_convergent(self):
        with pytest.raises(NonConvergentError):
            evaluate(single(b=1))

    def test_tolerance_not_reached_flagged(self):
        cfg = EvalConfig(rel_tol=1e-14, max_n=5000)
        spec = NestedSumSpec((IndexWeight(a=2),), (), 0.7, 1.0)
        res = evaluate(spec, cfg)
        assert not res.converged
        # still close: the flagged value carries an honest estimate
        assert abs(res.value - hurwitz_zeta(2, 0.7)) <= 10 * res.err_estimate

    def test_link_count_validation(self):
        with pytest.raises(ValueError):
            NestedSumSpec((IndexWeight(b=2),), (Link.WEAK,), 1.0, 1.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EvalConfig(n_initial=1)
        with pytest.raises(ValueError):
            EvalConfig(growth=1)
        with pytest.raises(ValueError):
            EvalConfig(rel_tol=2.0)

    def test_debug_json(self):
        spec = NestedSumSpec(
            (IndexWeight(b=1, prefactors=(Prefactor.POCH_FIRST,)), IndexWeight(b=2)),
            (Link.WEAK,),
            1.5,
            0.5,
        )
        js = spec.to_debug_json()
        assert js["links"] == ["<="]
        assert js["prefactors"][0] == ["poch_first"]
        assert js["alpha"] == [1.5, 0.0]


class TestBruteForceEquivalence:
    # DP partial sums equal naive full enumeration over index tuples,
    # exhaustively over strict/weak link patterns, depth <= 3, N <= 200
    N = 200

    @staticmethod
    def _naive_tensor(spec: NestedSumSpec, n: int) -> float:
        from oracles import poch_ratio_first, poch_ratio_last, poch_ratio_last_shifted

        m = np.arange(n + 1, dtype=np.float64)
        weights = []
        for iw in spec.indices:
            w = np.ones(n + 1)
            if iw.a:
                w = w / (m + spec.alpha) ** iw.a
            if iw.b:
                w = w / (m + spec.beta) ** iw.b
            for pf in iw.prefactors:
                if pf is Prefactor.POCH_FIRST:
                    w = w * np.array(poch_ratio_first(spec.alpha, n))
                elif pf is Prefactor.POCH_LAST:
                    w = w * np.array(poch_ratio_last(spec.alpha, n))
                elif pf is Prefactor.POCH_FIRST_ZSTAR:
                    w = w * np.array(poch_ratio_first(spec.beta, n))
                elif pf is Prefactor.POCH_LAST_ZSTAR:
                    w = w * np.array(poch_ratio_last(spec.beta, n)) * (m + spec.alpha)
                elif pf is Prefactor.POCH_LAST_HSTAR:
                    w = w * np.array(poch_ratio_last_shifted(spec.alpha, n))
            weights.append(w)
        d = spec.depth
        grids = np.meshgrid(*([m] * d), indexing="ij", sparse=True)
        mask = np.ones([n + 1] * d, dtype=bool)
        for i, link in enumerate(spec.links):
            if link is Link.STRICT:
                mask &= grids[i] < grids[i + 1]
            else:
                mask &= grids[i] <= grids[i + 1]
        if spec.start_strict:
            mask &= grids[0] >= 1
        term = np.ones([n + 1] * d)
        for i, w in enumerate(weights):
            shape = [1] * d
            shape[i] = n + 1
            term = term * w.reshape(shape)
        return float(np.sum(term * mask))

    def test_depth_three_all_link_patterns(self):
        idx = (
            IndexWeight(b=1, prefactors=(Prefactor.POCH_FIRST,)),
            IndexWeight(a=1),
            IndexWeight(b=2, prefactors=(Prefactor.POCH_LAST,)),
        )
        for links in itertools.product((Link.STRICT, Link.WEAK), repeat=2):
            spec = NestedSumSpec(idx, links, alpha=0.8, beta=1.3)
            dp = truncated_sum(spec, self.N)
            naive = self._naive_tensor(spec, self.N)
            assert abs(dp - naive) <= 1e-12 * abs(naive), links

    def test_depth_two_and_one(self):
        for links, idx in [
            ((), (IndexWeight(b=2, prefactors=(Prefactor.POCH_FIRST, Prefactor.POCH_LAST)),)),
            ((Link.STRICT,), (IndexWeight(b=1), IndexWeight(a=2))),
            ((Link.WEAK,), (IndexWeight(a=1, b=1), IndexWeight(b=2))),
        ]:
            spec = NestedSumSpec(idx, links, alpha=1.5, beta=0.6)
            dp = truncated_sum(spec, self.N)
            naive = self._naive_tensor(spec, self.N)
            assert abs(dp - naive) <= 1e-12 * abs(naive)

    def test_start_strict(self):
        spec = NestedSumSpec((IndexWeight(b=2),), (), 1.0, 1.0, start_strict=True)
        assert abs(truncated_sum(spec, 50) - self._naive_tensor(spec, 50)) < 1e-14

    def test_hstar_prefactor_pattern(self):
        idx = (
            IndexWeight(a=1),
            IndexWeight(b=2, prefactors=(Prefactor.POCH_LAST_HSTAR,)),
        )
        for link in (Link.STRICT, Link.WEAK):
            spec = NestedSumSpec(idx, (link,), alpha=0.75, beta=1.0)
            dp = truncated_sum(spec, self.N)
            naive = self._naive_tensor(spec, self.N)
            assert abs(dp - naive) <= 1e-12 * abs(naive)


class TestMonotonicity:
    def test_partial_sums_increase(self):
        spec = NestedSumSpec(
            (IndexWeight(b=1, prefactors=(Prefactor.POCH_FIRST,)), IndexWeight(b=2)),
            (Link.STRICT,),
            0.9,
            1.1,
        )
        vals = [truncated_sum(spec, n) for n in (10, 50, 250, 1000)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestPrefactorTelescoping:
    @pytest.mark.parametrize("alpha", [0.7, 1.0, 1.6])
    def test_depth_one_collapse(self, alpha):
        # (alpha)_m/m! * m!/(alpha)_{m+1} = 1/(m+alpha): a+b+1 total weight
        spec = NestedSumSpec(
            (IndexWeight(a=1, b=1, prefactors=(Prefactor.POCH_FIRST, Prefactor.POCH_LAST)),),
            (),
            alpha,
            alpha,
        )
        res = evaluate(spec)
        assert abs(res.value - hurwitz_zeta(3, alpha)) < 1e-10


class TestErrEstimateHonesty:
    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    @pytest.mark.parametrize("alpha", [1.0, 0.6])
    def test_hurwitz_anchors(self, k, alpha):
        spec = NestedSumSpec((IndexWeight(a=k),), (), alpha, 1.0)
        res = evaluate(spec, EvalConfig(rel_tol=1e-11))
        true_err = abs(res.value - hurwitz_zeta(k, alpha))
        assert true_err <= 10 * res.err_estimate


class TestPochhammerLog:
    def test_factorial(self):
        for m in (1, 5, 40):
            assert math.isclose(pochhammer_log(1.0, m), math.lgamma(m + 1), rel_tol=1e-14)

    def test_zero_length(self):
        assert pochhammer_log(1.7, 0) == 0.0

    def test_half(self):
        assert math.isclose(pochhammer_log(0.5, 2), math.log(0.75), rel_tol=1e-14)

    def test_pole(self):
        with pytest.raises(InvalidParamsError):
            pochhammer_log(0.0, 3)
        with pytest.raises(InvalidParamsError):
            pochhammer_log(-2.0, 1)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7, 2.5, 0.3 + 0.4j, -0.5])
    @pytest.mark.parametrize("m", [0, 1, 31, 32, 33, 100])
    def test_matches_recursive_product(self, alpha, m):
        prod = 1.0 + 0j
        for j in range(m):
            prod *= alpha + j
        got = pochhammer_log(alpha, m)
        assert abs(np.exp(complex(got)) - prod) <= 1e-13 * abs(prod)

    def test_crossover_consistency(self):
        a = pochhammer_log(1.3, 31)
        b = pochhammer_log(1.3, 32)
        assert math.isclose(math.exp(b - a), 1.3 + 31, rel_tol=1e-12)


class TestLgammaDiff:
    @pytest.mark.parametrize("z,d", [(1e7, 0.6), (1e7, -0.4), (63.0, 1.2), (64.0, 1.2), (2.0, 0.5)])
    def test_against_mpmath(self, z, d):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        truth = float(mp.loggamma(mp.mpf(z) + mp.mpf(d)) - mp.loggamma(mp.mpf(z)))
        got = float(lgamma_diff(np.array([z]), d)[0])
        assert abs(got - truth) < 5e-14 * max(1.0, abs(truth))


class TestTailPowerLog:
    def test_plain_zeta_tail(self):
        assert math.isclose(tail_power_log(2, 0, 64), hurwitz_zeta(2, 65), rel_tol=1e-14)

    def test_log_weighted_self_consistency(self):
        for s, t, m in [(1.6, 0, 64), (1.6, 3, 64), (2.0, 2, 100)]:
            k = np.arange(m + 1, m + 200001, dtype=np.float64)
            head = float(np.sum(k ** (-s) * np.log(k) ** t))
            assert math.isclose(
                tail_power_log(s, t, m),
                head + tail_power_log(s, t, m + 200000),
                rel_tol=1e-12,
            )


class TestTailExtrapolate:
    def test_basel_two_levels(self):
        partials = []
        for n in (1000, 4000):
            m = np.arange(n, dtype=np.float64)
            partials.append((n, float(np.sum((m + 1.0) ** -2))))
        lim = tail_extrapolate(partials, 2.0)
        assert abs(lim - ZETA2) < 1e-6

    def test_constant_sequence(self):
        lim = tail_extrapolate([(100, 2.5), (400, 2.5), (1600, 2.5)], 3.0)
        assert lim == pytest.approx(2.5, abs=1e-12)

    def test_cubic_two_levels(self):
        partials = []
        for n in (100, 400):
            m = np.arange(n, dtype=np.float64)
            partials.append((n, float(np.sum((m + 1.0) ** -3))))
        lim = tail_extrapolate(partials, 3.0)
        assert abs(lim - ZETA3) < 1e-6

    def test_degenerate_levels_fall_back(self):
        lim = tail_extrapolate([(1000, 1.5), (1010, 1.7)], 2.0)
        assert lim == 1.7

    def test_needs_two_levels(self):
        with pytest.raises(ValueError):
            tail_extrapolate([(100, 1.0)], 2.0)


class TestDecayExponent:
    def test_plain(self):
        assert decay_exponent(single(b=3)) == pytest.approx(3.0)

    def test_growth_through_prefactor(self):
        # (alpha)_m/m! ~ m^(alpha-1) lifts the inner prefix, lowering decay
        spec = NestedSumSpec(
            (IndexWeight(b=1, prefactors=(Prefactor.POCH_FIRST,)), IndexWeight(b=1, prefactors=(Prefactor.POCH_LAST,))),
            (Link.STRICT,),
            1.5,
            1.5,
        )
        # inner prefix grows like m^0.5; outer own decay 1 + 1.5, net 2.0
        assert decay_exponent(spec) == pytest.approx(2.0)
