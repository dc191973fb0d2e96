"""Numerical kernel for nested multiple series.

A :class:`NestedSumSpec` describes one nested sum: a chain of integer
indices ``0 <= m_1 (< or <=) m_2 ... m_D < inf``, a per-index weight
``(m + alpha)^-a (m + beta)^-b`` with optional Pochhammer-ratio
prefactors, and the strict/weak relation linking consecutive indices.

Evaluation is a single streaming pass, innermost index first: level 1
accumulates prefix sums of its weighted terms, and each subsequent level
multiplies its own weight by the prefix of the previous level (shifted by
one for a strict link).  Work is O(N * depth) and fully vectorized; the
running outer partial sum is recorded at geometrically spaced marks.

The infinite tail is removed by fitting the recorded partial sums against
exact tail functions sum_{m>M} m^-s log^t m (computed in closed form via
Euler-Maclaurin).  The exponent/log-power basis is derived from a small
symbolic analysis of the spec: each level's term behaviour m^e log^t m is
propagated through the prefix sums, so slowly decaying tails with log
factors (weight-1 inner blocks) extrapolate correctly.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, loggamma


class KernelError(Exception):
    """Base class for kernel failures."""


class InvalidParamsError(KernelError):
    """Parameters outside the supported domain (Re(alpha), Re(beta) > 0)."""


class NonConvergentError(KernelError):
    """The outermost index decays with exponent <= 1."""


class Link(enum.Enum):
    STRICT = "<"
    WEAK = "<="


class Prefactor(enum.Enum):
    """Pochhammer-ratio prefactors attachable to a single index m."""

    POCH_FIRST = "poch_first"            # (alpha)_m / m!
    POCH_LAST = "poch_last"              # m! / (alpha)_{m+1}
    POCH_FIRST_ZSTAR = "poch_first_zstar"  # (beta)_m / m!
    POCH_LAST_ZSTAR = "poch_last_zstar"    # m! (m+alpha) / (beta)_{m+1}
    POCH_LAST_HSTAR = "poch_last_hstar"    # (m+1)! / (alpha)_{m+1}


@dataclass(frozen=True)
class IndexWeight:
    """Weight of one summation index: (m+alpha)^-a (m+beta)^-b * prefactors."""

    a: int = 0
    b: int = 0
    prefactors: tuple[Prefactor, ...] = ()


@dataclass(frozen=True)
class NestedSumSpec:
    """Declarative description of one nested series.

    ``links[i]`` relates index i and i+1 (STRICT: m_i < m_{i+1}).  The
    first index starts at 0, or at 1 when ``start_strict`` is set.
    """

    indices: tuple[IndexWeight, ...]
    links: tuple[Link, ...]
    alpha: complex
    beta: complex = 1.0
    start_strict: bool = False

    def __post_init__(self):
        if len(self.indices) == 0:
            raise ValueError("spec needs at least one index")
        if len(self.links) != len(self.indices) - 1:
            raise ValueError(
                f"need {len(self.indices) - 1} links, got {len(self.links)}"
            )
        # keep real parameters as floats so array dtypes stay real
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if isinstance(v, complex) and v.imag == 0:
                object.__setattr__(self, name, v.real)

    @property
    def depth(self) -> int:
        return len(self.indices)

    def to_debug_json(self) -> dict:
        return {
            "a": [iw.a for iw in self.indices],
            "b": [iw.b for iw in self.indices],
            "prefactors": [[p.value for p in iw.prefactors] for iw in self.indices],
            "links": [lk.value for lk in self.links],
            "alpha": [complex(self.alpha).real, complex(self.alpha).imag],
            "beta": [complex(self.beta).real, complex(self.beta).imag],
            "start_strict": self.start_strict,
        }


@dataclass(frozen=True)
class EvalConfig:
    """Truncation and precision policy for :func:`evaluate`."""

    n_initial: int = 4096
    growth: int = 4
    rel_tol: float = 1e-10
    max_n: int = 10**8
    extrapolation_terms: int = 3

    def __post_init__(self):
        if self.n_initial < 2:
            raise ValueError("n_initial must be >= 2")
        if self.growth < 2:
            raise ValueError("growth must be >= 2")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must be in (0, 1)")


class EvalResult(NamedTuple):
    value: complex
    err_estimate: float
    n_used: int
    converged: bool


# ---------------------------------------------------------------------------
# Pochhammer symbol
# ---------------------------------------------------------------------------

_POCH_CROSSOVER = 32


def pochhammer_log(alpha: complex, m: int) -> complex:
    """log of the rising factorial alpha(alpha+1)...(alpha+m-1), stably.

    Direct log-sum below a small crossover, log-gamma difference above;
    the two branches agree to ~1e-14 relative after exp.  Real positive
    input yields a real float.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    a = complex(alpha)
    if a.imag == 0 and a.real <= 0 and a.real == int(a.real):
        raise InvalidParamsError(f"pochhammer pole at alpha={alpha}")
    real_positive = a.imag == 0 and a.real > 0
    if m == 0:
        return 0.0 if real_positive else 0j
    if m < _POCH_CROSSOVER:
        if real_positive:
            return math.fsum(math.log(a.real + j) for j in range(m))
        return sum(cmath.log(a + j) for j in range(m))
    if real_positive:
        return float(gammaln(a.real + m) - gammaln(a.real))
    return complex(loggamma(a + m) - loggamma(a))


# ---------------------------------------------------------------------------
# Exact tails of m^-s log^t m via Euler-Maclaurin
# ---------------------------------------------------------------------------


def _log_poly_derivative(e: float, coeffs: list[float]) -> tuple[float, list[float]]:
    # d/dx [x^-e * sum_j coeffs[j] log^j x] = x^-(e+1) * (new poly)
    out = [0.0] * len(coeffs)
    for j, c in enumerate(coeffs):
        out[j] -= e * c
        if j >= 1:
            out[j - 1] += j * c
    return e + 1.0, out


def _eval_log_poly(e: float, coeffs: list[float], a: np.ndarray, la: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(a)
    for c in reversed(coeffs):
        acc = acc * la + c
    return acc * a ** (-np.longdouble(e))

# Euler-Maclaurin odd-derivative corrections: -B_{2k}/(2k)! * f^(2k-1)(a)
_EM_CORRECTIONS = (
    (-1.0 / 12.0, 1),
    (1.0 / 720.0, 3),
    (-1.0 / 30240.0, 5),
    (1.0 / 1209600.0, 7),
)


def tail_powers_log(s: float, t: int, ms: np.ndarray) -> np.ndarray:
    """sum_{k>m} k^-s log^t k for each m in ms, in extended precision.

    Euler-Maclaurin at a = m+1 with corrections through the 7th derivative
    (error ~ a^-(s+9), negligible for m >= 32); the integral term has the
    closed form a^(1-s) * sum_j t!/(t-j)! log^(t-j)(a) / (s-1)^(j+1).
    """
    if s <= 1:
        raise ValueError("tail requires s > 1")
    a = np.asarray(ms, dtype=np.longdouble) + 1
    la = np.log(a)
    integral = np.zeros_like(a)
    fall = 1.0  # t! / (t-j)!
    for j in range(t + 1):
        integral += fall * la ** (t - j) / np.longdouble(s - 1.0) ** (j + 1)
        fall *= t - j
    total = integral * a ** np.longdouble(1.0 - s)
    e, coeffs = s, [0.0] * t + [1.0]
    total += 0.5 * _eval_log_poly(e, coeffs, a, la)
    order = 0
    for factor, target in _EM_CORRECTIONS:
        while order < target:
            e, coeffs = _log_poly_derivative(e, coeffs)
            order += 1
        total += factor * _eval_log_poly(e, coeffs, a, la)
    return total


def tail_power_log(s: float, t: int, m: int) -> float:
    """Scalar convenience wrapper around :func:`tail_powers_log`."""
    return float(tail_powers_log(s, t, np.array([m]))[0])


# ---------------------------------------------------------------------------
# Asymptotic analysis: term behaviour m^e log^t m per level
# ---------------------------------------------------------------------------

_RESONANCE_TOL = 1e-6


def _prefactor_exponent(pf: Prefactor, alpha: complex, beta: complex) -> float:
    ra, rb = complex(alpha).real, complex(beta).real
    return {
        Prefactor.POCH_FIRST: ra - 1.0,
        Prefactor.POCH_LAST: -ra,
        Prefactor.POCH_FIRST_ZSTAR: rb - 1.0,
        Prefactor.POCH_LAST_ZSTAR: 1.0 - rb,
        Prefactor.POCH_LAST_HSTAR: 1.0 - ra,
    }[pf]


def _merge_behaviour(entries: list[tuple[float, int]], keep: int = 12) -> list[tuple[float, int]]:
    # group near-equal exponents, keep the highest log power per group
    entries = sorted(entries, key=lambda et: (-et[0], -et[1]))
    out: list[tuple[float, int]] = []
    for e, t in entries:
        for i, (e0, t0) in enumerate(out):
            if abs(e - e0) < 1e-9:
                if t > t0:
                    out[i] = (e0, t)
                break
        else:
            out.append((e, t))
    if out:
        lead = out[0][0]
        out = [(e, t) for e, t in out if e > lead - 3.2]
    return out[:keep]


def _prefix_behaviour(entries: list[tuple[float, int]]) -> list[tuple[float, int]]:
    # behaviour of P(m) = sum_{k<=m} of a term behaving like m^e log^t m
    out = [(0.0, 0)]
    for e, t in entries:
        if e > -1.0 + _RESONANCE_TOL:
            out.append((e + 1.0, t))
            out.append((e, t))
        elif e < -1.0 - _RESONANCE_TOL:
            out.append((e + 1.0, t))
        else:
            out.append((0.0, t + 1))
            out.append((-1.0, t))
    return _merge_behaviour(out)


def term_behaviour(spec: NestedSumSpec) -> list[tuple[float, int]]:
    """Asymptotic behaviour (exponent, log power) of the outermost terms.

    The leading exponent e* determines the decay s = -e* of the outer
    series; convergence requires s > 1.
    """
    prefix: list[tuple[float, int]] | None = None
    current: list[tuple[float, int]] = []
    for iw in spec.indices:
        own = -float(iw.a + iw.b)
        for pf in iw.prefactors:
            own += _prefactor_exponent(pf, spec.alpha, spec.beta)
        if prefix is None:
            current = [(own, 0), (own - 1.0, 0), (own - 2.0, 0)]
        else:
            current = [(own + e, t) for e, t in prefix]
        current = _merge_behaviour(current)
        prefix = _prefix_behaviour(current)
    return current


def decay_exponent(spec: NestedSumSpec) -> float:
    """Effective algebraic decay s of the outermost terms (tail ~ N^(1-s))."""
    return -term_behaviour(spec)[0][0]


def _tail_basis(spec: NestedSumSpec, extra_orders: int) -> list[tuple[float, int]]:
    """Candidate (s, t) pairs for the tail fit, most important first."""
    behaviour = term_behaviour(spec)
    lead_e, lead_t = behaviour[0]
    cand: dict[tuple[float, int], None] = {}

    def add(s: float, t: int):
        key = (round(s, 9), t)
        if s > 1.0 + 1e-9:
            cand.setdefault(key, None)

    for e, t in behaviour:
        for tt in range(t, -1, -1):
            add(-e, tt)
    for j in range(1, max(extra_orders, 1)):
        for tt in range(lead_t, -1, -1):
            add(-lead_e + j, tt)
    ordered = sorted(cand, key=lambda st: (st[0], -st[1]))
    return ordered


# ---------------------------------------------------------------------------
# Weight arrays
# ---------------------------------------------------------------------------


def _int_power(base: np.ndarray, k: int) -> np.ndarray:
    # base^-k for small positive integer k, via reciprocal and multiplies
    inv = 1.0 / base
    out = inv.copy()
    for _ in range(k - 1):
        out *= inv
    return out


# Stirling correction B_2n / (2n (2n-1) z^(2n-1)) coefficients, n = 1..4
_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0)
_LGDIFF_CROSSOVER = 64.0


def _stirling_tail(z: np.ndarray) -> np.ndarray:
    inv2 = 1.0 / (z * z)
    acc = np.zeros_like(z)
    for c in reversed(_STIRLING):
        acc = (acc + c) * inv2
    return acc * z  # sum c_n z^(1-2n)


def lgamma_diff(z: np.ndarray, d: complex) -> np.ndarray:
    """loggamma(z + d) - loggamma(z) for z >= 1, without cancellation.

    A naive difference of two log-gammas loses ~ |loggamma(z)| * eps
    absolutely, which at z ~ 1e7 corrupts the 1e-8 digits of the
    exponent of every Pochhammer ratio.  For z above a crossover the
    difference of the Stirling expansions is formed term by term, every
    piece O(d log z); below it the direct difference is already accurate.
    """
    z = np.asarray(z, dtype=np.float64)
    if complex(d).imag == 0:
        d = float(complex(d).real)
        small = z < _LGDIFF_CROSSOVER
        out = np.empty_like(z)
        if small.any():
            zs = z[small]
            out[small] = gammaln(zs + d) - gammaln(zs)
        big = ~small
        if big.any():
            zb = z[big]
            zd = zb + d
            out[big] = (
                (zb - 0.5) * np.log1p(d / zb)
                + d * np.log(zd)
                - d
                + _stirling_tail(zd)
                - _stirling_tail(zb)
            )
        return out
    dc = complex(d)
    small = z < _LGDIFF_CROSSOVER
    out = np.empty(z.shape, dtype=np.complex128)
    if small.any():
        zs = z[small]
        out[small] = loggamma(zs + dc) - loggamma(zs)
    big = ~small
    if big.any():
        zb = z[big]
        zd = zb + dc
        out[big] = (
            (zb - 0.5) * np.log(zd / zb)
            + dc * np.log(zd)
            - dc
            + _stirling_tail(zd)
            - _stirling_tail(zb)
        )
    return out


def _lgamma_value(shift: complex) -> complex:
    if complex(shift).imag == 0:
        return float(gammaln(complex(shift).real))
    return complex(loggamma(complex(shift)))


def _prefactor_array(pf: Prefactor, x: np.ndarray, alpha: complex, beta: complex) -> np.ndarray:
    z = x + 1.0  # z = m + 1 >= 1
    if pf is Prefactor.POCH_FIRST:
        # (alpha)_m / m! = Gamma(m+alpha) / (Gamma(alpha) Gamma(m+1))
        return np.exp(lgamma_diff(z, alpha - 1.0) - _lgamma_value(alpha))
    if pf is Prefactor.POCH_LAST:
        # m! / (alpha)_{m+1} = Gamma(alpha) Gamma(m+1) / Gamma(m+1+alpha)
        return np.exp(_lgamma_value(alpha) - lgamma_diff(z, alpha))
    if pf is Prefactor.POCH_FIRST_ZSTAR:
        return np.exp(lgamma_diff(z, beta - 1.0) - _lgamma_value(beta))
    if pf is Prefactor.POCH_LAST_ZSTAR:
        # m! (m+alpha) / (beta)_{m+1}
        return np.exp(_lgamma_value(beta) - lgamma_diff(z, beta)) * (x + alpha)
    if pf is Prefactor.POCH_LAST_HSTAR:
        # (m+1)! / (alpha)_{m+1} = Gamma(alpha) Gamma(m+2) / Gamma(m+1+alpha)
        return np.exp(_lgamma_value(alpha) - lgamma_diff(z + 1.0, alpha - 1.0))
    raise ValueError(pf)


def _weights_block(spec: NestedSumSpec, i: int, x: np.ndarray) -> np.ndarray:
    iw = spec.indices[i]
    is_complex = complex(spec.alpha).imag != 0 or complex(spec.beta).imag != 0
    w = np.ones(len(x), dtype=np.complex128 if is_complex else np.float64)
    if iw.a:
        w *= _int_power(x + spec.alpha, iw.a)
    if iw.b:
        w *= _int_power(x + spec.beta, iw.b)
    for pf in iw.prefactors:
        w = w * _prefactor_array(pf, x, spec.alpha, spec.beta)
    return w


# ---------------------------------------------------------------------------
# Streaming evaluation
# ---------------------------------------------------------------------------

_BLOCK = 1 << 16

if np.finfo(np.longdouble).eps < 1e-18:
    _ACC_REAL, _ACC_COMPLEX = np.longdouble, np.clongdouble
else:  # pragma: no cover - platform without 80-bit long double
    _ACC_REAL, _ACC_COMPLEX = np.float64, np.complex128


def _make_marks(limit: int) -> list[int]:
    marks = []
    j = 15
    while True:
        m = round(2.0 ** (j / 3.0))
        if m > limit:
            break
        if not marks or m > marks[-1]:
            marks.append(m)
        j += 1
    return marks


class _Stream:
    """Carries per-level prefix state across blocks of the index range."""

    def __init__(self, spec: NestedSumSpec):
        self.spec = spec
        is_complex = complex(spec.alpha).imag != 0 or complex(spec.beta).imag != 0
        self.acc_dtype = _ACC_COMPLEX if is_complex else _ACC_REAL
        self.carries = np.zeros(spec.depth, dtype=self.acc_dtype)
        self.next_m = 0

    def run_block(self, hi: int) -> np.ndarray:
        """Advance through indices [next_m, hi); returns the outer prefix array."""
        lo = self.next_m
        m = np.arange(lo, hi, dtype=np.float64)
        spec = self.spec
        prev_strict = None
        prev_weak = None
        for i in range(spec.depth):
            w = _weights_block(spec, i, m)
            if i == 0:
                if spec.start_strict and lo == 0:
                    w = w.copy()
                    w[0] = 0.0
                terms = w.astype(self.acc_dtype)
            else:
                q = prev_strict if spec.links[i - 1] is Link.STRICT else prev_weak
                terms = w * q
            prefix = np.cumsum(terms)
            prefix += self.carries[i]
            if i < spec.depth - 1:
                shifted = np.empty_like(prefix)
                shifted[0] = self.carries[i]
                shifted[1:] = prefix[:-1]
                prev_strict, prev_weak = shifted, prefix
            self.carries[i] = prefix[-1]
        self.next_m = hi
        return prefix


def truncated_sum(spec: NestedSumSpec, n: int) -> complex:
    """Exact partial sum with every index <= n (for oracle comparisons)."""
    stream = _Stream(spec)
    out = None
    lo = 0
    while lo <= n:
        hi = min(lo + _BLOCK, n + 1)
        out = stream.run_block(hi)[-1]
        lo = hi
    return complex(out) if stream.acc_dtype is _ACC_COMPLEX else float(out)


def _validate_params(spec: NestedSumSpec):
    a, b = complex(spec.alpha), complex(spec.beta)
    if not (a.real > 0 and b.real > 0):
        raise InvalidParamsError(
            f"need Re(alpha) > 0 and Re(beta) > 0, got alpha={spec.alpha}, beta={spec.beta}"
        )


@dataclass
class _FitResult:
    value: complex
    err: float


def _mgs_qr(a: np.ndarray, drop_tol: float = 1e-14):
    """Modified Gram-Schmidt QR in extended precision, with column dropping.

    Processes columns left to right, so the factors of every column
    prefix a[:, :k] are available from one pass.  Returns (q, r, kept).
    """
    n, k = a.shape
    q = np.zeros((n, k), dtype=np.longdouble)
    r = np.zeros((k, k), dtype=np.longdouble)
    kept: list[int] = []
    for j in range(k):
        v = a[:, j].astype(np.longdouble)
        norm0 = np.sqrt(v @ v)
        for _ in range(2):
            for i in kept:
                proj = q[:, i] @ v
                r[i, j] += proj
                v = v - proj * q[:, i]
        norm = np.sqrt(v @ v)
        if norm0 == 0 or norm < drop_tol * norm0:
            continue
        r[j, j] = norm
        q[:, j] = v / norm
        kept.append(j)
    return q, r, kept


def _lstsq_extended(a: np.ndarray, y: np.ndarray, drop_tol: float = 1e-14):
    """Least squares min ||a c - y|| via :func:`_mgs_qr`; dropped columns
    get coefficient zero.  y may have a trailing right-hand-side axis."""
    q, r, kept = _mgs_qr(a, drop_tol)
    coeffs = _qr_solve(a.shape[1], q, r, kept, y)
    return coeffs, y - a @ coeffs


def _qr_solve(k: int, q, r, kept: list[int], y: np.ndarray) -> np.ndarray:
    cols = [j for j in kept if j < k]
    coeffs = np.zeros((k,) + y.shape[1:], dtype=np.longdouble)
    for j in reversed(cols):
        acc = q[:, j] @ y
        for j2 in cols:
            if j2 > j:
                acc = acc - r[j, j2] * coeffs[j2]
        coeffs[j] = acc / r[j, j]
    return coeffs


def _rt_solve(k: int, r, kept: list[int], g: np.ndarray) -> np.ndarray:
    # solve R^T w = g over the kept columns below k (forward substitution)
    cols = [j for j in kept if j < k]
    w = np.zeros(k, dtype=np.longdouble)
    for idx, j in enumerate(cols):
        acc = g[j]
        for j2 in cols[:idx]:
            acc = acc - r[j2, j] * w[j2]
        w[j] = acc / r[j, j]
    return w


def _tail_fit(
    marks: np.ndarray,
    sums: np.ndarray,
    basis: list[tuple[float, int]],
    scale: float,
) -> _FitResult | None:
    """Fit recorded partial sums against exact tail functions.

    The model S(M) = S_inf - sum_k c_k phi_k(M) is solved for several
    basis-size prefixes; the size minimizing (in-sample misfit projected
    to the last mark) + (noise amplification of the extrapolation) wins.
    Rows are weighted by the inverse leading tail so the residuals are
    relative misfits, and the solve runs in extended precision.
    """
    n = len(marks)
    if n < 6:
        return None
    k_max = min(len(basis), n - 4, 14)
    if k_max == 0:
        return None
    basis = basis[:k_max]
    phi = np.empty((n, k_max), dtype=np.longdouble)
    for col, (s, t) in enumerate(basis):
        phi[:, col] = tail_powers_log(s, t, marks)

    is_complex = np.iscomplexobj(sums)
    sums_ld = np.asarray(sums)
    diff = sums_ld[-1] - sums_ld  # tail(M) - tail(last), exact in extended prec
    if is_complex:
        y = np.stack(
            [diff.real.astype(np.longdouble), diff.imag.astype(np.longdouble)], axis=1
        )
    else:
        y = diff.astype(np.longdouble)[:, None]

    wrow = 1.0 / np.maximum(np.abs(phi[:, 0]), np.longdouble(1e-300))
    a_mat = (phi - phi[-1]) * wrow[:, None]
    yw = y * wrow[:, None]
    col_scale = np.max(np.abs(a_mat), axis=0)
    col_scale[col_scale == 0] = 1.0
    a_scaled = a_mat / col_scale
    g = (phi[-1] / col_scale).astype(np.longdouble)  # extrapolation functional

    q, r, kept = _mgs_qr(a_scaled)
    base_value = complex(sums_ld[-1])
    phi0_last = float(phi[-1, 0])
    half = n // 2

    best: tuple[float, complex, float] | None = None  # (score, value, err)
    k_lo = max(2, min(3, k_max))
    for k in range(k_lo, k_max + 1):
        coeffs_s = _qr_solve(k, q, r, kept, yw)
        resid = yw - a_scaled[:, :k] @ coeffs_s
        tail_last = phi[-1, :k] @ (coeffs_s / col_scale[:k, None])
        value = base_value + complex(
            float(tail_last[0]), float(tail_last[1]) if is_complex else 0.0
        )
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            continue
        resid_abs = np.abs(resid).max(axis=1) if resid.ndim > 1 else np.abs(resid)
        err_model = float(np.max(resid_abs[half:])) * phi0_last
        # sensitivity of the extrapolated value to per-row noise
        w_sens = _rt_solve(k, r, kept, g)
        amp = np.zeros(n, dtype=np.longdouble)
        for j in [j for j in kept if j < k]:
            amp += w_sens[j] * q[:, j]
        noise_abs = float(np.sqrt(np.mean((resid_abs / wrow) ** 2)))
        err_noise = float(np.sqrt(np.sum((amp * wrow) ** 2))) * noise_abs
        err = 3.0 * err_model + 2.0 * err_noise
        if best is None or err < best[0]:
            best = (err, value, err)
    if best is None:
        return None
    _, value, err = best
    floor = 5e-15 * max(abs(value), scale)
    return _FitResult(value, max(err, floor))


def evaluate(spec: NestedSumSpec, cfg: EvalConfig = EvalConfig()) -> EvalResult:
    """Evaluate the nested series to the configured relative tolerance.

    Streams the dynamic program forward, recording outer partial sums at
    geometric marks, and repeatedly extrapolates the tail until the error
    estimate (fit residual + basis-sensitivity) meets rel_tol or max_n is
    hit; in the latter case the best value is returned flagged.
    """
    _validate_params(spec)
    behaviour = term_behaviour(spec)
    s_eff = -behaviour[0][0]
    if s_eff <= 1.0 + 1e-9:
        raise NonConvergentError(
            f"outermost decay exponent {s_eff:.6g} <= 1; series diverges"
        )
    basis = _tail_basis(spec, cfg.extrapolation_terms)

    marks = _make_marks(cfg.max_n)
    stream = _Stream(spec)
    recorded_m: list[int] = []
    recorded_s: list = []

    best: _FitResult | None = None
    prev_fit_value: complex | None = None
    next_check = cfg.n_initial
    mark_iter = iter(marks)
    pending_mark = next(mark_iter, None)

    while stream.next_m <= cfg.max_n:
        lo = stream.next_m
        hi = min(lo + _BLOCK, cfg.max_n + 1, next_check + 1)
        prefix = stream.run_block(hi)
        while pending_mark is not None and pending_mark < hi:
            if pending_mark >= lo:
                recorded_m.append(pending_mark)
                recorded_s.append(prefix[pending_mark - lo])
            pending_mark = next(mark_iter, None)

        n_done = hi - 1
        if n_done >= next_check and len(recorded_m) >= 6:
            lo_cut = max(32, n_done // 1024)
            sel = [i for i, m in enumerate(recorded_m) if m >= lo_cut][-30:]
            fit = _tail_fit(
                np.array([recorded_m[i] for i in sel], dtype=np.int64),
                np.array([recorded_s[i] for i in sel]),
                basis,
                scale=float(abs(complex(recorded_s[-1]))),
            )
            if fit is not None:
                err = fit.err
                have_prev = prev_fit_value is not None
                if have_prev:
                    err = max(err, 0.5 * abs(fit.value - prev_fit_value))
                prev_fit_value = fit.value
                fit = _FitResult(fit.value, err)
                if best is None or fit.err <= best.err:
                    best = fit
                tol_abs = cfg.rel_tol * max(abs(fit.value), 1e-300)
                # a single fit can be biased yet self-consistent; insist on
                # agreement across two escalation checkpoints
                if have_prev and fit.err <= tol_abs:
                    return EvalResult(_as_scalar(fit.value, stream), fit.err, n_done, True)
            next_check = max(next_check * cfg.growth, n_done + 1)
        if hi > cfg.max_n:
            break

    if best is None:
        # not enough marks for a fit: fall back to the raw partial sum
        last = complex(recorded_s[-1]) if recorded_s else 0j
        err = abs(last - complex(recorded_s[-2])) if len(recorded_s) > 1 else abs(last)
        return EvalResult(_as_scalar(last, stream), max(err, 1e-15 * abs(last)), stream.next_m - 1, False)
    return EvalResult(_as_scalar(best.value, stream), best.err, stream.next_m - 1, False)


def _as_scalar(value: complex, stream: _Stream):
    return complex(value) if stream.acc_dtype is _ACC_COMPLEX else float(value.real)


# ---------------------------------------------------------------------------
# Simple Richardson-style extrapolation on escalating truncations
# ---------------------------------------------------------------------------


def tail_extrapolate(
    partial: Sequence[tuple[int, complex]], decay_exponent: float
) -> complex:
    """Extrapolate the limit of partial sums with tail ~ C * N^(1-s).

    Fits the leading algebraic tail term (and up to two subleading integer
    orders when enough truncation levels are supplied) by least squares.
    Degenerate fits (levels too close together) fall back to the last
    partial value.
    """
    if len(partial) < 2:
        raise ValueError("need at least two truncation levels")
    if decay_exponent <= 1:
        raise ValueError("decay_exponent must be > 1")
    ns = np.array([float(n) for n, _ in partial])
    vals = np.array([complex(v) for _, v in partial])
    if np.min(ns[1:] / ns[:-1]) < 1.05:
        return complex(vals[-1])
    n_terms = min(len(partial) - 1, 3)
    cols = np.column_stack(
        [ns ** (1.0 - decay_exponent - j) for j in range(n_terms)]
    )
    a_mat = np.column_stack([np.ones(len(ns)), cols])
    col_scale = np.max(np.abs(a_mat), axis=0)
    sol, _, rank, _ = np.linalg.lstsq(
        (a_mat / col_scale).astype(np.complex128), vals, rcond=1e-10
    )
    if rank < 1 or not np.isfinite(sol[0]):
        return complex(vals[-1])
    return complex(sol[0] / col_scale[0])
