"""Barut-Girardello coherent states ``K-|z> = z|z>`` of the realization.

Coefficients in the Fock basis satisfy
``c_n n (1 - lambda' (n + 1)) = z c_{n-1}``, i.e.

    c_n / c_0 = (-1)^n Gamma(b) / (n! Gamma(b + n)) (z / lambda')^n,
    b = 2 - 1/lambda',

normalized by ``N(|z|^2) = 0F3(1, b, b; |z|^2 / lambda'^2)``. lambda' = 0 is
handled as its own analytic branch (``c_n = z^n / n!``, ``N = I0(2|z|)``).

Resolution of unity is checked through its moment equation: the weight
``w~(xi) = G^{4,0}_{0,4}(xi/lambda'^2 | 0, 0, b-1, b-1) / (lambda' Gamma(b))^2``
must have moments ``n!^2 Gamma(b+n)^2 lambda'^(2n) / Gamma(b)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import specfun
from .algebra import FockRealization
from .errors import (
    DimensionMismatch,
    NoConvergence,
    ParamSingular,
    QuadratureNotConverged,
    TruncationTooSmall,
)
from .specfun import PrecisionConfig

SINGULAR_TOL = 1e-10
DEFAULT_TRUNCATION = 200
MAX_TRUNCATION = 2000
TARGET_TAIL = 1e-12
MAX_TAIL = 1e-10
# above this |b| the difference lgamma(b+n) - lgamma(b) loses digits
_LGAMMA_SPAN = 64.0


def series_parameter(lambda_prime: float) -> float:
    """``b = 2 - 1/lambda'``."""
    return 2.0 - 1.0 / lambda_prime


def check_lambda_prime(lambda_prime: float, truncation: float = math.inf) -> None:
    """Reject lambda' = 1/k (2 <= k <= truncation), where a coefficient blows up."""
    if not math.isfinite(lambda_prime):
        raise ParamSingular("lambda' must be finite")
    if lambda_prime <= 0 or lambda_prime * (truncation + 1.0) < 1.0:
        return
    k = round(1.0 / lambda_prime)
    if 2 <= k <= truncation and abs(lambda_prime - 1.0 / k) < SINGULAR_TOL:
        raise ParamSingular(f"lambda' = {lambda_prime} hits the pole 1/{k}")


def _log_pochhammer_array(b: float, N: int):
    """``ln|(b)_n|`` and sign for n = 0..N-1 via lgamma differences."""
    lg0, s0 = specfun.gamma(b, "log")
    pairs = [specfun.gamma(b + k, "log") for k in range(N)]
    lg = np.array([p[0] for p in pairs]) - lg0
    sg = np.array([p[1] for p in pairs]) * s0
    return lg, sg


def _log_denominator_product(lambda_prime: float, N: int):
    """``ln|prod_{k=1..n} (1 - lambda'(k+1))|`` and sign for n = 0..N-1.

    Equals ``(b)_n (-lambda')^n`` but never forms ``1/lambda'``.
    """
    f = 1.0 - lambda_prime * (np.arange(N - 1) + 2.0)
    with np.errstate(divide="ignore"):
        lg = np.concatenate(([0.0], np.cumsum(np.log(np.abs(f)))))
    sg = np.concatenate(([1.0], np.cumprod(np.where(f < 0, -1.0, 1.0))))
    return lg, sg


def log_coefficients(z: complex, lambda_prime: float, N: int):
    """Gamma-form ``c_n / c_0`` for n < N as ``(ln|.|, complex unit phase)``."""
    z = complex(z)
    n = np.arange(N)
    logmag = np.full(N, -np.inf)
    logmag[0] = 0.0
    phase = np.ones(N, dtype=complex)
    if z == 0:
        return logmag, phase
    theta = math.atan2(z.imag, z.real)
    phase = np.exp(1j * theta * n)
    if lambda_prime == 0.0:
        logmag = n * math.log(abs(z)) - gammaln(n + 1.0)
        return logmag, phase
    if abs(lambda_prime) * _LGAMMA_SPAN < 1.0 or specfun._near_nonpositive_integer(
            series_parameter(lambda_prime)):
        lprod, sprod = _log_denominator_product(lambda_prime, N)
        return n * math.log(abs(z)) - gammaln(n + 1.0) - lprod, phase * sprod
    b = series_parameter(lambda_prime)
    lpoch, spoch = _log_pochhammer_array(b, N)
    logmag = n * math.log(abs(z) / abs(lambda_prime)) - gammaln(n + 1.0) - lpoch
    sign = spoch * np.where(n % 2 == 1, -1.0, 1.0)
    if lambda_prime < 0:
        sign = sign * np.where(n % 2 == 1, -1.0, 1.0)
    return logmag, phase * sign


def coefficients_recursion(z: complex, lambda_prime: float, N: int) -> np.ndarray:
    """Unnormalized ``c_n / c_0`` from ``c_n = z c_{n-1} / (n (1 - lambda'(n+1)))``."""
    c = np.zeros(N, dtype=complex)
    c[0] = 1.0
    z = complex(z)
    for n in range(1, N):
        c[n] = z * c[n - 1] / (n * (1.0 - lambda_prime * (n + 1)))
    return c


def truncated_norm_sum(z: complex, lambda_prime: float, N: int) -> float:
    """``sum_{n<N} |c_n / c_0|^2`` by direct summation."""
    logmag, _ = log_coefficients(z, lambda_prime, N)
    return math.fsum(np.exp(2.0 * logmag))


def normalization(z_abs2: float, lambda_prime: float, cfg: PrecisionConfig | None = None,
                  *, with_error: bool = False):
    """``N(|z|^2)``: 0F3(1, b, b; |z|^2/lambda'^2), or I0(2|z|) at lambda' = 0."""
    if lambda_prime == 0.0:
        return specfun.bessel_i(0, 2.0 * math.sqrt(z_abs2), cfg, with_error=with_error)
    b = series_parameter(lambda_prime)
    return specfun.hyper0f3(1.0, b, b, z_abs2 / lambda_prime ** 2, cfg, with_error=with_error)


@dataclass(frozen=True)
class CoherentState:
    """Truncated BG coherent state.

    ``norm_source`` is ``"closed"`` when ``norm_factor`` is the 0F3 (or I0)
    value and ``"truncated"`` when, for 0 < lambda' < 1/truncation, the closed
    form is unusable (the formal series passes a pole beyond the truncation,
    or ``|z|^2/lambda'^2`` overflows) and only the truncated sum is meaningful. ``tail_certified`` is False in that same regime, where the
    term ratios are not monotone beyond the truncation.
    """

    z: complex
    lambda_prime: float
    coeffs: np.ndarray
    norm_factor: float
    truncation: int
    tail_bound: float
    norm_source: str = "closed"
    tail_certified: bool = True

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2


def _tail_ratio(z_abs2: float, lambda_prime: float, N: int) -> float:
    """``|c_{N+1}/c_N|^2``."""
    d = (N + 1.0) * (1.0 - lambda_prime * (N + 2.0))
    return math.inf if d == 0 else z_abs2 / (d * d)


def make_state(z: complex, lambda_prime: float, N: int | None = None,
               cfg: PrecisionConfig | None = None) -> CoherentState:
    """Construct ``|z>`` on ``N`` Fock states.

    With ``N=None`` the truncation starts at 200 and doubles (up to 2000)
    until the tail bound drops below 1e-12.

    Raises
    ------
    ParamSingular
        lambda' within 1e-10 of 1/k for some 2 <= k <= N.
    TruncationTooSmall
        Final tail bound above 1e-10.
    """
    z = complex(z)
    z2 = abs(z) ** 2
    auto = N is None
    N = DEFAULT_TRUNCATION if auto else int(N)
    if N < 1:
        raise ValueError("truncation must be positive")
    while True:
        check_lambda_prime(lambda_prime, N)
        logmag, phase = log_coefficients(z, lambda_prime, N + 1)
        source = "closed"
        try:
            norm = normalization(z2, lambda_prime, cfg)
        except (ParamSingular, NoConvergence, ArithmeticError):
            if not (0 < lambda_prime < 1.0 / N):
                raise
            norm = truncated_norm_sum(z, lambda_prime, N)
            source = "truncated"
        ratio = _tail_ratio(z2, lambda_prime, N)
        if z == 0:
            tail = 0.0
        elif ratio >= 1.0:
            tail = math.inf
        else:
            tail = math.exp(2.0 * logmag[N] - math.log(norm)) / (1.0 - ratio)
        if not auto or tail <= TARGET_TAIL or N >= MAX_TRUNCATION:
            break
        N = min(2 * N, MAX_TRUNCATION)
    if tail > MAX_TAIL:
        raise TruncationTooSmall(f"tail bound {tail:.3g} with N = {N}")
    coeffs = np.exp(logmag[:N] - 0.5 * math.log(norm)) * phase[:N]
    certified = lambda_prime <= 0 or lambda_prime * (N + 2.0) >= 1.0
    return CoherentState(z, float(lambda_prime), coeffs, float(norm), N, float(tail),
                         source, certified)


def eigen_residual(state: CoherentState, real: FockRealization) -> float:
    """``||K-|z> - z|z>|| / |||z>||`` in the truncated basis."""
    if real.lambda_prime != state.lambda_prime:
        raise DimensionMismatch("realization and state use different lambda'")
    if real.dim < state.truncation:
        raise DimensionMismatch(
            f"realization dim {real.dim} < state truncation {state.truncation}")
    v = np.zeros(real.dim, dtype=complex)
    v[: state.truncation] = state.coeffs
    r = real.K_minus.apply(v) - state.z * v
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def overlap(z: complex, zp: complex, lambda_prime: float,
            cfg: PrecisionConfig | None = None) -> complex:
    """Closed-form ``<z|z'>`` with the 0F3 (0F1 at lambda' = 0) of ``z' z*``."""
    check_lambda_prime(lambda_prime, DEFAULT_TRUNCATION)
    z, zp = complex(z), complex(zp)
    w = zp * z.conjugate()
    if lambda_prime == 0.0:
        num = specfun.hyper0f1(1.0, w, cfg)
    else:
        b = series_parameter(lambda_prime)
        num = specfun.hyper0f3(1.0, b, b, w / lambda_prime ** 2, cfg)
    den = math.sqrt(normalization(abs(z) ** 2, lambda_prime, cfg)
                    * normalization(abs(zp) ** 2, lambda_prime, cfg))
    return complex(num) / den


def overlap_direct(z: complex, zp: complex, lambda_prime: float,
                   cfg: PrecisionConfig | None = None) -> complex:
    """``sum_n conj(c_n(z)) c_n(z')`` from truncated states."""
    a = make_state(z, lambda_prime, cfg=cfg)
    b = make_state(zp, lambda_prime, cfg=cfg)
    n = min(a.truncation, b.truncation)
    return complex(np.vdot(a.coeffs[:n], b.coeffs[:n]))


class ContinuityGap(NamedTuple):
    gap: float
    lipschitz: float


def continuity_gap(z: complex, zp: complex, lambda_prime: float,
                   cfg: PrecisionConfig | None = None) -> ContinuityGap:
    """``|| |z'> - |z> ||^2 = 2 (1 - Re <z'|z>)`` with a local Lipschitz estimate.

    ``lipschitz`` is ``2 ||Delta psi|| / |z' - z|``; since both states are
    unit vectors the gap never exceeds ``lipschitz * |z' - z|``.
    """
    gap = 2.0 * (1.0 - overlap(zp, z, lambda_prime, cfg).real)
    dz = abs(complex(zp) - complex(z))
    lip = 2.0 * math.sqrt(max(gap, 0.0)) / dz if dz > 0 else 0.0
    return ContinuityGap(gap, lip)


# --- resolution of unity ---------------------------------------------------------

def _weight_cfg():
    return PrecisionConfig(rel_tol=1e-10)


@dataclass(frozen=True)
class WeightDensity:
    """Parameter block of the resolution-of-unity weight (lambda' > 1/2)."""

    lambda_prime: float
    cfg: PrecisionConfig = field(default_factory=_weight_cfg)

    def __post_init__(self):
        if not self.lambda_prime > 0.5:
            raise ValueError(
                "the Meijer-G weight needs lambda' > 1/2 (contour must pass right "
                "of s = 1/lambda' - 1 for every moment)")
        check_lambda_prime(self.lambda_prime)

    @property
    def b(self) -> float:
        return series_parameter(self.lambda_prime)

    @property
    def meijer_b(self) -> tuple[float, float, float, float]:
        c = 1.0 - 1.0 / self.lambda_prime
        return (0.0, 0.0, c, c)

    @property
    def scale(self) -> float:
        return 1.0 / self.lambda_prime ** 2

    @property
    def prefactor(self) -> float:
        return 1.0 / (math.pi * (self.lambda_prime * specfun.gamma(self.b)) ** 2)


def weight_density(wd: WeightDensity, xi):
    """``(w(xi), w~(xi))`` with ``w~ = pi w / N``."""
    xi_arr = np.asarray(xi, dtype=float)
    g = specfun.meijer_g_4040(wd.meijer_b, wd.scale * xi_arr, wd.cfg)
    w_tilde = math.pi * wd.prefactor * np.asarray(g)
    norms = np.array([normalization(float(x), wd.lambda_prime, wd.cfg)
                      for x in np.atleast_1d(xi_arr)])
    w = w_tilde * norms.reshape(np.shape(w_tilde)) / math.pi
    if xi_arr.ndim == 0:
        return float(w), float(w_tilde)
    return w, w_tilde


class MomentCheck(NamedTuple):
    n: int
    lhs: float
    rhs: float
    rel_err: float
    quad_err: float


def moment_rhs(lambda_prime: float, n: int) -> float:
    """``Gamma(n+1)^2 Gamma(b+n)^2 lambda'^(2n) / Gamma(b)^2``."""
    b = series_parameter(lambda_prime)
    g = specfun.gamma
    return (g(n + 1.0) * g(b + n) / g(b)) ** 2 * lambda_prime ** (2 * n)


def _log_grid_limits(bvec, n_max: int):
    # y -> 0: G ~ y^min(b) log^2 y, integrand ~ y^(n+1+min b)
    lo = -60.0 / (1.0 + min(bvec))
    # y -> inf: G y^(n+1) ~ v^a exp(-4v), v = y^(1/4)
    a = 4.0 * (n_max + 1) + sum(bvec) - 1.5
    v_peak = max(a / 4.0, 1.0)
    f_peak = -4.0 * v_peak + a * math.log(v_peak)
    v = v_peak
    while -4.0 * v + a * math.log(v) > f_peak - 50.0:
        v *= 1.05
    return lo, 4.0 * math.log(v)


def moment_check(lambda_prime: float, n_max: int = 5,
                 cfg: PrecisionConfig | None = None) -> list[MomentCheck]:
    """Moments ``int_0^inf w~(xi) xi^n dxi`` for n = 0..n_max against their closed form.

    The integral is taken in ``u = ln(xi / lambda'^2)`` by the trapezoid
    rule, halving the step until every moment changes by less than
    ``cfg.rel_tol`` (default 1e-10).

    Raises
    ------
    QuadratureNotConverged
        Step refinement fails to stabilize within 8 halvings.
    """
    if not 0 <= n_max <= 6:
        raise ValueError("n_max must lie in 0..6")
    wd = WeightDensity(lambda_prime, cfg) if cfg is not None else WeightDensity(lambda_prime)
    tol = wd.cfg.rel_tol
    bvec = wd.meijer_b
    lo, hi = _log_grid_limits(bvec, n_max)
    orders = np.arange(n_max + 1)
    const = math.pi * wd.prefactor * wd.scale ** -(orders + 1.0)

    def evaluate(u):
        g, gerr = specfun.meijer_g_4040(bvec, np.exp(u), wd.cfg, with_error=True)
        powers = np.exp(np.outer(orders + 1.0, u))
        return powers * g, powers * gerr

    du = 0.25
    u = np.arange(lo, hi + du, du)
    vals, errs = evaluate(u)
    sums = vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1])
    esum = errs.sum(axis=1)
    prev = du * sums
    for _ in range(8):
        mid = u[:-1] + du / 2.0
        mv, me = evaluate(mid)
        sums = sums + mv.sum(axis=1)
        esum = esum + me.sum(axis=1)
        u = np.sort(np.concatenate((u, mid)))
        du /= 2.0
        cur = du * sums
        change = np.abs(cur - prev)
        prev = cur
        if np.all(change <= tol * np.abs(cur)):
            break
    else:
        raise QuadratureNotConverged(
            f"moment quadrature for lambda' = {lambda_prime} did not settle")
    out = []
    for n in orders:
        lhs = const[n] * cur[n]
        rhs = moment_rhs(lambda_prime, int(n))
        qerr = const[n] * (change[n] + du * esum[n])
        out.append(MomentCheck(int(n), float(lhs), float(rhs),
                               abs(lhs - rhs) / abs(rhs), float(qerr)))
    return out
