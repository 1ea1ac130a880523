"""Occupation statistics of BG coherent states.

Every moment is computed twice: by direct summation over the truncated
distribution and from hypergeometric closed forms. With ``x = |z|^2/lambda'^2``,
``b = 2 - 1/lambda'`` and ``F_a = 0F3(a, b+1, b+1; x)``,

    <n>   = |z|^2 / (2 lambda' - 1)^2 * F_2 / N
    <n^2> = |z|^2 / (2 lambda' - 1)^2 * F_1 / N

At lambda' = 0 these reduce to ``<n> = |z| I1(2|z|) / I0(2|z|)`` and
``<n^2> = |z|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import specfun
from .bgcs import (
    CoherentState,
    check_lambda_prime,
    coefficients_recursion,
    log_coefficients,
    make_state,
    normalization,
    series_parameter,
)
from .errors import ClosedFormPole, NoConvergence, ParamSingular, VacuumUndefined
from .specfun import PrecisionConfig


@dataclass(frozen=True)
class ClosedMoments:
    mean: float
    second_moment: float
    mandel_q: float | None
    g2: float | None


@dataclass(frozen=True)
class StatSummary:
    """Statistics of one state; headline values come from direct summation.

    ``closed`` holds the closed-form values, or None when they are unavailable
    (``closed_note`` says why). ``cross_check_err`` is the largest relative
    disagreement between the two methods, or NaN without a closed form.
    """

    lambda_prime: float
    z: complex
    p_n: np.ndarray = field(repr=False)
    mean: float
    second_moment: float
    variance: float
    mandel_q: float | None
    g2: float | None
    methods: dict
    cross_check_err: float
    closed: ClosedMoments | None = None
    closed_note: str = ""

    @property
    def fano(self) -> float:
        return self.variance / self.mean if self.mean > 0 else math.nan


def distribution(state: CoherentState) -> np.ndarray:
    """``P_n = |c_n|^2``."""
    return np.abs(state.coeffs) ** 2


def distribution_closed_form(z: complex, lambda_prime: float, n_max: int,
                             cfg: PrecisionConfig | None = None) -> np.ndarray:
    """``[Gamma(b) / (n! Gamma(b+n))]^2 (|z|/lambda')^(2n) / N`` for n = 0..n_max."""
    check_lambda_prime(lambda_prime, n_max + 1)
    r = abs(complex(z))
    n = np.arange(n_max + 1)
    out = np.zeros(n_max + 1)
    norm = normalization(r * r, lambda_prime, cfg)
    if r == 0:
        out[0] = 1.0
        return out
    if lambda_prime == 0.0:
        return np.exp(2.0 * (n * math.log(r) - gammaln(n + 1.0))) / norm
    b = series_parameter(lambda_prime)
    for k in range(n_max + 1):
        lp, _ = specfun.log_pochhammer(b, k)
        out[k] = math.exp(2.0 * (k * math.log(r / abs(lambda_prime)) - math.lgamma(k + 1.0) - lp))
    return out / norm


def distribution_recursion(z: complex, lambda_prime: float, N: int) -> np.ndarray:
    """``P_n`` from the term recursion, normalized by its own sum."""
    p = np.abs(coefficients_recursion(z, lambda_prime, N)) ** 2
    return p / math.fsum(p)


def poisson_reference(mean: float, n_max: int) -> np.ndarray:
    """Poisson ``exp(-mu) mu^n / n!`` for n = 0..n_max."""
    if not mean > 0:
        raise ValueError("Poisson mean must be positive")
    n = np.arange(n_max + 1)
    return np.exp(n * math.log(mean) - mean - gammaln(n + 1.0))


def small_z_g2_limit(lambda_prime: float) -> float:
    """``g2 -> (1 - 2 lambda')^2 / (2 (1 - 3 lambda')^2)`` as ``|z| -> 0``."""
    if abs(1.0 - 3.0 * lambda_prime) < 1e-10:
        raise ParamSingular("lambda' = 1/3 makes c_2 singular")
    return (1.0 - 2.0 * lambda_prime) ** 2 / (2.0 * (1.0 - 3.0 * lambda_prime) ** 2)


def closed_moments(z: complex, lambda_prime: float,
                   cfg: PrecisionConfig | None = None) -> ClosedMoments:
    """Hypergeometric closed forms of <n>, <n^2>, Q and g2.

    Raises
    ------
    ClosedFormPole
        lambda' = 1/2, where the prefactor ``|z|^2/(2 lambda' - 1)^2`` blows up.
    ParamSingular
        A 0F3 parameter is a nonpositive integer.
    """
    z2 = abs(complex(z)) ** 2
    if lambda_prime == 0.0:
        r = math.sqrt(z2)
        i0 = specfun.bessel_i(0, 2.0 * r, cfg)
        mean = r * specfun.bessel_i(1, 2.0 * r, cfg) / i0 if r > 0 else 0.0
        second = z2
        if r == 0:
            return ClosedMoments(0.0, 0.0, None, None)
        return ClosedMoments(mean, second, z2 / mean - mean - 1.0, (z2 - mean) / mean ** 2)
    if abs(2.0 * lambda_prime - 1.0) < 1e-10:
        raise ClosedFormPole("closed-form moments are singular at lambda' = 1/2")
    if z2 == 0:
        return ClosedMoments(0.0, 0.0, None, None)
    b = series_parameter(lambda_prime)
    x = z2 / lambda_prime ** 2
    pref = z2 / (2.0 * lambda_prime - 1.0) ** 2
    norm = normalization(z2, lambda_prime, cfg)
    f1 = specfun.hyper0f3(1.0, b + 1.0, b + 1.0, x, cfg)
    f2 = specfun.hyper0f3(2.0, b + 1.0, b + 1.0, x, cfg)
    mean = pref * f2 / norm
    second = pref * f1 / norm
    q = f1 / f2 - mean - 1.0
    g2 = norm / (pref * f2) * (f1 / f2 - 1.0)
    return ClosedMoments(mean, second, q, g2)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def summarize(z: complex, lambda_prime: float, cfg: PrecisionConfig | None = None,
              N: int | None = None) -> StatSummary:
    """Direct and closed-form statistics of ``|z>``."""
    state = make_state(z, lambda_prime, N, cfg)
    p = distribution(state)
    n = np.arange(state.truncation, dtype=float)
    # normalize by the truncated mass so both sums see the same distribution
    mass = math.fsum(p)
    mean = math.fsum(n * p) / mass
    fact2 = math.fsum(n * (n - 1.0) * p) / mass
    second = fact2 + mean
    variance = math.fsum((n - mean) ** 2 * p) / mass
    if mean > 0:
        q = fact2 / mean - mean
        g2 = fact2 / mean ** 2
    else:
        q = g2 = None

    closed, note = None, ""
    if state.norm_source != "closed":
        note = "no closed form (pole beyond the truncation or overflow at tiny lambda'); direct sums only"
    else:
        try:
            closed = closed_moments(z, lambda_prime, cfg)
        except (ParamSingular, NoConvergence) as exc:
            note = str(exc)
    methods = {"mean": "direct", "second_moment": "direct", "variance": "direct",
               "mandel_q": "direct", "g2": "direct"}
    if closed is None:
        err = math.nan
    else:
        pairs = [(mean, closed.mean), (second, closed.second_moment)]
        if q is not None and closed.mandel_q is not None:
            pairs += [(q, closed.mandel_q), (g2, closed.g2)]
        err = max(_rel(a, c) for a, c in pairs)
    return StatSummary(float(lambda_prime), complex(z), p, mean, second, variance, q, g2,
                       methods, err, closed, note)


def moments(z: complex, lambda_prime: float, cfg: PrecisionConfig | None = None):
    """``(mean, second_moment, variance)`` by direct summation, plus the full summary."""
    s = summarize(z, lambda_prime, cfg)
    return s.mean, s.second_moment, s.variance, s


def mandel_q(z: complex, lambda_prime: float, cfg: PrecisionConfig | None = None) -> float:
    """Mandel ``Q = ((dn)^2 - <n>) / <n>`` from direct sums.

    Raises
    ------
    VacuumUndefined
        At z = 0, where Q is 0/0.
    """
    if complex(z) == 0:
        raise VacuumUndefined("Q is undefined at the vacuum")
    return summarize(z, lambda_prime, cfg).mandel_q


def g2(z: complex, lambda_prime: float, cfg: PrecisionConfig | None = None) -> float:
    """Zero-delay ``g2 = (<n^2> - <n>) / <n>^2`` from direct sums.

    Raises
    ------
    VacuumUndefined
        At z = 0.
    """
    if complex(z) == 0:
        raise VacuumUndefined("g2 is undefined at the vacuum")
    return summarize(z, lambda_prime, cfg).g2
