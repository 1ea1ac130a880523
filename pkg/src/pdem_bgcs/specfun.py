"""Real-valued special functions with controlled accuracy.

Gamma / log-Gamma with reflection, Pochhammer symbols, the generalized
hypergeometric series 0F3 (and the 0F1 series behind I0/I1), and the Meijer
G-function G^{4,0}_{0,4} evaluated by Mellin-Barnes quadrature.

Series routines sum by forward term recurrence and stop only once the
remaining tail is certified geometric (ratio < 1/2, all parameters past
their sign changes). Pass ``with_error=True`` to get ``(value, bound)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as _sp

from .errors import (
    ContourError,
    NoConvergence,
    ParamSingular,
    PoleError,
    QuadratureNotConverged,
)

POLE_TOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PrecisionConfig:
    """Convergence controls shared by the series and quadrature routines.

    Parameters
    ----------
    rel_tol : float
        Target relative accuracy, in ``(0, 1e-3]``.
    max_terms : int
        Cap on series terms (at least 32).
    contour_abscissa : float, optional
        Minimum real part ``c`` of the Mellin-Barnes line. ``None`` picks
        ``max(-b) + 0.5`` per call. The line is moved further right towards
        the saddle point for large arguments; it never crosses a pole.
    contour_halfheight : float
        Minimum half-height ``T`` of the truncated contour.
    contour_step : float
        Trapezoid step ``h`` along the contour.
    b_params : sequence of float, optional
        When given together with ``contour_abscissa`` the abscissa is
        checked against these parameters at construction.
    """

    rel_tol: float = 1e-13
    max_terms: int = 20000
    contour_abscissa: float | None = None
    contour_halfheight: float = 20.0
    contour_step: float = 0.05
    b_params: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 32:
            raise ValueError(f"max_terms must be an integer >= 32, got {self.max_terms}")
        if not self.contour_halfheight > 0:
            raise ValueError("contour_halfheight must be positive")
        if not self.contour_step > 0:
            raise ValueError("contour_step must be positive")
        if self.b_params is not None:
            object.__setattr__(self, "b_params", tuple(float(b) for b in self.b_params))
            if self.contour_abscissa is not None:
                self.abscissa_for(self.b_params)

    def abscissa_for(self, b: Sequence[float]) -> float:
        """Smallest admissible contour abscissa for parameters ``b``."""
        rightmost_pole = max(-float(bi) for bi in b)
        if self.contour_abscissa is None:
            return rightmost_pole + 0.5
        if not self.contour_abscissa > rightmost_pole:
            raise ContourError(
                f"contour abscissa {self.contour_abscissa} is not right of the "
                f"pole at s = {rightmost_pole}"
            )
        return float(self.contour_abscissa)


DEFAULT = PrecisionConfig()


def _near_nonpositive_integer(x: float, tol: float = POLE_TOL) -> bool:
    return x <= tol and abs(x - round(x)) < tol


def _sinpi(x: float) -> float:
    # reduce to |r| <= 1/2 around the nearest integer so sin keeps full
    # relative accuracy next to the zeros (the poles of Gamma)
    r = x - 2.0 * round(x / 2.0)
    if r > 0.5:
        return math.sin(math.pi * (1.0 - r))
    if r < -0.5:
        return math.sin(math.pi * (-1.0 - r))
    return math.sin(math.pi * r)


# --- Gamma ---------------------------------------------------------------------

def gamma(x: float, mode: str = "value"):
    """Gamma function of a real argument.

    Parameters
    ----------
    x : float
        Argument; must not be a nonpositive integer (within 1e-12).
    mode : {"value", "log"}
        ``"value"`` returns Gamma(x). ``"log"`` returns ``(ln|Gamma(x)|, sign)``.

    Raises
    ------
    PoleError
        If ``x`` is within 1e-12 of 0, -1, -2, ...
    """
    x = float(x)
    if _near_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x = {x}")
    if mode == "value":
        if x >= 0.5:
            return math.gamma(x)
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (_sinpi(x) * math.gamma(1.0 - x))
    if mode in ("log", "log_abs_and_sign"):
        if x > 0:
            return math.lgamma(x), 1
        s = _sinpi(x)
        return (math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - x),
                1 if s > 0 else -1)
    raise ValueError(f"unknown mode {mode!r}")


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``x (x+1) ... (x+n-1)``; ``(x)_0 = 1``."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    return math.prod((x + k for k in range(int(n))), start=1.0)


def log_pochhammer(x: float, n: int) -> tuple[float, int]:
    """``(ln|(x)_n|, sign)`` by summing logs; sign is 0 if a factor vanishes."""
    total, sign = 0.0, 1
    for k in range(int(n)):
        f = x + k
        if f == 0.0:
            return -math.inf, 0
        total += math.log(abs(f))
        if f < 0:
            sign = -sign
    return total, sign


# --- hypergeometric series ------------------------------------------------------

def _hyper0fq(bs: Sequence[float], x, cfg: PrecisionConfig):
    """Sum 0Fq(; bs; x) by term recurrence. Returns (value, error_bound)."""
    for b in bs:
        if _near_nonpositive_integer(b):
            raise ParamSingular(f"series parameter b = {b} is a nonpositive integer")
    if x == 0:
        return (1.0 if not isinstance(x, complex) else 1.0 + 0.0j), 0.0

    ax = abs(x)
    # ratios are monotone only once every b_i + n is positive
    n_pass = max(0, math.ceil(max(-b for b in bs)))
    term = 1.0 if not isinstance(x, complex) else complex(1.0)
    total = term
    abs_sum = 1.0
    for n in range(int(cfg.max_terms)):
        denom = (n + 1.0) * math.prod(b + n for b in bs)
        ratio = ax / abs(denom)
        term = term * x / denom
        total += term
        abs_sum += abs(term)
        if n + 1 > n_pass and ratio < 0.5 and abs(term) <= cfg.rel_tol * abs(total):
            # next ratio is below the current one, so the tail is geometric
            nxt = ax / abs((n + 2.0) * math.prod(b + n + 1 for b in bs))
            tail = abs(term) * nxt / (1.0 - nxt)
            return total, tail + 4 * _EPS * (n + 2) * abs_sum
    raise NoConvergence(
        f"0F{len(bs)} did not reach rel_tol={cfg.rel_tol} in {cfg.max_terms} terms "
        f"(x={x}, b={tuple(bs)})"
    )


def hyper0f3(b1: float, b2: float, b3: float, x, cfg: PrecisionConfig | None = None,
             *, with_error: bool = False):
    """Generalized hypergeometric function 0F3(; b1, b2, b3; x).

    ``x`` may be real or complex. The sum is
    ``sum_n x**n / (n! (b1)_n (b2)_n (b3)_n)``.

    Raises
    ------
    ParamSingular
        Any ``b_i`` within 1e-12 of a nonpositive integer.
    NoConvergence
        ``cfg.max_terms`` reached before the tail bound met ``cfg.rel_tol``.
    """
    value, err = _hyper0fq((float(b1), float(b2), float(b3)), x, cfg or DEFAULT)
    return (value, err) if with_error else value


def hyper0f1(b: float, x, cfg: PrecisionConfig | None = None, *, with_error=False):
    """0F1(; b; x) by the same certified recurrence."""
    value, err = _hyper0fq((float(b),), x, cfg or DEFAULT)
    return (value, err) if with_error else value


def bessel_i(order: int, x: float, cfg: PrecisionConfig | None = None,
             *, with_error: bool = False) -> float:
    """Modified Bessel function I0 or I1 from its ascending series."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are provided")
    x = float(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    series, err = _hyper0fq((order + 1.0,), x * x / 4.0, cfg or DEFAULT)
    scale = 1.0 if order == 0 else x / 2.0
    return (scale * series, scale * err) if with_error else scale * series


# --- Meijer G via Mellin-Barnes -------------------------------------------------

def _saddle_abscissa(b: np.ndarray, logy: np.ndarray, c_min: float) -> np.ndarray:
    """Real s minimizing |prod Gamma(b_i+s) y^-s|, clamped to c_min."""
    c = np.maximum(c_min, np.exp(np.clip(logy, -50, 200) / 4.0))
    for _ in range(40):
        f = _sp.digamma(b[:, None] + c).sum(axis=0) - logy
        fp = _sp.polygamma(1, b[:, None] + c).sum(axis=0)
        step = f / fp
        c = np.maximum(c_min, c - step)
        if np.all(np.abs(step) <= 1e-12 * np.maximum(1.0, c)):
            break
    return c


def _mb_rows(b: np.ndarray, logy: np.ndarray, c: np.ndarray, T: float, h: float):
    """Trapezoid sums on (T, h) and (2T, h/2) for a block of arguments."""
    hf = h / 2.0
    k = np.arange(int(math.ceil(2 * T / hf)) + 1)
    t = k * hf
    s = c[:, None] + 1j * t[None, :]
    logf = -s * logy[:, None]
    for bi in b:
        logf = logf + _sp.loggamma(bi + s)
    f = np.exp(logf).real
    fine = hf * (f.sum(axis=1) - 0.5 * f[:, 0]) / math.pi
    n_coarse = int(math.ceil(T / h))
    fc = f[:, : 2 * n_coarse + 1 : 2]
    coarse = h * (fc.sum(axis=1) - 0.5 * fc[:, 0]) / math.pi
    # cancellation floor: y^-c can exceed G by orders of magnitude for tiny y
    roundoff = 64 * _EPS * hf * np.abs(np.exp(logf)).sum(axis=1) / math.pi
    return fine, coarse, roundoff


def meijer_g_4040(b: Sequence[float], y, cfg: PrecisionConfig | None = None,
                  *, with_error: bool = False):
    """Meijer G-function ``G^{4,0}_{0,4}(y | -; b1..b4)`` for real ``y > 0``.

    Uses the convention whose Mellin transform is
    ``int_0^inf G(y) y^(k-1) dy = prod_i Gamma(b_i + k)``. The line integral
    ``(1/2 pi i) int prod Gamma(b_i+s) y^-s ds`` is taken along
    ``Re s = c`` with ``c`` right of all poles, shifted to the saddle point
    of the integrand when that lies further right, and summed by the
    trapezoid rule. The result must agree with a (2T, h/2) refinement to
    ``cfg.rel_tol``, or to the roundoff level of the sum when that is larger
    (tiny ``y``, where ``y**-c`` dwarfs the result).

    Raises
    ------
    ContourError
        Configured abscissa is not right of every pole.
    QuadratureNotConverged
        Refinement changed the value by more than ``cfg.rel_tol``.
    """
    cfg = cfg or DEFAULT
    b = np.asarray(b, dtype=float)
    if b.shape != (4,):
        raise ValueError("b must hold exactly four parameters")
    c_min = cfg.abscissa_for(b)
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    if np.any(~(y_arr > 0)):
        raise ValueError("y must be positive")
    logy = np.log(y_arr)
    c = _saddle_abscissa(b, logy, c_min)
    width = 1.0 / np.sqrt(_sp.polygamma(1, b[:, None] + c).sum(axis=0))

    out = np.empty_like(y_arr)
    err = np.empty_like(y_arr)
    tol = np.empty_like(y_arr)
    h = float(cfg.contour_step)
    chunk = 64
    for lo in range(0, y_arr.size, chunk):
        sl = slice(lo, lo + chunk)
        T = max(cfg.contour_halfheight, 12.0 * float(width[sl].max()))
        fine, coarse, roundoff = _mb_rows(b, logy[sl], c[sl], T, h)
        out[sl] = fine
        change = np.abs(fine - coarse)
        # a refinement change below the summation roundoff is not a failure
        err[sl] = np.maximum(change, roundoff)
        tol[sl] = np.maximum(cfg.rel_tol * np.abs(fine), roundoff)
    bad = err > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise QuadratureNotConverged(
            f"Mellin-Barnes quadrature unstable at y={y_arr[i]:.6g}: "
            f"refinement change {err[i]:.3g} vs value {out[i]:.3g}"
        )
    if scalar:
        out, err = float(out[0]), float(err[0])
    return (out, err) if with_error else out
