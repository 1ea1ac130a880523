"""Classical and grid-level face of the nonlinear oscillator.

Mass profile ``m(x) = 1/(1 + lambda x^2)``, potential
``V = alpha^2 x^2 / (2 (1 + lambda x^2))``, RK4 orbits of
``(1 + lambda x^2) x'' - lambda x x'^2 + alpha^2 x = 0`` and the ground state
annihilated by the first-order intertwiner, checked against the
symmetric-ordering Hamiltonian on a finite-difference grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, DomainEscape, NotNormalizable, StepTooLarge

ENERGY_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class OscillatorParams:
    """Physical parameters ``alpha`` (> 0) and ``lam`` (nonlinearity, 1/length^2)."""

    alpha: float
    lam: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.lam):
            raise DomainError("lambda must be finite")

    @classmethod
    def from_lambda_prime(cls, lambda_prime: float, alpha: float = 1.0):
        return cls(alpha=alpha, lam=2.0 * alpha * lambda_prime)

    @property
    def lambda_tilde(self) -> float:
        return self.lam / self.alpha

    @property
    def lambda_prime(self) -> float:
        return self.lam / (2.0 * self.alpha)

    @property
    def domain_halfwidth(self) -> float:
        return 1.0 / math.sqrt(-self.lam) if self.lam < 0 else math.inf

    def check_inside(self, x) -> None:
        w = self.domain_halfwidth
        if np.any(np.abs(np.asarray(x)) >= w):
            raise DomainError(f"|x| must stay below 1/sqrt(|lambda|) = {w:.6g}")


def evaluate_model(params: OscillatorParams, x):
    """Mass and potential at position(s) ``x``.

    Returns
    -------
    mass, potential : float or ndarray
    """
    params.check_inside(x)
    x = np.asarray(x, dtype=float)
    q = 1.0 + params.lam * x * x
    mass = 1.0 / q
    potential = params.alpha ** 2 * x * x / (2.0 * q)
    if mass.ndim == 0:
        return float(mass), float(potential)
    return mass, potential


def classical_energy(params: OscillatorParams, x, v):
    """Hamiltonian ``(1+lam x^2) p^2 / 2 + V`` with ``p = v / (1 + lam x^2)``."""
    q = 1.0 + params.lam * x * x
    return 0.5 * (v * v + params.alpha ** 2 * x * x) / q


def frequency_law(params: OscillatorParams, amplitude: float) -> float:
    """Exact angular frequency ``alpha / sqrt(1 + lam A^2)`` of the periodic orbit."""
    return params.alpha / math.sqrt(1.0 + params.lam * amplitude ** 2)


@dataclass(frozen=True)
class ClassicalOrbit:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    amplitude: float
    phase: float
    measured_omega: float
    energy_drift: float
    crossings: np.ndarray = field(repr=False)


def _accel(lam, a2, x, v):
    return (lam * x * v * v - a2 * x) / (1.0 + lam * x * x)


def upward_crossings(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Times where ``x`` goes from negative to nonnegative, linearly interpolated."""
    idx = np.nonzero((x[:-1] < 0) & (x[1:] >= 0))[0]
    x0, x1 = x[idx], x[idx + 1]
    return t[idx] + (t[idx + 1] - t[idx]) * (-x0) / (x1 - x0)


def integrate_orbit(params: OscillatorParams, x0: float, v0: float,
                    dt: float | None = None, n_steps: int | None = None) -> ClassicalOrbit:
    """Fixed-step RK4 orbit with zero-crossing frequency extraction.

    Defaults: ``dt = 1e-3 * 2 pi / alpha`` and enough steps for three periods
    of the amplitude-dependent frequency.

    Raises
    ------
    DomainError
        Initial point outside the admissible interval.
    DomainEscape
        Trajectory reaches ``|x| >= 1/sqrt(|lambda|)`` (lambda < 0).
    StepTooLarge
        Relative energy drift exceeds 1e-6.
    """
    params.check_inside(x0)
    lam, a2 = params.lam, params.alpha ** 2
    if dt is None:
        dt = 1e-3 * 2.0 * math.pi / params.alpha
    if not dt > 0:
        raise ValueError("dt must be positive")
    e0 = classical_energy(params, x0, v0)
    if n_steps is None:
        # turning point from energy conservation: V(A) = E
        denom = a2 - 2.0 * lam * e0
        amp_guess = math.sqrt(2.0 * e0 / denom) if denom > 0 else abs(x0) + 1.0
        omega_guess = frequency_law(params, amp_guess) if 1 + lam * amp_guess ** 2 > 0 else params.alpha
        n_steps = int(math.ceil(3.2 * 2.0 * math.pi / omega_guess / dt))

    wall = params.domain_halfwidth
    xs = np.empty(n_steps + 1)
    vs = np.empty(n_steps + 1)
    x, v = float(x0), float(v0)
    xs[0], vs[0] = x, v
    h2, h6 = dt / 2.0, dt / 6.0
    for i in range(1, n_steps + 1):
        k1x, k1v = v, _accel(lam, a2, x, v)
        xa, va = x + h2 * k1x, v + h2 * k1v
        k2x, k2v = va, _accel(lam, a2, xa, va)
        xb, vb = x + h2 * k2x, v + h2 * k2v
        k3x, k3v = vb, _accel(lam, a2, xb, vb)
        xc, vc = x + dt * k3x, v + dt * k3v
        k4x, k4v = vc, _accel(lam, a2, xc, vc)
        x += h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if abs(x) >= wall:
            raise DomainEscape(f"trajectory reached the wall at step {i}")
        xs[i], vs[i] = x, v

    times = dt * np.arange(n_steps + 1)
    energy = classical_energy(params, xs, vs)
    drift = float(np.max(np.abs(energy - e0)) / abs(e0)) if e0 != 0 else 0.0
    if drift > ENERGY_DRIFT_LIMIT:
        raise StepTooLarge(f"energy drift {drift:.3g} exceeds {ENERGY_DRIFT_LIMIT}")

    crossings = upward_crossings(times, xs)
    if crossings.size >= 2:
        omega = 2.0 * math.pi / float(np.mean(np.diff(crossings)))
    else:
        omega = math.nan
    amplitude = float(np.max(np.abs(xs)))
    phase = math.atan2(x0 / amplitude, v0 / (amplitude * omega)) if amplitude > 0 and math.isfinite(omega) else 0.0
    return ClassicalOrbit(times, xs, vs, amplitude, phase, omega, drift, crossings)


# --- quantum ground state on a grid ------------------------------------------------

@dataclass(frozen=True)
class GridWavefunction:
    zeta_grid: np.ndarray
    values: np.ndarray
    norm: float
    ground_energy: float
    residual: float
    spacing: float


def ground_state_closed_form(zeta, lambda_tilde: float):
    """Unnormalized ``(1 + lt zeta^2)^(-1/(2 lt))``; Gaussian at ``lt = 0``."""
    zeta = np.asarray(zeta, dtype=float)
    if lambda_tilde == 0.0:
        return np.exp(-0.5 * zeta * zeta)
    return np.exp(-np.log1p(lambda_tilde * zeta * zeta) / (2.0 * lambda_tilde))


def symmetric_grid(zeta_max: float, n_points: int) -> np.ndarray:
    # integer offsets keep the grid bitwise symmetric about 0
    k = 2 * np.arange(n_points) - (n_points - 1)
    return k * (zeta_max / (n_points - 1))


def apply_hamiltonian(psi: np.ndarray, zeta: np.ndarray, lambda_tilde: float,
                      alpha: float = 1.0) -> np.ndarray:
    """Central-difference ``H psi`` on interior points (endpoints dropped)."""
    h = zeta[1] - zeta[0]
    z = zeta[1:-1]
    d2 = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / (h * h)
    d1 = (psi[2:] - psi[:-2]) / (2.0 * h)
    q = 1.0 + lambda_tilde * z * z
    return 0.5 * alpha * (-q * d2 - 2.0 * lambda_tilde * z * d1 + z * z * psi[1:-1] / q)


def _trapz(y, h):
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def ground_state_grid(params: OscillatorParams, zeta_max: float | None = None,
                      n_points: int | None = None) -> GridWavefunction:
    """Normalized ground state on a symmetric grid, with its Hamiltonian residual.

    ``residual = ||H psi - (alpha/2) psi|| / ||psi||`` over interior points.
    Default grid: ``zeta_max = 10`` (``0.999/sqrt|lt|`` for lt < 0) and spacing
    1e-3.

    Raises
    ------
    NotNormalizable
        ``lambda_tilde >= 1``.
    DomainError
        ``zeta_max`` at or beyond the wall for ``lambda_tilde < 0``.
    """
    lt = params.lambda_tilde
    if lt >= 1.0:
        raise NotNormalizable(
            f"lambda_tilde = {lt}: tail decays like |zeta|^(-1/lt), too slow to normalize here"
        )
    if zeta_max is None:
        zeta_max = 10.0 if lt >= 0 else 0.999 / math.sqrt(-lt)
    if lt < 0 and zeta_max >= 1.0 / math.sqrt(-lt):
        raise DomainError("zeta_max must lie inside the wall 1/sqrt(|lambda_tilde|)")
    if n_points is None:
        n_points = int(round(2 * zeta_max / 1e-3)) + 1
    if n_points < 1001:
        raise ValueError("n_points must be at least 1001")

    zeta = symmetric_grid(zeta_max, n_points)
    h = zeta[1] - zeta[0]
    psi = ground_state_closed_form(zeta, lt)
    norm0 = _trapz(psi * psi, h)
    psi = psi / math.sqrt(norm0)
    norm = _trapz(psi * psi, h)

    e0 = params.alpha / 2.0
    r = apply_hamiltonian(psi, zeta, lt, params.alpha) - e0 * psi[1:-1]
    residual = math.sqrt(_trapz(r * r, h) / _trapz(psi[1:-1] ** 2, h))
    return GridWavefunction(zeta, psi, norm, e0, residual, h)
