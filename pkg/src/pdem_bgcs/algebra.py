"""Truncated Fock-basis realization of the ladder and su(1,1) operators.

Everything is driven by the squared ladder coefficient
``l_sq[n] = n - lambda' n (n + 1)``:

* ``L-  e_n = sqrt(l_sq[n]) e_{n-1}``,  ``L+ e_n = sqrt(l_sq[n+1]) e_{n+1}``
* ``K-  e_n = l_sq[n] e_{n-1}``,        ``K+ e_n = l_sq[n+1] e_{n+1}``
* ``K0 = 1/2 + H1``,  ``H1 = L+ L- = diag(l_sq)``,  ``H = alpha (H1 + 1/2)``

``check_algebra`` measures, rather than asserts, the commutation relations,
because for lambda' != 0 the closure relations only hold in deformed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NegativeCoefficient
from .specfun import pochhammer

REP_J = -0.5


@dataclass(frozen=True)
class BandOperator:
    """Operator with a diagonal and at most one off-diagonal band.

    ``band[k]`` is the coefficient linking ``e_k`` and ``e_{k+1}``: for
    ``band_offset = -1`` it maps ``e_{k+1} -> e_k``, for ``+1`` it maps
    ``e_k -> e_{k+1}``.
    """

    diag: np.ndarray
    band_offset: int = 0
    band: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.diag.size

    def apply(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        out = self.diag * vec
        if self.band_offset == -1:
            out[:-1] = out[:-1] + self.band * vec[1:]
        elif self.band_offset == 1:
            out[1:] = out[1:] + self.band * vec[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag).astype(float)
        if self.band_offset == -1:
            m += np.diag(self.band, 1)
        elif self.band_offset == 1:
            m += np.diag(self.band, -1)
        return m


def _lowering(band):
    return BandOperator(np.zeros(band.size + 1), -1, band)


def _raising(band):
    return BandOperator(np.zeros(band.size + 1), 1, band)


def ladder_coefficients(lambda_prime: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return n - lambda_prime * n * (n + 1.0)


def physical_cutoff(lambda_prime: float) -> float:
    """Largest n with ``l_sq[k] >= 0`` for all k <= n (``inf`` when lambda' <= 0)."""
    if lambda_prime <= 0:
        return math.inf
    # l_sq[k] >= 0  <=>  k = 0 or k <= 1/lambda' - 1; nudge the float guess
    # against the exact predicate on l_sq[n + 1]
    guess = 1.0 / lambda_prime - 1.0
    if not math.isfinite(guess):
        return math.inf  # subnormal lambda': cutoff beyond any float
    if guess >= 2.0 ** 52:
        return math.floor(guess)
    n = max(int(math.floor(guess)), 0)

    def ok(k):
        return k + 1 - lambda_prime * (k + 1) * (k + 2) >= 0

    while n > 0 and not ok(n - 1):
        n -= 1
    while ok(n):
        n += 1
    return n


@dataclass(frozen=True)
class FockRealization:
    """Coefficient tables of the realization on ``dim`` Fock states."""

    lambda_prime: float
    dim: int
    mode: str
    alpha: float
    l_sq: np.ndarray
    n_max_physical: float
    alpha_seq: np.ndarray
    r_seq: np.ndarray
    gen_factorial: np.ndarray
    energy: np.ndarray
    rep_m: np.ndarray
    rep_j: float = REP_J

    @property
    def lambda_tilde(self) -> float:
        return 2.0 * self.lambda_prime

    def _sqrt_band(self) -> np.ndarray:
        vals = self.l_sq[1:]
        if np.any(vals < 0):
            k = int(np.argmax(vals < 0)) + 1
            raise NegativeCoefficient(
                f"l_sq[{k}] = {self.l_sq[k]:.6g} < 0; L+/L- need its square root "
                f"(lambda' = {self.lambda_prime}, use dim <= {k})"
            )
        return np.sqrt(vals)

    @property
    def L_minus(self) -> BandOperator:
        return _lowering(self._sqrt_band())

    @property
    def L_plus(self) -> BandOperator:
        return _raising(self._sqrt_band())

    @property
    def K_minus(self) -> BandOperator:
        return _lowering(self.l_sq[1:].copy())

    @property
    def K_plus(self) -> BandOperator:
        return _raising(self.l_sq[1:].copy())

    @property
    def K_0(self) -> BandOperator:
        return BandOperator(0.5 + self.l_sq)

    @property
    def H1(self) -> BandOperator:
        return BandOperator(self.l_sq.copy())

    @property
    def H(self) -> BandOperator:
        return BandOperator(self.alpha * (self.l_sq + 0.5))

    @property
    def R_hat(self) -> BandOperator:
        """Diagonal ``R(alpha_{n+1}) = 1 - lambda~ (n + 1)``."""
        n = np.arange(self.dim)
        return BandOperator(1.0 - self.lambda_tilde * (n + 1.0))


def build_realization(lambda_prime: float, dim: int,
                      mode: Literal["physical", "formal"] = "physical",
                      alpha: float = 1.0) -> FockRealization:
    """Build the coefficient tables.

    In ``"physical"`` mode with lambda' > 0 the basis stops at the last state
    with nonnegative ``l_sq`` (``dim`` is clamped to ``n_max_physical + 1``).
    ``"formal"`` mode keeps all ``dim`` states; ``K+-``, ``K0`` and ``H1`` are
    always available there but ``L+-`` raise :class:`NegativeCoefficient`
    once a square root of a negative ``l_sq`` would be needed.
    """
    if dim < 2 or int(dim) != dim:
        raise ValueError("dim must be an integer >= 2")
    if mode not in ("physical", "formal"):
        raise ValueError(f"unknown mode {mode!r}")
    n_phys = physical_cutoff(lambda_prime)
    if mode == "physical" and n_phys + 1 < dim:
        dim = int(n_phys) + 1
    dim = int(dim)

    n = np.arange(dim, dtype=float)
    lt = 2.0 * lambda_prime
    l_sq = ladder_coefficients(lambda_prime, n)
    l_sq[0] = 0.0
    alpha_seq = 1.0 - (n - 1.0) * lt
    r_seq = 1.0 - n * lt
    # [n]! grows like (n!)^2 lambda'^n; large formal bases overflow to inf
    with np.errstate(over="ignore"):
        gen_factorial = np.cumprod(np.concatenate(([1.0], l_sq[1:])))
    energy = alpha * (l_sq + 0.5)
    rep_m = n + 0.5 - lambda_prime * n * (n + 1.0)
    return FockRealization(lambda_prime, dim, mode, float(alpha), l_sq, n_phys,
                           alpha_seq, r_seq, gen_factorial, energy, rep_m)


def factorial_from_partial_sums(r_seq: np.ndarray, n: int) -> float:
    """``[n]! = prod_{k=1..n} (R(alpha_k) + ... + R(alpha_1))``."""
    partial = np.cumsum(r_seq[1:n + 1])
    return float(np.prod(partial))


def factorial_pochhammer_form(lambda_tilde: float, n: int) -> float:
    """``(-1)^n n! (lambda~/2)^n (2 - 2/lambda~)_n``; undefined at lambda~ = 0."""
    return ((-1) ** n * math.factorial(n) * (lambda_tilde / 2.0) ** n
            * pochhammer(2.0 - 2.0 / lambda_tilde, n))


def shift_params(alpha_n: float, lambda_tilde: float) -> float:
    """One shape-invariance translation ``alpha_{n+1} = alpha_n - lambda~``."""
    return alpha_n - lambda_tilde


@dataclass
class AlgebraReport:
    lambda_prime: float
    dim: int
    ll_commutator: np.ndarray | None
    r_hat: np.ndarray
    scalar_one_deviation: float | None
    lr_residual_realized: float | None
    lr_residual_literal: float | None
    kk_closure_residual: np.ndarray
    k0_kpm_residual: float
    casimir: np.ndarray
    casimir_max_dev: float
    shape_invariance_residual: float | None

    def rows(self):
        """(check, value) pairs for tabular output."""
        def _f(v):
            return None if v is None else float(v)
        return [
            ("[L-,L+] - R_hat (max)", _f(None if self.ll_commutator is None
                                        else np.max(np.abs(self.ll_commutator - self.r_hat)))),
            ("[L-,L+] - 1 (max)", _f(self.scalar_one_deviation)),
            ("[L-+,R_hat] realized-sign residual", _f(self.lr_residual_realized)),
            ("[L-+,R_hat] literal-sign residual", _f(self.lr_residual_literal)),
            ("[K-,K+] - 2K0 (max)", float(np.max(self.kk_closure_residual))),
            ("[K0,K+-] -+ K+- (max)", float(self.k0_kpm_residual)),
            ("Casimir - 1/4 (max)", float(self.casimir_max_dev)),
            ("shape invariance residual", _f(self.shape_invariance_residual)),
        ]


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def check_algebra(real: FockRealization) -> AlgebraReport:
    """Measure the algebraic identities on interior indices ``0 .. dim-2``.

    Items needing ``L+-`` are ``None`` when a square root of a negative
    ``l_sq`` would be required (formal mode, lambda' > 0).
    """
    if real.dim < 3:
        raise ValueError("check_algebra needs dim >= 3")
    m = real.dim - 1
    inner = (slice(0, m), slice(0, m))
    lt = real.lambda_tilde
    R = real.R_hat.to_dense()

    try:
        Lm, Lp = real.L_minus.to_dense(), real.L_plus.to_dense()
    except NegativeCoefficient:
        Lm = Lp = None

    if Lm is not None:
        ll = np.diag(_comm(Lm, Lp))[:m]
        scalar_dev = float(np.max(np.abs(ll - 1.0)))
        realized = max(np.max(np.abs((_comm(Lm, R) + lt * Lm)[inner])),
                       np.max(np.abs((_comm(Lp, R) - lt * Lp)[inner])))
        literal = max(np.max(np.abs((_comm(Lm, R) - lt * Lm)[inner])),
                      np.max(np.abs((_comm(Lp, R) + lt * Lp)[inner])))
        # L-L+ minus L+L- at level n equals R(alpha_{n+1})
        aad = np.diag(Lm @ Lp)[:m]
        ada = np.diag(Lp @ Lm)[:m]
        shape_res = float(np.max(np.abs(aad - ada - real.r_seq[1:m + 1])))
    else:
        ll = scalar_dev = realized = literal = shape_res = None

    Km, Kp, K0 = real.K_minus.to_dense(), real.K_plus.to_dense(), real.K_0.to_dense()
    kk = np.abs(np.diag(_comm(Km, Kp) - 2.0 * K0)[:m])
    k0 = max(np.max(np.abs((_comm(K0, Kp) - Kp)[inner])),
             np.max(np.abs((_comm(K0, Km) + Km)[inner])))
    cas = np.diag(Kp @ Km - K0 @ (K0 - np.eye(real.dim)))[:m]
    return AlgebraReport(
        lambda_prime=real.lambda_prime,
        dim=real.dim,
        ll_commutator=ll,
        r_hat=np.diag(R)[:m],
        scalar_one_deviation=scalar_dev,
        lr_residual_realized=None if realized is None else float(realized),
        lr_residual_literal=None if literal is None else float(literal),
        kk_closure_residual=kk,
        k0_kpm_residual=float(k0),
        casimir=cas,
        casimir_max_dev=float(np.max(np.abs(cas - 0.25))),
        shape_invariance_residual=shape_res,
    )


def build_eigenstate(real: FockRealization, n: int) -> np.ndarray:
    """``(L+)^n e_0 / sqrt([n]!)``; must reproduce ``e_n`` to 1e-12.

    Raises
    ------
    NegativeCoefficient
        A negative ``l_sq[k]``, k <= n, would need a square root.
    ArithmeticError
        Reconstruction differs from ``e_n`` by more than 1e-12.
    """
    if not 0 <= n < real.dim:
        raise ValueError(f"n must lie in [0, {real.dim})")
    if n > real.n_max_physical and real.mode == "physical":
        raise ValueError(f"n = {n} beyond the physical cutoff {real.n_max_physical}")
    if np.any(real.l_sq[1:n + 1] < 0):
        raise NegativeCoefficient(f"l_sq has negative entries up to n = {n}")
    Lp = real.L_plus
    vec = np.zeros(real.dim)
    vec[0] = 1.0
    for _ in range(n):
        vec = Lp.apply(vec)
    vec = vec / math.sqrt(real.gen_factorial[n])
    target = np.zeros(real.dim)
    target[n] = 1.0
    dev = float(np.max(np.abs(vec - target)))
    if dev > 1e-12:
        raise ArithmeticError(f"reconstructed e_{n} deviates by {dev:.3g}")
    return vec
