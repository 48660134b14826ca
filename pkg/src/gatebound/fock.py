"""Truncated bosonic Hilbert-space kernel.

State constructors (number, coherent, squeezed-coherent), ladder-operator
builders, overlaps and unitary time propagation on a number basis truncated
to ``cutoff`` levels ``|0> ... |cutoff-1>``.  Everything works in natural
units (hbar = 1); states are plain complex amplitude vectors wrapped in an
immutable ``ControlState``.

Truncation is controlled explicitly: constructors enforce tail-mass
contracts and raise :class:`~gatebound.errors.CutoffError` instead of
silently normalising away probability that leaked past the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammainc, gammaln

from .errors import CutoffError, DimensionMismatchError, IntegrationError

NORM_TOL = 1e-10          # allowed |sum |c_n|^2 - 1| for constructed states
HERMITICITY_TOL = 1e-12   # max-entry deviation allowed for Hamiltonian matrices
COHERENT_TAIL = 1e-12     # Poisson tail mass guaranteed by the cutoff rule
SQUEEZED_TAIL = 1e-10     # tail mass contract for squeezed-coherent states

_DENSE_EXPM_DIM = 32      # below this, dense expm beats expm_multiply


@dataclass(frozen=True)
class ControlState:
    """Normalised state of the control mode on a truncated number basis."""

    cutoff: int
    amplitudes: np.ndarray
    unit_system: str = "natural"

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.cutoff,):
            raise DimensionMismatchError(
                f"amplitude vector has shape {amps.shape}, expected ({self.cutoff},)"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {norm_sq!r} deviates from 1 beyond {NORM_TOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on the truncated basis (energy units for Hamiltonians)."""

    cutoff: int
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if mat.shape != (self.cutoff, self.cutoff):
            raise DimensionMismatchError(
                f"operator has shape {mat.shape}, expected ({self.cutoff}, {self.cutoff})"
            )
        if self.hermitian:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev > HERMITICITY_TOL:
                raise ValueError(f"matrix deviates from Hermiticity by {dev:.3e}")
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.cutoff, self.entries.conj().T, hermitian=self.hermitian)


HamiltonianLike = Union[OperatorMatrix, np.ndarray, Callable[[float], Union[OperatorMatrix, np.ndarray]]]


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, OperatorMatrix):
        return obj.entries
    return np.asarray(obj, dtype=np.complex128)


def coherent_required_cutoff(alpha: complex) -> int:
    """Basis size that keeps the Poisson tail below ``COHERENT_TAIL``."""
    lam = abs(alpha) ** 2
    return int(math.ceil(lam + 12.0 * math.sqrt(max(lam, 1.0)) + 20.0))


def coherent_poisson_tail(alpha: complex, cutoff: int) -> float:
    """Poisson tail mass sum_{n >= cutoff} e^{-|a|^2} |a|^{2n} / n!."""
    return float(gammainc(cutoff, abs(alpha) ** 2))


def coherent_state(alpha: complex, cutoff: int | None = None, *,
                   allow_truncation: bool = False) -> ControlState:
    """Coherent state |alpha> with amplitudes e^{-|a|^2/2} a^n / sqrt(n!).

    Cutoffs at or above :func:`coherent_required_cutoff` always satisfy the
    tail contract; a smaller cutoff is accepted only if its directly
    computed Poisson tail still stays below ``COHERENT_TAIL`` (or the caller
    overrides with ``allow_truncation``).
    """
    required = coherent_required_cutoff(alpha)
    if cutoff is None:
        cutoff = required
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if cutoff < required and not allow_truncation \
            and coherent_poisson_tail(alpha, cutoff) > COHERENT_TAIL:
        raise CutoffError(
            f"cutoff {cutoff} below {required} required for |alpha|={abs(alpha):.3g} "
            f"(tail mass {coherent_poisson_tail(alpha, cutoff):.2e}); "
            "pass allow_truncation=True to override"
        )
    n = np.arange(cutoff)
    r = abs(alpha)
    if r == 0.0:
        amps = np.zeros(cutoff, dtype=np.complex128)
        amps[0] = 1.0
        return ControlState(cutoff, amps)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag + 1j * n * np.angle(alpha))
    amps /= np.linalg.norm(amps)
    return ControlState(cutoff, amps)


def number_state(n: int, cutoff: int) -> ControlState:
    """Number state |n> on a basis of ``cutoff`` levels."""
    if not 0 <= n < cutoff:
        raise IndexError(f"n={n} outside truncated basis of size {cutoff}")
    amps = np.zeros(cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return ControlState(cutoff, amps)


def _squeezed_amplitudes(alpha: complex, r: float, size: int) -> np.ndarray:
    # |alpha, r> = D(alpha) S(r) |0> satisfies (cosh r * a + sinh r * a†)|psi>
    # = (cosh r * alpha + sinh r * conj(alpha))|psi>, which yields a stable
    # three-term upward recursion.  c0 is fixed real-positive; that matches
    # the coherent-state convention at r = 0 up to the (irrelevant) global
    # phase of D(alpha)S(r)|0>.
    mu, nu = math.cosh(r), math.sinh(r)
    lam = mu * alpha + nu * np.conj(alpha)
    c = np.zeros(size, dtype=np.complex128)
    c[0] = 1.0
    for n in range(size - 1):
        prev = c[n - 1] if n >= 1 else 0.0
        c[n + 1] = (lam * c[n] - nu * math.sqrt(n) * prev) / (mu * math.sqrt(n + 1))
        if n % 32 == 31:
            scale = np.max(np.abs(c[: n + 2]))
            if scale > 1e100:
                c[: n + 2] /= scale
    return c


def squeezed_coherent_state(alpha: complex, r: float,
                            cutoff: int | None = None) -> ControlState:
    """Displaced squeezed vacuum with quadrature variances e^{-2r}/2, e^{2r}/2.

    The constructor sums the tail mass beyond ``cutoff`` directly (in a
    padded workspace) and raises :class:`CutoffError` when it exceeds
    ``SQUEEZED_TAIL``.
    """
    nbar = abs(alpha) ** 2 + math.sinh(r) ** 2
    if cutoff is None:
        # squeezed-vacuum number tails decay geometrically as tanh(r)^{2n},
        # much slower than Poisson; size the basis off that rate plus the
        # coherent displacement part.
        t2 = math.tanh(abs(r)) ** 2
        geom = 0.0 if t2 == 0.0 else 2.0 * math.log(1e13) / (-math.log(t2))
        cutoff = int(math.ceil(nbar + 12.0 * math.sqrt(max(nbar, 1.0)) + geom + 30.0))
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    workspace = cutoff + 64
    c = _squeezed_amplitudes(alpha, r, workspace)
    total = float(np.sum(np.abs(c) ** 2))
    head = float(np.sum(np.abs(c[-8:]) ** 2))
    if head > 1e-18 * total:
        workspace = cutoff + 512
        c = _squeezed_amplitudes(alpha, r, workspace)
        total = float(np.sum(np.abs(c) ** 2))
    tail = float(np.sum(np.abs(c[cutoff:]) ** 2)) / total
    if tail > SQUEEZED_TAIL:
        raise CutoffError(
            f"tail mass {tail:.3e} beyond cutoff {cutoff} exceeds {SQUEEZED_TAIL}"
        )
    amps = c[:cutoff]
    amps = amps / np.linalg.norm(amps)
    return ControlState(cutoff, amps)


def ladder_operators(cutoff: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Annihilation operator a (a|n> = sqrt(n)|n-1>) and its adjoint."""
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    a = np.zeros((cutoff, cutoff), dtype=np.complex128)
    n = np.arange(1, cutoff)
    a[n - 1, n] = np.sqrt(n)
    return OperatorMatrix(cutoff, a), OperatorMatrix(cutoff, a.conj().T)


def number_operator(cutoff: int) -> OperatorMatrix:
    """Diagonal a†a."""
    return OperatorMatrix(cutoff, np.diag(np.arange(cutoff, dtype=np.complex128)),
                          hermitian=True)


def overlap(lhs: ControlState, rhs: ControlState) -> complex:
    """Inner product <lhs|rhs>."""
    if lhs.cutoff != rhs.cutoff:
        raise DimensionMismatchError(f"cutoffs differ: {lhs.cutoff} vs {rhs.cutoff}")
    return complex(np.vdot(lhs.amplitudes, rhs.amplitudes))


def expectation(state: ControlState, op: OperatorMatrix) -> complex:
    if state.cutoff != op.cutoff:
        raise DimensionMismatchError(f"cutoffs differ: {state.cutoff} vs {op.cutoff}")
    return complex(np.vdot(state.amplitudes, op.entries @ state.amplitudes))


def mean_photon_number(state: ControlState) -> float:
    n = np.arange(state.cutoff)
    return float(np.sum(n * np.abs(state.amplitudes) ** 2))


def quadrature_variance(state: ControlState, quadrature: str = "x") -> float:
    """Variance of x = (a + a†)/sqrt(2) or p = (a - a†)/(i sqrt(2))."""
    a, adag = ladder_operators(state.cutoff)
    if quadrature == "x":
        q = (a.entries + adag.entries) / math.sqrt(2.0)
    elif quadrature == "p":
        q = (a.entries - adag.entries) / (1j * math.sqrt(2.0))
    else:
        raise ValueError("quadrature must be 'x' or 'p'")
    psi = state.amplitudes
    qpsi = q @ psi
    mean = np.vdot(psi, qpsi).real
    return float(np.vdot(qpsi, qpsi).real - mean * mean)


# ---------------------------------------------------------------------------
# time propagation
# ---------------------------------------------------------------------------

_SQ3 = math.sqrt(3.0)
_GAUSS_C1 = 0.5 - _SQ3 / 6.0
_GAUSS_C2 = 0.5 + _SQ3 / 6.0
_CF4_P = (3.0 - 2.0 * _SQ3) / 12.0
_CF4_Q = (3.0 + 2.0 * _SQ3) / 12.0

_MAX_GROW = 5.0
_MIN_SHRINK = 0.2
_SAFETY = 0.9


def _apply_exp(generator: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """exp(generator) @ psi for an anti-Hermitian generator."""
    if generator.shape[0] <= _DENSE_EXPM_DIM:
        return expm(generator) @ psi
    return expm_multiply(generator, psi)


def _step(hof, t, h, psi, order):
    if order == 4:
        h1 = _as_matrix(hof(t + _GAUSS_C1 * h))
        h2 = _as_matrix(hof(t + _GAUSS_C2 * h))
        psi = _apply_exp(-1j * h * (_CF4_Q * h1 + _CF4_P * h2), psi)
        return _apply_exp(-1j * h * (_CF4_P * h1 + _CF4_Q * h2), psi)
    mid = _as_matrix(hof(t + 0.5 * h))
    return _apply_exp(-1j * h * mid, psi)


def evolve(state: ControlState, hamiltonian: HamiltonianLike,
           t0: float, t1: float, tol: float, *, order: int = 4,
           max_steps: int = 200_000) -> ControlState:
    """Propagate ``state`` under a (possibly time-dependent) Hamiltonian.

    The time-ordered propagator over [t0, t1] is applied by adaptive
    sub-stepping.  Each sub-step is a product of matrix exponentials of
    Hamiltonian samples inside the step (a commutator-free Magnus step of
    the requested ``order``; ``order=2`` is the plain midpoint exponential),
    so every step is exactly unitary on the truncated space.  Step doubling
    supplies the local error estimate, and steps are sized so the summed
    local errors stay below ``tol`` (global norm-distance contract).

    Raises
    ------
    IntegrationError
        On step-size underflow or when the step budget is exhausted;
        diagnostics carry the reached time and the last step/error.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    if t1 == t0:
        return ControlState(state.cutoff, state.amplitudes.copy(), state.unit_system)

    hof = hamiltonian if callable(hamiltonian) else (lambda _t, _m=hamiltonian: _m)
    richardson = 15.0 if order == 4 else 3.0
    exponent = 0.25 if order == 4 else 0.5

    total = t1 - t0
    t = t0
    h = total
    psi = state.amplitudes.copy()
    in_norm_sq = float(np.vdot(psi, psi).real)
    n_steps = 0

    while t < t1 - 1e-15 * total:
        if n_steps >= max_steps:
            raise IntegrationError(
                "step budget exhausted",
                {"t": t, "h": h, "steps": n_steps, "tol": tol},
            )
        h = min(h, t1 - t)
        full = _step(hof, t, h, psi, order)
        half = _step(hof, t + 0.5 * h, 0.5 * h, _step(hof, t, 0.5 * h, psi, order), order)
        err = float(np.linalg.norm(half - full)) / richardson
        if not math.isfinite(err):
            raise IntegrationError(
                "non-finite state during propagation",
                {"t": t, "h": h, "steps": n_steps},
            )
        budget = tol * h / total
        if err <= budget:
            psi = half
            t += h
        elif h <= 1e-14 * total:
            raise IntegrationError(
                "step-size underflow",
                {"t": t, "h": h, "error_estimate": err, "tol": tol, "steps": n_steps},
            )
        n_steps += 1
        if err > 0.0:
            h *= min(_MAX_GROW, max(_MIN_SHRINK, _SAFETY * (budget / err) ** exponent))
        else:
            h *= _MAX_GROW

    out_norm_sq = float(np.vdot(psi, psi).real)
    if abs(out_norm_sq - in_norm_sq) > tol:
        raise IntegrationError(
            "norm drift exceeded tolerance",
            {"in_norm_sq": in_norm_sq, "out_norm_sq": out_norm_sq, "tol": tol},
        )
    return ControlState(state.cutoff, psi, state.unit_system)
