"""Collision-mediated gates: free wavepackets and trapped oscillators.

Free case: two identical particles pass each other at impact parameter b
with transverse speed v; the accumulated action of their mutual potential
supplies the conditional phase, and wavepacket spreading turns the phase
into a fluctuating quantity.  Minimising the fluctuation over physical
wavepackets and eliminating the potential through the phase condition gives
the kinetic-energy requirement m v^2 > hbar/(eps T).

Trapped case: the particles oscillate in harmonic wells, approaching to a
gap b once per period; only the position noise enters at leading order
(the momentum term cancels by symmetry of the unperturbed trajectory), and
for a rho^-3 interaction the constraint ratio approaches 5/(2b).  A
classical two-body integration quantifies how the perturbed trajectory
misses its return point, which is what ultimately limits position
squeezing.

All integrals carry explicit hbar (default 1.0: natural units).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import (
    DegenerateConfigError,
    IntegrationError,
    NumericalInconsistencyError,
    UncertaintyError,
)
from .report import BoundReport, bound_satisfied

PI = math.pi
PHASE_CALIBRATION_TOL = 1e-6
QUAD_REL_TOL = 1e-10
LOG_DERIVATIVE_TOL = 1e-6
SIN_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class PotentialLaw:
    """Interaction potential V(rho), either C * rho^-n or a custom callable."""

    kind: str
    n: float | None = None
    coupling: float | None = None
    v_fn: Callable[[float], float] | None = None
    dv_fn: Callable[[float], float] | None = None

    @staticmethod
    def power_law(n: float, coupling: float = 1.0) -> "PotentialLaw":
        if n <= 1:
            raise ValueError("power-law exponent must satisfy n > 1")
        return PotentialLaw("power_law", n=float(n), coupling=float(coupling))

    @staticmethod
    def custom(v: Callable[[float], float], dv: Callable[[float], float],
               coupling: float = 1.0) -> "PotentialLaw":
        return PotentialLaw("custom", coupling=float(coupling), v_fn=v, dv_fn=dv)

    def value(self, rho: float) -> float:
        if self.kind == "power_law":
            return self.coupling * rho ** (-self.n)
        return self.coupling * self.v_fn(rho)

    def derivative(self, rho: float) -> float:
        if self.kind == "power_law":
            return -self.n * self.coupling * rho ** (-self.n - 1.0)
        return self.coupling * self.dv_fn(rho)

    def scaled(self, factor: float) -> "PotentialLaw":
        return replace(self, coupling=self.coupling * factor)

    def check_vanishes(self, b: float) -> None:
        far = abs(self.value(1e6 * b))
        near = abs(self.value(b))
        if near == 0.0:
            return
        if far > 1e-8 * near:
            raise ValueError(
                f"potential does not vanish at large separation: |V(1e6 b)| = {far:.3e}"
            )


@dataclass(frozen=True)
class FreeCollisionConfig:
    """Straight-line collision: masses m, transverse speeds +-v, gap b, window T."""

    m: float
    v: float
    b: float
    T: float
    potential: PotentialLaw
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "v", "b", "T", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.b < self.v * self.T:
            raise ValueError("impact parameter must satisfy b < v T")
        self.potential.check_vanishes(self.b)

    def rho(self, t: float) -> float:
        return math.sqrt(4.0 * self.v * self.v * t * t + self.b * self.b)


def phase_integral_free(cfg: FreeCollisionConfig) -> float:
    """(1/hbar) int_{-T/2}^{T/2} V(rho(t)) dt, via the even symmetry of rho."""
    val, _ = quad(lambda t: cfg.potential.value(cfg.rho(t)),
                  0.0, cfg.T / 2.0, epsabs=0.0, epsrel=QUAD_REL_TOL, limit=400)
    return 2.0 * val / cfg.hbar


def calibrate_coupling(cfg: FreeCollisionConfig) -> float:
    """Coupling C* that makes the accumulated phase exactly pi.

    The phase is linear in the overall coupling, so calibration is a single
    rescaling of the current coupling.
    """
    phase = phase_integral_free(cfg)
    if not math.isfinite(phase) or phase <= 0.0:
        raise DegenerateConfigError(f"phase at current coupling is {phase!r}; cannot calibrate")
    return cfg.potential.coupling * PI / phase


def calibrated(cfg: FreeCollisionConfig) -> FreeCollisionConfig:
    """Copy of the config with the coupling rescaled onto phase = pi."""
    cstar = calibrate_coupling(cfg)
    return replace(cfg, potential=cfg.potential.scaled(cstar / cfg.potential.coupling))


def error_variance_free(cfg: FreeCollisionConfig, dx0: float, dp0: float) -> float:
    """Phase variance (b^2/hbar^2) (int V'(rho)/rho dt)^2 (dx0^2 + T^2 dp0^2/4m^2)."""
    if dx0 <= 0 or dp0 <= 0:
        raise ValueError("wavepacket widths must be positive")
    if dx0 * dp0 < cfg.hbar / 2.0 - 1e-12:
        raise UncertaintyError(f"dx0*dp0 = {dx0 * dp0!r} violates the uncertainty relation")
    integrand = lambda t: cfg.potential.derivative(cfg.rho(t)) / cfg.rho(t)
    val, _ = quad(integrand, 0.0, cfg.T / 2.0, epsabs=0.0, epsrel=QUAD_REL_TOL, limit=400)
    j = 2.0 * val
    spread = dx0 * dx0 + cfg.T * cfg.T * dp0 * dp0 / (4.0 * cfg.m * cfg.m)
    return (cfg.b * cfg.b / (cfg.hbar * cfg.hbar)) * j * j * spread


class OptimalWavepacket(NamedTuple):
    dx0_sq: float
    dp0_sq: float


def optimal_wavepacket(m: float, T: float, hbar: float = 1.0) -> OptimalWavepacket:
    """Minimiser of dx0^2 + T^2 dp0^2 / 4m^2 subject to dx0 dp0 = hbar/2.

    The optimum equalises the two terms: dx0^2 = T hbar / 4m and
    dp0^2 = m hbar / T, with objective T hbar / 2m.
    """
    if m <= 0 or T <= 0:
        raise ValueError("m and T must be positive")
    return OptimalWavepacket(dx0_sq=T * hbar / (4.0 * m), dp0_sq=m * hbar / T)


def wavepacket_objective(m: float, T: float, dx0_sq: float, dp0_sq: float) -> float:
    return dx0_sq + T * T * dp0_sq / (4.0 * m * m)


def _line_integral_power_law(n: float, b: float) -> float:
    """int_{-inf}^{inf} (y^2 + b^2)^{-n/2} dy via y = b tan(theta).

    The substitution maps the whole line onto (-pi/2, pi/2) and concentrates
    nodes near the closest approach; the integrand becomes
    b^{1-n} cos^{n-2}(theta) with an integrable endpoint behaviour for n > 1.
    """
    val, _ = quad(lambda th: math.cos(th) ** (n - 2.0),
                  0.0, PI / 2.0, epsabs=0.0, epsrel=QUAD_REL_TOL, limit=400)
    return 2.0 * b ** (1.0 - n) * val


def powerlaw_log_derivative_pair(n: float, b: float) -> tuple[float, float]:
    """(analytic, quadrature finite-difference) values of d/db ln(line integral)."""
    if n <= 1:
        raise ValueError("power-law exponent must satisfy n > 1")
    if b <= 0:
        raise ValueError("b must be positive")
    analytic = -(n - 1.0) / b
    h = 1e-4 * b
    numeric = (
        math.log(_line_integral_power_law(n, b + h))
        - math.log(_line_integral_power_law(n, b - h))
    ) / (2.0 * h)
    return analytic, numeric


def powerlaw_log_derivative(n: float, b: float) -> float:
    """d/db ln(int (y^2+b^2)^{-n/2} dy), analytically -(n-1)/b.

    The analytic value is cross-checked against a central difference of the
    tangent-substituted quadrature; disagreement beyond 1e-6 relative raises.
    """
    analytic, numeric = powerlaw_log_derivative_pair(n, b)
    if abs(numeric - analytic) > LOG_DERIVATIVE_TOL * abs(analytic):
        raise NumericalInconsistencyError(
            f"log-derivative mismatch: analytic {analytic!r} vs quadrature {numeric!r}"
        )
    return analytic


def effective_duration_rms(cfg: FreeCollisionConfig) -> float:
    """2 * RMS width of V(rho(t)) over the window; diagnostic only."""
    w = lambda t: cfg.potential.value(cfg.rho(t))
    norm, _ = quad(w, 0.0, cfg.T / 2.0, epsabs=0.0, epsrel=1e-8, limit=400)
    second, _ = quad(lambda t: t * t * w(t), 0.0, cfg.T / 2.0, epsabs=0.0, epsrel=1e-8, limit=400)
    if norm == 0.0:
        return 0.0
    return 2.0 * math.sqrt(second / norm)


def free_energy_bound(cfg: FreeCollisionConfig, epsilon: float) -> BoundReport:
    """Full free-collision chain at the optimal wavepacket.

    With the coupling calibrated to phase pi, the optimal-wavepacket error is
    delta^2 = (pi^2 T hbar / 2m) ((n-1)/b)^2; whenever delta^2 <= eps and
    b < v T hold, the pair kinetic energy m v^2 must exceed hbar/(eps T).
    """
    if cfg.potential.kind != "power_law":
        raise ValueError("the energy-bound chain requires a power-law potential")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    phase = phase_integral_free(cfg)
    off_calibration = abs(phase - PI) > PHASE_CALIBRATION_TOL
    log_deriv = powerlaw_log_derivative(cfg.potential.n, cfg.b)
    delta_sq = (PI * PI * cfg.T * cfg.hbar / (2.0 * cfg.m)) * log_deriv * log_deriv
    wp = optimal_wavepacket(cfg.m, cfg.T, cfg.hbar)
    energy = cfg.m * cfg.v * cfg.v
    bound = cfg.hbar / (epsilon * cfg.T)
    meta = {
        "epsilon": epsilon,
        "epsilon_unphysical": epsilon >= 1.0,
        "off_calibration": off_calibration,
        "error_within_epsilon": delta_sq <= epsilon,
        "dx0_sq": wp.dx0_sq,
        "dp0_sq": wp.dp0_sq,
        # 2 m hbar / T: the momentum variance obtained if the uncertainty
        # product were taken at hbar/sqrt(2) instead of hbar/2; kept for
        # comparison, not used in the chain.
        "dp0_sq_alt": 2.0 * cfg.m * cfg.hbar / cfg.T,
        "b_over_vT": cfg.b / (cfg.v * cfg.T),
        "effective_duration_rms": effective_duration_rms(cfg),
    }
    return BoundReport(
        energy=energy,
        bound=bound,
        satisfied=bound_satisfied(energy, bound),
        phase=phase,
        error=delta_sq,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# harmonic trap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicCollisionConfig:
    """Two oscillators swinging toward each other once per period.

    Equilibria sit at -(A + b/2) and +(A + b/2); starting from the outer
    turning points the separation is rho(t) = 2A + b + 2A cos(omega t),
    closest (= b) at half period.  ``squeeze_r`` optionally narrows the
    position variance of each wavepacket by e^{-2r}.
    """

    m: float
    omega: float
    A: float
    b: float
    potential: PotentialLaw
    squeeze_r: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "A", "b", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        self.potential.check_vanishes(self.b)

    @property
    def period(self) -> float:
        return 2.0 * PI / self.omega

    @property
    def amplitude_exceeds_gap(self) -> bool:
        return self.A > self.b

    def rho(self, t: float) -> float:
        # grouped as 2A(1 + cos) + b so the closest approach returns b exactly
        return 2.0 * self.A * (1.0 + math.cos(self.omega * t)) + self.b


@dataclass(frozen=True)
class HarmonicTrajectory:
    """Separation history over one trap period."""

    A: float
    b: float
    omega: float

    @property
    def period(self) -> float:
        return 2.0 * PI / self.omega

    def rho(self, t):
        return 2.0 * self.A * (1.0 + np.cos(self.omega * np.asarray(t))) + self.b

    def __call__(self, t):
        return self.rho(t)


def harmonic_trajectories(cfg: HarmonicCollisionConfig) -> HarmonicTrajectory:
    return HarmonicTrajectory(cfg.A, cfg.b, cfg.omega)


def _harmonic_quad_points(cfg: HarmonicCollisionConfig) -> list[float]:
    t_close = PI / cfg.omega
    width = 30.0 * math.sqrt(cfg.b / cfg.A) / cfg.omega
    pts = [t_close - width, t_close, t_close + width]
    return [p for p in pts if 0.0 < p < cfg.period]


def harmonic_action_integrals(cfg: HarmonicCollisionConfig) -> tuple[float, float, float]:
    """(int V dt, int V' cos(wt) dt, int V' sin(wt) dt) over one period."""
    pts = _harmonic_quad_points(cfg)
    V = lambda t: cfg.potential.value(cfg.rho(t))
    dV = lambda t: cfg.potential.derivative(cfg.rho(t))
    action, _ = quad(V, 0.0, cfg.period, epsabs=0.0, epsrel=1e-11, limit=800, points=pts)
    cos_int, _ = quad(lambda t: dV(t) * math.cos(cfg.omega * t),
                      0.0, cfg.period, epsabs=0.0, epsrel=1e-11, limit=800, points=pts)
    sin_int, _ = quad(lambda t: dV(t) * math.sin(cfg.omega * t),
                      0.0, cfg.period, epsabs=max(1e-13 * abs(cos_int), 1e-300),
                      epsrel=1e-11, limit=800, points=pts)
    return action, cos_int, sin_int


def calibrate_coupling_harmonic(cfg: HarmonicCollisionConfig) -> float:
    """Coupling making (1/hbar) int V(rho(t)) dt over one period equal pi."""
    action, _, _ = harmonic_action_integrals(cfg)
    phase = action / cfg.hbar
    if not math.isfinite(phase) or phase <= 0.0:
        raise DegenerateConfigError(f"phase at current coupling is {phase!r}; cannot calibrate")
    return cfg.potential.coupling * PI / phase


def calibrated_harmonic(cfg: HarmonicCollisionConfig) -> HarmonicCollisionConfig:
    cstar = calibrate_coupling_harmonic(cfg)
    return replace(cfg, potential=cfg.potential.scaled(cstar / cfg.potential.coupling))


@dataclass(frozen=True)
class HarmonicVariance:
    """Leading-order phase variance and its ingredient integrals."""

    delta_sq: float
    cos_integral: float
    sin_integral: float
    dx0_sq: float


def error_variance_harmonic(cfg: HarmonicCollisionConfig) -> HarmonicVariance:
    """delta^2 = (2/hbar^2)(int V' cos wt dt)^2 dx0^2 with dx0^2 = e^{-2r} hbar/2 m w.

    Requires the coupling calibrated to phase pi.  The sin-weighted integral
    is computed alongside and must vanish (relative to the cos-weighted one)
    by the symmetry of the unperturbed trajectory; its failure to do so
    signals a broken trajectory and raises.
    """
    action, cos_int, sin_int = harmonic_action_integrals(cfg)
    phase = action / cfg.hbar
    if abs(phase - PI) > PHASE_CALIBRATION_TOL:
        raise ValueError(
            f"coupling not calibrated: accumulated phase {phase!r} (want pi); "
            "use calibrated_harmonic() first"
        )
    if abs(sin_int) > SIN_SYMMETRY_TOL * abs(cos_int):
        raise NumericalInconsistencyError(
            f"sin-weighted integral {sin_int!r} fails the symmetry contract "
            f"against cos-weighted {cos_int!r}"
        )
    dx0_sq = math.exp(-2.0 * cfg.squeeze_r) * cfg.hbar / (2.0 * cfg.m * cfg.omega)
    delta_sq = (2.0 / (cfg.hbar * cfg.hbar)) * cos_int * cos_int * dx0_sq
    return HarmonicVariance(delta_sq, cos_int, sin_int, dx0_sq)


def harmonic_constraint_ratio(cfg: HarmonicCollisionConfig) -> float:
    """R = |int V' cos(wt) dt| / |int V dt|; the coupling cancels."""
    action, cos_int, _ = harmonic_action_integrals(cfg)
    return abs(cos_int) / abs(action)


DIPOLE_RATIO_OFFSETS = (1e-2, 1e-3, 1e-4)


def dipole_leading_ratio(cfg: HarmonicCollisionConfig) -> float:
    """Limit of b * R(b) as b/A -> 0 for the rho^-3 interaction.

    Evaluated at b/A in {1e-2, 1e-3, 1e-4} and Richardson-extrapolated in
    the leading integer powers of b/A; the limit is 5/2.
    """
    if cfg.potential.kind != "power_law" or cfg.potential.n != 3:
        raise ValueError("dipole ratio defined for the rho^-3 power law")
    vals = []
    for frac in DIPOLE_RATIO_OFFSETS:
        probe = replace(cfg, b=frac * cfg.A)
        vals.append(probe.b * harmonic_constraint_ratio(probe))
    if not abs(vals[2] - vals[1]) < abs(vals[1] - vals[0]):
        raise NumericalInconsistencyError(f"dipole ratio sequence not converging: {vals}")
    f21 = (10.0 * vals[1] - vals[0]) / 9.0
    f32 = (10.0 * vals[2] - vals[1]) / 9.0
    return (100.0 * f32 - f21) / 99.0


def harmonic_energy_bound(cfg: HarmonicCollisionConfig, epsilon: float) -> BoundReport:
    """Oscillator-pair energy m w^2 A^2 against hbar/(eps T) with T = 2 pi / w."""
    if cfg.potential.kind != "power_law" or cfg.potential.n != 3:
        raise ValueError("the harmonic chain is evaluated for the rho^-3 power law")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    hv = error_variance_harmonic(cfg)
    T = cfg.period
    energy = cfg.m * cfg.omega ** 2 * cfg.A ** 2
    bound = cfg.hbar / (epsilon * T)
    meta = {
        "epsilon": epsilon,
        "epsilon_unphysical": epsilon >= 1.0,
        "error_within_epsilon": hv.delta_sq <= epsilon,
        "amplitude_exceeds_gap": cfg.amplitude_exceeds_gap,
        "per_oscillator_energy": energy / 2.0,
        "delta_sq": hv.delta_sq,
        "interaction_time": T,
    }
    return BoundReport(
        energy=energy,
        bound=bound,
        satisfied=bound_satisfied(energy, bound),
        phase=PI,
        error=hv.delta_sq,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# classical return mismatch
# ---------------------------------------------------------------------------

class ReturnMismatch(NamedTuple):
    dx: float
    dp: float


def classical_return_mismatch(cfg: HarmonicCollisionConfig,
                              rtol: float = 1e-10) -> ReturnMismatch:
    """Deviation of the perturbed classical trajectory from its return point.

    Both particles are integrated over one period (trap force plus the
    mutual potential) from rest at the outer turning points; the returned
    numbers are particle 2's position and momentum deviation at t = 2 pi/w
    (particle 1 mirrors them).  The momentum deviation is first order in the
    coupling; the position deviation is second order because its first-order
    response is the sin-weighted integral that vanishes by symmetry.
    """
    m, w, A, b = cfg.m, cfg.omega, cfg.A, cfg.b
    eq = A + b / 2.0
    pot = cfg.potential

    def rhs(t, y):
        x1, v1, x2, v2 = y
        rho = x2 - x1
        f_int = -pot.derivative(rho)  # force on particle 2; reaction on 1
        return [v1, -w * w * (x1 + eq) - f_int / m, v2, -w * w * (x2 - eq) + f_int / m]

    y0 = [-(2.0 * A + b / 2.0), 0.0, 2.0 * A + b / 2.0, 0.0]
    scale = max(A, 1.0)
    sol = solve_ivp(
        rhs, (0.0, cfg.period), y0, method="DOP853",
        rtol=rtol, atol=[scale * 1e-13, scale * w * 1e-13] * 2,
    )
    if not sol.success:
        raise IntegrationError("classical trajectory integration failed",
                               {"message": sol.message, "t_reached": float(sol.t[-1])})
    yT = sol.y[:, -1]
    return ReturnMismatch(dx=float(yT[2] - y0[2]), dp=float(m * yT[3]))


def mismatch_norm(mm: ReturnMismatch, cfg: HarmonicCollisionConfig) -> float:
    """Phase-space distance sqrt(dx^2 + (dp/m w)^2) from the return point."""
    return math.hypot(mm.dx, mm.dp / (cfg.m * cfg.omega))


def trap_energy_drift(cfg: HarmonicCollisionConfig, rtol: float = 1e-10) -> float:
    """Relative energy drift of the C = 0 (trap-only) integration; sanity check."""
    m, w, A, b = cfg.m, cfg.omega, cfg.A, cfg.b
    eq = A + b / 2.0

    def rhs(t, y):
        x1, v1, x2, v2 = y
        return [v1, -w * w * (x1 + eq), v2, -w * w * (x2 - eq)]

    y0 = [-(2.0 * A + b / 2.0), 0.0, 2.0 * A + b / 2.0, 0.0]
    sol = solve_ivp(rhs, (0.0, cfg.period), y0, method="DOP853",
                    rtol=rtol, atol=[A * 1e-13, A * w * 1e-13] * 2)
    if not sol.success:
        raise IntegrationError("trap-only integration failed", {"message": sol.message})

    def energy(y):
        x1, v1, x2, v2 = y
        return 0.5 * m * (v1 * v1 + v2 * v2) + 0.5 * m * w * w * ((x1 + eq) ** 2 + (x2 - eq) ** 2)

    e0 = energy(y0)
    return abs(energy(sol.y[:, -1]) - e0) / e0


@dataclass(frozen=True)
class SqueezingProbe:
    """Self-consistency diagnostic for squeezing the trapped wavepackets.

    ``delta_sq_leading`` is the first-order variance with its e^{-2r}
    reduction.  ``momentum_mismatch`` measures the classical return
    mismatch against the anti-squeezed momentum variance,
    dp_return^2 e^{2r} / (m w hbar); the neglected expansion terms enter at
    its square, so ``second_order_proxy`` = momentum_mismatch^2.  The probe
    flags when the proxy exceeds 10% of the leading term: the regime where
    the leading-order treatment is no longer self-consistent.
    """

    delta_sq_leading: float
    momentum_mismatch: float
    second_order_proxy: float
    flagged: bool
    dx_return: float
    dp_return: float


SECOND_ORDER_FLAG_FRACTION = 0.1


def squeezing_consistency_probe(cfg: HarmonicCollisionConfig,
                                epsilon: float) -> SqueezingProbe:
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    hv = error_variance_harmonic(cfg)
    mm = classical_return_mismatch(cfg)
    amplification = math.exp(2.0 * cfg.squeeze_r)
    momentum_mismatch = mm.dp ** 2 * amplification / (cfg.m * cfg.omega * cfg.hbar)
    proxy = momentum_mismatch ** 2
    return SqueezingProbe(
        delta_sq_leading=hv.delta_sq,
        momentum_mismatch=momentum_mismatch,
        second_order_proxy=proxy,
        flagged=proxy > SECOND_ORDER_FLAG_FRACTION * hv.delta_sq,
        dx_return=mm.dx,
        dp_return=mm.dp,
    )
