"""Command-line front end: studies, sweeps and artifact emission.

Every run writes ``result.csv`` (RFC-4180, one unit-labelled column per
quantity) and ``report.json`` (stable key order) into the output directory;
``--plot`` adds ``plot.svg``.  ``verify-all`` executes the acceptance
criteria and writes ``verification.csv``.  Outputs are written to a
temporary name and renamed, so no partial artifact is ever visible.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import collision, gate, heuristic, pulses
from ._svg import line_plot
from .envelopes import ENVELOPES
from .errors import (
    CutoffError,
    DegenerateConfigError,
    DimensionMismatchError,
    IntegrationError,
    NumericalInconsistencyError,
    SamplingError,
    UncertaintyError,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
HBAR_SI = 1.054571817e-34  # J*s

VALIDATION_ERRORS = (ValueError, CutoffError, DimensionMismatchError, UncertaintyError,
                     KeyError, TypeError)
NUMERICAL_ERRORS = (IntegrationError, NumericalInconsistencyError, SamplingError,
                    DegenerateConfigError, IndexError, ArithmeticError)


class CliValidationError(Exception):
    pass


@dataclass(frozen=True)
class UnitContext:
    natural: bool
    hbar: float

    @property
    def energy_unit(self) -> str:
        return "hbar_rad_per_s" if self.natural else "J"

    @property
    def mech_unit(self) -> str:
        return "nat" if self.natural else "si"


def make_units(name: str) -> UnitContext:
    if name == "natural":
        return UnitContext(True, 1.0)
    if name == "si":
        return UnitContext(False, HBAR_SI)
    raise CliValidationError(f"unknown unit system {name!r}")


# ---------------------------------------------------------------------------
# parameter parsing
# ---------------------------------------------------------------------------

def parse_int_list(text: str) -> list[int]:
    """'1..6' or '1,2,5'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def parse_complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


@dataclass(frozen=True)
class Param:
    name: str
    kind: Callable
    help: str
    default: Any = None
    required: bool = False
    choices: tuple | None = None


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    params: tuple[Param, ...]
    run: Callable
    columns_doc: str
    plot: tuple[str, str, bool, bool] | None = None  # xkey, ykey, logx, logy


def _merge_params(command: Command, cli_values: dict, config_params: dict) -> dict:
    merged = {}
    known = {p.name for p in command.params}
    for source in (config_params, cli_values):
        for key in source:
            if key not in known:
                raise CliValidationError(
                    f"unknown parameter {key!r} for command {command.name!r}")
    for p in command.params:
        raw = cli_values.get(p.name)
        if raw is None and p.name in config_params:
            raw = config_params[p.name]
            if isinstance(raw, str):
                raw = p.kind(raw)
            elif p.kind is float and isinstance(raw, (int, float)):
                raw = float(raw)
        if raw is None:
            if p.required:
                raise CliValidationError(f"missing required parameter --{p.name} for {command.name!r}")
            raw = p.default
        if raw is not None and p.choices and raw not in p.choices:
            raise CliValidationError(f"--{p.name} must be one of {p.choices}")
        merged[p.name] = raw
    return merged


# ---------------------------------------------------------------------------
# command implementations: each returns (columns, rows, extra)
# columns: list of (row key, csv header with unit); rows: list of dicts
# ---------------------------------------------------------------------------

def cmd_counterexample(params, ctx: UnitContext, seed: int):
    columns = [
        ("n", "n"),
        ("g", "g_rad_per_s"),
        ("duration", "duration_s"),
        ("p", "failure_probability"),
        ("phase_residual", "phase_residual_hbar"),
        ("sw_start", f"switch_residual_start_{ctx.energy_unit}_sq"),
        ("sw_end", f"switch_residual_end_{ctx.energy_unit}_sq"),
        # control energy reported relative to the H0 ground state (the zero
        # of energy is otherwise ambiguous)
        ("energy_above_ground", f"control_energy_above_ground_{ctx.energy_unit}"),
    ]
    rows = []
    for n in params["n"]:
        outcome = gate.counterexample_always_on(n, params["g"], params["cutoff"], params["omega"])
        rows.append({
            "n": n,
            "g": params["g"],
            "duration": math.pi / (params["g"] * n),
            "p": outcome.failure_probability,
            "phase_residual": outcome.phase_residual,
            "sw_start": outcome.switch_residual_start,
            "sw_end": outcome.switch_residual_end,
            "energy_above_ground": ctx.hbar * params["omega"] * n,
        })
    return columns, rows, {}


def cmd_gate_sim(params, ctx: UnitContext, seed: int):
    alpha = parse_complex(str(params["alpha"])) if not isinstance(params["alpha"], complex) else params["alpha"]
    envelope = ENVELOPES[params["envelope"]](params["duration"])
    drive = gate.pi_phase_drive(envelope, alpha)
    scenario = gate.coherent_drive_scenario(alpha, drive, omega=params["omega"])
    exact = gate.failure_probability_exact(scenario, params["tol"])
    oracle = gate.displacement_oracle(alpha, drive)
    p_hat = gate.failure_probability_perturbative(scenario, params["quad_tol"])
    columns = [
        ("alpha_abs", "alpha_abs"),
        ("alpha_sq", "alpha_sq"),
        ("p_exact", "p_exact"),
        ("p_oracle", "p_oracle"),
        ("p_perturbative", "p_perturbative"),
        ("p_times_alpha_sq", "p_times_alpha_sq"),
        ("phase_residual", "phase_residual_hbar"),
        ("oracle_diff", "oracle_abs_diff"),
        ("sw_start", f"switch_residual_start_{ctx.energy_unit}_sq"),
        ("sw_end", f"switch_residual_end_{ctx.energy_unit}_sq"),
    ]
    row = {
        "alpha_abs": abs(alpha),
        "alpha_sq": abs(alpha) ** 2,
        "p_exact": exact.failure_probability,
        "p_oracle": oracle.failure_probability,
        "p_perturbative": p_hat,
        "p_times_alpha_sq": exact.failure_probability * abs(alpha) ** 2,
        "phase_residual": exact.phase_residual,
        "oracle_diff": abs(exact.failure_probability - oracle.failure_probability),
        "sw_start": exact.switch_residual_start,
        "sw_end": exact.switch_residual_end,
    }
    extra = {"inner": [exact.inner.real, exact.inner.imag], "cutoff": scenario.control.cutoff}
    return columns, [row], extra


def _report_columns(ctx: UnitContext):
    return [
        ("phase", "phase_rad"),
        ("error", "error_dimensionless"),
        ("photon_number", "photon_number"),
        ("mean_omega", "mean_omega_rad_per_s"),
        ("energy", f"energy_{ctx.energy_unit}"),
        ("bound", f"bound_{ctx.energy_unit}"),
        ("ratio", "energy_over_bound"),
        ("satisfied", "satisfied"),
    ]


def _report_row(report) -> dict:
    return {
        "phase": report.phase,
        "error": report.error,
        "photon_number": report.photon_number,
        "mean_omega": report.mean_omega,
        "energy": report.energy,
        "bound": report.bound,
        "ratio": report.ratio,
        "satisfied": report.satisfied,
    }


def cmd_pulse_bound(params, ctx: UnitContext, seed: int):
    epsilon = params["epsilon"]
    columns = [("kind", "construction")] + _report_columns(ctx)
    eq = pulses.single_mode_equality_pulse(epsilon, params["omega"])
    eq_report = pulses.energy_bound_check(eq, epsilon, ctx.hbar)
    best = pulses.adversarial_pulse_search(
        epsilon, params["n_modes"], params["budget"], seed, hbar=ctx.hbar)
    rows = [
        {"kind": "single-mode-equality", **_report_row(eq_report)},
        {"kind": "adversarial-best", **_report_row(best)},
    ]
    extra = {"reports": [eq_report.to_dict(), best.to_dict()]}
    return columns, rows, extra


def cmd_squeeze_opt(params, ctx: UnitContext, seed: int):
    epsilon = params["epsilon"]
    omega = params["omega"]
    r_star, e_min = pulses.optimize_squeezing(epsilon, omega, ctx.hbar)
    r_num, e_num = pulses.squeezing_optimum_numeric(epsilon, omega, ctx.hbar)
    columns = [
        ("epsilon", "epsilon"),
        ("omega", "omega_rad_per_s"),
        ("r_star", "r_star"),
        ("e_min", f"e_min_{ctx.energy_unit}"),
        ("e_min_over_hw", "e_min_over_hbar_omega"),
        ("numeric_rel_diff", "numeric_rel_diff"),
    ]
    row = {
        "epsilon": epsilon,
        "omega": omega,
        "r_star": r_star,
        "e_min": e_min,
        "e_min_over_hw": e_min / (ctx.hbar * omega),
        "numeric_rel_diff": abs(e_num - e_min) / e_min,
    }
    extra: dict[str, Any] = {
        "r_numeric": r_num,
        # the energy expression counts the squeezed-mode quanta as e^{2r};
        # the exact squeezed-vacuum occupation would be sinh^2(r)
        "squeezed_photon_term": math.exp(2.0 * r_star),
        "squeezed_vacuum_occupation": math.sinh(r_star) ** 2,
    }
    if params["gate_time"] is not None:
        lw = pulses.linewidth_combined_bound(params["gate_time"], epsilon, ctx.hbar)
        columns += [
            ("omega_min", "linewidth_omega_min_rad_per_s"),
            ("combined_bound", f"combined_bound_{ctx.energy_unit}"),
            ("combined_bound_quoted", f"combined_bound_quoted_{ctx.energy_unit}"),
        ]
        row.update(omega_min=lw.omega_min, combined_bound=lw.bound,
                   combined_bound_quoted=lw.bound_quoted)
    return columns, [row], extra


def cmd_nonlinear_bound(params, ctx: UnitContext, seed: int):
    epsilon = params["epsilon"]
    window = (0.0, params["duration"])
    envelope = ENVELOPES[params["envelope"]](params["duration"])
    modes = [(params["omega"], parse_complex(str(params["weight"])))]
    alphas = [parse_complex(str(params["alpha"]))]
    reduction = pulses.nonlinear_reduce(params["p_power"], envelope, window, modes)
    report = pulses.nonlinear_bound_check(reduction, alphas, epsilon, ctx.hbar)
    linear = pulses.nonlinear_reduce(1, envelope, window, modes)
    linear_report = pulses.nonlinear_bound_check(linear, alphas, epsilon, ctx.hbar)
    columns = [
        ("p_power", "p_power"),
        ("coeff_abs", "effective_coefficient_abs"),
    ] + _report_columns(ctx) + [("bound_over_linear", "bound_over_linear")]
    row = {
        "p_power": params["p_power"],
        "coeff_abs": abs(reduction.coefficients[0][1]),
        **_report_row(report),
        "bound_over_linear": report.bound / linear_report.bound,
    }
    return columns, [row], {"linear_report": linear_report.to_dict()}


def cmd_collision_free(params, ctx: UnitContext, seed: int):
    pot = collision.PotentialLaw.power_law(params["n"])
    cfg = collision.FreeCollisionConfig(
        m=params["m"], v=params["v"], b=params["b"], T=params["duration"],
        potential=pot, hbar=ctx.hbar)
    cfg = collision.calibrated(cfg)
    report = collision.free_energy_bound(cfg, params["epsilon"])
    columns = [
        ("m", f"mass_{'kg' if not ctx.natural else 'nat'}"),
        ("v", f"speed_{'m_per_s' if not ctx.natural else 'nat'}"),
        ("b", f"impact_parameter_{'m' if not ctx.natural else 'nat'}"),
        ("duration", "duration_s"),
        ("n", "power_law_n"),
        ("coupling", "calibrated_coupling"),
    ] + _report_columns(ctx)
    row = {
        "m": params["m"], "v": params["v"], "b": params["b"],
        "duration": params["duration"], "n": params["n"],
        "coupling": cfg.potential.coupling,
        **_report_row(report),
    }
    return columns, [row], {"report": report.to_dict()}


def cmd_collision_harmonic(params, ctx: UnitContext, seed: int):
    pot = collision.PotentialLaw.power_law(3.0)
    cfg = collision.HarmonicCollisionConfig(
        m=params["m"], omega=params["omega"], A=params["amplitude"], b=params["gap"],
        potential=pot, squeeze_r=params["squeeze_r"], hbar=ctx.hbar)
    cfg = collision.calibrated_harmonic(cfg)
    hv = collision.error_variance_harmonic(cfg)
    report = collision.harmonic_energy_bound(cfg, params["epsilon"])
    probe = collision.squeezing_consistency_probe(cfg, params["epsilon"])
    ratio = collision.harmonic_constraint_ratio(cfg)
    columns = [
        ("m", f"mass_{'kg' if not ctx.natural else 'nat'}"),
        ("omega", "trap_omega_rad_per_s"),
        ("amplitude", f"amplitude_{'m' if not ctx.natural else 'nat'}"),
        ("gap", f"gap_{'m' if not ctx.natural else 'nat'}"),
        ("squeeze_r", "squeeze_r"),
        ("coupling", "calibrated_coupling"),
        ("sin_cos_ratio", "sin_over_cos_integral"),
        ("gap_times_ratio", "gap_times_constraint_ratio"),
        ("second_order_flag", "second_order_flag"),
    ] + _report_columns(ctx)
    row = {
        "m": params["m"], "omega": params["omega"], "amplitude": params["amplitude"],
        "gap": params["gap"], "squeeze_r": params["squeeze_r"],
        "coupling": cfg.potential.coupling,
        "sin_cos_ratio": abs(hv.sin_integral) / abs(hv.cos_integral),
        "gap_times_ratio": cfg.b * ratio,
        "second_order_flag": probe.flagged,
        **_report_row(report),
    }
    extra = {
        "report": report.to_dict(),
        "probe": {
            "delta_sq_leading": probe.delta_sq_leading,
            "momentum_mismatch": probe.momentum_mismatch,
            "second_order_proxy": probe.second_order_proxy,
            "flagged": probe.flagged,
        },
    }
    return columns, [row], extra


def cmd_return_mismatch(params, ctx: UnitContext, seed: int):
    pot = collision.PotentialLaw.power_law(params["n"])
    cfg = collision.HarmonicCollisionConfig(
        m=params["m"], omega=params["omega"], A=params["amplitude"], b=params["gap"],
        potential=pot, hbar=ctx.hbar)
    cfg = collision.calibrated_harmonic(cfg)
    full = collision.classical_return_mismatch(cfg)
    half_cfg = collision.HarmonicCollisionConfig(
        m=cfg.m, omega=cfg.omega, A=cfg.A, b=cfg.b,
        potential=cfg.potential.scaled(0.5), hbar=ctx.hbar)
    half = collision.classical_return_mismatch(half_cfg)
    norm_full = collision.mismatch_norm(full, cfg)
    norm_half = collision.mismatch_norm(half, half_cfg)
    columns = [
        ("coupling", "calibrated_coupling"),
        ("dx_return", f"dx_return_{'m' if not ctx.natural else 'nat'}"),
        ("dp_return", f"dp_return_{'kg_m_per_s' if not ctx.natural else 'nat'}"),
        ("norm", "phase_space_mismatch"),
        ("halving_ratio", "mismatch_ratio_full_over_half"),
        ("dx_halving_ratio", "dx_ratio_full_over_half"),
    ]
    row = {
        "coupling": cfg.potential.coupling,
        "dx_return": full.dx,
        "dp_return": full.dp,
        "norm": norm_full,
        "halving_ratio": norm_full / norm_half,
        "dx_halving_ratio": full.dx / half.dx if half.dx != 0 else math.inf,
    }
    return columns, [row], {"half": {"dx": half.dx, "dp": half.dp}}


def cmd_heuristic(params, ctx: UnitContext, seed: int):
    cfg = heuristic.HeuristicConfig(
        m=params["m"], L=params["length"], T=params["duration"],
        epsilon=params["epsilon"], dx=params["dx"], dp=params["dp"], hbar=ctx.hbar)
    delta = heuristic.displacement_estimates(cfg)
    report = heuristic.heuristic_energy_bound(cfg)
    columns = [
        ("delta_x", f"delta_x_{'m' if not ctx.natural else 'nat'}"),
        ("delta_p", f"delta_p_{'kg_m_per_s' if not ctx.natural else 'nat'}"),
        ("misoverlap", "misoverlap"),
        ("misoverlap_optimal", "misoverlap_optimal"),
    ] + _report_columns(ctx)
    row = {
        "delta_x": delta.delta_x,
        "delta_p": delta.delta_p,
        "misoverlap": heuristic.misoverlap(cfg),
        "misoverlap_optimal": heuristic.misoverlap_optimal(cfg),
        **_report_row(report),
    }
    return columns, [row], {"report": report.to_dict()}


COMMANDS: dict[str, Command] = {}


def _register(cmd: Command):
    COMMANDS[cmd.name] = cmd


_register(Command(
    "counterexample", "always-on interaction family reaching p = 0",
    (
        Param("n", parse_int_list, "number-state indices, e.g. 1..6 or 1,3,5", default=[1, 2, 3, 4, 5, 6]),
        Param("g", float, "coupling strength (rad/s)", default=1.0),
        Param("omega", float, "oscillator frequency (rad/s)", default=1.0),
        Param("cutoff", int, "basis size (default n+2)"),
    ),
    cmd_counterexample,
    "columns: n, g_rad_per_s, duration_s, failure_probability, phase_residual_hbar, switch residuals",
    plot=("n", "p", False, False),
))
_register(Command(
    "gate-sim", "coherent-control linear-drive gate: exact, oracle and perturbative p",
    (
        Param("alpha", str, "coherent amplitude (complex ok)", required=True),
        Param("envelope", str, "drive envelope", default="raised-cosine",
              choices=tuple(ENVELOPES)),
        Param("duration", float, "gate time (s)", default=1.0),
        Param("tol", float, "propagation tolerance", default=1e-9),
        Param("quad_tol", float, "perturbative quadrature tolerance", default=1e-10),
        Param("omega", float, "control self-frequency (rad/s)", default=1.0),
    ),
    cmd_gate_sim,
    "columns: alpha_abs, alpha_sq, p_exact, p_oracle, p_perturbative, p_times_alpha_sq, ...",
    plot=("alpha_sq", "p_exact", True, True),
))
_register(Command(
    "pulse-bound", "field-pulse energy bound: equality construction + adversarial search",
    (
        Param("epsilon", float, "error budget in (0,1)", required=True),
        Param("n_modes", int, "modes in the adversarial search", default=1),
        Param("budget", int, "search evaluations", default=400),
        Param("omega", float, "frequency of the equality construction (rad/s)", default=1.0),
    ),
    cmd_pulse_bound,
    "columns: construction, phase_rad, error, photon_number, mean_omega, energy, bound, ratio, satisfied",
    plot=("error", "energy", True, True),
))
_register(Command(
    "squeeze-opt", "squeezed-field optimum and carrier-linewidth combination",
    (
        Param("epsilon", float, "error budget in (0,1]", required=True),
        Param("omega", float, "carrier frequency (rad/s)", default=1.0),
        Param("gate_time", float, "gate time for the linewidth combination (s)"),
    ),
    cmd_squeeze_opt,
    "columns: epsilon, omega_rad_per_s, r_star, e_min, e_min_over_hbar_omega, ...",
    plot=("epsilon", "e_min", True, True),
))
_register(Command(
    "nonlinear-bound", "power-p coupling reduced to an effective linear problem",
    (
        Param("p_power", int, "coupling power p >= 1", required=True),
        Param("epsilon", float, "error budget in (0,1)", required=True),
        Param("omega", float, "mode frequency (rad/s)", default=1.0),
        Param("weight", str, "mode weight (complex ok)", default="1.0"),
        Param("alpha", str, "mode amplitude (complex ok)", default="1.0"),
        Param("envelope", str, "mean-field envelope", default="raised-cosine",
              choices=tuple(ENVELOPES)),
        Param("duration", float, "window length (s)", default=1.0),
    ),
    cmd_nonlinear_bound,
    "columns: p_power, effective_coefficient_abs, phase_rad, error, energy, bound, bound_over_linear",
    plot=("p_power", "bound", False, True),
))
_register(Command(
    "collision-free", "free-particle collision chain with calibrated coupling",
    (
        Param("m", float, "particle mass", required=True),
        Param("v", float, "CM-frame transverse speed", required=True),
        Param("b", float, "impact parameter", required=True),
        Param("duration", float, "interaction window T (s)", required=True),
        Param("n", float, "power-law exponent (> 1)", default=2.0),
        Param("epsilon", float, "error budget in (0,1)", required=True),
    ),
    cmd_collision_free,
    "columns: mass, speed, impact_parameter, duration_s, power_law_n, calibrated_coupling, phase, error, energy, bound, ...",
    plot=("b", "energy", False, True),
))
_register(Command(
    "collision-harmonic", "trapped-oscillator collision chain (rho^-3)",
    (
        Param("m", float, "particle mass", required=True),
        Param("omega", float, "trap frequency (rad/s)", required=True),
        Param("amplitude", float, "oscillation amplitude A", required=True),
        Param("gap", float, "closest distance b", required=True),
        Param("epsilon", float, "error budget in (0,1)", required=True),
        Param("squeeze_r", float, "position squeezing parameter", default=0.0),
    ),
    cmd_collision_harmonic,
    "columns: mass, trap_omega, amplitude, gap, squeeze_r, calibrated_coupling, sin_over_cos, gap_times_constraint_ratio, ...",
    plot=("gap", "energy", False, True),
))
_register(Command(
    "return-mismatch", "classical perturbed-trajectory return deviation",
    (
        Param("m", float, "particle mass", required=True),
        Param("omega", float, "trap frequency (rad/s)", required=True),
        Param("amplitude", float, "oscillation amplitude A", required=True),
        Param("gap", float, "closest distance b", required=True),
        Param("n", float, "power-law exponent (> 1)", default=3.0),
    ),
    cmd_return_mismatch,
    "columns: calibrated_coupling, dx_return, dp_return, phase_space_mismatch, mismatch_ratio_full_over_half, dx_ratio",
    plot=("coupling", "norm", False, True),
))
_register(Command(
    "heuristic", "single-particle back-of-envelope energy bound",
    (
        Param("m", float, "particle mass", required=True),
        Param("length", float, "characteristic length L", required=True),
        Param("duration", float, "gate time T (s)", required=True),
        Param("epsilon", float, "error budget in (0,1)", required=True),
        Param("dx", float, "explicit position width (optional)"),
        Param("dp", float, "explicit momentum width (optional)"),
    ),
    cmd_heuristic,
    "columns: delta_x, delta_p, misoverlap, misoverlap_optimal, energy, bound, ratio, satisfied",
    plot=("duration", "bound", False, True),
))


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _csv_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def rows_to_csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([label for _, label in columns])
    for row in rows:
        writer.writerow([_csv_value(row.get(key)) for key, _ in columns])
    return buf.getvalue().encode("utf-8")


def atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class _JsonEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def report_json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2, cls=_JsonEncoder) + "\n").encode("utf-8")


def write_plot(path: Path, command: Command, columns, rows) -> bool:
    if command.plot is None or not rows:
        return False
    xkey, ykey, logx, logy = command.plot
    keys = {key for key, _ in columns}
    if xkey not in keys or ykey not in keys:
        return False
    labels = dict(columns)
    xs = [row.get(xkey) for row in rows]
    ys = [row.get(ykey) for row in rows]
    svg = line_plot(xs, ys, labels[xkey], labels[ykey],
                    f"gatebound {command.name}", logx, logy)
    atomic_write(path, svg.encode("utf-8"))
    return True


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def derived_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def run_sweep(command_name: str, base_params: dict, axis: str, values: list,
              parallelism: int, seed: int, ctx: UnitContext):
    """Run a command across axis values; rows ordered by the values list."""
    command = COMMANDS[command_name]
    kinds = {p.name: p.kind for p in command.params}
    if axis not in kinds:
        raise CliValidationError(f"axis {axis!r} is not a parameter of {command_name!r}")

    def run_point(index_value):
        index, value = index_value
        point = dict(base_params)
        point[axis] = int(value) if kinds[axis] is int else value
        try:
            merged = _merge_params(command, point, {})
            columns, rows, _ = command.run(merged, ctx, derived_seed(seed, index))
            return index, columns, rows, None
        except NUMERICAL_ERRORS + VALIDATION_ERRORS as exc:  # keep other points alive
            return index, None, None, type(exc).__name__

    tasks = list(enumerate(values))
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run_point, tasks))
    else:
        results = [run_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    point_columns = None
    for _, columns, _, err in results:
        if err is None:
            point_columns = columns
            break
    if point_columns is None:
        point_columns = []
    out_columns = [("_axis", f"{axis}_value"), ("_status", "status")] + list(point_columns)
    out_rows = []
    any_failed = False
    for index, columns, rows, err in results:
        if err is not None:
            any_failed = True
            out_rows.append({"_axis": values[index], "_status": f"error:{err}"})
        else:
            for row in rows:
                out_rows.append({"_axis": values[index], "_status": "ok", **row})
    return out_columns, out_rows, any_failed


def sweep_rows_csv_bytes(command_name: str, base_params: dict, axis: str,
                         values: list, parallelism: int, seed: int,
                         units: str = "natural") -> bytes:
    """CSV bytes of a sweep; used to assert parallelism-independence."""
    ctx = make_units(units)
    columns, rows, _ = run_sweep(command_name, base_params, axis, values, parallelism, seed, ctx)
    return rows_to_csv_bytes(columns, rows)


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatebound",
        description="Energy bounds for quantum-gate control systems: "
                    "simulations, bound checks, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, help="JSON config file (flags override it)")
        p.add_argument("--output", type=str, default="gatebound_out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--plot", action="store_true", help="also write plot.svg")
        p.add_argument("--units", choices=("natural", "si"), default="natural")

    for cmd in COMMANDS.values():
        p = sub.add_parser(cmd.name, help=cmd.help, description=f"{cmd.help}. {cmd.columns_doc}")
        add_common(p)
        for param in cmd.params:
            flag = "--" + param.name.replace("_", "-")
            if param.kind in (parse_int_list, parse_float_list):
                p.add_argument(flag, type=param.kind, default=None, help=param.help)
            else:
                p.add_argument(flag, type=param.kind, default=None, help=param.help)

    p = sub.add_parser("run", help="run the command named in a JSON config file")
    add_common(p)

    p = sub.add_parser(
        "sweep",
        help="run a base command across one parameter axis",
        description="Aggregated CSV: one block of rows per axis value, ordered by the "
                    "values list; failed points carry status error:<kind>.",
    )
    add_common(p)
    p.add_argument("--command", dest="base_command", type=str, default=None,
                   help="base command to sweep (or put it in --config)")
    p.add_argument("--axis", type=str, default=None, help="parameter to vary")
    p.add_argument("--values", type=parse_float_list, default=None, help="comma-separated values")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--param", action="append", default=[],
                   help="base parameter as key=value (repeatable)")

    p = sub.add_parser(
        "verify-all",
        help="run the acceptance criteria end-to-end",
        description="Writes verification.csv with one row per criterion "
                    "(criterion, value, tolerance, passed, detail, runtime_s).",
    )
    add_common(p)
    p.add_argument("--criteria", type=parse_int_list, default=None,
                   help="criteria subset, e.g. 1..6 or 1,5,9 (default all)")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every tolerance (use < 1 to inject controlled failures)")
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise CliValidationError("config file must contain a JSON object")
    return cfg


def _collect_cli_params(command: Command, args: argparse.Namespace) -> dict:
    return {p.name: getattr(args, p.name, None) for p in command.params}


def _run_single(command: Command, params: dict, args, ctx: UnitContext) -> int:
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    columns, rows, extra = command.run(params, ctx, args.seed)
    atomic_write(out_dir / "result.csv", rows_to_csv_bytes(columns, rows))
    payload = {
        "command": command.name,
        "params": {k: (str(v) if isinstance(v, complex) else v) for k, v in params.items()},
        "seed": args.seed,
        "units": "natural" if ctx.natural else "si",
        "columns": [label for _, label in columns],
        "rows": rows,
        "extra": extra,
    }
    atomic_write(out_dir / "report.json", report_json_bytes(payload))
    if args.plot:
        write_plot(out_dir / "plot.svg", command, columns, rows)
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    ctx = make_units(config.get("units", args.units) if args.units == "natural" else args.units)

    name = args.command
    if name == "run":
        name = config.get("command")
        if not name or name not in COMMANDS:
            raise CliValidationError("config file must name a valid 'command' for `run`")
        command = COMMANDS[name]
        params = _merge_params(command, {}, config.get("params", {}))
        return _run_single(command, params, args, ctx)

    if name == "sweep":
        base_name = args.base_command or config.get("command")
        if not base_name or base_name not in COMMANDS:
            raise CliValidationError("sweep needs --command naming a valid base command")
        axis = args.axis or config.get("axis")
        values = args.values if args.values is not None else config.get("values")
        if not axis or not values:
            raise CliValidationError("sweep needs --axis and --values")
        parallelism = max(1, args.parallelism)
        base_params = dict(config.get("params", {}))
        for item in args.param:
            if "=" not in item:
                raise CliValidationError(f"--param expects key=value, got {item!r}")
            key, val = item.split("=", 1)
            base_params[key] = val
        base_command = COMMANDS[base_name]
        kinds = {p.name: p.kind for p in base_command.params}
        for key in list(base_params):
            if key in kinds and isinstance(base_params[key], str):
                base_params[key] = kinds[key](base_params[key])
        columns, rows, any_failed = run_sweep(
            base_name, base_params, axis, values, parallelism, args.seed, ctx)
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        atomic_write(out_dir / "result.csv", rows_to_csv_bytes(columns, rows))
        payload = {
            "command": "sweep",
            "base_command": base_name,
            "axis": axis,
            "values": values,
            "parallelism": parallelism,
            "seed": args.seed,
            "units": "natural" if ctx.natural else "si",
            "columns": [label for _, label in columns],
            "rows": rows,
        }
        atomic_write(out_dir / "report.json", report_json_bytes(payload))
        if args.plot and rows:
            base = COMMANDS[base_name]
            if base.plot is not None:
                _, ykey, _, logy = base.plot
                ok_rows = [r for r in rows if r.get("_status") == "ok" and ykey in r]
                labels = dict(columns)
                svg = line_plot(
                    [r["_axis"] for r in ok_rows], [r[ykey] for r in ok_rows],
                    labels["_axis"], labels.get(ykey, ykey),
                    f"gatebound sweep {base_name}", True, logy)
                atomic_write(out_dir / "plot.svg", svg.encode("utf-8"))
        return EXIT_NUMERICAL if any_failed else EXIT_OK

    if name == "verify-all":
        from .verify import run_criteria

        numbers = args.criteria
        results = run_criteria(numbers, args.tolerance_scale)
        # wall times go to stdout only: artifacts must be byte-deterministic
        columns = [
            ("criterion", "criterion"),
            ("value", "value"),
            ("tolerance", "tolerance"),
            ("passed", "passed"),
            ("detail", "detail"),
        ]
        rows = [{
            "criterion": r.criterion, "value": r.value, "tolerance": r.tolerance,
            "passed": r.passed, "detail": r.detail,
        } for r in results]
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        atomic_write(out_dir / "verification.csv", rows_to_csv_bytes(columns, rows))
        payload = {
            "command": "verify-all",
            "tolerance_scale": args.tolerance_scale,
            "rows": rows,
            "all_passed": all(r.passed for r in results),
        }
        atomic_write(out_dir / "report.json", report_json_bytes(payload))
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL

    command = COMMANDS[name]
    params = _merge_params(command, _collect_cli_params(command, args), config.get("params", {}))
    return _run_single(command, params, args, ctx)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except CliValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        diag = getattr(exc, "diagnostics", None)
        print(f"numerical failure: {exc}" + (f" {diag}" if diag else ""), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
