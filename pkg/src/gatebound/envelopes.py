"""Analytic drive envelopes with exact endpoint zeros.

The gate studies switch their interaction on and off through a complex
drive f(t) multiplying the ladder operators.  The envelope primitives here
vanish identically at t = 0 and t = duration (and outside the window), so
the switch-off premise holds by construction; the Gaussian primitive can
optionally keep its raw (truncated, nonzero-endpoint) form for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class Envelope:
    """Real scalar shape s(t) on [0, duration], zero outside.

    ``breakpoints`` mark interior derivative kinks so integrators can split
    there instead of stepping across them.
    """

    fn: Callable[[float], float]
    duration: float
    integral: float
    name: str
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t: float) -> float:
        if t < 0.0 or t > self.duration:
            return 0.0
        return self.fn(t)


def raised_cosine(duration: float, area: float = 1.0) -> Envelope:
    """(1 - cos(2 pi t / T)) / 2 scaled to the requested area."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    amp = area / (duration / 2.0)

    def fn(t, _w=2.0 * math.pi / duration, _a=amp):
        return _a * 0.5 * (1.0 - math.cos(_w * t))

    return Envelope(fn, duration, area, "raised-cosine")


def triangle(duration: float, area: float = 1.0) -> Envelope:
    """Symmetric triangle peaking at T/2."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    peak = 2.0 * area / duration

    def fn(t, _T=duration, _p=peak):
        return _p * (1.0 - abs(2.0 * t / _T - 1.0))

    return Envelope(fn, duration, area, "triangle", breakpoints=(duration / 2.0,))


def gaussian(duration: float, sigma: float | None = None, area: float = 1.0,
             subtract_baseline: bool = True) -> Envelope:
    """Gaussian bump centred at T/2.

    With ``subtract_baseline`` (default) the endpoint value is subtracted so
    the envelope is exactly zero at t = 0, T; without it the envelope is the
    raw truncated Gaussian whose endpoints carry mass ~exp(-T^2/8 sigma^2).
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if sigma is None:
        sigma = duration / 10.0
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = duration / 2.0
    base = math.exp(-half * half / (2.0 * sigma * sigma)) if subtract_baseline else 0.0
    raw_integral = math.sqrt(2.0 * math.pi) * sigma * math.erf(half / (math.sqrt(2.0) * sigma))
    shape_integral = raw_integral - base * duration
    amp = area / shape_integral

    def fn(t, _c=half, _s2=2.0 * sigma * sigma, _b=base, _a=amp):
        return _a * (math.exp(-(t - _c) ** 2 / _s2) - _b)

    return Envelope(fn, duration, area, "gaussian" if subtract_baseline else "gaussian-raw")


ENVELOPES = {
    "raised-cosine": raised_cosine,
    "triangle": triangle,
    "gaussian": gaussian,
}


@dataclass(frozen=True)
class LinearDrive:
    """Complex drive f(t) for an interaction f(t) a† + conj(f(t)) a.

    ``breakpoints`` mark interior discontinuities (piecewise drives); the
    propagator and the closed-form displacement check both split there.
    """

    f: Callable[[float], complex]
    duration: float
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t: float) -> complex:
        return complex(self.f(t))

    def segments(self) -> list[tuple[float, float]]:
        edges = [0.0, *sorted(self.breakpoints), self.duration]
        return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def envelope_drive(envelope: Envelope, coefficient: complex = 1.0) -> LinearDrive:
    """f(t) = coefficient * envelope(t)."""

    def f(t, _c=complex(coefficient), _e=envelope):
        return _c * _e(t)

    return LinearDrive(f, envelope.duration, envelope.breakpoints)


def multi_envelope_drive(terms: list[tuple[complex, Envelope]]) -> LinearDrive:
    """f(t) = sum_i c_i * envelope_i(t); duration is the longest window."""
    if not terms:
        raise ValueError("need at least one term")
    duration = max(env.duration for _, env in terms)
    frozen = tuple((complex(c), env) for c, env in terms)
    breaks = sorted({bp for _, env in frozen for bp in env.breakpoints}
                    | {env.duration for _, env in frozen if env.duration < duration})

    def f(t, _terms=frozen):
        return sum(c * env(t) for c, env in _terms)

    return LinearDrive(f, duration, tuple(breaks))


def piecewise_constant_drive(values: list[complex], duration: float) -> LinearDrive:
    """Equal-length constant segments spanning [0, duration]."""
    if not values:
        raise ValueError("need at least one segment")
    vals = tuple(complex(v) for v in values)
    seg = duration / len(vals)

    def f(t, _v=vals, _seg=seg):
        k = min(int(t / _seg), len(_v) - 1) if t >= 0 else 0
        return _v[k]

    breaks = tuple(seg * k for k in range(1, len(vals)))
    return LinearDrive(f, duration, breaks)
