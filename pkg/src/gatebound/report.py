"""Common result container for energy-bound checks.

Every bound study in the package (field pulses, collisions, heuristic
estimate) reports the same handful of numbers: the accumulated gate phase,
the fluctuation error it would incur, the energy actually invested and the
minimum energy the corresponding inequality demands.  ``BoundReport`` holds
them together with a free-form ``meta`` dict for study-specific flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one energy-bound evaluation.

    ``photon_number`` and ``mean_omega`` are only meaningful for field-mode
    studies and are ``None`` otherwise.  ``energy`` and ``bound`` carry the
    same unit (multiples of hbar*rad/s in natural units, joules in SI).
    """

    energy: float
    bound: float
    satisfied: bool
    phase: float | None = None
    error: float | None = None
    photon_number: float | None = None
    mean_omega: float | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        """energy / bound; > 1 means the bound holds with slack."""
        return self.energy / self.bound

    def to_dict(self) -> dict[str, Any]:
        return {
            "energy": self.energy,
            "bound": self.bound,
            "ratio": self.ratio,
            "satisfied": self.satisfied,
            "phase": self.phase,
            "error": self.error,
            "photon_number": self.photon_number,
            "mean_omega": self.mean_omega,
            "meta": dict(self.meta),
        }


RATIO_SLACK = 1e-12  # |energy/bound - 1| below this counts as satisfied


def bound_satisfied(energy: float, bound: float) -> bool:
    """True when energy >= bound up to a relative rounding slack."""
    return energy >= bound * (1.0 - RATIO_SLACK)
