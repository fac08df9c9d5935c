"""Photon modes in the dipole limit, parameterized by their coupling strength."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..hilbert import ATOMIC_UNITS, PhysicalConstants

__all__ = ["Mode", "ModeSet", "mode_constant"]


def mode_constant(volume: float, constants: PhysicalConstants = ATOMIC_UNITS) -> float:
    """C = (hbar c^2 / (eps0 L^3))^(1/2) of a quantization box of volume L^3."""
    if not volume > 0:
        raise ConfigurationError(f"quantization volume must be positive, got {volume!r}")
    return math.sqrt(constants.hbar * constants.c**2 / (constants.eps0 * volume))


@dataclass(frozen=True)
class Mode:
    """One cavity mode polarized along the electron axis.

    ``lam`` is the coupling strength (Ha/bohr in atomic units) and may carry a
    sign; ``epsilon_sign`` flips the polarization.  The signed coupling that
    enters every Hamiltonian is :attr:`coupling`.
    """

    omega: float
    lam: float = 0.0
    epsilon_sign: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ConfigurationError(f"mode frequency must be positive, got {self.omega!r}")
        if not np.isfinite(self.lam):
            raise ConfigurationError(f"coupling must be finite, got {self.lam!r}")
        if self.epsilon_sign not in (1, -1):
            raise ConfigurationError(f"epsilon_sign must be +1 or -1, got {self.epsilon_sign!r}")

    @property
    def coupling(self) -> float:
        return self.epsilon_sign * self.lam

    def with_coupling(self, lam: float) -> "Mode":
        return Mode(self.omega, lam, self.epsilon_sign)


@dataclass(frozen=True)
class ModeSet:
    modes: tuple[Mode, ...]
    quantization_volume: float | None = None
    constants: PhysicalConstants = ATOMIC_UNITS

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) < 1:
            raise ConfigurationError("a mode set needs at least one mode")
        object.__setattr__(self, "modes", modes)
        if self.quantization_volume is not None:
            C = mode_constant(self.quantization_volume, self.constants)
            for i, m in enumerate(modes):
                expected = math.sqrt(m.omega) * self.constants.e * C / self.constants.c
                if abs(abs(m.lam) - expected) > 1e-12 * max(1.0, expected):
                    raise ConfigurationError(
                        f"mode {i}: coupling {m.lam!r} inconsistent with quantization volume "
                        f"(expected magnitude {expected!r})"
                    )

    @classmethod
    def single(cls, omega: float, lam: float, constants: PhysicalConstants = ATOMIC_UNITS) -> "ModeSet":
        return cls((Mode(omega, lam),), None, constants)

    @classmethod
    def from_volume(
        cls,
        omegas: Sequence[float],
        volume: float,
        signs: Iterable[int] | None = None,
        constants: PhysicalConstants = ATOMIC_UNITS,
    ) -> "ModeSet":
        """Couplings lam = sqrt(omega) e C / c derived from a quantization volume."""
        C = mode_constant(volume, constants)
        signs = list(signs) if signs is not None else [1] * len(omegas)
        modes = tuple(
            Mode(w, math.sqrt(w) * constants.e * C / constants.c, s) for w, s in zip(omegas, signs)
        )
        return cls(modes, volume, constants)

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i) -> Mode:
        return self.modes[i]

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def couplings(self) -> np.ndarray:
        return np.array([m.coupling for m in self.modes])

    @property
    def mode_constant(self) -> float | None:
        if self.quantization_volume is None:
            return None
        return mode_constant(self.quantization_volume, self.constants)

    @property
    def dipole_curvature(self) -> float:
        """Sum of lam^2 / (hbar omega): curvature of the dipole self-energy in x."""
        return float(np.sum(self.couplings**2 / (self.constants.hbar * self.omegas)))

    def scaled(self, factor: float) -> "ModeSet":
        """Same frequencies with all couplings multiplied by ``factor`` (drops the volume)."""
        return ModeSet(tuple(m.with_coupling(factor * m.lam) for m in self.modes), None, self.constants)
