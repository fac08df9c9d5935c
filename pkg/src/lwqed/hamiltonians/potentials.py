"""External one-body potentials evaluable on the grid and radially in 3D."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..hilbert import ATOMIC_UNITS, GridSpec, PhysicalConstants

__all__ = ["ExternalPotential"]

_KINDS = ("zero", "harmonic", "gaussian_well", "soft_coulomb", "tabulated")


@dataclass(frozen=True, eq=False)
class ExternalPotential:
    """v_ext(x).  Build with the classmethods rather than directly.

    ``radial(r)`` evaluates the same profile as a spherically symmetric 3D
    potential v(|r|); the tabulated kind has no radial form.
    """

    kind: str
    params: dict = field(default_factory=dict)
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown potential kind {self.kind!r}; expected one of {_KINDS}")

    @classmethod
    def zero(cls) -> "ExternalPotential":
        return cls("zero")

    @classmethod
    def harmonic(cls, Omega: float, center: float = 0.0) -> "ExternalPotential":
        if not Omega > 0:
            raise ConfigurationError(f"harmonic frequency must be positive, got {Omega!r}")
        return cls("harmonic", {"Omega": float(Omega), "center": float(center)})

    @classmethod
    def gaussian_well(cls, depth: float, width: float, center: float = 0.0) -> "ExternalPotential":
        if depth < 0 or not width > 0:
            raise ConfigurationError("gaussian well needs depth >= 0 and width > 0")
        return cls("gaussian_well", {"depth": float(depth), "width": float(width), "center": float(center)})

    @classmethod
    def soft_coulomb(cls, charge: float, softening: float, center: float = 0.0) -> "ExternalPotential":
        if not softening > 0:
            raise ConfigurationError("soft-Coulomb softening must be positive")
        return cls("soft_coulomb", {"charge": float(charge), "softening": float(softening), "center": float(center)})

    @classmethod
    def tabulated(cls, values) -> "ExternalPotential":
        v = np.array(values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ConfigurationError("tabulated potential must be a finite 1D array")
        v.setflags(write=False)
        return cls("tabulated", {}, v)

    @property
    def bounded(self) -> bool:
        return self.kind in ("zero", "gaussian_well", "soft_coulomb")

    @property
    def symmetric(self) -> bool:
        """Even about the origin (tabulated profiles are checked on use, not here)."""
        return self.kind == "zero" or self.params.get("center", None) == 0.0

    def __call__(self, x, constants: PhysicalConstants = ATOMIC_UNITS) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return 0.5 * constants.m * p["Omega"] ** 2 * (x - p["center"]) ** 2
        if self.kind == "gaussian_well":
            return -p["depth"] * np.exp(-((x - p["center"]) ** 2) / (2.0 * p["width"] ** 2))
        if self.kind == "soft_coulomb":
            return -p["charge"] * constants.coulomb / np.sqrt((x - p["center"]) ** 2 + p["softening"] ** 2)
        raise ConfigurationError("tabulated potential is only defined on its grid")

    def on_grid(self, grid: GridSpec, constants: PhysicalConstants = ATOMIC_UNITS) -> np.ndarray:
        if self.kind == "tabulated":
            if self.values.shape != (grid.n_points,):
                raise ConfigurationError(
                    f"tabulated potential has {self.values.shape[0]} values, grid has {grid.n_points} points"
                )
            return np.array(self.values)
        return self(grid.points, constants)

    def radial(self, r, constants: PhysicalConstants = ATOMIC_UNITS) -> np.ndarray:
        """Profile as a function of the 3D distance from ``center`` (center ignored)."""
        if self.kind == "tabulated":
            raise ConfigurationError("tabulated potential has no radial form")
        shifted = dict(self.params)
        if "center" in shifted:
            shifted["center"] = 0.0
        return ExternalPotential(self.kind, shifted)(r, constants)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.params)
        return out
