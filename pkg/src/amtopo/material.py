"""Density-to-property interpolation laws and their derivatives.

The final-design elasticity problem uses SIMP; every partial-build
sub-problem uses RAMP, which keeps a nonzero stiffness slope at zero
density and so avoids the parasitic low-density modes that SIMP
exhibits under design-dependent loads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MaterialLaw:
    """Interpolation parameters shared by the elastic and thermal laws."""

    kind: str = "SIMP"
    E0: float = 1.0
    E_min: float = 1e-9
    q: float = 5.0
    nu: float = 0.3
    kappa_min: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("SIMP", "RAMP"):
            raise ValueError(f"unknown interpolation kind {self.kind!r}")
        if not 0.0 < self.E_min < self.E0:
            raise ValueError("requires 0 < E_min < E0")
        if self.q < 0:
            raise ValueError("penalty must be >= 0")
        if not 0.0 < self.kappa_min < 1.0:
            raise ValueError("requires 0 < kappa_min < 1")

    def young(self, rho_bar):
        if self.kind == "SIMP":
            return simp_young(rho_bar, self)
        return ramp_young(rho_bar, self)


def _clamp01(rho_bar):
    # floating noise from the projection can leave values epsilon outside [0,1]
    return np.clip(np.asarray(rho_bar, dtype=float), 0.0, 1.0)


def simp_young(rho_bar, law: MaterialLaw):
    """E = E_min + rho^q (E0 - E_min) and its density derivative."""
    r = _clamp01(rho_bar)
    dE = law.E0 - law.E_min
    E = law.E_min + r**law.q * dE
    dEdr = law.q * r ** (law.q - 1.0) * dE
    return E, dEdr


def ramp_young(rho_bar, law: MaterialLaw):
    """E = E_min + rho/(1 + q(1-rho)) (E0 - E_min) and its derivative."""
    r = _clamp01(rho_bar)
    dE = law.E0 - law.E_min
    den = 1.0 + law.q * (1.0 - r)
    E = law.E_min + r / den * dE
    dEdr = (1.0 + law.q) / den**2 * dE
    return E, dEdr


def ramp_conductivity(rho_bar, law: MaterialLaw):
    """kappa = kappa_min + rho/(1 + q(1-rho)) (1 - kappa_min), with derivative."""
    r = _clamp01(rho_bar)
    dk = 1.0 - law.kappa_min
    den = 1.0 + law.q * (1.0 - r)
    kappa = law.kappa_min + r / den * dk
    dkdr = (1.0 + law.q) / den**2 * dk
    return kappa, dkdr
