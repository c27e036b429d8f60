"""Physical constants, derived constants and the change to Klein-Gordon variables.

Pressure obeys the gamma law p(n) = A n**gamma.  The "paper" unit preset
sets A = m_e = e = kappa = 1, where kappa is the Poisson coupling
(kappa = 4 pi e in Gaussian units).  Only in that preset does the
normalized system carry the coefficients 1/c0**2 and n0 on its field terms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterDomainError, VacuumError

# n <= VACUUM_FRACTION * n0 counts as vacuum
VACUUM_FRACTION = 1e-10


@dataclass(frozen=True)
class PhysicalParams:
    gamma: float
    n0: float = 1.0
    entropy_const_A: float = 1.0
    charge_e: float = 1.0
    mass_me: float = 1.0
    kappa: float = 1.0

    def validate(self) -> "PhysicalParams":
        if not self.gamma > 1.0:
            raise ParameterDomainError(f"gamma must be > 1, got {self.gamma}")
        if not self.n0 > 0.0:
            raise ParameterDomainError(f"n0 must be > 0, got {self.n0}")
        if not self.mass_me > 0.0:
            raise ParameterDomainError(f"mass_me must be > 0, got {self.mass_me}")
        if not self.entropy_const_A > 0.0:
            raise ParameterDomainError(
                f"entropy_const_A must be > 0, got {self.entropy_const_A}"
            )
        return self

    @property
    def is_paper_units(self) -> bool:
        return (
            self.entropy_const_A == 1.0
            and self.mass_me == 1.0
            and self.charge_e == 1.0
            and self.kappa == 1.0
        )

    def digest(self) -> str:
        """Short stable hash used to tag snapshots."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def paper_units(gamma: float, n0: float = 1.0) -> PhysicalParams:
    return PhysicalParams(gamma=gamma, n0=n0).validate()


def si_like_units(gamma: float, n0: float = 1.0, charge_e: float = 1.0) -> PhysicalParams:
    """Unit charge and mass but the literal Coulomb coupling kappa = 4 pi e."""
    return PhysicalParams(
        gamma=gamma, n0=n0, charge_e=charge_e, kappa=4.0 * math.pi * charge_e
    ).validate()


@dataclass(frozen=True)
class DerivedConstants:
    c0: float
    m0: float


def derive_constants(params: PhysicalParams) -> DerivedConstants:
    """Sound speed c0 = sqrt(A gamma n0**(gamma-1) / m_e) and m0 = n0 / c0**2."""
    params.validate()
    g = params.gamma
    c0_sq = params.entropy_const_A * g * params.n0 ** (g - 1.0) / params.mass_me
    return DerivedConstants(c0=math.sqrt(c0_sq), m0=params.n0 / c0_sq)


def sound_speed(n, params: PhysicalParams):
    """Local sound speed c(n) = sqrt(p'(n) / m_e)."""
    g = params.gamma
    return np.sqrt(params.entropy_const_A * g * np.asarray(n, dtype=float) ** (g - 1.0) / params.mass_me)


def check_density(n, params: PhysicalParams) -> None:
    n = np.asarray(n, dtype=float)
    if n.size and not np.all(n > VACUUM_FRACTION * params.n0):
        raise VacuumError(
            f"density {np.min(n):.6g} at or below vacuum threshold "
            f"{VACUUM_FRACTION * params.n0:.3g}"
        )


def _enthalpy_base(m, gamma):
    base = 0.5 * (gamma - 1.0) * np.asarray(m, dtype=float) + 1.0
    if base.size and not np.all(base > 0.0):
        raise VacuumError("(gamma-1)/2 * m + 1 must be positive")
    return base


def to_normalized(n, u, params: PhysicalParams, consts: DerivedConstants):
    """Map (n, u) to (m, v).  The time rescale tau = c0 t is left to the caller."""
    check_density(n, params)
    g = params.gamma
    ratio = np.asarray(n, dtype=float) / params.n0
    # expm1/log1p keep m accurate for tiny perturbations
    m = (2.0 / (g - 1.0)) * np.expm1(0.5 * (g - 1.0) * np.log(ratio))
    v = np.asarray(u, dtype=float) / consts.c0
    return m, v


def from_normalized(m, v, params: PhysicalParams, consts: DerivedConstants):
    g = params.gamma
    _enthalpy_base(m, g)
    n = params.n0 * density_ratio(m, g)
    u = consts.c0 * np.asarray(v, dtype=float)
    return n, u


def density_ratio(m, gamma):
    """n / n0 as a function of m, i.e. ((gamma-1)/2 m + 1)**(2/(gamma-1))."""
    base = _enthalpy_base(m, gamma)
    return np.exp((2.0 / (gamma - 1.0)) * np.log(base))


def density_excess(m, gamma):
    """n / n0 - 1 = m - h(m), evaluated without cancellation."""
    _enthalpy_base(m, gamma)
    a = 0.5 * (gamma - 1.0) * np.asarray(m, dtype=float)
    return np.expm1((2.0 / (gamma - 1.0)) * np.log1p(a))


def h_of_m(m, gamma):
    """Nonlinear remainder h(m) = m - [n/n0 - 1]; identically zero for gamma = 3."""
    m = np.asarray(m, dtype=float)
    if gamma == 3.0:
        _enthalpy_base(m, gamma)
        return np.zeros_like(m)
    return m - density_excess(m, gamma)
