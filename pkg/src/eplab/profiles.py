"""Initial radial profiles: Gaussian or compact bumps with optional neutralizing annulus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NeutralityError, ParameterDomainError
from .params import PhysicalParams, derive_constants
from .radial import (
    NormalizedState,
    PrimalState,
    RadialGrid,
    normalized_from_profiles,
    primal_from_profiles,
)

PROFILE_KINDS = ("gaussian", "bump", "file")


@dataclass
class InitialData:
    profile: str = "gaussian"
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0
    velocity_amplitude: float = 0.0
    neutralize: bool = True
    snapshot_path: str | None = None


def gaussian_shape(r, center, width):
    return np.exp(-0.5 * ((np.asarray(r) - center) / width) ** 2)


def bump_shape(r, center, width, steepness=6.0):
    """C-infinity bump exp(a - a / (1 - s**2)) on |s| < 1, s = (r - center) / width."""
    s = (np.asarray(r, dtype=float) - center) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(steepness - steepness / (1.0 - s[inside] ** 2))
    return out


def velocity_shape(r, width):
    """Inward (compressive) odd profile with peak magnitude 1 at r = width."""
    x = np.asarray(r, dtype=float) / width
    return -x * np.exp(0.5 * (1.0 - x**2))


@dataclass
class RadialProfiles:
    """Callables for n - n0 and u, plus what the neutralizer did."""

    density: object
    velocity: object
    annulus_weight: float = 0.0
    annulus_center: float = 0.0
    annulus_width: float = 0.0

    def describe(self) -> str:
        if self.annulus_weight == 0.0:
            return "no neutralizing annulus"
        return (
            f"neutralizing annulus: weight {self.annulus_weight:.6g} at r = "
            f"{self.annulus_center:.6g} (width {self.annulus_width:.6g})"
        )


def build_profiles(init: InitialData, params: PhysicalParams, grid: RadialGrid) -> RadialProfiles:
    """Density and velocity callables for a gaussian or bump description.

    With neutralize on, a Gaussian annulus outside the bump is subtracted
    with the weight that makes the discrete net charge zero (to roundoff).
    """
    if init.profile not in ("gaussian", "bump"):
        raise ParameterDomainError(f"build_profiles cannot handle profile {init.profile!r}")
    if not init.width > 0:
        raise ParameterDomainError("width must be positive")
    c0 = derive_constants(params).c0
    shape = gaussian_shape if init.profile == "gaussian" else bump_shape
    amp, center, width = init.amplitude, init.center, init.width
    reach = center + (5.0 * width if init.profile == "gaussian" else width)

    if center > 0:
        # odd reflection of the density shape: with velocity_amplitude equal to
        # the density amplitude this is an inward simple wave to first order
        def velocity(r):
            r = np.asarray(r, dtype=float)
            return -init.velocity_amplitude * c0 * (shape(r, center, width) - shape(-r, center, width))
    else:
        def velocity(r):
            return init.velocity_amplitude * c0 * velocity_shape(r, width)

    if not init.neutralize or amp == 0.0:
        return RadialProfiles(lambda r: amp * shape(r, center, width), velocity)

    ann_w = width
    ann_c = reach + 4.0 * ann_w
    if ann_c + 6.0 * ann_w > 0.5 * grid.r_max:
        raise NeutralityError(
            f"neutralizing annulus at r = {ann_c:.4g} does not fit inside 0.5 * r_max"
        )
    r = grid.centers
    w = grid.weights
    lam = float(np.sum(w * shape(r, center, width)) / np.sum(w * gaussian_shape(r, ann_c, ann_w)))

    def density(r):
        return amp * (shape(r, center, width) - lam * gaussian_shape(r, ann_c, ann_w))

    return RadialProfiles(density, velocity, lam, ann_c, ann_w)


def primal_initial(init: InitialData, params: PhysicalParams, grid: RadialGrid) -> PrimalState:
    prof = build_profiles(init, params, grid)
    return primal_from_profiles(prof.density, prof.velocity, grid, params)


def normalized_initial(init: InitialData, params: PhysicalParams, grid: RadialGrid) -> NormalizedState:
    prof = build_profiles(init, params, grid)
    return normalized_from_profiles(prof.density, prof.velocity, grid, params)


def support_radius(init: InitialData) -> float:
    if init.profile == "bump":
        return init.center + init.width
    return init.center + 5.0 * init.width
