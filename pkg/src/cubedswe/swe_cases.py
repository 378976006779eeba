"""Standard spherical shallow-water test cases.

Each case supplies fluid depth and physical (east, north) winds as functions
of geographic coordinates; `build_case` samples them at the grid nodes and
assembles the prognostic state.  Where an analytic solution exists it is
exposed as a callable of time, for error norms and validation oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .geometry import Grid, PhysicalConstants, latitude_gradients
from .swe_rhs import ShallowWaterModel

DAY = 86400.0

CASE_NAMES = ("steady_geostrophic", "mountain", "rossby_haurwitz",
              "galewsky", "lauter")


def solid_body_speed(constants: PhysicalConstants) -> float:
    """Reference solid-body speed: one revolution in 12 days."""
    return 2.0 * np.pi * constants.radius / (12.0 * DAY)


# ----------------------------------------------------------------------
# field definitions

def steady_geostrophic_fields(lon, lat, constants: PhysicalConstants):
    """Zonal solid-body rotation in exact geostrophic balance."""
    a, omega, g = constants.radius, constants.omega, constants.gravity
    u0 = solid_body_speed(constants)
    gh0 = 2.94e4
    gh = gh0 - (a * omega * u0 + 0.5 * u0**2) * np.sin(lat) ** 2
    ue = u0 * np.cos(lat)
    vn = np.zeros_like(lon)
    return gh / g, ue, vn


MOUNTAIN_CENTER = (-np.pi / 2.0, np.pi / 6.0)
MOUNTAIN_RADIUS = np.pi / 9.0
MOUNTAIN_HEIGHT = 2000.0


def mountain_topography(lon, lat):
    """Cone-shaped mountain: h_s0 (1 - r/R) inside the footprint radius."""
    lam_c, phi_c = MOUNTAIN_CENTER
    dlam = np.mod(lon - lam_c + np.pi, 2.0 * np.pi) - np.pi
    r = np.minimum(MOUNTAIN_RADIUS, np.sqrt(dlam**2 + (lat - phi_c) ** 2))
    return MOUNTAIN_HEIGHT * (1.0 - r / MOUNTAIN_RADIUS)


def mountain_fields(lon, lat, constants: PhysicalConstants):
    """Zonal flow over the isolated mountain; depth excludes the orography."""
    a, omega, g = constants.radius, constants.omega, constants.gravity
    u0 = 20.0
    h0 = 5960.0
    h_surf = h0 - (a * omega * u0 + 0.5 * u0**2) * np.sin(lat) ** 2 / g
    depth = h_surf - mountain_topography(lon, lat)
    return depth, u0 * np.cos(lat), np.zeros_like(lon)


def rossby_haurwitz_fields(lon, lat, constants: PhysicalConstants):
    """Wavenumber-4 Rossby-Haurwitz wave of the barotropic vorticity equation."""
    a, omega2, g = constants.radius, constants.omega, constants.gravity
    w = 7.848e-6
    k = 7.848e-6
    r = 4.0
    h0 = 8000.0
    c = np.cos(lat)
    s = np.sin(lat)
    ue = (a * w * c
          + a * k * c ** (r - 1.0) * (r * s**2 - c**2) * np.cos(r * lon))
    vn = -a * k * r * c ** (r - 1.0) * s * np.sin(r * lon)
    aa = (0.5 * w * (2.0 * omega2 + w) * c**2
          + 0.25 * k**2 * c ** (2.0 * r)
          * ((r + 1.0) * c**2 + (2.0 * r**2 - r - 2.0)
             - 2.0 * r**2 * c ** (-2.0)))
    bb = (2.0 * (omega2 + w) * k / ((r + 1.0) * (r + 2.0)) * c**r
          * ((r**2 + 2.0 * r + 2.0) - (r + 1.0) ** 2 * c**2))
    cc = 0.25 * k**2 * c ** (2.0 * r) * ((r + 1.0) * c**2 - (r + 2.0))
    gh = (g * h0 + a**2 * aa + a**2 * bb * np.cos(r * lon)
          + a**2 * cc * np.cos(2.0 * r * lon))
    return gh / g, ue, vn


GALEWSKY_UMAX = 80.0
GALEWSKY_PHI0 = np.pi / 7.0
GALEWSKY_PHI1 = np.pi / 2.0 - np.pi / 7.0
GALEWSKY_MEAN_DEPTH = 10_000.0


def galewsky_jet(lat):
    """Zonal velocity profile of the barotropic jet (compactly supported)."""
    lat = np.asarray(lat, dtype=float)
    e_n = np.exp(-4.0 / (GALEWSKY_PHI1 - GALEWSKY_PHI0) ** 2)
    inside = (lat > GALEWSKY_PHI0) & (lat < GALEWSKY_PHI1)
    u = np.zeros_like(lat)
    den = np.where(inside, (lat - GALEWSKY_PHI0) * (lat - GALEWSKY_PHI1), -1.0)
    u[inside] = (GALEWSKY_UMAX / e_n * np.exp(1.0 / den))[inside]
    return u


@lru_cache(maxsize=4)
def _galewsky_depth_profile(constants: PhysicalConstants):
    """Balanced depth h(phi) with global mean set to the reference depth."""
    a, omega, g = constants.radius, constants.omega, constants.gravity

    def integrand(phi):
        u = float(galewsky_jet(phi))
        f = 2.0 * omega * np.sin(phi)
        return a * u * (f + np.tan(phi) * u / a) / g

    # the jet is compactly supported, so the balance integral is constant
    # outside (phi0, phi1); tabulate it once on a fine latitude grid
    phis = np.linspace(-np.pi / 2.0, np.pi / 2.0, 2001)
    vals = np.zeros_like(phis)
    acc = 0.0
    prev = -np.pi / 2.0
    for i, phi in enumerate(phis):
        if phi > GALEWSKY_PHI0 - 0.02 and prev < GALEWSKY_PHI1 + 0.02:
            acc += quad(integrand, prev, phi, limit=200)[0]
        vals[i] = acc
        prev = phi

    def h_unshifted(phi):
        return -np.interp(phi, phis, vals)

    mean = (0.5 * np.trapezoid(h_unshifted(phis) * np.cos(phis), phis))
    shift = GALEWSKY_MEAN_DEPTH - mean
    return phis, vals, shift


def galewsky_fields(lon, lat, constants: PhysicalConstants,
                    perturbed: bool = True):
    """Balanced mid-latitude jet, optionally with the height perturbation."""
    phis, vals, shift = _galewsky_depth_profile(constants)
    depth = -np.interp(lat, phis, vals) + shift
    if perturbed:
        h_hat, alpha, beta, phi2 = 120.0, 1.0 / 3.0, 1.0 / 15.0, np.pi / 4.0
        lam = np.mod(lon + np.pi, 2.0 * np.pi) - np.pi
        depth = depth + (h_hat * np.cos(lat)
                         * np.exp(-((lam / alpha) ** 2))
                         * np.exp(-(((phi2 - lat) / beta) ** 2)))
    return depth, galewsky_jet(lat), np.zeros_like(lon)


LAUTER_TILT = np.pi / 4.0
LAUTER_GH0 = 133_681.0


def lauter_topography(lat, constants: PhysicalConstants):
    """Bottom height absorbing the centrifugal potential, (a Omega sin phi)^2 / 2g.

    The unsteady solid-body solution is exact only over this orography: the
    fluid depth is then materially conserved while the free surface carries
    the centrifugal bulge.
    """
    a, omega, g = constants.radius, constants.omega, constants.gravity
    return 0.5 * (a * omega * np.sin(lat)) ** 2 / g


def lauter_fields(lon, lat, t, constants: PhysicalConstants,
                  tilt: float = LAUTER_TILT):
    """Unsteady solid-body rotation about an axis tilted by `tilt`.

    The rotation axis is fixed in the inertial frame, so in rotating-frame
    coordinates it precesses westward at the planetary rate; the balanced
    depth follows the instantaneous axis.  Exact only together with
    `lauter_topography`.
    """
    a, omega, g = constants.radius, constants.omega, constants.gravity
    u0 = solid_body_speed(constants)
    wt = omega * t
    axis = np.array([np.sin(tilt) * np.cos(wt), -np.sin(tilt) * np.sin(wt),
                     np.cos(tilt)])
    cl, sl = np.cos(lon), np.sin(lon)
    cp, sp = np.cos(lat), np.sin(lat)
    r_hat = np.stack([cp * cl, cp * sl, sp], axis=-1)
    east = np.stack([-sl, cl, np.zeros_like(sl)], axis=-1)
    north = np.stack([-sp * cl, -sp * sl, cp], axis=-1)
    vel = u0 * np.cross(np.broadcast_to(axis, r_hat.shape), r_hat)
    ue = np.sum(vel * east, axis=-1)
    vn = np.sum(vel * north, axis=-1)
    chi = r_hat @ axis
    gh = LAUTER_GH0 - 0.5 * (u0 * chi + a * omega * sp) ** 2
    return gh / g, ue, vn


# ----------------------------------------------------------------------
# assembly on a grid

@dataclass
class CaseSetup:
    """A model with its initial state and, if available, analytic solution."""

    name: str
    model: ShallowWaterModel
    q0: np.ndarray
    analytic: Callable[[float], tuple] | None = None
    extra: dict = field(default_factory=dict)

    def analytic_state(self, t: float) -> np.ndarray:
        if self.analytic is None:
            raise ValueError(f"case {self.name!r} has no analytic solution")
        depth, ue, vn = self.analytic(t)
        return self.model.state_from_spherical(depth, ue, vn)


def build_case(grid: Grid, name: str, **params) -> CaseSetup:
    """Instantiate a named test case on a grid.

    Unknown names raise ValueError; `params` are case-specific options
    (e.g. tilt for the unsteady case, perturbed for the jet).
    """
    constants = grid.spec.constants
    lon, lat = grid.lon, grid.lat
    if name == "steady_geostrophic":
        fields = steady_geostrophic_fields(lon, lat, constants)
        model = ShallowWaterModel(grid)
        return CaseSetup(name, model, model.state_from_spherical(*fields),
                         analytic=lambda t: fields)
    if name == "mountain":
        topo = mountain_topography(lon, lat)
        model = ShallowWaterModel(grid, topography=topo)
        fields = mountain_fields(lon, lat, constants)
        return CaseSetup(name, model, model.state_from_spherical(*fields))
    if name == "rossby_haurwitz":
        model = ShallowWaterModel(grid)
        fields = rossby_haurwitz_fields(lon, lat, constants)
        return CaseSetup(name, model, model.state_from_spherical(*fields))
    if name == "galewsky":
        model = ShallowWaterModel(grid)
        fields = galewsky_fields(lon, lat, constants,
                                 perturbed=params.get("perturbed", True))
        return CaseSetup(name, model, model.state_from_spherical(*fields))
    if name == "lauter":
        tilt = params.get("tilt", LAUTER_TILT)
        # smooth zonal orography: supply its exact panel-coordinate gradient
        # d h_B / d x^i = h_B'(phi) d phi / d x^i so the momentum source is
        # not limited by the accuracy of the interpolant's derivative
        a, om, g = constants.radius, constants.omega, constants.gravity
        dhb_dphi = (a * om) ** 2 * np.sin(lat) * np.cos(lat) / g
        x1, x2 = np.meshgrid(grid.coords_1d, grid.coords_1d, indexing="xy")
        tg1 = np.empty_like(lat)
        tg2 = np.empty_like(lat)
        for orient in grid.orientations:
            dp1, dp2 = latitude_gradients(x1, x2, orient)
            tg1[orient.panel] = dhb_dphi[orient.panel] * dp1
            tg2[orient.panel] = dhb_dphi[orient.panel] * dp2
        model = ShallowWaterModel(
            grid, topography=lauter_topography(lat, constants),
            topography_gradient=(tg1, tg2))

        def analytic(t):
            return lauter_fields(lon, lat, t, constants, tilt=tilt)

        return CaseSetup(name, model,
                         model.state_from_spherical(*analytic(0.0)),
                         analytic=analytic, extra={"tilt": tilt})
    raise ValueError(f"unknown test case {name!r}; choose from {CASE_NAMES}")
