"""Rotated cubed-sphere geometry: panels, gnomonic maps, metric terms.

Each of the six panels is a gnomonic projection with equiangular coordinates
(x1, x2) in [-pi/4, pi/4]^2.  A panel is described by the geographic position
of its center (lambda_p, phi_p) and the clockwise rotation alpha_p of its
x1 = 0 line with respect to the local meridian.  All metric quantities are
evaluated from closed forms in X = tan x1, Y = tan x2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dfr import DfrOperator

EDGE_ANGLE = np.pi / 4.0


@dataclass(frozen=True)
class PhysicalConstants:
    radius: float = 6_371_220.0        # sphere radius (m)
    omega: float = 7.292e-5            # rotation rate (rad/s)
    gravity: float = 9.80616           # effective gravitational acceleration (m/s^2)

    def __post_init__(self):
        if self.radius <= 0 or self.gravity <= 0 or self.omega < 0:
            raise ValueError("invalid physical constants")


@dataclass(frozen=True)
class RotationConfig:
    lambda0: float = 0.0
    phi0: float = 0.0
    alpha0: float = 0.0

    def __post_init__(self):
        vals = (self.lambda0, self.phi0, self.alpha0)
        if not all(np.isfinite(vals)):
            raise ValueError("rotation angles must be finite")
        if not -np.pi / 2 <= self.phi0 <= np.pi / 2:
            raise ValueError("phi0 must lie in [-pi/2, pi/2]")


@dataclass(frozen=True)
class PanelOrientation:
    panel: int
    lam: float
    phi: float
    alpha: float


@dataclass(frozen=True)
class GridSpec:
    ne: int
    ns: int
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    rotation: RotationConfig = field(default_factory=RotationConfig)

    def __post_init__(self):
        if self.ne < 1 or self.ns < 1:
            raise ValueError("ne and ns must be at least 1")

    @property
    def total_nodes(self) -> int:
        return 6 * self.ne**2 * self.ns**2


def _local_basis(lam, phi):
    """Unit east, north and radial vectors at geographic (lam, phi)."""
    sl, cl = np.sin(lam), np.cos(lam)
    sp, cp = np.sin(phi), np.cos(phi)
    east = np.stack([-sl, cl, np.zeros_like(sl)], axis=-1)
    north = np.stack([-sp * cl, -sp * sl, cp], axis=-1)
    radial = np.stack([cp * cl, cp * sl, sp], axis=-1)
    return east, north, radial


def panel_frame(orient: PanelOrientation):
    """Orthonormal frame (r_hat, e1, e2) of a panel's tangent plane.

    X and Y of a sphere point p are (p.e1)/(p.r_hat) and (p.e2)/(p.r_hat).
    """
    east, north, radial = _local_basis(orient.lam, orient.phi)
    ca, sa = np.cos(orient.alpha), np.sin(orient.alpha)
    e1 = ca * east - sa * north
    e2 = sa * east + ca * north
    return radial, e1, e2


# Frames of panels 1..5 expressed in the body frame (b1, b2, b3) of panel 0,
# where b1 = panel 0 normal, b2 = its e1, b3 = its e2.  Rows give the
# coefficients of (r_hat, e1, e2).
_BODY_FRAMES = {
    0: ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    1: ((0, 1, 0), (-1, 0, 0), (0, 0, 1)),
    2: ((-1, 0, 0), (0, -1, 0), (0, 0, 1)),
    3: ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
    4: ((0, 0, 1), (0, 1, 0), (-1, 0, 0)),
    5: ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
}

_POLE_TOL = 1e-12


def _orientation_from_frame(panel: int, r_hat, e1) -> PanelOrientation:
    """Recover (lambda_p, phi_p, alpha_p) from a panel frame.

    At the poles only lambda_p - alpha_p (north) or lambda_p + alpha_p
    (south) is determined; lambda_p = 0 is chosen, matching the special-case
    convention for an unrotated grid.
    """
    z = np.clip(r_hat[2], -1.0, 1.0)
    phi = np.arcsin(z)
    if 1.0 - abs(z) < _POLE_TOL:
        lam = 0.0
        if z > 0:
            alpha = np.arctan2(e1[0], e1[1])
        else:
            alpha = np.arctan2(-e1[0], e1[1])
    else:
        lam = np.arctan2(r_hat[1], r_hat[0])
        east, north, _ = _local_basis(lam, phi)
        alpha = np.arctan2(-np.dot(e1, north), np.dot(e1, east))
    return PanelOrientation(panel=panel, lam=float(lam), phi=float(phi),
                            alpha=float(alpha))


def derive_panel_orientations(rot: RotationConfig) -> list[PanelOrientation]:
    """Orientations of all six panels for a grid rotation of panel 0.

    The five remaining frames are rigid rotations of panel 0's frame; the
    angles are read back from the rotated frames, which fixes the arctangent
    branches so the gnomonic maps tile the sphere.
    """
    p0 = PanelOrientation(panel=0, lam=rot.lambda0, phi=rot.phi0,
                          alpha=rot.alpha0)
    b1, b2, b3 = panel_frame(p0)
    basis = np.stack([b1, b2, b3])
    out = []
    for panel in range(6):
        coeffs = np.array(_BODY_FRAMES[panel], dtype=float)
        r_hat, e1, e2 = coeffs @ basis
        out.append(_orientation_from_frame(panel, r_hat, e1))
    return out


def sphere_to_panel(lam, phi, orient: PanelOrientation):
    """Gnomonic coordinates (X, Y) = (tan x1, tan x2) of geographic points.

    Raises for points on or behind the projection plane (denominator <= 0).
    """
    lam = np.asarray(lam, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dl = lam - orient.lam
    sa, ca = np.sin(orient.alpha), np.cos(orient.alpha)
    sp, cp = np.sin(orient.phi), np.cos(orient.phi)
    tphi = np.tan(phi)
    denom = cp * np.cos(dl) + tphi * sp
    if np.any(denom <= 0):
        raise ValueError("point lies behind the gnomonic projection plane")
    x = (np.sin(dl) * ca + sp * np.cos(dl) * sa - tphi * cp * sa) / denom
    y = (np.sin(dl) * sa - sp * np.cos(dl) * ca + tphi * cp * ca) / denom
    return x, y


def gnomonic_to_unit_vectors(x, y, orient: PanelOrientation):
    """Embedded unit sphere vectors of gnomonic points (X, Y) = (tan, tan)."""
    r_hat, e1, e2 = panel_frame(orient)
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    p = r_hat + x * e1 + y * e2
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def latitude_gradients(x1, x2, orient: PanelOrientation):
    """Exact (d phi / d x1, d phi / d x2) of the geographic latitude.

    Closed form through the embedding: with X = tan x1, Y = tan x2 and
    delta^2 = 1 + X^2 + Y^2, the z component of the unit vector is
    (r_z + X e1_z + Y e2_z) / delta, and phi = arcsin of it.  Needed for
    zonally defined bottom topographies whose gradient is known analytically.
    """
    r_hat, e1, e2 = panel_frame(orient)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    xg, yg = np.tan(x1), np.tan(x2)
    delta = np.sqrt(1.0 + xg**2 + yg**2)
    pz = (r_hat[2] + xg * e1[2] + yg * e2[2]) / delta
    cos_phi = np.sqrt(np.maximum(1.0 - pz**2, 0.0))
    dpz_dx = (e1[2] - pz * xg / delta) / delta
    dpz_dy = (e2[2] - pz * yg / delta) / delta
    return ((1.0 + xg**2) * dpz_dx / cos_phi,
            (1.0 + yg**2) * dpz_dy / cos_phi)


def panel_to_sphere(x1, x2, orient: PanelOrientation):
    """Geographic (lambda, phi) of equiangular panel coordinates."""
    p = gnomonic_to_unit_vectors(np.tan(x1), np.tan(x2), orient)
    lam = np.arctan2(p[..., 1], p[..., 0])
    phi = np.arcsin(np.clip(p[..., 2], -1.0, 1.0))
    return lam, phi


def spherical_wind_to_contravariant(lam, phi, u_east, v_north,
                                    orient: PanelOrientation, radius: float):
    """Convert a physical (east, north) wind to panel contravariant (u1, u2).

    Works through the embedding: X = (p.e1)/(p.r), with dp/dt expressed in
    the local east/north basis; exact, so balanced initial states stay
    balanced to round-off.
    """
    r_hat, e1, e2 = panel_frame(orient)
    east, north, radial = _local_basis(np.asarray(lam, float),
                                       np.asarray(phi, float))
    p = radial
    pdot = (np.asarray(u_east, float)[..., None] * east
            + np.asarray(v_north, float)[..., None] * north) / radius
    pr = p @ r_hat
    p1, p2 = p @ e1, p @ e2
    dr, d1, d2 = pdot @ r_hat, pdot @ e1, pdot @ e2
    x = p1 / pr
    y = p2 / pr
    xdot = (d1 * pr - p1 * dr) / pr**2
    ydot = (d2 * pr - p2 * dr) / pr**2
    return xdot / (1.0 + x**2), ydot / (1.0 + y**2)


def contravariant_to_spherical_wind(x1, x2, u1, u2, orient: PanelOrientation,
                                    radius: float):
    """Inverse of spherical_wind_to_contravariant at panel points."""
    r_hat, e1, e2 = panel_frame(orient)
    x, y = np.tan(np.asarray(x1, float)), np.tan(np.asarray(x2, float))
    delta = np.sqrt(1.0 + x**2 + y**2)
    p = (r_hat + x[..., None] * e1 + y[..., None] * e2) / delta[..., None]
    xdot = np.asarray(u1, float) * (1.0 + x**2)
    ydot = np.asarray(u2, float) * (1.0 + y**2)
    # d p / dX = e1/delta - p X/delta^2, and likewise for Y
    pdot = (xdot[..., None] * (e1 / delta[..., None] - p * (x / delta**2)[..., None])
            + ydot[..., None] * (e2 / delta[..., None] - p * (y / delta**2)[..., None]))
    lam = np.arctan2(p[..., 1], p[..., 0])
    phi = np.arcsin(np.clip(p[..., 2], -1.0, 1.0))
    east, north, _ = _local_basis(lam, phi)
    u_east = radius * np.sum(pdot * east, axis=-1)
    v_north = radius * np.sum(pdot * north, axis=-1)
    return u_east, v_north


@dataclass
class MetricSample:
    """Metric data at a set of points (all fields broadcast together)."""

    sqrt_g: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    g00: np.ndarray
    g01: np.ndarray
    g02: np.ndarray
    # spatial Christoffel symbols, gamma_s[i][j][k] -> Gamma^(i+1)_(j+1)(k+1)
    gamma_s: np.ndarray
    # Coriolis Christoffel symbols, gamma_c[i][j] -> Gamma^(i+1)_(j+1)0
    gamma_c: np.ndarray
    f: np.ndarray
    x_gnom: np.ndarray
    y_gnom: np.ndarray
    delta: np.ndarray


def compute_metric(x1, x2, orient: PanelOrientation,
                   constants: PhysicalConstants) -> MetricSample:
    """Covariant/contravariant metric, Christoffel symbols and Coriolis f."""
    x = np.tan(np.asarray(x1, dtype=float))
    y = np.tan(np.asarray(x2, dtype=float))
    a = constants.radius
    omega = constants.omega
    d2 = 1.0 + x**2 + y**2
    delta = np.sqrt(d2)
    opx = 1.0 + x**2
    opy = 1.0 + y**2
    sp, cp = np.sin(orient.phi), np.cos(orient.phi)
    sa, ca = np.sin(orient.alpha), np.cos(orient.alpha)
    # projection of the rotation axis: delta * (r_hat . z_hat) type factor
    s_rot = sp - x * cp * sa + y * cp * ca

    sqrt_g = a**2 * opx * opy / (delta * d2)
    h11 = d2 / (a**2 * opx)
    h12 = x * y * d2 / (a**2 * opx * opy)
    h22 = d2 / (a**2 * opy)
    g11 = a**2 / d2**2 * opx**2 * opy
    g12 = -(a**2) / d2**2 * x * y * opx * opy
    g22 = a**2 / d2**2 * opx * opy**2
    g00 = 1.0 + a**2 / d2 * omega**2 * (d2 - s_rot**2)
    g01 = a**2 / d2 * omega * opx * (cp * ca - y * sp)
    g02 = a**2 / d2 * omega * opy * (cp * sa + x * sp)

    zeros = np.zeros_like(x)
    gamma_s = np.empty((2, 2, 2) + x.shape)
    gamma_s[0, 0, 0] = 2.0 * x * y**2 / d2
    gamma_s[0, 0, 1] = gamma_s[0, 1, 0] = -y * opy / d2
    gamma_s[0, 1, 1] = zeros
    gamma_s[1, 0, 0] = zeros
    gamma_s[1, 0, 1] = gamma_s[1, 1, 0] = -x * opx / d2
    gamma_s[1, 1, 1] = 2.0 * x**2 * y / d2

    gamma_c = np.empty((2, 2) + x.shape)
    gamma_c[0, 0] = omega * x * y / d2 * s_rot
    gamma_c[0, 1] = -omega * opy / d2 * s_rot
    gamma_c[1, 0] = omega * opx / d2 * s_rot
    gamma_c[1, 1] = -omega * x * y / d2 * s_rot

    f = 2.0 * omega / delta * s_rot

    return MetricSample(sqrt_g=sqrt_g, h11=h11, h12=h12, h22=h22,
                        g11=g11, g12=g12, g22=g22, g00=g00, g01=g01, g02=g02,
                        gamma_s=gamma_s, gamma_c=gamma_c, f=f,
                        x_gnom=x, y_gnom=y, delta=delta)


class Grid:
    """Precomputed cubed-sphere grid: node coordinates and metric fields.

    Node arrays are shaped (6, n, n) with n = ne*ns; the last axis is x1 and
    runs element-by-element with ns Gauss-Legendre nodes each.  Edge arrays
    hold the metric at the x1- and x2-edge flux points, shaped
    (6, n, ne + 1) and (6, ne + 1, n).
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self.dfr = DfrOperator(ns=spec.ns)
        ne, ns = spec.ne, spec.ns
        self.delta_x = (np.pi / 2.0) / ne
        bounds = -EDGE_ANGLE + self.delta_x * np.arange(ne + 1)
        centers = 0.5 * (bounds[:-1] + bounds[1:])
        coords = (centers[:, None]
                  + 0.5 * self.delta_x * self.dfr.nodes[None, :]).ravel()
        self.elem_bounds = bounds
        self.coords_1d = coords       # identical along x1 and x2
        self.n_side = ne * ns

        self.orientations = derive_panel_orientations(spec.rotation)

        x1n, x2n = np.meshgrid(coords, coords, indexing="xy")  # (n2, n1)
        x1e, x2e = np.meshgrid(bounds, coords, indexing="xy")   # x1-edges
        x1f, x2f = np.meshgrid(coords, bounds, indexing="xy")   # x2-edges

        self.nodes = self._stack_metric(x1n, x2n)
        self.edge1 = self._stack_metric(x1e, x2e)
        self.edge2 = self._stack_metric(x1f, x2f)

        lon = np.empty((6,) + x1n.shape)
        lat = np.empty((6,) + x1n.shape)
        for orient in self.orientations:
            lam, phi = panel_to_sphere(x1n, x2n, orient)
            lon[orient.panel] = lam
            lat[orient.panel] = phi
        self.lon, self.lat = lon, lat

    def _stack_metric(self, x1, x2) -> MetricSample:
        samples = [compute_metric(x1, x2, o, self.spec.constants)
                   for o in self.orientations]
        def cat(name):
            return np.stack([getattr(s, name) for s in samples])
        kwargs = {name: cat(name) for name in (
            "sqrt_g", "h11", "h12", "h22", "g11", "g12", "g22",
            "g00", "g01", "g02", "f", "x_gnom", "y_gnom", "delta")}
        kwargs["gamma_s"] = np.stack([s.gamma_s for s in samples], axis=3)
        kwargs["gamma_c"] = np.stack([s.gamma_c for s in samples], axis=2)
        return MetricSample(**kwargs)

    def node_positions(self, panel: int):
        """(x1, x2) meshgrid of a panel's solution points."""
        return np.meshgrid(self.coords_1d, self.coords_1d, indexing="xy")

    def mean_resolution_deg(self) -> float:
        return 90.0 / (self.spec.ne * self.spec.ns)
