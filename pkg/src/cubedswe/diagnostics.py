"""Global integrals, error norms and derived fields for solver output.

Integrals use the Gauss-Legendre product rule per element with the metric
area factor; they are exact for the polynomial integrands of the scheme, so
the mass integral of the semi-discrete tendency telescopes to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .swe_rhs import ShallowWaterModel


def _quad_weights_2d(model: ShallowWaterModel) -> np.ndarray:
    w = model.grid.dfr.quad_weights
    ne, ns, n = model.ne, model.ns, model.n
    w1 = np.tile(w, ne)
    return np.outer(w1, w1)


def global_integral(model: ShallowWaterModel, density: np.ndarray) -> float:
    """Integral over the sphere of a pointwise density (per unit area)."""
    w2 = _quad_weights_2d(model)
    return float(np.einsum("pij,ij->", np.real(density) * model.sg, w2))


def error_norms(model: ShallowWaterModel, q, q_ref) -> dict[str, float]:
    """Normalized L1/L2/Linf errors of the fluid depth against a reference."""
    depth = np.real(q[0] / model.sg)
    ref = np.real(q_ref[0] / model.sg)
    diff = depth - ref
    w2 = _quad_weights_2d(model)
    area = model.sg * w2
    l1 = np.sum(np.abs(diff) * area) / np.sum(np.abs(ref) * area)
    l2 = np.sqrt(np.sum(diff**2 * area) / np.sum(ref**2 * area))
    linf = np.abs(diff).max() / np.abs(ref).max()
    return {"l1": float(l1), "l2": float(l2), "linf": float(linf)}


def relative_vorticity(model: ShallowWaterModel, q) -> np.ndarray:
    """Vorticity (curl of the covariant velocity over sqrt(g)) at the nodes.

    Differentiation is element-local with the plain nodal operator; the
    field is diagnostic only and may be mildly discontinuous at element
    boundaries.
    """
    grid = model.grid
    dx = grid.delta_x
    scale = dx * dx / 4.0
    nm = grid.nodes
    _, u1, u2 = model.primitives(q)
    # covariant reference-element velocity components
    g11, g12, g22 = scale * nm.g11, scale * nm.g12, scale * nm.g22
    v1 = g11 * u1 + g12 * u2
    v2 = g12 * u1 + g22 * u2
    ne, ns, n = model.ne, model.ns, model.n
    d = grid.dfr.diff_nodal

    def ddx1(f):
        return (f.reshape(6, n, ne, ns) @ d.T).reshape(6, n, n)

    def ddx2(f):
        ft = f.transpose(0, 2, 1)
        return ddx1(ft).transpose(0, 2, 1)

    return np.real((ddx1(v2) - ddx2(v1)) / model.sg)


def energy_density(model: ShallowWaterModel, q) -> np.ndarray:
    """Total (kinetic + available potential) energy per unit area."""
    grid = model.grid
    dx = grid.delta_x
    scale = dx * dx / 4.0
    nm = grid.nodes
    depth, u1, u2 = model.primitives(q)
    g11, g12, g22 = scale * nm.g11, scale * nm.g12, scale * nm.g22
    ke = 0.5 * depth * (g11 * u1**2 + 2.0 * g12 * u1 * u2 + g22 * u2**2)
    hb = model.topography
    pe = 0.5 * model.gravity * ((depth + hb) ** 2 - hb**2)
    return np.real(ke + pe)


def potential_enstrophy_density(model: ShallowWaterModel, q) -> np.ndarray:
    """(zeta + f)^2 / (2 H) at the nodes."""
    zeta = relative_vorticity(model, q)
    depth = np.real(q[0] / model.sg)
    return (zeta + model.grid.nodes.f) ** 2 / (2.0 * depth)


@dataclass
class ConservationTrace:
    """Normalized drift of mass, energy and potential enstrophy integrals."""

    mass0: float
    energy0: float
    enstrophy0: float

    @classmethod
    def start(cls, model: ShallowWaterModel, q) -> "ConservationTrace":
        return cls(
            mass0=global_integral(model, np.real(q[0] / model.sg)),
            energy0=global_integral(model, energy_density(model, q)),
            enstrophy0=global_integral(
                model, potential_enstrophy_density(model, q)),
        )

    def drift(self, model: ShallowWaterModel, q) -> dict[str, float]:
        mass = global_integral(model, np.real(q[0] / model.sg))
        energy = global_integral(model, energy_density(model, q))
        ens = global_integral(model, potential_enstrophy_density(model, q))
        return {
            "mass": (mass - self.mass0) / self.mass0,
            "energy": (energy - self.energy0) / self.energy0,
            "enstrophy": (ens - self.enstrophy0) / self.enstrophy0,
        }


def mean_resolution_deg(model: ShallowWaterModel) -> float:
    """Average node spacing in degrees, 90 / (Ne * Ns)."""
    return 90.0 / (model.ne * model.ns)


def courant_number(model: ShallowWaterModel, q, dt: float) -> float:
    """Advective-plus-gravity-wave Courant estimate at the given step size.

    Uses the per-direction speed |u^i| + sqrt(h^ii g H) against the average
    node spacing of an element in cubed-sphere coordinates.
    """
    depth, u1, u2 = model.primitives(q)
    depth = np.real(depth)
    # convert reference-element velocities back to cubed-sphere components
    dx = model.grid.delta_x
    nm = model.grid.nodes
    u1p = np.real(u1) * (dx / 2.0)
    u2p = np.real(u2) * (dx / 2.0)
    c1 = np.abs(u1p) + np.sqrt(nm.h11 * model.gravity * depth)
    c2 = np.abs(u2p) + np.sqrt(nm.h22 * model.gravity * depth)
    spacing = dx / model.ns
    return float(max(c1.max(), c2.max()) * dt / spacing)
