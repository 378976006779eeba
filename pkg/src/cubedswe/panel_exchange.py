"""Panel interface pairing and vector transforms across panel boundaries.

The six panels meet along 12 interfaces.  Neighbouring panels share the edge
curve but use different coordinate bases, so edge states and fluxes must be
transformed when crossing.  Pairing (which side of which panel touches which
side of which other panel, and whether the edge coordinate runs backwards) is
detected geometrically from the embedded edge points, and the 2x2 contravariant
transform matrices are evaluated exactly through the embedding, then frozen
per interface point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (EDGE_ANGLE, Grid, PanelOrientation, panel_frame,
                       gnomonic_to_unit_vectors,
                       spherical_wind_to_contravariant,
                       contravariant_to_spherical_wind, panel_to_sphere)

# side codes: 0 -> x1 = -pi/4, 1 -> x1 = +pi/4, 2 -> x2 = -pi/4, 3 -> x2 = +pi/4
SIDE_LEFT, SIDE_RIGHT, SIDE_BOTTOM, SIDE_TOP = 0, 1, 2, 3

# direction index (1 or 2) normal to each side, and the outward sign
_SIDE_NORMAL = {SIDE_LEFT: 1, SIDE_RIGHT: 1, SIDE_BOTTOM: 2, SIDE_TOP: 2}
_SIDE_OUTWARD = {SIDE_LEFT: -1.0, SIDE_RIGHT: 1.0, SIDE_BOTTOM: -1.0,
                 SIDE_TOP: 1.0}


def side_coordinates(side: int, t):
    """(x1, x2) of edge points with along-edge coordinate(s) t."""
    t = np.asarray(t, dtype=float)
    edge = np.full_like(t, EDGE_ANGLE)
    if side == SIDE_LEFT:
        return -edge, t
    if side == SIDE_RIGHT:
        return edge, t
    if side == SIDE_BOTTOM:
        return t, -edge
    if side == SIDE_TOP:
        return t, edge
    raise ValueError(f"bad side {side}")


@dataclass(frozen=True)
class InterfaceDescriptor:
    """One of the 12 panel-panel interfaces.

    Panel `panel_a` (always the smaller index, the flux owner) meets panel
    `panel_b`; `flipped` means the along-edge coordinates run in opposite
    directions, so point k on side a coincides with point n-1-k on side b.
    """

    panel_a: int
    side_a: int
    panel_b: int
    side_b: int
    flipped: bool

    @property
    def normal_a(self) -> int:
        return _SIDE_NORMAL[self.side_a]

    @property
    def normal_b(self) -> int:
        return _SIDE_NORMAL[self.side_b]


def build_edge_pairing(orientations: list[PanelOrientation]
                       ) -> list[InterfaceDescriptor]:
    """Detect the 12 interfaces by matching embedded edge points.

    Shared edges carry the same along-edge angle up to sign, so a symmetric
    probe pair (-s, +s) lands on the same two physical points from both
    sides; their order distinguishes aligned from reversed edges.
    """
    probes = np.array([-0.53, 0.53]) * EDGE_ANGLE
    edge_pts = {}
    for orient in orientations:
        for side in range(4):
            x1, x2 = side_coordinates(side, probes)
            edge_pts[(orient.panel, side)] = gnomonic_to_unit_vectors(
                np.tan(x1), np.tan(x2), orient)

    out = []
    keys = sorted(edge_pts)
    for i, ka in enumerate(keys):
        pa = edge_pts[ka]
        for kb in keys[i + 1:]:
            if kb[0] == ka[0]:
                continue
            pb = edge_pts[kb]
            same = np.linalg.norm(pa - pb) < 1e-9
            flip = np.linalg.norm(pa - pb[::-1]) < 1e-9
            if same or flip:
                out.append(InterfaceDescriptor(
                    panel_a=ka[0], side_a=ka[1], panel_b=kb[0], side_b=kb[1],
                    flipped=bool(flip)))
    if len(out) != 12:
        raise RuntimeError(f"expected 12 interfaces, found {len(out)}")
    counts = np.zeros(6, dtype=int)
    for d in out:
        counts[d.panel_a] += 1
        counts[d.panel_b] += 1
    if not np.all(counts == 4):
        raise RuntimeError("inconsistent panel adjacency")
    return out


def edge_transform_matrices(iface: InterfaceDescriptor,
                            orientations: list[PanelOrientation],
                            t_a: np.ndarray, radius: float) -> np.ndarray:
    """M[b <- a](t): contravariant components on panel b of panel a's basis.

    Evaluated exactly by pushing the two coordinate basis vectors through the
    embedding at each edge point.  Shape (2, 2, len(t_a)); matrices have unit
    determinant.
    """
    t_a = np.asarray(t_a, dtype=float)
    oa = orientations[iface.panel_a]
    ob = orientations[iface.panel_b]
    x1a, x2a = side_coordinates(iface.side_a, t_a)
    lam, phi = panel_to_sphere(x1a, x2a, oa)
    ones, zeros = np.ones_like(t_a), np.zeros_like(t_a)
    m = np.empty((2, 2) + t_a.shape)
    for col, (u1, u2) in enumerate(((ones, zeros), (zeros, ones))):
        ue, vn = contravariant_to_spherical_wind(x1a, x2a, u1, u2, oa, radius)
        w1, w2 = spherical_wind_to_contravariant(lam, phi, ue, vn, ob, radius)
        m[0, col] = w1
        m[1, col] = w2
    return m


def invert_unimodular(m: np.ndarray) -> np.ndarray:
    """Inverse of 2x2 matrices with det = 1 (leading axes are 2, 2)."""
    inv = np.empty_like(m)
    inv[0, 0] = m[1, 1]
    inv[0, 1] = -m[0, 1]
    inv[1, 0] = -m[1, 0]
    inv[1, 1] = m[0, 0]
    return inv


def transform_contravariant(m: np.ndarray, u1, u2):
    """Apply pointwise 2x2 matrices (2, 2, ...) to a contravariant vector."""
    return (m[0, 0] * u1 + m[0, 1] * u2, m[1, 0] * u1 + m[1, 1] * u2)


def transform_covariant(m: np.ndarray, v1, v2):
    """Covariant components transform with the inverse transpose of M."""
    inv = invert_unimodular(m)
    return (inv[0, 0] * v1 + inv[1, 0] * v2, inv[0, 1] * v1 + inv[1, 1] * v2)


@dataclass
class InterfaceData:
    """Frozen per-interface exchange data at the edge flux points.

    Index k runs along the owner's edge coordinate; `perm_b` maps k to the
    matching point index on side b.  m_a_from_b converts neighbour edge
    vectors into owner coordinates; m_b_from_a converts the owner's Riemann
    flux back.  `sign` is the +-1 relating the two outward normal fluxes.
    """

    desc: InterfaceDescriptor
    perm_b: np.ndarray
    m_a_from_b: np.ndarray
    m_b_from_a: np.ndarray
    sign: float


def build_interface_data(grid: Grid) -> list[InterfaceData]:
    """All 12 interfaces of a grid with transforms at the edge points."""
    orients = grid.orientations
    radius = grid.spec.constants.radius
    t = grid.coords_1d
    n = t.size
    out = []
    for desc in build_edge_pairing(orients):
        perm = np.arange(n)[::-1] if desc.flipped else np.arange(n)
        m_ba = edge_transform_matrices(desc, orients, t, radius)
        det = m_ba[0, 0] * m_ba[1, 1] - m_ba[0, 1] * m_ba[1, 0]
        if not np.allclose(det, 1.0, atol=1e-10):
            raise RuntimeError("interface transform is not unimodular")
        m_ab = invert_unimodular(m_ba)
        # sign relating the normal components: with aligned outward normals
        # the +-1 entry of M in the (normal_b, normal_a) slot gives the
        # orientation factor of the transferred flux
        na, nb = desc.normal_a - 1, desc.normal_b - 1
        entry = m_ba[nb, na]
        sign = float(np.sign(entry.flat[0]))
        if not np.allclose(np.abs(entry), 1.0, atol=1e-10):
            raise RuntimeError("normal direction does not map to +-1")
        out.append(InterfaceData(desc=desc, perm_b=perm, m_a_from_b=m_ab,
                                 m_b_from_a=m_ba, sign=sign))
    return out
