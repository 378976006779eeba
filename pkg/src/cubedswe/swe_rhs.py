"""Semi-discrete shallow-water operator on the cubed sphere.

The prognostic state is q = (sqrt(g~) H, sqrt(g~) H u~1, sqrt(g~) H u~2) per
node, where the tilde marks quantities rescaled to the [-1, 1]^2 reference
element; the rescaling is absorbed into frozen metric fields so the spatial
operator needs no per-element Jacobian factors.  Fluxes are reconstructed
direction-by-direction: interior flux values at the solution points plus AUSM
interface fluxes define the continuous flux polynomial whose derivative
updates each element.

Panel interfaces are handled by the owner panel (the lower panel index): the
neighbour's edge state is rotated into the owner's basis, a single Riemann
flux is computed there, and the neighbour receives the exact tensor transform
of that flux.  Both panels therefore use identical mass-flux numbers, making
global mass conservation exact to round-off.

All arithmetic propagates complex perturbations, so Jacobian-vector products
can be formed with the complex-step derivative.
"""

from __future__ import annotations

import numpy as np

from .geometry import (Grid, contravariant_to_spherical_wind,
                       spherical_wind_to_contravariant)
from .panel_exchange import (SIDE_BOTTOM, SIDE_LEFT, SIDE_RIGHT, SIDE_TOP,
                             InterfaceData, build_interface_data,
                             transform_contravariant)
from .riemann import ausm_flux

N_COMP = 3


class ShallowWaterModel:
    """Frozen grid data plus the semi-discrete right-hand side.

    `topography` is the bottom height h_B sampled at the solution points,
    shaped (6, n, n), or None for a flat bottom.  `topography_gradient`
    optionally supplies the analytic gradient (d h_B / d x1, d h_B / d x2)
    in panel coordinates at the same points; without it the gradient is
    taken from the nodal interpolant, which costs one order of accuracy
    relative to the solution representation.
    """

    def __init__(self, grid: Grid, topography: np.ndarray | None = None,
                 topography_gradient: tuple | None = None):
        self.grid = grid
        spec = grid.spec
        self.gravity = spec.constants.gravity
        self.ne, self.ns = spec.ne, spec.ns
        self.n = grid.n_side
        dx = grid.delta_x
        scale_g = dx * dx / 4.0   # area factor of the reference element map
        scale_h = 4.0 / (dx * dx)

        nm = grid.nodes
        self.sg = scale_g * nm.sqrt_g
        self.h11 = scale_h * nm.h11
        self.h12 = scale_h * nm.h12
        self.h22 = scale_h * nm.h22
        # reference-element Christoffel symbols: spatial ones pick up dx/2,
        # the Coriolis ones are invariant
        self.gam_s = (dx / 2.0) * nm.gamma_s
        self.gam_c = nm.gamma_c

        e1, e2 = grid.edge1, grid.edge2
        self.sg_e1 = scale_g * e1.sqrt_g
        self.h11_e1 = scale_h * e1.h11
        self.h12_e1 = scale_h * e1.h12
        # direction-2 edge fields transposed to (panel, along-edge, face)
        self.sg_e2 = scale_g * e2.sqrt_g.transpose(0, 2, 1)
        self.h12_e2 = scale_h * e2.h12.transpose(0, 2, 1)
        self.h22_e2 = scale_h * e2.h22.transpose(0, 2, 1)

        self.interfaces: list[InterfaceData] = build_interface_data(grid)
        self.velocity_scale = 2.0 / dx     # physical u -> reference u~

        if topography is None:
            topography = np.zeros((6, self.n, self.n))
        self.topography = np.asarray(topography, dtype=float)
        if topography_gradient is not None:
            # panel-coordinate gradient -> reference-element coordinate
            self.topo_grad1 = (dx / 2.0) * np.asarray(topography_gradient[0])
            self.topo_grad2 = (dx / 2.0) * np.asarray(topography_gradient[1])
        else:
            self.topo_grad1, self.topo_grad2 = self._topography_gradient()
        self.has_topography = bool(np.any(self.topography))
        # metric-contracted topography gradient h^{ij} d_j h_B, frozen data
        self.topo_force1 = (self.h11 * self.topo_grad1
                            + self.h12 * self.topo_grad2)
        self.topo_force2 = (self.h12 * self.topo_grad1
                            + self.h22 * self.topo_grad2)

    # ------------------------------------------------------------------
    # state construction and inspection

    def state_from_spherical(self, depth, u_east, v_north) -> np.ndarray:
        """Assemble q from fluid depth and physical zonal/meridional wind.

        All inputs are (6, n, n) node fields; `depth` is the fluid thickness
        H (surface height minus topography).
        """
        g = self.grid
        q = np.empty((N_COMP, 6, self.n, self.n))
        for orient in g.orientations:
            p = orient.panel
            u1, u2 = spherical_wind_to_contravariant(
                g.lon[p], g.lat[p], u_east[p], v_north[p], orient,
                g.spec.constants.radius)
            q[0, p] = self.sg[p] * depth[p]
            q[1, p] = q[0, p] * self.velocity_scale * u1
            q[2, p] = q[0, p] * self.velocity_scale * u2
        return q

    def primitives(self, q):
        """Depth H and reference-element contravariant velocities."""
        depth = q[0] / self.sg
        u1 = q[1] / q[0]
        u2 = q[2] / q[0]
        return depth, u1, u2

    def wind_fields(self, q):
        """Physical (east, north) wind components at the nodes."""
        g = self.grid
        depth, u1, u2 = self.primitives(q)
        x1, x2 = np.meshgrid(g.coords_1d, g.coords_1d, indexing="xy")
        ue = np.empty_like(depth)
        vn = np.empty_like(depth)
        for orient in g.orientations:
            p = orient.panel
            ue[p], vn[p] = contravariant_to_spherical_wind(
                x1, x2, u1[p] / self.velocity_scale,
                u2[p] / self.velocity_scale, orient, g.spec.constants.radius)
        return ue, vn

    # ------------------------------------------------------------------
    # spatial operator

    def rhs(self, q: np.ndarray) -> np.ndarray:
        """Tendency dq/dt of the semi-discrete system."""
        ne, ns, n = self.ne, self.ns, self.n
        dfr = self.grid.dfr
        g_r = self.gravity
        depth, u1, u2 = self.primitives(q)
        half_g = 0.5 * g_r

        # interior coordinate-direction fluxes at the solution points
        press = half_g * self.sg * depth**2
        f1 = np.empty_like(q)
        f1[0] = q[1]
        f1[1] = q[1] * u1 + self.h11 * press
        f1[2] = q[1] * u2 + self.h12 * press
        f2 = np.empty_like(q)
        f2[0] = q[2]
        f2[1] = q[2] * u1 + self.h12 * press
        f2[2] = q[2] * u2 + self.h22 * press

        # element edge traces of the conserved variables, per direction
        q5 = q.reshape(N_COMP, 6, n, ne, ns)
        tr1_l = q5 @ dfr.edge_interp_left     # (3, 6, n, ne) at xi1 = -1
        tr1_r = q5 @ dfr.edge_interp_right
        qt5 = q.transpose(0, 1, 3, 2).reshape(N_COMP, 6, n, ne, ns)
        tr2_l = qt5 @ dfr.edge_interp_left    # transposed: along-edge is x1
        tr2_r = qt5 @ dfr.edge_interp_right

        cdtype = q.dtype
        g1 = np.zeros((N_COMP, 6, n, ne + 1), dtype=cdtype)
        g2 = np.zeros((N_COMP, 6, n, ne + 1), dtype=cdtype)

        # interior element faces
        for gface, trl, trr, sg_e, h_nn, h_1n, h_2n, normal in (
            (g1, tr1_l, tr1_r, self.sg_e1, self.h11_e1, self.h11_e1,
             self.h12_e1, 1),
            (g2, tr2_l, tr2_r, self.sg_e2, self.h22_e2, self.h12_e2,
             self.h22_e2, 2),
        ):
            ql = trr[..., :ne - 1]
            qr = trl[..., 1:]
            sg = sg_e[:, :, 1:ne]
            hl, hr = ql[0] / sg, qr[0] / sg
            u1l, u2l = ql[1] / ql[0], ql[2] / ql[0]
            u1r, u2r = qr[1] / qr[0], qr[2] / qr[0]
            unl = u1l if normal == 1 else u2l
            unr = u1r if normal == 1 else u2r
            gface[:, :, :, 1:ne] = ausm_flux(
                hl, u1l, u2l, hr, u1r, u2r, unl, unr, sg,
                h_nn[:, :, 1:ne], h_1n[:, :, 1:ne], h_2n[:, :, 1:ne], g_r)

        # panel interfaces: owner computes, neighbour receives the transform
        def side_trace(panel, side):
            if side == SIDE_LEFT:
                return tr1_l[:, panel, :, 0]
            if side == SIDE_RIGHT:
                return tr1_r[:, panel, :, ne - 1]
            if side == SIDE_BOTTOM:
                return tr2_l[:, panel, :, 0]
            return tr2_r[:, panel, :, ne - 1]

        def side_face(side):
            return 0 if side in (SIDE_LEFT, SIDE_BOTTOM) else ne

        def side_metric(panel, side):
            face = side_face(side)
            if side in (SIDE_LEFT, SIDE_RIGHT):
                return (self.sg_e1[panel, :, face], self.h11_e1[panel, :, face],
                        self.h11_e1[panel, :, face], self.h12_e1[panel, :, face])
            return (self.sg_e2[panel, :, face], self.h22_e2[panel, :, face],
                    self.h12_e2[panel, :, face], self.h22_e2[panel, :, face])

        for data in self.interfaces:
            desc = data.desc
            pa, pb = desc.panel_a, desc.panel_b
            qa = side_trace(pa, desc.side_a)
            qb = side_trace(pb, desc.side_b)[:, data.perm_b]
            sg, h_nn, h_1n, h_2n = side_metric(pa, desc.side_a)
            ha = qa[0] / sg
            ua1, ua2 = qa[1] / qa[0], qa[2] / qa[0]
            hb = qb[0] / sg
            vb1, vb2 = qb[1] / qb[0], qb[2] / qb[0]
            ub1, ub2 = transform_contravariant(data.m_a_from_b, vb1, vb2)
            if desc.side_a in (SIDE_RIGHT, SIDE_TOP):
                args = (ha, ua1, ua2, hb, ub1, ub2)
                unl, unr = ((ua1, ub1) if desc.normal_a == 1 else (ua2, ub2))
            else:
                args = (hb, ub1, ub2, ha, ua1, ua2)
                unl, unr = ((ub1, ua1) if desc.normal_a == 1 else (ub2, ua2))
            f0, fm1, fm2 = ausm_flux(*args, unl, unr, sg, h_nn, h_1n, h_2n,
                                     g_r)
            ga = g1 if desc.normal_a == 1 else g2
            ga[0, pa, :, side_face(desc.side_a)] = f0
            ga[1, pa, :, side_face(desc.side_a)] = fm1
            ga[2, pa, :, side_face(desc.side_a)] = fm2
            t1, t2 = transform_contravariant(data.m_b_from_a, fm1, fm2)
            gb = g1 if desc.normal_b == 1 else g2
            gb[0, pb, :, side_face(desc.side_b)] = (data.sign * f0)[data.perm_b]
            gb[1, pb, :, side_face(desc.side_b)] = (data.sign * t1)[data.perm_b]
            gb[2, pb, :, side_face(desc.side_b)] = (data.sign * t2)[data.perm_b]

        # flux-reconstruction divergence, one direction at a time
        div = self._dfr_div(f1, g1)
        div += self._dfr_div(f2.transpose(0, 1, 3, 2), g2).transpose(0, 1, 3, 2)

        out = -div
        src1, src2 = self._momentum_sources(depth, u1, u2)
        out[1] += src1
        out[2] += src2
        return out

    def _dfr_div(self, flux, faces):
        """Derivative along the last axis from interior values + face fluxes."""
        ne, ns, n = self.ne, self.ns, self.n
        dfr = self.grid.dfr
        f5 = flux.reshape(N_COMP, 6, n, ne, ns)
        out = f5 @ dfr.diff_interior.T
        out += faces[..., :ne, None] * dfr.lift_left
        out += faces[..., 1:, None] * dfr.lift_right
        return out.reshape(N_COMP, 6, n, n)

    def _momentum_sources(self, depth, u1, u2):
        """Christoffel, Coriolis and topography sources of both momenta."""
        half_g = 0.5 * self.gravity
        h2 = half_g * depth * depth
        du1 = depth * u1
        t11 = du1 * u1 + self.h11 * h2
        t12 = du1 * u2 + self.h12 * h2
        t22 = depth * u2 * u2 + self.h22 * h2
        out = []
        for i, topo_force in ((0, self.topo_force1), (1, self.topo_force2)):
            gs, gc = self.gam_s[i], self.gam_c[i]
            src = gs[0, 0] * t11 + 2.0 * gs[0, 1] * t12 + gs[1, 1] * t22
            src += 2.0 * depth * (gc[0] * u1 + gc[1] * u2)
            if self.has_topography:
                src += self.gravity * depth * topo_force
            out.append(-self.sg * src)
        return out

    # ------------------------------------------------------------------
    # topography

    def _topography_gradient(self):
        """Reference-coordinate gradient of the nodal interpolant of h_B.

        The bottom height is data rather than an evolved flux, so it is
        differentiated element-by-element with the plain nodal operator,
        without any interface correction.
        """
        hb = self.topography
        if not np.any(hb):
            zero = np.zeros_like(hb)
            return zero, zero.copy()
        ne, ns, n = self.ne, self.ns, self.n
        d = self.grid.dfr.diff_nodal
        g1 = (hb.reshape(6, n, ne, ns) @ d.T).reshape(6, n, n)
        g2 = (hb.transpose(0, 2, 1).reshape(6, n, ne, ns) @ d.T
              ).reshape(6, n, n).transpose(0, 2, 1)
        return g1, g2
