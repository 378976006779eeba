"""One-dimensional direct flux reconstruction operators.

The scheme represents the solution by its values at the Ns Gauss-Legendre
nodes of each element.  A continuous flux polynomial of degree Ns+1 is built
through the interior flux values plus the two interface (Riemann) fluxes, and
its derivative is evaluated back at the solution points.  Everything here is
precomputed into small dense matrices applied per element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def gauss_legendre(ns: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes (ascending, in (-1, 1)) and quadrature weights."""
    if ns < 1:
        raise ValueError(f"need at least one solution point, got {ns}")
    nodes, weights = np.polynomial.legendre.leggauss(ns)
    return nodes, weights


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_eval_matrix(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows evaluate the nodal Lagrange basis of `nodes` at the points `x`.

    Barycentric form; exact passthrough when x coincides with a node.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = barycentric_weights(nodes)
    out = np.empty((x.size, nodes.size))
    for i, xi in enumerate(x):
        d = xi - nodes
        hit = np.isclose(d, 0.0, atol=1e-14)
        if np.any(hit):
            row = np.zeros(nodes.size)
            row[np.argmax(hit)] = 1.0
        else:
            c = w / d
            row = c / c.sum()
        out[i] = row
    return out


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """D[i, j] = l_j'(x_i) for the Lagrange basis on `nodes`."""
    nodes = np.asarray(nodes, dtype=float)
    w = barycentric_weights(nodes)
    n = nodes.size
    d = np.empty((n, n))
    for i in range(n):
        denom = nodes[i] - nodes
        denom[i] = 1.0
        off = w / (w[i] * denom)
        off[i] = 0.0
        d[i] = off
        d[i, i] = -off.sum()
    return d


@dataclass
class DfrOperator:
    """Precomputed 1-D operators for Ns solution points per element edge.

    ext_diff maps the extended value vector [F(-1), f_1..f_Ns, F(+1)] to the
    derivative of the degree-(Ns+1) interpolant at the interior nodes.  It is
    split into the interior block and the two boundary lift columns so the
    2-D solver can fuse them into matrix products.
    """

    ns: int
    nodes: np.ndarray = field(init=False)
    quad_weights: np.ndarray = field(init=False)
    edge_interp_left: np.ndarray = field(init=False)
    edge_interp_right: np.ndarray = field(init=False)
    ext_diff: np.ndarray = field(init=False)
    diff_interior: np.ndarray = field(init=False)
    lift_left: np.ndarray = field(init=False)
    lift_right: np.ndarray = field(init=False)
    # derivative of the plain Ns-point interpolant; used for diagnostics and
    # topography gradients where no interface data exists
    diff_nodal: np.ndarray = field(init=False)

    def __post_init__(self):
        nodes, weights = gauss_legendre(self.ns)
        self.nodes = nodes
        self.quad_weights = weights
        interp = lagrange_eval_matrix(nodes, np.array([-1.0, 1.0]))
        self.edge_interp_left = interp[0]
        self.edge_interp_right = interp[1]
        ext_nodes = np.concatenate(([-1.0], nodes, [1.0]))
        d_ext = differentiation_matrix(ext_nodes)
        self.ext_diff = d_ext[1:-1, :]
        self.lift_left = self.ext_diff[:, 0].copy()
        self.diff_interior = self.ext_diff[:, 1:-1].copy()
        self.lift_right = self.ext_diff[:, -1].copy()
        self.diff_nodal = differentiation_matrix(nodes)

    def edge_values(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values of the nodal interpolant at xi = -1 and xi = +1.

        `coeffs` may carry leading axes; the node axis is the last one.
        """
        c = np.asarray(coeffs)
        return c @ self.edge_interp_left, c @ self.edge_interp_right

    def dfr_derivative(self, interior_flux, f_left, f_right):
        """Derivative of the continuous flux polynomial at the solution points."""
        f = np.asarray(interior_flux)
        out = f @ self.diff_interior.T
        out += np.multiply.outer(np.asarray(f_left), self.lift_left)
        out += np.multiply.outer(np.asarray(f_right), self.lift_right)
        return out

    def semi_discrete_update(self, interior_flux, f_left, f_right, delta):
        """Tendency -(2/delta) F'(xi_k) for an element of size `delta`."""
        return -(2.0 / delta) * self.dfr_derivative(interior_flux, f_left, f_right)
