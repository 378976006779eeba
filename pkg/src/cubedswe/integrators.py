"""Multistep exponential propagation iterative (EPI) time integrators.

Orders 2-6 with constant time step.  Each step evaluates one phi-function
combination through the adaptive Krylov engine; the Jacobian is applied
matrix-free, either exactly (benchmark problems) or through the complex-step
approximation Jv = Im[F(q + i*eps*v)] / eps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .krylov import PhiCombinationRequest, PhiCombinationResult, phi_combination

logger = logging.getLogger(__name__)

DEFAULT_COMPLEX_STEP = 1.5e-8


def phi_scalar(k: int, z: complex) -> complex:
    """phi_0(z) = exp(z); phi_(k+1)(z) = (phi_k(z) - 1/k!) / z; phi_k(0) = 1/k!."""
    if k < 0:
        raise ValueError("phi index must be nonnegative")
    if k == 0:
        return np.exp(z)
    if abs(z) < 0.5:
        # closed forms cancel catastrophically near 0; sum the series instead
        term = 1.0 / factorial(k)
        acc = term
        zj = 1.0
        for j in range(1, 60):
            zj *= z
            term_j = zj / factorial(k + j)
            acc += term_j
            if abs(term_j) < 1e-18 * abs(acc):
                break
        return acc
    val = np.exp(z)
    for i in range(k):
        val = (val - 1.0 / factorial(i)) / z
    return val


_EPI_COEFFS = {
    2: [],
    3: [[Fraction(0)], [Fraction(2, 3)]],
    4: [
        [Fraction(0), Fraction(0)],
        [Fraction(-3, 10), Fraction(3, 40)],
        [Fraction(32, 5), Fraction(-11, 10)],
    ],
    5: [
        [Fraction(0), Fraction(0), Fraction(0)],
        [Fraction(-4, 5), Fraction(2, 5), Fraction(-4, 45)],
        [Fraction(12), Fraction(-9, 2), Fraction(8, 9)],
        [Fraction(3), Fraction(0), Fraction(-1, 3)],
    ],
    6: [
        [Fraction(0), Fraction(0), Fraction(0), Fraction(0)],
        [Fraction(-49, 60), Fraction(351, 560), Fraction(-359, 1260), Fraction(367, 6720)],
        [Fraction(92, 7), Fraction(-99, 14), Fraction(176, 63), Fraction(-1, 2)],
        [Fraction(485, 21), Fraction(-151, 14), Fraction(23, 9), Fraction(-31, 168)],
    ],
}


@dataclass
class EpiScheme:
    """Coefficients of a multistep EPI method of the given order."""

    order: int
    a_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.order not in _EPI_COEFFS:
            raise ValueError(f"no EPI scheme of order {self.order}")
        rows = _EPI_COEFFS[self.order]
        if rows:
            self.a_matrix = np.array([[float(c) for c in r] for r in rows])
        else:
            self.a_matrix = np.zeros((0, 0))

    @property
    def history_depth(self) -> int:
        return self.a_matrix.shape[1] if self.a_matrix.size else 0

    @property
    def max_phi(self) -> int:
        return self.a_matrix.shape[0] if self.a_matrix.size else 1


@dataclass
class JacobianHandle:
    """Matrix-free J(q_n) * v products at a frozen base state."""

    rhs: Callable[[np.ndarray], np.ndarray]
    q_base: np.ndarray
    f_base: np.ndarray
    eps: float = DEFAULT_COMPLEX_STEP
    exact_jvp: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if self.exact_jvp is not None:
            return self.exact_jvp(self.q_base, v)
        return np.imag(self.rhs(self.q_base + 1j * self.eps * v)) / self.eps


def remainder(handle: JacobianHandle, q_old: np.ndarray,
              f_old: np.ndarray) -> np.ndarray:
    """Nonlinear remainder R(q_old) = F(q_old) - F(q_n) - J_n (q_old - q_n)."""
    return f_old - handle.f_base - handle(q_old - handle.q_base)


@dataclass
class StepHistory:
    """Most recent (q_(n-i), F(q_(n-i))) pairs, i = 1..depth, newest first."""

    depth: int
    states: list = field(default_factory=list)
    rhs_values: list = field(default_factory=list)

    def push(self, q: np.ndarray, f: np.ndarray):
        self.states.insert(0, q)
        self.rhs_values.insert(0, f)
        del self.states[self.depth:]
        del self.rhs_values[self.depth:]

    @property
    def full(self) -> bool:
        return len(self.states) >= self.depth


def epi_step(scheme: EpiScheme, handle: JacobianHandle, history: StepHistory,
             dt: float, tol: float = 1e-10, m_init: int = 10,
             m_max: int = 128) -> tuple[np.ndarray, PhiCombinationResult]:
    """One EPI step from handle.q_base; returns (q_next, krylov stats)."""
    p_hist = scheme.history_depth
    if p_hist and not history.full:
        raise ValueError("history not yet filled; run startup first")
    m_phi = scheme.max_phi
    b_vectors = [np.zeros_like(handle.q_base) for _ in range(m_phi + 1)]
    b_vectors[1] = dt * handle.f_base
    if p_hist:
        rems = [remainder(handle, history.states[i], history.rhs_values[i])
                for i in range(p_hist)]
        for m in range(m_phi):
            for i in range(p_hist):
                coef = scheme.a_matrix[m, i]
                if coef:
                    b_vectors[m + 1] = b_vectors[m + 1] + coef * dt * rems[i]
    req = PhiCombinationRequest(operator=handle, tau=dt, vectors=b_vectors,
                                tol=tol, m_init=m_init, m_max=m_max)
    res = phi_combination(req)
    return handle.q_base + res.w, res


def startup(scheme: EpiScheme, rhs, q0: np.ndarray, dt: float,
            substeps: int = 64, tol: float = 1e-10, eps: float = DEFAULT_COMPLEX_STEP,
            exact_jvp=None, m_init: int = 10, m_max: int = 128):
    """Fill the multistep history with EPI2 sub-integrations.

    Returns (q_start, history, t_offset): the state after the P startup steps
    of size dt, each integrated with EPI2 at dt/substeps.
    """
    depth = scheme.history_depth
    history = StepHistory(depth=depth)
    epi2 = EpiScheme(order=2)
    q = np.asarray(q0, dtype=float)
    f = np.real(rhs(q)) if exact_jvp is None else rhs(q)
    for _ in range(depth):
        history.push(q, f)
        for _ in range(substeps):
            handle = JacobianHandle(rhs=rhs, q_base=q, f_base=f, eps=eps,
                                    exact_jvp=exact_jvp)
            q, st = epi_step(epi2, handle, StepHistory(depth=0),
                             dt / substeps, tol=tol, m_init=m_init,
                             m_max=m_max)
            m_init = max(2, min(st.final_dim, m_max))
            f = rhs(q) if exact_jvp is not None else np.real(rhs(q))
    return q, history, depth * dt


def integrate(rhs, q0: np.ndarray, dt: float, n_steps: int, order: int = 4,
              tol: float = 1e-10, eps: float = DEFAULT_COMPLEX_STEP,
              exact_jvp=None, startup_substeps: int = 64, m_init: int = 10,
              m_max: int = 128, callback=None):
    """Integrate dq/dt = F(q) over n_steps of size dt with the EPI scheme.

    `callback(step_index, t, q, stats)` is invoked after every main step.
    The startup steps consume the first `history_depth` of the n_steps, so the
    returned state is always at t = n_steps * dt.
    """
    scheme = EpiScheme(order=order)
    depth = scheme.history_depth
    if depth > n_steps:
        raise ValueError(f"order-{order} scheme needs at least {depth} steps")
    if depth:
        q, history, _ = startup(scheme, rhs, q0, dt, substeps=startup_substeps,
                                tol=tol, eps=eps, exact_jvp=exact_jvp,
                                m_init=m_init, m_max=m_max)
        if callback is not None:
            for i in range(depth):
                callback(i + 1, (i + 1) * dt, None, None)
    else:
        q = np.asarray(q0, dtype=float)
        history = StepHistory(depth=0)
    for step in range(depth, n_steps):
        f = rhs(q) if exact_jvp is not None else np.real(rhs(q))
        handle = JacobianHandle(rhs=rhs, q_base=q, f_base=f, eps=eps,
                                exact_jvp=exact_jvp)
        q_next, stats = epi_step(scheme, handle, history, dt, tol=tol,
                                 m_init=m_init, m_max=m_max)
        m_init = max(2, min(stats.final_dim, m_max))
        if depth:
            history.push(q, f)
        logger.debug("step %d t=%.6g krylov: m=%d substeps=%d matvecs=%d",
                     step + 1, (step + 1) * dt, stats.krylov_dim,
                     stats.substeps, stats.matvecs)
        q = q_next
        if callback is not None:
            callback(step + 1, (step + 1) * dt, q, stats)
    return q
