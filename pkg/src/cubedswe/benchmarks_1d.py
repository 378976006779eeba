"""Small stiff benchmark problems for time-integrator order verification.

Three standard method-of-lines systems with second-order finite-difference
discretizations and hand-coded Jacobian-vector products:

  * ``adr``        -- 2-D advection-diffusion-reaction on [0,1]^2,
                      homogeneous Neumann boundaries (mirrored ghosts).
  * ``burgers``    -- viscous Burgers' equation on [0,1] in conservative
                      form, homogeneous Dirichlet boundaries.
  * ``semilinear`` -- semilinear parabolic equation with a nonlocal
                      integral term and a manufactured exact solution.

The semilinear forcing is constructed against the *discrete* operator so the
nodal exact solution solves the ODE system identically; temporal convergence
can then be measured to round-off without a spatial-error floor.  The problem
is non-autonomous and is autonomized by appending time as an extra state
component.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .integrators import integrate

BENCHMARK_IDS = ("adr", "burgers", "semilinear")

# time-step ranges for the convergence sweeps of each problem
STEP_RANGES = {
    "adr": (7.0e-4, 2.2e-4, 9.8e-5),
    "burgers": (3.1e-3, 1.8e-3, 1.0e-3, 6.0e-4, 3.0e-4),
    "semilinear": (1.1e-1, 7.0e-2, 5.0e-2, 3.3e-2, 2.1e-2, 1.5e-2, 1.0e-3),
}

KRYLOV_TOL = 1e-14


@dataclass
class BenchmarkProblem:
    """A stiff ODE system du/dt = F(u) with an exact Jacobian-vector product.

    `n_observed` is the number of physical unknowns at the front of the state
    vector; any trailing components (e.g. an appended time variable) are
    excluded from error norms.
    """

    id: str
    n: int
    rhs: Callable[[np.ndarray], np.ndarray]
    jvp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    u0: np.ndarray
    t_end: float
    n_observed: int
    exact: Callable[[float], np.ndarray] | None = None
    extra: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# advection-diffusion-reaction

def build_adr() -> BenchmarkProblem:
    """2-D advection-diffusion-reaction, 40x40 nodes, Neumann boundaries."""
    side = 40
    eps, alpha, gamma = 1.0 / 100.0, -10.0, 100.0
    h = 1.0 / (side - 1)
    x = np.linspace(0.0, 1.0, side)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    u0 = 256.0 * (xx * yy * (1.0 - xx) * (1.0 - yy)) ** 2 + 0.3

    def stencil(u2d):
        # mirrored ghosts: u(-h) = u(h), enforcing du/dn = 0 at the boundary
        p = np.pad(u2d, 1, mode="reflect")
        lap = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
               - 4.0 * u2d) / h**2
        adv = ((p[2:, 1:-1] - p[:-2, 1:-1])
               + (p[1:-1, 2:] - p[1:-1, :-2])) / (2.0 * h)
        return eps * lap - alpha * adv

    def rhs(u):
        u2d = u.reshape(side, side)
        react = gamma * u2d * (u2d - 0.5) * (1.0 - u2d)
        return (stencil(u2d) + react).reshape(-1)

    def jvp(u, v):
        u2d = u.reshape(side, side)
        v2d = v.reshape(side, side)
        dreact = gamma * (-3.0 * u2d**2 + 3.0 * u2d - 0.5)
        return (stencil(v2d) + dreact * v2d).reshape(-1)

    return BenchmarkProblem(id="adr", n=side * side, rhs=rhs, jvp=jvp,
                            u0=u0.reshape(-1), t_end=0.1,
                            n_observed=side * side)


# ----------------------------------------------------------------------
# Burgers' equation

def build_burgers() -> BenchmarkProblem:
    """Viscous Burgers' equation, 1024 interior nodes, Dirichlet boundaries."""
    n = 1024
    eps = 1.0e-3
    h = 1.0 / (n + 1)
    x = np.linspace(h, 1.0 - h, n)
    mu, sigma = 0.3, 0.05
    u0 = np.exp(-((x - mu) ** 2) / (2.0 * sigma**2))

    def rhs(u):
        p = np.concatenate(([0.0 * u[0]], u, [0.0 * u[0]]))
        lap = (p[:-2] - 2.0 * u + p[2:]) / h**2
        # conservative differencing of the flux u^2 / 2
        flux = 0.5 * p**2
        dflux = (flux[2:] - flux[:-2]) / (2.0 * h)
        return eps * lap - dflux

    def jvp(u, v):
        pu = np.concatenate(([0.0 * u[0]], u, [0.0 * u[0]]))
        pv = np.concatenate(([0.0 * v[0]], v, [0.0 * v[0]]))
        lap = (pv[:-2] - 2.0 * v + pv[2:]) / h**2
        dflux = (pu[2:] * pv[2:] - pu[:-2] * pv[:-2]) / (2.0 * h)
        return eps * lap - dflux

    return BenchmarkProblem(id="burgers", n=n, rhs=rhs, jvp=jvp, u0=u0,
                            t_end=1.0, n_observed=n)


# ----------------------------------------------------------------------
# semilinear parabolic equation with nonlocal coupling

def build_semilinear(discrete_forcing: bool = True) -> BenchmarkProblem:
    """Heat equation with an integral source and manufactured solution.

    du/dt = u_xx + int_0^1 u dx + phi(x, t), with phi chosen so that
    u(x, t) = x(1 - x) e^t solves the system.  With `discrete_forcing` the
    construction uses the discrete Laplacian and trapezoidal rule, making the
    nodal exact solution exact for the ODE system; otherwise the continuous
    forcing phi = e^t (x(1-x) + 2 - 1/6) is used and the spatial error floor
    applies.
    """
    n = 400
    h = 1.0 / (n + 1)
    x = np.linspace(h, 1.0 - h, n)
    profile = x * (1.0 - x)

    def lap(v):
        p = np.concatenate(([0.0 * v[0]], v, [0.0 * v[0]]))
        return (p[:-2] - 2.0 * v + p[2:]) / h**2

    def trap(v):
        # trapezoidal rule with homogeneous boundary values
        return h * np.sum(v, axis=0)

    if discrete_forcing:
        phi0 = profile - lap(profile) - trap(profile)
    else:
        phi0 = profile + 2.0 - 1.0 / 6.0

    # autonomized state: [u_1 .. u_n, t]
    def rhs(w):
        u, t = w[:n], w[n]
        du = lap(u) + trap(u) + np.exp(t) * phi0
        return np.concatenate((du, [1.0 + 0.0 * t]))

    def jvp(w, v):
        t = w[n]
        vu, vt = v[:n], v[n]
        du = lap(vu) + trap(vu) + np.exp(t) * phi0 * vt
        return np.concatenate((du, [0.0 * vt]))

    def exact(t):
        return np.concatenate((np.exp(t) * profile, [t]))

    w0 = np.concatenate((profile, [0.0]))
    return BenchmarkProblem(id="semilinear", n=n + 1, rhs=rhs, jvp=jvp,
                            u0=w0, t_end=1.0, n_observed=n, exact=exact,
                            extra={"discrete_forcing": discrete_forcing})


_BUILDERS = {"adr": build_adr, "burgers": build_burgers,
             "semilinear": build_semilinear}


def build_benchmark(problem_id: str) -> BenchmarkProblem:
    if problem_id not in _BUILDERS:
        raise ValueError(
            f"unknown benchmark {problem_id!r}; choose from {BENCHMARK_IDS}")
    return _BUILDERS[problem_id]()


# ----------------------------------------------------------------------
# reference solutions and convergence sweeps

_REFERENCE_CACHE: dict[str, np.ndarray] = {}


def reference_solution(prob: BenchmarkProblem, n_steps0: int = 2000,
                       target: float = 1e-12, max_halvings: int = 6,
                       use_cache: bool = True) -> np.ndarray:
    """High-accuracy final state, validated by step-halving self-consistency.

    Integrates with the order-6 scheme and halves the step until two
    successive solutions agree to `target` in the 2-norm (relative to the
    solution magnitude).  Problems with an exact solution short-circuit.
    """
    if prob.exact is not None and prob.extra.get("discrete_forcing", True):
        return prob.exact(prob.t_end)
    if use_cache and prob.id in _REFERENCE_CACHE:
        return _REFERENCE_CACHE[prob.id]
    n_steps = n_steps0
    prev = integrate(prob.rhs, prob.u0, prob.t_end / n_steps, n_steps,
                     order=6, tol=KRYLOV_TOL, exact_jvp=lambda q, v:
                     prob.jvp(q, v))
    for _ in range(max_halvings):
        n_steps *= 2
        cur = integrate(prob.rhs, prob.u0, prob.t_end / n_steps, n_steps,
                        order=6, tol=KRYLOV_TOL,
                        exact_jvp=lambda q, v: prob.jvp(q, v))
        diff = np.linalg.norm(cur[:prob.n_observed] - prev[:prob.n_observed])
        if diff <= target * max(1.0, np.linalg.norm(cur[:prob.n_observed])):
            if use_cache:
                _REFERENCE_CACHE[prob.id] = cur
            return cur
        prev = cur
    raise RuntimeError(
        f"reference for {prob.id!r} did not self-converge to {target:g}")


def integrate_benchmark(prob: BenchmarkProblem, dt: float, order: int,
                        startup_substeps: int | None = None,
                        tol: float = KRYLOV_TOL) -> np.ndarray:
    """Run the benchmark to t_end with steps of (approximately) size dt.

    The startup sub-integration is second order, so its substep count must
    grow with the scheme order for the startup error to stay below the
    scheme error; the default quadruples it per order above 4.
    """
    if startup_substeps is None:
        startup_substeps = 64 * 4 ** max(0, order - 4)
    n_steps = max(order - 1, int(round(prob.t_end / dt)))
    return integrate(prob.rhs, prob.u0, prob.t_end / n_steps, n_steps,
                     order=order, tol=tol,
                     exact_jvp=lambda q, v: prob.jvp(q, v),
                     startup_substeps=startup_substeps)


def solution_error(prob: BenchmarkProblem, state: np.ndarray,
                   reference: np.ndarray) -> float:
    """Discrete 2-norm error over the observed components."""
    k = prob.n_observed
    return float(np.linalg.norm(state[:k] - reference[:k]))


def convergence_sweep(prob: BenchmarkProblem, order: int,
                      steps: tuple[float, ...] | None = None,
                      reference: np.ndarray | None = None):
    """Errors for a range of step sizes; returns (h_values, errors)."""
    if steps is None:
        steps = STEP_RANGES[prob.id]
    if reference is None:
        reference = reference_solution(prob)
    errs = []
    for dt in steps:
        state = integrate_benchmark(prob, dt, order)
        errs.append(solution_error(prob, state, reference))
    return np.asarray(steps, dtype=float), np.asarray(errs)


def fit_order(h_values: np.ndarray, errors: np.ndarray,
              floor: float = 1e-13) -> float:
    """Least-squares slope of log(error) vs log(h), ignoring round-off-
    saturated points below `floor`."""
    mask = errors > floor
    if mask.sum() < 2:
        raise ValueError("not enough points above the round-off floor")
    coef = np.polyfit(np.log(h_values[mask]), np.log(errors[mask]), 1)
    return float(coef[0])
