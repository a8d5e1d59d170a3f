"""Linearized L1/FEM time stepping for the Kirchhoff-type fractional wave equation.

The order-2beta problem

    caputo^(2 beta) u - a(||grad u||^2) Lap u = f,   u = 0 on the boundary,
    u(0) = u0,  u_t(0) = u1,

is reduced to a symmetric system of order beta in the shifted unknown
ubar = u - t * u1 and its fractional velocity v = caputo^beta ubar.  Each
time level solves one SPD linear system: the nonlocal coefficient is frozen
at a two-level extrapolant of the recovered solution, so no nonlinear
iteration is needed.  Histories of ubar and v are kept densely because the
L1 operator couples every previous level.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .caputo_l1 import l1_row
from .fem_space import (
    FeFunction,
    assemble_grad_load,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    l2_projection,
    ritz_projection,
    spd_solve,
)
from .graded_time import extrapolation_weights


@dataclass
class ProblemSpec:
    """Continuous problem data.

    Parameters
    ----------
    alpha : float
        Temporal order, 1 < alpha < 2.
    T : float
        Final time.
    domain : tuple
        ("interval", a, b) or ("unit_square",).
    a : callable
        Nonlocal diffusion coefficient, evaluated at ||grad u||^2.
    m1, m2 : float
        Declared bounds 0 < m1 <= a <= m2; violations detected at run time.
    f : callable
        Forcing f(x, t) in 1D or f(x, y, t) in 2D.
    u0, grad_u0 : callable or None
        Initial displacement and its gradient; None means zero.  The
        gradient is required whenever u0 is nonzero, because the initial
        datum enters through its Ritz projection.
    u1, grad_u1, lap_u1 : callable or None
        Initial velocity, its gradient, and its Laplacian; None means zero.
        A nonzero u1 needs grad_u1 or lap_u1 for the stationary forcing
        term t * a(.) * (Lap u1, phi).
    lipschitz : float or None
        Declared Lipschitz constant of a, informational.
    """

    alpha: float
    T: float
    domain: tuple
    a: object
    m1: float
    m2: float
    f: object
    u0: object = None
    grad_u0: object = None
    u1: object = None
    grad_u1: object = None
    lap_u1: object = None
    lipschitz: float = None

    def __post_init__(self):
        if not 1 < self.alpha < 2:
            raise ValueError(f"temporal order alpha must lie in (1, 2), got {self.alpha}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if not 0 < self.m1 <= self.m2:
            raise ValueError(f"coefficient bounds need 0 < m1 <= m2, got ({self.m1}, {self.m2})")
        if self.u0 is not None and self.grad_u0 is None:
            raise ValueError("a nonzero u0 needs grad_u0 for its Ritz projection")
        if self.u1 is not None and self.grad_u1 is None and self.lap_u1 is None:
            raise ValueError("a nonzero u1 needs grad_u1 or lap_u1")

    @property
    def beta(self):
        return 0.5 * self.alpha


@dataclass
class SolverState:
    """Mutable per-run state: meshes, matrices, and dense level histories.

    ubar[n] and v[n] hold the interior coefficients of the shifted
    displacement and the fractional velocity at level n; levels above
    n_done are unset.  kappa[n] records the frozen coefficient used at
    level n (levels 0 and 1 come from initialization and have none).
    """

    spec: ProblemSpec
    tmesh: object
    smesh: object
    mass: object
    stiffness: object
    phu1: np.ndarray
    lap_u1_load: np.ndarray
    ubar: np.ndarray
    v: np.ndarray
    kappa: np.ndarray
    cg_iters: list = field(default_factory=list)
    n_done: int = 0
    quad_order: int = 3
    tol: float = 1e-12

    def ubar_fn(self, n):
        return FeFunction(self.ubar[n], self.smesh)

    def v_fn(self, n):
        return FeFunction(self.v[n], self.smesh)

    def recovered(self, n):
        """Interior coefficients of the recovered displacement at level n."""
        return self.ubar[n] + self.tmesh.t[n] * self.phu1

    def recovered_fn(self, n):
        return FeFunction(self.recovered(n), self.smesh)


def _space_only(f, t, dimension):
    if dimension == 1:
        return lambda x: f(x, t)
    return lambda x, y: f(x, y, t)


def initialize(spec, tmesh, smesh, quad_order=3, tol=1e-12):
    """Set up matrices and the two starting levels.

    Level 0 is the Ritz projection of u0 with zero velocity; level 1 uses a
    Taylor start U^1 = U^0 + tau_1 * P_h u1.  In the shifted variable this
    makes ubar^1 equal ubar^0 exactly, and feeding that through the L1
    formula gives v^1 = 0 exactly as well; both are computed, not assumed.
    """
    mass = assemble_mass(smesh)
    stiffness = assemble_stiffness(smesh)
    m = smesh.num_interior
    n_levels = tmesh.N + 1

    if spec.u0 is None:
        u0 = np.zeros(m)
    else:
        u0 = ritz_projection(smesh, spec.grad_u0, quad_order, tol).coeffs

    if spec.u1 is None:
        phu1 = np.zeros(m)
        lap_load = np.zeros(m)
    else:
        phu1 = l2_projection(smesh, spec.u1, quad_order, tol).coeffs
        if spec.lap_u1 is not None:
            lap_load = assemble_load(smesh, spec.lap_u1, quad_order)
        else:
            lap_load = -assemble_grad_load(smesh, spec.grad_u1, quad_order)

    ubar = np.zeros((n_levels, m))
    v = np.zeros((n_levels, m))
    kappa = np.full(n_levels, np.nan)
    ubar[0] = u0
    u1_level = u0 + tmesh.tau[0] * phu1
    ubar[1] = u1_level - tmesh.t[1] * phu1
    d11 = l1_row(tmesh, spec.beta, 1).d[0]
    v[1] = d11 * (ubar[1] - ubar[0])

    return SolverState(
        spec=spec,
        tmesh=tmesh,
        smesh=smesh,
        mass=mass,
        stiffness=stiffness,
        phu1=phu1,
        lap_u1_load=lap_load,
        ubar=ubar,
        v=v,
        kappa=kappa,
        n_done=1,
        quad_order=quad_order,
        tol=tol,
    )


def step(state, n):
    """Advance one level, 2 <= n <= N; levels through n - 1 must be done.

    The SPD system for the new ubar coefficients is

        (d_{n,1} B + (kappa / d_{n,1}) A) x =
            (F^n + t_n kappa E) / d_{n,1} - (B G) / d_{n,1} - B H,

    where G and H are the L1 history combinations of v and ubar, E is the
    load of Lap u1, and kappa is the coefficient frozen at the two-level
    extrapolant of the recovered displacement.  The velocity update
    v^n = d_{n,1} x + H never touches an inverse mass matrix.
    """
    if n != state.n_done + 1:
        raise ValueError(f"levels must advance in order; expected {state.n_done + 1}, got {n}")
    if n < 2 or n > state.tmesh.N:
        raise ValueError(f"step level must satisfy 2 <= n <= N={state.tmesh.N}, got {n}")
    spec = state.spec
    tmesh = state.tmesh
    tn = tmesh.t[n]

    w1, w2 = extrapolation_weights(tmesh, n)
    u_hat = w1 * state.recovered(n - 1) + w2 * state.recovered(n - 2)
    ell = float(u_hat @ (state.stiffness @ u_hat))
    kap = float(spec.a(ell))
    slack = 1e-12 * max(1.0, abs(spec.m2))
    if not (spec.m1 - slack <= kap <= spec.m2 + slack):
        raise ValueError(
            f"coefficient a({ell:.6e}) = {kap:.6e} leaves the declared "
            f"range [{spec.m1}, {spec.m2}] at level {n}"
        )

    d = l1_row(tmesh, spec.beta, n).d
    d1 = d[0]
    weights = np.empty(n)
    weights[0] = -d[n - 1]
    if n > 1:
        weights[1:] = np.diff(d)[::-1]
    g_hist = weights @ state.v[:n]
    h_hist = weights @ state.ubar[:n]

    fn = assemble_load(
        state.smesh, _space_only(spec.f, tn, state.smesh.dimension), state.quad_order
    )
    rhs = (fn + tn * kap * state.lap_u1_load) / d1
    rhs -= (state.mass @ g_hist) / d1
    rhs -= state.mass @ h_hist

    system = d1 * state.mass + (kap / d1) * state.stiffness
    x, iters = spd_solve(system, rhs, state.tol, x0=state.ubar[n - 1])

    state.ubar[n] = x
    state.v[n] = d1 * x + h_hist
    state.kappa[n] = kap
    state.cg_iters.append(iters)
    state.n_done = n
    return state


def solve_all(spec, tmesh, smesh, quad_order=3, tol=1e-12):
    """Initialize and advance through every level; returns the final state."""
    state = initialize(spec, tmesh, smesh, quad_order, tol)
    for n in range(2, tmesh.N + 1):
        step(state, n)
    return state


def apriori_bound_report(state):
    """Stability quantity ||v^n||_L2 + ||grad ubar^n||_L2 per level.

    The continuous-level energy argument bounds exactly this combination,
    so a healthy run shows values that stay bounded as the mesh refines.
    Returns an array over levels 0..n_done.
    """
    out = np.zeros(state.n_done + 1)
    for n in range(state.n_done + 1):
        vn = state.v[n]
        un = state.ubar[n]
        v_l2 = math.sqrt(max(float(vn @ (state.mass @ vn)), 0.0))
        u_h1 = math.sqrt(max(float(un @ (state.stiffness @ un)), 0.0))
        out[n] = v_l2 + u_h1
    return out
