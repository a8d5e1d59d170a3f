"""Manufactured solutions and convergence studies.

Both built-in cases share the temporal factor g(t) = t**3 + t**alpha, whose
Caputo derivative of order alpha is known in closed form, and the nonlocal
coefficient a(w) = 3 + sin(w).  Initial displacement and velocity vanish,
so the recovered and shifted trajectories coincide and the forcing is the
only data.  Errors are measured in the H1 seminorm at every level and
reduced with max, matching the L-infinity-in-time estimate the scheme
satisfies.  Refinement couples the meshes so one error component cannot
mask the other: temporal studies set Ms ~ N**(2-beta), spatial studies set
N ~ Ms**(2/(2-beta)).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fem_space import build_spatial_mesh, h1_seminorm_error, l2_error
from .graded_time import build_graded_mesh, recommended_grading
from .kirchhoff_solver import ProblemSpec, apriori_bound_report, solve_all


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact solution bundle for one convergence experiment.

    u, grad_u, lap_u and caputo_u are callables of (x[, y], t); caputo_time
    is the Caputo-alpha derivative of the temporal factor alone and ell(t)
    is the exact value of ||grad u||^2 at time t.
    """

    name: str
    alpha: float
    T: float
    domain: tuple
    a: object
    m1: float
    m2: float
    lipschitz: float
    u: object
    grad_u: object
    lap_u: object
    caputo_u: object
    caputo_time: object
    ell: object
    f: object

    def problem_spec(self):
        return ProblemSpec(
            alpha=self.alpha,
            T=self.T,
            domain=self.domain,
            a=self.a,
            m1=self.m1,
            m2=self.m2,
            f=self.f,
            lipschitz=self.lipschitz,
        )


def _temporal_factor(alpha):
    c3 = 6.0 / math.gamma(4.0 - alpha)

    def g(t):
        return t**3 + t**alpha

    def caputo_time(t):
        return c3 * t ** (3.0 - alpha) + math.gamma(alpha + 1.0)

    return g, caputo_time


def example1_case(alpha):
    """1D case: u = (t**3 + t**alpha) sin(x) on (0, pi), a(w) = 3 + sin(w)."""
    if not 1 < alpha < 2:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    g, caputo_time = _temporal_factor(alpha)

    def a(w):
        return 3.0 + math.sin(w)

    def ell(t):
        return 0.5 * math.pi * g(t) ** 2

    def u(x, t):
        return g(t) * np.sin(x)

    def grad_u(x, t):
        return g(t) * np.cos(x)

    def lap_u(x, t):
        return -g(t) * np.sin(x)

    def caputo_u(x, t):
        return caputo_time(t) * np.sin(x)

    def f(x, t):
        return (caputo_time(t) + a(ell(t)) * g(t)) * np.sin(x)

    return ManufacturedCase(
        name="ex1",
        alpha=float(alpha),
        T=1.0,
        domain=("interval", 0.0, math.pi),
        a=a,
        m1=2.0,
        m2=4.0,
        lipschitz=1.0,
        u=u,
        grad_u=grad_u,
        lap_u=lap_u,
        caputo_u=caputo_u,
        caputo_time=caputo_time,
        ell=ell,
        f=f,
    )


def example2_case(alpha):
    """2D case: u = (t**3 + t**alpha)(x - x^2)(y - y^2) on the unit square."""
    if not 1 < alpha < 2:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    g, caputo_time = _temporal_factor(alpha)

    def a(w):
        return 3.0 + math.sin(w)

    def ell(t):
        # int |grad (x-x^2)(y-y^2)|^2 over the unit square is 1/45
        return g(t) ** 2 / 45.0

    def shape(x, y):
        return (x - x**2) * (y - y**2)

    def u(x, y, t):
        return g(t) * shape(x, y)

    def grad_u(x, y, t):
        return (
            g(t) * (1.0 - 2.0 * x) * (y - y**2),
            g(t) * (x - x**2) * (1.0 - 2.0 * y),
        )

    def lap_u(x, y, t):
        return -2.0 * g(t) * ((x - x**2) + (y - y**2))

    def caputo_u(x, y, t):
        return caputo_time(t) * shape(x, y)

    def f(x, y, t):
        return caputo_time(t) * shape(x, y) + a(ell(t)) * 2.0 * g(t) * (
            (x - x**2) + (y - y**2)
        )

    return ManufacturedCase(
        name="ex2",
        alpha=float(alpha),
        T=1.0,
        domain=("unit_square",),
        a=a,
        m1=2.0,
        m2=4.0,
        lipschitz=1.0,
        u=u,
        grad_u=grad_u,
        lap_u=lap_u,
        caputo_u=caputo_u,
        caputo_time=caputo_time,
        ell=ell,
        f=f,
    )


def get_case(name, alpha):
    """Look up a built-in case by its short name."""
    if name == "ex1":
        return example1_case(alpha)
    if name == "ex2":
        return example2_case(alpha)
    raise ValueError(f"unknown example {name!r}; available: ex1, ex2")


@dataclass
class ReportRow:
    """One refinement of one study; oc is filled by the study driver and
    stays None on the finest level."""

    alpha: float
    N: int
    Ms: int
    r: float
    error: float
    oc: float = None
    seconds: float = 0.0
    cg_iters: int = 0
    capped: bool = False


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)


def round_even(x):
    """Nearest even integer, at least 2."""
    return max(2, 2 * int(round(0.5 * x)))


def coupled_ms(N, beta):
    """Spatial resolution matching a temporal refinement, Ms ~ N**(2-beta)."""
    return round_even(float(N) ** (2.0 - beta))


def coupled_n(Ms, beta):
    """Temporal resolution matching a spatial refinement, N ~ Ms**(2/(2-beta))."""
    return round_even(float(Ms) ** (2.0 / (2.0 - beta)))


def run_single_case(case, N, Ms, r=None, quad_order=3, tol=1e-12):
    """Solve one (N, Ms) pairing and measure the max-in-time H1 error.

    Returns a ReportRow without an order entry.
    """
    beta = 0.5 * case.alpha
    if r is None:
        r = recommended_grading(beta)
    start = time.perf_counter()
    tmesh = build_graded_mesh(case.T, N, r)
    smesh = build_spatial_mesh(case.domain, Ms)
    state = solve_all(case.problem_spec(), tmesh, smesh, quad_order, tol)
    dim = smesh.dimension
    worst = 0.0
    for n in range(1, tmesh.N + 1):
        tn = tmesh.t[n]
        if dim == 1:
            exact_grad = lambda x: case.grad_u(x, tn)
        else:
            exact_grad = lambda x, y: case.grad_u(x, y, tn)
        err = h1_seminorm_error(state.recovered_fn(n), exact_grad, quad_order)
        if err > worst:
            worst = err
    elapsed = time.perf_counter() - start
    return ReportRow(
        alpha=case.alpha,
        N=int(N),
        Ms=int(Ms),
        r=float(r),
        error=worst,
        seconds=elapsed,
        cg_iters=max(state.cg_iters, default=0),
    )


def observed_order(pairs):
    """Orders log2(E_k / E_{k+1}) for a dyadic refinement sequence.

    pairs is a list of (key, error) with each key doubling the previous
    one; non-dyadic sequences are rejected.
    """
    if len(pairs) < 2:
        raise ValueError("need at least two refinements to measure an order")
    keys = [int(k) for k, _ in pairs]
    errors = [float(e) for _, e in pairs]
    for a, b in zip(keys, keys[1:]):
        if b != 2 * a:
            raise ValueError(f"refinement keys must double, got {a} then {b}")
    for e in errors:
        if not e > 0:
            raise ValueError(f"errors must be positive, got {e}")
    return [math.log2(e0 / e1) for e0, e1 in zip(errors, errors[1:])]


def _attach_orders(rows, keys):
    ocs = observed_order([(k, row.error) for k, row in zip(keys, rows)])
    for row, oc in zip(rows[:-1], ocs):
        row.oc = oc


def temporal_study(case, n_list, r=None, quad_order=3, tol=1e-12):
    """Convergence in N with the coupled spatial resolution Ms ~ N**(2-beta)."""
    beta = 0.5 * case.alpha
    rows = [
        run_single_case(case, N, coupled_ms(N, beta), r, quad_order, tol)
        for N in n_list
    ]
    _attach_orders(rows, [row.N for row in rows])
    return ConvergenceReport(rows)


def spatial_study(case, ms_list, r=None, n_cap=4096, quad_order=3, tol=1e-12):
    """Convergence in Ms with the coupled temporal resolution N ~ Ms**(2/(2-beta)).

    Pairings whose coupled N exceeds n_cap run at n_cap instead and are
    flagged; the cap keeps the finest spatial levels affordable once the
    temporal error is far below the spatial one.
    """
    beta = 0.5 * case.alpha
    rows = []
    for Ms in ms_list:
        N = coupled_n(Ms, beta)
        capped = N > n_cap
        if capped:
            N = n_cap
        row = run_single_case(case, N, Ms, r, quad_order, tol)
        row.capped = capped
        rows.append(row)
    _attach_orders(rows, [row.Ms for row in rows])
    return ConvergenceReport(rows)


def trajectory_rows(case, state, quad_order=3):
    """Per-level diagnostics for a finished run.

    Yields (n, t_n, h1_error, l2_error, bound_quantity) for n = 0..N.
    """
    bound = apriori_bound_report(state)
    dim = state.smesh.dimension
    out = []
    for n in range(state.n_done + 1):
        tn = state.tmesh.t[n]
        fn = state.recovered_fn(n)
        if dim == 1:
            h1 = h1_seminorm_error(fn, lambda x: case.grad_u(x, tn), quad_order)
            l2 = l2_error(fn, lambda x: case.u(x, tn), quad_order)
        else:
            h1 = h1_seminorm_error(fn, lambda x, y: case.grad_u(x, y, tn), quad_order)
            l2 = l2_error(fn, lambda x, y: case.u(x, y, tn), quad_order)
        out.append((n, tn, h1, l2, bound[n]))
    return out
