"""Graded temporal meshes for initial-layer resolution.

The solution of a time-fractional problem typically behaves like t**delta
near t = 0 with delta < 1, so uniform time steps waste accuracy.  A graded
mesh t_n = T * (n/N)**r concentrates points near the origin; r = 1 recovers
the uniform mesh.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeMesh:
    """Temporal mesh t_n = T * (n/N)**r on [0, T].

    Attributes
    ----------
    T : float
        Final time.
    N : int
        Number of steps (N + 1 mesh points).
    r : float
        Grading exponent, r >= 1.
    t : ndarray, shape (N + 1,)
        Mesh points, t[0] = 0 and t[N] = T exactly.
    tau : ndarray, shape (N,)
        Step sizes, tau[n - 1] = t[n] - t[n - 1].
    """

    T: float
    N: int
    r: float
    t: np.ndarray
    tau: np.ndarray


def build_graded_mesh(T, N, r=1.0):
    """Build the graded mesh t_n = T * (n/N)**r.

    Parameters
    ----------
    T : float
        Final time, T > 0.
    N : int
        Number of steps, N >= 2.
    r : float
        Grading exponent, r >= 1.

    Returns
    -------
    TimeMesh
    """
    if not T > 0:
        raise ValueError(f"final time T must be positive, got {T}")
    if int(N) != N or N < 2:
        raise ValueError(f"step count N must be an integer >= 2, got {N}")
    if not r >= 1:
        raise ValueError(f"grading exponent r must satisfy r >= 1, got {r}")
    N = int(N)
    t = float(T) * (np.arange(N + 1) / N) ** float(r)
    t[0] = 0.0
    t[N] = float(T)
    tau = np.diff(t)
    if not np.all(tau > 0):
        # extreme grading can underflow the first steps to zero width
        raise ValueError(
            f"mesh is not strictly increasing for N={N}, r={r}; "
            "grading too strong for double precision"
        )
    t.flags.writeable = False
    tau.flags.writeable = False
    return TimeMesh(float(T), N, float(r), t, tau)


def extrapolation_weights(mesh, n):
    """Weights (w1, w2) of the two-level extrapolant at level n >= 2.

    The extrapolant w1 * u^{n-1} + w2 * u^{n-2} reproduces any function
    that is affine in t exactly at t_n; on a uniform mesh the weights are
    (2, -1).  w1 + w2 = 1 up to rounding.
    """
    if n < 2 or n > mesh.N:
        raise ValueError(f"extrapolation needs 2 <= n <= N={mesh.N}, got n={n}")
    tau_n = mesh.tau[n - 1]
    tau_prev = mesh.tau[n - 2]
    return (tau_prev + tau_n) / tau_prev, -tau_n / tau_prev


def recommended_grading(beta):
    """Grading exponent r = (2 - beta) / beta that balances the initial
    layer against the interior L1 error for a fractional order beta in (0, 1)."""
    if not 0 < beta < 1:
        raise ValueError(f"fractional order beta must lie in (0, 1), got {beta}")
    return (2.0 - beta) / beta


def gronwall_step_condition(mesh, beta, lam):
    """Check the maximum-step restriction max tau_n <= (4 Gamma(2-beta) lam)**(-1/beta).

    The discrete fractional Gronwall argument behind the a-priori bound
    needs this restriction; lam is the coefficient multiplying the history
    term in the inequality being closed.  Returns True when the mesh
    satisfies the restriction.
    """
    if not 0 < beta < 1:
        raise ValueError(f"fractional order beta must lie in (0, 1), got {beta}")
    if not lam >= 0:
        raise ValueError(f"Gronwall coefficient must be nonnegative, got {lam}")
    if lam == 0:
        return True
    bound = (4.0 * math.gamma(2.0 - beta) * lam) ** (-1.0 / beta)
    return float(np.max(mesh.tau)) <= bound
