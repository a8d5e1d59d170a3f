"""L1 discretization of the Caputo derivative on nonuniform meshes.

For a fractional order beta in (0, 1) the Caputo derivative at t_n is
approximated by the L1 formula

    D_N^beta w^n = sum_{k=1}^{n} d_{n,k} (w^{n-k+1} - w^{n-k}),

where the coefficients

    d_{n,k} = ((t_n - t_{n-k})**(1-beta) - (t_n - t_{n-k+1})**(1-beta))
              / (Gamma(2-beta) * tau_{n-k+1})

come from integrating the kernel against the piecewise-linear interpolant
of w.  The module also provides the complementary discrete kernels used by
the stability theory, the two-parameter Mittag-Leffler series restricted
to E_beta, the closed-form Caputo derivative of power functions, and a
truncation-error study driver.
"""

import math
from dataclasses import dataclass

import numpy as np

from .graded_time import build_graded_mesh


@dataclass(frozen=True)
class L1Row:
    """L1 coefficients for one time level.

    Attributes
    ----------
    n : int
        Time level, 1 <= n <= N.
    beta : float
        Fractional order in (0, 1).
    d : ndarray, shape (n,)
        Coefficients d[k - 1] = d_{n,k}; positive and strictly decreasing
        in k.
    """

    n: int
    beta: float
    d: np.ndarray


def _check_beta(beta):
    if not 0 < beta < 1:
        raise ValueError(f"fractional order beta must lie in (0, 1), got {beta}")


def l1_row(mesh, beta, n):
    """Coefficients d_{n,k}, k = 1..n, of the L1 formula at level n."""
    _check_beta(beta)
    if n < 1 or n > mesh.N:
        raise ValueError(f"level must satisfy 1 <= n <= N={mesh.N}, got {n}")
    t = mesh.t
    tn = t[n]
    ks = np.arange(1, n + 1)
    left = (tn - t[n - ks]) ** (1.0 - beta)
    right = (tn - t[n - ks + 1]) ** (1.0 - beta)
    d = (left - right) / (math.gamma(2.0 - beta) * mesh.tau[n - ks])
    d.flags.writeable = False
    return L1Row(int(n), float(beta), d)


def discrete_caputo(row, history):
    """Apply the L1 formula to a history w^0, ..., w^n.

    Parameters
    ----------
    row : L1Row
        Coefficients at level n.
    history : array_like, shape (n + 1,) or (n + 1, M)
        Scalar or vector-valued samples at t_0, ..., t_n.

    Returns
    -------
    float or ndarray
        The L1 value at level n; exact for histories affine in t.
    """
    hist = np.asarray(history, dtype=float)
    if hist.shape[0] != row.n + 1:
        raise ValueError(
            f"history must hold {row.n + 1} levels, got {hist.shape[0]}"
        )
    diffs = hist[1:] - hist[:-1]
    # d reversed pairs d_{n,n-m+1} with the increment at level m
    out = np.tensordot(row.d[::-1], diffs, axes=(0, 0))
    if out.ndim == 0:
        return float(out)
    return out


def _l1_table(mesh, beta, n):
    """All rows d_{i,.} for i = 1..n as a list of arrays."""
    return [l1_row(mesh, beta, i).d for i in range(1, n + 1)]


def complementary_kernels(mesh, beta, n, _table=None):
    """Complementary kernels Q^{(n)}_j, j = 0..n-1, at level n.

    The kernels invert the L1 convolution in the summation-by-parts sense:
    sum_{j=k}^{n} Q^{(n)}_{n-j} d_{j,j-k+1} = 1 for every 1 <= k <= n.
    Returned as q with q[j] = Q^{(n)}_j.
    """
    _check_beta(beta)
    if n < 1 or n > mesh.N:
        raise ValueError(f"level must satisfy 1 <= n <= N={mesh.N}, got {n}")
    rows = _table if _table is not None else _l1_table(mesh, beta, n)
    q = np.zeros(n)
    q[0] = 1.0 / rows[n - 1][0]
    for i in range(n - 1, 0, -1):
        s = 0.0
        for k in range(i + 1, n + 1):
            s += (rows[k - 1][k - i - 1] - rows[k - 1][k - i]) * q[n - k]
        q[n - i] = s / rows[i - 1][0]
    q.flags.writeable = False
    return q


@dataclass(frozen=True)
class KernelTriangle:
    """Complementary kernels for all levels 1..n_max.

    rows[n - 1][j] = Q^{(n)}_j.  All entries are nonnegative and the level
    sums obey sum_j Q^{(n)}_j <= t_n**beta / Gamma(1 + beta).
    """

    beta: float
    rows: tuple


def kernel_triangle(mesh, beta, n_max=None):
    """Build the complementary kernels for every level up to n_max."""
    n_max = mesh.N if n_max is None else int(n_max)
    if n_max < 1 or n_max > mesh.N:
        raise ValueError(f"n_max must satisfy 1 <= n_max <= N={mesh.N}")
    table = _l1_table(mesh, beta, n_max)
    rows = tuple(
        complementary_kernels(mesh, beta, n, _table=table)
        for n in range(1, n_max + 1)
    )
    return KernelTriangle(float(beta), rows)


_ML_MAX_TERMS = 100000
_ML_LOG_HUGE = 700.0  # exp() overflow threshold for float64


def mittag_leffler(beta, z):
    """One-parameter Mittag-Leffler function E_beta(z) = sum z**k / Gamma(1 + k beta).

    Series evaluation with term recurrence in log space, early exit once the
    terms fall below 1e-16 of the accumulated sum.  Intended for the moderate
    arguments of the stability bounds (|z| up to about 50); arguments whose
    terms overflow double precision raise OverflowError.
    """
    if beta <= 0:
        raise ValueError(f"Mittag-Leffler order must be positive, got {beta}")
    z = float(z)
    if z == 0.0:
        return 1.0
    log_az = math.log(abs(z))
    negative = z < 0.0
    total = 0.0
    prev_log = math.inf
    for k in range(_ML_MAX_TERMS):
        log_term = k * log_az - math.lgamma(1.0 + k * beta)
        if log_term > _ML_LOG_HUGE:
            raise OverflowError(
                f"Mittag-Leffler series term overflows for beta={beta}, z={z}"
            )
        term = math.exp(log_term)
        if negative and (k % 2 == 1):
            term = -term
        total += term
        # safe to stop only on the decreasing side of the term profile
        if log_term < prev_log and abs(term) < 1e-16 * max(abs(total), 1e-300):
            return total
        prev_log = log_term
    raise OverflowError(
        f"Mittag-Leffler series did not settle within {_ML_MAX_TERMS} terms"
    )


def exact_caputo_power(sigma, order, t):
    """Caputo derivative of w(t) = t**sigma for a fractional order in (0, 2).

    Returns Gamma(sigma + 1) / Gamma(sigma + 1 - order) * t**(sigma - order).
    Requires sigma >= order so the derivative stays bounded at t = 0; the
    boundary case sigma == order gives the constant Gamma(order + 1).
    """
    if not 0 < order < 2:
        raise ValueError(f"fractional order must lie in (0, 2), got {order}")
    if sigma < order:
        raise ValueError(
            f"power sigma={sigma} below the order {order} is outside the domain"
        )
    coef = math.gamma(sigma + 1.0) / math.gamma(sigma + 1.0 - order)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    out = coef * t ** (sigma - order)  # 0**0 == 1 covers sigma == order at t = 0
    if out.ndim == 0:
        return float(out)
    return out


def truncation_study(beta, sigma, n_list, r, T=1.0):
    """Weighted max-node L1 truncation errors for w(t) = t**sigma.

    For each N the study builds the graded mesh with exponent r, applies the
    L1 formula to the sampled power function at every level, and records

        max_{1<=n<=N} t_n**beta * |D_N^beta w^n - caputo(w)(t_n)|.

    The weight exposes the mesh-driven rate N**(-min(2-beta, r*sigma))
    behind the t_n**(-beta) prefactor of the pointwise bound.

    Returns a list of (N, error) pairs in the order given.
    """
    _check_beta(beta)
    results = []
    for N in n_list:
        mesh = build_graded_mesh(T, N, r)
        w = mesh.t**sigma
        exact = exact_caputo_power(sigma, beta, mesh.t[1:])
        worst = 0.0
        for n in range(1, mesh.N + 1):
            row = l1_row(mesh, beta, n)
            approx = discrete_caputo(row, w[: n + 1])
            err = mesh.t[n] ** beta * abs(approx - exact[n - 1])
            if err > worst:
                worst = err
        results.append((int(N), worst))
    return results
