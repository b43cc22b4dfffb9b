"""
Batched Thomas algorithm.

Solves A x = f for many independent tridiagonal systems at once:

     |  b[0] c[0]                      |
     |  a[0] b[1] c[1]                 |
 A = |       a[1] b[2] c[2]            |
     |            *    *    *          |
     |_                 a[n-2] b[n-1] _|

Arrays carry the row index first and the system index last, so a
factorization of shape (n, M) serves M horizontal modes.
"""
from typing import NamedTuple

import numpy as np

from src.exceptions import SpectralError


class TridiagFactor(NamedTuple):
    a: np.ndarray       # sub-diagonal, (n-1, M)
    beta: np.ndarray    # pivots, (n, M)
    gamma: np.ndarray   # normalized super-diagonal, (n-1, M)


def factor_tridiag(a: np.ndarray, b: np.ndarray, c: np.ndarray, pivot_tol: float = 1e-14) -> TridiagFactor:
    """LU-factor without pivoting; a pivot below pivot_tol * max|b| is singular."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    n = b.shape[0]
    beta = np.empty_like(b)
    gamma = np.empty_like(c)
    scale = np.max(np.abs(b), axis=0)

    beta[0] = b[0]
    for i in range(n - 1):
        if np.any(np.abs(beta[i]) <= pivot_tol * scale):
            raise SpectralError(f"singular tridiagonal system (pivot {i})")
        gamma[i] = c[i] / beta[i]
        beta[i + 1] = b[i + 1] - a[i] * gamma[i]
    if np.any(np.abs(beta[n - 1]) <= pivot_tol * scale):
        raise SpectralError(f"singular tridiagonal system (pivot {n - 1})")
    return TridiagFactor(a, beta, gamma)


def solve_tridiag(factor: TridiagFactor, f: np.ndarray) -> np.ndarray:
    """Forward and backward substitution; f may be complex, shape (n, M)."""
    a, beta, gamma = factor
    n = beta.shape[0]
    xtemp = np.empty(np.shape(f), dtype=np.result_type(f, beta))
    xtemp[0] = f[0] / beta[0]
    for i in range(1, n):
        xtemp[i] = (f[i] - a[i - 1] * xtemp[i - 1]) / beta[i]
    x = np.empty_like(xtemp)
    x[n - 1] = xtemp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = xtemp[i] - gamma[i] * x[i + 1]
    return x
