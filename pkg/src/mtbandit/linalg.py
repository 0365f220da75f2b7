"""Dense symmetric rank-1 inverse maintenance for ridge-regression heads.

Everything is float64 and dense; dimensions stay small (d <= 768), so no
factorization caching beyond the maintained inverse is needed.
"""

from __future__ import annotations

import numpy as np

# Re-symmetrize when drift exceeds this; bounds float error over long runs.
SYMMETRY_TOL = 1e-7


def identity_inverse(dim: int, ridge: float) -> np.ndarray:
    """Inverse of ridge * I, the fresh ridge-regularized design matrix."""
    if ridge <= 0.0:
        raise ValueError(f"ridge must be positive, got {ridge}")
    return np.eye(dim, dtype=np.float64) / ridge


def rank1_inverse_update(a_inv: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return the inverse of (A + x x^T) given A's inverse.

    Uses the rank-1 identity
        (A + x x^T)^-1 = A^-1 - (A^-1 x)(A^-1 x)^T / (1 + x^T A^-1 x).
    The denominator is >= 1 for positive-definite A^-1; anything near zero
    signals corrupted state and raises.
    """
    u = a_inv @ x
    denom = 1.0 + float(x @ u)
    if denom <= 1e-12:
        raise ArithmeticError(f"rank-1 update denominator {denom} <= 1e-12; state corrupted")
    out = a_inv - np.outer(u, u) / denom
    drift = np.max(np.abs(out - out.T))
    if drift > SYMMETRY_TOL:
        out = (out + out.T) / 2.0
    return out


def quad_form(a_inv: np.ndarray, x: np.ndarray) -> float:
    """x^T A^-1 x; must be nonnegative for positive-definite input."""
    val = float(x @ (a_inv @ x))
    if val < 0.0:
        raise ArithmeticError(f"quadratic form {val} < 0; matrix lost positive definiteness")
    return val


def is_symmetric(a: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(a - a.T)) < tol)


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct solve of A theta = b. Test oracle only; heads never call it."""
    return np.linalg.solve(a, b)
