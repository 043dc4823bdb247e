"""Minimal dense linear-algebra kernel for the online ELM learner.

Matrices are 2-D float64 numpy arrays in row-major (C) order. Public
functions validate shapes on entry and guarantee finite entries on exit,
so numerical breakdown surfaces here instead of in callers. The
pseudoinverse goes through the normal equations with an optional ridge
term as an escape hatch for rank-deficient designs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "NumericalError",
    "SingularMatrixError",
    "as_matrix",
    "ensure_finite",
    "matmul",
    "transpose",
    "solve_spd",
    "pinv_normal",
]

# Pivot tolerance for the SPD factorization, relative to the largest
# diagonal entry of the coefficient matrix.
PIVOT_RTOL = 1e-12

# Relative asymmetry tolerated by solve_spd before rejecting the input.
SYMMETRY_RTOL = 1e-10


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite values or broke down."""


class SingularMatrixError(NumericalError):
    """SPD factorization hit a non-positive pivot below tolerance."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a C-contiguous 2-D float64 array."""
    out = np.ascontiguousarray(a, dtype=float)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={out.ndim}")
    return out


def ensure_finite(a: np.ndarray, what: str = "result") -> np.ndarray:
    """Raise NumericalError unless every entry of ``a`` is finite."""
    if not np.isfinite(a).all():
        raise NumericalError(f"{what} contains non-finite entries")
    return a


def matmul(a, b) -> np.ndarray:
    """Matrix product a @ b with explicit conformance checking."""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    return ensure_finite(out, "matrix product")


def transpose(a) -> np.ndarray:
    """Transpose, returned as a fresh row-major array."""
    return np.ascontiguousarray(as_matrix(a).T)


def _cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix.

    Raises SingularMatrixError when a pivot falls at or below
    PIVOT_RTOL times the largest diagonal entry.
    """
    n = a.shape[0]
    tol = max(PIVOT_RTOL * float(np.max(np.diagonal(a))), 0.0) if n else 0.0
    lower = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not pivot > tol:
            raise SingularMatrixError(
                f"non-positive pivot {pivot:.3e} at column {j} "
                f"(tolerance {tol:.3e}); matrix is singular or indefinite"
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def _solve_lower(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.zeros_like(b)
    for i in range(lower.shape[0]):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    return y


def _solve_upper(upper: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = upper.shape[0]
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - upper[i, i + 1 :] @ x[i + 1 :]) / upper[i, i]
    return x


def solve_spd(a, b) -> np.ndarray:
    """Solve a @ x = b for symmetric positive-definite ``a``.

    ``a`` must be square and symmetric to within 1e-10 relative;
    ``b`` is an n x m right-hand side.

    Raises:
        ShapeError: non-square ``a`` or mismatched ``b``.
        ValueError: ``a`` is measurably asymmetric.
        SingularMatrixError: factorization meets a non-positive pivot.
    """
    a = as_matrix(a, "coefficient matrix")
    b = as_matrix(b, "right-hand side")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ShapeError(f"coefficient matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    if b.shape[0] != n:
        raise ShapeError(
            f"right-hand side has {b.shape[0]} rows, coefficient matrix has {n}"
        )
    scale = float(np.max(np.abs(a))) if n else 0.0
    if scale > 0.0 and float(np.max(np.abs(a - a.T))) > SYMMETRY_RTOL * scale:
        raise ValueError("coefficient matrix is not symmetric to 1e-10 relative")
    lower = _cholesky(a)
    x = _solve_upper(lower.T, _solve_lower(lower, b))
    return ensure_finite(x, "SPD solve result")


def pinv_normal(h, ridge: float = 0.0) -> np.ndarray:
    """Left pseudoinverse (HtH + ridge*I)^-1 Ht of a tall matrix H.

    With ridge = 0 and full column rank this is the Moore-Penrose
    pseudoinverse. A SingularMatrixError signals rank deficiency; the
    caller may retry with ridge > 0.
    """
    h = as_matrix(h, "design matrix")
    if h.shape[0] < h.shape[1]:
        raise ShapeError(
            f"need rows >= cols for the normal equations, got {h.shape[0]}x{h.shape[1]}"
        )
    if ridge < 0.0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    gram = h.T @ h
    if ridge > 0.0:
        gram = gram + ridge * np.eye(h.shape[1])
    gram = (gram + gram.T) / 2.0
    return solve_spd(gram, transpose(h))
