"""Dense double-precision matrix substrate: products, Hadamard products, matrix exponential."""

from __future__ import annotations

import numpy as np

# Pade-13 coefficients for the matrix exponential (numerator of the [13/13] approximant).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)

# Largest 1-norm for which the order-13 approximant alone reaches double precision.
_THETA13 = 5.371920351148152


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d float64 array."""
    M = np.asarray(a, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {M.shape}")
    return M


def matmul(A, B) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {A.shape} x {B.shape}")
    return A @ B


def hadamard(A, B) -> np.ndarray:
    """Elementwise (Hadamard) product of two same-shape matrices."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise ValueError(f"hadamard shape mismatch: {A.shape} vs {B.shape}")
    return A * B


def matexp(M) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring with a fixed-order Pade approximant."""
    M = as_matrix(M)
    d = M.shape[0]
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matexp needs a square matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError("matexp needs finite entries")

    norm = float(np.linalg.norm(M, 1))
    if norm == 0.0:
        return np.eye(d)
    squarings = 0
    if norm > _THETA13:
        squarings = int(np.ceil(np.log2(norm / _THETA13)))
        M = M / (2.0**squarings)

    b = _PADE13
    ident = np.eye(d)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident
    E = np.linalg.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            E = E @ E

    if not np.isfinite(E).all():
        raise OverflowError(f"matexp overflowed double precision (input 1-norm {norm:.3g})")
    return E
