"""Dense complex linear algebra kernels.

All operations are pure functions on ndarrays. Two deliberately different
exponentiation routes live here: unitary_from_hermitian goes through an
eigendecomposition, expm_dense is scaling-and-squaring with a Pade core and
never diagonalizes. The bench module times the second route as the
brute-force cost baseline, so keep it free of spectral shortcuts.

Matrices cross module and file boundaries as JSON objects
{"rows": r, "cols": c, "re": [...], "im": [...]} with row-major flattening.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import opcount
from .errors import PreconditionError, ResourceLimitError

DENSE_DIMENSION_GUARD = 4096

# Pade-13 coefficients and norm threshold for scaling-and-squaring
# (Higham 2005 constants).
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


class EigenDecomposition(NamedTuple):
    """Eigenvalues ascending, eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise PreconditionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.size == 0:
        raise PreconditionError("matrix must be non-empty")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix entries must be finite")
    return a


def require_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {a.shape}")
    return a


def max_asymmetry(m) -> float:
    """Max-entry deviation from Hermitian symmetry, ||A - A^dagger||_max."""
    a = require_square(m)
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(m, tol: float = 1e-10) -> np.ndarray:
    a = require_square(m)
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol:
        raise PreconditionError(
            f"matrix is not Hermitian: max asymmetry {asym:.3e} exceeds tolerance {tol:.3e}"
        )
    return a


def unitarity_defect(m) -> float:
    """Max-entry deviation of U^dagger U from the identity."""
    u = require_square(m)
    eye = np.eye(u.shape[0], dtype=np.complex128)
    return float(np.max(np.abs(u.conj().T @ u - eye)))


def require_unitary(m, tol: float = 1e-10) -> np.ndarray:
    u = require_square(m)
    defect = unitarity_defect(u)
    if defect > tol:
        raise PreconditionError(
            f"matrix is not unitary: max defect {defect:.3e} exceeds tolerance {tol:.3e}"
        )
    return u


def eig_hermitian(a, tol: float = 1e-10) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in ascending order with orthonormal eigenvector
    columns; reconstruction V diag(w) V^dagger reproduces the input to
    rounding. Backed by LAPACK; the contract is the residual, not the
    algorithm.
    """
    h = require_hermitian(a, tol)
    w, v = np.linalg.eigh(h)
    opcount.add(h.shape[0] ** 3)  # documented surrogate for the LAPACK call
    return EigenDecomposition(w, v)


def unitary_from_hermitian(a, scale: float, tol: float = 1e-10) -> np.ndarray:
    """exp(i * scale * A) for Hermitian A, via eigendecomposition."""
    if not math.isfinite(scale):
        raise PreconditionError("scale must be finite")
    w, v = eig_hermitian(a, tol)
    phases = np.exp(1j * scale * w)
    n = v.shape[0]
    opcount.add(n * n + n ** 3)  # column scaling plus one matmul
    return (v * phases) @ v.conj().T


def matrix_power(u, p: int, tol: float = 1e-10) -> np.ndarray:
    """U^p for unitary U and integer p >= 0, by binary exponentiation."""
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise PreconditionError(f"power must be an integer, got {type(p).__name__}")
    if p < 0:
        raise PreconditionError(f"power must be non-negative, got {p}")
    base = require_unitary(u, tol)
    n = base.shape[0]
    result = np.eye(n, dtype=np.complex128)
    e = int(p)
    while e:
        if e & 1:
            result = result @ base
            opcount.add(n ** 3)
        e >>= 1
        if e:
            base = base @ base
            opcount.add(n ** 3)
    return result


def expm_dense(m, t: float, max_dim: int = DENSE_DIMENSION_GUARD) -> np.ndarray:
    """exp(-i * M * t) by Pade-13 scaling-and-squaring.

    The deliberately brute-force dense path: a fixed number of full matrix
    products plus one solve, then s squarings with s set by the scaled
    1-norm. No eigendecomposition, no structure exploitation; cost is
    O(dim^3) per product regardless of the matrix contents.
    """
    a = require_square(m)
    if not math.isfinite(t):
        raise PreconditionError("time must be finite")
    dim = a.shape[0]
    if dim > max_dim:
        raise ResourceLimitError(
            f"dense exponential of dimension {dim} exceeds the guard {max_dim}"
        )
    a = (-1j * t) * a

    norm1 = float(np.linalg.norm(a, 1))
    s = 0
    if norm1 > _PADE13_THETA:
        s = int(math.ceil(math.log2(norm1 / _PADE13_THETA)))
        a = a / (2.0 ** s)

    b = _PADE13_B
    eye = np.eye(dim, dtype=np.complex128)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u_odd = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v_even = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
              + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye)
    r = np.linalg.solve(v_even - u_odd, v_even + u_odd)
    opcount.add(6 * dim ** 3 + dim ** 3 // 3)
    for _ in range(s):
        r = r @ r
        opcount.add(dim ** 3)
    return r


def matrix_to_json(m) -> dict:
    """Serialize a matrix to the row-major {rows, cols, re, im} wire format."""
    a = as_matrix(m)
    flat = a.reshape(-1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse the {rows, cols, re, im} wire format back into an ndarray."""
    if not isinstance(obj, dict):
        raise PreconditionError("matrix JSON must be an object")
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise PreconditionError(f"malformed matrix JSON: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise PreconditionError("matrix JSON must have positive rows and cols")
    if re.shape != (rows * cols,) or im.shape != (rows * cols,):
        raise PreconditionError(
            f"matrix JSON length mismatch: expected {rows * cols} entries, "
            f"got re={re.size}, im={im.size}"
        )
    return as_matrix((re + 1j * im).reshape(rows, cols))
