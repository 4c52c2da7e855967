"""Dense complex matrix helpers: products, multiset submatrices, permanents,
unitarity and fidelity checks.

Matrices are plain ``numpy.ndarray`` objects with ``dtype=complex``; the
functions here add the domain-specific contracts (shape checks, the permanent
size cap, the unitarity tolerance) on top of numpy.
"""

from __future__ import annotations

import numpy as np

from .errors import BoundsError, CapacityError, ShapeError, ValidationError

#: Absolute tolerance used by default for unitarity and matrix equality checks.
DEFAULT_TOL = 1e-10

#: Largest permanent computed by default; Ryser's formula is O(2^n * n).
PERMANENT_CAP = 20


def as_complex_matrix(entries) -> np.ndarray:
    """Coerce ``entries`` to a 2-D complex ndarray."""
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def multiply(a, b) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def submatrix(u, rows, cols) -> np.ndarray:
    """Square submatrix ``u[rows[i], cols[j]]`` with multiset (repeatable) indices.

    Repeated indices are allowed so that bunched Fock outcomes, which reuse a
    mode several times, map onto the same permanent machinery.
    """
    u = as_complex_matrix(u)
    rows = list(rows)
    cols = list(cols)
    if len(rows) != len(cols):
        raise ShapeError(f"need equally many rows and cols, got {len(rows)} and {len(cols)}")
    nr, nc = u.shape
    for i in rows:
        if not 0 <= i < nr:
            raise BoundsError(f"row index {i} out of range for {nr}x{nc} matrix")
    for j in cols:
        if not 0 <= j < nc:
            raise BoundsError(f"column index {j} out of range for {nr}x{nc} matrix")
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    return u[np.ix_(rows, cols)]


def permanent(a, cap: int = PERMANENT_CAP) -> complex:
    """Permanent of a square complex matrix via Ryser's formula.

    Subsets are visited in Gray-code order so each step updates the running
    row sums with a single column, giving O(2^n * n) work. Matrices larger
    than ``cap`` are refused rather than silently taking hours.
    """
    a = as_complex_matrix(a)
    n, n2 = a.shape
    if n != n2:
        raise ShapeError(f"permanent needs a square matrix, got {a.shape}")
    if n > cap:
        raise CapacityError(f"permanent of size {n} exceeds cap {cap}")
    if n == 0:
        return complex(1.0)

    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1.0  # tracks (-1)^|S|; Gray steps change |S| by exactly one
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        bit = g ^ gray
        j = bit.bit_length() - 1
        if g & bit:
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        gray = g
        sign = -sign
        total += sign * np.prod(row_sums)
    return complex(((-1) ** n) * total)


def fidelity(u, v) -> float:
    """Similarity ``|Tr(u^dag v)| / m`` between two m x m matrices.

    Equals 1 iff the matrices coincide up to a global phase; symmetric in its
    arguments.
    """
    u = as_complex_matrix(u)
    v = as_complex_matrix(v)
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise ShapeError(f"fidelity needs equal square matrices, got {u.shape} and {v.shape}")
    m = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) / m)


def unitarity_defect(u) -> float:
    """Max-norm of ``u^dag u - I``."""
    u = as_complex_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError(f"unitarity check needs a square matrix, got {u.shape}")
    eye = np.eye(u.shape[0])
    return float(np.max(np.abs(u.conj().T @ u - eye)))


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    return unitarity_defect(u) <= tol


def assert_unitary(u, tol: float = DEFAULT_TOL, what: str = "matrix") -> np.ndarray:
    """Return ``u`` as a complex ndarray, raising ValidationError if not unitary."""
    u = as_complex_matrix(u)
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValidationError(f"{what} is not unitary: max |U^dag U - I| = {defect:.3e} > {tol:.1e}")
    return u


def haar_random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed m x m unitary from QR of a complex Gaussian matrix.

    The R diagonal is phase-normalised so the distribution is exactly Haar
    rather than QR-convention dependent.
    """
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def matrix_to_json(u) -> dict:
    """JSON object ``{"rows", "cols", "entries"}`` with row-major [re, im] pairs."""
    u = as_complex_matrix(u)
    entries = [[float(z.real), float(z.imag)] for z in u.ravel()]
    return {"rows": int(u.shape[0]), "cols": int(u.shape[1]), "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`, with structural validation."""
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"matrix object needs 'rows', 'cols' and 'entries': {exc}") from exc
    if rows < 0 or cols < 0:
        raise ValidationError(f"matrix dimensions must be non-negative, got {rows}x{cols}")
    if len(entries) != rows * cols:
        raise ValidationError(f"expected {rows * cols} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(rows, cols)
