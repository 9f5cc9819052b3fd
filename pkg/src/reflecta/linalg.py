"""Dense symmetric linear algebra: Jacobi eigensolver and subspace helpers.

All routines are pure functions of their inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

MAX_DIM = 16
SYMMETRY_RTOL = 1e-14
OFFDIAG_RTOL = 1e-14
MAX_SWEEPS = 64


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending; ``vectors[:, i]`` pairs with ``values[i]``."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.T


def canonical_sign(v):
    """Flip ``v`` so that its largest-magnitude entry is positive.

    Ties go to the lowest index (``argmax`` returns the first maximum).
    """
    v = np.asarray(v, dtype=float)
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v.copy()


def unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ContractViolation("cannot normalize a zero or non-finite vector")
    return v / norm


def as_symmetric(S):
    """Validate ``S`` as a symmetric matrix and return it as a float array."""
    S = np.array(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {S.shape}")
    n = S.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise ContractViolation(f"dimension {n} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(S)):
        raise ContractViolation("matrix has non-finite entries")
    scale = np.max(np.abs(S))
    if np.max(np.abs(S - S.T)) > SYMMETRY_RTOL * scale:
        raise ContractViolation("matrix is not symmetric")
    return S


def _rotation(app, aqq, apq):
    # Golub & Van Loan sym.schur2: zeroes the (p, q) entry of J^T A J.
    tau = (aqq - app) / (2.0 * apq)
    if tau >= 0:
        t = 1.0 / (tau + np.hypot(1.0, tau))
    else:
        t = -1.0 / (-tau + np.hypot(1.0, tau))
    c = 1.0 / np.hypot(1.0, t)
    return c, t * c


def sym_eigen(S):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Sweeps run in row-major pair order until the off-diagonal Frobenius norm
    drops below ``1e-14 * ||S||_F``. Eigenvalues are sorted ascending (stable,
    so equal eigenvalues keep sweep order) and each eigenvector is sign
    canonicalized.
    """
    A = as_symmetric(S).copy()
    n = A.shape[0]
    V = np.eye(n)
    target = OFFDIAG_RTOL * np.linalg.norm(A)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= target:
            break
        for p, q in pairs:
            apq = A[p, q]
            if apq == 0.0:
                continue
            c, s = _rotation(A[p, p], A[q, q], apq)
            G = np.array([[c, s], [-s, c]])
            idx = [p, q]
            A[:, idx] = A[:, idx] @ G
            A[idx, :] = G.T @ A[idx, :]
            A[p, q] = A[q, p] = 0.0
            V[:, idx] = V[:, idx] @ G
    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    vectors = np.column_stack([canonical_sign(V[:, i]) for i in order])
    return EigenDecomposition(values=values[order], vectors=vectors)


def hyperplane_basis(normal):
    """Orthonormal basis of ``normal``'s orthogonal complement, as columns.

    Uses the Householder reflector that sends ``normal`` to a multiple of the
    coordinate axis of its largest component; the remaining columns of that
    reflector span the complement.
    """
    u = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise ContractViolation("zero normal vector")
    if abs(norm - 1.0) > 1e-12:
        raise ContractViolation(f"normal is not a unit vector (norm {norm!r})")
    n = u.size
    j = int(np.argmax(np.abs(u)))
    w = u.copy()
    w[j] += 1.0 if u[j] >= 0 else -1.0
    H = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    cols = [canonical_sign(H[:, i]) for i in range(n) if i != j]
    return np.column_stack(cols)


def project_off(v, u):
    """Component of ``v`` orthogonal to the unit vector ``u``."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    return v - (v @ u) * u


def subspace_projector(basis):
    """Orthogonal projector onto the span of the (orthonormal) columns."""
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    return B @ B.T


def line_distance(u, v):
    """Sine of the angle between the lines spanned by unit vectors ``u``, ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(project_off(u, v)))


def line_angle(u, v):
    """Angle in [0, pi/2] between the lines spanned by ``u`` and ``v``."""
    u = unit(u)
    v = unit(v)
    return float(np.arctan2(np.linalg.norm(project_off(u, v)), abs(u @ v)))
