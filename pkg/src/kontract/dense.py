"""Dense real-matrix substrate: validation, minors, eigensolvers, file I/O.

Everything downstream works on plain ``numpy.ndarray`` objects (float64,
row-major).  This module owns the entry validation, the minor/determinant
kernel, the two eigensolvers, and the CSV/JSON matrix formats used by the
command line tools.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "MatrixFormatError",
    "as_matrix",
    "as_square",
    "as_vector",
    "eigenvalues_general",
    "load_matrix",
    "load_matrix_csv",
    "load_matrix_json",
    "matmul",
    "minor",
    "permutation_matrix",
    "permutation_sign",
    "save_matrix_csv",
    "save_matrix_json",
    "spectral_abscissa",
    "symmetric_eigs",
]

#: Asymmetry beyond this (relative to max(1, |A|_F)) is rejected by
#: :func:`symmetric_eigs` rather than silently symmetrized away.
SYMMETRY_TOL = 1e-10

#: General eigensolver guardrail; the QR path is only an oracle for
#: small Hurwitz cross-checks, not a production eigensolver.
GENERAL_EIG_MAX_DIM = 64


class DimensionError(ValueError):
    """Operands have incompatible or invalid shapes."""


class MatrixFormatError(ValueError):
    """A matrix file or literal could not be parsed."""


class ConvergenceError(RuntimeError):
    """An iterative kernel exhausted its iteration budget."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting non-finite entries."""
    out = np.asarray(a, dtype=float)
    if out.ndim == 1:
        out = out.reshape(1, -1) if out.size else out.reshape(0, 0)
    if out.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={out.ndim}")
    if out.size and not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise ValueError(f"{name} has non-finite entry at ({bad[0]}, {bad[1]})")
    return out


def as_square(a, name: str = "matrix") -> np.ndarray:
    out = as_matrix(a, name)
    if out.shape[0] != out.shape[1]:
        raise DimensionError(f"{name} must be square, got {out.shape[0]}x{out.shape[1]}")
    return out


def as_vector(x, name: str = "vector") -> np.ndarray:
    out = np.asarray(x, dtype=float).reshape(-1)
    if out.size and not np.all(np.isfinite(out)):
        raise ValueError(f"{name} has non-finite entries")
    return out


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit shape check.

    Raises :class:`DimensionError` naming both shapes when the inner
    dimensions disagree (numpy's own message omits the operand shapes for
    some mixed inputs).
    """
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def _det_small(s: np.ndarray) -> float:
    """Closed-form determinant for k in {0, 1, 2, 3}."""
    k = s.shape[0]
    if k == 0:
        return 1.0
    if k == 1:
        return float(s[0, 0])
    if k == 2:
        return float(s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0])
    return float(
        s[0, 0] * (s[1, 1] * s[2, 2] - s[1, 2] * s[2, 1])
        - s[0, 1] * (s[1, 0] * s[2, 2] - s[1, 2] * s[2, 0])
        + s[0, 2] * (s[1, 0] * s[2, 1] - s[1, 1] * s[2, 0])
    )


def _check_index_tuple(idx, bound: int, what: str) -> tuple[int, ...]:
    t = tuple(int(i) for i in idx)
    if any(i < 0 or i >= bound for i in t):
        raise IndexError(f"{what} {t} out of range for dimension {bound}")
    if any(t[i] >= t[i + 1] for i in range(len(t) - 1)):
        raise ValueError(f"{what} {t} must be strictly increasing")
    return t


def minor(a, rows, cols) -> float:
    """Determinant of the submatrix picked by strictly increasing index tuples.

    Closed forms are used up to 3x3; larger minors go through LU with
    partial pivoting.
    """
    a = as_matrix(a)
    rows = _check_index_tuple(rows, a.shape[0], "row index tuple")
    cols = _check_index_tuple(cols, a.shape[1], "column index tuple")
    if len(rows) != len(cols):
        raise DimensionError(f"minor needs equal index counts, got {len(rows)} rows, {len(cols)} cols")
    sub = a[np.ix_(rows, cols)]
    if len(rows) <= 3:
        return _det_small(sub)
    return float(np.linalg.det(sub))


def permutation_sign(perm) -> int:
    """Signature of a permutation of 0..k-1, by counting inversions."""
    p = list(perm)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of 0..{len(p) - 1}: {tuple(perm)}")
    inversions = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inversions % 2 else 1


def permutation_matrix(perm) -> np.ndarray:
    """0/1 matrix P with ``(P x)[perm[i]] = x[i]``.

    ``perm[i]`` is the destination of source coordinate ``i``; P has a 1 at
    (perm[i], i).
    """
    p = [int(i) for i in perm]
    n = len(p)
    if sorted(p) != list(range(n)):
        raise ValueError("destination map is not a bijection on 0..n-1")
    out = np.zeros((n, n))
    out[p, np.arange(n)] = 1.0
    return out


def symmetric_eigs(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, descending, via cyclic Jacobi.

    The input must be symmetric to ``SYMMETRY_TOL``; it is symmetrized as
    (A + A^T)/2 before the sweeps.  Rotations run in row-cyclic order until
    the off-diagonal Frobenius norm drops below ``tol * |A|_F``.  Jacobi is
    slower than QR but unconditionally convergent, which matters because the
    2-measure of certificate matrices is computed through this kernel.
    """
    a = as_square(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - a.T) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric to tolerance 1e-10")
    w = (a + a.T) / 2.0
    if n == 1:
        return w.diagonal().copy()
    target = tol * max(np.linalg.norm(w), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        # norm of the off-diagonal part directly; the difference-of-squares
        # form cancels catastrophically and floors near sqrt(eps) * |W|
        off = float(np.linalg.norm(w[offdiag]))
        if off <= target:
            return np.sort(w.diagonal())[::-1].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * w[:, p] - s * w[:, q]
                rot_q = s * w[:, p] + c * w[:, q]
                w[:, p], w[:, q] = rot_p, rot_q
                rot_p = c * w[p, :] - s * w[q, :]
                rot_q = s * w[p, :] + c * w[q, :]
                w[p, :], w[q, :] = rot_p, rot_q
                # symmetry drifts at rounding level; pin the rotated pair
                w[p, q] = w[q, p] = 0.0
    raise ConvergenceError(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")


def eigenvalues_general(a) -> np.ndarray:
    """All eigenvalues of a small square matrix (complex, unordered).

    Backed by LAPACK's shifted-QR iteration on the Hessenberg form via
    ``numpy.linalg.eigvals``.  Dimension is capped: this routine exists as a
    spectral oracle for Hurwitz cross-checks, not for production-scale work.
    """
    a = as_square(a)
    if a.shape[0] > GENERAL_EIG_MAX_DIM:
        raise DimensionError(
            f"general eigensolver capped at {GENERAL_EIG_MAX_DIM}, got {a.shape[0]}"
        )
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration failed to converge: {exc}") from exc


def spectral_abscissa(a) -> float:
    """max Re(lambda) over the spectrum of ``a``."""
    return float(np.max(eigenvalues_general(a).real))


# ---------------------------------------------------------------------------
# Matrix file formats.
#
# CSV: one matrix row per line, comma separated, no header.
# JSON: {"rows": n, "cols": m, "data": [row-major entries]}.
# ---------------------------------------------------------------------------


def load_matrix_csv(path) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
            if rows and len(row) != len(rows[0]):
                raise MatrixFormatError(
                    f"{path}:{lineno}: ragged row, expected {len(rows[0])} cells, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise MatrixFormatError(f"{path}: empty matrix file")
    return as_matrix(rows, str(path))


def load_matrix_json(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError) as exc:
        raise MatrixFormatError(f"{path}: expected keys rows/cols/data") from exc
    if len(data) != rows * cols:
        raise MatrixFormatError(f"{path}: data length {len(data)} != rows*cols = {rows * cols}")
    return as_matrix(np.asarray(data, dtype=float).reshape(rows, cols), str(path))


def load_matrix(path) -> np.ndarray:
    """Load a matrix, dispatching on the ``.json`` / ``.csv`` suffix."""
    if str(path).endswith(".json"):
        return load_matrix_json(path)
    return load_matrix_csv(path)


def save_matrix_csv(a, path) -> None:
    a = as_matrix(a)
    with open(path, "w", encoding="utf-8") as fh:
        for row in a:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_matrix_json(a, path) -> None:
    a = as_matrix(a)
    doc = {"rows": a.shape[0], "cols": a.shape[1], "data": [float(v) for v in a.ravel()]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
