"""Dense factorizations used by every downstream stage.

SVD, symmetric eigendecomposition, polar decomposition and PSD repair,
all with a deterministic sign convention so that repeated runs produce
bit-identical factors.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, FactorizationError, NumericsWarning

SYMMETRY_TOL = 1e-10
RANK_EPS = 1e-12  # singular values below RANK_EPS * sigma_max count as zero


def check_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return `a` as a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractViolation(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ContractViolation(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return arr


def check_symmetric(a, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    arr = check_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {arr.shape}")
    gap = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if gap > tol:
        raise ContractViolation(f"{name} is not symmetric: max |a_ij - a_ji| = {gap:.3e}")
    return arr


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray       # left singular vectors, columns
    sigma: np.ndarray   # singular values, descending
    v: np.ndarray       # right singular vectors, columns


@dataclass(frozen=True)
class EigResult:
    vectors: np.ndarray  # eigenvectors, columns
    values: np.ndarray   # eigenvalues, descending


@dataclass(frozen=True)
class PolarParts:
    k1: np.ndarray  # symmetric PSD left factor, U S U^T
    k2: np.ndarray  # symmetric PSD right factor, V S V^T
    l: np.ndarray   # orthogonal polar factor, U V^T


def _fix_signs(u: np.ndarray, v: np.ndarray | None = None):
    """Make the largest-magnitude entry of each column of `u` non-negative.

    Lowest index wins ties. The paired column of `v`, when given, is
    flipped alongside so products are preserved.
    """
    for j in range(u.shape[1]):
        k = int(np.argmax(np.abs(u[:, j])))
        if u[k, j] < 0:
            u[:, j] = -u[:, j]
            if v is not None:
                v[:, j] = -v[:, j]
    return u, v


def svd(a) -> SvdResult:
    """Full SVD with descending singular values and deterministic signs."""
    arr = check_matrix(a, "svd input")
    try:
        u, s, vt = np.linalg.svd(arr, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"SVD of {arr.shape[0]}x{arr.shape[1]} matrix failed: {exc}") from exc
    v = vt.T.copy()
    u = u.copy()
    k = min(arr.shape)
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            if j < k:
                v[:, j] = -v[:, j]
    # null-space columns of v are unpaired and get their own convention
    for j in range(k, v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return SvdResult(u=u, sigma=s, v=v)


def sym_eig(a) -> EigResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    arr = check_symmetric(a, "sym_eig input")
    try:
        vals, vecs = np.linalg.eigh((arr + arr.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"eigendecomposition of {arr.shape[0]}x{arr.shape[0]} matrix failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order].copy()
    _fix_signs(vecs)
    return EigResult(vectors=vecs, values=vals)


def polar_decompose(s) -> PolarParts:
    """Split a square matrix into K1 @ L == L @ K2 with K1, K2 symmetric PSD
    and L orthogonal, via the SVD."""
    arr = check_matrix(s, "polar input")
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"polar input must be square, got shape {arr.shape}")
    f = svd(arr)
    k1 = f.u @ np.diag(f.sigma) @ f.u.T
    k2 = f.v @ np.diag(f.sigma) @ f.v.T
    l = f.u @ f.v.T
    # round off asymmetry from the triple products
    k1 = (k1 + k1.T) / 2.0
    k2 = (k2 + k2.T) / 2.0
    return PolarParts(k1=k1, k2=k2, l=l)


def psd_clip(a, tol: float = 1e-10) -> np.ndarray:
    """Floor negative eigenvalues of a symmetric matrix at zero.

    Already-PSD input comes back unchanged. Eigenvalues below -tol are
    reported through a NumericsWarning; smaller dips are silent roundoff.
    """
    arr = check_symmetric(a, "psd_clip input")
    e = sym_eig(arr)
    if np.all(e.values >= 0):
        return arr
    bad = e.values[e.values < -tol]
    if bad.size:
        warnings.warn(
            f"clipped {bad.size} negative eigenvalue(s) below -{tol:g}: "
            + ", ".join(f"{x:.3e}" for x in bad),
            NumericsWarning,
            stacklevel=2,
        )
    vals = np.maximum(e.values, 0.0)
    out = (e.vectors * vals) @ e.vectors.T
    return (out + out.T) / 2.0


def write_matrix_csv(path, a, header=None) -> None:
    """Write a matrix as CSV, 17 significant digits, optional header row."""
    arr = check_matrix(a, "csv matrix")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            if len(header) != arr.shape[1]:
                raise ContractViolation(
                    f"header length {len(header)} != column count {arr.shape[1]}")
            w.writerow(header)
        for row in arr:
            w.writerow([f"{x:.17g}" for x in row])


def read_matrix_csv(path, has_header: bool = False):
    """Read a CSV matrix. Returns (matrix, header-or-None)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ContractViolation(f"{path}: empty matrix file")
    header = None
    if has_header:
        header = rows[0]
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ContractViolation(f"{path}: ragged row {i} ({len(row)} != {width} cells)")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ContractViolation(f"{path}: non-numeric cell at row {i}, column {j}: {cell!r}") from None
    return data, header
