"""Asymmetric inclusion similarity and the baseline distance matrices.

For binary gene columns t_i the similarity s_ij = |t_i ^ t_j| / |t_i| is
the fraction of gene i's expressing experiments in which gene j also
expresses; s_ij = 1 means i's support is contained in j's.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, NumericsWarning
from .ingest import IncidenceMatrix
from .linalg import check_matrix

BASELINE_EUCLIDEAN = "euclidean"
BASELINE_PEARSON = "pearson"


@dataclass
class AsymmetricSimilarity:
    genes: list[str]
    s: np.ndarray       # p x p, entries in [0, 1], generally s_ij != s_ji

    def __post_init__(self):
        self.s = check_matrix(self.s, "similarity matrix")
        if self.s.shape[0] != self.s.shape[1]:
            raise ContractViolation(f"similarity matrix must be square, got {self.s.shape}")


@dataclass
class NormDiagnostics:
    norms: np.ndarray           # per-gene support sizes |t_i|
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    skew_max: float             # max |s_ij - s_ji|
    skew_mean: float            # mean |s_ij - s_ji| over off-diagonal pairs


def asymmetric_similarity(x: IncidenceMatrix) -> AsymmetricSimilarity:
    """s_ij = sum_k min(x_ik, x_jk) / sum_k x_ik, computed densely."""
    norms = x.x.sum(axis=0)
    zero = np.where(norms == 0)[0]
    if zero.size:
        raise ContractViolation(
            f"zero-norm gene column(s): {[x.genes[i] for i in zero[:10]]}")
    # binary entries: min(x_ik, x_jk) == x_ik * x_jk
    counts = x.x.T @ x.x
    s = counts / norms[:, None]
    return AsymmetricSimilarity(genes=list(x.genes), s=s)


def skew_split(s) -> tuple[np.ndarray, np.ndarray]:
    """Return (symmetric, skew) parts; their sum reconstructs s exactly."""
    arr = s.s if isinstance(s, AsymmetricSimilarity) else check_matrix(s, "skew_split input")
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"skew_split needs a square matrix, got {arr.shape}")
    sym = (arr + arr.T) / 2.0
    skew = (arr - arr.T) / 2.0
    return sym, skew


def norm_diagnostics(x: IncidenceMatrix, s: AsymmetricSimilarity,
                     bins: int = 20) -> NormDiagnostics:
    """Column norms, their histogram and a summary of the asymmetry of s."""
    if bins < 1:
        raise ContractViolation(f"bins must be >= 1, got {bins}")
    if len(x.genes) != len(s.genes):
        raise ContractViolation("incidence and similarity gene lists differ in length")
    norms = x.x.sum(axis=0)
    counts, edges = np.histogram(norms, bins=bins)
    gap = np.abs(s.s - s.s.T)
    p = gap.shape[0]
    off = p * (p - 1)
    skew_mean = float(gap.sum() / off) if off else 0.0
    return NormDiagnostics(norms=norms, hist_edges=edges, hist_counts=counts,
                           skew_max=float(gap.max()), skew_mean=skew_mean)


def baseline_distances(a, kind: str) -> np.ndarray:
    """Pairwise column distances: plain Euclidean, or 1 - Pearson r.

    Zero-variance columns under pearson get all their correlations set to 0
    (with a warning); the diagonal is forced to zero either way.
    """
    arr = check_matrix(a, "baseline input")
    if kind == BASELINE_EUCLIDEAN:
        g = arr.T @ arr
        sq = np.diag(g)
        d2 = sq[:, None] + sq[None, :] - 2 * g
        d = np.sqrt(np.maximum(d2, 0.0))
    elif kind == BASELINE_PEARSON:
        if arr.shape[0] < 2:
            raise ContractViolation("pearson baseline needs at least 2 rows")
        centered = arr - arr.mean(axis=0)
        norms = np.sqrt((centered ** 2).sum(axis=0))
        flat = norms == 0
        if flat.any():
            warnings.warn(
                f"{int(flat.sum())} zero-variance column(s): correlations set to 0",
                NumericsWarning, stacklevel=2)
        safe = np.where(flat, 1.0, norms)
        unit = centered / safe
        r = unit.T @ unit
        r[flat, :] = 0.0
        r[:, flat] = 0.0
        d = 1.0 - np.clip(r, -1.0, 1.0)
    else:
        raise ContractViolation(f"unknown baseline kind {kind!r}")
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d
