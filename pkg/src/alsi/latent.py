"""Latent-space embeddings.

Baseline LSI embeds terms and documents from the SVD of the incidence
matrix; the kernelized variant embeds items from the eigendecomposition of
a fused PSD kernel, either distance-preserving (U sqrt(Lambda)) or
whitened (rows of U).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation
from .ingest import IncidenceMatrix
from .linalg import RANK_EPS, check_symmetric, svd, sym_eig


@dataclass
class LatentEmbedding:
    items: list[str]
    coords: np.ndarray          # items x m
    eigenvalues: np.ndarray     # retained spectrum, descending
    whitened: bool


def lsi_embed(x: IncidenceMatrix, m: int) -> tuple[LatentEmbedding, LatentEmbedding]:
    """Classic LSI: whitened term and document coordinates from the SVD of X.

    With X = U S V^T the whitened immersion of term t_j reduces to row j of
    V (first m columns); documents analogously to rows of U.
    """
    n, p = x.x.shape
    if not 1 <= m <= min(n, p):
        raise ContractViolation(f"m must be in [1, {min(n, p)}], got {m}")
    f = svd(x.x)
    lam = f.sigma[:m] ** 2
    terms = LatentEmbedding(items=list(x.genes), coords=f.v[:, :m].copy(),
                            eigenvalues=lam, whitened=True)
    docs = LatentEmbedding(items=list(x.experiments), coords=f.u[:, :m].copy(),
                           eigenvalues=lam.copy(), whitened=True)
    return terms, docs


def alsi_embed(k, energy: float = 0.95, whitened: bool = False,
               items: list[str] | None = None) -> LatentEmbedding:
    """Spectral embedding of a PSD kernel keeping an energy fraction of the
    spectrum.

    Retains the smallest m with sum of the top-m eigenvalues >= energy *
    total; eigenvalues below 1e-12 * lambda_max are always dropped. Coords
    are U sqrt(Lambda) (distance-preserving) or plain rows of U (whitened).
    """
    if not 0.0 < energy <= 1.0:
        raise ContractViolation(f"energy must be in (0, 1], got {energy}")
    arr = check_symmetric(k, "kernel")
    e = sym_eig(arr)
    lam_max = float(e.values[0]) if e.values.size else 0.0
    if e.values.size and e.values[-1] < -1e-8 * max(lam_max, 1.0):
        raise ContractViolation(
            f"kernel is not PSD (min eigenvalue {e.values[-1]:.3e}); psd_clip it first")
    vals = np.maximum(e.values, 0.0)
    keep = vals > RANK_EPS * lam_max
    vals = vals[keep]
    vecs = e.vectors[:, keep]
    total = vals.sum()
    if total <= 0:
        raise ContractViolation("kernel has no positive spectrum to embed")
    cum = np.cumsum(vals)
    m = int(np.searchsorted(cum, energy * total - 1e-15 * total) + 1)
    m = min(m, vals.size)
    vals = vals[:m]
    vecs = vecs[:, :m]
    coords = vecs.copy() if whitened else vecs * np.sqrt(vals)
    ids = items if items is not None else [str(i) for i in range(arr.shape[0])]
    if len(ids) != arr.shape[0]:
        raise ContractViolation("item id count does not match kernel size")
    return LatentEmbedding(items=list(ids), coords=coords, eigenvalues=vals,
                           whitened=whitened)


def induced_distance(k) -> np.ndarray:
    """Feature-space distances d_jk = sqrt(K_jj + K_kk - 2 K_jk)."""
    arr = check_symmetric(k, "kernel")
    diag = np.diag(arr)
    d2 = diag[:, None] + diag[None, :] - 2.0 * arr
    floor = float(d2.min())
    if floor < -1e-10 * max(float(np.abs(diag).max()), 1.0):
        raise ContractViolation(
            f"kernel induces negative squared distances ({floor:.3e}); not PSD enough")
    d = np.sqrt(np.maximum(d2, 0.0))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d
