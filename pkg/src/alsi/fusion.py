"""Kernel extraction and fusion.

The polar decomposition of the asymmetric similarity yields two symmetric
PSD kernels; a third PSD kernel built from class-label co-membership acts
as a prior. The fused kernel is the closed-form minimizer of a ridge-style
objective: K = F(K1, K2) + tau * W, with the combiner weights fixed by the
minimizer to gamma1 = gamma2 = tau + 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, SingularMatrixError
from .linalg import check_symmetric, polar_decompose, psd_clip, sym_eig
from .similarity import AsymmetricSimilarity

COMBINER_ARITHMETIC = "arithmetic"
COMBINER_GEOMETRIC = "geometric"
COMBINER_HARMONIC = "harmonic"
COMBINERS = (COMBINER_ARITHMETIC, COMBINER_GEOMETRIC, COMBINER_HARMONIC)

PSD_CLIP_TOL = 1e-10


@dataclass
class FusionConfig:
    tau: float = 0.2
    combiner: str = COMBINER_ARITHMETIC
    t: float = 0.5              # weight for geometric/harmonic means
    ridge: float | None = None  # None -> 1e-8 * trace / p for inverse-based combiners

    def __post_init__(self):
        if self.tau < 0:
            raise ContractViolation(f"tau must be >= 0, got {self.tau}")
        if self.combiner not in COMBINERS:
            raise ContractViolation(f"unknown combiner {self.combiner!r}")
        if not 0.0 <= self.t <= 1.0:
            raise ContractViolation(f"t must be in [0, 1], got {self.t}")
        if self.ridge is not None and self.ridge < 0:
            raise ContractViolation(f"ridge must be >= 0, got {self.ridge}")

    @property
    def gamma1(self) -> float:
        return self.tau + 1.0

    @property
    def gamma2(self) -> float:
        return self.tau + 1.0


@dataclass
class LabelKernel:
    classes: list[str]
    membership: dict            # gene id -> frozenset of class labels
    q: np.ndarray               # asymmetric co-membership proportions
    w: np.ndarray               # symmetric PSD prior, (Q1 + Q2)/2 clipped


def asymmetry_sources(s) -> tuple[np.ndarray, np.ndarray]:
    """The two symmetric PSD kernels from the polar decomposition of s."""
    arr = s.s if isinstance(s, AsymmetricSimilarity) else np.asarray(s, dtype=float)
    parts = polar_decompose(arr)
    return psd_clip(parts.k1, PSD_CLIP_TOL), psd_clip(parts.k2, PSD_CLIP_TOL)


def label_kernel(membership: dict, genes: list[str]) -> LabelKernel:
    """Build the prior kernel from gene class memberships.

    q_ij = |classes(i) & classes(j)| / |classes(i)|; W averages the two
    polar factors of Q and clips to PSD.
    """
    sets = []
    for g in genes:
        cs = membership.get(g)
        if not cs:
            raise ContractViolation(f"gene {g!r} has no class membership")
        sets.append(frozenset(cs))
    classes = sorted(set().union(*sets))
    idx = {c: k for k, c in enumerate(classes)}
    m = np.zeros((len(genes), len(classes)))
    for i, cs in enumerate(sets):
        for c in cs:
            m[i, idx[c]] = 1.0
    counts = m @ m.T
    sizes = m.sum(axis=1)
    q = counts / sizes[:, None]
    parts = polar_decompose(q)
    w = psd_clip((parts.k1 + parts.k2) / 2.0, PSD_CLIP_TOL)
    return LabelKernel(classes=classes, membership={g: s for g, s in zip(genes, sets)},
                       q=q, w=w)


def membership_from_incidence(x, experiments: list[str] | None = None) -> dict:
    """Assign each gene to every experiment class in which it expresses."""
    labels = experiments if experiments is not None else x.experiments
    if len(labels) != x.x.shape[0]:
        raise ContractViolation("experiment label count does not match incidence rows")
    out = {}
    for j, g in enumerate(x.genes):
        out[g] = frozenset(labels[i] for i in range(len(labels)) if x.x[i, j] > 0)
    return out


def _auto_ridge(k1: np.ndarray, k2: np.ndarray) -> float:
    p = k1.shape[0]
    return 1e-8 * float(np.trace(k1) + np.trace(k2)) / (2 * p)


def _psd_power(a: np.ndarray, power: float, ridge: float, name: str) -> np.ndarray:
    e = sym_eig(a + ridge * np.eye(a.shape[0]))
    vals = e.values
    if power < 0 or (power != int(power)):
        floor = 1e-12 * max(vals.max(), 0.0)
        if vals.min() <= floor:
            raise SingularMatrixError(
                f"{name} is singular (min eigenvalue {vals.min():.3e}); set a ridge > 0")
    out = (e.vectors * np.power(vals, power)) @ e.vectors.T
    return (out + out.T) / 2.0


def combiner_geometric(k1, k2, t: float = 0.5, ridge: float | None = None) -> np.ndarray:
    """Weighted geometric matrix mean K1^(1/2) (K1^(-1/2) K2 K1^(-1/2))^t K1^(1/2)."""
    a = check_symmetric(k1, "k1")
    b = check_symmetric(k2, "k2")
    if a.shape != b.shape:
        raise ContractViolation(f"size mismatch: {a.shape} vs {b.shape}")
    r = _auto_ridge(a, b) if ridge is None else float(ridge)
    a = a + r * np.eye(a.shape[0])
    b = b + r * np.eye(a.shape[0])
    a_half = _psd_power(a, 0.5, 0.0, "k1")
    a_ihalf = _psd_power(a, -0.5, 0.0, "k1")
    mid = _psd_power(a_ihalf @ b @ a_ihalf, t, 0.0, "k1^(-1/2) k2 k1^(-1/2)")
    out = a_half @ mid @ a_half
    return (out + out.T) / 2.0


def combiner_harmonic(k1, k2, t: float = 0.5, ridge: float | None = None) -> np.ndarray:
    """Weighted harmonic matrix mean (t K1^-1 + (1-t) K2^-1)^-1."""
    a = check_symmetric(k1, "k1")
    b = check_symmetric(k2, "k2")
    if a.shape != b.shape:
        raise ContractViolation(f"size mismatch: {a.shape} vs {b.shape}")
    r = _auto_ridge(a, b) if ridge is None else float(ridge)
    eye = np.eye(a.shape[0])
    inv_mix = t * _psd_power(a + r * eye, -1.0, 0.0, "k1") \
        + (1.0 - t) * _psd_power(b + r * eye, -1.0, 0.0, "k2")
    out = _psd_power(inv_mix, -1.0, 0.0, "harmonic mix")
    return (out + out.T) / 2.0


def combine(k1, k2, cfg: FusionConfig) -> np.ndarray:
    if cfg.combiner == COMBINER_ARITHMETIC:
        a = check_symmetric(k1, "k1")
        b = check_symmetric(k2, "k2")
        if a.shape != b.shape:
            raise ContractViolation(f"size mismatch: {a.shape} vs {b.shape}")
        return (a + b) / 2.0
    if cfg.combiner == COMBINER_GEOMETRIC:
        return combiner_geometric(k1, k2, cfg.t, cfg.ridge)
    return combiner_harmonic(k1, k2, cfg.t, cfg.ridge)


def fuse(k1, k2, w, cfg: FusionConfig) -> np.ndarray:
    """K = F(K1, K2) + tau * W, clipped to PSD."""
    f = combine(k1, k2, cfg)
    wm = check_symmetric(w, "w")
    if wm.shape != f.shape:
        raise ContractViolation(f"w shape {wm.shape} does not match kernels {f.shape}")
    return psd_clip(f + cfg.tau * wm, PSD_CLIP_TOL)


def kernel_sum_feature_map(phi1, phi2, lambda1: float, lambda2: float) -> np.ndarray:
    """Concatenate weighted feature maps; the Gram matrix of the result is
    lambda1 * phi1 phi1^T + lambda2 * phi2 phi2^T."""
    if lambda1 < 0 or lambda2 < 0:
        raise ContractViolation("kernel weights must be non-negative")
    p1 = np.asarray(phi1, dtype=float)
    p2 = np.asarray(phi2, dtype=float)
    if p1.shape[0] != p2.shape[0]:
        raise ContractViolation(
            f"feature maps disagree on item count: {p1.shape[0]} vs {p2.shape[0]}")
    return np.hstack([np.sqrt(lambda1) * p1, np.sqrt(lambda2) * p2])
