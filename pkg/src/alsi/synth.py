"""Synthetic expression corpus with planted nested gene supports.

The generator plants a chain of nested experiment subsets; genes attached
to shallow levels express broadly and deep ones rarely, which reproduces
the heavy-tailed norm distribution that drives the asymmetry of the
inclusion similarity. Depth 1 gives every gene the same support size, so
the similarity matrix is symmetric up to roundoff.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation
from .ingest import ExpressionMatrix

# value bands: noise genes sit between the signal's off and on levels so
# their maximum defines a clean binarization threshold
_OFF_LO, _OFF_HI = 0.5, 3.4
_NOISE_LO, _NOISE_HI = 3.5, 4.3
_ON_LO, _ON_HI = 6.0, 10.0


@dataclass
class SyntheticTruth:
    gene_levels: dict           # gene id -> hierarchy level (0 = noise gene)
    support_sizes: dict         # gene id -> planted support size
    classes: list[str]


def generate_synthetic(n: int, p: int, depth: int = 3, seed: int = 0,
                       noise_genes: int | None = None
                       ) -> tuple[ExpressionMatrix, SyntheticTruth]:
    """Build an n-experiments by p-genes expression matrix with `depth`
    nested support levels plus low-variance noise genes."""
    if n < 2 or p < 2:
        raise ContractViolation(f"need n, p >= 2, got n={n}, p={p}")
    if depth < 1:
        raise ContractViolation(f"depth must be >= 1, got {depth}")
    rng = np.random.default_rng(seed)
    noise = max(2, p // 8) if noise_genes is None else noise_genes

    n_classes = max(2, min(6, n // 4)) if n >= 8 else 2
    classes = [f"class{c + 1}" for c in range(n_classes)]
    labels = [classes[i * n_classes // n] for i in range(n)]

    # nested experiment subsets E_1 > E_2 > ... > E_depth
    sizes = [max(1, (n // 2) // (2 ** level)) for level in range(depth)]
    order = rng.permutation(n)
    supports = [np.sort(order[:sz]) for sz in sizes]

    if depth == 1:
        levels = np.zeros(p, dtype=int)
    else:
        # deeper levels get geometrically more genes
        weights = np.array([2.0 ** level for level in range(depth)])
        levels = rng.choice(depth, size=p, p=weights / weights.sum())

    values = np.empty((n, p + noise))
    gene_ids = [f"g{j + 1}" for j in range(p)] + [f"noise{j + 1}" for j in range(noise)]
    gene_levels = {}
    support_sizes = {}
    for j in range(p):
        level = int(levels[j])
        if depth == 1:
            support = np.sort(rng.permutation(n)[:max(1, n // 2)])
        else:
            support = supports[level]
        col = rng.uniform(_OFF_LO, _OFF_HI, size=n)
        col[support] = rng.uniform(_ON_LO, _ON_HI, size=support.size)
        values[:, j] = col
        gene_levels[gene_ids[j]] = level + 1
        support_sizes[gene_ids[j]] = int(support.size)
    for j in range(noise):
        center = rng.uniform(_NOISE_LO + 0.1, _NOISE_HI - 0.1)
        values[:, p + j] = center + rng.uniform(-0.05, 0.05, size=n)
        gene_levels[gene_ids[p + j]] = 0
        support_sizes[gene_ids[p + j]] = 0

    y = ExpressionMatrix(experiments=labels, genes=gene_ids, values=values)
    return y, SyntheticTruth(gene_levels=gene_levels,
                             support_sizes=support_sizes, classes=classes)


def write_expression_csv(path, y: ExpressionMatrix) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + list(y.genes))
        for label, row in zip(y.experiments, y.values):
            w.writerow([label] + [f"{v:.17g}" for v in row])


def write_truth_csv(path, truth: SyntheticTruth) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gene", "level", "support_size"])
        for g in truth.gene_levels:
            w.writerow([g, truth.gene_levels[g], truth.support_sizes[g]])
