"""Expression-matrix loading, CV-based gene filtering and binarization.

The pipeline starts from a real-valued experiments-by-genes matrix,
keeps genes whose coefficient of variation exceeds a threshold, and
turns the survivors into a binary incidence matrix using the maximum
expression seen among the discarded genes as the on/off cut.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractViolation, DataError, NumericsWarning
from .linalg import check_matrix

CV_SD_OVER_MEAN = "sd-over-mean"
CV_MEAN_OVER_SD = "mean-over-sd"
CV_CONVENTIONS = (CV_SD_OVER_MEAN, CV_MEAN_OVER_SD)


@dataclass
class ExpressionMatrix:
    experiments: list[str]          # row labels, e.g. cancer types
    genes: list[str]                # unique column identifiers
    values: np.ndarray              # n experiments x p genes

    def __post_init__(self):
        self.values = check_matrix(self.values, "expression values")
        n, p = self.values.shape
        if len(self.experiments) != n or len(self.genes) != p:
            raise ContractViolation(
                f"label counts ({len(self.experiments)}, {len(self.genes)}) "
                f"do not match matrix shape {self.values.shape}")
        if any(not e for e in self.experiments):
            raise ContractViolation("experiment labels must be non-empty")
        if len(set(self.genes)) != len(self.genes):
            dupes = sorted({g for g in self.genes if self.genes.count(g) > 1})
            raise ContractViolation(f"duplicate gene identifiers: {dupes}")


@dataclass
class FilterReport:
    genes: list[str]
    mean: np.ndarray
    sd: np.ndarray                  # sample sd, divisor n-1
    cv: np.ndarray
    kept: np.ndarray                # bool, kept_j <=> cv_j > threshold_cv
    threshold_cv: float
    convention: str
    hist_edges: np.ndarray = field(default=None)
    hist_counts: np.ndarray = field(default=None)


@dataclass
class IncidenceMatrix:
    experiments: list[str]
    genes: list[str]                # kept genes, post column-drop
    x: np.ndarray                   # entries in {0, 1}
    expression_threshold: float

    def __post_init__(self):
        self.x = check_matrix(self.x, "incidence matrix")
        if not np.all((self.x == 0) | (self.x == 1)):
            raise ContractViolation("incidence entries must be exactly 0 or 1")
        if self.x.shape[1] and np.any(self.x.sum(axis=0) == 0):
            raise ContractViolation("incidence matrix has an all-zero column")


def load_expression(path) -> ExpressionMatrix:
    """Parse an expression CSV: header 'label,<gene ids...>', then one row
    per experiment."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "label":
        raise DataError(f"{path}: first header cell must be 'label', got {header[:1]!r}")
    genes = header[1:]
    seen = set()
    for g in genes:
        if g in seen:
            raise DataError(f"{path}: duplicate gene id {g!r} in header")
        seen.add(g)
    p = len(genes)
    labels = []
    values = np.empty((len(rows) - 1, p))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != p + 1:
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {p + 1}")
        labels.append(row[0])
        for j, cell in enumerate(row[1:]):
            try:
                values[i - 1, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at row {i}, column {j + 1}") from None
    return ExpressionMatrix(experiments=labels, genes=genes, values=values)


def cv_filter(y: ExpressionMatrix, threshold_cv: float = 0.5,
              convention: str = CV_SD_OVER_MEAN, bins: int = 30) -> FilterReport:
    """Per-gene coefficient of variation across experiments; a gene is kept
    when its CV strictly exceeds the threshold.

    Constant genes (sd = 0) get CV 0 under sd-over-mean and are never kept;
    under mean-over-sd they get +inf and are kept only when |mean| > 0.
    """
    if convention not in CV_CONVENTIONS:
        raise ContractViolation(f"unknown CV convention {convention!r}")
    n = y.values.shape[0]
    if n < 2:
        raise ContractViolation(f"need at least 2 experiments for a sample sd, got {n}")
    mean = y.values.mean(axis=0)
    sd = y.values.std(axis=0, ddof=1)
    zero_sd = sd == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        if convention == CV_SD_OVER_MEAN:
            cv = np.where(zero_sd, 0.0, sd / np.abs(mean))
            cv = np.where(~zero_sd & (mean == 0), np.inf, cv)
        else:
            cv = np.where(zero_sd, np.inf, np.abs(mean) / sd)
    kept = cv > threshold_cv
    if convention == CV_SD_OVER_MEAN:
        kept &= ~zero_sd
    else:
        kept &= ~(zero_sd & (np.abs(mean) == 0))
    finite = cv[np.isfinite(cv)]
    if finite.size:
        counts, edges = np.histogram(finite, bins=bins)
    else:
        counts, edges = np.zeros(bins, dtype=int), np.linspace(0, 1, bins + 1)
    return FilterReport(genes=list(y.genes), mean=mean, sd=sd, cv=cv,
                        kept=kept, threshold_cv=threshold_cv,
                        convention=convention, hist_edges=edges,
                        hist_counts=counts)


def binarize(y: ExpressionMatrix, report: FilterReport,
             threshold_override: float | None = None) -> IncidenceMatrix:
    """Binarize kept genes against the maximum expression level observed in
    the non-kept genes (or an explicit override).

    Strictly-greater comparison; kept genes whose column ends up all-zero
    are dropped with a warning.
    """
    if report.genes != list(y.genes):
        raise ContractViolation("filter report does not match the expression matrix")
    kept = report.kept
    if threshold_override is not None:
        threshold = float(threshold_override)
    else:
        if kept.all():
            raise ContractViolation(
                "all genes kept: binarization threshold undefined, pass an override")
        threshold = float(y.values[:, ~kept].max())
    x = (y.values[:, kept] > threshold).astype(np.float64)
    genes = [g for g, k in zip(y.genes, kept) if k]
    nonzero = x.sum(axis=0) > 0
    dropped = [g for g, nz in zip(genes, nonzero) if not nz]
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} gene column(s) with no expression above "
            f"threshold {threshold:g}: {dropped[:10]}",
            NumericsWarning, stacklevel=2)
        x = x[:, nonzero]
        genes = [g for g, nz in zip(genes, nonzero) if nz]
    if not genes:
        raise ContractViolation(
            f"no gene expressed above threshold {threshold:g}: nothing to binarize")
    return IncidenceMatrix(experiments=list(y.experiments), genes=genes,
                           x=x, expression_threshold=threshold)


def write_filter_report_csv(path, report: FilterReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gene", "mean", "sd", "cv", "kept"])
        for g, m, s, c, k in zip(report.genes, report.mean, report.sd,
                                 report.cv, report.kept):
            w.writerow([g, f"{m:.17g}", f"{s:.17g}", f"{c:.17g}", int(k)])


def write_histogram_csv(path, edges, counts) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([f"{lo:.17g}", f"{hi:.17g}", int(c)])


def write_incidence_csv(path, inc: IncidenceMatrix) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + list(inc.genes))
        for label, row in zip(inc.experiments, inc.x):
            w.writerow([label] + [str(int(v)) for v in row])


def read_incidence_csv(path, expression_threshold: float = float("nan")) -> IncidenceMatrix:
    m = load_expression(path)
    return IncidenceMatrix(experiments=m.experiments, genes=m.genes,
                           x=m.values, expression_threshold=expression_threshold)
