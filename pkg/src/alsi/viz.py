"""Low-dimensional projections and their file exports.

Classical (Torgerson) MDS for the gene map, a Sammon mapping for the
class-profile map, and plain SVG/CSV emitters.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, NumericsWarning
from .linalg import check_matrix, sym_eig
from .mixture import CrossTable

# fixed palette, cycled by sorted color key
PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
]


@dataclass
class Projection2D:
    items: list[str]
    coords: np.ndarray              # items x dims
    stress: float                   # Sammon stress; 0 for exact/MDS outputs
    eig_fractions: np.ndarray | None = None  # retained-eigenvalue fractions (MDS)
    color_key: list[str] | None = None
    stress_trace: np.ndarray | None = None


@dataclass
class SammonConfig:
    max_iter: int = 500
    step: float = 0.3
    tol: float = 1e-12
    seed: int = 0
    max_halves: int = 30


def _check_distance_matrix(d) -> np.ndarray:
    arr = check_matrix(d, "distance matrix")
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"distance matrix must be square, got {arr.shape}")
    if np.max(np.abs(arr - arr.T)) > 1e-10:
        raise ContractViolation("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(arr)) > 1e-12):
        raise ContractViolation("distance matrix must have a zero diagonal")
    if arr.min() < 0:
        raise ContractViolation("distances must be non-negative")
    return arr


def classical_mds(d, dims: int, items: list[str] | None = None,
                  color_key: list[str] | None = None) -> Projection2D:
    """Torgerson MDS: double-center -D^2/2 and embed along the top
    positive eigenpairs. Negative eigenvalues are dropped with a warning,
    and dims is reduced when fewer positive eigenpairs exist."""
    arr = _check_distance_matrix(d)
    if dims < 1:
        raise ContractViolation(f"dims must be >= 1, got {dims}")
    n = arr.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (arr ** 2) @ j
    e = sym_eig((b + b.T) / 2.0)
    scale = max(float(np.abs(e.values).max()), 1.0)
    pos = e.values > 1e-12 * scale
    if np.any(e.values < -1e-8 * scale):
        warnings.warn(
            f"dropping {int(np.sum(e.values < -1e-8 * scale))} negative "
            "eigenvalue(s): distances are not perfectly Euclidean",
            NumericsWarning, stacklevel=2)
    avail = int(pos.sum())
    k = min(dims, avail)
    if k < dims:
        warnings.warn(
            f"only {avail} positive eigenpair(s); reducing dims {dims} -> {max(k, 0)}",
            NumericsWarning, stacklevel=2)
    coords = np.zeros((n, dims))
    if k > 0:
        vals = e.values[:k]
        coords[:, :k] = e.vectors[:, :k] * np.sqrt(vals)
    total_pos = float(e.values[pos].sum()) if avail else 1.0
    fractions = (e.values[:k] / total_pos) if k > 0 else np.zeros(0)
    ids = items if items is not None else [str(i) for i in range(n)]
    return Projection2D(items=list(ids), coords=coords, stress=0.0,
                        eig_fractions=np.asarray(fractions), color_key=color_key)


def _sammon_stress(d, delta, c):
    mask = ~np.eye(d.shape[0], dtype=bool)
    safe = np.where(mask, d, 1.0)
    num = ((d - delta) ** 2 / safe)[mask].sum() / 2.0
    return num / c


def _pairwise(y):
    g = y @ y.T
    sq = np.diag(g)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2 * g, 0.0)
    return np.sqrt(d2)


def sammon(d, dims: int, cfg: SammonConfig | None = None,
           items: list[str] | None = None,
           color_key: list[str] | None = None) -> Projection2D:
    """Sammon mapping by gradient descent with step halving, initialized
    from classical MDS. The recorded stress trace is non-increasing."""
    cfg = cfg or SammonConfig()
    arr = _check_distance_matrix(d)
    n = arr.shape[0]
    off = ~np.eye(n, dtype=bool)
    if n > 1 and arr[off].min() <= 0:
        raise ContractViolation(
            "zero off-diagonal distance: merge duplicate items before sammon")
    init = classical_mds(arr, dims, items=items)
    y = init.coords.copy()
    if np.allclose(y, 0):
        rng = np.random.default_rng(cfg.seed)
        y = 1e-3 * rng.standard_normal((n, dims))
    if n == 1:
        ids = items if items is not None else ["0"]
        return Projection2D(items=list(ids), coords=y, stress=0.0,
                            color_key=color_key, stress_trace=np.zeros(1))
    c = arr[off].sum() / 2.0
    delta = _pairwise(y)
    stress = _sammon_stress(arr, delta, c)
    trace = [stress]
    step = cfg.step
    for _ in range(cfg.max_iter):
        ok = off & (delta > 0)
        safe = np.where(ok, arr * delta, 1.0)
        coef = np.where(ok, (arr - delta) / safe, 0.0)
        rowsum = coef.sum(axis=1)
        grad = -2.0 / c * (rowsum[:, None] * y - coef @ y)
        improved = False
        s = step
        for _ in range(cfg.max_halves):
            cand = y - s * grad
            delta_c = _pairwise(cand)
            if np.any(delta_c[off] == 0):
                s /= 2.0
                continue
            st = _sammon_stress(arr, delta_c, c)
            if st < stress:
                y, delta, stress = cand, delta_c, st
                step = s
                improved = True
                break
            s /= 2.0
        trace.append(stress)
        if not improved or (len(trace) > 1 and trace[-2] - trace[-1] < cfg.tol):
            break
    ids = items if items is not None else [str(i) for i in range(n)]
    return Projection2D(items=list(ids), coords=y, stress=float(stress),
                        color_key=color_key, stress_trace=np.asarray(trace))


def profile_distances(ct: CrossTable, kind: str = "euclidean") -> np.ndarray:
    """Distances between row profiles of a cross table, after normalizing
    each row to proportions."""
    counts = np.asarray(ct.counts, dtype=float)
    totals = counts.sum(axis=1)
    if np.any(totals <= 0):
        bad = [ct.row_labels[i] for i in np.where(totals <= 0)[0]]
        raise ContractViolation(f"zero-total class row(s): {bad}")
    profiles = counts / totals[:, None]
    if kind == "euclidean":
        diff = profiles[:, None, :] - profiles[None, :, :]
        d = np.sqrt((diff ** 2).sum(axis=2))
    elif kind == "chisq":
        col_mass = profiles.mean(axis=0)
        col_mass = np.where(col_mass > 0, col_mass, 1.0)
        diff = profiles[:, None, :] - profiles[None, :, :]
        d = np.sqrt(((diff ** 2) / col_mass).sum(axis=2))
    else:
        raise ContractViolation(f"unknown profile distance kind {kind!r}")
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def _palette_for(keys) -> dict:
    uniq = sorted(set(keys))
    return {k: PALETTE[i % len(PALETTE)] for i, k in enumerate(uniq)}


def emit_scatter(p: Projection2D, path, width: int = 640, height: int = 480,
                 title: str = "") -> None:
    """Write a static SVG scatter of the first two coordinates, colored by
    the projection's color key."""
    if p.coords.size == 0 or len(p.items) == 0:
        raise ContractViolation("cannot plot an empty projection")
    xy = p.coords[:, :2] if p.coords.shape[1] >= 2 else np.hstack(
        [p.coords, np.zeros((p.coords.shape[0], 2 - p.coords.shape[1]))])
    keys = p.color_key if p.color_key is not None else ["all"] * len(p.items)
    colors = _palette_for(keys)
    margin = 50.0
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)

    def sx(v):
        return margin + (v - lo[0]) / span[0] * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - lo[1]) / span[1] * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="#333"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="#333"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2}" y="20" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for (x, y), key, item in zip(xy, keys, p.items):
        parts.append(
            f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
            f'fill="{colors[key]}"><title>{item}</title></circle>')
    for i, (key, color) in enumerate(sorted(colors.items())):
        ly = margin + 16 * i
        parts.append(f'<circle cx="{width - margin + 14}" cy="{ly}" r="4" fill="{color}"/>')
        parts.append(f'<text x="{width - margin + 24}" y="{ly + 4}" '
                     f'font-size="10">{key}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts))
    except OSError as exc:
        raise OSError(f"cannot write scatter to {path}: {exc}") from exc


def emit_csv(p: Projection2D, path) -> None:
    """Write id, coordinates and color key, 17 significant digits."""
    if p.coords.size == 0 or len(p.items) == 0:
        raise ContractViolation("cannot export an empty projection")
    keys = p.color_key if p.color_key is not None else [""] * len(p.items)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            dims = p.coords.shape[1]
            w.writerow(["id"] + [f"coord{i + 1}" for i in range(dims)] + ["key"])
            for item, row, key in zip(p.items, p.coords, keys):
                w.writerow([item] + [f"{v:.17g}" for v in row] + [key])
    except OSError as exc:
        raise OSError(f"cannot write projection to {path}: {exc}") from exc
