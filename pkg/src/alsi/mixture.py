"""Gaussian mixture fitting in the latent space.

EM with k-means++ initialization and multiple restarts produces soft
memberships p(class | item); hard classes come from the argmax rule, and
a class-by-cluster cross table summarizes how external labels spread over
the fitted clusters.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractViolation, NumericsWarning
from .latent import LatentEmbedding

COV_DIAGONAL = "diagonal"
COV_FULL = "full"

_LOG2PI = float(np.log(2.0 * np.pi))


@dataclass
class GmmConfig:
    restarts: int = 10
    max_iter: int = 500
    rel_tol: float = 1e-8
    ridge: float = 1e-6         # covariance floor, relative to data variance
    seed: int = 0
    covariance_type: str = COV_DIAGONAL

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ContractViolation("restarts and max_iter must be >= 1")
        if self.covariance_type not in (COV_DIAGONAL, COV_FULL):
            raise ContractViolation(f"unknown covariance type {self.covariance_type!r}")


@dataclass
class MixtureModel:
    q: int
    weights: np.ndarray             # simplex
    means: np.ndarray               # q x d
    covariances: np.ndarray         # q x d (diagonal) or q x d x d (full)
    covariance_type: str
    loglik: float
    loglik_trace: np.ndarray
    seed: int
    iterations: int


@dataclass
class Responsibilities:
    items: list[str]
    matrix: np.ndarray              # items x components, rows sum to 1
    hard: np.ndarray                # argmax component, lowest index on ties


@dataclass
class CrossTable:
    row_labels: list[str]           # external classes
    col_labels: list[str]           # clusters
    counts: np.ndarray = field(default=None)


def _logsumexp(a, axis=1):
    amax = np.max(a, axis=axis, keepdims=True)
    return amax + np.log(np.sum(np.exp(a - amax), axis=axis, keepdims=True))


def _log_density(x, weights, means, covs, cov_type):
    """Per-point, per-component log(alpha_k N_k(x))."""
    n, d = x.shape
    q = means.shape[0]
    out = np.empty((n, q))
    if cov_type == COV_DIAGONAL:
        for k in range(q):
            diff = x - means[k]
            maha = np.sum(diff * diff / covs[k], axis=1)
            out[:, k] = -0.5 * (d * _LOG2PI + np.sum(np.log(covs[k])) + maha)
    else:
        for k in range(q):
            chol = np.linalg.cholesky(covs[k])
            sol = np.linalg.solve(chol, (x - means[k]).T)
            maha = np.sum(sol * sol, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            out[:, k] = -0.5 * (d * _LOG2PI + logdet + maha)
    return out + np.log(weights)[None, :]


def _kmeanspp_centers(x, q, rng):
    n = x.shape[0]
    centers = np.empty((q, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for k in range(1, q):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[k] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[k]) ** 2, axis=1))
    return centers


def _coords(data) -> np.ndarray:
    arr = data.coords if isinstance(data, LatentEmbedding) else np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise ContractViolation("coordinates must be 2-D")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("coordinates contain non-finite values")
    return arr


def _em_once(x, q, cfg: GmmConfig, rng):
    n, d = x.shape
    var_floor = np.maximum(cfg.ridge * x.var(axis=0), 1e-12)
    means = _kmeanspp_centers(x, q, rng)
    weights = np.full(q, 1.0 / q)
    base_var = np.maximum(x.var(axis=0), var_floor)
    if cfg.covariance_type == COV_DIAGONAL:
        covs = np.tile(base_var, (q, 1))
    else:
        covs = np.tile(np.diag(base_var), (q, 1, 1))
    trace = []
    ll_prev = None
    it = 0
    for it in range(1, cfg.max_iter + 1):
        logp = _log_density(x, weights, means, covs, cfg.covariance_type)
        lse = _logsumexp(logp)
        ll = float(lse.sum())
        trace.append(ll)
        resp = np.exp(logp - lse)
        mass = resp.sum(axis=0)
        empty = np.where(mass < 1e-10)[0]
        if empty.size:
            warnings.warn(
                f"re-seeding {empty.size} empty mixture component(s)",
                NumericsWarning, stacklevel=3)
            density = lse[:, 0]
            for k in empty:
                worst = int(np.argmin(density))
                means[k] = x[worst]
                if cfg.covariance_type == COV_DIAGONAL:
                    covs[k] = base_var
                else:
                    covs[k] = np.diag(base_var)
                resp[:, k] = 0.0
                resp[worst, :] = 0.0
                resp[worst, k] = 1.0
            resp /= resp.sum(axis=1, keepdims=True)
            mass = resp.sum(axis=0)
        weights = mass / n
        means = (resp.T @ x) / mass[:, None]
        if cfg.covariance_type == COV_DIAGONAL:
            for k in range(q):
                diff = x - means[k]
                covs[k] = np.maximum((resp[:, k, None] * diff * diff).sum(axis=0) / mass[k],
                                     var_floor)
        else:
            for k in range(q):
                diff = x - means[k]
                cov = (resp[:, k, None] * diff).T @ diff / mass[k]
                covs[k] = cov + np.diag(var_floor)
        if ll_prev is not None and abs(ll - ll_prev) < cfg.rel_tol * max(abs(ll_prev), 1.0):
            break
        ll_prev = ll
    return weights, means, covs, trace, it


def fit_gmm(data, q: int, cfg: GmmConfig | None = None) -> MixtureModel:
    """Fit a q-component Gaussian mixture by restarted EM.

    The best restart by final log-likelihood wins; ties go to the lowest
    restart index, so a fixed seed reproduces the model exactly.
    """
    cfg = cfg or GmmConfig()
    x = _coords(data)
    n = x.shape[0]
    if not 1 <= q <= n:
        raise ContractViolation(f"q must be in [1, {n}], got {q}")
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        weights, means, covs, trace, its = _em_once(x, q, cfg, rng)
        ll = trace[-1]
        if best is None or ll > best[0]:
            best = (ll, weights, means, covs, trace, its)
    ll, weights, means, covs, trace, its = best
    return MixtureModel(q=q, weights=weights, means=means, covariances=covs,
                        covariance_type=cfg.covariance_type, loglik=ll,
                        loglik_trace=np.asarray(trace), seed=cfg.seed,
                        iterations=its)


def responsibilities(model: MixtureModel, data) -> Responsibilities:
    """Bayes responsibilities p(component | item), log-sum-exp stabilized."""
    x = _coords(data)
    if x.shape[1] != model.means.shape[1]:
        raise ContractViolation(
            f"dimension mismatch: data has {x.shape[1]}, model expects {model.means.shape[1]}")
    logp = _log_density(x, model.weights, model.means, model.covariances,
                        model.covariance_type)
    resp = np.exp(logp - _logsumexp(logp))
    resp /= resp.sum(axis=1, keepdims=True)
    hard = np.argmax(resp, axis=1)  # argmax takes the lowest index on ties
    items = data.items if isinstance(data, LatentEmbedding) else [str(i) for i in range(x.shape[0])]
    return Responsibilities(items=list(items), matrix=resp, hard=hard)


def cross_table(resp: Responsibilities, membership: dict) -> CrossTable:
    """Count items per (external class, hard cluster) cell; items with
    several classes increment several rows."""
    for item in resp.items:
        if item not in membership or not membership[item]:
            raise ContractViolation(f"item {item!r} has no external class")
    classes = sorted(set().union(*(set(membership[i]) for i in resp.items)))
    row_idx = {c: r for r, c in enumerate(classes)}
    q = resp.matrix.shape[1]
    counts = np.zeros((len(classes), q), dtype=int)
    for item, cluster in zip(resp.items, resp.hard):
        for c in membership[item]:
            counts[row_idx[c], cluster] += 1
    return CrossTable(row_labels=classes,
                      col_labels=[f"C{k + 1}" for k in range(q)],
                      counts=counts)


def top_members(resp: Responsibilities, k: int) -> dict:
    """Per cluster, the k items with highest responsibility (descending,
    ties broken toward the earlier item)."""
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    out = {}
    for c in range(resp.matrix.shape[1]):
        order = np.argsort(-resp.matrix[:, c], kind="stable")
        out[c] = [resp.items[i] for i in order[:k]]
    return out
