"""Scikit-learn style wrappers around the pipeline stages.

These keep the functional modules composable with sklearn tooling
(clone, get_params, pipelines). The incidence matrix is samples x genes;
note that the latent embedding lives on the genes (columns), so
``AsymmetricLSIEmbedding.fit_transform`` returns one row per gene.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ContractViolation
from .fusion import FusionConfig, asymmetry_sources, fuse, label_kernel
from .ingest import CV_SD_OVER_MEAN, ExpressionMatrix, IncidenceMatrix, binarize, cv_filter
from .latent import alsi_embed
from .mixture import GmmConfig, fit_gmm, responsibilities
from .similarity import asymmetric_similarity


class CVFilterBinarizer(BaseEstimator, TransformerMixin):
    """Keep high-CV columns of an expression matrix and binarize them
    against the maximum value seen in the discarded columns."""

    def __init__(self, threshold_cv=0.5, convention=CV_SD_OVER_MEAN,
                 threshold_override=None):
        self.threshold_cv = threshold_cv
        self.convention = convention
        self.threshold_override = threshold_override

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        em = _as_expression(X)
        report = cv_filter(em, self.threshold_cv, self.convention)
        inc = binarize(em, report, self.threshold_override)
        self.kept_ = report.kept
        self.cv_ = report.cv
        self.expression_threshold_ = inc.expression_threshold
        self.columns_ = np.array([int(g[1:]) for g in inc.genes])
        return self

    def transform(self, X):
        check_is_fitted(self, "expression_threshold_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.kept_.size:
            raise ContractViolation(
                f"expected {self.kept_.size} columns, got {X.shape[1]}")
        return (X[:, self.columns_] > self.expression_threshold_).astype(np.float64)


class AsymmetricLSIEmbedding(BaseEstimator, TransformerMixin):
    """Embed the columns (genes) of a binary incidence matrix.

    fit(X, y) takes the incidence matrix and optional per-sample class
    labels y used to build the label prior; fit_transform returns the
    gene coordinates (one row per column of X).
    """

    def __init__(self, tau=0.2, combiner="arithmetic", combiner_t=0.5,
                 ridge=None, energy=0.95, whitened=False):
        self.tau = tau
        self.combiner = combiner
        self.combiner_t = combiner_t
        self.ridge = ridge
        self.energy = energy
        self.whitened = whitened

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        inc = _as_incidence(X, y)
        sim = asymmetric_similarity(inc)
        k1, k2 = asymmetry_sources(sim)
        cfg = FusionConfig(tau=self.tau, combiner=self.combiner,
                           t=self.combiner_t, ridge=self.ridge)
        if y is not None:
            membership = {}
            labels = [str(v) for v in y]
            for j, g in enumerate(inc.genes):
                membership[g] = frozenset(
                    labels[i] for i in range(len(labels)) if inc.x[i, j] > 0)
            w = label_kernel(membership, inc.genes).w
        else:
            w = np.zeros_like(k1)
        self.similarity_ = sim.s
        self.kernel_ = fuse(k1, k2, w, cfg)
        emb = alsi_embed(self.kernel_, energy=self.energy,
                         whitened=self.whitened, items=inc.genes)
        self.embedding_ = emb.coords
        self.eigenvalues_ = emb.eigenvalues
        return self

    def transform(self, X=None):
        """Return the fitted gene coordinates; the embedding has no
        out-of-sample extension, so X is ignored."""
        check_is_fitted(self, "embedding_")
        return self.embedding_

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).embedding_


class LatentClassMixture(BaseEstimator):
    """Gaussian-mixture latent classes over embedded coordinates, with the
    argmax hard assignment and soft responsibilities."""

    def __init__(self, q=2, restarts=10, max_iter=500, rel_tol=1e-8,
                 ridge=1e-6, seed=0, covariance_type="diagonal"):
        self.q = q
        self.restarts = restarts
        self.max_iter = max_iter
        self.rel_tol = rel_tol
        self.ridge = ridge
        self.seed = seed
        self.covariance_type = covariance_type

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        cfg = GmmConfig(restarts=self.restarts, max_iter=self.max_iter,
                        rel_tol=self.rel_tol, ridge=self.ridge,
                        seed=self.seed, covariance_type=self.covariance_type)
        self.model_ = fit_gmm(X, self.q, cfg)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return responsibilities(self.model_, X).matrix

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return responsibilities(self.model_, X).hard

    def score(self, X, y=None):
        check_is_fitted(self, "model_")
        return self.model_.loglik


def _as_expression(X) -> ExpressionMatrix:
    n, p = X.shape
    return ExpressionMatrix(experiments=[f"e{i}" for i in range(n)],
                            genes=[f"g{j}" for j in range(p)], values=X)


def _as_incidence(X, y=None) -> IncidenceMatrix:
    n, p = X.shape
    labels = [str(v) for v in y] if y is not None else [f"e{i}" for i in range(n)]
    if len(labels) != n:
        raise ContractViolation(f"y has {len(labels)} labels for {n} samples")
    return IncidenceMatrix(experiments=labels, genes=[f"g{j}" for j in range(p)],
                           x=X, expression_threshold=float("nan"))
