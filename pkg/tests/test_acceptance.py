"""Acceptance gate: one test per release criterion, each printing a
pass/fail line with its measured runtime.

Criterion 9 needs the 64x6830 human cancer expression file; point the
ALSI_HUMAN_CANCER_CSV environment variable at it to enable the check.
"""
import itertools
import json
import os
import time

import numpy as np
import pytest

from alsi import (GmmConfig, IncidenceMatrix, SammonConfig,
                  asymmetric_similarity, asymmetry_sources, binarize,
                  classical_mds, cv_filter, fit_gmm, fuse, FusionConfig,
                  generate_synthetic, alsi_embed, kernel_sum_feature_map,
                  load_expression, membership_from_incidence,
                  responsibilities, cross_table, sammon, skew_split)
from alsi.cli import main as cli_main
from alsi.ingest import CV_MEAN_OVER_SD, CV_SD_OVER_MEAN
from alsi.synth import write_expression_csv

from conftest import random_incidence, random_psd


def frob(a):
    return np.linalg.norm(a)


class _Timer:
    def __init__(self, name, limit):
        self.name = name
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{status}] {self.name} ({dt:.2f}s, limit {self.limit:g}s)")
        if exc_type is None:
            assert dt < self.limit, f"{self.name}: runtime {dt:.2f}s over limit"
        return False


def test_criterion_1_frobenius_invariance():
    rng = np.random.default_rng(1)
    with _Timer("criterion 1: Frobenius invariance of the two kernels", 5.0):
        for _ in range(100):
            s = rng.uniform(size=(20, 20))
            k1, k2 = asymmetry_sources(s)
            nf = frob(s)
            assert abs(frob(k1) - nf) <= 1e-10 * nf
            assert abs(frob(k2) - nf) <= 1e-10 * nf


def test_criterion_2_symmetric_degeneration():
    rng = np.random.default_rng(2)
    with _Timer("criterion 2: symmetric input gives equal kernels", 5.0):
        for _ in range(100):
            s = random_psd(rng, int(rng.integers(3, 15)))
            k1, k2 = asymmetry_sources(s)
            assert frob(k1 - k2) <= 1e-8 * frob(s)


def test_criterion_3_regularized_minimizer():
    rng = np.random.default_rng(3)

    def g_tau(k, f, w, tau):
        gamma = tau + 1.0
        return frob(k - gamma * f) ** 2 + tau * frob(k - gamma * w) ** 2

    with _Timer("criterion 3: closed-form fusion minimizer", 30.0):
        for _ in range(20):
            k1, k2, w = (rng.standard_normal((5, 5)) for _ in range(3))
            k1, k2, w = ((a + a.T) / 2 for a in (k1, k2, w))
            f = (k1 + k2) / 2
            for tau in (0.1, 0.2, 1.0, 5.0):
                k_star = f + tau * w
                base = g_tau(k_star, f, w, tau)
                perturbations = rng.standard_normal((1000, 5, 5))
                scales = rng.uniform(1e-6, 1.0, size=1000)
                for e, sc in zip(perturbations, scales):
                    e = (e + e.T) / 2
                    e *= sc / frob(e)
                    assert g_tau(k_star + e, f, w, tau) >= base
                # independent entrywise quadratic-minimizer oracle
                gamma = tau + 1.0
                oracle = (gamma * f + tau * gamma * w) / (1.0 + tau)
                assert np.max(np.abs(k_star - oracle)) < 1e-10
                residual = 2 * (k_star - gamma * f) + 2 * tau * (k_star - gamma * w)
                assert np.max(np.abs(residual)) < 1e-10


def test_criterion_4_feature_map_gram_identity():
    rng = np.random.default_rng(4)
    with _Timer("criterion 4: concatenated feature map Gram identity", 5.0):
        for _ in range(100):
            n, d1, d2 = rng.integers(2, 10, size=3)
            phi1 = rng.standard_normal((n, d1))
            phi2 = rng.standard_normal((n, d2))
            l1, l2 = rng.uniform(0, 2, size=2)
            phi = kernel_sum_feature_map(phi1, phi2, l1, l2)
            expected = l1 * phi1 @ phi1.T + l2 * phi2 @ phi2.T
            assert np.max(np.abs(phi @ phi.T - expected)) < 1e-12


def test_criterion_5_skew_norm_identity_and_containment():
    rng = np.random.default_rng(5)
    with _Timer("criterion 5: skew identity and containment equivalence", 10.0):
        for _ in range(100):
            inc = random_incidence(rng, int(rng.integers(3, 8)),
                                   int(rng.integers(2, 10)))
            sim = asymmetric_similarity(inc)
            _, skew = skew_split(sim)
            norms = inc.x.sum(axis=0)
            overlap = inc.x.T @ inc.x
            expected = overlap * (norms[None, :] - norms[:, None]) / (
                2.0 * norms[:, None] * norms[None, :])
            assert np.max(np.abs(skew - expected)) < 1e-12
        # exhaustive containment check over all non-zero 4-bit column pairs
        masks = [np.array(bits, dtype=float)
                 for bits in itertools.product((0, 1), repeat=4)
                 if any(bits)]
        for a in masks:
            for b in masks:
                inc = IncidenceMatrix(experiments=list("wxyz"),
                                      genes=["a", "b"],
                                      x=np.column_stack([a, b]),
                                      expression_threshold=0.0)
                s = asymmetric_similarity(inc).s
                contained = bool(np.all(a <= b))
                assert (s[0, 1] == 1.0) == contained


def test_criterion_6_embedding_distance_identity():
    rng = np.random.default_rng(6)
    with _Timer("criterion 6: embedding reproduces kernel distances", 10.0):
        for _ in range(100):
            p = int(rng.integers(2, 51))
            k = random_psd(rng, p)
            emb = alsi_embed(k, energy=1.0, whitened=False)
            d = np.linalg.norm(emb.coords[:, None] - emb.coords[None, :], axis=2)
            diag = np.diag(k)
            expected = np.sqrt(np.maximum(
                diag[:, None] + diag[None, :] - 2 * k, 0.0))
            assert np.max(np.abs(d - expected)) < 1e-8


def test_criterion_7_em_planted_recovery():
    rng = np.random.default_rng(7)
    with _Timer("criterion 7: EM recovers a planted partition", 10.0):
        a = rng.normal(0.0, 1.0, size=(100, 2))
        b = rng.normal(0.0, 1.0, size=(100, 2))
        b[:, 0] += 20.0
        x = np.vstack([a, b])
        truth = np.array([0] * 100 + [1] * 100)
        model = fit_gmm(x, 2, GmmConfig(restarts=5, seed=0))
        hard = responsibilities(model, x).hard
        agree = max(np.mean(hard == truth), np.mean(hard == 1 - truth))
        assert agree == 1.0
        assert np.all(np.diff(model.loglik_trace) >= -1e-9)
        for seed in range(3):
            m = fit_gmm(rng.standard_normal((60, 2)), 3,
                        GmmConfig(restarts=3, seed=seed))
            assert np.all(np.diff(m.loglik_trace) >= -1e-9)


def test_criterion_8_mds_and_sammon():
    rng = np.random.default_rng(8)
    with _Timer("criterion 8: MDS reconstruction and Sammon stress", 10.0):
        for _ in range(10):
            pts = rng.standard_normal((12, 2))
            d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
            proj = classical_mds(d, 2)
            rec = np.linalg.norm(proj.coords[:, None] - proj.coords[None, :],
                                 axis=2)
            assert np.max(np.abs(rec - d)) < 1e-8
        square = np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])
        dsq = np.linalg.norm(square[:, None] - square[None, :], axis=2)
        proj = sammon(dsq, 2, SammonConfig(seed=0))
        assert proj.stress < 1e-8
        assert np.all(np.diff(proj.stress_trace) <= 0)


@pytest.mark.skipif("ALSI_HUMAN_CANCER_CSV" not in os.environ,
                    reason="human cancer expression file not supplied")
def test_criterion_9_human_cancer_soft_checks():
    path = os.environ["ALSI_HUMAN_CANCER_CSV"]
    with _Timer("criterion 9: human cancer dataset soft checks", 300.0):
        y = load_expression(path)
        assert y.values.shape == (64, 6830)
        counts = {}
        for conv in (CV_SD_OVER_MEAN, CV_MEAN_OVER_SD):
            counts[conv] = int(cv_filter(y, 0.5, conv).kept.sum())
        assert 2093 in counts.values(), f"neither convention gives 2093: {counts}"
        conv = [c for c, n in counts.items() if n == 2093][0]
        rep = cv_filter(y, 0.5, conv)
        inc = binarize(y, rep)
        assert abs(inc.expression_threshold - 4.46) <= 0.05
        sim = asymmetric_similarity(inc)
        k1, k2 = asymmetry_sources(sim)
        membership = membership_from_incidence(inc)
        from alsi import label_kernel
        lk = label_kernel(membership, inc.genes)
        k = fuse(k1, k2, lk.w, FusionConfig(tau=0.2))
        emb = alsi_embed(k, energy=0.95, items=inc.genes)
        model = fit_gmm(emb, 14, GmmConfig(restarts=5, seed=0))
        resp = responsibilities(model, emb)
        ct = cross_table(resp, membership)
        rows = {label: row for label, row in zip(ct.row_labels, ct.counts)}
        for cls in ("RENAL", "COLON", "MELANOMA", "NSCLC", "BREAST"):
            row = rows[cls]
            assert row.max() > 0.5 * row.sum(), f"{cls} not concentrated"
        assert int(np.argmax(rows["K562A-repro"])) == int(np.argmax(rows["K562B-repro"]))


def test_criterion_10_pipeline_determinism(tmp_path):
    y, _ = generate_synthetic(8, 20, depth=3, seed=0)
    expr = tmp_path / "expr.csv"
    write_expression_csv(expr, y)
    with _Timer("criterion 10: run-all determinism", 60.0):
        digests = []
        for name in ("a", "b"):
            out = tmp_path / name
            code = cli_main(["run-all", "--input", str(expr),
                             "--outdir", str(out), "--seed", "0"])
            assert code == 0
            manifest = json.loads((out / "manifest.json").read_text())
            digests.append(manifest["artifacts"])
        assert digests[0] == digests[1]
