"""Staged pipeline with resumable CSV/JSON artifacts and a run manifest.

Each stage reads the previous stage's files from the output directory and
appends its own products to the manifest, so any stage can be re-run in
isolation and two runs with the same config and seed produce identical
digests.
"""
from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import ContractViolation, DataError
from .fusion import (COMBINERS, FusionConfig, asymmetry_sources, fuse,
                     label_kernel, membership_from_incidence)
from .ingest import (CV_CONVENTIONS, CV_SD_OVER_MEAN, IncidenceMatrix, binarize,
                     cv_filter, load_expression, read_incidence_csv,
                     write_filter_report_csv, write_histogram_csv,
                     write_incidence_csv)
from .latent import LatentEmbedding, alsi_embed, induced_distance
from .linalg import read_matrix_csv, write_matrix_csv
from .mixture import (COV_DIAGONAL, GmmConfig, MixtureModel, Responsibilities,
                      cross_table, fit_gmm, responsibilities, top_members)
from .similarity import (AsymmetricSimilarity, asymmetric_similarity,
                         baseline_distances, norm_diagnostics)
from .viz import SammonConfig, classical_mds, emit_csv, emit_scatter, sammon


@dataclass
class RunConfig:
    input: str = ""
    outdir: str = "alsi-out"
    cv_threshold: float = 0.5
    cv_convention: str = CV_SD_OVER_MEAN
    binarize_override: float | None = None
    tau: float = 0.2
    combiner: str = "arithmetic"
    combiner_t: float = 0.5
    ridge: float | None = None
    energy: float = 0.95
    whitened: bool = False
    q: int | None = None            # None -> number of external classes
    restarts: int = 10
    max_iter: int = 500
    rel_tol: float = 1e-8
    gmm_ridge: float = 1e-6
    covariance: str = COV_DIAGONAL
    dims: int = 3
    top_k: int = 5
    seed: int = 0
    svg: bool = True

    def validate(self):
        if self.cv_convention not in CV_CONVENTIONS:
            raise ContractViolation(f"unknown cv convention {self.cv_convention!r}")
        if self.combiner not in COMBINERS:
            raise ContractViolation(f"unknown combiner {self.combiner!r}")
        return self


_BOOL_KEYS = {"whitened", "svg"}
_NONE_OK = {"binarize_override", "ridge", "q"}


def load_config(path) -> RunConfig:
    """Parse a flat 'key = value' config file."""
    cfg = RunConfig()
    valid = set(cfg.__dataclass_fields__)
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in valid:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            setattr(cfg, key, _parse_value(key, value))
    return cfg.validate()


def _parse_value(key: str, value: str):
    if key in _NONE_OK and value.lower() in ("", "none"):
        return None
    if key in _BOOL_KEYS:
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise DataError(f"config key {key}: expected a boolean, got {value!r}")
    if key in ("input", "outdir", "cv_convention", "combiner", "covariance"):
        return value
    if key in ("q", "restarts", "max_iter", "dims", "top_k", "seed"):
        return int(value)
    return float(value)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        for key, value in asdict(cfg).items():
            fh.write(f"{key} = {'' if value is None else value}\n")


class RunManifest:
    """Tracks emitted artifacts, warnings and stage timings for one run."""

    def __init__(self, outdir: Path, cfg: RunConfig):
        self.outdir = Path(outdir)
        self.path = self.outdir / "manifest.json"
        if self.path.exists():
            with open(self.path) as fh:
                self.data = json.load(fh)
            self.data["config"] = asdict(cfg)
        else:
            self.data = {"tool": "alsi", "version": __version__,
                         "config": asdict(cfg), "stages": {},
                         "warnings": [], "artifacts": {}}

    def record(self, relname: str) -> None:
        digest = hashlib.sha256((self.outdir / relname).read_bytes()).hexdigest()
        self.data["artifacts"][relname] = digest

    def record_stage(self, name: str, seconds: float, caught) -> None:
        self.data["stages"][name] = round(seconds, 6)
        for w in caught:
            self.data["warnings"].append(f"{name}: {w.message}")

    def set_params(self, **kv) -> None:
        self.data.setdefault("params", {}).update(kv)

    def save(self) -> None:
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")


class Pipeline:
    """Runs the staged algorithm over a single output directory."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg.validate()
        self.outdir = Path(cfg.outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(self.outdir, cfg)

    # ---- helpers -------------------------------------------------------

    def _stage(self, name):
        return _StageContext(self, name)

    def _need(self, relname: str, producer: str) -> Path:
        path = self.outdir / relname
        if not path.exists():
            raise DataError(
                f"missing artifact {relname}: run `alsi {producer}` first")
        return path

    def _read_incidence(self) -> IncidenceMatrix:
        return read_incidence_csv(self._need("incidence.csv", "filter"))

    # ---- stages --------------------------------------------------------

    def run_filter(self):
        if not self.cfg.input:
            raise DataError("no input expression file configured")
        with self._stage("filter"):
            y = load_expression(self.cfg.input)
            report = cv_filter(y, self.cfg.cv_threshold, self.cfg.cv_convention)
            inc = binarize(y, report, self.cfg.binarize_override)
            write_filter_report_csv(self.outdir / "filter_report.csv", report)
            write_histogram_csv(self.outdir / "cv_histogram.csv",
                                report.hist_edges, report.hist_counts)
            write_incidence_csv(self.outdir / "incidence.csv", inc)
            self.manifest.set_params(expression_threshold=inc.expression_threshold,
                                     genes_kept=len(inc.genes))
            for name in ("filter_report.csv", "cv_histogram.csv", "incidence.csv"):
                self.manifest.record(name)
        return inc

    def run_similarity(self):
        with self._stage("similarity"):
            inc = self._read_incidence()
            sim = asymmetric_similarity(inc)
            diag = norm_diagnostics(inc, sim)
            write_matrix_csv(self.outdir / "similarity.csv", sim.s, header=sim.genes)
            write_histogram_csv(self.outdir / "norm_histogram.csv",
                                diag.hist_edges, diag.hist_counts)
            self.manifest.set_params(skew_max=diag.skew_max, skew_mean=diag.skew_mean)
            self.manifest.record("similarity.csv")
            self.manifest.record("norm_histogram.csv")
        return sim

    def run_fuse(self):
        with self._stage("fuse"):
            inc = self._read_incidence()
            s, genes = self._read_square("similarity.csv", "similarity")
            k1, k2 = asymmetry_sources(s)
            membership = membership_from_incidence(inc)
            lk = label_kernel(membership, inc.genes)
            fcfg = FusionConfig(tau=self.cfg.tau, combiner=self.cfg.combiner,
                                t=self.cfg.combiner_t, ridge=self.cfg.ridge)
            k = fuse(k1, k2, lk.w, fcfg)
            write_matrix_csv(self.outdir / "label_w.csv", lk.w, header=inc.genes)
            write_matrix_csv(self.outdir / "fused_kernel.csv", k, header=inc.genes)
            self.manifest.set_params(tau=fcfg.tau, combiner=fcfg.combiner,
                                     combiner_t=fcfg.t, ridge=fcfg.ridge,
                                     gamma1=fcfg.gamma1, gamma2=fcfg.gamma2,
                                     classes=lk.classes)
            self.manifest.record("label_w.csv")
            self.manifest.record("fused_kernel.csv")
        return k

    def run_embed(self):
        with self._stage("embed"):
            k, genes = self._read_square("fused_kernel.csv", "fuse")
            emb = alsi_embed(k, energy=self.cfg.energy,
                             whitened=self.cfg.whitened, items=genes)
            self._write_embedding(emb)
            self.manifest.set_params(m=emb.coords.shape[1], energy=self.cfg.energy,
                                     whitened=self.cfg.whitened)
            self.manifest.record("embedding.csv")
        return emb

    def run_cluster(self):
        with self._stage("cluster"):
            emb = self._read_embedding()
            inc = self._read_incidence()
            membership = membership_from_incidence(inc)
            n_classes = len(set().union(*membership.values()))
            q = self.cfg.q if self.cfg.q is not None else n_classes
            gcfg = GmmConfig(restarts=self.cfg.restarts, max_iter=self.cfg.max_iter,
                             rel_tol=self.cfg.rel_tol, ridge=self.cfg.gmm_ridge,
                             seed=self.cfg.seed, covariance_type=self.cfg.covariance)
            model = fit_gmm(emb, q, gcfg)
            resp = responsibilities(model, emb)
            ct = cross_table(resp, membership)
            self._write_model(model)
            self._write_responsibilities(resp)
            self._write_cross_table(ct)
            self.manifest.set_params(q=q, loglik=model.loglik,
                                     em_iterations=model.iterations)
            for name in ("mixture_model.json", "responsibilities.csv",
                         "cross_table.csv"):
                self.manifest.record(name)
        return model, resp, ct

    def run_map(self):
        with self._stage("map"):
            k, genes = self._read_square("fused_kernel.csv", "fuse")
            resp = self._read_responsibilities()
            ct = self._read_cross_table()
            inc = self._read_incidence()
            membership = membership_from_incidence(inc)
            # genes colored by first listed class membership
            color = [sorted(membership[g])[0] if g in membership else "?"
                     for g in genes]
            d = induced_distance(k)
            proj = classical_mds(d, self.cfg.dims, items=genes, color_key=color)
            emit_csv(proj, self.outdir / "mds_genes.csv")
            self.manifest.record("mds_genes.csv")

            from .viz import profile_distances
            pd = profile_distances(ct)
            scfg = SammonConfig(seed=self.cfg.seed)
            sproj = sammon(pd, 2, scfg, items=ct.row_labels,
                           color_key=list(ct.row_labels))
            emit_csv(sproj, self.outdir / "sammon_classes.csv")
            self.manifest.record("sammon_classes.csv")
            if self.cfg.svg:
                emit_scatter(proj, self.outdir / "mds_genes.svg",
                             title="genes, fused-kernel MDS")
                emit_scatter(sproj, self.outdir / "sammon_classes.svg",
                             title="class profiles, Sammon map")
                self.manifest.record("mds_genes.svg")
                self.manifest.record("sammon_classes.svg")
            self.manifest.set_params(sammon_stress=sproj.stress)
        return proj, sproj

    def run_baselines(self):
        """Comparison panels: MDS of Euclidean and Pearson column distances."""
        with self._stage("baselines"):
            inc = self._read_incidence()
            for kind in ("euclidean", "pearson"):
                d = baseline_distances(inc.x, kind)
                proj = classical_mds(d, self.cfg.dims, items=inc.genes)
                name = f"mds_{kind}.csv"
                emit_csv(proj, self.outdir / name)
                self.manifest.record(name)

    def run_report(self):
        with self._stage("report"):
            resp = self._read_responsibilities()
            ct = self._read_cross_table()
            tops = top_members(resp, self.cfg.top_k)
            lines = ["alsi run report", "=" * 40, ""]
            lines.append(f"items: {len(resp.items)}  clusters: {resp.matrix.shape[1]}")
            lines.append("")
            lines.append(f"top {self.cfg.top_k} members per cluster:")
            for c in sorted(tops):
                lines.append(f"  cluster {c + 1}: " + ", ".join(tops[c]))
            lines.append("")
            lines.append("class-by-cluster cross table:")
            head = "  " + " ".join(f"{c:>6}" for c in [""] + ct.col_labels)
            lines.append(head)
            for label, row in zip(ct.row_labels, ct.counts):
                lines.append("  " + " ".join([f"{label:>6}"] +
                                             [f"{int(v):>6}" for v in row]))
            (self.outdir / "report.txt").write_text("\n".join(lines) + "\n")
            self.manifest.record("report.txt")

    def run_all(self):
        self.run_filter()
        self.run_similarity()
        self.run_fuse()
        self.run_embed()
        self.run_cluster()
        self.run_map()
        self.run_report()

    # ---- artifact codecs ----------------------------------------------

    def _read_square(self, relname: str, producer: str):
        path = self._need(relname, producer)
        m, header = read_matrix_csv(path, has_header=True)
        return m, header

    def _write_embedding(self, emb: LatentEmbedding) -> None:
        import csv as _csv
        with open(self.outdir / "embedding.csv", "w", newline="") as fh:
            w = _csv.writer(fh)
            dims = emb.coords.shape[1]
            w.writerow(["id"] + [f"dim{i + 1}" for i in range(dims)])
            w.writerow(["__eigenvalues__"] + [f"{v:.17g}" for v in emb.eigenvalues])
            for item, row in zip(emb.items, emb.coords):
                w.writerow([item] + [f"{v:.17g}" for v in row])

    def _read_embedding(self) -> LatentEmbedding:
        import csv as _csv
        path = self._need("embedding.csv", "embed")
        with open(path, newline="") as fh:
            rows = list(_csv.reader(fh))
        eig = np.array([float(v) for v in rows[1][1:]])
        items = [r[0] for r in rows[2:]]
        coords = np.array([[float(v) for v in r[1:]] for r in rows[2:]])
        return LatentEmbedding(items=items, coords=coords, eigenvalues=eig,
                               whitened=self.cfg.whitened)

    def _write_model(self, model: MixtureModel) -> None:
        payload = {
            "q": model.q,
            "weights": model.weights.tolist(),
            "means": model.means.tolist(),
            "covariances": model.covariances.tolist(),
            "covariance_type": model.covariance_type,
            "loglik": model.loglik,
            "loglik_trace": model.loglik_trace.tolist(),
            "seed": model.seed,
            "iterations": model.iterations,
        }
        with open(self.outdir / "mixture_model.json", "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    def _write_responsibilities(self, resp: Responsibilities) -> None:
        import csv as _csv
        with open(self.outdir / "responsibilities.csv", "w", newline="") as fh:
            w = _csv.writer(fh)
            q = resp.matrix.shape[1]
            w.writerow(["id"] + [f"C{k + 1}" for k in range(q)] + ["hard"])
            for item, row, h in zip(resp.items, resp.matrix, resp.hard):
                w.writerow([item] + [f"{v:.17g}" for v in row] + [int(h)])

    def _read_responsibilities(self) -> Responsibilities:
        import csv as _csv
        path = self._need("responsibilities.csv", "cluster")
        with open(path, newline="") as fh:
            rows = list(_csv.reader(fh))
        items = [r[0] for r in rows[1:]]
        matrix = np.array([[float(v) for v in r[1:-1]] for r in rows[1:]])
        hard = np.array([int(r[-1]) for r in rows[1:]])
        return Responsibilities(items=items, matrix=matrix, hard=hard)

    def _write_cross_table(self, ct) -> None:
        import csv as _csv
        with open(self.outdir / "cross_table.csv", "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["class"] + list(ct.col_labels))
            for label, row in zip(ct.row_labels, ct.counts):
                w.writerow([label] + [int(v) for v in row])

    def _read_cross_table(self):
        import csv as _csv
        from .mixture import CrossTable
        path = self._need("cross_table.csv", "cluster")
        with open(path, newline="") as fh:
            rows = list(_csv.reader(fh))
        cols = rows[0][1:]
        labels = [r[0] for r in rows[1:]]
        counts = np.array([[int(v) for v in r[1:]] for r in rows[1:]])
        return CrossTable(row_labels=labels, col_labels=cols, counts=counts)


class _StageContext:
    def __init__(self, pipe: Pipeline, name: str):
        self.pipe = pipe
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        self.catcher = warnings.catch_warnings(record=True)
        self.caught = self.catcher.__enter__()
        warnings.simplefilter("always")
        return self

    def __exit__(self, exc_type, exc, tb):
        self.catcher.__exit__(exc_type, exc, tb)
        if exc_type is None:
            self.pipe.manifest.record_stage(self.name,
                                            time.perf_counter() - self.t0,
                                            self.caught)
            self.pipe.manifest.save()
        return False
