import numpy as np
import pytest

from alsi import (ContractViolation, NumericsWarning, Projection2D,
                  SammonConfig, classical_mds, emit_csv, emit_scatter,
                  profile_distances, sammon)
from alsi.mixture import CrossTable


def pairwise(points):
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    return np.linalg.norm(p[:, None] - p[None, :], axis=2)


class TestClassicalMds:
    def test_collinear_points(self):
        d = pairwise([0.0, 1.0, 3.0])
        proj = classical_mds(d, 1)
        rec = pairwise(proj.coords[:, 0])
        assert np.max(np.abs(rec - d)) < 1e-10

    def test_planar_point_set(self, rng):
        pts = rng.standard_normal((10, 2))
        proj = classical_mds(pairwise(pts), 2)
        assert np.max(np.abs(pairwise(proj.coords) - pairwise(pts))) < 1e-8

    def test_all_zero_distances(self):
        proj = classical_mds(np.zeros((4, 4)), 2)
        assert np.array_equal(proj.coords, np.zeros((4, 2)))

    def test_dims_reduced_with_warning(self):
        d = pairwise([0.0, 1.0, 3.0])  # 1-D configuration
        with pytest.warns(NumericsWarning, match="reducing dims"):
            proj = classical_mds(d, 3)
        assert proj.coords.shape == (3, 3)
        assert np.allclose(proj.coords[:, 1:], 0.0)

    def test_non_euclidean_warns(self):
        # 4-point star metric violating euclideanity
        d = np.array([[0.0, 1, 1, 1], [1, 0, 2, 2], [1, 2, 0, 2], [1, 2, 2, 0]])
        with pytest.warns(NumericsWarning):
            classical_mds(d, 3)

    def test_deterministic(self, rng):
        pts = rng.standard_normal((8, 3))
        d = pairwise(pts)
        p1 = classical_mds(d, 2)
        p2 = classical_mds(d.copy(), 2)
        assert np.array_equal(p1.coords, p2.coords)


class TestSammon:
    def test_two_points_exact(self):
        d = np.array([[0.0, 2.5], [2.5, 0.0]])
        proj = sammon(d, 2)
        assert proj.stress < 1e-12
        assert pairwise(proj.coords)[0, 1] == pytest.approx(2.5, abs=1e-8)

    def test_equilateral_triangle(self):
        d = np.ones((3, 3)) - np.eye(3)
        proj = sammon(d, 2)
        assert proj.stress < 1e-10

    def test_square_vertices(self):
        pts = np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])
        proj = sammon(pairwise(pts), 2)
        assert proj.stress < 1e-8

    def test_stress_trace_non_increasing(self, rng):
        pts = rng.standard_normal((12, 5))
        proj = sammon(pairwise(pts), 2, SammonConfig(max_iter=100))
        assert np.all(np.diff(proj.stress_trace) <= 0)

    def test_zero_off_diagonal_rejected(self):
        d = np.zeros((3, 3))
        d[0, 1] = d[1, 0] = 1.0
        with pytest.raises(ContractViolation, match="duplicate"):
            sammon(d, 2)

    def test_deterministic(self, rng):
        pts = rng.standard_normal((7, 4))
        d = pairwise(pts)
        p1 = sammon(d, 2, SammonConfig(seed=3))
        p2 = sammon(d.copy(), 2, SammonConfig(seed=3))
        assert np.array_equal(p1.coords, p2.coords)


class TestProfileDistances:
    def make_ct(self, counts):
        counts = np.asarray(counts)
        return CrossTable(row_labels=[f"r{i}" for i in range(counts.shape[0])],
                          col_labels=[f"C{j}" for j in range(counts.shape[1])],
                          counts=counts)

    def test_identical_rows_zero(self):
        d = profile_distances(self.make_ct([[3, 1, 0], [3, 1, 0]]))
        assert d[0, 1] == 0.0

    def test_one_hot_rows(self):
        d = profile_distances(self.make_ct([[5, 0], [0, 7]]))
        assert d[0, 1] == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_scaled_row_zero_distance(self):
        d = profile_distances(self.make_ct([[2, 4, 6], [1, 2, 3]]))
        assert d[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_zero_row_rejected(self):
        with pytest.raises(ContractViolation, match="r1"):
            profile_distances(self.make_ct([[1, 0], [0, 0]]))

    def test_chisq_variant(self):
        d = profile_distances(self.make_ct([[5, 0], [0, 7]]), kind="chisq")
        assert d[0, 1] > 0


class TestEmitters:
    def proj(self):
        return Projection2D(items=["a", "b", "c"],
                            coords=np.array([[0.0, 0], [1, 0], [0, 1]]),
                            stress=0.0, color_key=["x", "y", "x"])

    def test_svg_contents(self, tmp_path):
        path = tmp_path / "p.svg"
        emit_scatter(self.proj(), path)
        svg = path.read_text()
        assert svg.count("<circle") == 3 + 2   # 3 points + 2 legend swatches
        assert svg.count("<text") >= 2         # legend entries
        assert "svg" in svg

    def test_empty_projection_rejected(self, tmp_path):
        empty = Projection2D(items=[], coords=np.zeros((0, 2)), stress=0.0)
        with pytest.raises(ContractViolation):
            emit_scatter(empty, tmp_path / "e.svg")
        with pytest.raises(ContractViolation):
            emit_csv(empty, tmp_path / "e.csv")

    def test_csv_roundtrip(self, tmp_path, rng):
        p = Projection2D(items=["a", "b"], coords=rng.standard_normal((2, 3)),
                         stress=0.0, color_key=["k1", "k2"])
        path = tmp_path / "p.csv"
        emit_csv(p, path)
        import csv
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["id", "coord1", "coord2", "coord3", "key"]
        back = np.array([[float(v) for v in r[1:-1]] for r in rows[1:]])
        assert np.array_equal(back, p.coords)
