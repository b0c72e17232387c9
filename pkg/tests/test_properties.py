"""Property tests over random inputs for the core algebraic invariants."""
import warnings

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from alsi import (IncidenceMatrix, alsi_embed, asymmetric_similarity,
                  asymmetry_sources, induced_distance, psd_clip, skew_split)

square = st.integers(2, 8).flatmap(
    lambda n: arrays(np.float64, (n, n),
                     elements=st.floats(-5, 5, allow_nan=False)))

incidence_bits = st.tuples(st.integers(2, 6), st.integers(2, 8)).flatmap(
    lambda shape: arrays(np.int8, shape, elements=st.integers(0, 1)))


@settings(max_examples=50, deadline=None)
@given(square)
def test_polar_kernels_share_frobenius_norm(s):
    k1, k2 = asymmetry_sources(s)
    nf = np.linalg.norm(s)
    assert abs(np.linalg.norm(k1) - nf) <= 1e-8 * max(nf, 1.0)
    assert abs(np.linalg.norm(k2) - nf) <= 1e-8 * max(nf, 1.0)


@settings(max_examples=50, deadline=None)
@given(square)
def test_skew_split_reconstructs(s):
    sym, skew = skew_split(s)
    assert np.max(np.abs(sym + skew - s)) < 1e-12
    assert np.max(np.abs(sym - sym.T)) < 1e-12
    assert np.max(np.abs(skew + skew.T)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(square)
def test_psd_clip_output_is_psd(s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # clipping is the point here
        k = psd_clip((s + s.T) / 2.0)
    vals = np.linalg.eigvalsh(k)
    assert vals.min() >= -1e-8 * max(abs(vals).max(), 1.0)


@settings(max_examples=50, deadline=None)
@given(incidence_bits)
def test_similarity_range_and_diagonal(bits):
    x = bits.astype(np.float64)
    keep = x.sum(axis=0) > 0
    if keep.sum() < 2:
        return
    x = x[:, keep]
    inc = IncidenceMatrix(experiments=[f"e{i}" for i in range(x.shape[0])],
                          genes=[f"g{j}" for j in range(x.shape[1])],
                          x=x, expression_threshold=0.0)
    s = asymmetric_similarity(inc).s
    assert np.all(s >= 0) and np.all(s <= 1)
    assert np.allclose(np.diag(s), 1.0)


@settings(max_examples=30, deadline=None)
@given(square)
def test_embedding_distances_match_kernel(s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # arbitrary input, clipping expected
        k = psd_clip((s + s.T) / 2.0)
    if np.linalg.eigvalsh(k).max() <= 1e-12:
        return
    emb = alsi_embed(k, energy=1.0, whitened=False)
    d = np.linalg.norm(emb.coords[:, None] - emb.coords[None, :], axis=2)
    assert np.max(np.abs(d - induced_distance(k))) < 1e-7
