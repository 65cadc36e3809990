"""Eigensolvers, canonicalization, and band assembly.

MPMATH_ORACLE_C1 holds the nine eigenvalues of the cutoff-1 zero-momentum
sector, scaled, frozen from a 40-digit mpmath.eigsy run on an independently
assembled matrix (analytic Fourier elements, no shared code).
"""

import numpy as np
import pytest

import triscar as ts
from triscar.eigensolve import DENSE_THRESHOLD, residual_norms

MPMATH_ORACLE_C1 = np.array([
    -5.151546329577804,
    -3.437123075591609,
    -1.9931771750905496,
    6.716798827764743,
    7.1599773397555175,
    9.577409730534944,
    10.72682547862644,
    42.00052897188961,
    42.00189216486563,
])


@pytest.fixture(scope="module")
def c1_operator():
    p = ts.ModelParams(heavy_cutoff=1)
    sec = ts.enumerate_basis_1d(p, 0)
    return ts.HamiltonianOperator1D(sec, ts.MatrixElementRule1D(p))


def test_dense_matches_mpmath_oracle(c1_operator):
    sp = ts.solve_dense(c1_operator)
    np.testing.assert_allclose(sp.eigenvalues, MPMATH_ORACLE_C1,
                               rtol=0.0, atol=1e-12)


def test_dense_residual_invariant(spectrum729):
    assert spectrum729.max_residual_ratio() < 1e-8


def test_dense_metadata(spectrum729):
    assert spectrum729.method == "dense"
    assert spectrum729.sector_key == "P=0"
    assert spectrum729.k == 729
    assert spectrum729.meta["hermiticity_defect"] == 0.0


def test_dense_threshold_guard(operator729):
    with pytest.raises(ts.DenseSizeError):
        ts.solve_dense(operator729, dense_threshold=100)
    assert DENSE_THRESHOLD == 4096


def test_eigenvector_orthonormality(spectrum729, rng):
    cols = rng.choice(729, size=40, replace=False)
    v = spectrum729.eigenvectors[:, cols]
    np.testing.assert_allclose(v.T @ v, np.eye(40), atol=1e-12)


def test_residual_norms_definition(c1_operator):
    # recomputation goes through matvec instead of the dense product, so the
    # two paths agree only to accumulation noise
    sp = ts.solve_dense(c1_operator)
    again = residual_norms(c1_operator, sp.eigenvalues, sp.eigenvectors)
    np.testing.assert_allclose(again, sp.residuals, atol=1e-13)


# ---------------------------------------------------------------------------
# canonicalization


def test_sign_convention(spectrum729):
    v = spectrum729.eigenvectors
    lead = v[np.abs(v).argmax(axis=0), np.arange(v.shape[1])]
    assert np.all(lead > 0)


def test_canonicalize_deterministic(c1_operator, rng):
    h = c1_operator.dense()
    vals, vecs = np.linalg.eigh(h)
    # scramble signs and re-canonicalize
    flips = np.where(rng.random(len(vals)) < 0.5, -1.0, 1.0)
    v1, w1 = ts.canonicalize(vals.copy(), vecs * flips)
    v2, w2 = ts.canonicalize(vals.copy(), vecs.copy())
    np.testing.assert_allclose(w1, w2, atol=1e-14)
    np.testing.assert_allclose(v1, v2, atol=0.0)


def test_canonicalize_degenerate_cluster():
    """A 2-fold degenerate block must come out basis-independent."""
    vals = np.array([1.0, 2.0, 2.0, 5.0])
    base = np.eye(4)
    theta = 0.73
    rot = np.eye(4)
    rot[1, 1] = rot[2, 2] = np.cos(theta)
    rot[1, 2] = -np.sin(theta)
    rot[2, 1] = np.sin(theta)
    _, w1 = ts.canonicalize(vals, base.copy())
    _, w2 = ts.canonicalize(vals, base @ rot)
    np.testing.assert_allclose(np.abs(w1), np.abs(w2), atol=1e-12)


def test_canonicalize_keeps_near_degenerate_pairs_apart():
    """Gaps far above the relative tolerance must not be mixed."""
    vals = np.array([1.0, 1.0 + 1e-6])
    vecs = np.eye(2)
    _, w = ts.canonicalize(vals, vecs.copy())
    np.testing.assert_allclose(w, np.eye(2), atol=0.0)


def test_exact_degeneracies_in_paper_spectrum(spectrum729):
    gaps = np.diff(spectrum729.eigenvalues)
    assert np.any(gaps == 0.0)
    assert np.all(gaps >= 0.0)


# ---------------------------------------------------------------------------
# iterative solver


def test_iterative_matches_dense(spectrum729, operator729):
    sp = ts.solve_iterative(operator729, k=6, tol=1e-10, seed=0)
    np.testing.assert_allclose(sp.eigenvalues, spectrum729.eigenvalues[:6],
                               atol=1e-8)
    assert sp.method == "lanczos"
    assert np.all(sp.residuals <= 1e-10 * np.maximum(
        1.0, np.abs(sp.eigenvalues)))


def test_iterative_matches_oracle(c1_operator):
    sp = ts.solve_iterative(c1_operator, k=3, tol=1e-12, seed=2)
    np.testing.assert_allclose(sp.eigenvalues, MPMATH_ORACLE_C1[:3],
                               atol=1e-10)


def test_iterative_seed_reproducible(operator729):
    a = ts.solve_iterative(operator729, k=4, seed=7)
    b = ts.solve_iterative(operator729, k=4, seed=7)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=0.0)
    np.testing.assert_allclose(a.eigenvectors, b.eigenvectors, atol=0.0)


def test_iterative_window():
    p = ts.ModelParams(heavy_cutoff=3)
    sec = ts.enumerate_basis_1d(p, 0)
    op = ts.HamiltonianOperator1D(sec, ts.MatrixElementRule1D(p))
    dense = ts.solve_dense(op)
    lo, hi = -3.0, 10.0
    inside = dense.eigenvalues[
        (dense.eigenvalues >= lo) & (dense.eigenvalues <= hi)]
    assert len(inside) > 2
    sp = ts.solve_iterative(op, k=len(inside), window=(lo, hi),
                            tol=1e-9, seed=3, max_subspace=sec.dim)
    np.testing.assert_allclose(np.sort(sp.eigenvalues), np.sort(inside),
                               atol=1e-7)
    assert sp.method == "lanczos-window"


def test_iterative_empty_window():
    p = ts.ModelParams(heavy_cutoff=3)
    sec = ts.enumerate_basis_1d(p, 0)
    op = ts.HamiltonianOperator1D(sec, ts.MatrixElementRule1D(p))
    sp = ts.solve_iterative(op, k=4, window=(-100.0, -50.0), seed=1,
                            max_subspace=sec.dim)
    assert sp.k == 0
    assert sp.meta["note"] == "window empty"


def test_iterative_failure_carries_partial_results(operator729):
    with pytest.raises(ts.IterationError) as exc:
        ts.solve_iterative(operator729, k=6, tol=1e-14, max_restarts=1,
                           max_subspace=13, seed=0)
    err = exc.value
    assert err.eigenvalues is not None
    assert len(err.eigenvalues) == 6
    assert err.residuals is not None


def test_iterative_matvec_count(operator729):
    sp = ts.solve_iterative(operator729, k=6, tol=1e-10, seed=0)
    assert sp.meta["matvecs"] < 3000


# ---------------------------------------------------------------------------
# bands


def test_band_assembly(bands729, spectrum729):
    assert bands729[0].band_id == 1
    sizes = [b.size for b in bands729[:4]]
    assert sizes == [27, 52, 50, 48]
    assert bands729[0].head == spectrum729.eigenvalues[0]
    assert bands729[0].top == pytest.approx(-0.905343432679072, abs=1e-9)
    # contiguous, exhaustive cover; stop is inclusive
    assert bands729[0].start == 0
    for prev, cur in zip(bands729, bands729[1:]):
        assert cur.start == prev.stop + 1
    assert bands729[-1].stop == 728


def test_band_gap_definition(bands729, spectrum729):
    vals = spectrum729.eigenvalues
    for prev, cur in zip(bands729, bands729[1:]):
        assert vals[cur.start] - vals[cur.start - 1] > 2.0


def test_band_single_state():
    bands = ts.assemble_bands(np.array([1.0]), 2.0)
    assert len(bands) == 1
    assert bands[0].size == 1
    assert bands[0].head == bands[0].top == 1.0


def test_band_rejects_unsorted():
    with pytest.raises(ValueError):
        ts.assemble_bands(np.array([1.0, 0.5]), 2.0)


def test_band_id_per_state(bands729):
    ids = ts.band_id_per_state(729, bands729)
    assert len(ids) == 729
    assert ids[0] == 1
    assert ids[26] == 1
    assert ids[27] == 2
