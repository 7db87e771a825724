import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from acceptrank.errors import DegenerateInputError, FormatVersionError
from acceptrank.pca import (
    canonical_sign,
    covariance,
    explained_variance_ratio,
    fit_pca,
    inverse_transform,
    load_pca,
    save_pca,
    sorted_eigh,
    transform,
)


def charpoly(a):
    """Characteristic polynomial coefficients by Faddeev-LeVerrier, highest power first."""
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def rank3_plus_noise(seed=0, n=400, d=10):
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(d, 3)))
    signal = rng.normal(size=(n, 3)) * np.array([3.0, 2.0, 1.5])
    clean = signal @ basis.T
    noise_sd = np.sqrt(0.01 * clean.var(axis=0).sum() / d)
    return clean + rng.normal(scale=noise_sd, size=(n, d))


def test_line_y_equals_x():
    X = np.array([[t, t] for t in (-2.0, -1.0, 0.0, 1.0, 2.0)])
    for tau in (0.5, 0.9, 0.999):
        model = fit_pca(X, tau)
        assert model.k == 1
    np.testing.assert_allclose(model.components[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-12)
    assert explained_variance_ratio(model) == pytest.approx(1.0)
    assert transform(model, [2.0, 2.0])[0, 0] == pytest.approx(2 * np.sqrt(2))


def test_identical_rows_degenerate():
    with pytest.raises(DegenerateInputError):
        fit_pca(np.ones((5, 3)))


@pytest.mark.parametrize("bad", [dict(tau=0.0), dict(tau=1.0), dict(fixed_k=4), dict(fixed_k=0)])
def test_argument_errors(bad):
    X = np.random.default_rng(0).normal(size=(6, 3))
    with pytest.raises(ValueError):
        fit_pca(X, **{"tau": 0.95, **bad})


def test_too_few_rows_and_dim_mismatch():
    with pytest.raises(ValueError):
        fit_pca(np.ones((1, 3)))
    model = fit_pca(np.random.default_rng(0).normal(size=(6, 3)))
    with pytest.raises(ValueError):
        transform(model, np.zeros((2, 4)))


@pytest.mark.parametrize("seed", range(3))
def test_rank3_with_noise(seed):
    X = rank3_plus_noise(seed)
    model = fit_pca(X, 0.95)
    assert model.k == 3
    assert 0.95 < explained_variance_ratio(model) < 1.0
    oracle = np.linalg.eigvalsh(np.cov(X, rowvar=False, bias=True))[::-1]
    np.testing.assert_allclose(model.eigenvalues, np.maximum(oracle, 0), rtol=1e-9, atol=1e-10)


def test_eigenvalues_are_roots_of_characteristic_polynomial():
    rng = np.random.default_rng(3)
    b = rng.normal(size=(5, 5))
    a = b @ b.T
    lam, _, _ = sorted_eigh(a)
    p = charpoly(a)
    scale = np.abs(p).max()
    for value in lam:
        assert abs(np.polyval(p, value)) / scale < 1e-8
    # and they are the full multiset: elementary symmetric sums match the coefficients
    np.testing.assert_allclose(np.poly(lam), p, rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(1, 6)),
              elements=st.floats(-100, 100, allow_nan=False, width=32)))
def test_structural_invariants(X):
    if np.ptp(X, axis=0).max() < 1e-3:
        return
    d = X.shape[1]
    full = fit_pca(X, fixed_k=d)
    V = full.components
    assert np.abs(V.T @ V - np.eye(d)).max() < 1e-8
    assert (np.diff(full.eigenvalues) <= 1e-10 * max(1, full.eigenvalues[0])).all()
    assert (full.eigenvalues >= 0).all()
    S = covariance(X)
    recon = V @ np.diag(full.eigenvalues) @ V.T
    assert np.abs(recon - S).max() < 1e-8 * max(1.0, np.abs(S).max())
    for j in range(d):
        i = np.argmax(np.abs(V[:, j]))
        assert V[i, j] >= 0
    Y = transform(full, X)
    scale = max(1.0, np.abs(X).max())
    np.testing.assert_allclose(transform(full, inverse_transform(full, Y)), Y, atol=1e-8 * scale)
    dist = lambda M: np.linalg.norm(M[:, None] - M[None], axis=-1)
    np.testing.assert_allclose(dist(Y), dist(X), atol=1e-8 * scale)
    np.testing.assert_allclose(transform(full, full.mean), 0, atol=1e-9 * scale)

    model = fit_pca(X, 0.9)
    ratios = np.cumsum(full.eigenvalues) / full.eigenvalues.sum()
    assert ratios[model.k - 1] > 0.9
    if model.k > 1:
        assert ratios[model.k - 2] <= 0.9


def test_canonical_sign_flips():
    v = canonical_sign(np.array([[0.1, 0.3], [-0.9, 0.2]]))
    assert v.tolist() == [[-0.1, 0.3], [0.9, 0.2]]


def test_fit_is_deterministic_across_row_order():
    X = rank3_plus_noise(5, n=60, d=6)
    a = fit_pca(X, 0.95)
    b = fit_pca(X[::-1], 0.95)
    np.testing.assert_allclose(a.components, b.components, atol=1e-9)


def test_save_load_round_trip(tmp_path):
    model = fit_pca(rank3_plus_noise(1, n=50, d=8), 0.95)
    path = tmp_path / "pca.tsv"
    save_pca(model, path)
    back = load_pca(path)
    assert back.k == model.k and back.tau == model.tau
    np.testing.assert_allclose(back.components, model.components, rtol=1e-11)
    np.testing.assert_allclose(back.mean, model.mean, rtol=1e-11)
    save_pca(back, tmp_path / "again.tsv")
    assert (tmp_path / "again.tsv").read_bytes() == path.read_bytes()
    path.write_text("acceptrank-pca\t7\n")
    with pytest.raises(FormatVersionError):
        load_pca(path)
