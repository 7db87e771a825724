"""Principal component analysis on top of the Jacobi eigensolver.

Centre, take the 1/n covariance, diagonalise it, keep the top ``K``
eigenvectors where ``K`` is the smallest dimension whose cumulative
eigenvalue share exceeds ``tau``.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, FormatVersionError, ParseError
from .kernels import jacobi_eigh

FILE_TAG = "acceptrank-pca"
FILE_VERSION = 1


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # d x K, orthonormal columns
    eigenvalues: np.ndarray  # all d, non-increasing
    k: int
    tau: float
    sweeps: int = 0

    @property
    def dim(self):
        return self.mean.shape[0]


def covariance(X):
    Xc = X - X.mean(axis=0)
    return (Xc.T @ Xc) / X.shape[0]


def canonical_sign(vectors):
    """Flip columns so each one's largest-magnitude entry is non-negative."""
    v = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return v


def sorted_eigh(S, tol=1e-12, max_sweeps=100, backend=None):
    """Eigenpairs of symmetric ``S``; eigenvalues descending, vectors sign-fixed."""
    lam, vec, sweeps, converged = jacobi_eigh(S, tol=tol, max_sweeps=max_sweeps, backend=backend)
    if not converged:
        warnings.warn(f"Jacobi iteration did not converge in {max_sweeps} sweeps", RuntimeWarning, stacklevel=2)
    vec = canonical_sign(vec)
    order = sorted(range(lam.shape[0]), key=lambda i: (-lam[i], tuple(vec[:, i])))
    return lam[order], vec[:, order], sweeps


def choose_k(eigenvalues, tau):
    total = eigenvalues.sum()
    ratios = np.cumsum(eigenvalues) / total
    above = np.flatnonzero(ratios > tau)
    return int(above[0]) + 1 if above.size else eigenvalues.shape[0]


def fit_pca(X, tau=0.95, fixed_k: Optional[int] = None, *, tol=1e-12, max_sweeps=100, backend=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n, d = X.shape
    if n < 2 or d < 1:
        raise ValueError(f"need at least 2 rows and 1 column, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix contains non-finite values")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if fixed_k is not None and not 1 <= fixed_k <= d:
        raise ValueError(f"fixed_k={fixed_k} outside [1, {d}]")
    mean = X.mean(axis=0)
    S = covariance(X)
    if np.ptp(X, axis=0).max() == 0.0 or np.trace(S) <= 0.0:
        raise DegenerateInputError("input has zero total variance")
    lam, vec, sweeps = sorted_eigh(S, tol=tol, max_sweeps=max_sweeps, backend=backend)
    floor = -1e-10 * max(1.0, float(lam[0]))
    if lam[-1] < floor:
        warnings.warn(f"covariance eigenvalue {lam[-1]:.3g} is markedly negative", RuntimeWarning, stacklevel=2)
    lam = np.maximum(lam, 0.0)
    k = int(fixed_k) if fixed_k is not None else choose_k(lam, tau)
    return PcaModel(mean, vec[:, :k].copy(), lam, k, float(tau), sweeps)


def _check_dim(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.dim:
        raise ValueError(f"expected {model.dim} columns, got {X.shape[1]}")
    return X


def transform(model, X):
    X = _check_dim(model, X)
    return (X - model.mean) @ model.components


def inverse_transform(model, Y):
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.shape[1] != model.k:
        raise ValueError(f"expected {model.k} columns, got {Y.shape[1]}")
    return Y @ model.components.T + model.mean


def explained_variance_ratio(model):
    return float(model.eigenvalues[: model.k].sum() / model.eigenvalues.sum())


def _fmt(values):
    return "\t".join(f"{v:.12g}" for v in values)


def save_pca(model, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{FILE_TAG}\t{FILE_VERSION}\n")
        fh.write("mean\t" + _fmt(model.mean) + "\n")
        fh.write("eigenvalues\t" + _fmt(model.eigenvalues) + "\n")
        fh.write(f"k\t{model.k}\n")
        fh.write(f"tau\t{model.tau:.12g}\n")
        for row in model.components:
            fh.write("V\t" + _fmt(row) + "\n")


def load_pca(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").split("\t") for ln in fh if ln.strip()]
    if not lines or lines[0] != [FILE_TAG, str(FILE_VERSION)]:
        raise FormatVersionError(f"{path}: not a version-{FILE_VERSION} PCA file")
    try:
        fields = {}
        rows = []
        for parts in lines[1:]:
            if parts[0] == "V":
                rows.append([float(x) for x in parts[1:]])
            else:
                fields[parts[0]] = parts[1:]
        mean = np.array([float(x) for x in fields["mean"]])
        lam = np.array([float(x) for x in fields["eigenvalues"]])
        k = int(fields["k"][0])
        tau = float(fields["tau"][0])
        V = np.array(rows, dtype=np.float64).reshape(len(rows), k)
    except (KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed PCA file ({exc})", source=str(path)) from None
    if V.shape[0] != mean.shape[0]:
        raise ParseError("component rows do not match mean length", source=str(path))
    return PcaModel(mean, V, lam, k, tau)
