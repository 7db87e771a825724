"""Hot numeric loops, in two interchangeable flavours.

Every kernel exists as ``<name>_numba`` (explicit loops compiled with
``@njit``) and ``<name>_numpy`` (vectorised where the algorithm allows).
The public name is bound to one of the two at import time, see
:mod:`acceptrank._accel`. Both flavours perform the same arithmetic in the
same order up to BLAS reduction order, so results agree to rounding.

SGD kernels run a single epoch in place. The caller owns the shuffling
(``order``) and the step size, which keeps the seeded RNG out of compiled code.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "jacobi_eigh",
    "linreg_epoch",
    "svr_epoch",
    "ranksvm_epoch",
    "BACKEND",
]


def _rotation(app, aqq, apq):
    theta = (aqq - app) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    return t, c, t * c


_rotation_nb = njit(_rotation)


def _max_offdiag(a):
    d = a.shape[0]
    off = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            v = abs(a[i, j])
            if v > off:
                off = v
    return off


_max_offdiag_nb = njit(_max_offdiag)


@njit
def _jacobi_numba(a, tol, max_sweeps):
    d = a.shape[0]
    v = np.eye(d)
    sweeps = 0
    converged = False
    for _ in range(max_sweeps + 1):
        if _max_offdiag_nb(a) < tol:
            converged = True
            break
        if sweeps == max_sweeps:
            break
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                t, c, s = _rotation_nb(app, aqq, apq)
                for k in range(d):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[p, k] = a[k, p]
                        a[k, q] = s * akp + c * akq
                        a[q, k] = a[k, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(d):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(d)
    for i in range(d):
        w[i] = a[i, i]
    return w, v, sweeps, converged


def _jacobi_numpy(a, tol, max_sweeps):
    d = a.shape[0]
    v = np.eye(d)
    iu = np.triu_indices(d, 1)
    sweeps = 0
    converged = False
    for _ in range(max_sweeps + 1):
        if d < 2 or np.max(np.abs(a[iu])) < tol:
            converged = True
            break
        if sweeps == max_sweeps:
            break
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                t, c, s = _rotation(app, aqq, apq)
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps, converged


@njit
def _linreg_epoch_numba(X, y, w, b, order, lr):
    k = X.shape[1]
    for idx in range(order.shape[0]):
        i = order[idx]
        pred = b[0]
        for j in range(k):
            pred += w[j] * X[i, j]
        r = y[i] - pred
        for j in range(k):
            w[j] += lr * r * X[i, j]
        b[0] += lr * r


def _linreg_epoch_numpy(X, y, w, b, order, lr):
    for i in order:
        xi = X[i]
        r = y[i] - (b[0] + xi @ w)
        w += (lr * r) * xi
        b[0] += lr * r


@njit
def _svr_epoch_numba(X, y, w, b, order, lr, epsilon, c):
    n = order.shape[0]
    k = X.shape[1]
    shrink = 1.0 - lr / n
    for idx in range(n):
        i = order[idx]
        pred = b[0]
        for j in range(k):
            pred += w[j] * X[i, j]
        r = y[i] - pred
        if r > epsilon:
            g = -c
        elif r < -epsilon:
            g = c
        else:
            g = 0.0
        for j in range(k):
            w[j] = shrink * w[j] - lr * g * X[i, j]
        b[0] -= lr * g


def _svr_epoch_numpy(X, y, w, b, order, lr, epsilon, c):
    n = order.shape[0]
    shrink = 1.0 - lr / n
    for i in order:
        xi = X[i]
        r = y[i] - (b[0] + xi @ w)
        if r > epsilon:
            g = -c
        elif r < -epsilon:
            g = c
        else:
            g = 0.0
        w *= shrink
        w -= (lr * g) * xi
        b[0] -= lr * g


@njit
def _ranksvm_epoch_numba(D, y, w, order, lr, lam):
    m = order.shape[0]
    k = D.shape[1]
    shrink = 1.0 - 2.0 * lam * lr / m
    for idx in range(m):
        i = order[idx]
        margin = 0.0
        for j in range(k):
            margin += w[j] * D[i, j]
        margin *= y[i]
        if margin < 1.0:
            for j in range(k):
                w[j] = shrink * w[j] + lr * y[i] * D[i, j]
        else:
            for j in range(k):
                w[j] = shrink * w[j]


def _ranksvm_epoch_numpy(D, y, w, order, lr, lam):
    m = order.shape[0]
    shrink = 1.0 - 2.0 * lam * lr / m
    for i in order:
        di = D[i]
        margin = y[i] * (di @ w)
        w *= shrink
        if margin < 1.0:
            w += (lr * y[i]) * di


if USE_NUMBA:
    BACKEND = "numba"
    _jacobi_impl = _jacobi_numba
    linreg_epoch = _linreg_epoch_numba
    svr_epoch = _svr_epoch_numba
    ranksvm_epoch = _ranksvm_epoch_numba
else:
    BACKEND = "numpy"
    _jacobi_impl = _jacobi_numpy
    linreg_epoch = _linreg_epoch_numpy
    svr_epoch = _svr_epoch_numpy
    ranksvm_epoch = _ranksvm_epoch_numpy


def jacobi_eigh(a, tol=1e-12, max_sweeps=100, backend=None):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    ``tol`` is relative to the Frobenius norm of ``a``. Returns unsorted
    ``(eigenvalues, eigenvectors, sweeps, converged)`` where eigenvector
    ``i`` is column ``i``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.linalg.norm(a))
    thresh = tol * scale if scale > 0 else tol
    impl = _jacobi_impl
    if backend == "numba":
        impl = _jacobi_numba
    elif backend == "numpy":
        impl = _jacobi_numpy
    w, v, sweeps, converged = impl(a, thresh, int(max_sweeps))
    return w, v, int(sweeps), bool(converged)
