"""Hot numeric loops, each in a numba and a pure-numpy variant.

The public names at the bottom dispatch on :data:`torusweyl._accel.USE_NUMBA`.
Both variants implement the same algorithms; results agree to rounding, and each
variant is deterministic on its own.

Eigen kernels follow the classical dense symmetric route: Householder reduction
to tridiagonal form, implicit-shift QL on the tridiagonal matrix (rotations
accumulated into the transposed eigenvector matrix so updates touch contiguous
rows), then back-transformation through the stored reflectors.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

EPS = np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# translation-operator scatter


@njit
def _scatter_translations_nb(m, n, coef, N, out):
    half = N // 2
    two_n = 2 * N
    table = np.empty(two_n, dtype=np.complex128)
    for j in range(two_n):
        table[j] = complex(math.cos(math.pi * j / N), -math.sin(math.pi * j / N))
    for t in range(coef.shape[0]):
        mm = m[t] % N
        nn = n[t] % N
        # e^{-i pi n m / N} depends on n*m mod 2N, not just on the residues
        base = coef[t] * table[((n[t] % two_n) * (m[t] % two_n)) % two_n]
        for p in range(N):
            k = p - half
            q = (p + mm) % N
            out[p, q] += base * table[2 * ((k * nn) % N)]


def _scatter_translations_np(m, n, coef, N, out):
    two_n = 2 * N
    table = np.exp(-1j * np.pi * np.arange(two_n) / N)
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    base = coef * table[((n % two_n) * (m % two_n)) % two_n]
    p = np.arange(N)
    k = p - N // 2
    rows = np.broadcast_to(p, (coef.size, N))
    cols = (p[None, :] + (m % N)[:, None]) % N
    vals = base[:, None] * table[2 * ((k[None, :] * (n % N)[:, None]) % N)]
    np.add.at(out, (rows, cols), vals)


# ---------------------------------------------------------------------------
# Householder tridiagonalisation


@njit
def _tridiagonalize_nb(a, keep_reflectors):
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    refl = np.zeros((n, n)) if keep_reflectors else np.zeros((1, 1))
    v = np.zeros(n)
    p = np.zeros(n)
    for k in range(n - 2):
        sigma = 0.0
        for i in range(k + 1, n):
            sigma += a[i, k] * a[i, k]
        if sigma == 0.0:
            e[k] = 0.0
            continue
        norm = math.sqrt(sigma)
        x0 = a[k + 1, k]
        alpha = -norm if x0 >= 0.0 else norm
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] = x0 - alpha
        vv = sigma - x0 * x0 + v[k + 1] * v[k + 1]
        scale = math.sqrt(2.0 / vv)
        for i in range(k + 1, n):
            v[i] *= scale
        # H = I - v v^T with v^T v = 2; B <- H B H via p = B v, w = p - (v.p/2) v
        vp = 0.0
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            p[i] = s
            vp += v[i] * s
        half = 0.5 * vp
        for i in range(k + 1, n):
            p[i] -= half * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            pi = p[i]
            for j in range(k + 1, n):
                a[i, j] -= vi * p[j] + pi * v[j]
        e[k] = alpha
        if keep_reflectors:
            for i in range(k + 1, n):
                refl[k, i] = v[i]
    for i in range(n):
        d[i] = a[i, i]
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e, refl


def _tridiagonalize_np(a, keep_reflectors):
    n = a.shape[0]
    e = np.zeros(n)
    refl = np.zeros((n, n)) if keep_reflectors else np.zeros((1, 1))
    for k in range(n - 2):
        x = a[k + 1:, k]
        sigma = float(x @ x)
        if sigma == 0.0:
            continue
        norm = math.sqrt(sigma)
        alpha = -norm if x[0] >= 0.0 else norm
        v = x.copy()
        v[0] -= alpha
        v *= math.sqrt(2.0 / float(v @ v))
        B = a[k + 1:, k + 1:]
        p = B @ v
        p -= 0.5 * float(v @ p) * v
        B -= np.outer(v, p)
        B -= np.outer(p, v)
        e[k] = alpha
        if keep_reflectors:
            refl[k, k + 1:] = v
    d = np.diagonal(a).copy()
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e, refl


# ---------------------------------------------------------------------------
# implicit-shift QL on a symmetric tridiagonal matrix
#
# d: diagonal, e[i] couples i and i+1 (e[n-1] ignored). zt rows are the
# eigenvectors being accumulated (zt = Z^T), or a (1, 1) dummy.
# Returns (iterations, status); status 0 ok, otherwise the index that failed.


@njit
def _tridiagonal_ql_nb(d, e, zt, want_vectors, max_iter):
    n = d.shape[0]
    total = 0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return total, l + 1
            it += 1
            total += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(n):
                        f = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f
                        zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return total, 0


def _tridiagonal_ql_np(d, e, zt, want_vectors, max_iter):
    n = d.shape[0]
    total = 0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= EPS * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return total, l + 1
            it += 1
            total += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    upper = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * upper
                    zt[i] = c * zt[i] - s * upper
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return total, 0


# ---------------------------------------------------------------------------
# back-transformation: rows of zt are eigenvectors of T; map them to A's basis


@njit
def _back_transform_nb(refl, zt):
    n = zt.shape[0]
    coeff = np.empty(n)
    for k in range(n - 3, -1, -1):
        # rows of zt are vectors x; x <- H_k x = x - v (v.x) on components k+1..n-1
        for r in range(n):
            s = 0.0
            for i in range(k + 1, n):
                s += refl[k, i] * zt[r, i]
            coeff[r] = s
        for r in range(n):
            cr = coeff[r]
            if cr != 0.0:
                for i in range(k + 1, n):
                    zt[r, i] -= cr * refl[k, i]


def _back_transform_np(refl, zt):
    n = zt.shape[0]
    for k in range(n - 3, -1, -1):
        v = refl[k, k + 1:]
        block = zt[:, k + 1:]
        block -= np.outer(block @ v, v)


if USE_NUMBA:
    scatter_translations = _scatter_translations_nb
    tridiagonalize = _tridiagonalize_nb
    tridiagonal_ql = _tridiagonal_ql_nb
    back_transform = _back_transform_nb
else:
    scatter_translations = _scatter_translations_np
    tridiagonalize = _tridiagonalize_np
    tridiagonal_ql = _tridiagonal_ql_np
    back_transform = _back_transform_np

NUMBA_KERNELS = {
    "scatter_translations": _scatter_translations_nb,
    "tridiagonalize": _tridiagonalize_nb,
    "tridiagonal_ql": _tridiagonal_ql_nb,
    "back_transform": _back_transform_nb,
}
NUMPY_KERNELS = {
    "scatter_translations": _scatter_translations_np,
    "tridiagonalize": _tridiagonalize_np,
    "tridiagonal_ql": _tridiagonal_ql_np,
    "back_transform": _back_transform_np,
}
