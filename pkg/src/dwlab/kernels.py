"""Hot numeric kernels, each with a numba @njit build and a pure-numpy fallback.

The backend is chosen once at import time (see `dwlab._accel`); the
``DWLAB_DISABLE_NUMBA=1`` environment flag forces the numpy paths.

Randomness is counter-based (splitmix64 streams indexed by sample number), so
Monte Carlo results are bit-identical for a given seed on both backends and
independent of any batching or parallel schedule.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / float(1 << 53)


# ---------------------------------------------------------------------------
# counter-based uniform stream (splitmix64)

@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _mix64_np(z):
    # uint64 wraparound is the point; silence numpy's overflow warnings
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, index: int, n: int) -> np.ndarray:
    """n uniforms from the counter-based stream of sample `index` (numpy path)."""
    with np.errstate(over="ignore"):
        state = np.uint64(seed) + np.uint64(index + 1) * _GOLDEN
        out = np.empty(n)
        for k in range(n):
            state = state + _GOLDEN
            out[k] = float(_mix64_np(state) >> np.uint64(11)) * _INV53
    return out


# ---------------------------------------------------------------------------
# Monte Carlo Birkhoff-average deviation counting on a Markov model

@njit(cache=True)
def _mc_hits_nb(cum_init, cum_trans, q_edge, T, nsamples, seed, lo, hi):
    S = cum_init.shape[0]
    seed_u = np.uint64(seed)
    hits = 0
    for i in range(nsamples):
        state = seed_u + np.uint64(i + 1) * _GOLDEN
        state = state + _GOLDEN
        u = np.float64(_mix64(state) >> np.uint64(11)) * _INV53
        s = 0
        while s < S - 1 and u > cum_init[s]:
            s += 1
        acc = 0.0
        for _ in range(T):
            state = state + _GOLDEN
            u = np.float64(_mix64(state) >> np.uint64(11)) * _INV53
            s2 = 0
            while s2 < S - 1 and u > cum_trans[s, s2]:
                s2 += 1
            acc += q_edge[s, s2]
            s = s2
        avg = acc / T
        if lo <= avg <= hi:
            hits += 1
    return hits


def _mc_hits_np(cum_init, cum_trans, q_edge, T, nsamples, seed, lo, hi):
    S = cum_init.shape[0]
    with np.errstate(over="ignore"):
        idx = np.arange(1, nsamples + 1, dtype=np.uint64)
        state = np.uint64(seed) + idx * _GOLDEN
        state = state + _GOLDEN
        u = (_mix64_np(state) >> np.uint64(11)).astype(np.float64) * _INV53
        s = np.minimum((u[:, None] > cum_init[None, :]).sum(axis=1), S - 1)
        acc = np.zeros(nsamples)
        for _ in range(T):
            state = state + _GOLDEN
            u = (_mix64_np(state) >> np.uint64(11)).astype(np.float64) * _INV53
            s2 = np.minimum((u[:, None] > cum_trans[s]).sum(axis=1), S - 1)
            acc += q_edge[s, s2]
            s = s2
    avg = acc / T
    return int(((avg >= lo) & (avg <= hi)).sum())


def mc_birkhoff_hits(cum_init, cum_trans, q_edge, T, nsamples, seed, lo, hi):
    """Count samples whose length-T edge-average falls in [lo, hi].

    Identical integer result on both backends (same uniform stream, same
    comparisons, same per-sample accumulation order).
    """
    args = (np.ascontiguousarray(cum_init, dtype=np.float64),
            np.ascontiguousarray(cum_trans, dtype=np.float64),
            np.ascontiguousarray(q_edge, dtype=np.float64),
            int(T), int(nsamples), int(seed), float(lo), float(hi))
    if USE_NUMBA:
        return int(_mc_hits_nb(*args))
    return _mc_hits_np(*args)


# ---------------------------------------------------------------------------
# quadruple enumeration on the quaternion norm form
#   y0^2 - A y1^2 - p y2^2 + A p y3^2 = 1  with y0 = m fixed

@njit(cache=True)
def _enum_quadruples_nb(A, p, m, box):
    Ap = A * p
    target = m * m - 1
    # first pass: count
    count = 0
    for y1 in range(-box, box + 1):
        for y2 in range(-box, box + 1):
            num = A * y1 * y1 + p * y2 * y2 - target
            if num < 0 or num % Ap != 0:
                continue
            s = num // Ap
            y3 = np.int64(math.sqrt(float(s)))
            while (y3 + 1) * (y3 + 1) <= s:
                y3 += 1
            while y3 * y3 > s:
                y3 -= 1
            if y3 * y3 == s and y3 <= box:
                count += 1 if y3 == 0 else 2
    out = np.empty((count, 4), dtype=np.int64)
    k = 0
    for y1 in range(-box, box + 1):
        for y2 in range(-box, box + 1):
            num = A * y1 * y1 + p * y2 * y2 - target
            if num < 0 or num % Ap != 0:
                continue
            s = num // Ap
            y3 = np.int64(math.sqrt(float(s)))
            while (y3 + 1) * (y3 + 1) <= s:
                y3 += 1
            while y3 * y3 > s:
                y3 -= 1
            if y3 * y3 == s and y3 <= box:
                out[k, 0] = m
                out[k, 1] = y1
                out[k, 2] = y2
                out[k, 3] = y3
                k += 1
                if y3 != 0:
                    out[k, 0] = m
                    out[k, 1] = y1
                    out[k, 2] = y2
                    out[k, 3] = -y3
                    k += 1
    return out


def _enum_quadruples_np(A, p, m, box):
    r = np.arange(-box, box + 1, dtype=np.int64)
    y1, y2 = np.meshgrid(r, r, indexing="ij")
    y1 = y1.ravel()
    y2 = y2.ravel()
    num = A * y1 * y1 + p * y2 * y2 - (m * m - 1)
    ok = (num >= 0) & (num % (A * p) == 0)
    y1, y2, num = y1[ok], y2[ok], num[ok]
    s = num // (A * p)
    y3 = np.floor(np.sqrt(s.astype(np.float64))).astype(np.int64)
    y3 += ((y3 + 1) ** 2 <= s).astype(np.int64)
    y3 -= (y3 ** 2 > s).astype(np.int64)
    ok = (y3 * y3 == s) & (y3 <= box)
    y1, y2, y3 = y1[ok], y2[ok], y3[ok]
    rows = []
    for a, b, c in zip(y1, y2, y3):
        rows.append((m, a, b, c))
        if c != 0:
            rows.append((m, a, b, -c))
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def enumerate_quadruples(A: int, p: int, m: int, box: int) -> np.ndarray:
    """All (m, y1, y2, y3) with unit norm form and |y1|,|y2|,|y3| <= box.

    Rows come back lexicographically sorted, so both backends agree exactly.
    """
    if USE_NUMBA:
        out = _enum_quadruples_nb(int(A), int(p), int(m), int(box))
    else:
        out = _enum_quadruples_np(int(A), int(p), int(m), int(box))
    if out.shape[0] > 1:
        order = np.lexsort((out[:, 3], out[:, 2], out[:, 1], out[:, 0]))
        out = out[order]
    return out


# ---------------------------------------------------------------------------
# simultaneous-phase scan for the trace-formula frequency search

@njit(cache=True)
def _min_cos_chunk_nb(lengths, r0, step, n):
    out = np.empty(n)
    for i in range(n):
        R = r0 + step * i
        mc = 2.0
        for j in range(lengths.shape[0]):
            c = math.cos(R * lengths[j])
            if c < mc:
                mc = c
        out[i] = mc
    return out


def _min_cos_chunk_np(lengths, r0, step, n):
    R = r0 + step * np.arange(n)
    return np.cos(R[:, None] * lengths[None, :]).min(axis=1)


def min_cos_chunk(lengths, r0: float, step: float, n: int) -> np.ndarray:
    """min over lengths of cos(R*l) on the grid R = r0 + step*[0..n)."""
    lengths = np.ascontiguousarray(lengths, dtype=np.float64)
    if USE_NUMBA:
        return _min_cos_chunk_nb(lengths, float(r0), float(step), int(n))
    return _min_cos_chunk_np(lengths, float(r0), float(step), int(n))


# ---------------------------------------------------------------------------
# Gaussian-windowed spectral sums  sum_j exp(-sigma^2 (r_j - R)^2 / 2 - i T r_j)

@njit(cache=True)
def _gauss_sum_nb(re, im, R, T, sigma):
    acc = 0.0 + 0.0j
    half = 0.5 * sigma * sigma
    for j in range(re.shape[0]):
        z = complex(re[j], im[j])
        acc += np.exp(-half * (z - R) ** 2 - 1j * T * z)
    return acc


def _gauss_sum_np(re, im, R, T, sigma):
    z = re + 1j * im
    return complex(np.exp(-0.5 * sigma ** 2 * (z - R) ** 2 - 1j * T * z).sum())


def gaussian_window_sum(re, im, R: float, T: float, sigma: float) -> complex:
    """Windowed exponential sum over a (possibly complex) spectrum list."""
    re = np.ascontiguousarray(re, dtype=np.float64)
    im = np.ascontiguousarray(im, dtype=np.float64)
    if USE_NUMBA:
        return complex(_gauss_sum_nb(re, im, float(R), float(T), float(sigma)))
    return _gauss_sum_np(re, im, float(R), float(T), float(sigma))
