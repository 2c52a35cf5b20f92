"""Independent oracles used by the test suite.

Each one recomputes an expected value by a route disjoint from the
implementation it checks: characteristic-polynomial interpolation instead of
block linearization, exhaustive cycle enumeration instead of Karp's DP,
exact binomial tails instead of Monte Carlo, brute-force quadruple search
instead of the kernel enumeration, dense scans instead of chunked ones.
"""

import math

import numpy as np
import scipy.stats


def det_pencil_roots(stiffness, damping):
    """Roots of det(S + 2 i tau A - tau^2 I) by interpolation + np.roots.

    The determinant is a degree-2N polynomial in tau; sampling it on a circle
    of radius rho and inverting the FFT gives its coefficients without ever
    forming the companion block.
    """
    S = np.asarray(stiffness, dtype=complex)
    A = np.asarray(damping, dtype=complex)
    N = S.shape[0]
    deg = 2 * N
    M = deg + 1
    rho = 2.0 * (1.0 + math.sqrt(max(np.abs(S).max(), 1.0)) + np.abs(A).max())
    nodes = rho * np.exp(2j * math.pi * np.arange(M) / M)
    vals = np.array([np.linalg.det(S + 2j * t * A - t * t * np.eye(N)) for t in nodes])
    # v_k = sum_j (a_j rho^j) e^{+2 pi i jk/M}, so the forward FFT inverts it
    coeffs = np.fft.fft(vals) / M / rho ** np.arange(M)
    return np.roots(coeffs[::-1])


def simple_cycle_mean_extremes(adjacency, weights):
    """(min, max) mean weight over all simple cycles, by exhaustive DFS."""
    A = np.asarray(adjacency)
    W = np.asarray(weights, dtype=float)
    S = A.shape[0]
    best_lo, best_hi = math.inf, -math.inf

    def dfs(root, node, visited, total, length):
        nonlocal best_lo, best_hi
        for nxt in range(S):
            if not A[node, nxt]:
                continue
            if nxt == root:
                mean = (total + W[node, nxt]) / (length + 1)
                best_lo = min(best_lo, mean)
                best_hi = max(best_hi, mean)
            elif nxt > root and nxt not in visited:
                dfs(root, nxt, visited | {nxt}, total + W[node, nxt], length + 1)

    for r in range(S):
        dfs(r, r, {r}, 0.0, 0)
    if not math.isfinite(best_lo):
        raise ValueError("graph has no cycles")
    return best_lo, best_hi


def exact_binomial_interval_rate(T, lo, hi, p=0.5):
    """(1/T) log P(lo <= X/T <= hi) for X ~ Binomial(T, p), exact.

    Uses survival functions so deep tails do not cancel to zero.
    """
    k_lo = math.ceil(lo * T - 1e-12)
    k_hi = math.floor(hi * T + 1e-12)
    prob = float(scipy.stats.binom.sf(k_lo - 1, T, p) - scipy.stats.binom.sf(k_hi, T, p))
    if prob <= 0:
        return float("-inf")
    return math.log(prob) / T


def brute_enumerate_quadruples(A, p, m, box):
    """Pure-python triple loop over the whole box (independent of kernels)."""
    out = []
    for y1 in range(-box, box + 1):
        for y2 in range(-box, box + 1):
            for y3 in range(-box, box + 1):
                if m * m - A * y1 * y1 - p * y2 * y2 + A * p * y3 * y3 == 1:
                    out.append((m, y1, y2, y3))
    return sorted(out)


def dense_first_r(lengths, M, step=1e-4, span=50.0):
    """Smallest grid point R >= M with cos(R l) >= 1/2 for all l (dense scan)."""
    R = M
    while R < M + span:
        if all(math.cos(R * l) >= 0.5 for l in lengths):
            return R
        R += step
    raise AssertionError("dense scan found no admissible R in the span")


def triangle_transform_at_zero(L=None):
    """integral of (1/pi) (sin(u/2)/(u/2))^2 over R, by trapezoid + exact tail.

    Euler-Maclaurin makes the trapezoid error negligible (the integrand's
    derivative vanishes at 0 and decays like 1/u^2); the tail beyond L is
    (2/pi)(1/L + O(1/L^2)) with L a multiple of 2 pi.
    """
    if L is None:
        L = 2.0 * math.pi * 10_000
    u = np.arange(0.0, L + 1e-9, 0.01)
    s = np.sinc(u / (2.0 * math.pi))
    f = s * s / math.pi
    body = np.trapezoid(f, u)
    tail = (2.0 / math.pi) / L
    return 2.0 * (body + tail)
