"""Pressure, entropy rate functions, and large deviations on finite subshifts.

Finite irreducible Markov shifts (optionally with a positive roof function,
for suspension-flow statements) stand in for the geodesic flow: on them
pressure and entropy are exactly computable through Perron eigendata, the
rate function comes out by Legendre transform, and Birkhoff-average
deviation probabilities can be sampled exactly.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from . import kernels

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# models

@dataclass
class MarkovModel:
    """Irreducible 0/1 subshift with edge observable q and positive roof."""

    adjacency: np.ndarray
    q_edge: np.ndarray
    roof_edge: np.ndarray
    d_minus_1: float = 1.0

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        self.adjacency = A.astype(np.int64)
        S = A.shape[0]
        self.q_edge = np.broadcast_to(np.asarray(self.q_edge, dtype=float), (S, S)).copy()
        self.roof_edge = np.broadcast_to(np.asarray(self.roof_edge, dtype=float), (S, S)).copy()
        if not self._strongly_connected():
            raise ValueError("adjacency is not irreducible (strongly connected)")
        if np.any(self.roof_edge[self.adjacency == 1] <= 0):
            raise ValueError("roof function must be positive on every edge")

    def _strongly_connected(self) -> bool:
        A = self.adjacency
        if A.sum() == 0:
            return False

        def reach(mat):
            seen = {0}
            stack = [0]
            while stack:
                u = stack.pop()
                for v in np.nonzero(mat[u])[0]:
                    if v not in seen:
                        seen.add(int(v))
                        stack.append(int(v))
            return len(seen) == mat.shape[0]

        return reach(A) and reach(A.T)

    @property
    def n_states(self) -> int:
        return self.adjacency.shape[0]

    def unit_roof(self) -> bool:
        return bool(np.allclose(self.roof_edge[self.adjacency == 1], 1.0))


def full_shift(n_symbols: int = 2, q_by_symbol: Optional[Sequence[float]] = None,
               roof_by_symbol: Optional[Sequence[float]] = None,
               d_minus_1: float = 1.0) -> MarkovModel:
    """Full shift on n symbols; q/roof depend on the target symbol."""
    S = n_symbols
    A = np.ones((S, S), dtype=np.int64)
    q = np.zeros((S, S)) if q_by_symbol is None else np.tile(np.asarray(q_by_symbol, float), (S, 1))
    r = np.ones((S, S)) if roof_by_symbol is None else np.tile(np.asarray(roof_by_symbol, float), (S, 1))
    return MarkovModel(adjacency=A, q_edge=q, roof_edge=r, d_minus_1=d_minus_1)


def golden_mean_shift(q_edge=0.0) -> MarkovModel:
    """Subshift forbidding the word 11: adjacency rows (1,1), (1,0)."""
    A = np.array([[1, 1], [1, 0]], dtype=np.int64)
    return MarkovModel(adjacency=A, q_edge=q_edge, roof_edge=1.0)


# ---------------------------------------------------------------------------
# Perron data

def perron_root(M: np.ndarray) -> float:
    """Spectral radius of a nonnegative irreducible matrix."""
    return float(np.abs(np.linalg.eigvals(M)).max())


def perron_triple(M: np.ndarray):
    """(root, right vector, left vector), eigenvectors positive, l.r = 1."""
    w, V = np.linalg.eig(M)
    i = int(np.argmax(np.abs(w)))
    lam = float(np.real(w[i]))
    r = np.abs(np.real(V[:, i]))
    wl, Vl = np.linalg.eig(M.T)
    j = int(np.argmax(np.abs(wl)))
    l = np.abs(np.real(Vl[:, j]))
    l = l / (l @ r)
    return lam, r, l


def equilibrium_chain(model: MarkovModel, potential: np.ndarray):
    """Markov chain (P, pi) of the equilibrium measure for an edge potential.

    Transfer matrix M = A o exp(potential); P_ij = M_ij u_j / (lam u_i) with
    u the right Perron vector, and pi the stationary distribution u_i l_i.
    """
    M = model.adjacency * np.exp(potential)
    lam, u, l = perron_triple(M)
    P = M * u[None, :] / (lam * u[:, None])
    pi = u * l
    pi = pi / pi.sum()
    return P, pi, lam


def entropy_rate(P: np.ndarray, pi: np.ndarray) -> float:
    """Shannon entropy rate -sum pi_i P_ij log P_ij of a Markov chain."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-(pi[:, None] * P * lp).sum())


def topological_entropy(model: MarkovModel) -> float:
    return math.log(perron_root(model.adjacency.astype(float)))


def max_entropy_chain(model: MarkovModel):
    """Parry chain: the measure of maximal entropy of the subshift."""
    return equilibrium_chain(model, np.zeros_like(model.q_edge))


def mean_under_max_entropy(model: MarkovModel) -> float:
    """Mean of the edge observable under the measure of maximal entropy."""
    P, pi, _ = max_entropy_chain(model)
    return float((pi[:, None] * P * model.q_edge).sum())


# ---------------------------------------------------------------------------
# pressure

def pressure_transfer(model: MarkovModel, beta: float) -> float:
    """Topological pressure of beta*q over the roof model.

    Unit roof: log of the Perron root of A o exp(beta q).  General roof:
    the root s of Perron(A o exp(beta q - s roof)) = 1, located by monotone
    bracketing and solved to 1e-12 (the pressure of the suspension flow).
    """
    if model.unit_roof():
        return math.log(perron_root(model.adjacency * np.exp(beta * model.q_edge)))

    def g(s: float) -> float:
        return math.log(perron_root(
            model.adjacency * np.exp(beta * model.q_edge - s * model.roof_edge)))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) > 0:
            break
        lo *= 2
    else:
        raise RuntimeError("pressure bracketing failed on the lower side")
    for _ in range(200):
        if g(hi) < 0:
            break
        hi *= 2
    else:
        raise RuntimeError("pressure bracketing failed on the upper side")
    return float(brentq(g, lo, hi, xtol=1e-13, rtol=8.9e-16))


def bowen_root(model: MarkovModel, beta: float = 0.0) -> float:
    """Root s* of Perron(A o exp(beta q - s roof)) = 1 (suspension pressure)."""

    def g(s: float) -> float:
        return math.log(perron_root(
            model.adjacency * np.exp(beta * model.q_edge - s * model.roof_edge)))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) > 0:
            break
        lo *= 2
    else:
        raise RuntimeError("Bowen-root bracketing failed on the lower side")
    for _ in range(200):
        if g(hi) < 0:
            break
        hi *= 2
    else:
        raise RuntimeError("Bowen-root bracketing failed on the upper side")
    return float(brentq(g, lo, hi, xtol=1e-13, rtol=8.9e-16))


@dataclass
class PressureCurve:
    """Sampled pressure function beta -> P(beta); convex by construction."""

    betas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.betas.ndim != 1 or self.betas.shape != self.values.shape:
            raise ValueError("betas and values must be matching 1-d arrays")
        if np.any(np.diff(self.betas) <= 0):
            raise ValueError("beta grid must be strictly increasing")
        d2 = np.diff(self.values, 2)
        if d2.size and d2.min() < -1e-9:
            raise ValueError(f"curve is not convex: min second difference {d2.min():.3e}")


def pressure_curve(model: MarkovModel, betas: Optional[np.ndarray] = None) -> PressureCurve:
    if betas is None:
        betas = np.linspace(-40.0, 40.0, 801)
    vals = np.array([pressure_transfer(model, b) for b in betas])
    return PressureCurve(betas=betas, values=vals)


@dataclass
class RateFunction:
    """Sampled entropy rate function H(alpha); -inf outside [q_minus, q_plus]."""

    alphas: np.ndarray
    values: np.ndarray
    q_minus: float
    q_plus: float

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        finite = np.isfinite(self.values)
        inside = (self.alphas >= self.q_minus - 1e-12) & (self.alphas <= self.q_plus + 1e-12)
        if np.any(finite != inside):
            raise ValueError("rate function must be finite exactly on [q_minus, q_plus]")
        v = self.values[finite]
        d2 = np.diff(v, 2)
        if d2.size and d2.max() > 1e-9:
            raise ValueError(f"rate function not concave: max second difference {d2.max():.3e}")

    def at(self, alpha: float) -> float:
        """Linear interpolation inside the domain, -inf outside."""
        if alpha < self.q_minus - 1e-12 or alpha > self.q_plus + 1e-12:
            return NEG_INF
        return float(np.interp(alpha, self.alphas, self.values))


def _endpoint_slopes(curve: PressureCurve, tol: float = 1e-6):
    slopes = np.diff(curve.values) / np.diff(curve.betas)
    left = slopes[:3]
    right = slopes[-3:]
    if np.abs(np.diff(left)).max() > tol or np.abs(np.diff(right)).max() > tol:
        raise ValueError(
            "beta grid too narrow: boundary slopes not converged "
            f"(left diffs {np.abs(np.diff(left)).max():.2e}, "
            f"right diffs {np.abs(np.diff(right)).max():.2e})")
    return float(slopes[0]), float(slopes[-1])


def legendre_rate(curve: PressureCurve, alphas: Optional[Sequence[float]] = None) -> RateFunction:
    """Rate function H(alpha) = inf_beta (P(beta) - alpha beta).

    The sampled curve is interpolated by a cubic spline and the infimum is
    polished by bounded minimization inside the bracketing grid cell, so grid
    spacing does not limit accuracy.  Domain endpoints are the converged
    extreme slopes of P.
    """
    q_minus, q_plus = _endpoint_slopes(curve)
    spline = CubicSpline(curve.betas, curve.values)
    if alphas is None:
        alphas = np.linspace(q_minus, q_plus, 401)
    alphas = np.asarray(alphas, dtype=float)
    out = np.empty(alphas.shape)
    for i, a in enumerate(alphas):
        if a < q_minus - 1e-12 or a > q_plus + 1e-12:
            out[i] = NEG_INF
            continue
        vals = curve.values - a * curve.betas
        j = int(np.argmin(vals))
        lo = curve.betas[max(j - 1, 0)]
        hi = curve.betas[min(j + 1, len(curve.betas) - 1)]
        res = minimize_scalar(lambda b: spline(b) - a * b, bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        out[i] = min(float(res.fun), float(vals[j]))
    return RateFunction(alphas=alphas, values=out, q_minus=q_minus, q_plus=q_plus)


def legendre_roundtrip(curve: PressureCurve, rate: RateFunction, beta: float) -> float:
    """sup_alpha (alpha beta + H(alpha)), for checking duality against P(beta)."""
    finite = np.isfinite(rate.values)
    al = rate.alphas[finite]
    hv = rate.values[finite]
    g = hv + al * beta
    j = int(np.argmax(g))
    spline = CubicSpline(al, g)
    lo, hi = al[max(j - 1, 0)], al[min(j + 1, len(al) - 1)]
    res = minimize_scalar(lambda a: -spline(a), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return max(float(-res.fun), float(g[j]))


# ---------------------------------------------------------------------------
# periodic orbits and orbit-sum pressure

def periodic_orbits(model: MarkovModel, max_period: int):
    """All primitive periodic orbits with period <= max_period.

    Each orbit is reported once (as its lexicographically least rotation)
    with its roof length and q-integral: [(length, q_integral, period)].
    """
    A = model.adjacency
    S = model.n_states
    out = []
    for k in range(1, max_period + 1):
        for word in _admissible_words(A, k):
            if not _is_primitive(word):
                continue
            if min(word[i:] + word[:i] for i in range(k)) != word:
                continue
            length = 0.0
            qint = 0.0
            for i in range(k):
                a, b = word[i], word[(i + 1) % k]
                length += model.roof_edge[a, b]
                qint += model.q_edge[a, b]
            out.append((length, qint, k))
    return out


def _admissible_words(A: np.ndarray, k: int):
    """Cyclically admissible words of length k, depth-first."""
    S = A.shape[0]
    word = [0] * k

    def rec(i):
        if i == k:
            if A[word[-1], word[0]]:
                yield tuple(word)
            return
        for s in range(S):
            if i == 0 or A[word[i - 1], s]:
                word[i] = s
                yield from rec(i + 1)

    yield from rec(0)


def _is_primitive(word) -> bool:
    k = len(word)
    for d in range(1, k):
        if k % d == 0 and word == word[d:] + word[:d]:
            return False
    return True


def pressure_orbit_sum(orbits, t: float, length_weighted: bool = False) -> float:
    """(1/t) log sum over orbits of length <= t of exp(q-integral).

    Finite-t estimator of the pressure with O(1/t) bias; `orbits` is an
    iterable of (length, q_integral) or (length, q_integral, period).

    With `length_weighted`, each term carries its orbit length (for primitive
    lists, the shortest period).  The weight cancels in the t -> infinity
    limit but removes the 1/(pressure * t) counting prefactor, so the
    finite-t estimate sits much closer to the true pressure.
    """
    total = 0.0
    found = False
    for orbit in orbits:
        length, qint = orbit[0], orbit[1]
        if length <= t:
            total += (length if length_weighted else 1.0) * math.exp(qint)
            found = True
    if not found:
        raise ValueError(f"no orbits with length <= {t}")
    return math.log(total) / t


# ---------------------------------------------------------------------------
# extreme Birkhoff means: Karp's minimum/maximum mean cycle

def _karp_min_mean(adjacency: np.ndarray, weights) -> Fraction:
    """Minimum mean cycle by Karp's dynamic program, exact over Fractions."""
    S = adjacency.shape[0]
    INF = None
    D = [[INF] * S for _ in range(S + 1)]
    D[0][0] = Fraction(0)
    edges = [(int(u), int(v)) for u in range(S) for v in range(S) if adjacency[u, v]]
    W = {(u, v): weights[u][v] for u, v in edges}
    for k in range(1, S + 1):
        row = D[k]
        prev = D[k - 1]
        for u, v in edges:
            if prev[u] is None:
                continue
            cand = prev[u] + W[(u, v)]
            if row[v] is None or cand < row[v]:
                row[v] = cand
    best = None
    for v in range(S):
        if D[S][v] is None:
            continue
        worst = None
        for k in range(S):
            if D[k][v] is None:
                continue
            ratio = (D[S][v] - D[k][v]) / (S - k)
            if worst is None or ratio > worst:
                worst = ratio
        if worst is not None and (best is None or worst < best):
            best = worst
    if best is None:
        raise ValueError("graph has no cycle reachable from state 0")
    return best


def _as_exact_weights(q: np.ndarray):
    """Fractions when every weight is exactly rational in binary, else floats."""
    rows = []
    for row in q:
        rows.append([Fraction(float(x)) for x in row])
    return rows


def q_extremes(model: MarkovModel):
    """(q_minus, q_plus): extreme means of q over invariant measures.

    Extreme means are attained on cycles of the graph, so Karp's mean-cycle
    dynamic program gives them exactly (division only happens at the end, so
    the computation is exact over rationals).
    """
    w = _as_exact_weights(model.q_edge)
    lo = _karp_min_mean(model.adjacency, w)
    neg = [[-x for x in row] for row in w]
    hi = -_karp_min_mean(model.adjacency, neg)
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# Monte Carlo large deviations under the max-entropy law

@dataclass
class DeviationSample:
    """Empirical large-deviation rate for Birkhoff averages in an interval."""

    empirical_rate: float
    hits: int
    nsamples: int
    T: int
    interval: tuple
    se_rate: float
    predicted_rate: Optional[float] = None


def birkhoff_ld_montecarlo(model: MarkovModel, T: int, interval, nsamples: int,
                           seed: int, predicted_rate: Optional[float] = None) -> DeviationSample:
    """Sample length-T trajectories of the Parry chain; rate of avg in I.

    Returns (1/T) log of the empirical probability that the edge-observable
    Birkhoff average lies in `interval`.  Zero hits yield the -inf sentinel
    with the hit count preserved.
    """
    if nsamples < 1:
        raise ValueError("nsamples must be positive")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must have nonempty interior")
    P, pi, _ = max_entropy_chain(model)
    cum_init = np.cumsum(pi)
    cum_trans = np.cumsum(P, axis=1)
    hits = kernels.mc_birkhoff_hits(cum_init, cum_trans, model.q_edge,
                                    T, nsamples, seed, lo, hi)
    if hits == 0:
        rate = NEG_INF
        se = float("nan")
    else:
        p = hits / nsamples
        rate = math.log(p) / T
        se = math.sqrt((1.0 - p) / (p * nsamples)) / T
    return DeviationSample(empirical_rate=rate, hits=hits, nsamples=nsamples,
                           T=T, interval=(lo, hi), se_rate=se,
                           predicted_rate=predicted_rate)


def ld_rate_prediction(model: MarkovModel, interval, rate: Optional[RateFunction] = None) -> float:
    """sup over alpha in I of H(alpha), minus the topological entropy."""
    if rate is None:
        rate = legendre_rate(pressure_curve(model))
    lo = max(float(interval[0]), rate.q_minus)
    hi = min(float(interval[1]), rate.q_plus)
    if lo > hi:
        return NEG_INF
    al = np.linspace(lo, hi, 2001)
    sup = max(rate.at(a) for a in al)
    return float(sup - topological_entropy(model))


# ---------------------------------------------------------------------------
# time change (suspension) entropy

@dataclass
class TimeChangeCheck:
    h_base: float
    h_timechanged: float
    bowen_root: float
    mean_roof: float
    abramov_residual: float


def abramov_timechange(model: MarkovModel, beta: float = 0.0) -> TimeChangeCheck:
    """Base vs time-changed entropy for the suspension's equilibrium measure.

    The measure is the shift equilibrium of beta*q - s*roof at the Bowen root
    s = s(beta); its entropy satisfies h = s * mean(roof) - beta * mean(q), so
    the time-changed entropy d_minus_1 * h / mean(roof) must reproduce
    d_minus_1 * s exactly when beta = 0.
    """
    s_star = bowen_root(model, beta)
    potential = beta * model.q_edge - s_star * model.roof_edge
    P, pi, lam = equilibrium_chain(model, potential)
    h_base = entropy_rate(P, pi)
    mean_roof = float((pi[:, None] * P * model.roof_edge).sum())
    h_tc = model.d_minus_1 * h_base / mean_roof
    mean_q = float((pi[:, None] * P * model.q_edge).sum())
    flow_value = model.d_minus_1 * (s_star - beta * mean_q / mean_roof)
    return TimeChangeCheck(h_base=h_base, h_timechanged=h_tc, bowen_root=s_star,
                           mean_roof=mean_roof,
                           abramov_residual=abs(h_tc - flow_value))


# ---------------------------------------------------------------------------
# stable norm

def stable_norm(orbits) -> float:
    """sup over listed orbits of (omega-integral / length).

    Accepts an iterable of (length, omega_integral) pairs or anything with an
    `orbit_pairs()` method (weighted length spectra).  A lower bound that
    converges from below as the orbit list grows.
    """
    if hasattr(orbits, "orbit_pairs"):
        orbits = orbits.orbit_pairs()
    best = None
    for length, omega in orbits:
        if length <= 0:
            raise ValueError("orbit lengths must be positive")
        ratio = omega / length
        if best is None or ratio > best:
            best = ratio
    if best is None:
        raise ValueError("empty orbit list")
    return float(best)
