"""Explicit geodesic flow in the 2x2 matrix model, with window averages.

Points of the unit tangent bundle are unimodular matrices g; the flow is
right multiplication by diag(e^{t/2}, e^{-t/2}).  On top of it: symmetric
Birkhoff window averages, the tent-weighted averaging corrector g_T whose
flow derivative equals q - <q>_T pointwise, a variable-speed time change,
and finite-difference verification of that identity.

Everything here lives on the universal cover: the identity is local along
trajectories, so no quotient surface is needed.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

_FLOW_T_LIMIT = 600.0


@dataclass(frozen=True)
class FlowPoint:
    """Unimodular 2x2 real matrix; renormalized so |det - 1| <= 1e-12."""

    g: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.g, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("flow point must be a 2x2 matrix")
        d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if d <= 0:
            raise ValueError(f"matrix determinant {d} is not positive")
        if abs(d - 1.0) > 1e-12:
            m = m / math.sqrt(d)
        object.__setattr__(self, "g", m)

    @property
    def det(self) -> float:
        m = self.g
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @classmethod
    def identity(cls) -> "FlowPoint":
        return cls(np.eye(2))


@dataclass(frozen=True)
class Observable:
    """Real observable on flow points, evaluated on batched trajectories.

    `fn` receives an (..., 2, 2) array of matrices and returns (...) values;
    it must be deterministic and bounded on compact parameter boxes.
    `smoothness` is a free-text budget note (matrix-coefficient polynomials
    composed with bounded rational functions).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    name: str = ""
    smoothness: str = ""

    def __call__(self, point) -> float:
        g = point.g if isinstance(point, FlowPoint) else np.asarray(point, float)
        return float(self.fn(g))

    def on_matrices(self, mats: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(mats), dtype=float)


def constant_observable(c: float) -> Observable:
    return Observable(lambda g: np.full(g.shape[:-2], float(c)), name=f"const({c})",
                      smoothness="constant")


def geodesic_flow(p: FlowPoint, t: float) -> FlowPoint:
    """G^t p = p . diag(e^{t/2}, e^{-t/2}), renormalized to det 1."""
    if not math.isfinite(t):
        raise ValueError("flow time must be finite")
    if abs(t) > _FLOW_T_LIMIT:
        raise ValueError(f"flow time |t|={abs(t)} exceeds overflow guard {_FLOW_T_LIMIT}")
    e = math.exp(t / 2.0)
    m = p.g * np.array([[e, 1.0 / e], [e, 1.0 / e]])
    return FlowPoint(m)


def flow_trajectory(p: FlowPoint, s: np.ndarray) -> np.ndarray:
    """Batched G^s p over an array of times: (len(s), 2, 2)."""
    s = np.asarray(s, dtype=float)
    if s.size and np.abs(s).max() > _FLOW_T_LIMIT:
        raise ValueError("trajectory time exceeds overflow guard")
    e = np.exp(s / 2.0)
    out = np.empty(s.shape + (2, 2))
    out[..., 0, 0] = p.g[0, 0] * e
    out[..., 0, 1] = p.g[0, 1] / e
    out[..., 1, 0] = p.g[1, 0] * e
    out[..., 1, 1] = p.g[1, 1] / e
    return out


def _simpson_grid(a: float, b: float, step: float):
    """Even-count Simpson nodes and weights on [a, b] with step <= `step`."""
    if b <= a:
        raise ValueError("empty integration interval")
    n = max(2, int(math.ceil((b - a) / step)))
    if n % 2:
        n += 1
    s = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (b - a) / n / 3.0
    return s, w


def birkhoff_average(q: Observable, p: FlowPoint, T: float, step: float) -> float:
    """Symmetric window average (1/T) integral_{-T/2}^{T/2} q(G^s p) ds.

    Composite Simpson quadrature; O(step^4) error for smooth observables.
    """
    if T <= 0 or step <= 0:
        raise ValueError("T and step must be positive")
    if step > T / 100:
        raise ValueError("step must be at most T/100")
    s, w = _simpson_grid(-T / 2.0, T / 2.0, step)
    vals = q.on_matrices(flow_trajectory(p, s))
    return float((w * vals).sum() / T)


def window_average(q: Observable, p: FlowPoint, a: float, b: float, step: float) -> float:
    """(1/(b-a)) integral_a^b q(G^s p) ds."""
    s, w = _simpson_grid(a, b, step)
    vals = q.on_matrices(flow_trajectory(p, s))
    return float((w * vals).sum() / (b - a))


def averaging_corrector(q: Observable, p: FlowPoint, T: float, step: float) -> float:
    """Tent-weighted corrector

        g_T = 1/2 int_0^{T/2} (2s/T - 1) q(G^s) ds
            + 1/2 int_{-T/2}^0 (2s/T + 1) q(G^s) ds.

    Linear in q; vanishes identically for constant q (the two halves cancel).
    Its derivative along the flow equals q - <q>_T exactly.
    """
    if T <= 0 or step <= 0:
        raise ValueError("T and step must be positive")
    if step > T / 100:
        raise ValueError("step must be at most T/100")
    s1, w1 = _simpson_grid(0.0, T / 2.0, step)
    v1 = q.on_matrices(flow_trajectory(p, s1))
    part1 = 0.5 * float((w1 * (2.0 * s1 / T - 1.0) * v1).sum())
    s2, w2 = _simpson_grid(-T / 2.0, 0.0, step)
    v2 = q.on_matrices(flow_trajectory(p, s2))
    part2 = 0.5 * float((w2 * (2.0 * s2 / T + 1.0) * v2).sum())
    return part1 + part2


def cohomology_residual(q: Observable, p: FlowPoint, T: float, fd_step: float,
                        quad_step: float = 1e-3) -> float:
    """|d/ds g_T(G^s p)|_{s=0} - (q(p) - <q>_T(p))| by central differences.

    The identity is exact, so the residual measures only quadrature and
    finite-difference error (O(fd_step^2) until the quadrature floor).
    """
    if not (1e-6 <= fd_step <= 1e-1):
        raise ValueError("fd_step outside the sensible range")
    gp = averaging_corrector(q, geodesic_flow(p, fd_step), T, quad_step)
    gm = averaging_corrector(q, geodesic_flow(p, -fd_step), T, quad_step)
    deriv = (gp - gm) / (2.0 * fd_step)
    rhs = q(p) - birkhoff_average(q, p, T, quad_step)
    return abs(deriv - rhs)


# ---------------------------------------------------------------------------
# variable-speed time change

def time_change(phi: Observable, p: FlowPoint, t: float, d_minus_1: float = 1.0,
                quad_step: float = 1e-3, tol: float = 1e-8) -> float:
    """Solve integral_0^Tau phi(G^s p) ds = (d-1) t for Tau.

    phi must be positive along the trajectory (checked by sampling); the
    root is bracketed and refined until the integral matches to `tol`.
    """
    target = d_minus_1 * t
    if target == 0.0:
        return 0.0
    sign = 1.0 if target > 0 else -1.0

    def integral(tau: float) -> float:
        if tau == 0.0:
            return 0.0
        a, b = (0.0, tau) if tau > 0 else (tau, 0.0)
        s, w = _simpson_grid(a, b, quad_step)
        vals = phi.on_matrices(flow_trajectory(p, s))
        if vals.min() <= 0:
            raise ValueError("phi is not positive along the sampled trajectory")
        total = float((w * vals).sum())
        return total if tau > 0 else -total

    phi0 = phi(p)
    if phi0 <= 0:
        raise ValueError("phi is not positive at the base point")
    hi = sign * abs(target) / phi0
    for _ in range(200):
        if sign * (integral(hi) - target) > 0:
            break
        hi *= 2.0
        if abs(hi) > _FLOW_T_LIMIT:
            raise ValueError("time change exceeds the flow overflow guard")
    lo = 0.0
    tau = brentq(lambda x: integral(x) - target, min(lo, hi), max(lo, hi),
                 xtol=1e-13, rtol=8.9e-16)
    if abs(integral(tau) - target) > tol:
        raise RuntimeError("time-change root did not meet the integral tolerance")
    return float(tau)


def averaging_corrector_variable(q: Observable, phi: Observable, p: FlowPoint,
                                 T: float, d_minus_1: float = 1.0,
                                 quad_step: float = 1e-3) -> float:
    """Time-changed corrector: the tent is stretched to Tau = Tau_p(T/2),

        1/2 int_0^{Tau} (s/Tau - 1) q(G^s) ds
      + 1/2 int_{-Tau}^0 (s/Tau + 1) q(G^s) ds.

    Reduces to the constant-speed corrector when phi == d-1.
    """
    tau = time_change(phi, p, T / 2.0, d_minus_1, quad_step)
    s1, w1 = _simpson_grid(0.0, tau, quad_step)
    v1 = q.on_matrices(flow_trajectory(p, s1))
    part1 = 0.5 * float((w1 * (s1 / tau - 1.0) * v1).sum())
    s2, w2 = _simpson_grid(-tau, 0.0, quad_step)
    v2 = q.on_matrices(flow_trajectory(p, s2))
    part2 = 0.5 * float((w2 * (s2 / tau + 1.0) * v2).sum())
    return part1 + part2


def timechanged_average(q: Observable, phi: Observable, p: FlowPoint, t: float,
                        d_minus_1: float = 1.0, quad_step: float = 1e-3) -> float:
    """<q> over the window [Tau_p(-t/2), Tau_p(t/2)] of the time change."""
    tau_plus = time_change(phi, p, t / 2.0, d_minus_1, quad_step)
    tau_minus = time_change(phi, p, -t / 2.0, d_minus_1, quad_step)
    return window_average(q, p, tau_minus, tau_plus, quad_step)


def cohomology_residual_variable(q: Observable, phi: Observable, p: FlowPoint,
                                 T: float, fd_step: float, d_minus_1: float = 1.0,
                                 quad_step: float = 1e-3) -> float:
    """Residual of the time-changed identity, modulo its O(1/T) remainder.

    The variable-speed corrector satisfies the cohomological identity only up
    to a correction that shrinks with the window, so callers should log the
    measured value rather than expect it at quadrature level.
    """
    gp = averaging_corrector_variable(q, phi, geodesic_flow(p, fd_step), T,
                                      d_minus_1, quad_step)
    gm = averaging_corrector_variable(q, phi, geodesic_flow(p, -fd_step), T,
                                      d_minus_1, quad_step)
    deriv = (gp - gm) / (2.0 * fd_step)
    rhs = q(p) - timechanged_average(q, phi, p, T, d_minus_1, quad_step)
    return abs(deriv - rhs)


def trajectory_table(q: Observable, p: FlowPoint, tmax: float, step: float) -> np.ndarray:
    """Columns (t, g11, g12, g21, g22, q value) for trajectory dumps."""
    t = np.arange(0.0, tmax + step / 2, step)
    mats = flow_trajectory(p, t)
    vals = q.on_matrices(mats)
    return np.column_stack([t, mats[:, 0, 0], mats[:, 0, 1],
                            mats[:, 1, 0], mats[:, 1, 1], vals])
