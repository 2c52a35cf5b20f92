"""Zero and eigenvalue counting in complex windows.

Exact counts come from the argument principle along a discretized contour;
certified upper bounds come from the disk form of Jensen's inequality, which
needs only a boundary maximum and one interior value.  Deviation-set counts
over a semiclassical ladder are summarized by a log-log slope.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ComplexWindow:
    """Rectangle (half_width, half_height) or disk (radius) around a center."""

    center: complex
    half_width: float = 0.0
    half_height: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        rect = self.half_width > 0 and self.half_height > 0
        disk = self.radius > 0
        if rect == disk:
            raise ValueError("specify either rectangle half-sizes or a disk radius")

    @property
    def is_disk(self) -> bool:
        return self.radius > 0

    def contour(self, n_points: int) -> np.ndarray:
        """Closed positively-oriented boundary polyline (last point = first)."""
        if self.is_disk:
            t = np.linspace(0.0, 2.0 * math.pi, n_points + 1)
            return self.center + self.radius * np.exp(1j * t)
        w, h = self.half_width, self.half_height
        per_side = max(n_points // 4, 2)
        s = np.linspace(-1.0, 1.0, per_side + 1)
        bottom = self.center + s * w - 1j * h
        right = self.center + w + 1j * s * h
        top = self.center - s * w + 1j * h
        left = self.center - w - 1j * s * h
        return np.concatenate([bottom, right[1:], top[1:], left[1:]])

    def contains(self, z: complex) -> bool:
        d = z - self.center
        if self.is_disk:
            return abs(d) <= self.radius
        return abs(d.real) <= self.half_width and abs(d.imag) <= self.half_height


@dataclass(frozen=True)
class HolomorphicSampler:
    """Pointwise-evaluable holomorphic function with a declared domain."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: Optional[ComplexWindow] = None

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))


def _as_sampler(f) -> Callable:
    return f.evaluator if isinstance(f, HolomorphicSampler) else f


def argument_principle_zeros(f, contour: ComplexWindow, n_points: int = 4096,
                             max_refinements: int = 4) -> int:
    """Number of zeros inside the contour by winding of f along it.

    Requires |f| bounded away from 0 on the contour (a floor check guards
    against zeros within ~1e-6 of it).  The winding number must land within
    0.01 of an integer; otherwise the discretization is refined, then an
    error is raised.
    """
    fn = _as_sampler(f)
    n = int(n_points)
    for _ in range(max_refinements + 1):
        z = contour.contour(n)
        vals = np.asarray(fn(z), dtype=complex)
        mags = np.abs(vals)
        if mags.min() <= 1e-9 * max(mags.max(), 1e-300):
            raise ValueError(
                "|f| floor check failed: possible zero within ~1e-6 of the contour "
                f"(min |f| = {mags.min():.3e})")
        steps = np.angle(vals[1:] / vals[:-1])
        if np.abs(steps).max() < math.pi / 2:
            winding = steps.sum() / (2.0 * math.pi)
            nearest = round(winding)
            if abs(winding - nearest) <= 0.01:
                return int(nearest)
        n *= 2
    raise RuntimeError(
        f"winding number did not stabilize to an integer after refining to {n} points")


def jensen_disk_bound(f, z0: complex, r: float, R_big: float,
                      n_boundary: int = 2048) -> float:
    """Certified upper bound for the zero count of f in the disk |z-z0| <= r:

        (log max_{|z-z0|=R} |f| - log |f(z0)|) / log(R/r),

    valid whenever f is holomorphic on the closed big disk and f(z0) != 0.
    """
    if not (0 < r < R_big):
        raise ValueError("need 0 < r < R_big")
    fn = _as_sampler(f)
    f0 = abs(complex(np.asarray(fn(np.asarray(z0, dtype=complex)), dtype=complex)))
    if f0 < 1e-300:
        raise ValueError(f"|f(z0)| = {f0:.3e} below the floor 1e-300")
    t = np.linspace(0.0, 2.0 * math.pi, n_boundary, endpoint=False)
    ring = z0 + R_big * np.exp(1j * t)
    m = float(np.abs(np.asarray(fn(ring), dtype=complex)).max())
    return (math.log(m) - math.log(f0)) / math.log(R_big / r)


def window_count(spectrum, hbar: float, c: float, alpha: float,
                 side: str = "above", energy: float = 0.5) -> int:
    """#{z : |Re z - energy| <= c hbar, Im z / hbar >= alpha} (or <=).

    `spectrum` is a semiclassical ComplexSpectrum; its hbar metadata must
    match the requested hbar.
    """
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    if getattr(spectrum, "hbar", None) is None:
        raise ValueError("spectrum carries no hbar metadata")
    if not math.isclose(spectrum.hbar, hbar, rel_tol=1e-12):
        raise ValueError(f"hbar mismatch: spectrum has {spectrum.hbar}, requested {hbar}")
    z = spectrum.values
    sel = np.abs(z.real - energy) <= c * hbar
    ratio = z.imag / hbar
    if side == "above":
        return int(np.sum(sel & (ratio >= alpha)))
    return int(np.sum(sel & (ratio <= alpha)))


@dataclass
class ExponentFit:
    slope: float
    residual: float
    n_points: int


def deviation_exponent(ladder) -> ExponentFit:
    """Least-squares slope of log(count) against |log hbar|.

    `ladder` is a list of (hbar, count) with hbar decreasing by factors >= 2
    and at least 4 points.  Any zero count makes the set empty at that scale
    and the fit returns the -inf sentinel.
    """
    ladder = [(float(h), int(c)) for h, c in ladder]
    if len(ladder) < 4:
        raise ValueError("need at least 4 ladder points")
    hs = np.array([h for h, _ in ladder])
    counts = np.array([c for _, c in ladder])
    if np.any(hs <= 0):
        raise ValueError("hbar values must be positive")
    ratios = hs[:-1] / hs[1:]
    if np.any(ratios < 2.0 - 1e-12):
        raise ValueError("hbar must decrease by factors >= 2 along the ladder")
    if np.any(counts < 1):
        return ExponentFit(slope=NEG_INF, residual=0.0, n_points=len(ladder))
    x = np.abs(np.log(hs))
    y = np.log(counts.astype(float))
    design = np.vstack([x, np.ones(len(x))]).T
    coef, res, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(math.sqrt(res[0] / len(x))) if res.size else 0.0
    return ExponentFit(slope=float(coef[0]), residual=residual, n_points=len(ladder))


def polynomial_sampler(coeffs) -> HolomorphicSampler:
    """Entire function sampler for a polynomial given by np.polyval coeffs."""
    c = np.asarray(coeffs, dtype=complex)
    return HolomorphicSampler(evaluator=lambda z: np.polyval(c, z))
