"""Damped wave eigenproblem on model manifolds (the circle, spectrally exact).

The stationary problem (-Laplacian - tau^2 + 2 i a tau) u = 0 is discretized
in the Fourier basis e^{inx}, |n| <= K.  Trig-polynomial damping makes the
multiplication operator an exact banded convolution matrix, so truncation is
the only discretization error.  The quadratic pencil is solved through the
block companion matrix [[0, I], [stiffness, 2i A]].

A first-order "twist" term (the circle version of a real harmonic 1-form,
symbol c*xi) is supported as a tau-independent contribution 2 i c n - c^2 to
the stiffness diagonal; with zero damping the pencil roots are then exactly
+-(n + ic), squaring to the twisted-Laplacian eigenvalues (n + ic)^2.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

WAVE_TAU = "wave-tau"
SPECTRAL_R = "spectral-r"
SEMICLASSICAL_Z = "semiclassical-z"
TWISTED_LAMBDA = "twisted-lambda"

_KINDS = (WAVE_TAU, SPECTRAL_R, SEMICLASSICAL_Z, TWISTED_LAMBDA)


# ---------------------------------------------------------------------------
# damping profiles

@dataclass(frozen=True)
class DampingProfile:
    """Trig-polynomial damping a(x) on the circle, plus an optional twist c.

    a(x) = mean + sum_k cos_k cos(kx) + sum_k sin_k sin(kx).
    twist is the coefficient of the first-order term (symbol c*xi); it must
    be 0 for the pure damped-wave mode.
    """

    mean: float
    cosine_coeffs: tuple = ()
    sine_coeffs: tuple = ()
    twist: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cosine_coeffs", tuple(float(c) for c in self.cosine_coeffs))
        object.__setattr__(self, "sine_coeffs", tuple(float(s) for s in self.sine_coeffs))

    @property
    def degree(self) -> int:
        return max(len(self.cosine_coeffs), len(self.sine_coeffs))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.mean, dtype=float)
        for k, c in enumerate(self.cosine_coeffs, start=1):
            out += c * np.cos(k * x)
        for k, s in enumerate(self.sine_coeffs, start=1):
            out += s * np.sin(k * x)
        return out

    def fourier_coefficient(self, k: int) -> complex:
        """Coefficient of e^{ikx} in a(x)."""
        if k == 0:
            return complex(self.mean)
        ak = abs(k)
        c = self.cosine_coeffs[ak - 1] if ak <= len(self.cosine_coeffs) else 0.0
        s = self.sine_coeffs[ak - 1] if ak <= len(self.sine_coeffs) else 0.0
        if k > 0:
            return complex(c / 2.0, -s / 2.0)
        return complex(c / 2.0, s / 2.0)

    def extrema(self, tol: float = 1e-6):
        """(lower, upper) bracketing min a and max a within tol.

        Grid extremum plus a second-derivative bound: between grid points the
        function deviates from the sampled extremum by at most L2 h^2 / 8,
        with L2 = sum k^2 (|cos_k| + |sin_k|).
        """
        l2 = sum((k + 1) ** 2 * (abs(c) + 0.0) for k, c in enumerate(self.cosine_coeffs))
        l2 += sum((k + 1) ** 2 * abs(s) for k, s in enumerate(self.sine_coeffs))
        npts = 10_000
        if l2 > 0:
            npts = max(npts, int(math.ceil(2 * math.pi * math.sqrt(l2 / (8 * tol)))) + 1)
        x = np.linspace(0.0, 2 * math.pi, npts, endpoint=False)
        vals = self.evaluate(x)
        h = 2 * math.pi / npts
        pad = l2 * h * h / 8.0
        return float(vals.min() - pad), float(vals.max() + pad)

    def is_pure_damping(self) -> bool:
        return self.twist == 0.0

    def is_pure_twist(self) -> bool:
        return self.mean == 0.0 and not any(self.cosine_coeffs) and not any(self.sine_coeffs)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "cos": list(self.cosine_coeffs),
                "sin": list(self.sine_coeffs), "twist": self.twist}

    @classmethod
    def from_dict(cls, d: dict) -> "DampingProfile":
        return cls(mean=float(d.get("mean", 0.0)),
                   cosine_coeffs=tuple(d.get("cos", ())),
                   sine_coeffs=tuple(d.get("sin", ())),
                   twist=float(d.get("twist", 0.0)))

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


# ---------------------------------------------------------------------------
# pencil assembly and solution

@dataclass
class QuadraticPencil:
    """tau^2 u = (laplacian + twist_diag) u + 2 i tau damping_op u."""

    laplacian: np.ndarray        # diagonal matrix diag(n^2), real
    damping_op: np.ndarray       # convolution matrix of a(x), Hermitian for real a
    twist_diag: np.ndarray       # diagonal of the tau-independent twist block
    dimension: int
    profile: Optional[DampingProfile] = None
    modes: np.ndarray = field(default=None, repr=False)

    def stiffness(self) -> np.ndarray:
        return self.laplacian + np.diag(self.twist_diag)


@dataclass
class ComplexSpectrum:
    """Finite computed spectrum, sorted by real part, with solver metadata."""

    values: np.ndarray
    kind: str = WAVE_TAU
    hbar: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValueError("spectrum contains non-finite entries")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        order = np.lexsort((vals.imag, vals.real))
        self.values = vals[order]

    def __len__(self):
        return len(self.values)


@dataclass
class LebeauQuantities:
    """Spectral gap, geodesic damping floor, and the predicted decay rate."""

    d0: float
    c_inf: float
    rho_pred: float
    rho_measured: Optional[float] = None


def assemble_pencil(profile: DampingProfile, K: int) -> QuadraticPencil:
    """Fourier-truncated pencil for modes |n| <= K.

    Rejects profiles whose trig degree exceeds K: the convolution matrix
    would alias and the discretization would no longer be exact.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if profile.degree > K:
        raise ValueError(
            f"aliasing: profile degree {profile.degree} exceeds K={K}; "
            "increase K to at least the trig degree")
    n = np.arange(-K, K + 1)
    N = 2 * K + 1
    lap = np.diag((n ** 2).astype(complex))
    damp = np.zeros((N, N), dtype=complex)
    for k in range(-profile.degree, profile.degree + 1):
        coef = profile.fourier_coefficient(k)
        if coef != 0:
            idx = np.arange(max(0, k), min(N, N + k))
            damp[idx, idx - k] = coef
    c = profile.twist
    twist_diag = (2j * c * n - c * c).astype(complex) if c else np.zeros(N, dtype=complex)
    return QuadraticPencil(laplacian=lap, damping_op=damp, twist_diag=twist_diag,
                           dimension=N, profile=profile, modes=n)


def linearize_pencil(pencil: QuadraticPencil) -> np.ndarray:
    """Block companion matrix [[0, I], [stiffness, 2i damping_op]]."""
    N = pencil.dimension
    top = np.hstack([np.zeros((N, N), dtype=complex), np.eye(N, dtype=complex)])
    bottom = np.hstack([pencil.stiffness(), 2j * pencil.damping_op])
    return np.vstack([top, bottom])


def solve_spectrum(companion: np.ndarray, residual_tol: float = 1e-8,
                   kind: str = WAVE_TAU, meta: Optional[dict] = None) -> ComplexSpectrum:
    """All eigenvalues of the companion matrix, residual-checked.

    Every eigenpair must satisfy ||M v - tau v|| <= residual_tol (v normalized).
    """
    M = np.asarray(companion, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("companion matrix must be square")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    res = np.linalg.norm(M @ V - V * w[None, :], axis=0) / np.linalg.norm(V, axis=0)
    worst = float(res.max()) if res.size else 0.0
    if worst > residual_tol:
        raise RuntimeError(
            f"eigenpair residual {worst:.3e} exceeds tolerance {residual_tol:.1e} "
            f"(matrix dim {M.shape[0]})")
    info = dict(meta or {})
    info["max_residual"] = worst
    return ComplexSpectrum(values=w, kind=kind, meta=info)


def solve_profile_spectrum(profile: DampingProfile, K: int) -> ComplexSpectrum:
    """Convenience: assemble, linearize, solve; metadata records K and profile."""
    pencil = assemble_pencil(profile, K)
    spec = solve_spectrum(linearize_pencil(pencil),
                          meta={"K": K, "profile_hash": profile.content_hash()})
    return spec


def eigenpairs(companion: np.ndarray):
    """(eigenvalues, unit eigenvectors) of the companion matrix."""
    w, V = np.linalg.eig(np.asarray(companion, dtype=complex))
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    return w, V


def constant_damping_reference(a0: float, nmax: int) -> ComplexSpectrum:
    """Closed-form spectrum { i a0 +- sqrt(n^2 - a0^2) : |n| <= nmax }.

    Principal square root: overdamped modes (n^2 < a0^2) sit on the
    imaginary axis.  Multiset matches the pencil solve (each |n| >= 1 pair
    appears twice, once for n and once for -n).
    """
    vals = []
    for n in range(-nmax, nmax + 1):
        s = complex(n * n - a0 * a0) ** 0.5
        vals.append(1j * a0 + s)
        vals.append(1j * a0 - s)
    return ComplexSpectrum(values=np.array(vals), kind=WAVE_TAU,
                           meta={"reference": "constant-damping", "a0": a0, "nmax": nmax})


def twisted_circle_reference(c: float, nmax: int) -> ComplexSpectrum:
    """Eigenvalues (n + ic)^2 of the twisted Laplacian on the circle."""
    n = np.arange(-nmax, nmax + 1)
    return ComplexSpectrum(values=(n + 1j * c) ** 2, kind=TWISTED_LAMBDA,
                           meta={"reference": "twisted-circle", "c": c, "nmax": nmax})


# ---------------------------------------------------------------------------
# semiclassical view and counting windows

def to_semiclassical(spectrum: ComplexSpectrum, hbar: float) -> ComplexSpectrum:
    """Rescale wave eigenvalues tau to z = (hbar*tau)^2 / 2."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    z = (hbar * spectrum.values) ** 2 / 2.0
    meta = dict(spectrum.meta)
    meta["source_kind"] = spectrum.kind
    return ComplexSpectrum(values=z, kind=SEMICLASSICAL_Z, hbar=hbar, meta=meta)


def im_over_hbar(spectrum: ComplexSpectrum) -> np.ndarray:
    if spectrum.hbar is None:
        raise ValueError("spectrum carries no hbar metadata")
    return spectrum.values.imag / spectrum.hbar


def near_energy_mask(spectrum: ComplexSpectrum, c: float, energy: float = 0.5) -> np.ndarray:
    """Boolean filter |Re z - energy| <= c*hbar."""
    if spectrum.hbar is None:
        raise ValueError("spectrum carries no hbar metadata")
    return np.abs(spectrum.values.real - energy) <= c * spectrum.hbar


@dataclass
class WeylCount:
    count: int
    predicted: float
    lam: float
    trusted: bool


def weyl_window_count(spectrum: ComplexSpectrum, lam: float,
                      boundary_tol: float = 1e-9) -> WeylCount:
    """#{tau : 0 <= Re tau <= lam} against the phase-volume prediction 2*lam.

    On the circle (d=1) the symbol volume of {0 < xi^2 < 1} is 4*pi, so the
    prediction is (lam / 2pi) * 4pi = 2*lam.  Counts above the truncation
    trust horizon K/2 are flagged untrusted rather than rejected.
    """
    if spectrum.kind != WAVE_TAU:
        raise ValueError("weyl_window_count expects a wave-tau spectrum")
    tol = boundary_tol * max(1.0, lam)
    re = spectrum.values.real
    count = int(np.sum((re >= -tol) & (re <= lam + tol)))
    K = spectrum.meta.get("K")
    trusted = K is None or lam <= K / 2
    return WeylCount(count=count, predicted=2.0 * lam, lam=lam, trusted=trusted)


def lebeau_quantities(spectrum: ComplexSpectrum, profile: DampingProfile,
                      zero_tol: float = 1e-8) -> LebeauQuantities:
    """Spectral gap d0 = min Im tau over nonzero tau, c_inf = mean damping.

    On the circle every geodesic equidistributes, so the infimum of long-time
    damping averages equals the mean of a.  Requires a >= 0 and no twist.
    """
    if profile.twist != 0.0:
        raise ValueError("decay-rate quantities require twist = 0")
    lo, _ = profile.extrema()
    if lo < -1e-12:
        raise ValueError("decay-rate quantities require nonnegative damping")
    nz = spectrum.values[np.abs(spectrum.values) > zero_tol]
    if nz.size == 0:
        raise ValueError("no nonzero eigenvalues in the computed window")
    d0 = float(nz.imag.min())
    c_inf = float(profile.mean)
    return LebeauQuantities(d0=d0, c_inf=c_inf, rho_pred=2.0 * min(d0, c_inf))


# ---------------------------------------------------------------------------
# time-domain energy decay

def single_mode_data(K: int, n: int, amplitude: float = 1.0) -> np.ndarray:
    """Initial Fourier data exciting cos(nx): modes +-n."""
    u0 = np.zeros(2 * K + 1, dtype=complex)
    u0[K + n] = amplitude
    u0[K - n] = amplitude
    return u0


def band_limited_data(K: int, band: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random initial data supported on |n| <= band."""
    rng = np.random.default_rng(seed)
    u0 = np.zeros(2 * K + 1, dtype=complex)
    idx = np.arange(-band, band + 1)
    u0[K + idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    return u0


def simulate_energy(profile: DampingProfile, K: int, u0: Sequence[complex],
                    tmax: float):
    """Time-step the damped wave equation; return (times, energies).

    Leapfrog with the damping term taken at the velocity midpoint
    (unconditionally dissipative for a >= 0 at step 0.2/K).  The reported
    energy is the staggered form <w_{k+1/2}, w_{k-1/2}> + <v, L v>, which the
    undamped scheme conserves exactly; the constant mode is excluded.
    """
    if profile.twist != 0.0:
        raise ValueError("energy decay requires twist = 0")
    lo, _ = profile.extrema()
    if lo < -1e-12:
        raise ValueError("energy decay requires nonnegative damping")
    n = np.arange(-K, K + 1)
    N = 2 * K + 1
    L = (n ** 2).astype(float)
    pencil = assemble_pencil(profile, K)
    A = pencil.damping_op
    dt = 0.2 / K
    nsteps = int(round(tmax / dt))
    stepper = np.linalg.inv(np.eye(N) + dt * A)
    back = np.eye(N) - dt * A
    v = np.asarray(u0, dtype=complex).copy()
    if v.shape != (N,):
        raise ValueError(f"initial data must have length {N}")
    v[K] = 0.0  # constant mode carries no gradient energy
    w = stepper @ (-0.5 * dt * (L * v))
    times = np.empty(nsteps)
    energies = np.empty(nsteps)
    e_prev = None
    for k in range(nsteps):
        v = v + dt * w
        w_prev = w
        w = stepper @ (back @ w - dt * (L * v))
        e = float(np.real(np.vdot(w, w_prev)) + np.real(np.vdot(v, L * v)))
        times[k] = (k + 1) * dt
        energies[k] = e
        if e_prev is not None and e > e_prev * (1.0 + 1e-10) + 1e-300:
            raise RuntimeError(
                f"energy grew from {e_prev:.6e} to {e:.6e} at t={times[k]:.4f}; "
                "time step unstable for nonnegative damping")
        e_prev = e
    return times, energies


def energy_decay_rate(profile: DampingProfile, K: int, u0: Sequence[complex],
                      tmax: float) -> float:
    """Fitted exponential decay rate of the energy over [tmax/2, tmax]."""
    t, E = simulate_energy(profile, K, u0, tmax)
    sel = t >= tmax / 2
    y = np.log(np.maximum(E[sel], 1e-300))
    design = np.vstack([t[sel], np.ones(int(sel.sum()))]).T
    slope, _ = np.linalg.lstsq(design, y, rcond=None)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# diagnostics shared by tests and the CLI verification mode

def spectral_mismatch(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError("spectra have different cardinality")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def symmetry_defect(spectrum: ComplexSpectrum) -> float:
    """Distance of the spectrum from its reflection tau -> -conj(tau)."""
    return spectral_mismatch(spectrum.values, -np.conj(spectrum.values))


def band_bound_defect(spectrum: ComplexSpectrum, profile: DampingProfile,
                      re_min: float = 1.0) -> float:
    """How far Im tau leaves [min a, max a] for |Re tau| >= re_min."""
    lo, hi = profile.extrema()
    sel = np.abs(spectrum.values.real) >= re_min
    if not sel.any():
        return 0.0
    im = spectrum.values[sel].imag
    return float(max(lo - im.min(), im.max() - hi, 0.0))


def rayleigh_residuals(pencil: QuadraticPencil) -> np.ndarray:
    """|<S u, u> + 2 i tau <A u, u> - tau^2| per eigenpair, u normalized."""
    M = linearize_pencil(pencil)
    w, V = eigenpairs(M)
    N = pencil.dimension
    u = V[:N, :]
    norms = np.linalg.norm(u, axis=0)
    ok = norms > 1e-12
    u = u[:, ok] / norms[ok]
    tau = w[ok]
    S = pencil.stiffness()
    A = pencil.damping_op
    quad_s = np.einsum("in,ij,jn->n", np.conj(u), S, u)
    quad_a = np.einsum("in,ij,jn->n", np.conj(u), A, u)
    return np.abs(quad_s + 2j * tau * quad_a - tau ** 2)
