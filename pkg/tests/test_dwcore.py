import math

import numpy as np
import pytest

from dwlab import dwcore
from dwlab.dwcore import (ComplexSpectrum, DampingProfile, QuadraticPencil,
                          assemble_pencil, constant_damping_reference,
                          energy_decay_rate, lebeau_quantities, linearize_pencil,
                          single_mode_data, solve_profile_spectrum, solve_spectrum,
                          spectral_mismatch, to_semiclassical,
                          twisted_circle_reference, weyl_window_count)

import oracles


def count_in_window(values, lam, tol=1e-9):
    re = np.asarray(values).real
    t = tol * max(1.0, lam)
    return int(np.sum((re >= -t) & (re <= lam + t)))


# ---------------------------------------------------------------------------
# profiles

def test_profile_evaluation_and_extrema():
    prof = DampingProfile(mean=0.5, cosine_coeffs=(0.4,))
    x = np.linspace(0, 2 * math.pi, 7)
    assert np.allclose(prof.evaluate(x), 0.5 + 0.4 * np.cos(x))
    lo, hi = prof.extrema()
    assert abs(lo - 0.1) <= 1e-6
    assert abs(hi - 0.9) <= 1e-6
    assert lo <= 0.1 and hi >= 0.9  # brackets the true extrema


def test_profile_modes():
    assert DampingProfile(mean=0.3).is_pure_damping()
    assert DampingProfile(mean=0.0, twist=0.2).is_pure_twist()
    mixed = DampingProfile(mean=0.1, cosine_coeffs=(0.2,), twist=0.1)
    assert not mixed.is_pure_damping() and not mixed.is_pure_twist()


# ---------------------------------------------------------------------------
# pencil assembly

def test_assemble_constant_damping():
    pencil = assemble_pencil(DampingProfile(mean=0.5), K=4)
    assert pencil.dimension == 9
    assert np.allclose(pencil.damping_op, 0.5 * np.eye(9))
    assert np.allclose(np.diag(pencil.laplacian).real,
                       np.arange(-4, 5) ** 2)


def test_assemble_cosine_damping():
    pencil = assemble_pencil(DampingProfile(mean=0.0, cosine_coeffs=(1.0,)), K=2)
    expected = np.zeros((5, 5))
    idx = np.arange(4)
    expected[idx, idx + 1] = 0.5
    expected[idx + 1, idx] = 0.5
    assert np.allclose(pencil.damping_op, expected)


def test_assemble_rejects_aliasing():
    prof = DampingProfile(mean=0.0, cosine_coeffs=(0.0, 0.0, 0.3))
    with pytest.raises(ValueError, match="aliasing"):
        assemble_pencil(prof, K=2)


def test_laplacian_real_diag_nonneg_and_hermitian_damping():
    prof = DampingProfile(mean=0.5, cosine_coeffs=(0.1,), sine_coeffs=(0.2,))
    pencil = assemble_pencil(prof, K=8)
    L = pencil.laplacian
    assert np.allclose(L, np.diag(np.diag(L)))
    assert np.all(np.diag(L).real >= 0) and np.allclose(np.diag(L).imag, 0)
    assert np.allclose(pencil.damping_op, pencil.damping_op.conj().T)


# ---------------------------------------------------------------------------
# linearization

def test_linearize_single_undamped_mode():
    pencil = QuadraticPencil(laplacian=np.array([[4.0 + 0j]]),
                             damping_op=np.array([[0.0 + 0j]]),
                             twist_diag=np.zeros(1, complex), dimension=1)
    w = np.linalg.eigvals(linearize_pencil(pencil))
    assert spectral_mismatch(w, np.array([2.0, -2.0])) < 1e-12


@pytest.mark.parametrize("n,a0", [(3, 0.5), (1, 2.0), (2, 0.0)])
def test_linearize_single_damped_mode(n, a0):
    pencil = QuadraticPencil(laplacian=np.array([[n * n + 0j]]),
                             damping_op=np.array([[a0 + 0j]]),
                             twist_diag=np.zeros(1, complex), dimension=1)
    w = np.linalg.eigvals(linearize_pencil(pencil))
    s = complex(n * n - a0 * a0) ** 0.5
    assert spectral_mismatch(w, np.array([1j * a0 + s, 1j * a0 - s])) < 1e-12


def test_block_matches_determinant_root_oracle():
    rng = np.random.default_rng(5)
    S = np.diag(np.array([0.0, 1.0, 4.0, 9.0], dtype=complex))
    B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    A = (B + B.conj().T) / 4.0
    pencil = QuadraticPencil(laplacian=S, damping_op=A,
                             twist_diag=np.zeros(4, complex), dimension=4)
    w = np.linalg.eigvals(linearize_pencil(pencil))
    ref = oracles.det_pencil_roots(S, A)
    assert spectral_mismatch(w, ref) < 1e-8


# ---------------------------------------------------------------------------
# spectrum solve

def test_solve_identity_matrix():
    spec = solve_spectrum(np.eye(3, dtype=complex))
    assert np.allclose(spec.values, 1.0)


def test_solve_constant_damping_k64_matches_reference():
    spec = solve_profile_spectrum(DampingProfile(mean=0.5), 64)
    ref = constant_damping_reference(0.5, 64)
    assert len(spec) == len(ref)
    assert spectral_mismatch(spec.values, ref.values) < 1e-8


def test_undamped_spectrum_real_and_symmetric():
    spec = solve_profile_spectrum(DampingProfile(mean=0.0), 16)
    assert np.abs(spec.values.imag).max() < 1e-10
    assert dwcore.symmetry_defect(spec) < 1e-10


def test_spectrum_rejects_nan():
    with pytest.raises(ValueError, match="non-finite"):
        ComplexSpectrum(values=np.array([1.0, np.nan]))


# ---------------------------------------------------------------------------
# closed-form references

def test_constant_damping_reference_values():
    spec = constant_damping_reference(0.5, 3)
    got = spec.values
    assert any(abs(z - (math.sqrt(8.75) + 0.5j)) < 1e-5 for z in got)   # 2.95804 + 0.5i
    assert any(abs(z - (-math.sqrt(8.75) + 0.5j)) < 1e-5 for z in got)
    undamped = constant_damping_reference(0.0, 3)
    assert spectral_mismatch(undamped.values,
                             np.array([-3, -3, -2, -2, -1, -1, 0, 0, 1, 1, 2, 2, 3, 3],
                                      dtype=complex)) < 1e-12
    over = constant_damping_reference(2.0, 1)
    expect = {1j * (2 + math.sqrt(3)), 1j * (2 - math.sqrt(3))}
    for target in expect:
        assert min(abs(over.values - target)) < 1e-12


def test_twisted_reference_values():
    assert spectral_mismatch(twisted_circle_reference(0.0, 3).values,
                             np.array([9, 4, 1, 0, 1, 4, 9], dtype=complex)) < 1e-12
    z5 = twisted_circle_reference(0.3, 5).values
    assert min(abs(z5 - (24.91 + 3.0j))) < 1e-12


def test_twisted_pencil_matches_closed_form():
    spec = solve_profile_spectrum(DampingProfile(mean=0.0, twist=0.3), 8)
    ref = twisted_circle_reference(0.3, 8)
    doubled = np.concatenate([ref.values, ref.values])
    assert spectral_mismatch(spec.values ** 2, doubled) < 1e-8


# ---------------------------------------------------------------------------
# semiclassical rescaling

def test_to_semiclassical_values():
    spec = ComplexSpectrum(values=np.array([100.0 + 0.5j]))
    z = to_semiclassical(spec, 0.01)
    assert abs(z.values[0] - (0.4999875 + 0.005j)) < 1e-12
    assert abs(dwcore.im_over_hbar(z)[0] - 0.5) < 1e-10


def test_to_semiclassical_real_tau():
    spec = ComplexSpectrum(values=np.array([50.0 + 0j, 80.0 + 0j]))
    z = to_semiclassical(spec, 1 / 64)
    assert np.allclose(z.values.imag, 0.0)


def test_semiclassical_ladder_recovers_damping():
    # the rescaling tracks hbar*tau -> 1, so restrict to the Re tau > 0 branch
    a0 = 0.5
    for n in (50, 100, 200, 400):
        hbar = 1.0 / n
        spec = constant_damping_reference(a0, n)
        pos = ComplexSpectrum(values=spec.values[spec.values.real > 0])
        z = to_semiclassical(pos, hbar)
        mask = dwcore.near_energy_mask(z, c=1.0)
        assert mask.any()
        dev = np.abs(dwcore.im_over_hbar(z)[mask] - a0).max()
        assert dev <= 1.1 * hbar


def test_to_semiclassical_requires_positive_hbar():
    spec = ComplexSpectrum(values=np.array([1.0 + 0j]))
    with pytest.raises(ValueError):
        to_semiclassical(spec, 0.0)


# ---------------------------------------------------------------------------
# counting windows

def test_weyl_count_undamped_matches_enumeration_oracle():
    spec = solve_profile_spectrum(DampingProfile(mean=0.0), 32)
    oracle = count_in_window(constant_damping_reference(0.0, 32).values, 10.0)
    wc = weyl_window_count(spec, 10.0)
    assert wc.count == oracle == 22      # 2 zero modes + two copies of 1..10
    assert wc.predicted == 20.0
    assert abs(wc.count - wc.predicted) <= 3
    assert wc.trusted


def test_weyl_count_lambda_zero():
    spec = solve_profile_spectrum(DampingProfile(mean=0.0), 8)
    wc = weyl_window_count(spec, 0.0)
    oracle = int(np.sum(np.abs(constant_damping_reference(0.0, 8).values.real) <= 1e-9))
    assert wc.count == oracle == 2


def test_weyl_count_trust_horizon():
    spec = solve_profile_spectrum(DampingProfile(mean=0.5), 16)
    assert not weyl_window_count(spec, 10.0).trusted
    assert weyl_window_count(spec, 8.0).trusted


def test_weyl_count_constant_damping_k128():
    spec = solve_profile_spectrum(DampingProfile(mean=0.5), 128)
    wc = weyl_window_count(spec, 50.0)
    oracle = count_in_window(constant_damping_reference(0.5, 128).values, 50.0)
    assert wc.count == oracle
    assert abs(wc.count - 100.0) <= 3


def test_weyl_count_requires_wave_kind():
    spec = ComplexSpectrum(values=np.array([1.0 + 0j]), kind=dwcore.SEMICLASSICAL_Z,
                           hbar=0.1)
    with pytest.raises(ValueError, match="wave-tau"):
        weyl_window_count(spec, 1.0)


# ---------------------------------------------------------------------------
# decay-rate quantities

def test_lebeau_constant_damping():
    spec = solve_profile_spectrum(DampingProfile(mean=0.5), 8)
    lq = lebeau_quantities(spec, DampingProfile(mean=0.5))
    assert abs(lq.d0 - 0.5) < 1e-10
    assert lq.c_inf == 0.5
    assert abs(lq.rho_pred - 1.0) < 1e-10


def test_lebeau_undamped():
    spec = solve_profile_spectrum(DampingProfile(mean=0.0), 8)
    lq = lebeau_quantities(spec, DampingProfile(mean=0.0))
    assert abs(lq.d0) < 1e-10
    assert abs(lq.rho_pred) < 1e-10


def test_lebeau_cosine_profile(cos_profile):
    spec = solve_profile_spectrum(cos_profile, 128)
    lq = lebeau_quantities(spec, cos_profile)
    assert lq.c_inf == 0.5
    assert 0.0 < lq.d0 < 0.5
    assert abs(lq.rho_pred - 2 * min(lq.d0, lq.c_inf)) < 1e-15


def test_lebeau_rejects_twist_and_negative_damping():
    spec = solve_profile_spectrum(DampingProfile(mean=0.5), 4)
    with pytest.raises(ValueError, match="twist"):
        lebeau_quantities(spec, DampingProfile(mean=0.5, twist=0.1))
    with pytest.raises(ValueError, match="nonnegative"):
        lebeau_quantities(spec, DampingProfile(mean=0.1, cosine_coeffs=(0.5,)))


# ---------------------------------------------------------------------------
# energy decay

def test_energy_decay_single_mode_rate():
    K = 32
    rate = energy_decay_rate(DampingProfile(mean=0.5), K, single_mode_data(K, 3), 40.0)
    assert abs(rate - 1.0) <= 0.02


def test_energy_conserved_without_damping():
    K = 16
    rate = energy_decay_rate(DampingProfile(mean=0.0), K, single_mode_data(K, 3), 20.0)
    assert abs(rate) <= 1e-6


def test_energy_decay_matches_spectral_prediction(cos_profile):
    K = 64
    spec = solve_profile_spectrum(cos_profile, 128)
    lq = lebeau_quantities(spec, cos_profile)
    rate = energy_decay_rate(cos_profile, K, dwcore.band_limited_data(K, 8, seed=1), 60.0)
    assert abs(rate - lq.rho_pred) <= 0.1 * lq.rho_pred


# ---------------------------------------------------------------------------
# module invariants

def test_symmetry_invariant_various_profiles():
    for prof in (DampingProfile(mean=0.5),
                  DampingProfile(mean=0.5, cosine_coeffs=(0.4,)),
                  DampingProfile(mean=0.3, cosine_coeffs=(0.1,), sine_coeffs=(0.2,))):
        spec = solve_profile_spectrum(prof, 64)
        assert dwcore.symmetry_defect(spec) < 1e-8


def test_band_bound_invariant(cos_profile):
    spec = solve_profile_spectrum(cos_profile, 128)
    assert dwcore.band_bound_defect(spec, cos_profile) <= 1e-6


def test_rayleigh_identity(cos_profile):
    pencil = assemble_pencil(cos_profile, 64)
    assert dwcore.rayleigh_residuals(pencil).max() < 1e-7


def test_concentration_invariant(cos_spectrum_256):
    vals = cos_spectrum_256.values
    sel = (np.abs(vals.real) >= 64) & (np.abs(vals.real) <= 128)
    frac = float(np.mean(np.abs(vals[sel].imag - 0.5) > 0.1))
    assert frac <= 0.10


def test_refinement_stability(cos_profile):
    s64 = solve_profile_spectrum(cos_profile, 64)
    s128 = solve_profile_spectrum(cos_profile, 128)
    low = s64.values[np.abs(s64.values.real) <= 16]
    moves = np.abs(low[:, None] - s128.values[None, :]).min(axis=1)
    assert moves.max() <= 1e-8
