import numpy as np
import pytest

from dwlab import arith, dwcore


@pytest.fixture(scope="session")
def cos_profile():
    return dwcore.DampingProfile(mean=0.5, cosine_coeffs=(0.4,))


@pytest.fixture(scope="session")
def cos_spectrum_256(cos_profile):
    """Shared K=256 solve of the 0.5 + 0.4 cos x profile (a few seconds)."""
    return dwcore.solve_profile_spectrum(cos_profile, 256)


@pytest.fixture(scope="session")
def wls_zero_form():
    """Zero-form Gamma(2,5) length spectrum, box 20, traces up to 2*14."""
    return arith.build_length_spectrum(2, 5, m_max=14, box=20)
