import numpy as np
import pytest

from sphereobs import HarmonicCoeffs


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture
def random_coeffs():
    """Factory for random band-limited coefficient sets."""

    def make(l_max, rng, real=False, parity=None):
        c = HarmonicCoeffs(l_max)
        for l in range(l_max + 1):
            if parity == "even" and l % 2:
                continue
            if parity == "odd" and l % 2 == 0:
                continue
            if real:
                c[l, 0] = rng.standard_normal()
                for m in range(1, l + 1):
                    v = rng.standard_normal() + 1j * rng.standard_normal()
                    c[l, m] = v
                    c[l, -m] = (-1) ** m * np.conj(v)
            else:
                for m in range(-l, l + 1):
                    c[l, m] = rng.standard_normal() + 1j * rng.standard_normal()
        return c

    return make
