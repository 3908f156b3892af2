"""Independent reference computations used to cross-check the main code paths.

Nothing here imports the closed-form eigenfunction formulas; each routine
re-derives its answer by a different route.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "classical_band_norms",
    "free_gaussian_evolution",
    "transfer_matrix_coefficients",
]


def _interface(k, x0):
    e = np.exp(1j * k * x0)
    return np.array([[e, 1 / e], [1j * k * e, -1j * k / e]])


def transfer_matrix_coefficients(xi: float, epsilon: float) -> dict:
    """Scattering data of a square barrier by 2x2 transfer matrices.

    Region amplitudes (a, b) multiply e^{ikx}, e^{-ikx}; ψ and ψ' are matched
    at x = -1 and x = 1. Returns the same coefficient names as
    :class:`barrierbesov.eigen.EigenCoefficients` plus the middle amplitudes
    on the e^{±i k_mid x} basis (``mid_plus``, ``mid_minus``) and ``k_mid``.
    """
    k_out = complex(xi)
    k_mid = np.sqrt(complex(xi * xi - epsilon * epsilon))
    # state on the right = T · state on the left
    to_mid = np.linalg.solve(_interface(k_mid, -1.0), _interface(k_out, -1.0))
    to_right = np.linalg.solve(_interface(k_out, 1.0), _interface(k_mid, 1.0))
    T = to_right @ to_mid
    if xi > 0:
        # left (1, r), right (t, 0)
        r = -T[1, 0] / T[1, 1]
        left = np.array([1.0, r])
        mid = to_mid @ left
        right = T @ left
        return {
            "a": 1.0 + 0j, "a_prime": complex(r), "c": complex(right[0]), "c_prime": 0j,
            "mid_plus": complex(mid[0]), "mid_minus": complex(mid[1]), "k_mid": k_mid,
        }
    # left (A, 0), right (1, C')
    a = 1 / T[0, 0]
    left = np.array([a, 0.0])
    mid = to_mid @ left
    right = T @ left
    return {
        "a": complex(a), "a_prime": 0j, "c": complex(right[0]), "c_prime": complex(right[1]),
        "mid_plus": complex(mid[0]), "mid_minus": complex(mid[1]), "k_mid": k_mid,
    }


def free_gaussian_evolution(x, t: float, x0: float = 0.0, sigma: float = 1.0, k0: float = 0.0):
    """e^{itΔ} applied to exp(-(x-x0)²/(2σ²) + i k0 x), in closed form.

    Solves i ψ_t = -ψ_xx. With s = σ² + 2it the solution is
    σ/√s · exp(-(x - x0 - 2 k0 t)²/(2s) + i k0 (x - x0) - i k0² t) · e^{i k0 x0}.
    """
    x = np.asarray(x, dtype=float)
    s = sigma * sigma + 2j * t
    shift = x - x0 - 2 * k0 * t
    return (sigma / np.sqrt(s)) * np.exp(-shift**2 / (2 * s) + 1j * k0 * x - 1j * k0 * k0 * t)


def classical_band_norms(f, h: float, symbols, p: float):
    """L^p norms of m(-Δ) f for each symbol m(λ), computed with the FFT.

    ``f`` is sampled on a uniform grid of spacing ``h`` and assumed to decay
    to zero at both ends (periodic wrap-around is then harmless).
    """
    f = np.asarray(f, dtype=complex)
    n = f.size
    fh = np.fft.fft(f)
    xi = 2 * np.pi * np.fft.fftfreq(n, d=h)
    lam = xi * xi
    out = []
    for m in symbols:
        g = np.fft.ifft(fh * m(lam))
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
        out.append(float(np.sum(w * np.abs(g) ** p) ** (1 / p)))
    return np.array(out)
