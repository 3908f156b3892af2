"""Spectral symbols m(λ), λ = ξ² ≥ 0, used with functions of H."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dyadic import DyadicSystem, eval_band, eval_dual


@dataclass(frozen=True)
class Symbol:
    """A function of the energy λ with optional compact support [lo, hi]."""

    fn: Callable
    support: tuple[float, float] | None = None
    label: str = "m"
    breaks: tuple[float, ...] = ()  # λ-values where m is not analytic

    def __call__(self, lam):
        return self.fn(np.asarray(lam, dtype=float))

    def __mul__(self, other: "Symbol") -> "Symbol":
        return product(self, other)


def constant(c: complex = 1.0) -> Symbol:
    return Symbol(lambda lam: np.full(lam.shape, c, dtype=complex), None, f"const({c})")


def band(sys: DyadicSystem, j: int) -> Symbol:
    """φ_j(λ)."""
    lo, hi = sys.band_support(j)
    return Symbol(lambda lam: eval_band(sys, j, lam), (lo, hi), f"phi_{j}[{sys.family_id}]",
                  _band_breaks(sys, j))


def dual_band(sys: DyadicSystem, j: int) -> Symbol:
    """ψ_j(λ)."""
    lo, hi = sys.band_support(j)
    return Symbol(lambda lam: eval_dual(sys, j, lam), (lo, hi), f"psi_{j}[{sys.family_id}]",
                  _band_breaks(sys, j))


def band_product(sys: DyadicSystem, j: int) -> Symbol:
    """(φψ)_j(λ)."""
    lo, hi = sys.band_support(j)
    return Symbol(lambda lam: eval_band(sys, j, lam) * eval_dual(sys, j, lam), (lo, hi),
                  f"phipsi_{j}[{sys.family_id}]", _band_breaks(sys, j))


def _band_breaks(sys, j):
    a, b, _ = sys.params
    scale = 2.0**j
    if j == 0 and not sys.homogeneous:
        return (a, b)
    return tuple(scale * v for v in (a / 2, b / 2, a, b))


def product(m1: Symbol, m2: Symbol) -> Symbol:
    if m1.support is None:
        sup = m2.support
    elif m2.support is None:
        sup = m1.support
    else:
        sup = (max(m1.support[0], m2.support[0]), min(m1.support[1], m2.support[1]))
    return Symbol(lambda lam: m1(lam) * m2(lam), sup, f"{m1.label}*{m2.label}",
                  tuple(sorted(set(m1.breaks) | set(m2.breaks))))


def propagator(t: float) -> Symbol:
    """λ ↦ e^{-itλ}."""
    return Symbol(lambda lam: np.exp(-1j * t * lam), None, f"exp(-i{t}H)")


def imaginary_power(tau: float) -> Symbol:
    """λ ↦ λ^{iτ}, with the value 1 at λ = 0."""
    def fn(lam):
        out = np.ones(lam.shape, dtype=complex)
        pos = lam > 0
        out[pos] = np.exp(1j * tau * np.log(lam[pos]))
        return out
    return Symbol(fn, None, f"lambda^(i{tau})")


def saturating() -> Symbol:
    """λ ↦ λ/(1+λ)."""
    return Symbol(lambda lam: lam / (1 + lam) + 0j, None, "lambda/(1+lambda)")


def mikhlin_constant(m: Symbol, lam_min: float = 1e-4, lam_max: float = 1e4,
                     n: int = 2001, rel_step: float = 1e-5) -> float:
    """sup |λ m'(λ)| by central differences on a log-spaced λ grid."""
    lam = np.logspace(math.log10(lam_min), math.log10(lam_max), n)
    d = lam * rel_step
    deriv = (m(lam + d) - m(lam - d)) / (2 * d)
    return float(np.max(np.abs(lam * deriv)))


def sup_norm(m: Symbol, lam_max: float = 1e4, n: int = 20001) -> float:
    lam = np.concatenate([[0.0], np.logspace(-6, math.log10(lam_max), n)])
    return float(np.max(np.abs(m(lam))))
