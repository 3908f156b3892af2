"""
Numerical checks of kernel decay, kernel sizes, the Hörmander integral
condition and multiplier bounds for functions of H.

Everything here measures constants; nothing is assumed about their size.
Acceptance is phrased as stability (under refinement) or uniformity
(across j or t) of the measured numbers.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import czt

from .besov import BesovParams, band_norms, combine, lp_norm
from .dyadic import DyadicSystem, build_system
from .eigen import BarrierPotential, _branch_data, eval_eigenfunction
from .symbols import Symbol, band, band_product, mikhlin_constant, product, sup_norm
from .transform import (GeneralizedFourier, Grids, SpatialGrid, SpectralGrid,
                        kernel_matrix)

__all__ = [
    "DecayFitReport",
    "HormanderReport",
    "KernelSizeReport",
    "MultiplierNormReport",
    "MultiplierSpec",
    "TruncationWarning",
    "envelope",
    "fit_derivative_decay",
    "fit_kernel_decay",
    "gaussian_family",
    "hormander_integral",
    "kernel_l2_sizes",
    "multiplier_operator_norm",
    "regime_of",
    "shift_count",
]


class TruncationWarning(UserWarning):
    """The ends of a truncated dyadic sum still carry a visible share."""


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True)
class MultiplierSpec:
    symbol: Symbol
    mikhlin_constant: float
    sup: float
    label: str

    @classmethod
    def from_symbol(cls, m: Symbol, label: str | None = None) -> "MultiplierSpec":
        """Measure sup|m| and sup|λ m'(λ)| on a log-spaced grid."""
        return cls(m, mikhlin_constant(m), sup_norm(m), label or m.label)

    def describe(self) -> dict:
        return {"label": self.label, "mikhlin_constant": self.mikhlin_constant, "sup": self.sup}


# ---------------------------------------------------------------- envelopes

def regime_of(j: int, pot: BarrierPotential, sys: DyadicSystem) -> str:
    if j == 0 and not sys.homogeneous:
        return "local"
    return "high" if j > pot.j_threshold else "low"


def shift_count(n: int) -> int:
    """N = smallest integer ≥ max(1, n/4)."""
    return max(1, math.ceil(n / 4))


def _shift_distances(x, y, regime, n):
    """Stack of |x ± y ± 2ℓ| over every term of the envelope sum."""
    x = np.asarray(x, float)[:, None]
    y = np.asarray(y, float)[None, :]
    if regime == "local":
        return [np.abs(x - y)]
    if regime == "low":
        return [np.abs(x - y), np.abs(x + y)]
    out = []
    for l in range(2 * shift_count(n) + 1):
        for s1 in (1, -1):
            for s2 in ((1, -1) if l else (1,)):
                out.append(np.abs(x + s1 * y + s2 * 2 * l))
    return out


def envelope(x, y, j: int, n: int, regime: str, *, derivative: bool = False) -> np.ndarray:
    """Bound profile of the kernel decay estimates, shape (len(x), len(y)).

    high:  Σ_{ℓ=0}^{2N} Σ_signs  P (1 + 2^{j/2}|x ± y ± 2ℓ|)^{-n}
    low:   Σ_±                   P (1 + 2^{j/2}|x ± y|)^{-n}
    local:                         (1 + |x - y|)^{-n}

    with P = 2^{j/2} for kernels and 2^j for x-derivatives.
    """
    if regime == "local":
        return (1 + _shift_distances(x, y, regime, n)[0]) ** -n
    scale = 2.0 ** (j / 2)
    pref = 2.0**j if derivative else scale
    return pref * sum((1 + scale * d) ** -n for d in _shift_distances(x, y, regime, n))


# ---------------------------------------------------------------- decay fits

@dataclass
class DecayFitReport:
    j: int
    n: int
    regime: str
    fitted_constant: float
    residual: float  # max |K| / envelope over the far field (scaled distance ≥ 4)
    shift_peaks_found: list  # [(x0, y, amplitude), ...]
    derivative: bool = False
    refined_constant: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def refinement_delta(self) -> float | None:
        if self.refined_constant is None:
            return None
        return abs(self.refined_constant - self.fitted_constant) / self.fitted_constant

    def to_json(self) -> str:
        d = asdict(self)
        d["refinement_delta"] = self.refinement_delta
        return json.dumps(d, sort_keys=True, default=float)

    def envelope_table(self) -> list:
        return self.meta.get("table", [])


def _kernel_symbol(j, sys):
    return band(sys, j)


def _free_profile(m: Symbol, s, sg: SpectralGrid, derivative: bool):
    """(2π)^{-1} ∫ m(ξ²) (iξ)^d e^{iξs} dξ on the nodes of ``sg``."""
    xi, w = sg.nodes, sg.weights
    wm = w * m(xi**2) / (2 * math.pi)
    if derivative:
        wm = wm * 1j * xi
    out = np.empty(s.size, complex)
    step = max(1, 4_000_000 // max(1, xi.size))
    for k in range(0, s.size, step):
        out[k:k + step] = np.exp(1j * np.outer(s[k:k + step], xi)) @ wm
    return out


def _free_kernel(m, grid: SpatialGrid, sg, derivative):
    """K_free(x_i, y_k) = k(x_i - y_k) for a uniform grid, via one 1-D profile."""
    n = grid.n_points
    s = grid.h * np.arange(-(n - 1), n)
    prof = _free_profile(m, s, sg, derivative)
    idx = np.arange(n)
    return prof[(idx[:, None] - idx[None, :]) + n - 1]


def _peaks(K, R, grid, j, n, regime, rows, thresh):
    x = grid.x
    lam = 2.0 ** (-j / 2) if regime != "local" else 1.0
    found = []
    for x0 in rows:
        i = int(np.argmin(np.abs(x - x0)))
        x0 = float(x[i])
        cands = {round(x0, 12)}
        if regime != "local":
            N = shift_count(n) if regime == "high" else 0
            for l in range(2 * N + 1):
                for s1 in (1, -1):
                    for s2 in (1, -1):
                        cands.add(round(s1 * x0 + s2 * 2 * l, 12))
        for yc in sorted(cands):
            if abs(yc) > grid.x_max:
                continue
            win = np.abs(x - yc) <= max(2 * lam, 2 * grid.h)
            if yc == round(x0, 12):
                amp = float(np.max(np.abs(K[i, win])))
            else:
                amp = float(np.max(np.abs(R[i, win])))
            if amp > thresh:
                found.append((x0, float(yc), amp))
    return found


def _fit(j, n, pot, sys, grid, sg, derivative, threads, peak_rows):
    regime = regime_of(j, pot, sys)
    m = _kernel_symbol(j, sys)
    if sg is None:
        sg = SpectralGrid.for_symbol(m, pot, grid.extent)
    km = kernel_matrix(m, grid, grid, sg, pot, derivative="x" if derivative else "",
                       threads=threads)
    K = km.values
    x = grid.x
    env = envelope(x, x, j, n, regime, derivative=derivative)
    ratio = np.abs(K) / env
    C = float(np.max(ratio))
    scale = 1.0 if regime == "local" else 2.0 ** (j / 2)
    dmin = np.min(np.stack(_shift_distances(x, x, regime, n)), axis=0) * scale
    far = dmin >= 4
    resid = float(np.max(ratio[far])) if np.any(far) else C
    Kf = _free_kernel(m, grid, sg, derivative)
    R = K - Kf
    kmax = float(np.max(np.abs(K)))
    peaks = _peaks(K, R, grid, j, n, regime, peak_rows, 1e-8 * kmax)
    meta = {"sup_abs_kernel": kmax, "free_residual": float(np.max(np.abs(R))) / kmax,
            "grid": grid.describe(), "spectral": sg.describe(),
            "argmax": [float(v) for v in np.unravel_index(int(np.argmax(ratio)), ratio.shape)]}
    return C, resid, peaks, meta, (x, K, env, ratio), sg


def _fit_report(j, n, pot, grid, sg, *, sys, derivative, refine, threads, peak_rows, table_row):
    if n not in (2, 4, 6):
        raise ValueError("n must be 2, 4 or 6")
    sys = sys or build_system("inhomogeneous")
    grid = grid or SpatialGrid.symmetric(6.0, 1 / 32)
    C, resid, peaks, meta, (x, K, env, ratio), sg = _fit(j, n, pot, sys, grid, sg, derivative,
                                                         threads, peak_rows)
    Cr = None
    if refine:
        Cr = _fit(j, n, pot, sys, grid.refined(refine), sg.refined(refine), derivative,
                  threads, ())[0]
    i = int(np.argmin(np.abs(x - table_row)))
    meta["table"] = [{"x": float(x[i]), "y": float(x[k]), "abs_kernel": float(abs(K[i, k])),
                      "envelope": float(env[i, k]), "ratio": float(ratio[i, k])}
                     for k in range(x.size)]
    return DecayFitReport(j, n, regime_of(j, pot, sys), C, resid, peaks, derivative, Cr, meta)


def fit_kernel_decay(j: int, n: int, pot: BarrierPotential, grid: SpatialGrid | None = None,
                     sg: SpectralGrid | None = None, *, sys: DyadicSystem | None = None,
                     refine: int = 1, threads: int = 1, peak_rows=(-2.5, 0.5, 2.5),
                     table_row: float = 0.5) -> DecayFitReport:
    """Fit |φ_j(H)(x,y)| against its decay envelope on ``grid`` × ``grid``.

    The fitted constant is max |K|/envelope. ``refine`` > 0 repeats the fit on
    a grid and quadrature refined 2^refine times. Shifted peaks are located in
    the residual K - K_free (K_free the translation-invariant ε = 0 kernel of the
    same symbol), so an ε = 0 run reports only the diagonal y = x.
    """
    return _fit_report(j, n, pot, grid, sg, sys=sys, derivative=False, refine=refine,
                       threads=threads, peak_rows=peak_rows, table_row=table_row)


def fit_derivative_decay(j: int, n: int, pot: BarrierPotential, grid: SpatialGrid | None = None,
                         sg: SpectralGrid | None = None, *, sys: DyadicSystem | None = None,
                         refine: int = 1, threads: int = 1, peak_rows=(-2.5, 0.5, 2.5),
                         table_row: float = 0.5) -> DecayFitReport:
    """As :func:`fit_kernel_decay` for ∂K/∂x, against the 2^j-scaled envelope."""
    return _fit_report(j, n, pot, grid, sg, sys=sys, derivative=True, refine=refine,
                       threads=threads, peak_rows=peak_rows, table_row=table_row)


def write_envelope_csv(report: DecayFitReport, path) -> None:
    rows = report.envelope_table()
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["x", "y", "abs_kernel", "envelope", "ratio"])
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) for k, v in r.items()})


# ---------------------------------------------------------------- kernel sizes

@dataclass
class KernelSizeReport:
    j: int
    lam: float
    size: float      # max_y ‖K_j(·,y)‖₂ · scale
    weighted: float  # max_y ‖z K_j(·,y)‖₂ · scale
    tail: float      # max_{y,t} ∫_{z>t} |K_j| dx · scale
    derivative: bool
    per_y: list = field(default_factory=list)

    def as_tuple(self):
        return self.size, self.weighted, self.tail


def _trap(f, x):
    return float(np.sum((f[1:] + f[:-1]) * np.diff(x)) / 2)


def kernel_l2_sizes(j: int, pot: BarrierPotential, *, m: Symbol | None = None,
                    sys: DyadicSystem | None = None, ys=(0.5, 2.0, 3.0),
                    derivative: bool = False, refine: int = 0, reach: float = 128.0,
                    threads: int = 1) -> KernelSizeReport:
    """λ-normalized sizes of K_j = (m·(φψ)_j)(H), λ = 2^{-j/2}, z = min|x ± y|.

    Kernels:      ‖K‖₂ λ^{1/2},      ‖zK‖₂ λ^{-1/2},  ∫_{z>t}|K| dx (t/λ)^{1/2}
    ∂_y kernels:  ‖∂K‖₂ λ^{3/2},     ‖z∂K‖₂ λ^{1/2},  ∫_{z>t}|∂K| dx (tλ)^{1/2}

    Each is maximized over ``ys`` and (for the tail) over t ∈ λ·{1, 2, 4, 8, 16}.
    The x-grid spans max|y| + 2 + ``reach``·λ with spacing min(1/32, λ/8).
    """
    sys = sys or build_system("homogeneous")
    lam = 2.0 ** (-j / 2)
    mj = band_product(sys, j) if m is None else product(m, band_product(sys, j))
    ys = np.asarray(ys, float)
    X = float(np.max(np.abs(ys))) + 2 + reach * lam
    h = min(1 / 32, lam / 8) / 2**refine
    grid = SpatialGrid.symmetric(X, h)
    x = grid.x
    sg = SpectralGrid.for_symbol(mj, pot, grid.extent, refine=refine)
    K = kernel_matrix(mj, x, ys, sg, pot, derivative="y" if derivative else "",
                      threads=threads).values
    if derivative:
        s_size, s_w = lam**1.5, lam**0.5
    else:
        s_size, s_w = lam**0.5, lam**-0.5
    per_y = []
    for k, y in enumerate(ys):
        a = np.abs(K[:, k])
        z = np.minimum(np.abs(x - y), np.abs(x + y))
        size = math.sqrt(_trap(a**2, x)) * s_size
        weighted = math.sqrt(_trap((z * a) ** 2, x)) * s_w
        tail = 0.0
        for t in lam * np.array([1, 2, 4, 8, 16]):
            integ = _trap(np.where(z > t, a, 0.0), x)
            norm = math.sqrt(t * lam) if derivative else math.sqrt(t / lam)
            tail = max(tail, integ * norm)
        per_y.append({"y": float(y), "size": size, "weighted": weighted, "tail": tail})
    return KernelSizeReport(j, lam, max(r["size"] for r in per_y),
                            max(r["weighted"] for r in per_y), max(r["tail"] for r in per_y),
                            derivative, per_y)


# ---------------------------------------------------------------- Hörmander

@dataclass
class HormanderReport:
    total: float
    terms: dict            # j -> ∫_{z>2t} |K_j(x,y) - K_j(x,ȳ)| dx
    normalized: dict       # j -> term / (dichotomy bound)
    j_range: tuple
    t: float
    y: float
    y_bar: float
    argmax_j: int | None
    crossover_ok: bool
    end_share: float
    truncated: bool
    methods: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["terms"] = {str(k): v for k, v in self.terms.items()}
        d["normalized"] = {str(k): v for k, v in self.normalized.items()}
        d["methods"] = {str(k): v for k, v in self.methods.items()}
        return json.dumps(d, sort_keys=True, default=float)


def default_j_range(t: float, pot: BarrierPotential) -> tuple[int, int]:
    """[min(J-8, j_t-8), max(J+12, j_t+12)] with 2^{j_t/2} t ≈ 1."""
    J = 0 if pot.free else int(pot.j_threshold)
    lo, hi = J - 8, J + 12
    if t > 0:
        jt = math.ceil(2 * math.log2(1 / t))
        lo, hi = min(lo, jt - 8), max(hi, jt + 12)
    return lo, hi


def doubled(j_range) -> tuple[int, int]:
    lo, hi = j_range
    half = math.ceil((hi - lo + 1) / 2)
    return lo - half, hi + half


def _segments(windows, cuts, excluded):
    """Merge windows, remove excluded open intervals, split at ``cuts``."""
    ws = sorted(windows)
    merged = []
    for a, b in ws:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    pieces = [tuple(p) for p in merged]
    for ea, eb in excluded:
        nxt = []
        for a, b in pieces:
            if b <= ea or a >= eb:
                nxt.append((a, b))
                continue
            if a < ea:
                nxt.append((a, ea))
            if b > eb:
                nxt.append((eb, b))
        pieces = nxt
    out = []
    for a, b in pieces:
        pts = sorted({a, b} | {c for c in cuts if a < c < b})
        out.extend(zip(pts[:-1], pts[1:]))
    return [(a, b) for a, b in out if b - a > 1e-14]


def _uniform(a, b, h):
    n = max(2, math.ceil((b - a) / h) + 1)
    return np.linspace(a, b, n)


def _outer_czt(mj, xi_lo, xi_hi, xs, ys, pot, period):
    """Kernel on a uniform x-set inside one outer region by a uniform-ξ trapezoid.

    For x on one side of the barrier, e(x, ξ) = α(ξ)e^{iξx} + β(ξ)e^{-iξx};
    each half of the ξ-sum is then a chirp-z transform in x. The band symbol
    vanishes smoothly at both ends, so the trapezoid is spectrally accurate
    once the ξ-spacing resolves every |x ± y| (the ``period``).
    """
    right = xs[0] + xs[-1] > 0
    n, h, x0 = xs.size, (xs[-1] - xs[0]) / max(1, xs.size - 1), xs[0]
    K = max(16, math.ceil((xi_hi - xi_lo) * period / (2 * math.pi)))
    d = (xi_hi - xi_lo) / K
    k = np.arange(K + 1)
    out = np.zeros((n, len(ys)), complex)
    for s in (1.0, -1.0):
        xi = s * (xi_lo + d * k)
        if pot.free:
            a, b = np.ones(xi.size, complex), np.zeros(xi.size, complex)
        else:
            bd = _branch_data(xi, pot)
            a = bd["alpha_r"] if right else bd["alpha_l"]
            b = bd["beta_r"] if right else bd["beta_l"]
        wm = d * mj(xi * xi) / (2 * math.pi)
        wm[0] *= 0.5
        wm[-1] *= 0.5
        ey = eval_eigenfunction(np.asarray(ys)[None, :], xi[:, None], pot).conj()
        for sig, coef in ((1.0, a), (-1.0, b)):
            if not np.any(coef):
                continue
            c = (wm * coef)[:, None] * ey * np.exp(1j * sig * s * d * k * x0)[:, None]
            sums = czt(c, m=n, w=np.exp(1j * sig * s * d * h), a=1.0, axis=0)
            out += np.exp(1j * sig * s * xi_lo * xs)[:, None] * sums
    return out


def _direct_profile(mj, xi_lo, xi_hi, s0, h, n, pot, right, period):
    """k(s) = (2π)^{-1} ∫ m_j(ξ²)(|α|² e^{iξs} + |β|² e^{-iξs}) dξ at s0 + h·[0, n).

    The part of K_j(x, y) for x, y on one side of the barrier that depends
    on x - y only; the remaining terms carry the reflection amplitude β.
    """
    K = max(16, math.ceil((xi_hi - xi_lo) * period / (2 * math.pi)))
    d = (xi_hi - xi_lo) / K
    k = np.arange(K + 1)
    ss = s0 + h * np.arange(n)
    out = np.zeros(n, complex)
    for s in (1.0, -1.0):
        xi = s * (xi_lo + d * k)
        if pot.free:
            a2, b2 = np.ones(xi.size), np.zeros(xi.size)
        else:
            bd = _branch_data(xi, pot)
            a2 = np.abs(bd["alpha_r"] if right else bd["alpha_l"]) ** 2
            b2 = np.abs(bd["beta_r"] if right else bd["beta_l"]) ** 2
        wm = d * mj(xi * xi) / (2 * math.pi)
        wm[0] *= 0.5
        wm[-1] *= 0.5
        for sig, coef in ((1.0, a2), (-1.0, b2)):
            if not np.any(coef):
                continue
            c = wm * coef * np.exp(1j * sig * s * d * k * s0)
            sums = czt(c, m=n, w=np.exp(1j * sig * s * d * h), a=1.0)
            out += np.exp(1j * sig * s * xi_lo * ss) * sums
    return out


def _hormander_term(mj, j, y, yb, pot, *, R, n_img, tier, refine, threads):
    t = abs(y - yb)
    lam = 2.0 ** (-j / 2)
    D = R * lam
    h = min(1 / 32, lam / 8) / 2**refine
    lo, hi = mj.support
    xi_lo, xi_hi = math.sqrt(lo), math.sqrt(hi)
    excluded = [(yb - 2 * t, yb + 2 * t), (-yb - 2 * t, -yb + 2 * t)]
    slices = [(c - 2 * t - D, c + 2 * t + D) for c in (yb, -yb)]
    if tier == "direct":
        right = yb > 0
        side = (1.0, math.inf) if right else (-math.inf, -1.0)
        segs = _segments(slices, [], excluded)
        segs = [(max(a, side[0]), min(b, side[1])) for a, b in segs]
        segs = [(a, b) for a, b in segs if b - a > 1e-14]
        total = 0.0
        for a, b in segs:
            xs = _uniform(a, b, h)
            hh = xs[1] - xs[0]
            span = max(abs(xs[0] - y), abs(xs[-1] - y), abs(xs[0] - yb), abs(xs[-1] - yb))
            period = 2 * span + 2000 * lam
            k1 = _direct_profile(mj, xi_lo, xi_hi, xs[0] - y, hh, xs.size, pot, right, period)
            k2 = _direct_profile(mj, xi_lo, xi_hi, xs[0] - yb, hh, xs.size, pot, right, period)
            total += _trap(np.abs(k1 - k2), xs)
        return total
    centers = [s * yb + 2 * l for s in (1, -1) for l in range(-2 * n_img, 2 * n_img + 1) if l]
    windows = slices + [(c - t - D, c + t + D) for c in centers]
    segs = _segments(windows, [-6.0, -1.0, 1.0, 6.0], excluded)
    total = 0.0
    for a, b in segs:
        mid = (a + b) / 2
        step = h if (abs(mid) <= 6 or lam < 1 / 4) else lam / 8 / 2**refine
        xs = _uniform(a, b, step)
        outer = a >= 1 or b <= -1
        if tier == "czt" and outer:
            X = max(abs(a), abs(b))
            period = 2 * (X + max(abs(y), abs(yb)) + 6) + 2000 * lam
            Kv = _outer_czt(mj, xi_lo, xi_hi, xs, [y, yb], pot, period)
        elif tier == "czt" and j > pot.j_threshold + 12:
            continue
        else:
            ext = max(abs(a), abs(b), abs(y), abs(yb))
            sg = SpectralGrid.for_symbol(mj, pot, ext, refine=refine)
            Kv = kernel_matrix(mj, xs, [y, yb], sg, pot, threads=threads).values
        total += _trap(np.abs(Kv[:, 0] - Kv[:, 1]), xs)
    return total


def _dichotomy(term, t, lam):
    if t == 0:
        return 0.0
    bound = math.sqrt(t / lam) if t <= lam else math.sqrt(lam / t)
    return term / bound


def hormander_integral(m: MultiplierSpec, y: float, y_bar: float, pot: BarrierPotential,
                       j_range=None, *, sys: DyadicSystem | None = None, R: float = 256.0,
                       refine: int = 0, threads: int = 1, tiers=None) -> HormanderReport:
    """Σ_j ∫_{z>2t} |K_j(x,y) - K_j(x,ȳ)| dx, K_j = (m·(φψ)_j)(H), z = min|x ± ȳ|.

    Each term is integrated over the slices ±ȳ ± [2t, 2t + Rλ] next to the
    excluded zone and over windows of half-width t + Rλ around the shifted
    images σȳ + 2ℓ, 0 < |ℓ| ≤ 2. Evaluation depends on j relative to J:

    * j < J + 4: Gauss-Legendre kernel assembly on every window;
    * J + 4 ≤ j ≤ J + 12: outer-region windows by a chirp-z trapezoid in ξ,
      the barrier region by Gauss-Legendre;
    * j > J + 12 (y, ȳ on one side of the barrier): only the x - y dependent
      part of the kernel on the slices. The omitted terms are of size
      ε²/ξ² ≤ 2^{-12} relative to the kept ones and decay like 2^{-j}.

    ``tiers`` maps j to "gl", "czt" or "direct" to force a path.
    """
    sys = sys or build_system("homogeneous")
    t = abs(y - y_bar)
    j_range = tuple(j_range) if j_range is not None else default_j_range(t, pot)
    J = 0 if pot.free else int(pot.j_threshold)
    same_side = (min(y, y_bar) > 1 or max(y, y_bar) < -1) or pot.free
    terms, methods = {}, {}
    for j in range(j_range[0], j_range[1] + 1):
        mj = product(m.symbol, band_product(sys, j))
        if tiers and j in tiers:
            tier = tiers[j]
        elif pot.free and same_side:
            tier = "direct"
        elif j < J + 4:
            tier = "gl"
        elif j > J + 12 and same_side:
            tier = "direct"
        else:
            tier = "czt"
        if t == 0:
            terms[j], methods[j] = 0.0, tier
            continue
        terms[j] = _hormander_term(mj, j, y, y_bar, pot, R=R, n_img=1, tier=tier,
                                   refine=refine, threads=threads)
        methods[j] = tier
    total = float(sum(terms.values()))
    normalized = {j: _dichotomy(v, t, 2.0 ** (-j / 2)) for j, v in terms.items()}
    js = sorted(terms)
    end = max(terms[js[0]], terms[js[-1]])
    share = end / total if total > 0 else 0.0
    truncated = share > 0.01
    if truncated:
        warnings.warn(f"end terms of j_range {j_range} carry {share:.2%} of the total",
                      TruncationWarning, stacklevel=2)
    argmax = max(js, key=lambda j: terms[j]) if total > 0 else None
    cross = argmax is not None and 0.25 <= 2.0 ** (argmax / 2) * t <= 4
    return HormanderReport(total, terms, normalized, j_range, t, y, y_bar, argmax, bool(cross),
                           float(share), bool(truncated), methods)


# ---------------------------------------------------------------- multipliers

def gaussian_family(scales=(0.4, 0.8, 1.6), shifts=(-2.5, 0.0, 1.0, 3.0),
                    modulations=(0.0, 2.5)):
    """Callables x ↦ exp(-(x-c)²/(2σ²)) e^{ikx} over the product of the parameters."""
    fam = []
    for sigma in scales:
        for c in shifts:
            for k in modulations:
                fam.append(((sigma, c, k),
                            lambda x, s=sigma, c=c, k=k: np.exp(-(x - c) ** 2 / (2 * s * s)
                                                                + 1j * k * x)))
    return fam


@dataclass
class MultiplierNormReport:
    p: float
    lp_ratio: float
    besov_ratio: float | None
    sup_m: float
    per_function: list
    besov: dict | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=float)


def multiplier_operator_norm(m: MultiplierSpec, p: float, test_family, pot: BarrierPotential,
                             grids: Grids, *, besov: BesovParams | None = None,
                             sys: DyadicSystem | None = None) -> MultiplierNormReport:
    """max over the family of ‖m(H)f‖_p/‖f‖_p, optionally also of the Besov ratio.

    ``test_family`` holds sample vectors on ``grids.spatial`` or callables of x.
    """
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    x = grids.spatial.x
    F = np.column_stack([np.asarray(f(x) if callable(f) else f, dtype=complex)
                         for f in test_family])
    gf = GeneralizedFourier(grids.spatial, grids.spectral, pot)
    Ff = gf.forward(F)
    mk = m.symbol(gf.xi**2)[:, None]
    G = gf.adjoint(mk * Ff)
    w = grids.spatial.weights
    per = []
    for k in range(F.shape[1]):
        per.append(lp_norm(G[:, k], w, p) / lp_norm(F[:, k], w, p))
    bratio = None
    if besov is not None:
        sys = sys or build_system("inhomogeneous")
        nf = combine(band_norms(None, besov, sys, pot, grids, Ff=Ff, gf=gf), besov)
        ng = combine(band_norms(None, besov, sys, pot, grids, Ff=mk * Ff, gf=gf), besov)
        bratio = float(np.max(ng / nf))
    return MultiplierNormReport(p, float(max(per)), bratio, m.sup, per,
                                besov.describe() if besov else None)
