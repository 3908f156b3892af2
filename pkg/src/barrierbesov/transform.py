"""
Generalized Fourier transform of H and functions of H on grids.

    F f(ξ)   = (2π)^{-1/2} ∫ f(x) conj(e(x, ξ)) dx       trapezoid in x
    F* g(x)  = (2π)^{-1/2} ∫ g(ξ) e(x, ξ) dξ              Gauss-Legendre panels in ξ
    m(H) f   = F* m(ξ²) F f
    m(H)(x, y) = (2π)^{-1} ∫ m(ξ²) e(x, ξ) conj(e(y, ξ)) dξ

ξ-panels never straddle 0 or ±ε, and each panel carries at least
20 + ⌈10 (ξ_hi - ξ_lo) X / π⌉ (+ ⌈t ξ_hi² / π⌉ for propagators) nodes,
X being the largest |x| involved plus 2.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import roots_legendre

from .eigen import BarrierPotential, eval_eigenfunction, eval_eigenfunction_dx
from .symbols import Symbol

__all__ = [
    "AliasingWarning",
    "GeneralizedFourier",
    "Grids",
    "KernelMatrix",
    "ResolutionError",
    "SpatialGrid",
    "SpectralGrid",
    "adjoint",
    "apply_symbol",
    "forward",
    "kernel_matrix",
    "node_rule",
]

_CHUNK = 2_000_000  # complex entries per eigenfunction block
_ROWS = 256


class ResolutionError(RuntimeError):
    """The ξ-quadrature cannot resolve the oscillation of the integrand."""


class AliasingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    x_max: float
    n_points: int
    validate: bool = True

    def __post_init__(self):
        if self.validate:
            if self.n_points < 64:
                raise ValueError("a spatial grid needs at least 64 points")
            if self.x_min > -3 or self.x_max < 3:
                raise ValueError("grid must contain [-3, 3] (barrier plus margin 2)")

    @classmethod
    def symmetric(cls, half_width: float, spacing: float) -> "SpatialGrid":
        """Grid on [-L, L] with ±1 (and every multiple of ``spacing``) on nodes."""
        n = int(round(half_width / spacing))
        return cls(-n * spacing, n * spacing, 2 * n + 1)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def extent(self) -> float:
        return max(abs(self.x_min), abs(self.x_max))

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = self.h / 2
        return w

    def refined(self, k: int = 1) -> "SpatialGrid":
        return SpatialGrid(self.x_min, self.x_max, (self.n_points - 1) * 2**k + 1, self.validate)

    def describe(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


def node_rule(lo: float, hi: float, x_extent: float, time: float = 0.0) -> int:
    X = x_extent + 2.0
    n = 20 + math.ceil(10 * (hi - lo) * X / math.pi)
    if time:
        n += math.ceil(abs(time) * max(lo * lo, hi * hi) / math.pi)
    return n


@lru_cache(maxsize=256)
def _gauss(n: int):
    x, w = roots_legendre(n)
    return x, w


@dataclass(frozen=True)
class SpectralGrid:
    panels: tuple  # ((lo, hi, n), ...), ordered by lo
    excludes_origin: bool = True
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs, ws = [], []
        for lo, hi, n in self.panels:
            if lo < 0 < hi:
                raise ValueError(f"panel ({lo}, {hi}) straddles the origin")
            t, w = _gauss(int(n))
            half = (hi - lo) / 2
            xs.append(lo + half * (t + 1))
            ws.append(half * w)
        object.__setattr__(self, "nodes", np.concatenate(xs) if xs else np.zeros(0))
        object.__setattr__(self, "weights", np.concatenate(ws) if ws else np.zeros(0))

    @classmethod
    def build(cls, pot: BarrierPotential, x_extent: float, xi_max: float | None = None, *,
              intervals=None, time: float = 0.0, breaks=(), refine: int = 0,
              panel_width: float | None = None, origin_levels: int = 0) -> "SpectralGrid":
        """Panels covering ±``intervals`` (ranges of |ξ|), mirrored to ξ < 0.

        Breakpoints: interval ends, ε, and any |ξ| in ``breaks``.
        ``refine`` multiplies every node count by 2^refine.
        """
        if intervals is None:
            if xi_max is None:
                raise ValueError("give xi_max or intervals")
            intervals = [(0.0, xi_max)]
        X = x_extent + 2.0
        width = panel_width or max(0.05, min(2.0, 12 * math.pi / X))
        cuts_extra = set(float(b) for b in breaks)
        if not pot.free:
            cuts_extra.add(pot.epsilon)
        pos = []
        for a, b in intervals:
            if not 0 <= a < b:
                raise ValueError(f"bad interval ({a}, {b})")
            cuts = sorted({a, b} | {c for c in cuts_extra if a < c < b})
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                k = max(1, math.ceil((hi - lo) / width - 1e-9))
                edges = np.linspace(lo, hi, k + 1)
                pieces = list(zip(edges[:-1], edges[1:]))
                if lo == 0 and origin_levels:
                    first_hi = pieces[0][1]
                    grade = [first_hi * 2.0**-i for i in range(origin_levels, -1, -1)]
                    pieces = [(0.0, grade[0])] + list(zip(grade[:-1], grade[1:])) + pieces[1:]
                pos.extend(pieces)
        panels = []
        for lo, hi in pos:
            n = node_rule(lo, hi, x_extent, time) * 2**refine
            panels.append((-float(hi), -float(lo), n))
            panels.append((float(lo), float(hi), n))
        panels.sort()
        return cls(tuple(panels))

    @classmethod
    def for_symbol(cls, m: Symbol, pot: BarrierPotential, x_extent: float,
                   xi_max: float | None = None, **kw) -> "SpectralGrid":
        if m.support is not None:
            lo, hi = m.support
            a, b = math.sqrt(max(lo, 0.0)), math.sqrt(hi)
            if xi_max is not None:
                b = min(b, xi_max)
            brk = [math.sqrt(v) for v in m.breaks if v > 0] + list(kw.pop("breaks", ()))
            return cls.build(pot, x_extent, intervals=[(a, b)], breaks=brk, **kw)
        return cls.build(pot, x_extent, xi_max, **kw)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def xi_max(self) -> float:
        return max(max(abs(lo), abs(hi)) for lo, hi, _ in self.panels)

    def coverage(self) -> list:
        """Merged |ξ| ranges covered on the positive side."""
        spans = sorted((lo, hi) for lo, hi, _ in self.panels if lo >= 0)
        merged = []
        for lo, hi in spans:
            if merged and lo <= merged[-1][1] + 1e-12:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [tuple(m) for m in merged]

    def covers(self, a: float, b: float) -> bool:
        return any(lo <= a + 1e-12 and b <= hi + 1e-12 for lo, hi in self.coverage())

    def check(self, x_extent: float, time: float = 0.0) -> None:
        for lo, hi, n in self.panels:
            need = node_rule(abs(lo), abs(hi), x_extent, time) if lo >= 0 else \
                node_rule(abs(hi), abs(lo), x_extent, time)
            if n < need:
                raise ResolutionError(
                    f"panel ({lo:.4g}, {hi:.4g}) has {n} nodes, needs {need} for |x| <= {x_extent:.4g}"
                    + (f" and t = {time}" if time else ""))

    def refined(self, k: int = 1) -> "SpectralGrid":
        return SpectralGrid(tuple((lo, hi, n * 2**k) for lo, hi, n in self.panels))

    def digest(self) -> str:
        text = json.dumps([[round(lo, 12), round(hi, 12), n] for lo, hi, n in self.panels])
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def describe(self) -> dict:
        return {"n_panels": len(self.panels), "n_nodes": self.size, "xi_max": self.xi_max,
                "digest": self.digest()}


def _eig_block(x, xi, pot, deriv=False):
    fn = eval_eigenfunction_dx if deriv else eval_eigenfunction
    return fn(np.asarray(x)[:, None], np.asarray(xi)[None, :], pot)


class GeneralizedFourier:
    """F, F* and m(H) for one spatial point set and one spectral grid.

    The eigenfunction matrix e(x_i, ξ_k) is cached when it has at most
    ``cache_limit`` entries, otherwise it is rebuilt in blocks on each call.
    """

    def __init__(self, grid, sg: SpectralGrid, pot: BarrierPotential, *,
                 cache_limit: float = 1.2e7, check: bool = True, time: float = 0.0):
        if isinstance(grid, SpatialGrid):
            self.x = grid.x
            self.wx = grid.weights
        else:
            self.x = np.asarray(grid, dtype=float)
            self.wx = None
        self.sg = sg
        self.pot = pot
        if check:
            sg.check(float(np.max(np.abs(self.x))), time)
        self._E = None
        self._cache = self.x.size * sg.size <= cache_limit
        self._norm = 1 / math.sqrt(2 * math.pi)

    @property
    def xi(self):
        return self.sg.nodes

    def _blocks(self, x=None):
        x = self.x if x is None else x
        if x is self.x and self._cache:
            if self._E is None:
                self._E = _eig_block(self.x, self.sg.nodes, self.pot)
            yield slice(None), self._E
            return
        step = max(1, _CHUNK // max(1, x.size))
        for k0 in range(0, self.sg.size, step):
            sl = slice(k0, k0 + step)
            yield sl, _eig_block(x, self.sg.nodes[sl], self.pot)

    def forward(self, f) -> np.ndarray:
        if self.wx is None:
            raise ValueError("forward transform needs a SpatialGrid (trapezoid weights)")
        f = np.asarray(f, dtype=complex)
        edge = np.max(np.abs(np.stack([f[0], f[-1]])))
        scale = max(float(np.max(np.abs(f))), 1e-300)
        if edge > 1e-10 * scale:
            warnings.warn(f"f is {edge / scale:.2e} of its maximum at the grid ends; "
                          "the transform may alias", AliasingWarning, stacklevel=2)
        wf = self.wx.reshape((-1,) + (1,) * (f.ndim - 1)) * f
        out = np.empty((self.sg.size,) + f.shape[1:], dtype=complex)
        for sl, E in self._blocks():
            out[sl] = E.conj().T @ wf
        return self._norm * out

    def adjoint(self, g, x=None) -> np.ndarray:
        g = np.asarray(g, dtype=complex)
        wg = self.sg.weights.reshape((-1,) + (1,) * (g.ndim - 1)) * g
        xs = self.x if x is None else np.asarray(x, dtype=float)
        out = np.zeros((xs.size,) + g.shape[1:], dtype=complex)
        for sl, E in self._blocks(None if x is None else xs):
            out += E @ wg[sl]
        return self._norm * out

    def apply(self, m, f=None, *, Ff=None, x=None) -> np.ndarray:
        """m(H) f = F* m(ξ²) F f; pass ``Ff`` to reuse a forward transform."""
        if Ff is None:
            Ff = self.forward(f)
        mk = np.asarray(m(self.sg.nodes**2))
        return self.adjoint(mk.reshape((-1,) + (1,) * (Ff.ndim - 1)) * Ff, x=x)


def forward(f, grid: SpatialGrid, sg: SpectralGrid, pot: BarrierPotential) -> np.ndarray:
    return GeneralizedFourier(grid, sg, pot).forward(f)


def adjoint(g, grid, sg: SpectralGrid, pot: BarrierPotential) -> np.ndarray:
    return GeneralizedFourier(grid, sg, pot).adjoint(g)


def apply_symbol(m, f, grid: SpatialGrid, sg: SpectralGrid, pot: BarrierPotential) -> np.ndarray:
    return GeneralizedFourier(grid, sg, pot).apply(m, f)


@dataclass
class KernelMatrix:
    values: np.ndarray
    x: np.ndarray
    y: np.ndarray
    symbol: str
    grid_digest: str
    derivative: str = ""  # "", "x" or "y"

    def hermitian_residual(self) -> float:
        if self.x.shape != self.y.shape or not np.array_equal(self.x, self.y):
            raise ValueError("Hermitian check needs identical x and y grids")
        scale = max(float(np.max(np.abs(self.values))), 1e-300)
        return float(np.max(np.abs(self.values - self.values.conj().T)) / scale)

    def reflection_residual(self) -> float:
        """max |K(x,y) - K(-x,-y)| / max |K|, grids must be symmetric about 0."""
        if not (np.allclose(self.x, -self.x[::-1]) and np.allclose(self.y, -self.y[::-1])):
            raise ValueError("reflection check needs grids symmetric about 0")
        scale = max(float(np.max(np.abs(self.values))), 1e-300)
        return float(np.max(np.abs(self.values - self.values[::-1, ::-1])) / scale)

    def to_csv(self, path) -> None:
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        table = np.column_stack([X.ravel(), Y.ravel(), self.values.real.ravel(),
                                 self.values.imag.ravel()])
        np.savetxt(path, table, delimiter=",", header="x,y,re,im", comments="", fmt="%.17g")

    def to_binary(self, path) -> None:
        """Row-major complex64 pairs plus ``<path>.json`` describing grids and symbol."""
        path = Path(path)
        self.values.astype(np.complex64).tofile(path)
        meta = {"shape": list(self.values.shape), "dtype": "complex64", "order": "C",
                "x": self.x.tolist(), "y": self.y.tolist(), "symbol": self.symbol,
                "grid_digest": self.grid_digest, "derivative": self.derivative}
        path.with_name(path.name + ".json").write_text(json.dumps(meta))

    @classmethod
    def from_binary(cls, path) -> "KernelMatrix":
        path = Path(path)
        meta = json.loads(path.with_name(path.name + ".json").read_text())
        vals = np.fromfile(path, dtype=np.complex64).reshape(meta["shape"]).astype(complex)
        return cls(vals, np.array(meta["x"]), np.array(meta["y"]), meta["symbol"],
                   meta["grid_digest"], meta["derivative"])


def kernel_matrix(m, xgrid, ygrid, sg: SpectralGrid, pot: BarrierPotential, *,
                  derivative: str = "", threads: int = 1, check: bool = True) -> KernelMatrix:
    """Assemble (2π)^{-1} Σ_k w_k m(ξ_k²) e(x_i, ξ_k) conj(e(y_j, ξ_k)).

    ``derivative`` = "x" or "y" differentiates the corresponding factor under
    the integral. Rows are split into fixed blocks so the result does not
    depend on ``threads``.
    """
    x = xgrid.x if isinstance(xgrid, SpatialGrid) else np.atleast_1d(np.asarray(xgrid, float))
    y = ygrid.x if isinstance(ygrid, SpatialGrid) else np.atleast_1d(np.asarray(ygrid, float))
    if check:
        sg.check(float(max(np.max(np.abs(x)), np.max(np.abs(y)))))
        if isinstance(m, Symbol) and m.support is not None:
            lo, hi = m.support
            if not sg.covers(math.sqrt(max(lo, 0.0)), math.sqrt(hi)):
                raise ValueError(f"symbol support {m.support} is not covered by the spectral grid")
    xi = sg.nodes
    wm = sg.weights * np.asarray(m(xi**2)) / (2 * math.pi)
    keep = wm != 0
    xi, wm = xi[keep], wm[keep]
    step = max(1, _CHUNK // max(1, max(x.size, y.size)))
    ey_blocks = []
    for k0 in range(0, xi.size, step):
        sl = slice(k0, k0 + step)
        ey_blocks.append((sl, _eig_block(y, xi[sl], pot, derivative == "y").conj()))

    def rows(r0):
        xr = x[r0:r0 + _ROWS]
        acc = np.zeros((xr.size, y.size), dtype=complex)
        for sl, ey in ey_blocks:
            ex = _eig_block(xr, xi[sl], pot, derivative == "x")
            acc += (ex * wm[sl]) @ ey.T
        return acc

    starts = list(range(0, x.size, _ROWS))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(rows, starts))
    else:
        parts = [rows(r0) for r0 in starts]
    values = np.concatenate(parts, axis=0) if parts else np.zeros((0, y.size), complex)
    label = getattr(m, "label", "m")
    return KernelMatrix(values, x, y, label, sg.digest(), derivative)


@dataclass(frozen=True)
class Grids:
    """A spatial grid paired with the spectral grid used on it."""

    spatial: SpatialGrid
    spectral: SpectralGrid

    @classmethod
    def for_bands(cls, pot: BarrierPotential, sys, j_lo: int, j_hi: int, *,
                  half_width: float = 12.0, spacing: float = 1 / 32, refine: int = 0,
                  time: float = 0.0) -> "Grids":
        """Grids covering every band φ_j(ξ²), j_lo ≤ j ≤ j_hi, of ``sys``.

        Panels break at all band edges so each smooth transition sits in its
        own panels; homogeneous systems get dyadic panels down to the
        lowest band.
        """
        spatial = SpatialGrid.symmetric(half_width, spacing / 2**refine)
        a, b, _ = sys.params
        xi_max = math.sqrt(2.0**j_hi * b)
        breaks = set()
        for j in range(j_lo, j_hi + 1):
            if j == 0 and not sys.homogeneous:
                breaks.update((math.sqrt(a), math.sqrt(b)))
            else:
                breaks.update(math.sqrt(2.0**j * v) for v in (a / 2, b / 2, a, b))
        levels = 0
        if sys.homogeneous:
            levels = max(0, math.ceil(-j_lo / 2) + 2)
        spectral = SpectralGrid.build(pot, spatial.extent, xi_max, breaks=sorted(breaks),
                                      refine=refine, time=time, origin_levels=levels)
        return cls(spatial, spectral)

    def refined(self, k: int = 1) -> "Grids":
        return Grids(self.spatial.refined(k), self.spectral.refined(k))

    def describe(self) -> dict:
        return {"spatial": self.spatial.describe(), "spectral": self.spectral.describe()}
