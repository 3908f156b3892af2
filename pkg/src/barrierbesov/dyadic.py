"""
Smooth dyadic systems (Φ, φ, Ψ, ψ).

Every family is built from a smooth step U: U = 1 on |ξ| ≤ a, U = 0 on
|ξ| ≥ b, with ``1/2 ≤ a < 3/4`` and ``7/8 < b ≤ 1``. The band is the
telescoping difference u(ξ) = U(ξ) - U(2ξ), supported in a/2 ≤ |ξ| ≤ b,
so that

    U(ξ) + Σ_{j≥1} u(2^{-j} ξ) = 1        (inhomogeneous)
    Σ_{j∈ℤ} u(2^{-j} ξ) = 1,   ξ ≠ 0      (homogeneous)

hold identically. The pairs are split as φ = u^γ, ψ = u^{1-γ} and
Φ = U^γ, Ψ = U^{1-γ}; γ = 1/2 gives a self-dual system.

The step is the ratio of flat functions g(s) = exp(-s^{-(k-1)}) with
k = ``smoothness_order`` (k = 2 is the classical exp(-1/s)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FAMILIES",
    "ConstructionError",
    "DyadicSystem",
    "SystemReport",
    "build_system",
    "check_system",
    "eval_band",
]

# family_id -> (a, b, gamma)
FAMILIES = {
    "exp": (0.5, 1.0, 0.5),
    "split": (0.5, 1.0, 0.7),
    "steep": (0.6, 0.92, 0.3),
}

HEAD_ZONE = 0.5
BAND_ZONE = (3 / 8, 7 / 8)
BAND_SUPPORT = (0.25, 1.0)


class ConstructionError(ValueError):
    pass


def _flat(s, order):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-s[pos] ** -(order - 1))
    return out


def _step(s, order):
    """Smooth step: 1 for s ≤ 0, 0 for s ≥ 1, C^∞ in between."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    g0 = _flat(1 - s, order)
    g1 = _flat(s, order)
    return g0 / (g0 + g1)


@dataclass(frozen=True)
class DyadicSystem:
    kind: str
    family_id: str
    smoothness_order: int = 2
    j_range: tuple[int, int] | None = None  # homogeneous truncation, None = automatic
    lower_bounds: dict = field(default_factory=dict, compare=False)

    @property
    def params(self):
        return FAMILIES[self.family_id]

    @property
    def homogeneous(self) -> bool:
        return self.kind == "homogeneous"

    def U(self, xi):
        a, b, _ = self.params
        return _step((np.abs(xi) - a) / (b - a), self.smoothness_order)

    def u(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.maximum(self.U(xi) - self.U(2 * xi), 0.0)

    def phi0(self, xi):
        return self.U(xi) ** self.params[2]

    def psi0(self, xi):
        return self.U(xi) ** (1 - self.params[2])

    def band(self, xi):
        return self.u(xi) ** self.params[2]

    def psiband(self, xi):
        return self.u(xi) ** (1 - self.params[2])

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "family_id": self.family_id,
            "smoothness_order": self.smoothness_order,
            "j_range": list(self.j_range) if self.j_range else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DyadicSystem":
        d = json.loads(text)
        jr = tuple(d["j_range"]) if d.get("j_range") else None
        return build_system(d["kind"], d["family_id"], d["smoothness_order"], j_range=jr)

    def band_support(self, j: int) -> tuple[float, float]:
        """Support of φ_j in the variable it is applied to (λ for φ_j(H))."""
        a, b, _ = self.params
        if j == 0 and not self.homogeneous:
            return (0.0, b)
        return (2.0**j * a / 2, 2.0**j * b)

    def partition(self, xi, j_lo=None, j_hi=None):
        """Φ Ψ + Σ φ_j ψ_j at ``xi`` (homogeneous: Σ_{j_lo}^{j_hi} φ_j ψ_j)."""
        xi = np.asarray(xi, dtype=float)
        ax = np.abs(xi)
        top = math.ceil(math.log2(max(float(ax.max(initial=1.0)), 1.0))) + 3
        if self.homogeneous:
            if j_lo is None:
                nz = ax[ax > 0]
                j_lo = math.floor(math.log2(float(nz.min()))) - 2 if nz.size else -2
            j_hi = top if j_hi is None else j_hi
            total = np.zeros_like(xi)
        else:
            j_lo = 1
            j_hi = top if j_hi is None else j_hi
            total = self.phi0(xi) * self.psi0(xi)
        for j in range(j_lo, j_hi + 1):
            s = xi * 2.0**-j
            total = total + self.band(s) * self.psiband(s)
        return total


def build_system(kind: str = "inhomogeneous", family_id: str = "exp",
                 smoothness_order: int = 2, j_range=None) -> DyadicSystem:
    """Construct a dyadic system and record its realized lower-bound constants."""
    if kind not in ("inhomogeneous", "homogeneous"):
        raise ValueError(f"unknown kind {kind!r}")
    if family_id not in FAMILIES:
        raise ValueError(f"unknown family {family_id!r}; choose from {sorted(FAMILIES)}")
    if smoothness_order < 2:
        raise ValueError("smoothness_order must be >= 2")
    sys = DyadicSystem(kind, family_id, int(smoothness_order), j_range)
    bounds = _lower_bounds(sys)
    if min(bounds.values()) < 1e-8:
        raise ConstructionError(f"lower bound too small for family {family_id!r}: {bounds}")
    object.__setattr__(sys, "lower_bounds", bounds)
    return sys


def _lower_bounds(sys, n=4001):
    zone = np.linspace(*BAND_ZONE, n)
    out = {"band": float(np.min(sys.band(zone))), "psiband": float(np.min(sys.psiband(zone)))}
    if not sys.homogeneous:
        head = np.linspace(0, HEAD_ZONE, n)
        out["phi0"] = float(np.min(sys.phi0(head)))
        out["psi0"] = float(np.min(sys.psi0(head)))
    return out


def eval_band(sys: DyadicSystem, j: int, xi):
    """φ_j(ξ) = φ(2^{-j} ξ); j = 0 selects Φ for inhomogeneous systems."""
    if j == 0 and not sys.homogeneous:
        return sys.phi0(xi)
    if j < 0 and not sys.homogeneous:
        raise ValueError("negative j only exists for homogeneous systems")
    return sys.band(np.asarray(xi, dtype=float) * 2.0**-j)


def eval_dual(sys: DyadicSystem, j: int, xi):
    if j == 0 and not sys.homogeneous:
        return sys.psi0(xi)
    return sys.psiband(np.asarray(xi, dtype=float) * 2.0**-j)


@dataclass
class SystemReport:
    support_band: tuple[float, float]
    support_head: float | None
    lower_bounds: dict
    partition_deviation: float
    support_ok: bool
    lower_bound_ok: bool
    partition_ok: bool

    @property
    def ok(self) -> bool:
        return self.support_ok and self.lower_bound_ok and self.partition_ok


def check_system(sys: DyadicSystem, probe_count: int = 10_000, seed: int = 0,
                 corrupt: float = 1.0, xi_max: float = 64.0) -> SystemReport:
    """Measure supports, lower bounds and partition defect on random probes.

    ``corrupt`` scales φ (not ψ) before the partition is summed; it exists
    to demonstrate that the check fails when (iii) is broken.
    """
    if probe_count < 100:
        raise ValueError("probe_count must be >= 100")
    rng = np.random.default_rng(seed)
    probes = rng.uniform(-xi_max, xi_max, probe_count)
    breaks = np.array([2.0**j * c for j in range(-3, int(math.log2(xi_max)) + 1)
                       for c in (0.25, 0.5, 1.0)])
    probes = np.concatenate([probes, breaks, -breaks, [0.0]])
    if sys.homogeneous:
        probes = probes[probes != 0]

    fine = np.linspace(0, 1.5, 30001)
    nz = fine[sys.band(fine) > 0]
    support_band = (float(nz.min()), float(nz.max()))
    support_ok = BAND_SUPPORT[0] <= support_band[0] and support_band[1] <= BAND_SUPPORT[1]
    support_head = None
    if not sys.homogeneous:
        support_head = float(fine[sys.phi0(fine) > 0].max())
        support_ok = support_ok and support_head <= 1.0

    bounds = _lower_bounds(sys)
    if corrupt != 1.0:
        total = _corrupted_partition(sys, probes, corrupt)
    else:
        total = sys.partition(probes)
    dev = float(np.max(np.abs(total - 1.0)))
    return SystemReport(
        support_band=support_band,
        support_head=support_head,
        lower_bounds=bounds,
        partition_deviation=dev,
        support_ok=bool(support_ok),
        lower_bound_ok=min(bounds.values()) >= 1e-8,
        partition_ok=dev <= 1e-12,
    )


def _corrupted_partition(sys, xi, scale):
    ax = np.abs(xi)
    top = math.ceil(math.log2(max(float(ax.max()), 1.0))) + 3
    if sys.homogeneous:
        nz = ax[ax > 0]
        lo = math.floor(math.log2(float(nz.min()))) - 2
        total = np.zeros_like(xi)
    else:
        lo = 1
        total = sys.phi0(xi) * sys.psi0(xi)
    for j in range(lo, top + 1):
        s = xi * 2.0**-j
        total = total + scale * sys.band(s) * sys.psiband(s)
    return total
