"""
Command line front end.

    barrierbesov <command> [--config run.json] [flags] [--out DIR]

Every run writes ``report.json`` (resolved config, its hash, results,
invariant checks, diagnostics) and CSV tables into ``--out``. Exit codes:
0 all invariants hold, 2 an invariant failed, 3 a resolution or truncation
diagnostic was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import besov as B
from . import evolve as E
from . import verify as Vf
from .dyadic import build_system, eval_band
from .eigen import BarrierPotential, coefficients, eigen_residual, eval_eigenfunction
from .oracles import classical_band_norms, transfer_matrix_coefficients
from .symbols import band, constant, imaginary_power, saturating
from .transform import Grids, ResolutionError, SpatialGrid, SpectralGrid, kernel_matrix

EXIT_OK, EXIT_INVARIANT, EXIT_DIAGNOSTIC = 0, 2, 3

# flag name -> (section, key)
SECTIONS = {
    "epsilon": "potential", "free": "potential",
    "half_width": "grid", "spacing": "grid", "refine": "grid",
    "family": "system", "smoothness": "system", "kind": "system",
    "seed": "run",
}

DEFAULTS = {
    "potential": {"epsilon": 1.0, "free": False},
    "grid": {"half_width": None, "spacing": 1 / 32, "refine": 0},
    "system": {"family": "exp", "smoothness": 2, "kind": "inhomogeneous"},
    "run": {"seed": 0},
}

COMMAND_DEFAULTS = {
    "eigen": {"xi_range": "0.01:8", "n_xi": 1000, "x_range": "-4:4", "n_x": 50, "check": None},
    "kernel": {"j": 8, "n": 4, "bin": False},
    "besov": {"alpha": 0.5, "p": 2.0, "q": 2.0, "j_max": 10, "homogeneous": False,
              "compare_classical": False, "sigma": 1.0, "center": -6.0, "k0": 0.0},
    "decay": {"j": 8, "n": 4, "derivative": False, "sizes": False},
    "hormander": {"y": 3.1, "y_bar": 3.0, "symbol": "saturating", "tau": 1.0,
                  "j_lo": None, "j_hi": None, "check_doubling": False},
    "multiplier": {"symbol": "imaginary_power", "tau": 1.0, "p_list": "1.5,2,3",
                   "besov_grid": False, "test_family": "gaussian"},
    "evolve": {"t": 0.5, "method": "both", "x0": -6.0, "k0": 3.0, "sigma": 1.0, "dt": 1e-3,
               "smoothing": False},
}

HALF_WIDTH = {"eigen": 6.0, "kernel": 6.0, "decay": 6.0, "besov": 64.0, "hormander": 6.0,
              "multiplier": 24.0, "evolve": 16.0}


# ---------------------------------------------------------------- config

def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = {k: dict(v) for k, v in DEFAULTS.items()}
    cfg["params"] = dict(COMMAND_DEFAULTS[command])
    cfg["grid"]["half_width"] = HALF_WIDTH[command]
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        for key, val in loaded.items():
            if isinstance(val, dict) and key in cfg:
                cfg[key].update(val)
            elif key in SECTIONS:
                cfg[SECTIONS[key]][key] = val
            else:
                cfg["params"][key] = val
    for key, val in vars(args).items():
        if key in ("command", "config", "out", "threads", "func") or val is None:
            continue
        if key in SECTIONS:
            cfg[SECTIONS[key]][key] = val
        else:
            cfg["params"][key] = val
    cfg["command"] = command
    return cfg


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _pot(cfg) -> BarrierPotential:
    p = cfg["potential"]
    if p["free"]:
        return BarrierPotential.free_particle()
    return BarrierPotential(float(p["epsilon"]))


def _sys(cfg, kind=None):
    s = cfg["system"]
    return build_system(kind or s["kind"], s["family"], int(s["smoothness"]))


def _span(text):
    a, b = (float(v) for v in str(text).split(":"))
    return a, b


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


class Run:
    """Collects results, invariant checks and diagnostics for one command."""

    def __init__(self, cfg, out: Path):
        self.cfg = cfg
        self.out = out
        self.results: dict = {}
        self.invariants: dict = {}
        self.diagnostics: dict = {}
        self.files: list = []
        out.mkdir(parents=True, exist_ok=True)

    def check(self, name, value, limit, ok=None, *, kind="le"):
        if ok is None:
            ok = value <= limit if kind == "le" else value >= limit
        self.invariants[name] = {"value": value, "limit": limit, "pass": bool(ok)}

    def diagnose(self, name, value, limit, exceeded):
        self.diagnostics[name] = {"value": value, "limit": limit, "exceeded": bool(exceeded)}

    def csv(self, name, header, rows):
        _write_csv(self.out / name, header, rows)
        self.files.append(name)

    def exit_code(self) -> int:
        if any(not v["pass"] for v in self.invariants.values()):
            return EXIT_INVARIANT
        if any(v["exceeded"] for v in self.diagnostics.values()):
            return EXIT_DIAGNOSTIC
        return EXIT_OK

    def finish(self) -> int:
        code = self.exit_code()
        report = {
            "command": self.cfg["command"],
            "config": self.cfg,
            "config_hash": config_hash(self.cfg),
            "results": self.results,
            "invariants": self.invariants,
            "diagnostics": self.diagnostics,
            "files": sorted(self.files),
            "exit_code": code,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        (self.out / "report.json").write_text(json.dumps(_clean(report), sort_keys=True,
                                                         indent=2) + "\n")
        return code


def _grids(cfg, pot, sys, j_lo, j_hi, *, refine=None, time=0.0):
    g = cfg["grid"]
    r = g["refine"] if refine is None else refine
    return Grids.for_bands(pot, sys, j_lo, j_hi, half_width=float(g["half_width"]),
                           spacing=float(g["spacing"]), refine=r, time=time)


# ---------------------------------------------------------------- commands

def cmd_eigen(cfg, run: Run, threads: int):
    pot = _pot(cfg)
    p = cfg["params"]
    lo, hi = _span(p["xi_range"])
    xis = np.logspace(math.log10(lo), math.log10(hi), int(p["n_xi"]))
    rows, flux, tm_gap = [], 0.0, 0.0
    for xi in np.concatenate([xis, -xis]):
        c = coefficients(float(xi), pot)
        d = c.flux_defect()
        flux = max(flux, d)
        row = [float(xi), c.a.real, c.a.imag, c.a_prime.real, c.a_prime.imag,
               c.c.real, c.c.imag, c.c_prime.real, c.c_prime.imag, d]
        if p["check"] == "transfer-matrix" and not pot.free:
            ref = transfer_matrix_coefficients(float(xi), pot.epsilon)
            gap = max(abs(getattr(c, k) - ref[k]) / max(1.0, abs(ref[k]))
                      for k in ("a", "a_prime", "c", "c_prime"))
            tm_gap = max(tm_gap, gap)
        rows.append(row)
    run.csv("coefficients.csv", ["xi", "a_re", "a_im", "ap_re", "ap_im", "c_re", "c_im",
                                 "cp_re", "cp_im", "flux_residual"], rows)
    xa, xb = _span(p["x_range"])
    xs = np.linspace(xa, xb, int(p["n_x"]))
    xg = np.linspace(-hi, hi, int(p["n_x"]))
    xg = xg[xg != 0]
    E1 = eval_eigenfunction(xs[:, None], -xg[None, :], pot)
    E2 = eval_eigenfunction(-xs[:, None], xg[None, :], pot)
    sym = float(np.max(np.abs(E1 - E2)))
    E0 = eval_eigenfunction(xs[:, None], xg[None, :], pot)
    run.csv("eigenfunctions.csv", ["x", "xi", "re", "im"],
            [[float(x), float(k), E0[i, m].real, E0[i, m].imag]
             for i, x in enumerate(xs) for m, k in enumerate(xg)])
    run.check("flux_identity", flux, 1e-12)
    run.check("reflection_symmetry", sym, 1e-12)
    if pot.free:
        pw = float(np.max(np.abs(E0 - np.exp(1j * xs[:, None] * xg[None, :]))))
        run.check("plane_wave", pw, 1e-14)
    else:
        pts = [x for x in xs if abs(abs(x) - 1) > 0.05]
        ode = max(eigen_residual(float(x), float(k), pot) / max(1.0, k * k)
                  for x in pts[::5] for k in (0.3, 1.0, 3.0))
        run.check("ode_residual", ode, 1e-6)
    if p["check"] == "transfer-matrix" and not pot.free:
        run.check("transfer_matrix_gap", tm_gap, 1e-10)
    run.results.update({"n_xi": int(2 * xis.size), "max_flux_residual": flux,
                        "symmetry_residual": sym, "potential": pot.describe()})


def cmd_kernel(cfg, run: Run, threads: int):
    pot, sys = _pot(cfg), _sys(cfg)
    p = cfg["params"]
    j = int(p["j"])
    g = cfg["grid"]
    r = int(g["refine"])
    grid = SpatialGrid.symmetric(float(g["half_width"]), float(g["spacing"]))
    m = band(sys, j)
    sg = SpectralGrid.for_symbol(m, pot, grid.extent, refine=r)
    km = kernel_matrix(m, grid, grid, sg, pot, threads=threads)
    km2 = kernel_matrix(m, grid, grid, sg.refined(1), pot, threads=threads)
    K = km.values
    scale = float(np.max(np.abs(K)))
    delta = float(np.max(np.abs(km2.values - K))) / scale
    run.check("hermitian_residual", km.hermitian_residual(), 1e-10)
    run.check("reflection_residual", km.reflection_residual(), 1e-10)
    if pot.free:
        ti = float(np.max(np.abs(K[1:, 1:] - K[:-1, :-1]))) / scale
        run.check("translation_invariance", ti, 1e-8)
    run.diagnose("refinement_delta", delta, 1e-6, delta > 1e-6)
    x = grid.x
    run.csv("kernel.csv", ["x", "y", "re", "im"],
            [[float(x[i]), float(x[k]), K[i, k].real, K[i, k].imag]
             for i in range(x.size) for k in range(x.size)])
    if p["bin"]:
        km.to_binary(run.out / "kernel.bin")
        run.files += ["kernel.bin", "kernel.bin.json"]
    regime = Vf.regime_of(j, pot, sys)
    n = int(p["n"])
    i0 = int(np.argmin(np.abs(x)))
    env = Vf.envelope(x[i0:i0 + 1], x, j, n, regime)[0]
    run.csv("envelope.csv", ["y", "abs_kernel", "envelope", "ratio"],
            [[float(x[k]), float(abs(K[i0, k])), float(env[k]), float(abs(K[i0, k]) / env[k])]
             for k in range(x.size)])
    row = np.abs(K[i0])
    peaks = [float(x[k]) for k in range(1, x.size - 1)
             if row[k] >= row[k - 1] and row[k] >= row[k + 1] and row[k] > 1e-3 * row.max()]
    run.results.update({"j": j, "regime": regime, "sup_abs_kernel": scale,
                        "refinement_delta": delta, "row_x": float(x[i0]),
                        "row_local_maxima": peaks, "spectral": sg.describe()})


def _test_function(p):
    s, c, k = float(p["sigma"]), float(p["center"]), float(p["k0"])
    return lambda x: np.exp(-(x - c) ** 2 / (2 * s * s) + 1j * k * x)


def cmd_besov(cfg, run: Run, threads: int):
    pot = _pot(cfg)
    p = cfg["params"]
    homog = bool(p["homogeneous"])
    sys = _sys(cfg, "homogeneous" if homog else None)
    params = B.BesovParams(float(p["alpha"]), float(p["p"]), float(p["q"]),
                           homogeneous=homog, j_max=int(p["j_max"]))
    js = params.bands

    def evaluate(refine):
        grids = _grids(cfg, pot, sys, js[0], js[-1], refine=refine)
        f = _test_function(p)(grids.spatial.x)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", B.TruncationWarning)
            res = B.besov_norm(f, params, sys, pot, grids)
        return res, grids, f, bool(caught)

    r0 = int(cfg["grid"]["refine"])
    res, grids, f, trunc = evaluate(r0)
    res1 = evaluate(r0 + 1)[0]
    delta = abs(res1.total - res.total) / res.total
    run.results.update({"total": res.total, "band_norms": res.band_norms,
                        "params": params.describe(), "refinement_delta": delta,
                        "last_band_share": res.last_band_share, "grids": grids.describe()})
    run.diagnose("truncation", res.last_band_share, 1e-8, trunc)
    run.diagnose("refinement_delta", delta, 1e-6, delta > 1e-6)
    rows = [[j, res.band_norms[j]] for j in js]
    if p["compare_classical"]:
        syms = [lambda lam, j=j: eval_band(sys, j, lam) for j in js]
        cl = classical_band_norms(f, grids.spatial.h, syms, params.p)
        total_cl = B.combine(cl, params)
        gap = abs(res.total - total_cl) / total_cl
        run.results.update({"classical_total": total_cl, "relative_gap": gap,
                            "ratio": res.total / total_cl})
        if pot.free or pot.epsilon <= 1e-3:
            run.check("classical_gap", gap, 1e-4)
        else:
            ratio = res.total / total_cl
            run.check("classical_equivalence", ratio, [1 / 50, 50], 1 / 50 <= ratio <= 50)
        rows = [[j, res.band_norms[j], float(c)] for j, c in zip(js, cl)]
        run.csv("bands.csv", ["j", "norm_h", "norm_classical"], rows)
    else:
        run.csv("bands.csv", ["j", "norm_h"], rows)


def cmd_decay(cfg, run: Run, threads: int):
    pot, sys = _pot(cfg), _sys(cfg)
    p = cfg["params"]
    j, n = int(p["j"]), int(p["n"])
    g = cfg["grid"]
    grid = SpatialGrid.symmetric(float(g["half_width"]), float(g["spacing"]))
    r = int(g["refine"])
    if r:
        grid = grid.refined(r)
    fit = Vf.fit_derivative_decay if p["derivative"] else Vf.fit_kernel_decay
    sg = SpectralGrid.for_symbol(band(sys, j), pot, grid.extent, refine=r)
    rep = fit(j, n, pot, grid, sg, sys=sys, refine=1, threads=threads)
    ok = math.isfinite(rep.fitted_constant) and rep.fitted_constant > 0
    run.check("finite_constant", rep.fitted_constant, "finite", ok)
    run.check("refinement_stability", rep.refinement_delta, 0.1)
    if pot.free:
        off = [pk for pk in rep.shift_peaks_found if abs(pk[0] - pk[1]) > 1e-9]
        run.check("free_peaks_diagonal_only", len(off), 0)
    run.results.update({"j": j, "n": n, "regime": rep.regime, "derivative": rep.derivative,
                        "fitted_constant": rep.fitted_constant, "residual": rep.residual,
                        "refined_constant": rep.refined_constant,
                        "refinement_delta": rep.refinement_delta,
                        "shift_peaks_found": rep.shift_peaks_found,
                        "free_residual": rep.meta["free_residual"]})
    run.csv("envelope.csv", ["x", "y", "abs_kernel", "envelope", "ratio"],
            [[r_["x"], r_["y"], r_["abs_kernel"], r_["envelope"], r_["ratio"]]
             for r_ in rep.envelope_table()])
    if p["sizes"]:
        J = int(pot.j_threshold) if not pot.free else 4
        rows, table = [], {}
        for deriv in (False, True):
            for jj in range(J + 2, J + 9, 2):
                s = Vf.kernel_l2_sizes(jj, pot, derivative=deriv, refine=r, threads=threads)
                rows.append([jj, int(deriv), s.size, s.weighted, s.tail])
                table.setdefault(deriv, []).append(s.as_tuple())
        run.csv("kernel_sizes.csv", ["j", "derivative", "size", "weighted", "tail"], rows)
        for deriv, vals in table.items():
            arr = np.array(vals)
            spread = float(np.max(arr.max(axis=0) / arr.min(axis=0)))
            run.check(f"size_uniformity_{'derivative' if deriv else 'kernel'}", spread, 4.0)


def _symbol(p):
    name = p["symbol"]
    if name == "saturating":
        return saturating()
    if name == "imaginary_power":
        return imaginary_power(float(p["tau"]))
    if name == "identity":
        return constant(1.0)
    raise ValueError(f"unknown symbol {name!r}")


def cmd_hormander(cfg, run: Run, threads: int):
    pot = _pot(cfg)
    sys = _sys(cfg, "homogeneous")
    p = cfg["params"]
    m = Vf.MultiplierSpec.from_symbol(_symbol(p))
    y, yb = float(p["y"]), float(p["y_bar"])
    jr = Vf.default_j_range(abs(y - yb), pot)
    if p["j_lo"] is not None:
        jr = (int(p["j_lo"]), jr[1])
    if p["j_hi"] is not None:
        jr = (jr[0], int(p["j_hi"]))
    r = int(cfg["grid"]["refine"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", Vf.TruncationWarning)
        rep = Vf.hormander_integral(m, y, yb, pot, jr, sys=sys, refine=r, threads=threads)
        ref = Vf.hormander_integral(m, y, yb, pot, jr, sys=sys, refine=r + 1, threads=threads)
    delta = abs(ref.total - rep.total) / rep.total if rep.total else 0.0
    run.results.update({"total": rep.total, "j_range": list(rep.j_range), "t": rep.t,
                        "argmax_j": rep.argmax_j, "end_share": rep.end_share,
                        "refinement_delta": delta, "symbol": m.describe()})
    run.diagnose("truncation", rep.end_share, 0.01, rep.truncated)
    run.diagnose("refinement_delta", delta, 0.01, delta > 0.01)
    if rep.t > 0:
        run.check("finite_total", rep.total, "finite", math.isfinite(rep.total))
        run.check("crossover", 2.0 ** (rep.argmax_j / 2) * rep.t, [0.25, 4], rep.crossover_ok)
    else:
        run.check("identical_points_zero", rep.total, 0.0, rep.total == 0.0)
    if p["check_doubling"]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", Vf.TruncationWarning)
            big = Vf.hormander_integral(m, y, yb, pot, Vf.doubled(jr), sys=sys, refine=r,
                                        threads=threads)
        dd = abs(big.total - rep.total) / rep.total if rep.total else 0.0
        run.results["doubling_delta"] = dd
        run.check("j_range_doubling", dd, 0.01)
    run.csv("terms.csv", ["j", "term", "normalized", "method"],
            [[j, rep.terms[j], rep.normalized[j], rep.methods[j]] for j in sorted(rep.terms)])


def _family(p, seed):
    if p["test_family"] == "gaussian":
        return [f for _, f in Vf.gaussian_family()]
    rng = np.random.default_rng(seed)
    fam = []
    for _ in range(24):
        s, c, k = rng.uniform(0.4, 1.6), rng.uniform(-3, 3), rng.uniform(-2.5, 2.5)
        fam.append(lambda x, s=s, c=c, k=k: np.exp(-(x - c) ** 2 / (2 * s * s) + 1j * k * x))
    return fam


def cmd_multiplier(cfg, run: Run, threads: int):
    pot = _pot(cfg)
    sys = _sys(cfg)
    p = cfg["params"]
    m = Vf.MultiplierSpec.from_symbol(_symbol(p))
    fam = _family(p, int(cfg["run"]["seed"]))
    grids = _grids(cfg, pot, sys, 0, 10)
    ps = [float(v) for v in str(p["p_list"]).split(",")]
    rows = []
    for pp in ps:
        rep = Vf.multiplier_operator_norm(m, pp, fam, pot, grids)
        rows.append([pp, rep.lp_ratio])
        run.results[f"lp_ratio_p{pp:g}"] = rep.lp_ratio
        if pp == 2:
            run.check("p2_spectral_bound", rep.lp_ratio, m.sup + 1e-6)
        run.check(f"lp_bounded_p{pp:g}", rep.lp_ratio, 10.0)
    run.csv("lp_ratios.csv", ["p", "ratio"], rows)
    if p["besov_grid"]:
        brows = []
        for a in (0.5, 1.0):
            for pp in ps:
                for q in (1.0, 2.0, math.inf):
                    bp = B.BesovParams(a, pp, q)
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", B.TruncationWarning)
                        rep = Vf.multiplier_operator_norm(m, pp, fam, pot, grids, besov=bp,
                                                          sys=sys)
                    brows.append([a, pp, q, rep.besov_ratio])
        run.csv("besov_ratios.csv", ["alpha", "p", "q", "ratio"], brows)
        worst = max(r[3] for r in brows)
        run.results["besov_ratio_max"] = worst
        run.check("besov_bounded", worst, 10.0)
    run.results["symbol"] = m.describe()
    run.results["family_size"] = len(fam)


def cmd_evolve(cfg, run: Run, threads: int):
    pot = _pot(cfg)
    sys = _sys(cfg)
    p = cfg["params"]
    t = float(p["t"])
    f = lambda x: np.exp(-(x - float(p["x0"])) ** 2 / (2 * float(p["sigma"]) ** 2)
                         + 1j * float(p["k0"]) * x)
    grids = _grids(cfg, pot, sys, 0, 8, time=t)
    w = grids.spatial.weights
    srun = E.propagate_spectral(f, t, pot, grids)
    nf = math.sqrt(float(np.sum(w * np.abs(srun.f0) ** 2)))
    run.check("spectral_l2_drift", srun.conserved_l2_drift, 1e-6)
    run.results["spectral"] = srun.metadata()
    srun.write_snapshot(run.out / "snapshot_spectral.csv")
    run.files.append("snapshot_spectral.csv")
    cover = srun.meta["coverage_defect"]
    run.diagnose("spectral_coverage", cover, 1e-6, cover > 1e-6)
    if t == 0:
        ident = math.sqrt(float(np.sum(w * np.abs(srun.psi - srun.f0) ** 2))) / nf
        run.check("identity_at_t0", ident, 1e-8)
    ref = E.propagate_spectral(f, t, pot, grids.refined(1))
    delta = math.sqrt(float(np.sum(w * np.abs(ref.psi[::2] - srun.psi) ** 2))) / nf
    run.results["refinement_delta"] = delta
    run.diagnose("refinement_delta", delta, 1e-6, delta > 1e-6)
    if p["method"] in ("fd", "both") and t > 0:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", E.BoundaryWarning)
            fd = E.propagate_fd(f, t, float(p["dt"]), pot, grids.spatial)
        fd.write_snapshot(run.out / "snapshot_fd.csv")
        run.files.append("snapshot_fd.csv")
        gap = math.sqrt(float(np.sum(w * np.abs(fd.psi - srun.psi) ** 2))) / nf
        run.results["fd"] = fd.metadata()
        run.results["fd_gap"] = gap
        run.check("fd_step_unitarity", fd.meta["step_drift"], 1e-12)
        run.check("fd_l2_drift", fd.conserved_l2_drift, 1e-4)
        run.check("spectral_vs_fd", gap, 1e-3)
        run.diagnose("boundary", fd.meta["edge_ratio"], 1e-6, bool(caught))
    if p["smoothing"]:
        fam = [g for _, g in Vf.gaussian_family((0.7, 1.4), (-2.0, 0.0, 2.5), (0.0, 2.0))]
        g2 = _grids(cfg, pot, sys, 0, 8, time=4.0)
        rows = []
        for pp in (2.0, 4.0):
            sw = E.smoothing_sweep(fam, 0.5, pp, 2.0, pot, g2, sys)
            rows += [[pp, tt, v] for tt, v in zip(sw["t"], sw["ratio"])]
            run.results[f"smoothing_p{pp:g}"] = sw
            run.check(f"smoothing_slope_p{pp:g}", sw["slope"], sw["beta"] + 0.3)
        run.csv("smoothing.csv", ["p", "t", "ratio"], rows)


COMMANDS = {"eigen": cmd_eigen, "kernel": cmd_kernel, "besov": cmd_besov, "decay": cmd_decay,
            "hormander": cmd_hormander, "multiplier": cmd_multiplier, "evolve": cmd_evolve}


# ---------------------------------------------------------------- parser

def _common(sp):
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--out", default="out", help="output directory (default: ./out)")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--free", action="store_const", const=True, help="ε = 0 (no barrier)")
    sp.add_argument("--half-width", dest="half_width", type=float)
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--refine", type=int, help="double grid and quadrature density k times")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--family", choices=["exp", "split", "steep"])
    sp.add_argument("--smoothness", type=int)
    sp.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="barrierbesov",
                                 description="Spectral experiments for the barrier Schrödinger operator")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eigen", help="tabulate eigenfunctions and scattering coefficients")
    _common(sp)
    sp.add_argument("--xi-range", dest="xi_range")
    sp.add_argument("--n-xi", dest="n_xi", type=int)
    sp.add_argument("--x-range", dest="x_range")
    sp.add_argument("--n-x", dest="n_x", type=int)
    sp.add_argument("--check", choices=["transfer-matrix"])

    sp = sub.add_parser("kernel", help="assemble and export a band kernel")
    _common(sp)
    sp.add_argument("--j", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--bin", action="store_const", const=True, help="also write kernel.bin")

    sp = sub.add_parser("besov", help="Besov quasi-norm of a Gaussian test function")
    _common(sp)
    for name, typ in (("alpha", float), ("p", float), ("q", float), ("sigma", float),
                      ("center", float), ("k0", float)):
        sp.add_argument(f"--{name}", type=typ)
    sp.add_argument("--j-max", dest="j_max", type=int)
    sp.add_argument("--homogeneous", action="store_const", const=True)
    sp.add_argument("--compare-classical", dest="compare_classical", action="store_const",
                    const=True)

    sp = sub.add_parser("decay", help="fit kernel decay envelopes")
    _common(sp)
    sp.add_argument("--j", type=int)
    sp.add_argument("--n", type=int, choices=[2, 4, 6])
    sp.add_argument("--derivative", action="store_const", const=True)
    sp.add_argument("--sizes", action="store_const", const=True,
                    help="also tabulate normalized kernel L² sizes over j")

    sp = sub.add_parser("hormander", help="Hörmander integral of a multiplier kernel")
    _common(sp)
    sp.add_argument("--y", type=float)
    sp.add_argument("--y-bar", dest="y_bar", type=float)
    sp.add_argument("--symbol", choices=["saturating", "imaginary_power", "identity"])
    sp.add_argument("--tau", type=float)
    sp.add_argument("--j-lo", dest="j_lo", type=int)
    sp.add_argument("--j-hi", dest="j_hi", type=int)
    sp.add_argument("--check-doubling", dest="check_doubling", action="store_const", const=True)

    sp = sub.add_parser("multiplier", help="L^p and Besov ratios of m(H) over a test family")
    _common(sp)
    sp.add_argument("--symbol", choices=["saturating", "imaginary_power", "identity"])
    sp.add_argument("--tau", type=float)
    sp.add_argument("--p-list", dest="p_list")
    sp.add_argument("--besov-grid", dest="besov_grid", action="store_const", const=True)
    sp.add_argument("--test-family", dest="test_family", choices=["gaussian", "random"])

    sp = sub.add_parser("evolve", help="propagate a Gaussian packet")
    _common(sp)
    for name in ("t", "x0", "k0", "sigma", "dt"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--method", choices=["spectral", "fd", "both"])
    sp.add_argument("--smoothing", action="store_const", const=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = resolve_config(args.command, args)
    run = Run(cfg, Path(args.out))
    try:
        COMMANDS[args.command](cfg, run, max(1, int(args.threads)))
    except ResolutionError as exc:
        run.diagnose("resolution", str(exc), "node rule", True)
    code = run.finish()
    print(json.dumps({"command": args.command, "exit_code": code,
                      "report": str(Path(args.out) / "report.json")}))
    return code


if __name__ == "__main__":
    sys.exit(main())
