"""Experiment driver: validated configs and file-producing commands.

Each command consumes an :class:`ExperimentConfig`, writes CSV files (the
canonical artifacts) plus small SVG plots into its own output directory,
and returns a summary dict.  The resolved configuration is always written
alongside the outputs, and every command is deterministic given (config,
seed): rerunning reproduces byte-identical CSVs.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import noise_stats, spectral, svgplot
from .errors import ConfigError
from .linalg import svd
from .operator import build_L, restrict_to_V, sharp_maps
from .problems import (
    NoiseModel,
    TestProblem,
    add_noise,
    apply_ordering,
    baart,
    gravity,
    paralleltomo,
    random_ordering,
)
from .solvers import SweepConfig, cgls, run

__all__ = ["ExperimentConfig", "COMMANDS", "run_command"]

OUTPUT_ROOT_ENV = "KACZMARZ_LAB_OUT"

_PROBLEMS = ("gravity", "baart", "paralleltomo")
_METHODS = ("standard", "symmetric", "randomized", "cgls")


@dataclass
class ExperimentConfig:
    """Validated knobs shared by all commands; flags override file values."""

    problem: str = "gravity"
    n: int = 128                      # gravity / baart size
    d: float = 0.01                   # gravity depth
    N: int = 32                       # tomography image side
    n_angles: int = 32
    rays: int = 32
    width: float | None = None        # detector width (default: rays - 1)
    ordering: str = "default"         # default | random
    ordering_seed: int = 0
    xbar_mode: str = "default"        # default | first-row
    omega: float = 1.0
    methods: tuple = ("standard",)
    sweeps: int = 100
    solver_seed: int = 0
    sigma: float = 0.0
    noise_seed: int = 0
    realizations: int = 25
    ks: tuple = (1, 5, 20)
    omega_grid: tuple | None = None
    omegas_bounds: tuple = (0.5, 1.0, 1.5)
    rank_tol: float | None = None
    zero_tol: float = spectral.DEFAULT_ZERO_TOL
    im_tol: float = spectral.DEFAULT_IM_TOL
    n_mc: int = 10_000
    mc_seed: int = 1
    out: str | None = None

    # cubic-cost routines (dense SVD/eig) cap the problem size
    MAX_DIM = 4096

    def validate(self) -> None:
        if self.problem not in _PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {_PROBLEMS}")
        if self.n > self.MAX_DIM or self.N * self.N > self.MAX_DIM:
            raise ConfigError(f"problem dimension capped at {self.MAX_DIM}")
        if not 0.0 < self.omega < 2.0:
            raise ConfigError("omega must lie in (0, 2)")
        if self.ordering not in ("default", "random"):
            raise ConfigError("ordering must be 'default' or 'random'")
        if self.xbar_mode not in ("default", "first-row"):
            raise ConfigError("xbar_mode must be 'default' or 'first-row'")
        for mth in self.methods:
            if mth not in _METHODS:
                raise ConfigError(f"unknown method {mth!r}; choose from {_METHODS}")
        if self.sweeps < 0 or self.realizations < 1 or self.n_mc < 2:
            raise ConfigError("sweeps/realizations/n_mc out of range")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.omega_grid is not None:
            grid = tuple(float(w) for w in self.omega_grid)
            if not grid or any(not 0.0 < w < 2.0 for w in grid):
                raise ConfigError("omega_grid values must lie in (0, 2)")
            self.omega_grid = grid

    @classmethod
    def from_sources(cls, config_path=None, overrides=None) -> "ExperimentConfig":
        """Build a config from an optional JSON/TOML file plus overrides."""
        values = {}
        if config_path is not None:
            path = Path(config_path)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            if path.suffix == ".toml":
                try:
                    import tomllib
                except ImportError:  # python < 3.11
                    try:
                        import tomli as tomllib
                    except ImportError as exc:
                        raise ConfigError(
                            "TOML configs need Python >= 3.11 or the tomli package; "
                            "use JSON instead"
                        ) from exc
                values = tomllib.loads(path.read_text())
            else:
                try:
                    values = json.loads(path.read_text())
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"bad config file {path}: {exc}") from exc
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("methods", "ks", "omega_grid", "omegas_bounds"):
            if key in values and values[key] is not None:
                values[key] = tuple(values[key])
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def resolved_out(self, command: str) -> Path:
        root = self.out or os.environ.get(OUTPUT_ROOT_ENV, "runs")
        return Path(root) / command

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("methods", "ks", "omega_grid", "omegas_bounds"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


def _fmt(x) -> str:
    return repr(float(x))


def _write_rows(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def make_problem(cfg: ExperimentConfig) -> TestProblem:
    """Instantiate the configured problem, ordering, and ground truth."""
    if cfg.problem == "gravity":
        p = gravity(cfg.n, cfg.d)
    elif cfg.problem == "baart":
        p = baart(cfg.n)
    else:
        p = paralleltomo(cfg.N, cfg.n_angles, cfg.rays, cfg.width)
    if cfg.ordering == "random":
        p = apply_ordering(p, random_ordering(p.m, cfg.ordering_seed))
    if cfg.xbar_mode == "first-row":
        x_bar = p.A[0].copy()
        p = TestProblem(
            A=p.A, x_bar=x_bar, b_bar=p.A @ x_bar, name=p.name,
            params={**p.params, "xbar_mode": "first-row"},
        )
    return p


def _prepare(outdir: Path, cfg: ExperimentConfig) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "config.json", "w") as fh:
        json.dump(cfg.as_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_eigplot(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Spectrum of the restricted sweep operator: CSV + complex-plane SVG."""
    _prepare(outdir, cfg)
    p = make_problem(cfg)
    sv = svd(p.A, cfg.rank_tol)
    ro = restrict_to_V(p.A, build_L(p.A, cfg.omega), sv)
    rep = spectral.spectrum(ro, cfg.zero_tol)
    lam = rep.eigenvalues
    _write_rows(
        outdir / "spectrum.csv",
        "idx,re,im,modulus",
        [(i, _fmt(l.real), _fmt(l.imag), _fmt(abs(l))) for i, l in enumerate(lam)],
    )
    svgplot.scatter_plot(
        outdir / "spectrum.svg",
        lam.real.tolist(),
        lam.imag.tolist(),
        title=f"{p.name}: eigenvalues of the sweep operator (omega={cfg.omega})",
        xlabel="Re",
        ylabel="Im",
        unit_circle=True,
    )
    top_is_complex = bool(abs(lam[0].imag) > 1e-12 * max(1.0, abs(lam[0])))
    print(f"rho = {rep.rho:.10f}")
    if top_is_complex:
        print("note: extremal eigenvalue is a complex conjugate pair")
    summary = {
        "rho": rep.rho,
        "zero_count": rep.zero_count,
        "kappa_W": rep.kappa_W,
        "top_is_complex": top_is_complex,
        "near_defective": rep.near_defective,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def _history_csv(outdir: Path, tag: str, hist) -> None:
    with open(outdir / f"history_{tag}.csv", "w") as fh:
        hist.write_csv(fh)


def cmd_errhist(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Error histories for the configured methods, noise-free and noisy."""
    _prepare(outdir, cfg)
    if cfg.sigma > 0 and cfg.sweeps < 1:
        raise ConfigError("noisy error histories need at least one sweep")
    p = make_problem(cfg)
    ref = p.x_bar
    summary = {"methods": {}, "problem": p.name, "m": p.m, "n": p.n}
    series = {}
    for method in cfg.methods:
        if method == "cgls":
            clean = cgls(p.A, p.b_bar, max(cfg.sweeps, 1))
            err = np.linalg.norm(clean.iterates - ref, axis=1)
            hist = dataclasses.replace(clean, error_norms=err)
        else:
            scfg = SweepConfig(
                omega=cfg.omega, variant=method, max_sweeps=cfg.sweeps,
                seed=cfg.solver_seed, store_iterates=False,
            )
            hist = run(p, p.b_bar, scfg, reference=ref)
        _history_csv(outdir, method, hist)
        series[method] = (
            list(range(hist.sweep_count + 1)),
            hist.error_norms.tolist(),
        )
        summary["methods"][method] = {
            "final_error": float(hist.error_norms[-1]),
            "final_residual": float(hist.residual_norms[-1]),
        }
        if cfg.sigma > 0:
            mins = []
            for real in range(cfg.realizations):
                rng = np.random.default_rng([cfg.noise_seed, real])
                b = p.b_bar + cfg.sigma * rng.standard_normal(p.m)
                if method == "cgls":
                    noisy = cgls(p.A, b, max(cfg.sweeps, 1))
                    kmax = min(noisy.sweep_count, clean.sweep_count)
                    split = noise_stats.error_split_from_histories(
                        dataclasses.replace(
                            clean,
                            iterates=clean.iterates[: kmax + 1],
                            residual_norms=clean.residual_norms[: kmax + 1],
                            sweep_count=kmax,
                        ),
                        dataclasses.replace(
                            noisy,
                            iterates=noisy.iterates[: kmax + 1],
                            residual_norms=noisy.residual_norms[: kmax + 1],
                            sweep_count=kmax,
                        ),
                        ref,
                    )
                else:
                    split = noise_stats.error_split(p, b, scfg)
                mode = "w" if real == 0 else "a"
                with open(outdir / f"split_{method}.csv", mode) as fh:
                    split.write_csv(fh, realization=real, header=(real == 0))
                mins.append(noise_stats.semiconvergence_min(split))
            summary["methods"][method]["semiconvergence_min"] = mins
    svgplot.line_plot(
        outdir / "errhist.svg",
        series,
        title=f"{p.name}: iteration error vs sweeps",
        xlabel="sweep",
        ylabel="||x_k - x_ref||",
        logy=True,
    )
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def cmd_omegasweep(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Spectrum statistics over an omega grid; detects the all-real edge."""
    _prepare(outdir, cfg)
    p = make_problem(cfg)
    sv = svd(p.A, cfg.rank_tol)
    grid = cfg.omega_grid or tuple(np.round(np.arange(0.02, 2.0, 0.02), 10))
    scan = spectral.small_omega_scan(p.A, sv, grid, cfg.zero_tol, cfg.im_tol)
    _write_rows(
        outdir / "scan.csv",
        "omega,rho,max_im,zero_count,n_nonpos_real",
        [
            (_fmt(r.omega), _fmt(r.rho), _fmt(r.max_im), r.zero_count, r.n_nonpos_real)
            for r in scan.rows
        ],
    )
    svgplot.line_plot(
        outdir / "scan.svg",
        {
            "min |lambda|": (
                [r.omega for r in scan.rows],
                [max(r.min_abs, 1e-18) for r in scan.rows],
            ),
            "max |Im lambda|": (
                [r.omega for r in scan.rows],
                [max(r.max_im, 1e-18) for r in scan.rows],
            ),
        },
        title=f"{p.name}: spectrum statistics vs omega",
        xlabel="omega",
        ylabel="magnitude",
        logy=True,
    )
    omega0 = scan.omega0
    print(f"omega0 = {omega0}")
    summary = {
        "omega0": omega0,
        "zero_counts": {str(r.omega): r.zero_count for r in scan.rows},
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def cmd_noisestats(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Expected noise-error norms, xi decomposition, and factor growth."""
    _prepare(outdir, cfg)
    if cfg.sigma <= 0:
        raise ConfigError("noisestats requires sigma > 0")
    p = make_problem(cfg)
    sv = svd(p.A, cfg.rank_tol)
    lf = build_L(p.A, cfg.omega)
    sm = sharp_maps(p.A, lf, sv)
    rep = spectral.spectrum(sm.ro, cfg.zero_tol)
    ks = tuple(int(k) for k in cfg.ks)

    exp = noise_stats.expected_norms(sm, rep, cfg.sigma, ks, cfg.n_mc, cfg.mc_seed)
    with open(outdir / "expectation.csv", "w") as fh:
        exp.write_csv(fh)

    e = add_noise(np.zeros(p.m), NoiseModel(cfg.sigma, cfg.noise_seed))
    prof = noise_stats.xi_profile(sm, rep, e, ks)
    with open(outdir / "xi.csv", "w") as fh:
        prof.write_csv(fh)

    mono = noise_stats.monotonicity_probe(rep, range(1, max(ks) + 1))
    with open(outdir / "monotonicity.csv", "w") as fh:
        mono.write_csv(fh)

    svgplot.line_plot(
        outdir / "expectation.svg",
        {
            "E1": (exp.ks.tolist(), exp.e1.tolist()),
            "E2": (exp.ks.tolist(), exp.e2.tolist()),
            "MC": (exp.ks.tolist(), exp.mc.tolist()),
        },
        title=f"{p.name}: expected squared noise error (sigma={cfg.sigma})",
        xlabel="k",
        ylabel="expectation",
        logy=True,
    )
    summary = {
        "e1": exp.e1.tolist(),
        "e2": exp.e2.tolist(),
        "mc": exp.mc.tolist(),
        "e2_monotone": mono.e2_monotone,
        "kappa_W": sm.kappa_W,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def cmd_bounds(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Spectral-radius bounds table across the configured omega values."""
    _prepare(outdir, cfg)
    p = make_problem(cfg)
    sv = svd(p.A, cfg.rank_tol)
    rows = []
    reports = []
    for omega in cfg.omegas_bounds:
        if not 0.0 < float(omega) < 2.0:
            raise ConfigError("bounds omegas must lie in (0, 2)")
        lf = build_L(p.A, float(omega))
        ro = restrict_to_V(p.A, lf, sv)
        rep = spectral.rho_bounds(p.A, sv, lf, ro)
        reports.append(rep)
        rows.append(
            (
                p.name,
                _fmt(omega),
                _fmt(rep.rho_actual),
                _fmt(rep.norm_G),
                _fmt(rep.bound_L),
                _fmt(rep.bound_nu),
                _fmt(rep.nu),
                _fmt(rep.bf_bound),
                _fmt(rep.be_bound),
                int(rep.assumption_met),
            )
        )
    _write_rows(
        outdir / "bounds.csv",
        "problem,omega,rho,norm_G,bound_L,bound_nu,nu,bf_bound,be_bound,assumption_met",
        rows,
    )
    summary = {
        "rows": [
            {"omega": r.omega, "rho": r.rho_actual, "bound_L": r.bound_L,
             "bound_nu": r.bound_nu, "norm_G": r.norm_G,
             "assumption_met": r.assumption_met}
            for r in reports
        ]
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary


def cmd_structure(cfg: ExperimentConfig, outdir: Path) -> dict:
    """Exact row-orthogonality structure of the configured matrix."""
    _prepare(outdir, cfg)
    p = make_problem(cfg)
    rep = spectral.structural_orthogonality(p.A)
    _write_rows(
        outdir / "structure.csv",
        "problem,m,n,leading_diag_block,orth_pairs,near_orth",
        [(p.name, p.m, p.n, rep.leading_diag_block, rep.orth_pairs, _fmt(rep.near_orth))],
    )
    summary = {
        "leading_diag_block": rep.leading_diag_block,
        "orth_pairs": rep.orth_pairs,
        "near_orth": rep.near_orth,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    print(f"leading_diag_block = {rep.leading_diag_block}")
    return summary


COMMANDS = {
    "eigplot": cmd_eigplot,
    "errhist": cmd_errhist,
    "omegasweep": cmd_omegasweep,
    "noisestats": cmd_noisestats,
    "bounds": cmd_bounds,
    "structure": cmd_structure,
}


def run_command(name: str, cfg: ExperimentConfig, outdir=None) -> dict:
    """Dispatch one command; the output directory defaults to <root>/<name>."""
    if name not in COMMANDS:
        raise ConfigError(f"unknown command {name!r}")
    out = Path(outdir) if outdir is not None else cfg.resolved_out(name)
    return COMMANDS[name](cfg, out)
