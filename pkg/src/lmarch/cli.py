"""Command-line entry point: ``lmarch <command> [options]``.

Commands
    analyze          residuals and whitening measures over a (gamma, xi) grid
    compare-kernels  quality table for equal / exponential / long-memory kernels
    scheme-compare   projected vs full-rank vs regularized quality-vs-rank curves
    simulate         synthetic price panel from the process
    mc-band          Monte Carlo white-noise band for given (N, T)

Options may also come from a JSON or TOML file passed with ``--config``; keys
are the long option names with dashes replaced by underscores. Explicit
command-line options win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .covariance import ReturnPanel
from .diagnostics import DISPLAY_NAMES, MEASURES, mc_confidence_band, whitening_report
from .errors import InvalidArgumentError, LmarchError
from .ingest import load_returns, price_panel_from_returns, write_price_csv
from .io import dump_json, fmt, write_heatmap_csv, write_residuals, write_spectrum_csv
from .kernels import LongMemoryConfig, make_kernel
from .residuals import Scheme, compute_residuals
from .simulate import SimulationConfig, equicorrelation, simulate_dgp, simulate_innovations

logger = logging.getLogger("lmarch")

DEFAULT_GAMMA_GRID = (0.0, 0.05, 0.1, 0.2, 0.4)
DEFAULT_XI_GRID = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
XI_ZERO_PLOT_POSITION = 1e-5
RULE_OF_THUMB = (0.3, 0.6)


class ConfigError(InvalidArgumentError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    out: str = "out"
    kernel: str = "lm"
    mu: float = 0.94
    tau0: float = 1560.0
    tau1: float = 4.0
    rho_lm: float = math.sqrt(2.0)
    n_components: int = 15
    imax: int = 260
    gamma_grid: list[float] = field(default_factory=lambda: list(DEFAULT_GAMMA_GRID))
    xi_grid: list[float] = field(default_factory=lambda: list(DEFAULT_XI_GRID))
    scheme: str = "full"
    k: int | None = None
    floor: float | None = None
    rel_floor: float = 1e-12
    rank_grid: list[int] | None = None
    mode: str = "strict"
    seed: int = 0
    mc_reps: int = 1000
    dof: float = 5.0
    n_jobs: int = 1
    write_residuals: bool = False
    xi_base: float = 0.0
    reg_gamma: float = 0.05
    reg_xi: float = 0.01
    # simulate / mc-band
    n_assets: int = 10
    n_obs: int = 2088
    sigma: str = "equicorr"
    rho: float = 0.5
    variance: float = 1e-4
    gamma: float = 0.0
    xi: float = 0.01

    def validate(self) -> None:
        if not self.gamma_grid or not self.xi_grid:
            raise ConfigError("gamma and xi grids must be non-empty")
        for name, grid in (("gamma", self.gamma_grid), ("xi", self.xi_grid)):
            bad = [v for v in grid if not 0.0 <= v <= 1.0]
            if bad:
                raise ConfigError(f"{name} grid values outside [0, 1]: {bad}")
        if self.kernel not in ("equal", "exp", "lm"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.scheme not in ("full", "projected", "fullrank"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.scheme != "full" and self.k is None:
            raise ConfigError(f"scheme {self.scheme} needs --k")
        if self.imax < 1:
            raise ConfigError("--imax must be >= 1")

    def make_kernel(self, name: str | None = None):
        lm = LongMemoryConfig(self.tau0, self.tau1, self.rho_lm, self.n_components)
        return make_kernel(name or self.kernel, self.imax, mu=self.mu, tau0=self.tau0, config=lm)

    def make_scheme(self, kind: str | None = None, k: int | None = None) -> Scheme:
        kind = kind or self.scheme
        if kind == "full":
            return Scheme.full(self.floor, self.rel_floor)
        return Scheme(kind, k if k is not None else self.k)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _tag(v: float) -> str:
    return f"{v:g}"


def _rows_after_warmup(panel: ReturnPanel, i_max: int) -> ReturnPanel:
    return ReturnPanel(panel.returns[i_max + 1:], panel.dates[i_max + 1:], panel.labels)


def _load_panel(cfg: RunConfig) -> ReturnPanel:
    if not cfg.input:
        raise ConfigError("--input is required for this command")
    return load_returns(cfg.input, mode=cfg.mode)


def _band_for(cfg: RunConfig, n_assets: int, n_obs: int):
    if n_assets < 2:
        return None
    return mc_confidence_band(n_assets, n_obs, cfg.mc_reps, cfg.dof, seed=cfg.seed,
                              n_jobs=cfg.n_jobs)


def _write_table(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else fmt(v) if isinstance(v, float) else v for v in row])


def _q_cells(report) -> list:
    m = report.measures()
    return [m[name] for name in MEASURES]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    kernel = cfg.make_kernel()
    scheme = cfg.make_scheme()
    if panel.n_obs < kernel.i_max + 2:
        raise InvalidArgumentError(f"panel has {panel.n_obs} returns, needs {kernel.i_max + 2}")
    window = _rows_after_warmup(panel, kernel.i_max)
    band = _band_for(cfg, panel.n_assets, window.n_obs)
    baseline = whitening_report(window, config={"series": "returns"}, band=band)
    dump_json(out / "baseline_returns.json", baseline.to_dict())
    if band is not None:
        dump_json(out / "mc_band.json", band.to_dict())

    points_dir = out / "points"
    points_dir.mkdir(exist_ok=True)
    completed, failed, summary = [], [], []
    for gamma in cfg.gamma_grid:
        for xi in cfg.xi_grid:
            name = f"g{_tag(gamma)}_x{_tag(xi)}"
            try:
                res = compute_residuals(panel, kernel, gamma, xi, scheme, n_jobs=cfg.n_jobs)
                report = whitening_report(res, band=band)
            except LmarchError as exc:
                failed.append({"gamma": gamma, "xi": xi, "error": type(exc).__name__,
                               "message": str(exc)})
                logger.warning("grid point %s failed: %s", name, exc)
                continue
            pdir = points_dir / name
            pdir.mkdir(exist_ok=True)
            dump_json(pdir / "report.json", report.to_dict())
            write_spectrum_csv(pdir / "spectrum.csv", res.mean_spectrum())
            for measure, rho in report.correlations.items():
                write_heatmap_csv(pdir / f"corr_{measure}.csv", rho, res.labels, res.labels)
            if cfg.write_residuals:
                write_residuals(pdir / "residuals.csv", res)
            completed.append(name)
            xi_plot = xi if xi > 0 else XI_ZERO_PLOT_POSITION
            summary.append([gamma, xi, xi_plot, *_q_cells(report), report.mean_residual_variance])

    _write_table(out / "summary.csv",
                 ["gamma", "xi", "xi_plot", *[f"q_{m}" for m in MEASURES],
                  "mean_residual_variance"], summary)
    dump_json(out / "manifest.json", {
        "command": "analyze", "version": __version__,
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
        "kernel": kernel.to_dict(), "n_assets": panel.n_assets,
        "n_obs_analysis": window.n_obs, "completed": completed, "failed": failed})
    return 0 if not failed else 1


def cmd_compare_kernels(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    scheme = cfg.make_scheme()
    columns = [
        ("equal_weights", "equal", 0.0, cfg.xi_base),
        ("exponential", "exp", 0.0, cfg.xi_base),
        ("long_memory", "lm", 0.0, cfg.xi_base),
        ("lm_regularized", "lm", cfg.reg_gamma, cfg.reg_xi),
    ]
    window = _rows_after_warmup(panel, cfg.imax)
    table = {"returns": whitening_report(window).measures()}
    table["returns"]["unit_var"] = None
    failed = []
    for col, kname, gamma, xi in columns:
        try:
            res = compute_residuals(panel, cfg.make_kernel(kname), gamma, xi, scheme,
                                    n_jobs=cfg.n_jobs)
            table[col] = whitening_report(res).measures()
        except LmarchError as exc:
            failed.append({"column": col, "error": type(exc).__name__, "message": str(exc)})
            table[col] = {m: None for m in MEASURES}
    band = _band_for(cfg, panel.n_assets, window.n_obs)
    table["white_noise"] = band.mean if band else {m: None for m in MEASURES}

    names = ["returns", *[c[0] for c in columns], "white_noise"]
    rows = [[m, DISPLAY_NAMES[m], *[table[c][m] for c in names]] for m in MEASURES]
    _write_table(out / "kernel_comparison.csv", ["measure", "display", *names], rows)
    meta = {"i_max": cfg.imax, "mu": cfg.mu, "tau0": cfg.tau0, "scheme": scheme.to_dict(),
            "lm_regularized": {"gamma": cfg.reg_gamma, "xi": cfg.reg_xi},
            "xi_base": cfg.xi_base, "mc_reps": cfg.mc_reps, "dof": cfg.dof, "seed": cfg.seed,
            "n_assets": panel.n_assets, "n_obs_analysis": window.n_obs}
    dump_json(out / "kernel_comparison.json",
              {"metadata": meta, "columns": names, "table": table, "failed": failed})
    return 0 if not failed else 1


def equivalent_rank(mean_spec: np.ndarray, xi: float) -> int:
    """Number of mean-spectrum eigenvalues above xi * <sigma^2>."""
    return int(np.sum(mean_spec > xi * mean_spec.mean()))


def _default_rank_grid(upper: int) -> list[int]:
    return sorted({int(round(v)) for v in np.linspace(1, upper, min(upper, 12))})


def cmd_scheme_compare(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    kernel = cfg.make_kernel()
    n = panel.n_assets
    base = compute_residuals(panel, kernel, 0.0, 0.0, Scheme.full(rel_floor=1.0))
    mean_spec = base.mean_spectrum()
    spectrum_rank = int(np.sum(mean_spec > 1e-10 * mean_spec.mean()))
    write_spectrum_csv(out / "mean_spectrum.csv", mean_spec)

    ranks = cfg.rank_grid or _default_rank_grid(min(spectrum_rank, n))
    rows, failed = [], []
    grids = {"projected": ranks,
             "fullrank": [k for k in ranks if k == n or k < spectrum_rank]}
    for kind, kgrid in grids.items():
        for k in kgrid:
            try:
                res = compute_residuals(panel, kernel, 0.0, 0.0, Scheme(kind, int(k)),
                                        n_jobs=cfg.n_jobs)
                rep = whitening_report(res)
            except LmarchError as exc:
                failed.append({"curve": kind, "k": int(k), "error": type(exc).__name__,
                               "message": str(exc)})
                continue
            rows.append([kind, 0.0, 0.0, int(k), rep.q_values["r_r"], rep.q_unit_variance,
                         rep.mean_residual_variance])
    for gamma in (0.05, 0.1):
        for xi in cfg.xi_grid:
            try:
                res = compute_residuals(panel, kernel, gamma, xi, cfg.make_scheme("full"),
                                        n_jobs=cfg.n_jobs)
                rep = whitening_report(res)
            except LmarchError as exc:
                failed.append({"curve": f"regularized_g{_tag(gamma)}", "xi": xi,
                               "error": type(exc).__name__, "message": str(exc)})
                continue
            rows.append([f"regularized_g{_tag(gamma)}", gamma, xi, equivalent_rank(mean_spec, xi),
                         rep.q_values["r_r"], rep.q_unit_variance, rep.mean_residual_variance])
    _write_table(out / "scheme_curves.csv",
                 ["curve", "gamma", "xi", "k", "q_r_r", "q_unit_var", "mean_residual_variance"],
                 rows)
    lo, hi = RULE_OF_THUMB
    dump_json(out / "scheme_compare.json", {
        "i_max": kernel.i_max, "kernel": kernel.to_dict(), "n_assets": n,
        "spectrum_rank": spectrum_rank, "rank_grid": [int(k) for k in ranks],
        "rule_of_thumb": {"fraction": [lo, hi],
                          "k_low": int(math.ceil(lo * spectrum_rank)),
                          "k_high": int(math.floor(hi * spectrum_rank))},
        "xi_to_rank": {_tag(xi): equivalent_rank(mean_spec, xi) for xi in cfg.xi_grid},
        "failed": failed})
    return 0 if not failed else 1


def _simulation_config(cfg: RunConfig) -> SimulationConfig:
    dof = None if cfg.dof == 0 else cfg.dof
    if cfg.sigma == "dynamic":
        return SimulationConfig(cfg.n_assets, cfg.n_obs, "dynamic", dof, cfg.seed,
                                cfg.make_kernel(), cfg.gamma, cfg.xi,
                                initial_variance=cfg.variance)
    if cfg.sigma == "identity":
        sigma = cfg.variance * np.eye(cfg.n_assets)
    elif cfg.sigma == "equicorr":
        sigma = equicorrelation(cfg.n_assets, cfg.rho, cfg.variance)
    else:
        raise ConfigError(f"unknown sigma {cfg.sigma!r}; use dynamic, identity or equicorr")
    return SimulationConfig(cfg.n_assets, cfg.n_obs, sigma, dof, cfg.seed)


def cmd_simulate(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    sim = _simulation_config(cfg)
    panel = simulate_dgp(sim)
    write_price_csv(out / "prices.csv", price_panel_from_returns(panel))
    eps = simulate_innovations(sim)
    with (out / "innovations.csv").open("w", newline="") as fh:
        fh.write(",".join(["date", *panel.labels]) + "\n")
        for d, row in zip(panel.dates, eps):
            fh.write(d.strftime("%Y-%m-%d") + "," + ",".join(fmt(v) for v in row) + "\n")
    dump_json(out / "simulation.json", sim.to_dict())
    return 0


def cmd_mc_band(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    n_assets, n_obs = cfg.n_assets, cfg.n_obs
    if cfg.input:
        panel = _load_panel(cfg)
        n_assets, n_obs = panel.n_assets, panel.n_obs - cfg.imax - 1
    band = mc_confidence_band(n_assets, n_obs, cfg.mc_reps, cfg.dof, seed=cfg.seed,
                              n_jobs=cfg.n_jobs)
    dump_json(out / "mc_band.json", band.to_dict())
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "compare-kernels": cmd_compare_kernels,
    "scheme-compare": cmd_scheme_compare,
    "simulate": cmd_simulate,
    "mc-band": cmd_mc_band,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_options(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--input", default=S, help="price CSV (date,LABEL1,...)")
    p.add_argument("--config", default=S, help="JSON or TOML file with default options")
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--kernel", choices=["equal", "exp", "lm"], default=S)
    p.add_argument("--mu", type=float, default=S, help="exponential decay")
    p.add_argument("--tau0", type=float, default=S, help="long-memory tau0 in days")
    p.add_argument("--tau1", type=float, default=S)
    p.add_argument("--rho-lm", type=float, default=S, help="long-memory scale ratio")
    p.add_argument("--n-components", type=int, default=S)
    p.add_argument("--imax", type=int, default=S, help="kernel length - 1 (default 260)")
    p.add_argument("--gamma-grid", type=_float_list, default=S)
    p.add_argument("--xi-grid", type=_float_list, default=S)
    p.add_argument("--scheme", choices=["full", "projected", "fullrank"], default=S)
    p.add_argument("--k", type=int, default=S, help="cut-off rank")
    p.add_argument("--floor", type=float, default=S, help="absolute spectrum floor")
    p.add_argument("--rel-floor", type=float, default=S, help="floor relative to <sigma^2>")
    p.add_argument("--rank-grid", type=_int_list, default=S)
    p.add_argument("--mode", choices=["strict", "lenient"], default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--mc-reps", type=int, default=S)
    p.add_argument("--dof", type=float, default=S, help="Student dof (0 = Gaussian for simulate)")
    p.add_argument("--n-jobs", type=int, default=S)
    p.add_argument("--write-residuals", action="store_true", default=S)
    p.add_argument("--xi-base", type=float, default=S)
    p.add_argument("--reg-gamma", type=float, default=S)
    p.add_argument("--reg-xi", type=float, default=S)
    p.add_argument("--n-assets", type=int, default=S)
    p.add_argument("--n-obs", type=int, default=S)
    p.add_argument("--sigma", choices=["dynamic", "identity", "equicorr"], default=S)
    p.add_argument("--rho", type=float, default=S, help="equicorrelation")
    p.add_argument("--variance", type=float, default=S)
    p.add_argument("--gamma", type=float, default=S)
    p.add_argument("--xi", type=float, default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmarch", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_options(sub.add_parser(name))
    return parser


def _read_config_file(path: str) -> dict:
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_config(argv=None) -> tuple[RunConfig, bool]:
    args = vars(build_parser().parse_args(argv))
    verbose = args.pop("verbose", False)
    command = args.pop("command")
    values = {}
    if "config" in args:
        values.update(_read_config_file(args.pop("config")))
    values.update(args)
    known = set(RunConfig.__dataclass_fields__) - {"command"}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    cfg = RunConfig(command=command, **values)
    cfg.validate()
    return cfg, verbose


def main(argv=None) -> int:
    try:
        cfg, verbose = parse_config(argv)
    except (ConfigError, TypeError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[cfg.command](cfg)
    except (LmarchError, OSError) as exc:
        record = {"command": cfg.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        try:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            dump_json(Path(cfg.out) / "error.json", record)
        except OSError:
            pass
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
