"""Command-line front end: data generation, reconstruction, sweeps, probes.

Subcommands
-----------
generate-data   forward solve, boundary extraction, noise; writes boundary.csv
run-test        full pipeline for one shipped test profile
reconstruct     reconstruction from an existing boundary.csv
sweep-n         truncation-selection sweep of the data discrepancy
probe-carleman  empirical lower-bound probe of the weighted estimate

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
Configuration files hold one ``key = value`` per line with ``#`` comments;
``--set key=value`` applies the same keys from the command line.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import artifacts, carleman, forward, picard
from .errors import ConfigError, NumericalFailureError
from .kernels import constant_drift, kernel_by_label

__all__ = ["main", "run_test", "sweep_n"]

# key -> (section, attribute, parser)
_OVERRIDE_KEYS = {
    "R": ("forward", "R", float),
    "Nv": ("forward", "Nv", int),
    "T": ("forward", "T", float),
    "Nt": ("forward", "Nt", int),
    "coag_kernel": ("kernels", "coag", str),
    "frag_kernel": ("kernels", "frag", str),
    "drift": ("kernels", "drift", float),
    "N": ("inverse", "N", int),
    "lambda": ("inverse", "lam", float),
    "lam": ("inverse", "lam", float),
    "beta": ("inverse", "beta", float),
    "eps": ("inverse", "eps", float),
    "kmax": ("inverse", "kmax", int),
    "v0": ("inverse", "v0", float),
    "L": ("inverse", "L", float),
    "rec_nodes": ("inverse", "rec_nodes", int),
    "ext": ("inverse", "ext", float),
    "admissible_bound": ("inverse", "admissible_bound", float),
}


def _parse_config_file(path: Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs[key] = value
    return pairs


def _apply_overrides(pairs: dict[str, str]):
    """Resolve override pairs into forward/inverse configs and kernels."""
    fwd_kw: dict = {}
    inv_kw: dict = {}
    kernel_kw = {"coag": "sum", "frag": "sum", "drift": 1.0}
    for key, value in pairs.items():
        if key not in _OVERRIDE_KEYS:
            raise ConfigError(f"unknown configuration key '{key}'")
        section, attr, parse = _OVERRIDE_KEYS[key]
        try:
            parsed = parse(value)
        except ValueError:
            raise ConfigError(f"bad value for '{key}': {value!r}") from None
        if section == "forward":
            fwd_kw[attr] = parsed
        elif section == "inverse":
            inv_kw[attr] = parsed
        else:
            kernel_kw[attr] = parsed
    try:
        K = kernel_by_label(str(kernel_kw["coag"]))
        V = kernel_by_label(str(kernel_kw["frag"]))
        b = constant_drift(float(kernel_kw["drift"]))
        inv_cfg = picard.InverseConfig(**inv_kw)
        fwd_cfg = forward.ForwardConfig(K=K, V=V, b=b, **fwd_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return fwd_cfg, inv_cfg, K, V, b


def _collect_pairs(args) -> dict[str, str]:
    pairs: dict[str, str] = {}
    if getattr(args, "config", None):
        pairs.update(_parse_config_file(Path(args.config)))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def _check_grid_alignment(fwd_cfg: forward.ForwardConfig, inv_cfg: picard.InverseConfig):
    """The reconstruction grid must be the forward grid restricted to [0, L]."""
    dv_f = fwd_cfg.R / (fwd_cfg.Nv - 1)
    dv_r = inv_cfg.L / (inv_cfg.rec_nodes - 1)
    if abs(dv_f - dv_r) > 1e-12 * dv_f:
        raise ConfigError(
            f"grid spacing mismatch: forward dv={dv_f:.6g}, reconstruction dv={dv_r:.6g}"
        )
    try:
        fwd_cfg.grid.index_of(inv_cfg.L)
    except ValueError:
        raise ConfigError(f"L={inv_cfg.L} is not a node of the forward grid") from None


def _clean_boundary_data(fwd_cfg: forward.ForwardConfig, inv_cfg: picard.InverseConfig, test_id):
    profile = forward.initial_profile(test_id)
    sol = forward.solve_forward(replace(fwd_cfg, profile=profile))
    return profile, sol, forward.extract_boundary_data(sol, inv_cfg.L)


def _write_run_artifacts(out: Path, history, result, extra_metrics: dict, figures: bool):
    v = result.grid.nodes
    f0_true = result.f0_true if result.f0_true is not None else np.full(v.size, np.nan)
    artifacts.write_table(out / "reconstruction.csv", ["v", "f0_true", "f0_rec"],
                          [v, f0_true, result.f0_rec])
    k = np.arange(1, history.consec_errors.size + 1)
    artifacts.write_table(out / "convergence.csv", ["k", "consec_error"],
                          [k, history.consec_errors])

    t = result.tgrid.nodes
    nv, nt = v.size, t.size
    vv = np.repeat(v, nt)
    tt = np.tile(t, nv)
    f_true = result.f_true if result.f_true is not None else np.full((nv, nt), np.nan)
    err = result.pointwise_err if result.pointwise_err is not None else np.full((nv, nt), np.nan)
    artifacts.write_table(
        out / "field.csv",
        ["v", "t", "f_true", "f_rec", "pointwise_err"],
        [vv, tt, f_true.ravel(), result.f_rec.ravel(), err.ravel()],
    )

    metrics_entries = {
        "rel_l2": result.rel_l2,
        "rel_linf": result.rel_linf,
        "empirical_rho": history.empirical_rho,
        "mean_rho": history.mean_rho,
    }
    metrics_entries.update(extra_metrics)
    artifacts.write_metrics(out / "metrics.json", metrics_entries)

    if figures:
        from . import plots

        plots.plot_reconstruction(v, result.f0_rec, result.f0_true,
                                  out / "reconstruction.png")
        plots.plot_convergence(history.consec_errors, out / "convergence.png")
        plots.plot_field(v, t, result.f_rec, result.f_true, result.pointwise_err,
                         out / "field.png")


def _summary_text(title: str, entries: dict) -> str:
    lines = [title]
    for key, value in entries.items():
        if isinstance(value, float):
            lines.append(f"  {key:>16s} : {value:.6g}")
        else:
            lines.append(f"  {key:>16s} : {value}")
    return "\n".join(lines) + "\n"


def run_test(test_id: int, noise: float, seed: int, pairs: dict[str, str],
             out_dir: Path, figures: bool = True) -> int:
    """Forward solve, noise, reconstruction, metrics, artifacts."""
    fwd_cfg, inv_cfg, K, V, b = _apply_overrides(pairs)
    _check_grid_alignment(fwd_cfg, inv_cfg)
    if noise < 0:
        raise ConfigError("noise level must be nonnegative")
    out = Path(out_dir)

    stage = "forward"
    try:
        profile, sol, bd_clean = _clean_boundary_data(fwd_cfg, inv_cfg, test_id)
        stage = "noise"
        bd = forward.add_noise(bd_clean, noise, seed) if noise > 0 else bd_clean
        artifacts.write_boundary_csv(out / "boundary.csv", bd)
        stage = "reconstruction"
        history, result = picard.run(bd, inv_cfg, K, V, b)
        stage = "metrics"
        picard.metrics(result, profile, true_field=sol)
    except NumericalFailureError as exc:
        raise NumericalFailureError(f"[{stage}] {exc}", step=exc.step) from exc

    extra = {"test": test_id, "noise": noise, "seed": seed}
    _write_run_artifacts(out, history, result, extra, figures)
    summary = _summary_text(
        f"reconstruction test {test_id} (noise {noise:g}, seed {seed})",
        {
            "rel_l2": result.rel_l2,
            "rel_linf": result.rel_linf,
            "empirical_rho": history.empirical_rho,
            "out_dir": str(out),
        },
    )
    artifacts.atomic_write_text(out / "summary.txt", summary)
    print(summary, end="")
    return 0


def sweep_n(test_id: int, n_min: int, n_max: int, pairs: dict[str, str],
            out_dir: Path, figures: bool = True) -> int:
    """Truncation sweep on clean data; writes sweep.csv."""
    fwd_cfg, inv_cfg, _, _, _ = _apply_overrides(pairs)
    _check_grid_alignment(fwd_cfg, inv_cfg)
    if n_min > n_max or n_min < 0:
        raise ConfigError(f"empty or invalid truncation range {n_min}..{n_max}")
    out = Path(out_dir)
    stage = "forward"
    try:
        _, _, bd_clean = _clean_boundary_data(fwd_cfg, inv_cfg, test_id)
        stage = "sweep"
        n_values, phi = picard.phi_of_N(bd_clean, range(n_min, n_max + 1))
    except NumericalFailureError as exc:
        raise NumericalFailureError(f"[{stage}] {exc}", step=exc.step) from exc
    artifacts.write_table(out / "sweep.csv", ["N", "phi"], [n_values, phi])
    if figures:
        from . import plots

        plots.plot_sweep(n_values, phi, out / "sweep.png")
    print(f"sweep test {test_id}: N in [{n_min}, {n_max}], "
          f"phi range [{phi.min():.4g}, {phi.max():.4g}]")
    return 0


def probe_carleman(pairs: dict[str, str], out_dir: Path, seed: int,
                   count: int = 20, figures: bool = True) -> int:
    """Minimum estimate ratio over a random trace-free suite, per weight strength."""
    _, inv_cfg, _, _, _ = _apply_overrides(pairs)
    out = Path(out_dir)
    lams = [2.0, 4.0, 8.0]
    suite = carleman.random_trace_free_functions(inv_cfg.L, count, seed)
    minima = []
    for lam in lams:
        params = carleman.CarlemanParams(lam=lam, beta=inv_cfg.beta, v0=inv_cfg.v0)
        ratios = [
            carleman.carleman_ratio_probe(params, u, du, d2u, inv_cfg.L)
            for (u, du, d2u) in suite
        ]
        minima.append(min(ratios))
    artifacts.write_table(out / "probe.csv", ["lam", "min_ratio"],
                          [np.asarray(lams), np.asarray(minima)])
    if figures:
        from . import plots

        plots.plot_probe(lams, minima, out / "probe.png")
    for lam, m in zip(lams, minima):
        print(f"lam={lam:g}: min ratio over {count} functions = {m:.6g}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coagfrag",
        description="Coagulation-fragmentation forward runs and initial-density reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, test_required=False):
        p.add_argument("--test", type=int, choices=[1, 2, 3, 4], required=test_required,
                       help="shipped test profile")
        p.add_argument("--noise", type=float, default=0.05, help="multiplicative noise level")
        p.add_argument("--seed", type=int, default=7, help="noise RNG seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="artifact directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="configuration override (repeatable)")
        p.add_argument("--config", type=Path, help="configuration file (key = value lines)")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p = sub.add_parser("generate-data", help="forward solve and boundary data CSV")
    common(p, test_required=True)

    p = sub.add_parser("run-test", help="full reconstruction pipeline for one test")
    common(p, test_required=True)

    p = sub.add_parser("reconstruct", help="reconstruction from an existing boundary CSV")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="boundary.csv to invert")

    p = sub.add_parser("sweep-n", help="truncation-selection sweep on clean data")
    common(p, test_required=True)
    p.add_argument("--nmin", type=int, default=15)
    p.add_argument("--nmax", type=int, default=45)

    p = sub.add_parser("probe-carleman", help="empirical weighted-estimate probe")
    common(p)
    p.add_argument("--count", type=int, default=20, help="size of the random function suite")
    return parser


def _dispatch(args) -> int:
    pairs = _collect_pairs(args)
    figures = not args.no_figures
    if args.command == "generate-data":
        fwd_cfg, inv_cfg, _, _, _ = _apply_overrides(pairs)
        _check_grid_alignment(fwd_cfg, inv_cfg)
        if args.noise < 0:
            raise ConfigError("noise level must be nonnegative")
        _, _, bd = _clean_boundary_data(fwd_cfg, inv_cfg, args.test)
        if args.noise > 0:
            bd = forward.add_noise(bd, args.noise, args.seed)
        artifacts.write_boundary_csv(args.out / "boundary.csv", bd)
        print(f"wrote {args.out / 'boundary.csv'} (test {args.test}, noise {args.noise:g})")
        return 0
    if args.command == "run-test":
        return run_test(args.test, args.noise, args.seed, pairs, args.out, figures)
    if args.command == "reconstruct":
        fwd_cfg, inv_cfg, K, V, b = _apply_overrides(pairs)
        bd = artifacts.read_boundary_csv(args.data)
        history, result = picard.run(bd, inv_cfg, K, V, b)
        extra = {"data": str(args.data)}
        if args.test is not None:
            _check_grid_alignment(fwd_cfg, inv_cfg)
            profile, sol, _ = _clean_boundary_data(fwd_cfg, inv_cfg, args.test)
            picard.metrics(result, profile, true_field=sol)
            extra["test"] = args.test
        _write_run_artifacts(args.out, history, result, extra, figures)
        print(f"reconstruction artifacts in {args.out}")
        return 0
    if args.command == "sweep-n":
        return sweep_n(args.test, args.nmin, args.nmax, pairs, args.out, figures)
    if args.command == "probe-carleman":
        return probe_carleman(pairs, args.out, args.seed, args.count, figures)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except NumericalFailureError as exc:
        print(f"coagfrag: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        print(f"coagfrag: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
