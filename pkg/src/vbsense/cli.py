"""Command-line experiment runner.

Every output file embeds its resolved configuration and seed in comment
headers (CSV) or a config object (JSON), and no timestamps or environment
state enter the outputs, so identical invocations produce byte-identical
files.  Exit codes: 0 success, 2 invalid input or usage, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import find_threshold, run_trials, trajectory
from .distributions import parse_distribution
from .ensemble import (
    EnsembleSpec,
    WeightModel,
    nearest_feasible_n,
    sample_graph,
    write_graph_summary,
)
from .errors import ValidationError, VbsenseError
from .optimizer import EvaluatorConfig, SearchSpace, optimize

FIDELITY = {
    "quick": {"n": 10_000, "trials": 50, "resolution": 2e-3},
    "paper": {"n": 100_000, "trials": 200, "resolution": 1e-3},
}

TABLE2_ROWS = [
    ("regular", "x^4", "x^5", (0.30, 0.52)),
    ("right-regular", "0.931x^3+0.035x^17+0.034x^18", "x^5", (0.42, 0.64)),
    ("left-regular", "x^4", "0.71x^3+0.183x^5+0.107x^20", (0.42, 0.64)),
    ("bi-irregular", "0.9x^3+0.1x^13", "0.9375x^4+0.0625x^20", (0.46, 0.68)),
]

TABLE3_ROWS = [
    (5, "0.931x^3+0.035x^17+0.034x^18", (0.42, 0.64), (0.30, 0.52)),
    (6, "0.917x^3+0.082x^15+0.001x^19", (0.32, 0.52), (0.24, 0.44)),
    (7, "0.906x^3+0.034x^13+0.06x^14", (0.26, 0.44), (0.20, 0.37)),
    (8, "0.896x^3+0.04x^12+0.064x^13", (0.21, 0.37), (0.16, 0.32)),
]

TABLE4_ROWS = [
    (4, 5, "14/15x^3+1/15x^18", (0.42, 0.64)),
    (4, 6, "11/12x^3+1/12x^15", (0.32, 0.52)),
    (5, 9, "7/8x^3+1/8x^19", (0.26, 0.44)),
    (5, 10, "6/7x^3+1/7x^17", (0.22, 0.40)),
]

FIG1_SPEC = ("0.9x^3+0.1x^13", "0.9375x^4+0.0625x^20")
FIG1_ALPHAS = (0.575, 0.595)

FIG2_CURVES = [
    ("right_regular", "0.931x^3+0.035x^17+0.034x^18", "x^5", 0.48, 0.60),
    ("bi_irregular", "0.9x^3+0.1x^13", "0.9375x^4+0.0625x^20", 0.52, 0.66),
]


def _header_lines(command: str, config: dict) -> str:
    lines = [f"# vbsense={__version__} command={command}"]
    for k in sorted(config):
        lines.append(f"# {k}={config[k]}")
    return "\n".join(lines) + "\n"


def _parse_sides(args) -> tuple:
    lam = parse_distribution(args.lam, side="variable")
    rho = parse_distribution(args.rho, side="check")
    return lam, rho


def _weight_model(text: str) -> WeightModel:
    parts = text.split(":")
    if parts[0] == "constant":
        return WeightModel.constant(float(parts[1]) if len(parts) > 1 else 1.0)
    if parts[0] == "uniform":
        if len(parts) != 3:
            raise ValidationError("uniform weights need uniform:LOW:HIGH")
        return WeightModel.uniform(float(parts[1]), float(parts[2]))
    raise ValidationError(f"unknown weight model {text!r}")


def cmd_gen(args) -> int:
    lam, rho = _parse_sides(args)
    spec = EnsembleSpec(
        n=args.n, lam=lam, rho=rho, alpha=0.0, weight_model=_weight_model(args.weight)
    )
    graph = sample_graph(spec, args.seed)
    config = {
        "lambda": lam.to_text(),
        "rho": rho.to_text(),
        "n": args.n,
        "seed": args.seed,
        "weight": args.weight,
    }
    edges_path = Path(args.out_edges)
    with edges_path.open("w") as fh:
        fh.write(_header_lines("gen", config))
        graph.write_edge_csv(fh)
    with Path(args.out_summary).open("w") as fh:
        write_graph_summary(graph, fh, config)
    print(f"wrote {edges_path} ({graph.num_edges} edges, n={graph.n}, m={graph.m})")
    return 0


def cmd_trajectory(args) -> int:
    lam, rho = _parse_sides(args)
    spec = EnsembleSpec(n=args.n, lam=lam, rho=rho, alpha=args.alpha)
    stats = trajectory(spec, args.trials, args.seed, workers=args.workers)
    config = {
        "lambda": lam.to_text(),
        "rho": rho.to_text(),
        "n": args.n,
        "alpha": args.alpha,
        "trials": args.trials,
        "seed": args.seed,
    }
    with Path(args.out).open("w") as fh:
        fh.write(_header_lines("trajectory", config))
        fh.write("iteration,alpha_hat\n")
        for i, a in enumerate(stats.mean_alpha):
            fh.write(f"{i},{float(a)!r}\n")
    print(f"wrote {args.out} ({stats.mean_alpha.shape[0]} iterations)")
    return 0


def cmd_threshold(args) -> int:
    lam, rho = _parse_sides(args)
    fid = FIDELITY[args.fidelity]
    n = args.n or fid["n"]
    trials = args.trials or fid["trials"]
    resolution = args.resolution or fid["resolution"]
    result = find_threshold(
        lam,
        rho,
        n=n,
        trials_per_probe=trials,
        bracket=tuple(args.bracket),
        resolution=resolution,
        success_level=args.success_level,
        seed=args.seed,
        workers=args.workers,
    )
    config = {
        "lambda": lam.to_text(),
        "rho": rho.to_text(),
        "n": n,
        "trials_per_probe": trials,
        "bracket": tuple(args.bracket),
        "resolution": resolution,
        "success_level": args.success_level,
        "seed": args.seed,
    }
    with Path(args.out_json).open("w") as fh:
        result.write_json(fh, config)
    if args.out_csv:
        with Path(args.out_csv).open("w") as fh:
            fh.write(_header_lines("threshold", config))
            fh.write("alpha,success_fraction,trials,stderr\n")
            for p in result.probes:
                fh.write(f"{p.alpha!r},{p.success_fraction!r},{p.trials},{p.stderr!r}\n")
    print(f"threshold estimate {result.estimate:.4f} in [{result.lower:.4f}, {result.upper:.4f}]")
    return 0


def cmd_optimize(args) -> int:
    fid = FIDELITY[args.fidelity]
    if args.mode == "bimodal":
        max_components = 2
    else:
        max_components = args.max_components
    if args.rho:
        rho = parse_distribution(args.rho, side="check")
        space = SearchSpace(
            dv_mean=args.dv,
            rho=rho,
            max_degree=args.max_degree,
            max_components=max_components,
            grid_step=args.grid_step,
        )
    elif args.dc:
        space = SearchSpace(
            dv_mean=args.dv,
            dc_mean=args.dc,
            max_degree=args.max_degree,
            max_components=max_components,
            grid_step=args.grid_step,
        )
    else:
        raise ValidationError("give --rho or --dc")
    evaluator = EvaluatorConfig(
        full_n=fid["n"], full_trials=fid["trials"], full_resolution=fid["resolution"]
    )
    result = optimize(space, evaluator, budget=args.budget, seed=args.seed, workers=args.workers)
    config = {
        "mode": args.mode,
        "dv": args.dv,
        "rho": args.rho or "",
        "dc": args.dc or "",
        "max_degree": args.max_degree,
        "max_components": max_components,
        "grid_step": args.grid_step,
        "budget": args.budget,
        "fidelity": args.fidelity,
        "seed": args.seed,
        "budget_exhausted": result.budget_exhausted,
    }
    with Path(args.out).open("w") as fh:
        result.write_csv(fh, config)
    best = result.best
    print(
        f"best candidate {best.lam.to_text()} / {best.rho.to_text()} "
        f"threshold {best.threshold_estimate:.4f}"
    )
    return 0


def _reproduce_table2(args, outdir: Path) -> None:
    fid = FIDELITY[args.fidelity]
    config = {"seed": args.seed, "fidelity": args.fidelity}
    rows = []
    estimates = {}
    for graph_type, lam_s, rho_s, bracket in TABLE2_ROWS:
        lam = parse_distribution(lam_s, side="variable")
        rho = parse_distribution(rho_s, side="check")
        res = find_threshold(
            lam,
            rho,
            n=nearest_feasible_n(lam, rho, fid["n"]),
            trials_per_probe=fid["trials"],
            bracket=bracket,
            resolution=fid["resolution"],
            seed=(args.seed,),
            workers=args.workers,
        )
        estimates[graph_type] = res.estimate
        rows.append((graph_type, lam_s, rho_s, res))
    base = estimates["regular"]
    path = outdir / "table2.csv"
    with path.open("w") as fh:
        fh.write(_header_lines("reproduce table2", config))
        fh.write("graph_type,lambda,rho,threshold_estimate,lower,upper,improvement_pct\n")
        for graph_type, lam_s, rho_s, res in rows:
            imp = 100.0 * (res.estimate - base) / base
            fh.write(
                f"{graph_type},{lam_s},{rho_s},{res.estimate!r},{res.lower!r},{res.upper!r},{imp:.2f}\n"
            )
    print(f"wrote {path}")


def _reproduce_table3(args, outdir: Path) -> None:
    fid = FIDELITY[args.fidelity]
    config = {"seed": args.seed, "fidelity": args.fidelity}
    path = outdir / "table3.csv"
    with path.open("w") as fh:
        fh.write(_header_lines("reproduce table3", config))
        fh.write("dc,graph_type,lambda,threshold_estimate,lower,upper\n")
        for dc, lam_s, opt_bracket, reg_bracket in TABLE3_ROWS:
            rho = parse_distribution(f"x^{dc}", side="check")
            for graph_type, lam_text, bracket in (
                ("optimized", lam_s, opt_bracket),
                ("regular", "x^4", reg_bracket),
            ):
                lam = parse_distribution(lam_text, side="variable")
                res = find_threshold(
                    lam,
                    rho,
                    n=nearest_feasible_n(lam, rho, fid["n"]),
                    trials_per_probe=fid["trials"],
                    bracket=bracket,
                    resolution=fid["resolution"],
                    seed=(args.seed, dc),
                    workers=args.workers,
                )
                fh.write(
                    f"{dc},{graph_type},{lam_text},{res.estimate!r},{res.lower!r},{res.upper!r}\n"
                )
    print(f"wrote {path}")


def _reproduce_table4(args, outdir: Path) -> None:
    fid = FIDELITY[args.fidelity]
    config = {"seed": args.seed, "fidelity": args.fidelity}
    path = outdir / "table4.csv"
    with path.open("w") as fh:
        fh.write(_header_lines("reproduce table4", config))
        fh.write("dv,dc,lambda,threshold_estimate,lower,upper\n")
        for dv, dc, lam_s, bracket in TABLE4_ROWS:
            lam = parse_distribution(lam_s, side="variable")
            rho = parse_distribution(f"x^{dc}", side="check")
            res = find_threshold(
                lam,
                rho,
                n=nearest_feasible_n(lam, rho, fid["n"]),
                trials_per_probe=fid["trials"],
                bracket=bracket,
                resolution=fid["resolution"],
                seed=(args.seed, dv, dc),
                workers=args.workers,
            )
            fh.write(f"{dv},{dc},{lam.to_text()},{res.estimate!r},{res.lower!r},{res.upper!r}\n")
    print(f"wrote {path}")


def _reproduce_fig1(args, outdir: Path) -> None:
    fid = FIDELITY[args.fidelity]
    lam = parse_distribution(FIG1_SPEC[0], side="variable")
    rho = parse_distribution(FIG1_SPEC[1], side="check")
    for alpha in FIG1_ALPHAS:
        spec = EnsembleSpec(n=fid["n"], lam=lam, rho=rho, alpha=alpha)
        stats = trajectory(spec, 50, (args.seed,), workers=args.workers)
        tag = "below" if alpha < 0.5795 else "above"
        path = outdir / f"fig1_{tag}.csv"
        config = {
            "lambda": FIG1_SPEC[0],
            "rho": FIG1_SPEC[1],
            "n": fid["n"],
            "alpha": alpha,
            "trials": 50,
            "seed": args.seed,
        }
        with path.open("w") as fh:
            fh.write(_header_lines("reproduce fig1", config))
            fh.write("iteration,alpha_hat\n")
            for i, a in enumerate(stats.mean_alpha):
                fh.write(f"{i},{float(a)!r}\n")
        print(f"wrote {path}")


def _reproduce_fig2(args, outdir: Path) -> None:
    fid = FIDELITY[args.fidelity]
    step = 0.01 if args.fidelity == "quick" else 0.005
    for tag, lam_s, rho_s, lo, hi in FIG2_CURVES:
        lam = parse_distribution(lam_s, side="variable")
        rho = parse_distribution(rho_s, side="check")
        alphas = np.arange(lo, hi + step / 2, step)
        path = outdir / f"fig2_{tag}.csv"
        config = {
            "lambda": lam_s,
            "rho": rho_s,
            "n": fid["n"],
            "trials": fid["trials"],
            "seed": args.seed,
            "alpha_min": lo,
            "alpha_max": hi,
            "alpha_step": step,
        }
        with path.open("w") as fh:
            fh.write(_header_lines("reproduce fig2", config))
            fh.write("alpha,success_fraction,mean_unverified_fraction,trials\n")
            for alpha in alphas:
                spec = EnsembleSpec(n=fid["n"], lam=lam, rho=rho, alpha=float(alpha))
                ts = run_trials(
                    spec, fid["trials"], (args.seed,), workers=args.workers
                )
                fh.write(
                    f"{float(alpha)!r},{ts.success_fraction!r},"
                    f"{ts.mean_unverified_fraction!r},{ts.trials_run}\n"
                )
        print(f"wrote {path}")


def cmd_reproduce(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "table2": _reproduce_table2,
        "table3": _reproduce_table3,
        "table4": _reproduce_table4,
        "fig1": _reproduce_fig1,
        "fig2": _reproduce_fig2,
    }
    dispatch[args.target](args, outdir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vbsense",
        description="Verification-based sparse recovery experiments over irregular sensing graphs",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_workers=True):
        sp.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
        if with_workers:
            sp.add_argument("--workers", type=int, default=1, help="parallel trial workers")

    g = sub.add_parser("gen", help="sample a sensing graph and write its edge list")
    g.add_argument("--lambda", dest="lam", required=True, help='variable-side distribution, e.g. "0.9x^3+0.1x^13"')
    g.add_argument("--rho", required=True, help='check-side distribution, e.g. "x^5"')
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--weight", default="constant:1", help="constant:V or uniform:LO:HI")
    g.add_argument("--out-edges", default="edges.csv")
    g.add_argument("--out-summary", default="graph.json")
    common(g, with_workers=False)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("trajectory", help="mean unverified-non-zero fraction per iteration")
    t.add_argument("--lambda", dest="lam", required=True)
    t.add_argument("--rho", required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--trials", type=int, default=50)
    t.add_argument("--out", default="trajectory.csv")
    common(t)
    t.set_defaults(func=cmd_trajectory)

    th = sub.add_parser("threshold", help="binary-search the success threshold")
    th.add_argument("--lambda", dest="lam", required=True)
    th.add_argument("--rho", required=True)
    th.add_argument("--n", type=int, default=None, help="overrides fidelity tier")
    th.add_argument("--trials", type=int, default=None, help="trials per probe")
    th.add_argument("--bracket", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    th.add_argument("--resolution", type=float, default=None)
    th.add_argument("--success-level", type=float, default=0.5)
    th.add_argument("--fidelity", choices=sorted(FIDELITY), default="paper")
    th.add_argument("--out-json", default="threshold.json")
    th.add_argument("--out-csv", default="probes.csv")
    common(th)
    th.set_defaults(func=cmd_threshold)

    o = sub.add_parser("optimize", help="search degree distributions for the best threshold")
    o.add_argument("--mode", choices=["bimodal", "sparse"], default="bimodal")
    o.add_argument("--dv", type=float, required=True, help="target mean variable degree")
    o.add_argument("--rho", default=None, help="fixed check-side distribution")
    o.add_argument("--dc", type=float, default=None, help="search a bimodal check side with this mean")
    o.add_argument("--max-degree", type=int, default=20)
    o.add_argument("--max-components", type=int, default=4, help="sparse mode only")
    o.add_argument("--grid-step", type=float, default=1e-3)
    o.add_argument("--budget", type=int, default=10_000, help="total probe budget")
    o.add_argument("--fidelity", choices=sorted(FIDELITY), default="quick")
    o.add_argument("--out", default="candidates.csv")
    common(o)
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("reproduce", help="one-command reproduction recipes")
    r.add_argument("target", choices=["table2", "table3", "table4", "fig1", "fig2"])
    r.add_argument("--fidelity", choices=sorted(FIDELITY), default="paper")
    r.add_argument("--outdir", default="reproduce-out")
    common(r)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VbsenseError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
