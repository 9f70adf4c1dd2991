"""Batch front door.

Subcommands:
  run           execute a scenario (preset or custom config) and write
                trajectory/events/Wigner CSVs, summary JSON, and a manifest
  derive-params derive effective couplings from bare circuit parameters
  tune-params   simplex-tune the device point to chi1 = chi2, nu1 = nu2
  validate      run the acceptance suite and print a per-criterion table
  wigner        extract a Wigner-function CSV from a stored state sidecar

All numeric CSV output uses 9 significant digits and LF line endings.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import acceptance, artifacts, scenarios
from .config import ConfigError, RunConfig, load_config
from .models import ModelError
from .perturbation import DegeneracyError, tune_parameters
from .sme import StepSizeError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--scenario", help="preset scenario name (when no config given)")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--trajectories", type=int, help="override n_trajectories")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threads", type=int, default=0,
                   help="worker processes for ensembles (0 = auto)")


def _load(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.scenario:
        cfg = scenarios.default_config(args.scenario)
    else:
        raise ConfigError("provide --config PATH or --scenario NAME")
    return scenarios.merge_overrides(cfg, seed=args.seed,
                                     trajectories=args.trajectories,
                                     out=args.out)


def cmd_run(args) -> int:
    cfg = _load(args)
    out_dir = Path(args.out or cfg.run.get("output_dir", "out"))
    threads = args.threads if args.threads else int(cfg.run.get("threads", 0))
    files = scenarios.run_scenario(cfg, out_dir, threads=threads)
    print(f"{cfg.scenario}: wrote {len(files)} artifacts to {out_dir}")
    return 0


def cmd_derive_params(args) -> int:
    cfg = _load(args)
    bare = cfg.bare_params()
    if bare is None:
        raise ConfigError("derive-params needs a [bare] block")
    report = scenarios.derive_params_report(bare, include_oracle=not args.no_oracle)
    out_dir = Path(args.out or cfg.run.get("output_dir", "out"))
    path = artifacts.write_json(out_dir / "derived_params.json", report)
    print(f"wrote {path}")
    for order in ("second_order", "fourth_order"):
        row = report[order]
        print(f"{order}: chi1={row['chi1']:.4f} chi2={row['chi2']:.4f} "
              f"nu1={row['nu1']:.4f} nu2={row['nu2']:.4f} "
              f"alpha_r={row['alpha_r']:.4f} zeta12={row['zeta12']:.4f} "
              f"xi12={row['xi12']:.4f}")
    return 0


def cmd_tune_params(args) -> int:
    cfg = _load(args)
    bare = cfg.bare_params()
    if bare is None:
        raise ConfigError("tune-params needs a [bare] block")
    result = tune_parameters(bare, weight_nu=args.weight_nu,
                             max_iterations=args.max_iterations)
    out_dir = Path(args.out or cfg.run.get("output_dir", "out"))
    payload = {
        "converged": result.converged,
        "objective": result.objective,
        "iterations": result.iterations,
        "chi": list(result.chi),
        "nu": list(result.nu),
        "tuned": {
            "g1": result.params.g1, "g2": result.params.g2,
            "alpha1": result.params.alpha1, "alpha2": result.params.alpha2,
            "delta_r": result.params.delta_r, "delta_2": result.params.delta_2,
        },
    }
    path = artifacts.write_json(out_dir / "tuned_params.json", payload)
    print(f"wrote {path}; objective = {result.objective:.3e} "
          f"({'converged' if result.converged else 'not converged'} "
          f"in {result.iterations} iterations)")
    return 0 if result.converged else 3


def cmd_validate(args) -> int:
    only = set(args.only.split(",")) if args.only else None
    if only:
        unknown = only - set(acceptance.CRITERIA)
        if unknown:
            raise ConfigError(f"unknown criteria: {sorted(unknown)}")
    results = acceptance.run_all(threads=args.threads, only=only)
    failed = [r for r in results if not r.passed]
    total = sum(r.elapsed for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed "
          f"in {total:.1f}s")
    return 1 if failed else 0


def cmd_wigner(args) -> int:
    from .hilbert import partial_trace, wigner

    state = artifacts.read_state(args.state)
    if len(state.dims) == 3:
        state = partial_trace(state, [2])
    axis = np.linspace(-args.extent, args.extent, args.points)
    grid = wigner(state, axis, axis)
    out = Path(args.out or ".") / (Path(args.state).stem + "_wigner.csv")
    artifacts.write_wigner_csv(out, grid)
    note = " (grid smaller than state support)" if grid.undersized else ""
    print(f"wrote {out}{note}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parityqec",
        description="Continuous parity-measurement QEC simulator (dispersive circuit QED)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write artifacts")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_derive = sub.add_parser("derive-params",
                              help="effective couplings from bare parameters")
    _add_common(p_derive)
    p_derive.add_argument("--no-oracle", action="store_true",
                          help="skip the exact-diagonalization comparison")
    p_derive.set_defaults(fn=cmd_derive_params)

    p_tune = sub.add_parser("tune-params", help="enforce chi1=chi2, nu1=nu2")
    _add_common(p_tune)
    p_tune.add_argument("--weight-nu", type=float, default=1.0)
    p_tune.add_argument("--max-iterations", type=int, default=2000)
    p_tune.set_defaults(fn=cmd_tune_params)

    p_val = sub.add_parser("validate", help="run the acceptance suite")
    p_val.add_argument("--only", help="comma-separated criterion names")
    p_val.add_argument("--threads", type=int, default=0)
    p_val.set_defaults(fn=cmd_validate)

    p_wig = sub.add_parser("wigner", help="Wigner CSV from a stored state")
    p_wig.add_argument("--state", type=Path, required=True,
                       help="state sidecar (.npz) from a run")
    p_wig.add_argument("--extent", type=float, default=5.4)
    p_wig.add_argument("--points", type=int, default=61)
    p_wig.add_argument("--out", type=Path)
    p_wig.set_defaults(fn=cmd_wigner)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ModelError, DegeneracyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StepSizeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
