"""Command line front end: run, batch, oracle-check.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
failed oracle checks).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigurationError, NumericalFailureError
from .experiment import (
    PRESETS,
    apply_preset,
    default_params,
    materialize,
    parse_config_file,
    parse_norms,
    run,
    summarize,
)
from .oracles import run_all_checks


def _collect_params(args) -> dict:
    params = default_params()
    if args.config is not None:
        params.update(parse_config_file(args.config))
    if args.preset is not None:
        params = apply_preset(params, args.preset)
    if args.seed is not None:
        params["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        params["output_dir"] = str(args.out)
    if getattr(args, "norms", None) is not None:
        params["norms"] = parse_norms(args.norms)
    if getattr(args, "localize", None) is not None:
        parts = args.localize.split(",")
        if len(parts) != 2:
            raise ConfigurationError("--localize expects THRESHOLD,MIN_WIDTH")
        try:
            params["localize_threshold"] = float(parts[0])
            params["localize_min_width"] = float(parts[1])
        except ValueError as exc:
            raise ConfigurationError(f"bad --localize value: {args.localize!r}") from exc
    return params


def _print_summary(summaries) -> None:
    for label in ("1", "2", "inf"):
        if label in summaries:
            s = summaries[label]
            print(f"d_{label}: mean={s.mean:.4f} std={s.std:.4f} max={s.max:.4f}")


def cmd_run(args) -> int:
    config = materialize(_collect_params(args))
    records = run(config)
    print(f"ran {len(records)} steps; artifacts in {config.output_dir}")
    _print_summary(summarize(records, config.burn_in))
    return 0


def cmd_batch(args) -> int:
    if args.seeds < 1:
        raise ConfigurationError("--seeds must be at least 1")
    params = _collect_params(args)
    out_dir = Path(params["output_dir"])
    base_seed = int(params["seed"])
    rows = []
    for i in range(args.seeds):
        run_params = dict(params)
        run_params["seed"] = base_seed + i
        run_params["output_dir"] = None
        config = materialize(run_params)
        records = run(config)
        for label, s in summarize(records, config.burn_in).items():
            rows.append((base_seed + i, label, s))
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["seed,norm,mean,std,max"]
    for seed, label, s in rows:
        lines.append(f"{seed},{label},{s.mean!r},{s.std!r},{s.max!r}")
    path = out_dir / "batch_summary.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"ran {args.seeds} seeds from {base_seed}; wrote {path}")
    for label in ("1", "2", "inf"):
        means = [s.mean for _, lab, s in rows if lab == label]
        if means:
            print(f"d_{label}: mean of means = {sum(means) / len(means):.4f}")
    return 0


def cmd_oracle_check(args) -> int:
    results = run_all_checks(trials=args.trials, seed=args.seed)
    ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name} ({res.detail})")
        ok = ok and res.passed
    if not ok:
        raise NumericalFailureError("oracle cross-check failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phd-compare",
        description="Compare two independent intensity trackers through a doctrine mask.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write CSV artifacts")
    p_run.add_argument("--config", type=Path, help="flat key = value config file")
    p_run.add_argument("--preset", choices=PRESETS, help="doctrine tightness regime")
    p_run.add_argument("--seed", type=int, help="master seed override")
    p_run.add_argument("--out", type=Path, help="output directory override")
    p_run.add_argument("--norms", help="comma list from 1,2,inf")
    p_run.add_argument("--localize", metavar="THRESH,MINWIDTH",
                       help="enable discrepancy localization")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="summaries over consecutive seeds")
    p_batch.add_argument("--config", type=Path)
    p_batch.add_argument("--seeds", type=int, required=True, help="number of seeds")
    p_batch.add_argument("--preset", choices=PRESETS)
    p_batch.add_argument("--seed", type=int, help="base seed override")
    p_batch.add_argument("--out", type=Path)
    p_batch.set_defaults(func=cmd_batch)

    p_oracle = sub.add_parser(
        "oracle-check", help="cross-check fast numeric paths against slow oracles"
    )
    p_oracle.add_argument("--trials", type=int, default=10)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
