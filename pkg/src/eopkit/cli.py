"""Command-line interface.

Subcommands:

* ``metrics``      fit a penalized linear model and tabulate fairness gaps
* ``verify-eop``   exhaustively check the four EOP equivalences
* ``verify-table`` brute-force the optimal-predictions table claims
* ``sweep``        cross-validated loss-bound sweep of both trainers

A key-value configuration file (``key = value`` lines, ``#`` comments)
can be passed with ``--config``; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .core import Dataset, GroupCoefficients, LinearModel, UtilitySpec, crime_utility_spec
from .data import ColumnRoles, load_table, preprocess_communities, read_snapshot
from .eop import (
    enumerate_joint_distributions,
    verify_accuracy_parity_equivalence,
    verify_equality_of_odds_equivalence,
    verify_pvp_equivalence,
    verify_statistical_parity_equivalence,
)
from .experiments import SweepRow, run_epsilon_sweep, summarize
from .metrics import (
    accuracy_parity_gap,
    equality_of_odds_gap,
    group_average_utility,
    mean_difference,
    min_group_average_utility,
    negative_residual_difference,
    positive_residual_difference,
    predictive_value_parity_gap,
    statistical_parity_gap,
)
from .solver import (
    default_loss_bound_grid,
    fit_l1_regularized,
    select_lambda,
)
from .tradeoffs import CRITERION_NAMES, random_verification_instance, verify_table_row

PROPOSITIONS = (
    ("equality of odds <-> absolutist EOP", verify_equality_of_odds_equivalence),
    ("statistical parity <-> absolutist EOP", verify_statistical_parity_equivalence),
    ("accuracy parity <-> absolutist EOP", verify_accuracy_parity_equivalence),
    ("predictive value parity <-> relative EOP", verify_pvp_equivalence),
)


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args, config, name, default, cast=str):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        raw = config[name]
        return cast(raw)
    return default


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _parse_utility(text: str) -> UtilitySpec:
    """Parse ``group:alpha,beta,gamma,delta;group:...`` into a spec."""
    groups = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        label, coeffs = chunk.split(":")
        values = [float(v) for v in coeffs.split(",")]
        if len(values) != 4:
            raise SystemExit(f"utility for group {label!r} needs 4 coefficients")
        try:
            key = int(label)
        except ValueError:
            key = label.strip()
        groups[key] = GroupCoefficients(*values)
    return UtilitySpec(groups)


def _load_dataset(args, config) -> Dataset:
    path = _resolve(args, config, "data", None)
    if path is None:
        raise SystemExit("a dataset path is required (--data or config 'data')")
    fmt = _resolve(args, config, "format", "communities")
    if fmt == "communities":
        table = load_table(path)
        dataset, report = preprocess_communities(table, ColumnRoles.communities_default())
        print(
            f"# loaded {report.raw_observations} raw observations, "
            f"{report.descriptive_feature_count} descriptive features; "
            f"dropped {report.rows_dropped} rows, "
            f"{len(report.columns_dropped)} sparse columns; "
            f"group sizes {report.group_sizes}",
            file=sys.stderr,
        )
        return dataset
    if fmt == "snapshot":
        return read_snapshot(path)
    raise SystemExit(f"unknown dataset format {fmt!r}")


def _pick_lambda(args, config, dataset) -> float:
    lam = _resolve(args, config, "lam", None, float)
    if lam is not None:
        return float(lam)
    grid = _resolve(args, config, "lambda_grid", [0.0, 1e-4, 1e-3, 1e-2, 1e-1], _float_list)
    seed = int(_resolve(args, config, "seed", 0, int))
    lam = select_lambda(dataset, grid, folds=10, seed=seed)
    print(f"# selected lam = {lam:g} by 10-fold cross validation", file=sys.stderr)
    return lam


def _emit(lines, output):
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_metrics(args, config) -> int:
    dataset = _load_dataset(args, config)
    lam = _pick_lambda(args, config, dataset)
    theta, _ = fit_l1_regularized(dataset, lam)
    model = LinearModel(theta)
    yhat = model.predict_all(dataset.X)
    reports = [
        mean_difference(yhat, dataset.groups),
        positive_residual_difference(dataset.y, yhat, dataset.groups),
        negative_residual_difference(dataset.y, yhat, dataset.groups),
        accuracy_parity_gap(dataset.y, yhat, dataset.groups),
    ]
    if dataset.mode == "classification":
        hard = (yhat >= 0.5).astype(int)
        reports += [
            statistical_parity_gap(hard, dataset.groups),
            equality_of_odds_gap(dataset.y.astype(int), hard, dataset.groups),
            predictive_value_parity_gap(dataset.y.astype(int), hard, dataset.groups),
        ]
    lines = ["metric,gap,per_group,strata_skipped"]
    for rep in reports:
        rec = rep.to_record()
        lines.append(
            f"{rec['metric']},{rec['gap']:.10g},{rec['per_group']},{rec['strata_skipped']}"
        )
    utility = _resolve(args, config, "utility", None, _parse_utility)
    spec = utility or (crime_utility_spec() if set(dataset.group_labels) <= {0, 1} else None)
    if spec is not None:
        per = group_average_utility(dataset, model, spec)
        for g in sorted(per, key=str):
            lines.append(f"group_average_utility[{g}],{per[g]:.10g},,")
        lines.append(
            f"min_group_average_utility,{min_group_average_utility(dataset, model, spec):.10g},,"
        )
    _emit(lines, _resolve(args, config, "output", None))
    return 0


def cmd_verify_eop(args, config) -> int:
    denominator = int(_resolve(args, config, "denominator", 8, int))
    counts = [0] * len(PROPOSITIONS)
    cases = 0
    for dist in enumerate_joint_distributions(denominator):
        cases += 1
        for i, (_, verifier) in enumerate(PROPOSITIONS):
            if not verifier(dist):
                counts[i] += 1
    failed = sum(counts) > 0
    for (name, _), bad in zip(PROPOSITIONS, counts):
        print(f"{name}: {cases} cases enumerated, {bad} counterexamples")
    return 1 if failed else 0


def cmd_verify_table(args, config) -> int:
    seeds = int(_resolve(args, config, "seeds", 100, int))
    failures = 0
    print("criterion,mode,task,seeds,failures")
    for criterion in CRITERION_NAMES:
        for mode in ("realizable", "unrealizable"):
            for task in ("classification", "regression"):
                bad = 0
                for seed in range(seeds):
                    hclass, sample = random_verification_instance(mode, task, seed)
                    if not verify_table_row(criterion, mode, task, hclass, sample):
                        bad += 1
                failures += bad
                print(f"{criterion},{mode},{task},{seeds},{bad}")
    return 1 if failures else 0


def cmd_sweep(args, config) -> int:
    dataset = _load_dataset(args, config)
    lam = _pick_lambda(args, config, dataset)
    utility = _resolve(args, config, "utility", None, _parse_utility)
    spec = utility or crime_utility_spec()
    if not spec.covers(dataset.group_labels):
        raise SystemExit(
            "the default utility functions cover groups 0/1 only; "
            "pass --utility for other group labels"
        )
    eps_grid = _resolve(args, config, "eps_grid", None, _float_list)
    if eps_grid is None:
        _, eps_min = fit_l1_regularized(dataset, lam)
        points = int(_resolve(args, config, "eps_points", 12, int))
        eps_grid = default_loss_bound_grid(eps_min, points=points)
        print(
            f"# minimal loss {eps_min:.6g}; geometric bound grid "
            f"[{eps_grid[0]:.6g}, {eps_grid[-1]:.6g}] with {points} points",
            file=sys.stderr,
        )
    folds = int(_resolve(args, config, "folds", 5, int))
    seed = int(_resolve(args, config, "seed", 0, int))
    rows = run_epsilon_sweep(dataset, spec, lam, eps_grid, folds=folds, seed=seed)
    lines = [",".join(SweepRow.HEADER)] + [row.as_line() for row in rows]
    _emit(lines, _resolve(args, config, "output", None))
    dead = [
        (method, eps)
        for entry in summarize(rows)
        if entry["infeasible"] == entry["folds"]
        for method, eps in [(entry["method"], entry["loss_bound"])]
    ]
    for entry in summarize(rows):
        print(
            f"# {entry['method']} eps={entry['loss_bound']:.6g} "
            f"prd={entry['prd_mean']:.4g} nrd={entry['nrd_mean']:.4g} "
            f"min_util={entry['min_group_utility_mean']:.4g} "
            f"infeasible={entry['infeasible']}/{entry['folds']}",
            file=sys.stderr,
        )
    if dead:
        print(f"# infeasible at every fold: {dead}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eopkit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="key = value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("--data", help="dataset path")
        p.add_argument("--format", choices=("communities", "snapshot"))
        p.add_argument("--lam", type=float, help="l1 weight (skips selection)")
        p.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list,
                       help="comma-separated candidates for 10-fold selection")
        p.add_argument("--seed", type=int)
        p.add_argument("--utility", type=_parse_utility,
                       help="per-group coefficients 'g:a,b,c,d;g:a,b,c,d'")
        p.add_argument("--output", help="write the table here instead of stdout")

    p_metrics = sub.add_parser("metrics", help="tabulate fairness gap metrics")
    add_data_flags(p_metrics)
    p_metrics.set_defaults(func=cmd_metrics)

    p_eop = sub.add_parser("verify-eop", help="check the EOP equivalences")
    p_eop.add_argument("--denominator", type=int,
                       help="mass grid resolution (default 8)")
    p_eop.set_defaults(func=cmd_verify_eop)

    p_table = sub.add_parser("verify-table", help="check the optimal-prediction claims")
    p_table.add_argument("--seeds", type=int, help="randomized instances per cell")
    p_table.set_defaults(func=cmd_verify_table)

    p_sweep = sub.add_parser("sweep", help="cross-validated loss-bound sweep")
    add_data_flags(p_sweep)
    p_sweep.add_argument("--eps-grid", dest="eps_grid", type=_float_list,
                         help="explicit loss-bound grid")
    p_sweep.add_argument("--eps-points", dest="eps_points", type=int,
                         help="points in the default geometric grid")
    p_sweep.add_argument("--folds", type=int)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = read_config(args.config) if args.config else {}
    return args.func(args, config)


if __name__ == "__main__":
    sys.exit(main())
