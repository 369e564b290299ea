"""Batch command-line front end.

Subcommands: generate | solve | evaluate | preprocess | ablate | grid.
Every run reads an optional flat key=value config file, applies same-named
command-line overrides, and records the fully resolved config next to its
outputs.  Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import concurrent.futures
import csv
import os
import sys
from dataclasses import fields

import numpy as np

from . import io as tio
from .datagen import SyntheticSpec, generate, sparsity_report
from .metrics import DetectionRule, detection_metrics, imputation_metrics
from .preprocess import (
    ScaleTransform,
    observation_mask_from_zeros,
    scale_revert,
    scale_transform,
    select_rank,
    tucker_smooth,
)
from .solver import SolverConfig, ablation_config, solve

ABLATION_VARIANTS = ("a", "b", "c", "d", "e", "f", "g", "full")


class UsageError(Exception):
    pass


def _parse_triple(text, cast):
    parts = [p for p in str(text).replace("(", "").replace(")", "").split(",") if p]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise UsageError(f"expected 1 or 3 comma-separated values, got {text!r}")
    return tuple(cast(p) for p in parts)


def _key_registry():
    """All recognized config keys with their parsers and defaults."""
    reg = {}
    for f in fields(SolverConfig):
        default = getattr(SolverConfig(), f.name)
        if isinstance(default, tuple):
            cast = int if f.name == "ranks" else float
            reg[f.name] = (lambda v, c=cast: _parse_triple(v, c), default)
        elif isinstance(default, int):
            reg[f.name] = (int, default)
        else:
            reg[f.name] = (float, default)
    spec = SyntheticSpec()
    for f in fields(SyntheticSpec):
        default = getattr(spec, f.name)
        name = f.name if f.name != "seed" else None
        if name is None:
            continue  # shared with SolverConfig
        if f.name in ("dims", "core_ranks"):
            reg[f.name] = (lambda v: _parse_triple(v, int), default)
        elif isinstance(default, int):
            reg[f.name] = (int, default)
        else:
            reg[f.name] = (float, default)
    reg["scope"] = (str, "missing")
    reg["detect_mode"] = (str, "entry")
    reg["detect_threshold"] = (float, 0.0)
    reg["theta"] = (float, 0.95)
    reg["shift"] = (float, 20.0)
    reg["core_scale"] = (float, 0.14)
    reg["scale_ranks"] = (lambda v: _parse_triple(v, int), (2, 5, 6))
    reg["trace_every"] = (int, 10)
    return reg


KEYS = _key_registry()


def resolve_config(args):
    """Merge defaults, config-file values, and command-line overrides."""
    values = {k: default for k, (_, default) in KEYS.items()}
    path = getattr(args, "config", None)
    if path:
        for key, raw in tio.read_manifest(path).items():
            if key not in KEYS:
                raise UsageError(f"unknown config key {key!r} in {path}")
            values[key] = KEYS[key][0](raw)
    for key in KEYS:
        override = getattr(args, key, None)
        if override is not None:
            values[key] = KEYS[key][0](override)
    return values


def solver_config_from(values):
    kwargs = {f.name: values[f.name] for f in fields(SolverConfig)}
    cfg = SolverConfig(**kwargs)
    cfg.validate()
    return cfg


def synthetic_spec_from(values):
    kwargs = {f.name: values[f.name] for f in fields(SyntheticSpec)}
    return SyntheticSpec(**kwargs)


def _write_resolved(outdir, values):
    entries = {k: _fmt(v) for k, v in sorted(values.items())}
    tio.write_manifest(os.path.join(outdir, "config_resolved.txt"), entries)


def _fmt(v):
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return v


def _ensure_outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------- commands


def cmd_generate(args):
    values = resolve_config(args)
    spec = synthetic_spec_from(values)
    outdir = _ensure_outdir(args)
    inst = generate(spec)
    names = {
        "full": "full.tsr3",
        "lowrank": "lowrank.tsr3",
        "anomaly": "anomaly.tsr3",
        "mask": "mask.tsr3",
        "anomaly_truth": "anomaly_truth.tsr3",
    }
    tio.write_tsr3(os.path.join(outdir, names["full"]), inst.full)
    tio.write_tsr3(os.path.join(outdir, names["lowrank"]), inst.lowrank)
    tio.write_tsr3(os.path.join(outdir, names["anomaly"]), inst.anomaly)
    tio.write_mask(os.path.join(outdir, names["mask"]), inst.mask)
    tio.write_mask(os.path.join(outdir, names["anomaly_truth"]), inst.anomaly_truth)
    report = sparsity_report(inst)
    d1, d2, d3 = spec.dims
    manifest = {f.name: _fmt(getattr(spec, f.name)) for f in fields(SyntheticSpec)}
    manifest.update(
        {f"file_{k}": v for k, v in names.items()},
        anomaly_ratio=spec.block_count * spec.block_area / (d1 * d2 * d3),
        anomaly_entries=report["anomaly_entries"],
        observed_fraction=report["observed_fraction"],
        factor_diff_nonzero_rows=_fmt(report["factor_diff_nonzero_rows"]),
    )
    tio.write_manifest(os.path.join(outdir, "manifest.txt"), manifest)
    _write_resolved(outdir, values)
    return 0


def _run_solve(values, y, mask, outdir=None):
    cfg = solver_config_from(values)
    result = solve(y, mask, cfg, trace_every=values["trace_every"])
    if outdir:
        tio.write_tsr3(os.path.join(outdir, "x.tsr3"), result.x)
        tio.write_tsr3(os.path.join(outdir, "l.tsr3"), result.l)
        tio.write_tsr3(os.path.join(outdir, "r.tsr3"), result.r)
        with open(os.path.join(outdir, "trace.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(
                ["iter", "objective", "res_y", "res_z", "res_xlr",
                 "rel_x", "rel_g", "rel_l", "rel_r"]
            )
            for row in result.trace:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return result


def cmd_solve(args):
    values = resolve_config(args)
    y = tio.read_tsr3(args.input)
    mask = tio.read_mask(args.mask)
    outdir = _ensure_outdir(args)
    _run_solve(values, y, mask, outdir)
    _write_resolved(outdir, values)
    return 0


def _evaluate(values, truth, estimate, r, mask, anomaly_truth):
    imp = imputation_metrics(
        truth, estimate, scope=values["scope"], mask=mask,
        anomaly_truth=anomaly_truth,
    )
    rule = DetectionRule(values["detect_mode"], values["detect_threshold"])
    det = detection_metrics(anomaly_truth, r, rule)
    return {**imp, **det}


METRIC_COLUMNS = ["rmse", "mape", "mae", "n", "mape_skipped",
                  "precision", "recall", "f1"]


def _write_metrics_csv(path, rows, extra_columns=()):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(list(extra_columns) + METRIC_COLUMNS)
        for extra, metrics in rows:
            w.writerow(list(extra) + [metrics.get(c, "") for c in METRIC_COLUMNS])


def cmd_evaluate(args):
    values = resolve_config(args)
    truth = tio.read_tsr3(args.truth)
    estimate = tio.read_tsr3(args.estimate)
    r = tio.read_tsr3(args.anomaly)
    mask = tio.read_mask(args.mask) if args.mask else None
    anomaly_truth = (
        tio.read_mask(args.anomaly_truth) if args.anomaly_truth else None
    )
    metrics = _evaluate(values, truth, estimate, r, mask, anomaly_truth)
    _write_metrics_csv(args.metrics_out, [((), metrics)])
    return 0


def cmd_preprocess(args):
    values = resolve_config(args)
    if args.input.endswith(".csv"):
        x = tio.read_csv_triples(args.input)
    else:
        x = tio.read_tsr3(args.input)
    outdir = _ensure_outdir(args)
    if args.mask_from_zeros:
        tio.write_mask(
            os.path.join(outdir, "mask.tsr3"), observation_mask_from_zeros(x)
        )
    manifest = {"op": args.op, "input": args.input}
    if args.op == "select-rank":
        ranks = select_rank(x, values["theta"])
        manifest["selected_ranks"] = _fmt(ranks)
    else:
        t = ScaleTransform(
            values["shift"], values["core_scale"], values["scale_ranks"]
        )
        if args.op == "smooth":
            out = tucker_smooth(x, values["scale_ranks"])
        elif args.op == "transform":
            out = scale_transform(x, t)
        elif args.op == "revert":
            out = scale_revert(x, t)
        else:
            raise UsageError(f"unknown preprocess op {args.op!r}")
        tio.write_tsr3(os.path.join(outdir, "output.tsr3"), out)
        manifest["output"] = "output.tsr3"
    tio.write_manifest(os.path.join(outdir, "manifest.txt"), manifest)
    _write_resolved(outdir, values)
    return 0


def cmd_ablate(args):
    values = resolve_config(args)
    y = tio.read_tsr3(args.input)
    mask = tio.read_mask(args.mask)
    truth = tio.read_tsr3(args.truth)
    anomaly_truth = tio.read_mask(args.anomaly_truth)
    outdir = _ensure_outdir(args)
    base = solver_config_from(values)
    rows = []
    for variant in ABLATION_VARIANTS:
        cfg = ablation_config(base, variant)
        variant_values = dict(values, lam=cfg.lam, mu1=cfg.mu1, mu2=cfg.mu2)
        result = _run_solve(variant_values, y, mask)
        metrics = _evaluate(
            variant_values, truth, result.x, result.r, mask, anomaly_truth
        )
        rows.append(((variant,), metrics))
    _write_metrics_csv(
        os.path.join(outdir, "ablation.csv"), rows, extra_columns=("variant",)
    )
    _write_resolved(outdir, values)
    return 0


def _grid_cell(values, key1, v1, key2, v2, cell_seed, input_files):
    cell = dict(values)
    cell[key1] = v1
    if key2:
        cell[key2] = v2
    cell["seed"] = cell_seed
    if input_files:
        y = tio.read_tsr3(input_files["input"])
        mask = tio.read_mask(input_files["mask"])
        truth = tio.read_tsr3(input_files["truth"])
        anomaly_truth = tio.read_mask(input_files["anomaly_truth"])
    else:
        inst = generate(synthetic_spec_from(cell))
        from .tensor_ops import project_observed

        y = project_observed(inst.full, inst.mask)
        mask = inst.mask
        truth = inst.full
        anomaly_truth = inst.anomaly_truth
    result = _run_solve(cell, y, mask)
    return _evaluate(cell, truth, result.x, result.r, mask, anomaly_truth)


def cmd_grid(args):
    values = resolve_config(args)
    key1 = args.grid_key1
    key2 = args.grid_key2
    for key in filter(None, (key1, key2)):
        if key not in KEYS:
            raise UsageError(f"unknown grid key {key!r}")
    values1 = [KEYS[key1][0](v) for v in args.grid_values1.split(";")]
    values2 = (
        [KEYS[key2][0](v) for v in args.grid_values2.split(";")] if key2 else [None]
    )
    cells = [(v1, v2) for v1 in values1 for v2 in values2]
    if not cells:
        raise UsageError("empty grid")
    if len(cells) > args.max_cells:
        raise UsageError(f"grid has {len(cells)} cells, cap is {args.max_cells}")
    input_files = None
    if args.input:
        input_files = {
            "input": args.input,
            "mask": args.mask,
            "truth": args.truth,
            "anomaly_truth": args.anomaly_truth,
        }
        if not all(input_files.values()):
            raise UsageError(
                "--input requires --mask, --truth and --anomaly-truth"
            )
    jobs = args.jobs or int(os.environ.get("TSLTO_JOBS", "1"))
    outdir = _ensure_outdir(args)
    results = {}
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(
                    _grid_cell, values, key1, v1, key2, v2,
                    values["seed"] ^ idx, input_files,
                ): idx
                for idx, (v1, v2) in enumerate(cells)
            }
            for fut in concurrent.futures.as_completed(futures):
                idx = futures[fut]
                try:
                    results[idx] = fut.result()
                except Exception as exc:  # failed cells must not abort the grid
                    results[idx] = exc
    else:
        for idx, (v1, v2) in enumerate(cells):
            try:
                results[idx] = _grid_cell(
                    values, key1, v1, key2, v2, values["seed"] ^ idx, input_files
                )
            except Exception as exc:
                results[idx] = exc
    with open(os.path.join(outdir, "grid.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["cell", "key1", "value1", "key2", "value2", "seed",
                    "metric", "value", "error"])
        for idx, (v1, v2) in enumerate(cells):
            out = results[idx]
            base = [idx, key1, _fmt(v1), key2 or "", _fmt(v2) if v2 is not None
                    else "", values["seed"] ^ idx]
            if isinstance(out, Exception):
                w.writerow(base + ["", "", f"{type(out).__name__}: {out}"])
                continue
            for metric in METRIC_COLUMNS:
                if metric in out:
                    w.writerow(base + [metric, out[metric], ""])
    _write_resolved(outdir, values)
    return 0


# ---------------------------------------------------------------- parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tslto",
        description="Sparse low-rank tensor completion and anomaly diagnosis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_keys(p, keys):
        p.add_argument("--config", help="flat key=value config file")
        for key in keys:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)

    solver_keys = [f.name for f in fields(SolverConfig)]
    spec_keys = [f.name for f in fields(SyntheticSpec) if f.name != "seed"]
    eval_keys = ["scope", "detect_mode", "detect_threshold"]

    p = sub.add_parser("generate", help="write a synthetic instance")
    p.add_argument("--out", required=True)
    add_config_keys(p, spec_keys + ["seed"])
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the solver on a tensor + mask")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    add_config_keys(p, solver_keys + ["trace_every"])
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="score solver outputs against truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--anomaly", required=True)
    p.add_argument("--anomaly-truth", dest="anomaly_truth")
    p.add_argument("--mask")
    p.add_argument("--metrics-out", dest="metrics_out", required=True)
    add_config_keys(p, eval_keys)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("preprocess", help="rank selection / smoothing / scaling")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--op", required=True,
        choices=["select-rank", "smooth", "transform", "revert"],
    )
    p.add_argument("--mask-from-zeros", action="store_true")
    add_config_keys(p, ["theta", "shift", "core_scale", "scale_ranks"])
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("ablate", help="run the regularizer-removal variants")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--anomaly-truth", dest="anomaly_truth", required=True)
    p.add_argument("--out", required=True)
    add_config_keys(p, solver_keys + eval_keys + ["trace_every"])
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("grid", help="grid search over two config keys")
    p.add_argument("--grid-key1", required=True)
    p.add_argument("--grid-values1", required=True,
                   help="semicolon-separated values")
    p.add_argument("--grid-key2")
    p.add_argument("--grid-values2")
    p.add_argument("--input", help="optional fixed instance tensor")
    p.add_argument("--mask")
    p.add_argument("--truth")
    p.add_argument("--anomaly-truth", dest="anomaly_truth")
    p.add_argument("--jobs", type=int, default=0,
                   help="parallel cells (default: env TSLTO_JOBS or 1)")
    p.add_argument("--max-cells", dest="max_cells", type=int, default=256)
    p.add_argument("--out", required=True)
    add_config_keys(p, solver_keys + spec_keys + eval_keys + ["trace_every"])
    p.set_defaults(func=cmd_grid)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
