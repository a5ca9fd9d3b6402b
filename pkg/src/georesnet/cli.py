"""Command-line surface: gen-data, train, sweep, check.

Every subcommand takes --seed, --config and --out; --config always names
a flat JSON file whose keys override the defaults documented per
subcommand.  The effective configuration is echoed into each output
directory's meta.json so results are self-describing.  Exit codes: 0
success, 1 failed checks, 2 usage errors, 3 training divergence (partial
metrics are still written).
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import data, grad, lie, linalg, manifolds, network, sweep, train
from .errors import DivergenceDetected, GeoResNetError


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise GeoResNetError("config file must hold a JSON object")
    return doc


def _write_json(path, doc):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def cmd_gen_data(args):
    """Generate benchmark datasets.  Config keys: p_train, p_test, steps, csv."""
    cfg = _load_config(args.config)
    p_train = int(cfg.get("p_train", args.train_size))
    p_test = int(cfg.get("p_test", args.test_size))
    steps = int(cfg.get("steps", data.DEFAULT_STEPS))
    want_csv = bool(cfg.get("csv", args.csv))
    train_ds, test_ds = data.generate_dataset(
        args.experiment, p_train, p_test, args.seed, steps=steps)
    os.makedirs(args.out, exist_ok=True)
    for role, ds in (("train", train_ds), ("test", test_ds)):
        data.save_dataset(ds, os.path.join(args.out, f"{role}.json"))
        if want_csv:
            data.save_dataset_csv(ds, os.path.join(args.out, f"{role}.csv"))
        print(f"{role}: {len(ds)} pairs on {ds.kind}, max defect {ds.max_defect():.3e}")
    _write_json(os.path.join(args.out, "meta.json"), {
        "command": "gen-data", "experiment": data.ode_by_id(args.experiment).id,
        "seed": args.seed, "p_train": p_train, "p_test": p_test, "steps": steps,
    })
    return 0


def _load_datasets(args, experiment):
    if args.data:
        train_ds = data.load_dataset(os.path.join(args.data, "train.json"))
        test_ds = data.load_dataset(os.path.join(args.data, "test.json"))
        return train_ds, test_ds, {"source": args.data}
    train_ds, test_ds = data.generate_dataset(experiment, 100, 100, args.data_seed)
    return train_ds, test_ds, {"source": "generated", "data_seed": args.data_seed}


def cmd_train(args):
    """Train one model.  Config keys: any TrainConfig field."""
    ode = data.ode_by_id(args.experiment)
    net_cfg = network.NetworkConfig(args.model, ode.kind, args.layers)
    overrides = {"seed": args.seed} if args.seed is not None else {}
    cfg = train.config_from_dict(_load_config(args.config), **overrides)
    train_ds, test_ds, data_meta = _load_datasets(args, ode.id)
    os.makedirs(args.out, exist_ok=True)
    status, code = "ok", 0
    try:
        metrics = train.train_loop(train_ds, test_ds, net_cfg, cfg)
    except DivergenceDetected as err:
        metrics, status, code = err.metrics, "diverged", 3
        print(f"diverged: {err}", file=sys.stderr)
    metrics.to_csv(os.path.join(args.out, "metrics.csv"))
    ckpt = os.path.join(args.out, "checkpoint.json")
    network.save_checkpoint(ckpt, net_cfg, metrics.final_params,
                            meta={"seed": cfg.seed, "status": status})
    # measured even after a divergence, where the huge params overflow
    with np.errstate(over="ignore", invalid="ignore"):
        out = network.network_forward(
            train._ambient(test_ds.inputs, net_cfg.model),
            metrics.final_params, net_cfg)[0]
        mean_defect = float(np.mean(train.prediction_defects(
            out, net_cfg.space, net_cfg.model)))
    _write_json(os.path.join(args.out, "meta.json"), {
        "command": "train", "experiment": ode.id, "model": args.model,
        "layers": args.layers, "param_count": network.param_count(net_cfg),
        "train_config": cfg.to_dict(), "data": data_meta,
        "checkpoint": "checkpoint.json", "status": status,
        "epochs_recorded": len(metrics), "wall_time_s": round(metrics.wall_time, 3),
        "final_mean_test_defect": mean_defect,
    })
    if len(metrics):
        print(f"{args.model} {ode.id} M={args.layers}: "
              f"train {metrics.train_loss[-1]:.6g} test {metrics.test_loss[-1]:.6g} "
              f"defect {metrics.max_defect[-1]:.3e} [{status}]")
    else:
        print(f"{args.model} {ode.id} M={args.layers}: no epochs recorded [{status}]")
    return code


def cmd_sweep(args):
    """Run the benchmark sweep.  --config names a sweep spec JSON."""
    if args.config:
        spec = sweep.load_spec(args.config)
        if args.seed is not None:
            spec = sweep.spec_from_dict({**spec.to_dict(), "data_seed": args.seed})
    else:
        if not args.experiment:
            print("sweep needs --experiment or --config", file=sys.stderr)
            return 2
        overrides = {}
        if args.seed is not None:
            overrides["data_seed"] = args.seed
        spec = sweep.default_spec(args.experiment, **overrides)
    started = time.perf_counter()
    results = sweep.run_sweep(spec, out_dir=args.out, workers=args.workers)
    sweep.save_spec(spec, os.path.join(args.out, "spec.json"))
    _write_json(os.path.join(args.out, "meta.json"), {
        "command": "sweep", "spec": spec.to_dict(),
        "wall_time_s": round(time.perf_counter() - started, 3),
        "cells": len(results),
        "diverged": sum(1 for r in results if r.status != "ok"),
    })
    for model in (network.CLASSICAL, network.MANIFOLD):
        for count, med in sweep.median_by_size(results, model).items():
            print(f"{model} @ {count} params: median test loss {med:.6g}")
    return 0


# --- check suites ----------------------------------------------------------

def _suite_invariants(rng):
    checks = []
    for kind, bound in ((manifolds.SPHERE2, 1e-10), (manifolds.SO3, 1e-9)):
        worst = 0.0
        for m in (1, 2, 4, 8, 16, 32, 64):
            cfg = network.NetworkConfig(network.MANIFOLD, kind, m)
            params = network.init_params(cfg, rng)
            x0 = manifolds.sample_uniform(kind, rng, 8)
            out = network.network_forward(x0, params, cfg)[0]
            worst = max(worst, float(np.max(manifolds.defect(kind, out))))
        checks.append((f"forward defect on {kind} (M up to 64)", worst, bound))
    return checks

def _suite_gradcheck(rng):
    worst = 0.0
    for kind in manifolds.KINDS:
        for model in network.MODELS:
            for m in (1, 2, 4):
                cfg = network.NetworkConfig(model, kind, m)
                params = network.init_params(cfg, rng)
                x = manifolds.sample_uniform(kind, rng, 3)
                y = manifolds.sample_uniform(kind, rng, 3)
                if model == network.CLASSICAL:
                    x = x.reshape(3, -1)
                    y = y.reshape(3, -1)
                err = grad.finite_diff_check(params, cfg, x, y, lam=1e-3)
                worst = max(worst, err)
    return [("gradient vs central differences (12 configs)", worst, 1e-4)]

def _suite_bracket(rng):
    checks = []
    bracket = lie.lie_bracket_linear(lie.ROT_Z, lie.ROT_Y)
    exact = float(np.max(np.abs(bracket.matrix - lie.ROT_X.matrix)))
    checks.append(("[rot_z, rot_y] equals rot_x", exact, 0.0))
    gens = lie.standard_generators(manifolds.SPHERE2)
    pts = manifolds.sample_uniform(manifolds.SPHERE2, rng, 1000)
    bad = sum(1 for p in pts if not lie.bracket_generating_at(gens, p, depth=1))
    checks.append(("bracket generating on 1000 sphere points (depth 1)", bad, 0.0))
    gens3 = lie.standard_generators(manifolds.SO3)
    rots = manifolds.sample_uniform(manifolds.SO3, rng, 100)
    bad3 = sum(1 for p in rots if not lie.bracket_generating_at(gens3, p, depth=0))
    checks.append(("bracket generating on 100 rotations (depth 0)", bad3, 0.0))
    return checks

def _suite_integrator(rng):
    checks = []
    omega = rng.uniform(-1, 1, (1000, 3))
    omega *= (rng.uniform(0, 5, 1000) / np.linalg.norm(omega, axis=1))[:, None]
    fast = linalg.expm_skew3(omega)
    worst = max(float(np.linalg.norm(fast[i] - linalg.expm_dense(
        linalg.skew_from_axial(omega[i])))) for i in range(0, 1000, 25))
    checks.append(("Rodrigues vs dense exponential (spot check)", worst, 1e-12))
    for ode, start in ((data.EXP1, manifolds.sample_uniform(manifolds.SPHERE2, rng, 2)),
                       (data.EXP2, manifolds.sample_uniform(manifolds.SO3, rng, 2))):
        ref = data.ground_truth_flow(start, ode, steps=2 ** 12)
        coarse = data.ground_truth_flow(start, ode, steps=2 ** 8)
        finer = data.ground_truth_flow(start, ode, steps=2 ** 9)
        e_c = np.linalg.norm((coarse - ref).reshape(2, -1), axis=1)
        e_f = np.linalg.norm((finer - ref).reshape(2, -1), axis=1)
        # first order means the error halves with the step: ratio near 2
        off = float(np.max(np.abs(e_c / e_f - 2.0)))
        checks.append((f"{ode.id} step-halving ratio within [1.7, 2.3]", off, 0.3))
        checks.append((f"{ode.id} flow defect", float(np.max(
            manifolds.defect(ode.kind, ref))), 1e-12))
    return checks

_SUITES = {
    "invariants": _suite_invariants,
    "gradcheck": _suite_gradcheck,
    "bracket": _suite_bracket,
    "integrator": _suite_integrator,
}


def cmd_check(args):
    """Run a named validation suite with fixed seeds; nonzero exit on failure."""
    rng = np.random.default_rng(args.seed)
    checks = _SUITES[args.suite](rng)
    report = []
    failed = 0
    for name, value, bound in checks:
        ok = value <= bound
        failed += 0 if ok else 1
        report.append({"name": name, "value": value, "bound": bound, "passed": ok})
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {value:.3e} (bound {bound:.3e})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, f"check-{args.suite}.json"), {
            "command": "check", "suite": args.suite, "seed": args.seed,
            "passed": failed == 0, "checks": report,
        })
    return 0 if failed == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="georesnet",
        description="Structure-preserving residual networks on S2 and SO(3).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate benchmark datasets")
    p.add_argument("--experiment", required=True, help="exp1 (sphere) or exp2 (rotations)")
    p.add_argument("--train-size", type=int, default=100)
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--csv", action="store_true", help="also write flat CSV exports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a single model")
    p.add_argument("--model", required=True, choices=list(network.MODELS))
    p.add_argument("--experiment", required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--data", default=None, help="directory with train.json/test.json")
    p.add_argument("--data-seed", type=int, default=0,
                   help="seed for on-the-fly data when --data is absent")
    p.add_argument("--seed", type=int, default=None, help="training seed override")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run the parameter-count benchmark sweep")
    p.add_argument("--experiment", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="dataset seed override")
    p.add_argument("--config", default=None, help="sweep spec JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run a validation suite")
    p.add_argument("suite", choices=sorted(_SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="accepted for uniformity; unused")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GeoResNetError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
