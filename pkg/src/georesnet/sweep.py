"""Parameter-count sweep: train every (model, layers, seed) cell, tabulate
final losses, and render the loss-versus-size comparison chart.

The sweep is the benchmark's headline artifact: for one experiment it
trains both model families over their layer lists and several seeds on a
shared dataset, then reports the median final losses per configuration.
Cells are independent; a diverged cell is recorded with status
"diverged" and skipped by the aggregation instead of aborting the sweep.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import data, network, train
from .errors import DivergenceDetected, InvalidConfig

DEFAULT_SEEDS = (0, 1, 2)
DEFAULT_DATA_SEED = 2024

RESULT_COLUMNS = ("model", "layers", "param_count", "seed", "final_train_loss",
                  "final_test_loss", "final_mean_defect", "status")


@dataclass(frozen=True)
class SweepSpec:
    experiment: str
    manifold_layers: tuple
    classical_layers: tuple
    seeds: tuple = DEFAULT_SEEDS
    train: dict = None          # TrainConfig overrides applied to every cell
    p_train: int = 100
    p_test: int = 100
    data_seed: int = DEFAULT_DATA_SEED

    def __post_init__(self):
        data.ode_by_id(self.experiment)  # validates the id
        object.__setattr__(self, "manifold_layers",
                           tuple(int(m) for m in self.manifold_layers))
        object.__setattr__(self, "classical_layers",
                           tuple(int(m) for m in self.classical_layers))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "train", dict(self.train or {}))
        if not self.manifold_layers or not self.classical_layers:
            raise InvalidConfig("layer lists must be nonempty")
        if not self.seeds:
            raise InvalidConfig("seeds must be nonempty")

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "manifold_layers": list(self.manifold_layers),
            "classical_layers": list(self.classical_layers),
            "seeds": list(self.seeds),
            "train": dict(self.train),
            "p_train": self.p_train,
            "p_test": self.p_test,
            "data_seed": self.data_seed,
        }


def spec_from_dict(doc):
    known = set(SweepSpec.__dataclass_fields__)
    extra = set(doc) - known
    if extra:
        raise InvalidConfig(f"unknown sweep spec keys: {sorted(extra)}")
    return SweepSpec(**doc)


def default_spec(experiment, **overrides):
    """The benchmark grids.  Training defaults to quick mode (2000 epochs)
    so a full sweep stays desk-scale; pass train={"epochs": 8000} for the
    long schedule."""
    ode = data.ode_by_id(experiment)
    if ode.id == "exp1":
        base = {"manifold_layers": (1, 2, 4, 8), "classical_layers": (1, 2, 4)}
    else:
        base = {"manifold_layers": (5, 10, 20), "classical_layers": (1, 2, 4, 8)}
    base["train"] = {"epochs": train.QUICK_EPOCHS}
    base.update(overrides)
    return SweepSpec(experiment=ode.id, **base)


@dataclass
class CellResult:
    model: str
    layers: int
    param_count: int
    seed: int
    final_train_loss: float
    final_test_loss: float
    final_mean_defect: float
    status: str
    metrics: train.RunMetrics = None


def cell_order(spec):
    """Deterministic cell enumeration: classical first, then geometric."""
    cells = []
    for layers in spec.classical_layers:
        for seed in spec.seeds:
            cells.append((network.CLASSICAL, layers, seed))
    for layers in spec.manifold_layers:
        for seed in spec.seeds:
            cells.append((network.MANIFOLD, layers, seed))
    return cells


def run_cell(spec, datasets, model, layers, seed):
    """Train one sweep cell; divergence becomes a status, not an exception."""
    train_ds, test_ds = datasets
    ode = data.ode_by_id(spec.experiment)
    net_cfg = network.NetworkConfig(model, ode.kind, layers)
    cfg = train.config_from_dict(spec.train, seed=seed)
    try:
        metrics = train.train_loop(train_ds, test_ds, net_cfg, cfg)
        status = "ok"
    except DivergenceDetected as err:
        metrics = err.metrics
        status = "diverged"
    if status == "ok" and len(metrics):
        final_train = float(metrics.train_loss[-1])
        final_test = float(metrics.test_loss[-1])
    else:
        final_train = float("nan")
        final_test = float("nan")
    # after a divergence the final params are astronomically large and the
    # defect is measured anyway; the overflow en route is expected
    with np.errstate(over="ignore", invalid="ignore"):
        out, _ = network.network_forward(
            train._ambient(test_ds.inputs, model), metrics.final_params, net_cfg)
        defects = train.prediction_defects(out, ode.kind, model)
    return CellResult(
        model=model, layers=layers, param_count=network.param_count(net_cfg),
        seed=seed, final_train_loss=final_train, final_test_loss=final_test,
        final_mean_defect=float(np.mean(defects)), status=status,
        metrics=metrics)


def _run_cell_star(args):
    return run_cell(*args)


def run_sweep(spec, out_dir=None, workers=1, datasets=None):
    """Run all cells and return CellResults in deterministic order.

    Datasets are generated once from (experiment, data_seed) unless an
    explicit (train, test) pair is passed.  With workers > 1 the cells
    run in separate processes; results are reassembled in cell order, so
    output files and aggregates do not depend on scheduling.
    """
    if datasets is None:
        datasets = data.generate_dataset(spec.experiment, spec.p_train,
                                         spec.p_test, spec.data_seed)
    cells = cell_order(spec)
    jobs = [(spec, datasets, model, layers, seed) for model, layers, seed in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_star, jobs))
    else:
        results = [run_cell(*job) for job in jobs]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        cells_dir = os.path.join(out_dir, "cells")
        os.makedirs(cells_dir, exist_ok=True)
        ode = data.ode_by_id(spec.experiment)
        for res in results:
            name = f"{res.model}-m{res.layers}-s{res.seed}"
            cell_dir = os.path.join(cells_dir, name)
            os.makedirs(cell_dir, exist_ok=True)
            res.metrics.to_csv(os.path.join(cell_dir, "metrics.csv"))
            net_cfg = network.NetworkConfig(res.model, ode.kind, res.layers)
            network.save_checkpoint(
                os.path.join(cell_dir, "checkpoint.json"), net_cfg,
                res.metrics.final_params, meta={"seed": res.seed, "status": res.status})
        write_results_csv(results, os.path.join(out_dir, "sweep.csv"))
        render_chart(results, os.path.join(out_dir, "sweep.svg"),
                     title=f"{spec.experiment}: final loss vs parameter count")
    return results


def write_results_csv(results, path):
    import csv

    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow([
                r.model, r.layers, r.param_count, r.seed,
                repr(float(r.final_train_loss)), repr(float(r.final_test_loss)),
                repr(float(r.final_mean_defect)), r.status,
            ])
    os.replace(tmp, path)


def median_by_size(results, model, field="final_test_loss"):
    """Median of a result field across ok seeds, keyed by param count."""
    by_count = {}
    for r in results:
        if r.model == model and r.status == "ok":
            by_count.setdefault(r.param_count, []).append(getattr(r, field))
    return {count: float(np.median(vals))
            for count, vals in sorted(by_count.items())}


# --- chart -----------------------------------------------------------------
# Self-contained SVG, no plotting dependency: two log-log panels (test and
# train loss against parameter count), one polyline per model family.

_PANEL_W = 380
_PANEL_H = 300
_MARGIN_L = 64
_MARGIN_B = 46
_MARGIN_T = 34
_GAP = 56

_SERIES_STYLE = {
    network.MANIFOLD: ("#1f6fb2", "manifold"),
    network.CLASSICAL: ("#c0392b", "classical"),
}


def _log_ticks(lo, hi):
    lo_e = int(np.floor(np.log10(lo)))
    hi_e = int(np.ceil(np.log10(hi)))
    return [10.0 ** e for e in range(lo_e, hi_e + 1)]


def _panel(results, field, x0, title):
    pts = {}
    for model in (network.CLASSICAL, network.MANIFOLD):
        med = median_by_size(results, model, field)
        if med:
            pts[model] = med
    values = [v for med in pts.values() for v in med.values()]
    counts = [c for med in pts.values() for c in med.keys()]
    if not values:
        return [f'<text x="{x0 + _PANEL_W / 2}" y="150">no finished cells</text>']
    vlo = max(min(values), 1e-16)
    vhi = max(max(values), vlo * 10)
    clo, chi = min(counts), max(counts)

    def sx(c):
        span = np.log10(chi) - np.log10(clo)
        span = span if span > 0 else 1.0
        return x0 + (np.log10(c) - np.log10(clo)) / span * _PANEL_W

    def sy(v):
        v = max(v, 1e-16)
        span = np.log10(vhi) - np.log10(vlo)
        span = span if span > 0 else 1.0
        top = _MARGIN_T
        return top + (np.log10(vhi) - np.log10(v)) / span * _PANEL_H

    bottom = _MARGIN_T + _PANEL_H
    parts = [
        f'<rect x="{x0:.1f}" y="{_MARGIN_T}" width="{_PANEL_W}" height="{_PANEL_H}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
        f'<text x="{x0 + _PANEL_W / 2:.1f}" y="{_MARGIN_T - 12}" text-anchor="middle" '
        f'font-size="14">{title}</text>',
        f'<text x="{x0 + _PANEL_W / 2:.1f}" y="{bottom + 36}" text-anchor="middle" '
        'font-size="12"># of parameters</text>',
    ]
    for tick in _log_ticks(vlo, vhi):
        if vlo <= tick <= vhi * 1.0001:
            y = sy(tick)
            parts.append(f'<line x1="{x0:.1f}" y1="{y:.2f}" x2="{x0 + _PANEL_W:.1f}" '
                         f'y2="{y:.2f}" stroke="#dddddd" stroke-width="0.7"/>')
            exp = int(round(np.log10(tick)))
            parts.append(f'<text x="{x0 - 6:.1f}" y="{y + 4:.2f}" text-anchor="end" '
                         f'font-size="11">1e{exp}</text>')
    for tick in sorted(set(counts)):
        x = sx(tick)
        parts.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" '
                     f'y2="{bottom + 5}" stroke="#444444" stroke-width="1"/>')
        parts.append(f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle" '
                     f'font-size="10">{tick}</text>')
    for model, med in pts.items():
        color, label = _SERIES_STYLE[model]
        coords = [(sx(c), sy(v)) for c, v in med.items()]
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                     'stroke-width="1.8"/>')
        for x, y in coords:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.2" fill="{color}"/>')
    return parts


def render_chart(results, path, title=""):
    """Write the two-panel median-loss chart as a standalone SVG file."""
    width = _MARGIN_L * 2 + _PANEL_W * 2 + _GAP
    height = _MARGIN_T + _PANEL_H + _MARGIN_B + 40
    x_left = _MARGIN_L
    x_right = _MARGIN_L + _PANEL_W + _GAP
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    parts += _panel(results, "final_test_loss", x_left, "test loss")
    parts += _panel(results, "final_train_loss", x_right, "train loss")
    legend_y = _MARGIN_T + _PANEL_H + 34
    lx = x_left
    for model in (network.MANIFOLD, network.CLASSICAL):
        color, label = _SERIES_STYLE[model]
        parts.append(f'<line x1="{lx}" y1="{legend_y}" x2="{lx + 24}" y2="{legend_y}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{legend_y + 4}" font-size="12">{label}</text>')
        lx += 150
    if title:
        parts.append(f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" '
                     f'font-size="12" fill="#555555">{title}</text>')
    parts.append("</svg>")
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
    os.replace(tmp, path)


def save_spec(spec, path):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
