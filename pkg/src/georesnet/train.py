"""Loss, heavy-ball SGD with a step schedule, and the epoch loop.

Training minimizes

    L = (1/P) sum_j ||x_M(x0_j) - y_j||^2 + (lam dt / 2) sum_N ||Theta_N||^2

over the stacked per-layer parameters Theta_N, with full-batch gradient
descent plus momentum by default.  The step size starts large and decays
by a fixed factor at preset epochs; the large initial step is part of the
recipe (it hops over poor local minima early on), so non-finite losses
are treated as a reportable outcome, not a crash: the loop raises
DivergenceDetected carrying everything recorded so far.
"""

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from . import grad, manifolds, network
from .errors import DivergenceDetected, InvalidConfig

QUICK_EPOCHS = 2000

METRICS_COLUMNS = ("epoch", "lr", "train_loss", "test_loss", "max_defect")


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 10.0
    momentum: float = 0.9
    decay_epochs: tuple = (500, 1000, 2000, 4000, 6000)
    decay_factor: float = 0.8
    lam: float = 1e-3
    epochs: int = 8000
    batch_size: int | None = None  # None means full batch
    seed: int = 0

    def __post_init__(self):
        if self.lr0 <= 0:
            raise InvalidConfig("lr0 must be positive")
        if not 0.0 < self.decay_factor < 1.0:
            raise InvalidConfig("decay_factor must lie in (0, 1)")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidConfig("momentum must lie in [0, 1)")
        if self.epochs < 0:
            raise InvalidConfig("epochs must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidConfig("batch_size must be positive when given")
        if self.lam < 0:
            raise InvalidConfig("lam must be nonnegative")
        object.__setattr__(self, "decay_epochs",
                           tuple(sorted(int(e) for e in self.decay_epochs)))

    def to_dict(self):
        return {
            "lr0": self.lr0, "momentum": self.momentum,
            "decay_epochs": list(self.decay_epochs),
            "decay_factor": self.decay_factor, "lam": self.lam,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "seed": self.seed,
        }


def config_from_dict(doc, **overrides):
    """TrainConfig from a flat dict (e.g. a parsed JSON config file)."""
    known = dict(doc or {})
    known.update(overrides)
    extra = set(known) - set(TrainConfig.__dataclass_fields__)
    if extra:
        raise InvalidConfig(f"unknown config keys: {sorted(extra)}")
    if "decay_epochs" in known:
        known["decay_epochs"] = tuple(known["decay_epochs"])
    return TrainConfig(**known)


@dataclass
class RunMetrics:
    """Per-epoch series plus the final parameters of one training run."""

    epoch: np.ndarray
    lr: np.ndarray
    train_loss: np.ndarray
    test_loss: np.ndarray
    max_defect: np.ndarray
    final_params: list
    wall_time: float = 0.0
    diverged_at: int | None = None

    def __len__(self):
        return len(self.epoch)

    def to_csv(self, path):
        """Write the per-epoch series; floats as shortest exact decimals."""
        tmp = f"{path}.tmp"
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(METRICS_COLUMNS)
            for i in range(len(self)):
                writer.writerow([
                    int(self.epoch[i]),
                    repr(float(self.lr[i])),
                    repr(float(self.train_loss[i])),
                    repr(float(self.test_loss[i])),
                    repr(float(self.max_defect[i])),
                ])
        os.replace(tmp, path)


def loss(preds, targets, params, lam, dt):
    """Objective value: mean squared deviation plus (lam dt / 2) ||Theta||^2."""
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape or preds.shape[0] < 1:
        raise InvalidConfig("preds and targets must be matching nonempty batches")
    p = preds.shape[0]
    r = (preds - targets).reshape(p, -1)
    return float(np.sum(r * r)) / p + 0.5 * lam * dt * grad.regularizer_norm(params)


def lr_schedule(epoch, cfg):
    """lr0 times decay_factor to the number of decay epochs already hit."""
    if epoch < 0:
        raise InvalidConfig("epoch must be nonnegative")
    hits = sum(1 for e in cfg.decay_epochs if e <= epoch)
    return cfg.lr0 * cfg.decay_factor ** hits


def sgd_step(params, grads, velocity, lr, momentum):
    """Heavy-ball update on flat vectors: v' = mu v + g, p' = p - lr v'."""
    velocity = momentum * velocity + grads
    return params - lr * velocity, velocity


def _ambient(values, model):
    """Dataset arrays in the form the given model consumes."""
    if model == network.CLASSICAL:
        return values.reshape(values.shape[0], -1)
    return values


def prediction_defects(outputs, space, model):
    """Per-sample manifold defect of network outputs.

    Classical outputs are flat ambient vectors and get reshaped before
    measuring; for the geometric net this is a pure sanity number.
    """
    if model == network.CLASSICAL and space == manifolds.SO3:
        outputs = outputs.reshape(outputs.shape[0], 3, 3)
    return manifolds.defect(space, outputs)


def train_loop(train_ds, test_ds, net_cfg, cfg):
    """Run the full optimization and record per-epoch metrics.

    Per epoch, train_loss is the full objective (data plus regularizer)
    and test_loss the plain mean squared error, both at the parameters
    the epoch starts with; row 0 therefore describes the freshly
    initialized net.  max_defect is the worst output defect across train
    and test predictions that epoch.  Raises DivergenceDetected with the
    rows recorded so far if a loss stops being finite.
    """
    if train_ds.kind != net_cfg.space or test_ds.kind != net_cfg.space:
        raise InvalidConfig("dataset manifold does not match the network")
    rng = np.random.default_rng(cfg.seed)
    params = network.init_params(net_cfg, rng)
    flat = network.flatten_params(params)
    velocity = np.zeros_like(flat)

    train_x = _ambient(train_ds.inputs, net_cfg.model)
    train_y = _ambient(train_ds.targets, net_cfg.model)
    test_x = _ambient(test_ds.inputs, net_cfg.model)
    test_y = _ambient(test_ds.targets, net_cfg.model)
    p_train = train_x.shape[0]

    series = {name: [] for name in METRICS_COLUMNS}
    start = time.perf_counter()

    def metrics(diverged_at=None):
        return RunMetrics(
            epoch=np.asarray(series["epoch"], dtype=int),
            lr=np.asarray(series["lr"], dtype=float),
            train_loss=np.asarray(series["train_loss"], dtype=float),
            test_loss=np.asarray(series["test_loss"], dtype=float),
            max_defect=np.asarray(series["max_defect"], dtype=float),
            final_params=params,
            wall_time=time.perf_counter() - start,
            diverged_at=diverged_at,
        )

    # A diverging run overflows on its way to the explicit non-finite check
    # below; the intermediate overflow warnings carry no extra information.
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            lr = lr_schedule(epoch, cfg)

            train_out, trace = network.network_forward(train_x, params, net_cfg)
            r = train_out - train_y
            data_term = float(np.sum(r * r)) / p_train
            train_loss = data_term + 0.5 * cfg.lam * net_cfg.dt * grad.regularizer_norm(params)
            test_out, _ = network.network_forward(test_x, params, net_cfg)
            rt = (test_out - test_y).reshape(test_x.shape[0], -1)
            test_loss = float(np.sum(rt * rt)) / test_x.shape[0]

            if not (np.isfinite(train_loss) and np.isfinite(test_loss)):
                raise DivergenceDetected(
                    f"non-finite loss at epoch {epoch}", metrics(diverged_at=epoch))

            worst = max(np.max(prediction_defects(train_out, net_cfg.space, net_cfg.model)),
                        np.max(prediction_defects(test_out, net_cfg.space, net_cfg.model)))
            series["epoch"].append(epoch)
            series["lr"].append(lr)
            series["train_loss"].append(train_loss)
            series["test_loss"].append(test_loss)
            series["max_defect"].append(float(worst))

            if cfg.batch_size is None or cfg.batch_size >= p_train:
                grads = grad.backward_from_trace(trace, params, (2.0 / p_train) * r, cfg.lam)
                flat, velocity = sgd_step(flat, network.flatten_params(grads),
                                          velocity, lr, cfg.momentum)
                params = network.unflatten_params(flat, net_cfg)
            else:
                order = rng.permutation(p_train)
                for lo in range(0, p_train, cfg.batch_size):
                    idx = order[lo:lo + cfg.batch_size]
                    _, grads = grad.network_gradient(train_x[idx], train_y[idx],
                                                     params, net_cfg, cfg.lam)
                    flat, velocity = sgd_step(flat, network.flatten_params(grads),
                                              velocity, lr, cfg.momentum)
                    params = network.unflatten_params(flat, net_cfg)

    return metrics()
