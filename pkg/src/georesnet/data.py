"""Benchmark data: two reference ODEs and their time-one flow maps.

exp1 lives on the sphere, exp2 on the rotation group.  Both right-hand
sides are state-dependent combinations of the standard rotation
generators, so at any frozen state the field is a skew matrix acting on
the state.  The integrator exploits exactly that: each step freezes the
scalar coefficients and advances along the resulting one-parameter
rotation subgroup, which keeps every iterate on the manifold to machine
precision no matter how coarse the step.

Learning targets are the time-one maps: y = flow(x0) over t in [0, 1].
"""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from . import manifolds
from .errors import InvalidConfig, OffManifold
from .linalg import expm_skew3, skew_from_axial

DEFAULT_STEPS = 2 ** 14
HORIZON = (0.0, 1.0)

ON_MANIFOLD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GroundTruthODE:
    """A reference ODE given by state-dependent rotation coordinates.

    axial_rule maps a batch of states to the axial vector of the frozen
    field at each state, i.e. the skew matrix sum_i c_i(x) B_i collapsed
    to its rotation coordinates.  The field value itself is then
    skew(axial) @ state.
    """

    id: str
    kind: str
    axial_rule: object


def _exp1_axial(x):
    # x2 * (about z) + x3 * (about x), axial rows (0,0,1) and (1,0,0)
    zero = np.zeros_like(x[..., 0])
    return np.stack([x[..., 2], zero, x[..., 1]], axis=-1)


def _exp2_axial(x):
    factor = np.einsum("...ij,...ji->...", x, x) + 3.0
    return factor[..., None] * np.ones(3)


EXP1 = GroundTruthODE("exp1", manifolds.SPHERE2, _exp1_axial)
EXP2 = GroundTruthODE("exp2", manifolds.SO3, _exp2_axial)

_BY_ID = {ode.id: ode for ode in (EXP1, EXP2)}


def ode_by_id(experiment):
    key = str(experiment).lower()
    if key not in _BY_ID:
        raise InvalidConfig(f"unknown experiment {experiment!r}; expected exp1 or exp2")
    return _BY_ID[key]


def exp1_field(x):
    """Velocity of the sphere ODE: x2 * B_z x + x3 * B_x x.  Batched."""
    x = np.asarray(x, dtype=float)
    return np.cross(_exp1_axial(x), x)


def exp2_field(x):
    """Velocity of the rotation ODE: (Tr(X X) + 3) (B_z + B_y + B_x) X."""
    x = np.asarray(x, dtype=float)
    mix = skew_from_axial(np.ones(3))
    factor = np.einsum("...ij,...ji->...", x, x) + 3.0
    return factor[..., None, None] * (mix @ x)


def ground_truth_flow(x0, ode, steps=DEFAULT_STEPS):
    """Integrate the ODE from t=0 to t=1 by freeze-and-rotate steps.

    At each step the field's coefficients are evaluated once at the
    current state and the state advances by the exact exponential of the
    frozen field over one step length.  First-order accurate in time,
    exactly manifold-preserving at any step count.  Batched over a
    leading axis.
    """
    if steps < 1:
        raise InvalidConfig("steps must be at least 1")
    x = np.asarray(x0, dtype=float)
    worst = np.max(manifolds.defect(ode.kind, x))
    if worst > ON_MANIFOLD_TOL:
        raise OffManifold(f"initial defect {worst:.3e} exceeds {ON_MANIFOLD_TOL:.0e}")
    h = 1.0 / steps
    sphere = ode.kind == manifolds.SPHERE2
    for _ in range(steps):
        rot = expm_skew3(h * ode.axial_rule(x))
        x = np.einsum("...ij,...j->...i", rot, x) if sphere else rot @ x
    return x


@dataclass
class Dataset:
    """Input/target pairs on one manifold, plus generation metadata."""

    kind: str
    inputs: np.ndarray
    targets: np.ndarray
    metadata: dict

    def __len__(self):
        return self.inputs.shape[0]

    def max_defect(self):
        """Worst constraint violation over all inputs and targets."""
        return float(max(np.max(manifolds.defect(self.kind, self.inputs)),
                         np.max(manifolds.defect(self.kind, self.targets))))


def generate_dataset(experiment, p_train, p_test, seed, steps=DEFAULT_STEPS):
    """Sample uniform initial states and push them through the flow.

    Returns (train, test).  Both draw from one seeded stream, train
    first, so the two sets are independent draws and reproduce bitwise
    for a given seed.
    """
    if p_train < 1 or p_test < 1:
        raise InvalidConfig("dataset sizes must be at least 1")
    ode = ode_by_id(experiment)
    rng = np.random.default_rng(seed)
    out = []
    for count in (p_train, p_test):
        x0 = manifolds.sample_uniform(ode.kind, rng, count)
        y = ground_truth_flow(x0, ode, steps)
        meta = {"seed": int(seed), "ode": ode.id, "steps": int(steps),
                "horizon": list(HORIZON)}
        out.append(Dataset(ode.kind, x0, y, meta))
    return out[0], out[1]


def save_dataset(ds, path):
    """JSON with a metadata block and pair arrays; floats round-trip bitwise."""
    doc = {
        "kind": ds.kind,
        "metadata": ds.metadata,
        "inputs": ds.inputs.tolist(),
        "targets": ds.targets.tolist(),
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def load_dataset(path):
    with open(path) as fh:
        doc = json.load(fh)
    manifolds.check_kind(doc["kind"])
    return Dataset(
        kind=doc["kind"],
        inputs=np.asarray(doc["inputs"], dtype=float),
        targets=np.asarray(doc["targets"], dtype=float),
        metadata=doc["metadata"],
    )


def _component_names(kind, prefix):
    if kind == manifolds.SPHERE2:
        return [f"{prefix}_{i}" for i in (1, 2, 3)]
    return [f"{prefix}_{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]


def save_dataset_csv(ds, path):
    """Flat CSV export: one row per pair, inputs then targets, row-major."""
    header = _component_names(ds.kind, "x0") + _component_names(ds.kind, "y")
    flat_in = ds.inputs.reshape(len(ds), -1)
    flat_tg = ds.targets.reshape(len(ds), -1)
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for a, b in zip(flat_in, flat_tg):
            writer.writerow([repr(float(v)) for v in a] + [repr(float(v)) for v in b])
    os.replace(tmp, path)
