"""Reference ODEs, the structure-preserving integrator, and dataset IO."""

import csv
import math

import numpy as np
import pytest

from georesnet import data, manifolds
from georesnet.errors import InvalidConfig, OffManifold
from georesnet.linalg import expm_skew3, skew_from_axial

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])


# --- right-hand sides -------------------------------------------------------

def test_exp1_field_at_the_poles_of_its_dynamics():
    # (1,0,0) has zero rotation coordinates, so it is an equilibrium
    assert np.array_equal(data.exp1_field(E1), np.zeros(3))
    # (0,1,0) sees a unit rotation about z, velocity -e1
    assert np.allclose(data.exp1_field(E2), [-1.0, 0.0, 0.0], atol=1e-15)


def test_exp1_field_is_tangent_to_the_sphere():
    rng = np.random.default_rng(0)
    x = manifolds.sample_uniform(manifolds.SPHERE2, rng, 1000)
    radial = np.einsum("pi,pi->p", data.exp1_field(x), x)
    assert np.max(np.abs(radial)) <= 1e-15


def test_exp2_field_at_the_identity():
    # Tr(I I) + 3 = 6, so the velocity is six times the mixing skew
    expected = 6.0 * skew_from_axial(np.ones(3))
    assert np.allclose(data.exp2_field(np.eye(3)), expected, atol=1e-15)


def test_exp2_coefficient_at_a_half_turn():
    # R = diag(-1,-1,1) squares to the identity, so the factor is 6 again
    r = expm_skew3(np.array([0.0, 0.0, math.pi]))
    expected = 6.0 * skew_from_axial(np.ones(3)) @ r
    assert np.allclose(data.exp2_field(r), expected, atol=1e-13)


def test_exp2_field_is_tangent_to_the_rotation_group():
    rng = np.random.default_rng(1)
    x = manifolds.sample_uniform(manifolds.SO3, rng, 200)
    f = data.exp2_field(x)
    sym = np.swapaxes(x, -1, -2) @ f + np.swapaxes(f, -1, -2) @ x
    assert np.max(np.abs(sym)) <= 1e-13


def test_ode_lookup_is_case_insensitive():
    assert data.ode_by_id("EXP1") is data.EXP1
    assert data.ode_by_id("exp2") is data.EXP2
    with pytest.raises(InvalidConfig):
        data.ode_by_id("exp3")


# --- integrator -------------------------------------------------------------

def test_flow_fixes_the_equilibrium_exactly():
    out = data.ground_truth_flow(E1, data.EXP1, steps=16)
    assert np.array_equal(out, E1)


def test_flow_rejects_bad_arguments():
    with pytest.raises(InvalidConfig):
        data.ground_truth_flow(E2, data.EXP1, steps=0)
    with pytest.raises(OffManifold):
        data.ground_truth_flow(2.0 * E2, data.EXP1, steps=16)
    with pytest.raises(OffManifold):
        data.ground_truth_flow(np.eye(3) + 0.1, data.EXP2, steps=16)


def test_flow_stays_on_the_manifold_at_any_step_count():
    rng = np.random.default_rng(2)
    x = manifolds.sample_uniform(manifolds.SPHERE2, rng, 32)
    r = manifolds.sample_uniform(manifolds.SO3, rng, 8)
    for steps in (1, 7, 256):
        out_s = data.ground_truth_flow(x, data.EXP1, steps)
        out_r = data.ground_truth_flow(r, data.EXP2, steps)
        assert np.max(manifolds.defect(manifolds.SPHERE2, out_s)) <= 1e-13
        assert np.max(manifolds.defect(manifolds.SO3, out_r)) <= 1e-12


def test_flow_matches_the_closed_form_orbit_through_e2():
    # from (0,1,0) the sphere ODE reduces to x1' = -x2^2, x2' = x1 x2 on
    # the z = 0 great circle, solved by (-tanh t, sech t, 0)
    out = data.ground_truth_flow(E2, data.EXP1)
    analytic = np.array([-math.tanh(1.0), 1.0 / math.cosh(1.0), 0.0])
    assert np.linalg.norm(out - analytic) <= 2e-5
    assert out[2] == 0.0


def test_flow_error_halves_when_steps_double():
    outs = {k: data.ground_truth_flow(E2, data.EXP1, 2 ** k)
            for k in (10, 11, 13, 14)}
    coarse = np.linalg.norm(outs[10] - outs[11])
    fine = np.linalg.norm(outs[13] - outs[14])
    assert 5e-5 <= coarse <= 9e-5
    # first order: the gap between consecutive levels scales like
    # 1/steps, and the two gaps sit three doublings apart
    assert 7.5 <= coarse / fine <= 8.5


def test_rotation_flow_error_halves_when_steps_double():
    axis = np.array([1.0, 2.0, 3.0]) / math.sqrt(14.0)
    x0 = expm_skew3(0.9 * axis)
    outs = {k: data.ground_truth_flow(x0, data.EXP2, 2 ** k)
            for k in (12, 13, 14)}
    gap_c = np.linalg.norm(outs[12] - outs[13])
    gap_f = np.linalg.norm(outs[13] - outs[14])
    assert 1e-6 <= gap_f <= 5e-4
    assert 1.8 <= gap_c / gap_f <= 2.2


# --- dataset generation -----------------------------------------------------

def test_generate_dataset_shapes_and_metadata():
    train, test = data.generate_dataset("exp1", 5, 3, seed=11, steps=64)
    assert train.inputs.shape == (5, 3) and train.targets.shape == (5, 3)
    assert test.inputs.shape == (3, 3)
    assert len(train) == 5 and len(test) == 3
    assert train.metadata == {"seed": 11, "ode": "exp1", "steps": 64,
                              "horizon": [0.0, 1.0]}
    tr2, _ = data.generate_dataset("exp2", 2, 2, seed=11, steps=64)
    assert tr2.inputs.shape == (2, 3, 3)


def test_generate_dataset_is_seed_deterministic():
    a_train, a_test = data.generate_dataset("exp1", 4, 4, seed=3, steps=32)
    b_train, b_test = data.generate_dataset("exp1", 4, 4, seed=3, steps=32)
    assert np.array_equal(a_train.inputs, b_train.inputs)
    assert np.array_equal(a_train.targets, b_train.targets)
    assert np.array_equal(a_test.targets, b_test.targets)
    c_train, _ = data.generate_dataset("exp1", 4, 4, seed=4, steps=32)
    assert not np.array_equal(a_train.inputs, c_train.inputs)


def test_train_and_test_draws_are_distinct():
    train, test = data.generate_dataset("exp2", 3, 3, seed=0, steps=32)
    assert not np.array_equal(train.inputs, test.inputs)


def test_generated_pairs_sit_on_the_manifold():
    train, test = data.generate_dataset("exp2", 4, 2, seed=5, steps=128)
    assert train.max_defect() <= 1e-10
    assert test.max_defect() <= 1e-10


def test_generate_dataset_rejects_empty_splits():
    with pytest.raises(InvalidConfig):
        data.generate_dataset("exp1", 0, 4, seed=0)
    with pytest.raises(InvalidConfig):
        data.generate_dataset("exp1", 4, 0, seed=0)


def test_dataset_defaults_to_the_reference_step_count():
    train, _ = data.generate_dataset("exp1", 2, 1, seed=9)
    assert train.metadata["steps"] == 2 ** 14
    assert train.max_defect() <= 1e-10


# --- serialization ----------------------------------------------------------

def test_dataset_json_round_trip_is_bitwise(tmp_path):
    train, _ = data.generate_dataset("exp2", 3, 1, seed=21, steps=16)
    path = tmp_path / "train.json"
    data.save_dataset(train, path)
    back = data.load_dataset(path)
    assert back.kind == train.kind
    assert np.array_equal(back.inputs, train.inputs)
    assert np.array_equal(back.targets, train.targets)
    assert back.metadata == train.metadata


def test_csv_export_headers_and_values(tmp_path):
    train, _ = data.generate_dataset("exp1", 3, 1, seed=8, steps=16)
    path = tmp_path / "train.csv"
    data.save_dataset_csv(train, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x0_1", "x0_2", "x0_3", "y_1", "y_2", "y_3"]
    assert len(rows) == 1 + 3
    parsed = np.array([[float(v) for v in row] for row in rows[1:]])
    assert np.array_equal(parsed[:, :3], train.inputs)
    assert np.array_equal(parsed[:, 3:], train.targets)


def test_csv_export_flattens_rotation_matrices(tmp_path):
    train, _ = data.generate_dataset("exp2", 2, 1, seed=8, steps=16)
    path = tmp_path / "train.csv"
    data.save_dataset_csv(train, path)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "x0_11"
    assert header[8] == "x0_33"
    assert header[9] == "y_11"
    assert len(header) == 18
