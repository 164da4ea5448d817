import numpy as np
import pytest

import invlr


def test_constrained_solution_is_invariant():
    rep = invlr.cyclic_permutation(6, 3)
    x, y, _ = invlr.make_synthetic(rep, dl=4, n=18, seed=2)
    sol = invlr.solve(x, y, rep, 2)
    g = invlr.invariance_constraint(rep)
    assert sol.rank == 2
    assert np.linalg.norm(sol.W @ g) < 1e-9 * np.linalg.norm(sol.W) * np.linalg.norm(g)


def test_augmented_matches_constrained():
    rep = invlr.c4_image_rotation(3)
    x, y, _ = invlr.make_synthetic(rep, dl=4, n=27, seed=5)
    w_inv = invlr.solve(x, y, rep, 2, mode="constrained").W
    w_da = invlr.solve(x, y, rep, 2, mode="augmented").W
    assert np.linalg.norm(w_da - w_inv) < 1e-8 * np.linalg.norm(w_inv)


def test_path_and_critical_points():
    rep = invlr.cyclic_permutation(6, 2)
    x, y, _ = invlr.make_synthetic(rep, dl=4, n=18, seed=1)
    path = invlr.regularization_path(x, y, rep, 1, [1e-2, 1.0, 1e2])
    dist = [p["distance_to_inv"] for p in path]
    assert dist == sorted(dist, reverse=True)
    points = invlr.critical_points(x, y, rep, 1)
    assert sum(p["is_global_min"] for p in points) == 1
    assert len(points) == 3


def test_relu_ntk_diagonal():
    x = np.array([3.0, 4.0])
    assert invlr.relu_ntk(x, x) == pytest.approx(25.0, abs=1e-12)


def test_train_runs():
    rep = invlr.c4_image_rotation(2)
    x, y, _ = invlr.make_synthetic(rep, dl=2, n=16, seed=0)
    log = invlr.train(x, y, rep, [2], mode="hardwired", epochs=20)
    assert len(log["objective"]) == 20
    assert max(log["w_perp_frob"]) <= 1e-12


def test_errors_carry_codes(tmp_path):
    with pytest.raises(invlr.InvlrError) as info:
        invlr.read_matrix(str(tmp_path / "missing.mat"))
    assert info.value.code == "Io"


def test_matrix_round_trip(tmp_path):
    a = np.random.default_rng(0).normal(size=(3, 5))
    path = str(tmp_path / "a.mat")
    invlr.write_matrix(path, a)
    assert np.array_equal(invlr.read_matrix(path), a)
