import numpy as np
import pytest

import blockenc


def test_exact_encode_block():
    a = np.array([[0.5, 0.1], [0.0, 0.3]], dtype=complex)
    u = blockenc.exact_encode(a, 1.0)
    assert np.allclose(u.block(), a)
    assert u.ancillas == 1
    assert np.allclose(u.unitary.conj().T @ u.unitary, np.eye(u.unitary.shape[0]))


def test_product_matches_matrix_product():
    a = np.diag([0.5, 0.25]).astype(complex)
    b = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    p = blockenc.product(blockenc.exact_encode(a, 1.0), blockenc.exact_encode(b, 1.0))
    assert np.allclose(p.extracted(), a @ b)


def test_from_kp_dilation():
    a = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 0.5]])
    u = blockenc.from_kp(a)
    bar = np.zeros((5, 5))
    bar[:2, 2:] = a
    bar[2:, :2] = a.T
    assert np.allclose(u.block(), bar / np.linalg.norm(a))


def test_qls_identity_fixture():
    b = np.array([1.0, 2.0j]) / np.sqrt(5.0)
    r = blockenc.qls_solve(blockenc.exact_encode(np.eye(2, dtype=complex), 1.0), b, 2.0, 1e-3)
    assert abs(np.vdot(r["state"], b)) ** 2 >= 1 - 1e-9
    assert r["ledger"]["total"] > 0


def test_qls_matches_numpy_solve():
    h = np.diag([1.0, -0.5, 0.25]).astype(complex)
    b = np.ones(3, dtype=complex) / np.sqrt(3.0)
    r = blockenc.qls_solve(blockenc.exact_encode(h, 1.0), b, 4.0, 1e-3)
    x = np.linalg.solve(h, b)
    x /= np.linalg.norm(x)
    assert abs(np.vdot(r["state"], x)) ** 2 >= 1 - 1e-3


def test_wls_matches_normal_equations():
    X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]) * 0.3
    y = X @ np.array([0.5, -0.25])
    w = np.array([1.0, 2.0, 1.0])
    r = blockenc.wls_solve(X, y, w, kappa=16.0, eta=0.5)
    W = np.diag(w)
    beta = np.linalg.solve(X.T @ W @ X, X.T @ W @ y)
    beta /= np.linalg.norm(beta)
    assert abs(np.vdot(r["state"], beta)) ** 2 >= 1 - 1e-3


def test_effective_resistance_path():
    r = blockenc.effective_resistance([(0, 1, 1.0), (1, 2, 1.0)], 0, 2, eps=0.1, seed=4)
    assert r["reference"] == pytest.approx(2.0)
    assert abs(r["estimate"] / 2.0 - 1.0) <= 0.1


def test_errors_carry_kind():
    with pytest.raises(blockenc.BlockencError) as info:
        blockenc.qls_solve(blockenc.exact_encode(np.diag([1.0, 0.1]).astype(complex), 1.0), np.ones(2), 4.0, 1e-3)
    assert info.value.kind == "spectrum-violation"
    assert info.value.contract


def test_run_experiment_is_deterministic():
    cfg = {"task": "network", "fixture": "K4", "seed": 3}
    a = blockenc.run_experiment_text(cfg)
    assert a == blockenc.run_experiment_text(cfg)
    rep = blockenc.run_experiment(cfg)
    assert rep["reference"] == pytest.approx(0.5)
    assert len(rep["digest"]) == 64


def test_sweep_slope():
    csv, summary = blockenc.scaling_sweep({"family": "vtaa-kappa", "kappas": [4, 8, 16, 32]})
    assert csv.splitlines()[0] == "instance,kappa,epsilon,queries,gates,fidelity,estimate,reference,seed"
    assert 0.8 <= summary["slope"] <= 1.3
