import math

import numpy as np
import pytest

from geoest import liegroup as lg
from geoest import wahba as wb
from geoest.errors import DegenerateEigenvalues, DimensionMismatch, RankDeficientDirections

from conftest import random_rotvec

E6 = np.array([[-0.6543, -0.6338, -0.5978, -0.5559, -0.5138],
               [-0.5407, -0.4559, -0.4202, -0.4253, -0.3845],
               [0.5287, 0.6248, 0.6827, 0.7142, 0.7669]])
W6 = np.array([[296.5458, -296.8526, -293.3936, 150.4527, 150.2987],
               [-296.8526, 368.7300, 341.0189, -197.1644, -221.0503],
               [-293.3936, 341.0189, 321.6729, -179.3406, -194.9746],
               [150.4527, -197.1644, -179.3406, 107.4149, 123.2687],
               [150.2987, -221.0503, -194.9746, 123.2687, 147.3057]])


def random_e(rng, k=5):
    e = rng.normal(size=(3, k))
    return e / np.linalg.norm(e, axis=0)


def test_cost_zero_at_truth(rng):
    r = lg.exp_so3(random_rotvec(rng))
    e = random_e(rng)
    assert wb.wahba_cost0(r, r.T @ e, e, np.eye(5)) == pytest.approx(0.0, abs=1e-14)


def test_cost_half_turn_about_z():
    um = lg.exp_so3([0, 0, math.pi]) @ np.eye(3)
    # columns 1 and 2 flip sign: 1/2 (4 + 4) = 4
    assert wb.wahba_cost0(np.eye(3), um, np.eye(3), np.eye(3)) == pytest.approx(4.0, abs=1e-14)


def test_cost_equals_trace_form(rng):
    for _ in range(20):
        r = lg.exp_so3(random_rotvec(rng))
        rh = lg.exp_so3(random_rotvec(rng))
        e = random_e(rng)
        w, _ = wb.build_weights(e, (5.0, 4.0, 1.0))
        q = r @ rh.T
        k = e @ w @ e.T
        assert wb.wahba_cost0(rh, r.T @ e, e, w) == pytest.approx(np.trace((np.eye(3) - q) @ k), rel=1e-10)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        wb.wahba_cost0(np.eye(3), np.eye(3), np.eye(3), np.eye(4))


def test_generalized_cost():
    sq = wb.PhiFunction(lambda x: x * x, lambda x: 2 * x + 1e-300)
    um = lg.exp_so3([0.1, 0.2, 0.3]).T
    assert wb.generalized_cost(np.eye(3), um, np.eye(3), np.eye(3)) == wb.wahba_cost0(np.eye(3), um, np.eye(3), np.eye(3))
    assert wb.generalized_cost(lg.exp_so3([0.1, 0.2, 0.3]), um, np.eye(3), np.eye(3), sq) == pytest.approx(0.0, abs=1e-28)


def test_generalized_cost_same_minimizer(rng):
    r = lg.exp_so3(random_rotvec(rng))
    e = random_e(rng)
    um = r.T @ e + 0.05 * rng.normal(size=e.shape)
    w = np.diag([1.0, 2.0, 3.0, 1.5, 0.5])
    plus = wb.PhiFunction(lambda x: x + x * x, lambda x: 1 + 2 * x)
    samples = [lg.exp_so3(v) for v in rng.normal(size=(10_000, 3))]
    c1 = [wb.generalized_cost(s, um, e, w) for s in samples]
    c2 = [wb.generalized_cost(s, um, e, w, plus) for s in samples]
    assert int(np.argmin(c1)) == int(np.argmin(c2))


def test_phi_validate():
    wb.PHI_IDENTITY.validate()
    with pytest.raises(ValueError):
        wb.PhiFunction(lambda x: x + 1, lambda x: 1.0).validate()


def test_build_weights_identity():
    w, k = wb.build_weights(np.eye(3), (3, 2, 1))
    assert np.allclose(w, np.diag([3, 2, 1]), atol=1e-14)
    assert np.allclose(k.k, np.diag([3, 2, 1]), atol=1e-14)


def test_build_weights_eigenvalues_random(rng):
    for _ in range(100):
        e = random_e(rng, rng.integers(3, 8))
        w, k = wb.build_weights(e, (5.0, 4.0, 1.0))
        assert np.allclose(np.sort(np.linalg.eigvalsh(e @ w @ e.T))[::-1], [5, 4, 1], atol=1e-9)
        assert np.allclose(w, w.T, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(w) > 0)
        assert np.allclose(k.k, e @ w @ e.T, atol=1e-9)


def test_two_directions_are_augmented():
    e = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(wb.augment(e)[:, 2], [0, 0, 1])
    _, k = wb.build_weights(e, (3, 2, 1))
    assert np.allclose(k.d, [3, 2, 1])


def test_build_weights_errors():
    with pytest.raises(DegenerateEigenvalues):
        wb.build_weights(np.eye(3), (2, 2, 1))
    with pytest.raises(RankDeficientDirections):
        wb.build_weights(np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(RankDeficientDirections):
        wb.build_weights(np.column_stack([np.eye(3)[:, :2], [1, 1, 0] / np.sqrt(2)]))


def test_printed_five_direction_weights_give_spd_k():
    assert np.allclose(W6, W6.T)
    k = E6 @ W6 @ E6.T
    assert np.all(np.linalg.eigvalsh(0.5 * (k + k.T)) > 0)


def test_s_l_zero_at_truth(rng):
    r = lg.exp_so3(random_rotvec(rng))
    e = random_e(rng)
    w, _ = wb.build_weights(e)
    assert np.allclose(wb.s_l(r, wb.l_matrix(e, w, r.T @ e)), 0, atol=1e-12)


def test_s_l_is_gradient(rng):
    for _ in range(20):
        r = lg.exp_so3(random_rotvec(rng))
        rh = lg.exp_so3(random_rotvec(rng))
        e = random_e(rng)
        w, _ = wb.build_weights(e)
        um = r.T @ e + 0.02 * rng.normal(size=e.shape)
        sig = rng.normal(size=3)
        eps = 1e-6
        fd = (wb.wahba_cost0(rh @ lg.exp_so3(eps * sig), um, e, w)
              - wb.wahba_cost0(rh @ lg.exp_so3(-eps * sig), um, e, w)) / (2 * eps)
        sl = wb.s_l(rh, wb.l_matrix(e, w, um))
        assert fd == pytest.approx(sl @ sig, rel=1e-5, abs=1e-9)


def test_gradient_richardson_order(rng):
    r = lg.exp_so3(random_rotvec(rng))
    rh = lg.exp_so3(random_rotvec(rng))
    e = random_e(rng)
    w, _ = wb.build_weights(e)
    um = r.T @ e
    sig = rng.normal(size=3)
    exact = wb.s_l(rh, wb.l_matrix(e, w, um)) @ sig
    errs = []
    for h in (1e-2, 5e-3):
        fd = (wb.wahba_cost0(rh @ lg.exp_so3(h * sig), um, e, w) - wb.wahba_cost0(rh, um, e, w)) / h
        errs.append(abs(fd - exact))
    # one-sided difference is first order; Richardson combination is second order
    rich = [2 * ((wb.wahba_cost0(rh @ lg.exp_so3(h / 2 * sig), um, e, w) - wb.wahba_cost0(rh, um, e, w)) / (h / 2))
            - (wb.wahba_cost0(rh @ lg.exp_so3(h * sig), um, e, w) - wb.wahba_cost0(rh, um, e, w)) / h
            for h in (2e-2, 1e-2)]
    order = math.log2(abs(rich[0] - exact) / abs(rich[1] - exact))
    assert errs[1] < errs[0]
    assert order >= 1.9


def test_s_l_axis_aligned_for_rotation_about_e3():
    r = np.eye(3)
    rh = lg.exp_so3([0, 0, math.radians(10)])
    w = np.diag([1.67, 1.11, 0.56])
    sl = wb.s_l(rh, wb.l_matrix(np.eye(3), w, r.T @ np.eye(3)))
    assert abs(sl[0]) < 1e-15 and abs(sl[1]) < 1e-15 and abs(sl[2]) > 0.1


def test_s_k_critical_points():
    k = wb.k_from_matrix(np.diag([3.0, 2.0, 1.0]))
    cps = wb.critical_points(k)
    for q, _ in cps:
        assert np.allclose(wb.s_k(q, k), 0, atol=1e-14)
    ps = sorted(tuple(np.round(np.diag(q)).astype(int)) for q, _ in cps)
    assert ps == sorted([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)])


def test_morse_indices(rng):
    for _ in range(20):
        e = random_e(rng)
        _, k = wb.build_weights(e, (5.0, 4.0, 1.0))
        cps = wb.critical_points(k)
        assert [i for _, i in cps] == [0, 1, 2, 3]
        # Q_3 is the global maximum of <I - Q, K>
        vals = [wb.attitude_potential(q, k) for q, _ in cps]
        assert int(np.argmax(vals)) == 3


def test_hessian_at_identity():
    d = (3.0, 2.0, 1.0)
    h = wb.hessian_k(np.eye(3), np.diag(d))
    assert np.allclose(np.linalg.eigvalsh(h), sorted([d[1] + d[2], d[2] + d[0], d[0] + d[1]]))


def test_s_k_nonzero_away_from_critical_set(rng):
    _, k = wb.build_weights(random_e(rng), (5.0, 4.0, 1.0))
    cps = [q for q, _ in wb.critical_points(k)]
    n_far, min_norm = 0, np.inf
    for v in rng.normal(size=(100_000, 3)):
        q = lg.exp_so3(v)
        dist = min(lg.principal_angle(q @ c.T) for c in cps)
        if dist > 0.1:
            n_far += 1
            min_norm = min(min_norm, np.linalg.norm(wb.s_k(q, k)))
    assert n_far > 90_000
    assert min_norm > 1e-3
