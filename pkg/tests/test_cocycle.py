import json

import numpy as np
import pytest

from cocyclelab import algebra as alg
from cocyclelab import cocycle as cc
from cocyclelab.errors import Overflow
from cocyclelab.trig import TrigPoly

GOLD = cc.GOLDEN_MEAN


def random_expr(rng, dim=1):
    """Random analytic expression tree with a couple of layers."""
    phi = TrigPoly.cosine((1,) * dim, rng.uniform(-0.4, 0.4)) + TrigPoly.sine(
        (1,) * dim, rng.uniform(-0.4, 0.4)
    )
    p = TrigPoly.cosine((1,) * dim, rng.uniform(-0.5, 0.5))
    q = TrigPoly.sine((1,) * dim, rng.uniform(-0.8, 0.8))
    nodes = [
        cc.Rot(tuple(rng.integers(-2, 3, dim)), phi),
        cc.DiagExp(p),
        cc.ShearU(q),
        cc.Const(alg.random_sl2r(rng), dim=dim),
    ]
    return cc.Product(nodes)


def test_rot_constant_phase():
    expr = cc.Rot((0,), TrigPoly.constant(0.3))
    for x in [0.0, 0.4, -1.7]:
        assert np.allclose(expr.eval(np.array([x])), alg.rot(0.3), atol=1e-15)


def test_rotation_model_eval():
    expr = cc.rotation_model((2, -1))
    x = np.array([0.13, 0.41])
    m = expr.eval(x)
    angle = 2 * x[0] - x[1]
    assert np.allclose(m, alg.rot(angle), atol=1e-14)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    assert det == pytest.approx(1.0, abs=1e-15)


def test_builders_values():
    h = cc.herman(2.0, (1,))
    assert np.allclose(h.eval(np.array([0.0])), np.diag([2.0, 0.5]), atol=1e-15)
    s = cc.schrodinger(TrigPoly.zero(1), 2.0)
    assert np.allclose(
        s.eval(np.array([0.37])), np.array([[2.0, -1.0], [1.0, 0.0]]), atol=1e-14
    )


def test_exp_family_inverse_pair():
    s1 = TrigPoly.cosine((1,))
    s2 = TrigPoly.sine((1,), 0.4)
    z = TrigPoly.zero(1)
    a = cc.exp_family(s1, s2, z, 0.3)
    b = cc.exp_family(s1, s2, z, -0.3)
    x = np.linspace(0, 1, 17)[:, None]
    prod = a.eval(x) @ b.eval(x)
    assert np.max(np.abs(prod - np.eye(2))) < 1e-12


def test_real_evaluation_unimodular_and_real():
    rng = np.random.default_rng(1)
    for _ in range(20):
        expr = random_expr(rng)
        x = rng.uniform(0, 1, (40, 1))
        m = expr.eval(x)
        assert np.max(np.abs(m.imag)) < 1e-14
        det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
        assert np.max(np.abs(det - 1.0)) < 1e-12


def test_cauchy_riemann_residual():
    # analytic continuation: centered 8th-order FD d/d(conj z) residual
    rng = np.random.default_rng(2)
    expr = random_expr(rng)
    z0 = np.array([0.3 + 0.05j])
    h = 1e-2
    w = np.array([3 / 4, -3 / 20, 1 / 60])

    def d_along(direction):
        out = 0.0
        for k, wk in enumerate(w, start=1):
            out = out + wk * (
                expr.eval(z0 + direction * k * h) - expr.eval(z0 - direction * k * h)
            )
        return out / h

    dbar = 0.5 * (d_along(1.0) + 1j * d_along(1j))
    assert np.max(np.abs(dbar)) < 1e-6


def test_eval_overflow_guard():
    expr = cc.DiagExp(TrigPoly.cosine((1,), 1.0))
    with pytest.raises(Overflow):
        expr.eval(np.array([0.0 + 200.0j]))


def test_iterate_identity_and_closed_form():
    c = cc.Cocycle([GOLD], cc.rotation_model((1,)))
    sm = c.iterate(np.array([0.2]), 0)
    assert np.allclose(sm.value(), np.eye(2))
    n = 57
    x = 0.2
    sm = c.iterate(np.array([x]), n)
    angle = n * x + n * (n - 1) * GOLD / 2.0
    assert np.max(np.abs(sm.value() - alg.rot(angle))) < 1e-10


def test_iterate_cocycle_identity():
    rng = np.random.default_rng(3)
    c = cc.Cocycle([GOLD], random_expr(rng))
    x = np.array([0.11])
    for m, n in [(3, 4), (10, 7), (1, 25)]:
        lhs = c.iterate(x, m + n).value()
        rhs = c.iterate(x + n * c.alpha, m).value() @ c.iterate(x, n).value()
        assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)) < 1e-9


def test_iterate_inverse_identity():
    # deep compositions need a conditioned cocycle (L ~ 0); a hyperbolic one
    # loses the contracting scale to rounding once e^{2nL} passes 1/eps
    phi = TrigPoly.cosine((1,), 0.3) + TrigPoly.sine((2,), 0.2)
    c = cc.Cocycle([GOLD], cc.Rot((1,), phi))
    x = np.array([0.37])
    for n in [1, 10, 100, 10000]:
        prod = c.iterate(x, -n).matmul(c.iterate(x - n * c.alpha, n))
        assert abs(prod.log_scale) < 1e-8
        assert np.max(np.abs(prod.value() - np.eye(2))) < 1e-8


def test_iterate_inverse_identity_hyperbolic_shallow():
    rng = np.random.default_rng(4)
    c = cc.Cocycle([GOLD], random_expr(rng))
    x = np.array([0.37])
    for n in [1, 5, 20]:
        prod = c.iterate(x, -n).matmul(c.iterate(x - n * c.alpha, n))
        assert np.max(np.abs(prod.value() - np.eye(2))) < 1e-8


def test_homotopy_class_examples():
    assert cc.homotopy_class(cc.rotation_model((2, -1))) == (2, -1)
    assert cc.homotopy_class(cc.herman(3.0, (1,)), samples=4096) == (1,)
    v = TrigPoly.cosine((1,), 0.7)
    assert cc.homotopy_class(cc.schrodinger(v, 1.3)) == (0,)


def test_homotopy_class_conjugation_invariant():
    rng = np.random.default_rng(5)
    a = cc.Cocycle([GOLD], cc.herman(2.0, (1,)))
    for _ in range(5):
        b = random_expr(rng)
        conj = a.conjugated(b)
        assert cc.homotopy_class(conj, samples=4096) == (1,)


def test_jets_match_finite_differences():
    rng = np.random.default_rng(6)
    s1 = TrigPoly.cosine((1,), 0.4)
    s2 = TrigPoly.sine((1,), 0.3)
    z = TrigPoly.zero(1)
    exprs = [
        cc.Rot((1,), TrigPoly.cosine((1,), 0.2)),
        cc.DiagExp(TrigPoly.cosine((1,), 0.5)),
        cc.ShearL(TrigPoly.sine((1,), 0.7)),
        cc.ExpSl2(s1, s2, z, t=0.8),
        random_expr(rng),
    ]
    h = 1e-4
    u = np.array([1.0])
    for expr in exprs:
        x = np.array([[0.23]])
        val, d1, d2 = expr.jet(x, u, order=2)
        fp = expr.eval(x + h * u)
        fm = expr.eval(x - h * u)
        fd1 = (fp - fm) / (2 * h)
        fd2 = (fp - 2 * expr.eval(x) + fm) / h**2
        assert np.max(np.abs(d1 - fd1)) < 1e-6
        assert np.max(np.abs(d2 - fd2)) < 1e-4


def test_bounds_dominate_samples():
    rng = np.random.default_rng(7)
    u = np.array([1.0])
    xs = rng.uniform(0, 1, (200, 1))
    for _ in range(10):
        expr = random_expr(rng)
        m0, m1, m2 = expr.bounds(u)
        val, d1, d2 = expr.jet(xs, u, order=2)
        assert np.max(alg.spectral_norm(val)) <= m0 + 1e-9
        assert np.max(alg.spectral_norm(d1)) <= m1 + 1e-9
        assert np.max(alg.spectral_norm(d2)) <= m2 + 1e-9


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    c = cc.Cocycle([GOLD], random_expr(rng))
    path = tmp_path / "cocycle.json"
    c.save(path)
    c2 = cc.Cocycle.load(path)
    assert c.to_json() == c2.to_json()
    x = rng.uniform(0, 1, (20, 1))
    assert np.array_equal(c.eval(x), c2.eval(x))


def test_json_builder_shorthand(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(
        json.dumps({"builder": "herman", "lambda": 2.0, "l": [1], "alpha": [GOLD]})
    )
    c = cc.Cocycle.load(path)
    assert np.allclose(c.eval(np.array([0.0])), np.diag([2.0, 0.5]))


def test_family_kinds():
    base = cc.Cocycle([GOLD], cc.rotation_model((1,)))
    ps = cc.Family.phase_shift(base, [1.0])
    x = np.array([[0.2]])
    assert np.allclose(ps.eval_theta(0.3, x)[0], alg.rot(0.5), atol=1e-14)
    rt = cc.Family.rot_twist(base)
    assert np.allclose(
        rt.eval_theta(0.3, x)[0], alg.rot(-0.3) @ alg.rot(0.2), atol=1e-14
    )
    assert rt.fiber_degree() == -1
    assert ps.fiber_degree() == 1


def test_family_theta_jet_matches_fd():
    base = cc.Cocycle([GOLD], cc.herman(1.5, (1,)))
    x = np.array([[0.37]])
    h = 1e-5
    for fam in [
        cc.Family.phase_shift(base, [1.0]),
        cc.Family.rot_twist(base),
        cc.Family.schrodinger_energy(TrigPoly.cosine((1,), 0.3), [GOLD], power=2),
    ]:
        val, d1 = fam.theta_jet(0.21, x, order=1)
        fd = (fam.eval_theta(0.21 + h, x) - fam.eval_theta(0.21 - h, x)) / (2 * h)
        assert np.max(np.abs(d1 - fd)) < 1e-6
