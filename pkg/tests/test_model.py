import json

import numpy as np
import pytest

from socptilt import model
from socptilt.cone import dual_contains
from socptilt.errors import SchemaError, ValidationError
from socptilt.poly import Polynomial, quadratic


def identity_doc(f_lin=(0.0, 0.0, 0.0), f_Q=None, sigma=1.0):
    f = quadratic(3, Q=f_Q, lin=list(f_lin))
    g = [quadratic(3, lin=list(e)) for e in np.eye(3)]
    return {"n": 3, "m": 2, "x_base": [0.0, 0.0, 0.0], "sigma": sigma,
            "f": f.to_dict(), "g": [p.to_dict() for p in g]}


class TestParsing:
    def test_degenerate_instance_shape(self, degenerate):
        assert degenerate.n == 3 and degenerate.m == 2
        assert np.allclose(degenerate.grad_f_base, [0.0, 0.0, -1.0])
        assert np.allclose(degenerate.g[2].gradient(np.zeros(3)), [0, 0, 1])

    def test_zero_data_instance(self):
        doc = identity_doc()
        inst = model.parse_instance(doc)
        ok, lam = model.validate_stationarity(inst)
        assert ok and np.linalg.norm(lam) <= 1e-8

    def test_rejects_nonzero_g_at_base(self):
        doc = identity_doc()
        doc["x_base"] = [1.0, 0.0, 0.0]
        with pytest.raises(ValidationError, match="not zero"):
            model.parse_instance(doc)

    def test_rejects_nonpositive_sigma(self):
        doc = identity_doc(sigma=0.0)
        with pytest.raises(ValidationError, match="sigma"):
            model.parse_instance(doc)

    def test_rejects_nonstationary_base(self):
        # -grad f = (1, 0, 0) is not in the dual cone, so no multiplier
        doc = identity_doc(f_lin=(-1.0, 0.0, 0.0))
        with pytest.raises(ValidationError, match="stationary"):
            model.parse_instance(doc)

    def test_rejects_m_zero(self):
        doc = identity_doc()
        doc["m"] = 0
        doc["g"] = doc["g"][:1]
        with pytest.raises(SchemaError, match="m"):
            model.parse_instance(doc)

    def test_rejects_malformed(self):
        with pytest.raises(SchemaError):
            model.parse_instance("{not json")
        with pytest.raises(SchemaError):
            model.parse_instance({"n": 1})
        doc = identity_doc()
        doc["g"] = doc["g"][:2]
        with pytest.raises(SchemaError, match="1\\+m"):
            model.parse_instance(doc)

    def test_rejects_degree_cap(self):
        doc = identity_doc()
        doc["f"] = Polynomial.from_terms([(1.0, (7, 0, 0))], 3).to_dict()
        with pytest.raises(SchemaError, match="degree"):
            model.parse_instance(doc)

    def test_round_trip(self, degenerate):
        text = json.dumps(degenerate.to_dict())
        again = model.parse_instance(text)
        assert again.canonical_json() == degenerate.canonical_json()
        assert again.sha256() == degenerate.sha256()


class TestDerivatives:
    def test_eval_derivatives_scalar(self, degenerate):
        b = model.eval_derivatives(degenerate.f, np.zeros(3))
        assert np.allclose(b.gradient, [0, 0, -1])
        assert np.array_equal(b.hessian, b.hessian.T)

    def test_eval_derivatives_vector(self, degenerate):
        b = model.eval_derivatives(degenerate.g, np.zeros(3))
        assert b.gradient.shape == (3, 3)
        assert b.hessian.shape == (3, 3, 3)
        assert np.allclose(b.value, 0.0)

    def test_second_order_action_worked_value(self, degenerate):
        # v = e1, u = e2: the action equals (1/2, 1/4, 1/4)
        b = degenerate.g_bundle(np.zeros(3))
        out = model.second_order_action(b, [1, 0, 0], [0, 1, 0])
        assert np.allclose(out, [0.5, 0.25, 0.25], atol=1e-14)

    def test_second_order_action_bilinear_symmetry(self, degenerate, rng):
        b = degenerate.g_bundle(np.zeros(3))
        for _ in range(50):
            v, u = rng.standard_normal(3), rng.standard_normal(3)
            a1 = model.second_order_action(b, v, u)
            a2 = model.second_order_action(b, u, v)
            assert np.allclose(a1, a2, atol=1e-12)
        assert np.allclose(model.second_order_action(b, np.zeros(3), u), 0.0)


class TestStationarity:
    def test_degenerate_witness(self, degenerate):
        ok, lam = model.validate_stationarity(degenerate)
        assert ok
        sl = degenerate.multiplier_slice()
        assert sl.affine_residual(lam) <= 1e-9
        assert dual_contains(lam, 1e-9 * (1 + np.linalg.norm(lam)))
        # the slice is {(a, b, 1)}: third coordinate pinned to 1
        assert abs(lam[2] - 1.0) <= 1e-9
