import numpy as np
import pytest

from _oracles import grid_min_tilted
from socptilt import analyzer, harness
from socptilt.cone import project_onto_cone


class TestRestore:
    def test_restores_random_points(self, degenerate, rng):
        for _ in range(50):
            x = 0.2 * rng.standard_normal(3)
            xr, ok = harness.restore_feasibility(degenerate, x)
            assert ok
            assert harness.cone_distance(degenerate.g_value(xr)) <= 1e-7

    def test_feasible_point_unchanged(self, identity_cone):
        x = np.array([1.0, 0.3, 0.2])
        xr, ok = harness.restore_feasibility(identity_cone, x)
        assert ok and np.array_equal(xr, x)


class TestSolveTilted:
    def test_zero_tilt_returns_base(self, identity_cone):
        x, info = harness.solve_tilted(identity_cone, np.zeros(3), gamma=0.1)
        assert np.linalg.norm(x - identity_cone.x_base) <= 1e-6
        assert info["feasibility"] <= 1e-7

    def test_projection_oracle(self, identity_cone, rng):
        # closed form: the tilted argmin is the cone projection of v - (1,-1,0)
        seeds = harness._feasible_seeds(identity_cone, 0.1, seed=2)
        c = np.array([1.0, -1.0, 0.0])
        for _ in range(6):
            v = 1e-3 * rng.standard_normal(3)
            x, _ = harness.solve_tilted(identity_cone, v, gamma=0.1,
                                        seeds=seeds)
            assert np.linalg.norm(x - project_onto_cone(v - c)) <= 1e-5

    def test_grid_oracle_on_degenerate(self, degenerate):
        v = np.array([0.0, 1e-3, 0.0])
        x, info = harness.solve_tilted(degenerate, v, gamma=0.12)
        val, x_grid = grid_min_tilted(degenerate, v, 0.12, per_axis=41,
                                      zooms=5)
        mine = float(degenerate.f.value(x) - v @ x)
        assert mine <= val + 1e-7
        assert info["feasibility"] <= 1e-7

    def test_rejects_bad_gamma(self, identity_cone):
        with pytest.raises(ValueError):
            harness.solve_tilted(identity_cone, np.zeros(3), gamma=0.0)


class TestEmpiricalTilt:
    def test_identity_modulus_near_one(self, identity_cone):
        exp = harness.empirical_tilt(identity_cone, gamma=0.1, r_tilt=1e-3,
                                     kappa_theory=1.0)
        assert 0.5 <= exp.modulus_estimate <= 1.25
        assert not exp.unstable
        for x in exp.solutions:
            assert harness.cone_distance(identity_cone.g_value(x)) <= 1e-7
            assert np.linalg.norm(x - identity_cone.x_base) <= 0.1 + 1e-9

    def test_single_point_grid(self, identity_cone):
        exp = harness.empirical_tilt(identity_cone, gamma=0.05, r_tilt=1e-3,
                                     grid_size=1)
        assert exp.modulus_estimate == 0.0

    def test_coordinate_symmetry(self, identity_cone):
        # flipping the third coordinate of the tilt reflects the argmin
        S = np.diag([1.0, 1.0, -1.0])
        seeds = harness._feasible_seeds(identity_cone, 0.1, seed=2)
        for v in ([2e-4, 1e-3, 5e-4], [1e-3, -2e-3, 1e-3]):
            v = np.array(v)
            x1, _ = harness.solve_tilted(identity_cone, v, 0.1, seeds=seeds)
            x2, _ = harness.solve_tilted(identity_cone, S @ v, 0.1, seeds=seeds)
            assert np.linalg.norm(S @ x1 - x2) <= 1e-6


class TestBoundSandwich:
    def test_inkernel_bound_vs_empirical(self):
        # in-kernel stable instance with zero Jacobian: the empirical
        # modulus is pinched between half and 1.25x the pointbased bound
        from socptilt.model import parse_instance
        from socptilt.poly import quadratic
        g = [quadratic(3, Q=np.array([[1.0, 0.5, 0], [0.5, 1, 0], [0, 0, 0.8]])),
             quadratic(3, Q=0.3 * np.eye(3)),
             quadratic(3, Q=0.2 * np.eye(3))]
        f = quadratic(3, Q=np.diag([1.0, 2.0, 3.0]))
        inst = parse_instance({"n": 3, "m": 2, "x_base": [0.0] * 3,
                               "sigma": 1.0, "f": f.to_dict(),
                               "g": [p.to_dict() for p in g], "seed": 6})
        v = analyzer.analyze(inst, budget=48, with_simplified=False)
        assert v.verdict == analyzer.TILT_STABLE
        exp = harness.empirical_tilt(inst, gamma=0.1, r_tilt=1e-3,
                                     kappa_theory=v.bound_estimate)
        assert exp.modulus_estimate <= 1.25 * v.bound_estimate
        assert exp.modulus_estimate >= 0.5 * v.bound_estimate


class TestInstabilityProbe:
    def test_degenerate_jump(self, degenerate):
        v = analyzer.analyze(degenerate, budget=64, with_simplified=False)
        assert v.verdict == analyzer.NOT_TILT_STABLE
        exp = harness.empirical_tilt(degenerate, gamma=0.1, r_tilt=1e-3,
                                     grid_size=3, witness=v.witness)
        assert exp.unstable
        assert exp.modulus_estimate > 1e3


class TestNeighborhoodFalsify:
    def test_stable_no_witness(self, identity_cone):
        w = harness.neighborhood_falsify(identity_cone, kappa=2.0, eta=1e-2,
                                         samples=3000)
        assert w is None

    def test_unstable_witness(self, negative_curvature):
        w = harness.neighborhood_falsify(negative_curvature, kappa=5.0,
                                         eta=1e-2, samples=3000)
        assert w is not None
        assert w["value"] < 1.0 / 5.0
        # the witness tuple is self-certifying: feasible x, small x*,
        # critical u, multiplier in the sigma-ball
        x, u, lam = w["x"], w["u"], w["lam"]
        assert harness.cone_distance(negative_curvature.g_value(x)) <= 1e-6
        assert np.linalg.norm(w["x_star"]) <= 1e-2
        assert abs(np.linalg.norm(u) - 1.0) <= 1e-9
        y = negative_curvature.g_jacobian(x).T @ lam
        assert np.linalg.norm(lam) <= negative_curvature.sigma * np.linalg.norm(y) + 1e-9

    def test_rejects_bad_args(self, identity_cone):
        with pytest.raises(ValueError):
            harness.neighborhood_falsify(identity_cone, kappa=0.0, eta=1e-2)


class TestMscqFalsify:
    def test_identity_no_witness(self, identity_cone):
        assert harness.mscq_falsify(identity_cone, samples=400) is None

    def test_degenerate_no_witness(self, degenerate):
        # declared modulus 2*sqrt(2)/sqrt(3) is honored
        assert harness.mscq_falsify(degenerate, samples=400) is None

    def test_squared_system_witness(self, squared_infeasible):
        w = harness.mscq_falsify(squared_infeasible, samples=400)
        assert w is not None
        # certification: no feasible grid point within sigma * cone distance
        assert w["radius_certified"] <= abs(float(w["x"][0])) + 1e-9
        assert w["grid_h"] < w["radius_certified"]
