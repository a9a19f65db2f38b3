import math

import numpy as np
import pytest

from curveflow.cones import (
    CurvatureTuple,
    SymmetricCone,
    cone_from_config,
    cone_to_config,
    cyl_distance,
)
from curveflow.errors import DimensionMismatchError, ZeroTupleError


def test_tuple_sorted_and_validated():
    t = CurvatureTuple([3.0, -1.0, 2.0])
    assert np.allclose(t.values, [-1.0, 2.0, 3.0])
    assert t.smallest == -1.0 and t.largest == 3.0
    with pytest.raises(DimensionMismatchError):
        CurvatureTuple([1.0])
    with pytest.raises(ValueError):
        CurvatureTuple([1.0, np.nan])


class TestContains:
    def test_gamma2_membership(self):
        g2 = SymmetricCone.m_convex(3, 2)
        assert g2.contains(np.array([-1.0, 2.0, 2.0]))  # -1 + 2 = 1 > 0
        assert not g2.contains(np.array([-2.0, 1.0, 4.0]))  # -2 + 1 = -1

    def test_positive_boundary_excluded(self):
        gp = SymmetricCone.positive(3)
        assert not gp.contains(np.array([0.0, 1.0, 1.0]))
        assert gp.contains(np.array([0.1, 1.0, 1.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            SymmetricCone.positive(3).contains(np.array([1.0, 1.0]))


class TestBoundaryDistance:
    def test_positive_quadrant(self):
        gp = SymmetricCone.positive(2)
        assert gp.normalized_boundary_distance(np.array([1.0, 1.0])) == pytest.approx(
            1 / math.sqrt(2), abs=1e-14
        )
        assert gp.normalized_boundary_distance(np.array([0.0, 1.0])) == pytest.approx(0.0, abs=1e-14)

    def test_zero_tuple_rejected(self):
        with pytest.raises(ZeroTupleError):
            SymmetricCone.positive(2).normalized_boundary_distance(np.array([0.0, 0.0]))

    def test_gamma2_against_boundary_sampling_oracle(self):
        # oracle: distance from u to the rays through a dense sampling of
        # the sorted facet {z1 + z2 = 0} of Gamma_2, over all permutations
        g2 = SymmetricCone.m_convex(3, 2)
        kappa = np.array([-1.0, 2.0, 2.0])
        u = kappa / np.linalg.norm(kappa)

        best = np.inf
        aa = np.linspace(0.0, 1.0, 201)
        bb = np.linspace(0.0, 30.0, 601)
        A, B = np.meshgrid(aa, bb, indexing="ij")
        mask = B >= A
        pts = np.stack([-A[mask], A[mask], B[mask]], axis=1)
        norms = np.linalg.norm(pts, axis=1)
        pts = pts[norms > 0] / norms[norms > 0][:, None]
        from itertools import permutations

        for perm in permutations(range(3)):
            proj = np.clip(pts[:, list(perm)] @ u, 0.0, None)
            best = min(best, float(np.sqrt(np.min(1.0 - proj**2))))

        d = g2.normalized_boundary_distance(kappa)
        assert d > 0
        assert d == pytest.approx(best, abs=2e-3)

    def test_shrunken_margin_semantics(self):
        g0 = SymmetricCone.positive(2).shrunken(0.3)
        inside = np.array([1.0, 1.0])  # base distance 1/sqrt(2) > 0.3
        edge = np.array([0.3, 1.0])
        assert g0.contains(inside)
        assert g0.normalized_boundary_distance(inside) == pytest.approx(1 / math.sqrt(2) - 0.3)
        # accepted tuples keep base distance >= margin
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((500, 2))
        accepted = pts[g0.contains(pts)]
        base = SymmetricCone.positive(2)
        assert np.all(base.normalized_boundary_distance(accepted) >= 0.3)


class TestCylDistance:
    def test_on_ray(self):
        assert cyl_distance(np.array([0.0, 1.0, 1.0]), m=1) == pytest.approx(0.0, abs=1e-15)
        assert cyl_distance(np.array([1.0, 1.0, 1.0]), m=0) == pytest.approx(0.0, abs=1e-15)

    def test_off_ray_value(self):
        kappa = np.array([-1.0, 1.0, 1.0])
        expected = np.linalg.norm(kappa / np.sqrt(3) - np.array([0.0, 1.0, 1.0]) / np.sqrt(2))
        assert cyl_distance(kappa, m=1) == pytest.approx(expected, rel=1e-12)

    def test_union_takes_min(self):
        kappa = np.array([0.1, 1.0, 1.0])
        per_m = [cyl_distance(kappa, m=m) for m in range(3)]
        assert cyl_distance(kappa) == pytest.approx(min(per_m))

    def test_m_out_of_range(self):
        with pytest.raises(ValueError):
            cyl_distance(np.array([1.0, 1.0, 1.0]), m=3)


class TestInvariants:
    def _cones(self, n):
        return [
            SymmetricCone.positive(n),
            SymmetricCone.m_convex(n, 2),
            SymmetricCone.half_space(n),
            SymmetricCone.positive(n).shrunken(0.1),
        ]

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 5):
            pts = rng.standard_normal((1000, n)) * rng.uniform(0.1, 10, (1000, 1))
            for cone in self._cones(n):
                ref_c = cone.contains(pts)
                ref_d = cone.normalized_boundary_distance(pts)
                perm = rng.permutation(n)
                assert np.array_equal(cone.contains(pts[:, perm]), ref_c)
                assert np.allclose(cone.normalized_boundary_distance(pts[:, perm]), ref_d, atol=1e-14)
            assert np.allclose(cyl_distance(pts[:, rng.permutation(n)]), cyl_distance(pts), atol=1e-14)

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        for n in (2, 3, 5):
            pts = rng.standard_normal((300, n))
            lam = rng.uniform(1e-3, 1e3, (300, 1))
            for cone in self._cones(n):
                assert np.array_equal(cone.contains(lam * pts), cone.contains(pts))
                d0 = cone.normalized_boundary_distance(pts)
                d1 = cone.normalized_boundary_distance(lam * pts)
                assert np.allclose(d1, d0, rtol=1e-12, atol=1e-12)
            assert np.allclose(cyl_distance(lam * pts), cyl_distance(pts), rtol=1e-12, atol=1e-12)

    def test_sign_consistency(self):
        rng = np.random.default_rng(9)
        for n in (2, 3, 5):
            pts = rng.standard_normal((500, n))
            for cone in self._cones(n):
                inside = cone.contains(pts)
                d = cone.normalized_boundary_distance(pts)
                assert np.all(d[inside] > 0)
                # strictly outside the closure
                outside = ~cone.contains(pts, strict=False)
                assert np.all(d[outside] < 0)

    def test_monotone_nesting(self):
        rng = np.random.default_rng(10)
        n = 4
        pts = rng.standard_normal((2000, n))
        chain = [SymmetricCone.m_convex(n, k) for k in range(1, n + 1)]
        members = [c.contains(pts) for c in chain]
        for smaller, larger in zip(members, members[1:]):
            assert np.all(larger[smaller])
        # Gamma_1 is the positive cone, Gamma_n the half space
        assert np.array_equal(members[0], SymmetricCone.positive(n).contains(pts))
        assert np.array_equal(members[-1], SymmetricCone.half_space(n).contains(pts))


def test_config_round_trip():
    for cfg in (
        {"kind": "gamma_m", "m": 2, "n": 3, "margin": 0.05},
        {"kind": "positive", "n": 4},
        {"kind": "half_space", "n": 2},
    ):
        cone = cone_from_config(cfg)
        assert cone_to_config(cone) == cfg
        assert cone_from_config(cone_to_config(cone)) == cone


def test_sample_slice_lands_inside():
    rng = np.random.default_rng(11)
    cone = SymmetricCone.m_convex(3, 2).shrunken(0.05)
    pts = cone.sample_slice(rng, 256)
    assert pts.shape == (256, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    assert np.all(cone.contains(pts))
