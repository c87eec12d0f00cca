import cmath
import math
from fractions import Fraction

import pytest

from orbitlab.harmonic import (
    ArcSet,
    CircleArc,
    ContractionMap,
    PowerMap,
    alpha_exponent_probe,
    arcset_ops,
    harmonic_measure_disc,
    loewner_check,
    milloux_schmidt_bound,
    mobius_preimage_asymptotic_constant,
    periodic_arc_overlap,
    poisson_integral,
    preimage_arcset,
    shrinking_target_arcs,
    symmetric_arc,
    walk_on_spheres,
)
from orbitlab.hypgeo import MoebiusTransform, unit_disc
from orbitlab.utils.error_handler import ValidationError

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)


class TestArcSet:
    def test_touching_intervals_merge(self):
        assert ArcSet([(0, QUARTER), (QUARTER, HALF)]).intervals == ((0, HALF),)

    def test_arc_across_zero(self):
        arcs = ArcSet.arc(Fraction(3, 4), HALF)
        assert arcs.intervals == ((0, QUARTER), (Fraction(3, 4), 1))
        assert len(arcs) == 1
        assert arcs.arcs[0] == CircleArc(Fraction(3, 4), HALF)
        assert arcs.contains(0)
        assert not arcs.contains(HALF)

    def test_half_open_membership(self):
        A = ArcSet([(0, HALF)])
        assert A.contains(0)
        assert not A.contains(HALF)
        assert list(A.contains_points([0.0, 0.25, 0.5, 0.75, 1.25])) == [True, True, False, False, True]

    def test_algebra(self):
        a = ArcSet([(0, HALF)])
        b = ArcSet([(QUARTER, Fraction(3, 4))])
        ops = arcset_ops(a, b)
        assert ops["union"] == ArcSet([(0, Fraction(3, 4))])
        assert ops["intersection"] == ArcSet([(QUARTER, HALF)])
        assert ops["complement_a"].measure() == HALF
        assert ArcSet.full().complement().is_empty()
        assert ArcSet.empty().complement() == ArcSet.full()

    def test_arc_length_bounds(self):
        with pytest.raises(ValidationError):
            CircleArc(0, 0)
        with pytest.raises(ValidationError):
            CircleArc(0, Fraction(3, 2))

    def test_symmetric_arc(self):
        arc = symmetric_arc(0, Fraction(1, 16))
        assert arc.start == Fraction(15, 16)
        assert arc.length == Fraction(1, 8)


class TestHarmonicMeasure:
    def test_from_origin_is_arc_length(self):
        A = ArcSet([(Fraction(1, 10), Fraction(3, 10)), (Fraction(1, 2), Fraction(3, 5))])
        assert harmonic_measure_disc(0, A).value == pytest.approx(0.3)

    def test_symmetric_half_circle(self):
        assert harmonic_measure_disc(0.6, ArcSet([(0, HALF)])).value == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("z", [0.5, 0.3 - 0.6j, -0.8j])
    def test_matches_poisson_quadrature(self, z):
        A = ArcSet([(Fraction(1, 20), Fraction(2, 7)), (Fraction(5, 8), Fraction(7, 8))])
        exact = harmonic_measure_disc(z, A).value
        assert abs(exact - poisson_integral(z, A).value) < 1e-10

    @pytest.mark.parametrize(
        "center, radius",
        [(0j, 0.5), (0.3 + 0.2j, 0.1), (-0.5 + 0.4j, 0.2), (0.8j, 0.15)],
    )
    def test_mean_value_property(self, center, radius):
        A = ArcSet([(Fraction(1, 20), Fraction(2, 7)), (Fraction(5, 8), Fraction(7, 8))])
        ring = [center + radius * cmath.exp(2j * math.pi * k / 128) for k in range(128)]
        mean = sum(harmonic_measure_disc(z, A).value for z in ring) / len(ring)
        assert mean == pytest.approx(harmonic_measure_disc(center, A).value, abs=1e-10)

    def test_outside_disc_rejected(self):
        with pytest.raises(ValidationError):
            harmonic_measure_disc(1.0, ArcSet.full())


class TestPreimages:
    def test_power_preimage(self):
        pre = preimage_arcset(PowerMap(2), ArcSet([(0, QUARTER)]))
        assert pre == ArcSet([(0, Fraction(1, 8)), (HALF, Fraction(5, 8))])

    def test_power_preimage_window(self):
        window = ArcSet([(0, Fraction(1, 4))])
        pre = preimage_arcset(PowerMap(8), ArcSet([(0, HALF)]), window)
        assert pre == ArcSet([(0, Fraction(1, 16)), (Fraction(1, 8), Fraction(3, 16))])

    def test_rotation_preimage(self):
        pre = preimage_arcset(MoebiusTransform.rotation(0.25), ArcSet([(QUARTER, HALF)]))
        assert float(pre.measure()) == pytest.approx(0.25)
        assert pre.contains(Fraction(1, 8))

    def test_contraction_has_empty_preimage(self):
        assert preimage_arcset(ContractionMap(0.5), ArcSet.full()).is_empty()

    def test_pull_preimage_asymptotics(self):
        theta, phi = 1.0, 2.0
        eps = 1e-4
        T = ArcSet.arc(Fraction(theta / (2 * math.pi)), Fraction((phi - theta) / (2 * math.pi)))
        pre = preimage_arcset(MoebiusTransform.pull(1 - eps), T)
        ratio = 2 * math.pi * float(pre.measure()) / eps
        constant = mobius_preimage_asymptotic_constant(theta, phi)
        assert constant == pytest.approx(1 / math.tan(0.5) - 1 / math.tan(1.0))
        assert ratio == pytest.approx(constant, rel=0.01)


class TestLoewner:
    S = ArcSet([(Fraction(1, 10), Fraction(2, 5))])

    @pytest.mark.parametrize(
        "f",
        [
            MoebiusTransform.rotation(0.1),
            MoebiusTransform.pull(0.4 + 0.3j),
            PowerMap(3),
            [PowerMap(2), MoebiusTransform.pull(-0.2j)],
        ],
    )
    def test_equality_for_inner_maps(self, f):
        assert abs(loewner_check(f, 0.3 + 0.2j, self.S)) <= 1e-10

    def test_strict_for_contraction(self):
        assert loewner_check(ContractionMap(0.5), 0.3 + 0.2j, self.S) > 1e-3


def test_milloux_schmidt_bound():
    assert milloux_schmidt_bound(1.0, 1.0, 0.25) == pytest.approx(4 / math.pi * math.atan(0.5))
    assert milloux_schmidt_bound(2.0, 1.0, 0.25) == pytest.approx(2 * milloux_schmidt_bound(1.0, 1.0, 0.25))
    with pytest.raises(ValidationError):
        milloux_schmidt_bound(1.0, 1.0, 1.0)


def test_shrinking_target_arcs():
    eps = Fraction(1, 10)
    A = shrinking_target_arcs(3, eps)
    assert A.measure() == eps
    assert len(A) == 8
    assert A.contains(Fraction(1, 16))


def test_periodic_overlap_matches_arc_algebra():
    eps = Fraction(1, 10)
    window = ArcSet([(Fraction(1, 3), HALF)])
    exact = shrinking_target_arcs(5, eps).intersection(window).measure()
    assert periodic_arc_overlap(Fraction(1, 3), HALF, 5, eps) == exact
    assert periodic_arc_overlap(Fraction(0), Fraction(1), 12, eps) == eps


class TestWalkOnSpheres:
    def test_half_circle_from_origin(self):
        estimate = walk_on_spheres(unit_disc(), 0j, ArcSet([(0, HALF)]), 20000, seed=11)
        assert estimate.method == "walk-on-spheres"
        assert abs(estimate.value - 0.5) <= 4 * estimate.std_error

    def test_result_does_not_depend_on_workers(self):
        A = ArcSet([(0, QUARTER)])
        one = walk_on_spheres(unit_disc(), 0.2j, A, 20000, seed=3, workers=1)
        two = walk_on_spheres(unit_disc(), 0.2j, A, 20000, seed=3, workers=2)
        assert one.value == two.value

    def test_start_must_be_inside(self):
        with pytest.raises(ValidationError):
            walk_on_spheres(unit_disc(), 1.5, ArcSet.full(), 10)

    def test_alpha_probe_needs_spread_radii(self):
        with pytest.raises(ValidationError):
            alpha_exponent_probe(unit_disc(), 1 + 0j, [0.1, 0.2, 0.3, 0.4], 100)

    @pytest.mark.slow
    def test_alpha_probe_on_disc(self):
        fit = alpha_exponent_probe(
            unit_disc(), 1 + 0j, [0.005, 0.015, 0.05, 0.15], 40000, ball_radius=0.5, direction=-1.0, seed=5
        )
        assert fit.exponent == pytest.approx(1.0, abs=0.15)
