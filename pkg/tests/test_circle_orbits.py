from fractions import Fraction

import numpy as np
import pytest

from orbitlab.circle_orbits import (
    MOBIUS,
    SQUARING,
    BoundaryAngle,
    apply_boundary_ops,
    arc_visits,
    boundary_orbit,
    boundary_values,
    check_plan_adequacy,
    circular_distance,
    density_score,
    minimum_precision,
    orbit_family,
    plan_for,
    precision_plan,
    random_angle,
    require_precision,
)
from orbitlab.harmonic import ArcSet
from orbitlab.mapfab import (
    HolomorphicMap,
    JoukowskiHalfPlaneOp,
    MapSequence,
    ParamSequence,
    RealMobiusOp,
    SequenceKind,
    conjugate_to_disc,
    make_example_7_3,
    make_example_8_1,
    make_example_8_3,
    make_power_sequence,
    parse_sequence_id,
)
from orbitlab.hypgeo import unit_disc
from orbitlab.utils.error_handler import PrecisionExhaustedError, UnknownBoundaryExtensionError, ValidationError

DE_BRUIJN = Fraction(int("0000100110101111000", 2), 2 ** 19)


def test_precision_plan_values():
    assert precision_plan(SQUARING, 100) == 304
    assert precision_plan(MOBIUS, 100) == 156
    assert minimum_precision(SQUARING, 100) == 204
    with pytest.raises(ValidationError):
        precision_plan("elliptic", 10)
    with pytest.raises(ValidationError):
        precision_plan(SQUARING, 0)


def test_plan_includes_mobius_stretch():
    seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
    assert orbit_family(seq) == SQUARING
    assert plan_for(seq, 100) == 336
    assert orbit_family(make_example_8_1(ParamSequence.one_minus_reciprocal())) == MOBIUS


def test_override_below_minimum_is_rejected():
    seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
    with pytest.raises(PrecisionExhaustedError) as info:
        require_precision(seq, 100, precision=168)
    assert "drop the precision override" in info.value.user_message
    assert require_precision(seq, 100, precision=400) == 400


def test_angles_need_64_bits():
    with pytest.raises(ValidationError):
        BoundaryAngle.from_turns(Fraction(1, 3), 32)


def test_doubling_orbit_of_one_third():
    trace = boundary_orbit(make_power_sequence(2), BoundaryAngle.from_turns(Fraction(1, 3), 128), 10)
    for n, angle in enumerate(trace.angles):
        expected = Fraction(1, 3) if n % 2 == 0 else Fraction(2, 3)
        assert abs(angle.to_fraction() - expected) < Fraction(1, 2 ** 100)
    assert trace.error_bounds == sorted(trace.error_bounds)
    assert trace.precision_used == 128


def test_de_bruijn_angle_is_dense_under_doubling():
    trace = boundary_orbit(make_power_sequence(2), BoundaryAngle.from_turns(DE_BRUIJN, 128), 15)
    assert density_score(trace, 16) == 1.0
    assert density_score(trace, 16, min_visits=2) == 0.0


def test_pulls_fix_the_real_axis_endpoints():
    seq = make_example_8_1(ParamSequence.one_minus_reciprocal())
    zero = boundary_orbit(seq, BoundaryAngle.from_turns(0, 160), 50)
    half = boundary_orbit(seq, BoundaryAngle.from_turns(Fraction(1, 2), 160), 50)
    assert all(a.to_fraction() == 0 for a in zero.angles)
    assert all(abs(float(a) - 0.5) < 1e-30 for a in half.angles)


def test_pull_orbits_approach_angle_zero():
    seq = make_example_8_1(ParamSequence.one_minus_reciprocal())
    trace = boundary_orbit(seq, BoundaryAngle.from_turns(Fraction(1, 4), 160), 200)
    assert circular_distance(trace.angles[-1].to_fraction(), Fraction(0)) < 0.01


def test_rotated_pulls_agree_with_closed_form():
    seq = parse_sequence_id("thmD:theta=pi/8")
    bits = plan_for(seq, 30)
    trace = boundary_orbit(seq, BoundaryAngle.from_turns(Fraction(1, 10), bits), 30, cross_check=True)
    direct = boundary_values(seq, BoundaryAngle.from_turns(Fraction(1, 10), bits), [30])[0]
    assert abs(float(trace.angles[30]) - float(direct)) < 1e-20


@pytest.mark.parametrize(
    "seq",
    [
        make_example_8_1(ParamSequence.one_minus_reciprocal()),
        make_example_8_3(ParamSequence.one_minus_reciprocal()),
        make_example_8_3(ParamSequence.geometric()),
        parse_sequence_id("thmD:theta=pi/8"),
        make_power_sequence(2),
        conjugate_to_disc(make_example_7_3()),
    ],
    ids=["ex8.1", "ex8.3", "ex8.3-geometric", "thmD", "power", "ex7.3-disc"],
)
@pytest.mark.parametrize("turns", [Fraction(1, 10), Fraction(2, 7), Fraction(5, 9)])
def test_boundary_steps_agree_with_closed_form(seq, turns):
    bits = plan_for(seq, 25)
    theta = BoundaryAngle.from_turns(turns, bits)
    trace = boundary_orbit(seq, theta, 25, cross_check=True)
    direct = boundary_values(seq, theta, range(26))
    for stepped, closed in zip(trace.angles, direct):
        assert circular_distance(stepped, closed) <= 1e-9


def test_joukowski_boundary_fixes_zero_and_sends_half_to_zero():
    theta = BoundaryAngle.from_turns(0, 128)
    assert apply_boundary_ops((JoukowskiHalfPlaneOp(3),), theta).to_fraction() == 0
    half = BoundaryAngle.from_turns(Fraction(1, 2), 128)
    assert apply_boundary_ops((JoukowskiHalfPlaneOp(3),), half).to_fraction() == 0


def test_inverse_pull_undoes_pull():
    theta = BoundaryAngle.from_turns(Fraction(3, 10), 128)
    eps = Fraction(1, 7)
    back = apply_boundary_ops((RealMobiusOp(eps), RealMobiusOp(eps, inverse=True)), theta)
    assert abs(float(back) - 0.3) < 1e-30


def test_plan_is_adequate_for_squaring_pulls():
    seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
    theta = BoundaryAngle.from_turns(Fraction(1, 7), plan_for(seq, 50))
    assert check_plan_adequacy(seq, theta, 50) < 2.0 ** -32


def test_too_few_bits_raise():
    seq = make_power_sequence(2)
    with pytest.raises(PrecisionExhaustedError):
        boundary_orbit(seq, BoundaryAngle.from_turns(Fraction(1, 3), 64), 60)


def test_unknown_boundary_extension():
    opaque = HolomorphicMap(lambda z: z * z, lambda z: 2 * z, boundary_ops=None, name="opaque")
    seq = MapSequence(kind=SequenceKind.CUSTOM, generator=lambda n: opaque, domain_seq=lambda n: unit_disc())
    with pytest.raises(UnknownBoundaryExtensionError):
        boundary_orbit(seq, BoundaryAngle.from_turns(Fraction(1, 3), 128), 3)


def test_random_angles_are_exact_and_reproducible():
    first = random_angle(np.random.Generator(np.random.Philox(5)), 200)
    second = random_angle(np.random.Generator(np.random.Philox(5)), 200)
    assert first.value == second.value
    assert first.error == 0.0
    assert first.to_fraction().denominator <= 2 ** 200
    assert 0 <= first.to_fraction() < 1


def test_arc_visits_and_csv(tmp_path):
    trace = boundary_orbit(make_power_sequence(2), BoundaryAngle.from_turns(Fraction(1, 3), 128), 4)
    assert arc_visits(trace, ArcSet([(Fraction(1, 2), Fraction(1))])) == [1, 3]
    text = trace.to_csv(tmp_path / "orbit.csv")
    lines = text.splitlines()
    assert lines[0] == "n,angle_turns,err_bound"
    assert lines[1].startswith("0,0.3333333333")
    assert (tmp_path / "orbit.csv").read_text() == text


def test_density_score_needs_two_arcs():
    trace = boundary_orbit(make_power_sequence(2), BoundaryAngle.from_turns(Fraction(1, 3), 128), 2)
    with pytest.raises(ValidationError):
        density_score(trace, 1)
