import math
from fractions import Fraction

import numpy as np
import pytest

from orbitlab.harmonic import symmetric_arc
from orbitlab.mapfab import (
    LogScalePoint,
    ParamSequence,
    SequenceKind,
    conjugate_to_disc,
    evaluate_interior,
    example_7_3_flat_index,
    example_7_3_indices,
    example_8_2_multiplier,
    interior_orbit,
    make_example_4_3,
    make_example_7_3,
    make_example_8_1,
    make_example_8_2,
    make_example_8_3,
    make_power_sequence,
    make_random_blaschke,
    make_theorem_d,
    parse_sequence_id,
)
from orbitlab.utils.error_handler import ArcConstraintError, OutsideDomainError, UnknownIdError, ValidationError


class TestParamSequence:
    def test_reciprocal_values(self):
        a = ParamSequence.one_minus_reciprocal()
        assert a.value(0) == 0
        assert a.value(4) == Fraction(3, 4)
        assert a.epsilon(10) == Fraction(1, 10)

    def test_shifted_and_geometric(self):
        assert ParamSequence.one_minus_reciprocal(1).epsilon(3) == Fraction(1, 4)
        assert ParamSequence.geometric().epsilon(3) == Fraction(1, 8)
        assert ParamSequence.geometric(Fraction(1, 3)).value(2) == Fraction(8, 9)

    @pytest.mark.parametrize("label", ["1-1/n", "1-1/(n+3)", "1-2^-n", "1-(2/3)^n", "list(0;1/2;3/4)"])
    def test_labels_parse_back(self, label):
        assert ParamSequence.parse(label).label == label

    def test_explicit_must_start_at_zero_and_increase(self):
        with pytest.raises(ValidationError):
            ParamSequence.explicit([Fraction(1, 2)])
        with pytest.raises(ValidationError):
            ParamSequence.explicit([0, Fraction(1, 2), Fraction(1, 4)])

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            ParamSequence.parse("1-1/n^2")


class TestSequenceIds:
    def test_canonical_ids(self):
        assert parse_sequence_id("ex8.3:a=1-2^-n").sequence_id == "ex8.3:a=1-2^-n"
        assert parse_sequence_id("ex8.2").kind == SequenceKind.EXAMPLE_8_2
        assert parse_sequence_id("blaschke:seed=1").sequence_id == "blaschke:degree=2,seed=1"

    def test_unknown_family(self):
        with pytest.raises(UnknownIdError):
            parse_sequence_id("ex9.9")

    def test_bad_parameters(self):
        with pytest.raises(ValidationError):
            parse_sequence_id("ex8.2:a=1-1/n")
        with pytest.raises(ValidationError):
            parse_sequence_id("ex8.3:a")
        with pytest.raises(ValidationError):
            parse_sequence_id("power:p=x")


def test_squaring_steps_match_closed_form():
    seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
    z = 0.3 + 0.2j
    stepped = interior_orbit(seq, z, 6, use_closed_form=False)
    closed = interior_orbit(seq, z, 6)
    for s, c in zip(stepped, closed):
        assert s == pytest.approx(c, abs=1e-9)


def test_squaring_composite_at_origin_is_parameter():
    seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
    assert evaluate_interior(seq, 10, 0j) == pytest.approx(0.9 + 0j)


def test_joukowski_orbit_of_one():
    values = interior_orbit(make_example_8_2(), 1 + 0j, 40)
    for n, w in enumerate(values):
        assert w == pytest.approx(n + 1, rel=1e-12)


def test_joukowski_multiplier():
    lam = example_8_2_multiplier(3)
    assert 0.5 * (lam * 3 + 1 / (lam * 3)) == pytest.approx(4.0)
    with pytest.raises(ValidationError):
        example_8_2_multiplier(0)


def test_example_7_3_indexing():
    assert example_7_3_indices(0) is None
    assert example_7_3_indices(1) == (1, 0)
    assert example_7_3_indices(2) is None
    assert example_7_3_indices(4) == (2, 1)
    assert example_7_3_flat_index(2, 1) == 4
    with pytest.raises(ValidationError):
        example_7_3_flat_index(2, 2)


def test_example_7_3_steps_match_closed_form():
    seq = make_example_7_3()
    z = 1 + 0.5j
    stepped = interior_orbit(seq, z, 30, use_closed_form=False)
    closed = interior_orbit(seq, z, 30)
    for s, c in zip(stepped, closed):
        assert s == pytest.approx(c, rel=1e-12)


def test_half_plane_sequences_conjugate_to_disc():
    disc = conjugate_to_disc(make_example_7_3())
    assert disc.domain(0).model == "disc"
    assert all(disc.step(n).mobius is not None for n in range(1, 10))
    assert conjugate_to_disc(make_power_sequence(2)).domain(0).model == "disc"


def test_cardioid_family_fixes_domain():
    seq = make_example_4_3()
    w = interior_orbit(seq, 1 + 0j, 5)
    assert all(seq.domain(0).contains(v) for v in w)
    with pytest.raises(OutsideDomainError):
        interior_orbit(seq, -1 + 0j, 5)


def test_theorem_d_sequence():
    seq = parse_sequence_id("thmD:theta=pi/8")
    assert seq.ledger.half_width == Fraction(1, 16)
    assert seq.ledger.wraps(100) == 7
    assert seq.ledger.asymptotic_constant() == pytest.approx(1.0 / (math.pi * math.tan(math.pi / 16)))
    values = interior_orbit(seq, 0j, 20)
    for n, w in enumerate(values):
        assert abs(w) == pytest.approx(1 - 1 / (n + 1))


def test_theorem_d_escape_indices_cover_every_wrap():
    ledger = parse_sequence_id("thmD:theta=pi/8").ledger
    hits = ledger.escape_indices(Fraction(0), 100)
    assert hits[0] == 0
    assert len(hits) >= ledger.wraps(100)


def test_theorem_d_rejects_wide_arc():
    with pytest.raises(ArcConstraintError):
        make_theorem_d(ParamSequence.one_minus_reciprocal(1), symmetric_arc(0, Fraction(1, 4)))


def test_random_blaschke_is_reproducible():
    first = make_random_blaschke(7).step(3)
    second = make_random_blaschke(7).step(3)
    z = 0.2 - 0.4j
    assert first(z) == second(z)
    assert abs(first(z)) < 1.0


def test_log_scale_point():
    point = LogScalePoint.from_complex(1e120 + 0j)
    assert point.log10_modulus == pytest.approx(120.0)
    assert point.argument == 0.0


CLOSED_FORM_FAMILIES = {
    "ex7.3": make_example_7_3,
    "ex8.1": lambda: make_example_8_1(ParamSequence.one_minus_reciprocal()),
    "ex8.3": lambda: make_example_8_3(ParamSequence.one_minus_reciprocal()),
    "ex8.3-geometric": lambda: make_example_8_3(ParamSequence.geometric()),
    "ex4.3": make_example_4_3,
    "thmD": lambda: parse_sequence_id("thmD:theta=pi/8"),
    "power": lambda: make_power_sequence(2),
}


def start_points(seq):
    domain = seq.domain(0)
    if domain.model == "half-plane":
        return [1 + 0.5j, 0.3 - 2j, 2.5 + 0.1j]
    disc_points = [0.3 + 0.2j, -0.6 + 0.1j, 0.05 - 0.8j]
    if domain.kind == "cardioid":
        return [complex(domain.phi(w)) for w in disc_points]
    return disc_points


@pytest.mark.parametrize("name", sorted(CLOSED_FORM_FAMILIES))
def test_steps_match_closed_form_through_25(name):
    seq = CLOSED_FORM_FAMILIES[name]()
    for z in start_points(seq):
        stepped = interior_orbit(seq, z, 25, use_closed_form=False)
        closed = interior_orbit(seq, z, 25)
        for s, c in zip(stepped, closed):
            assert abs(complex(s) - c) <= 1e-9 * max(1.0, abs(c))


@pytest.mark.parametrize("theta", ["pi/8", "pi/12", "pi/5"])
def test_theorem_d_intervals_tile_without_gaps(theta):
    ledger = parse_sequence_id(f"thmD:theta={theta}").ledger
    assert ledger.turns(0) == 0
    for n in range(100):
        lo, hi = ledger.interval(n)
        assert lo < hi
        assert ledger.interval(n + 1)[0] == hi


def test_theorem_d_every_wrap_yields_an_escape():
    ledger = parse_sequence_id("thmD:theta=pi/8").ledger
    N = 100
    wraps = ledger.wraps(N)
    assert wraps >= 1
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(23)))
    phis = [Fraction(0)] + [Fraction(int(k), 2 ** 40) for k in rng.integers(0, 2 ** 40, 1000)]
    for phi in phis:
        hits = ledger.escape_indices(phi, N)
        for k in range(wraps):
            assert any(ledger.interval(n)[0] <= phi + k <= ledger.interval(n)[1] for n in hits), (phi, k)


def test_shifted_reciprocal_starts_at_zero():
    a = ParamSequence.one_minus_reciprocal(shift=1)
    assert [a.value(n) for n in range(4)] == [0, Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    plain = ParamSequence.one_minus_reciprocal()
    assert [plain.value(n) for n in range(3)] == [0, 0, Fraction(1, 2)]
