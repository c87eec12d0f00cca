from fractions import Fraction

import pytest

from orbitlab.experiments import (
    _gap_converged,
    convergence_split,
    cross_ratio_passes,
    cross_ratio_residual,
    dw_fraction,
    epsilon_sequence,
    example_8_2_float_drift,
    example_8_2_growth_check,
    example_8_2_interior_check,
    orbit_density_experiment,
    overlap_matrix,
    predicted_density_score,
    record_run,
    sample_angles,
    target_overlap,
    theorem_d_escape_check,
    write_sample_csv,
    zero_one_band,
)
from orbitlab.mapfab import ParamSequence, make_example_8_1, make_example_8_3, make_power_sequence, parse_sequence_id
from orbitlab.models import DWEstimate, read_run_log
from orbitlab.utils.error_handler import (
    DWUndefinedError,
    ExcludedPointError,
    LedgerMissingError,
    SignLossError,
    ValidationError,
)


def pulls():
    return make_example_8_1(ParamSequence.one_minus_reciprocal())


class TestEpsilonSequence:
    def test_parsing(self):
        assert epsilon_sequence("1/n")(4) == Fraction(1, 4)
        assert epsilon_sequence("1/(n+2)")(1) == Fraction(1, 3)
        assert epsilon_sequence("2^-n")(3) == Fraction(1, 8)
        assert epsilon_sequence("1/4")(100) == Fraction(1, 4)

    def test_rejects_bad_widths(self):
        with pytest.raises(ValidationError):
            epsilon_sequence("3/2")
        with pytest.raises(ValidationError):
            epsilon_sequence("n^-2")
        with pytest.raises(ValidationError):
            epsilon_sequence("1/n")(0)


class TestOverlaps:
    def test_constant_width_overlap_is_product(self):
        assert target_overlap(1, 2, epsilon_sequence("1/2")) == Fraction(1, 4)

    def test_full_first_target(self):
        assert target_overlap(1, 3, epsilon_sequence("1/n")) == Fraction(1, 3)

    def test_adjacent_harmonic_targets_are_disjoint(self):
        assert target_overlap(3, 4, epsilon_sequence("1/n")) == 0

    def test_harmonic_matrix(self):
        entries = overlap_matrix(epsilon_sequence("1/n"), 10)
        assert len(entries) == 45
        assert all(entry.empty for entry in entries if entry.disjoint_regime)
        assert all(entry.within_bound for entry in entries)
        assert Fraction(entries[0].exact) == Fraction(1, 2)


class TestGapRule:
    def test_monotone_tail(self):
        assert _gap_converged([0.5, 0.2, 0.01, 1e-4], 1e-3)
        assert not _gap_converged([0.5, 0.2, 0.01, 2e-3], 1e-3)

    def test_rising_tail_is_not_converged(self):
        gaps = [1e-4, 5e-5, 8e-5, 1e-5]
        assert not _gap_converged(gaps, 1e-3)
        assert _gap_converged(gaps, 1e-3, "block-max")

    def test_block_max_rejects_a_late_peak(self):
        assert not _gap_converged([1e-4, 1e-5, 0.9, 1e-4], 1e-3, "block-max")

    def test_rounding_slack(self):
        assert _gap_converged([1e-6, 1e-6 * (1 + 1e-12), 5e-7], 1e-3)

    def test_unknown_rule(self):
        with pytest.raises(ValidationError):
            _gap_converged([0.1, 1e-4], 1e-3, "eventually")

    def test_nonincreasing_samples_pass_block_max(self):
        seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
        strict = dw_fraction(seq, 0j, 8, 24, 0.1, seed=4, workers=1)
        loose = dw_fraction(seq, 0j, 8, 24, 0.1, seed=4, workers=1, gap_rule="block-max")
        assert strict.gap_rule == "nonincreasing" and loose.gap_rule == "block-max"
        assert all(b or not a for a, b in zip(strict.converged, loose.converged))
        assert strict.fraction <= loose.fraction
        with pytest.raises(ValidationError):
            dw_fraction(seq, 0j, 8, 24, 0.1, seed=4, gap_rule="eventually")


def test_sample_angles_are_reproducible():
    first = sample_angles(9, 10, 128, chunk_size=4)
    second = sample_angles(9, 10, 128, chunk_size=4)
    assert [a.value for a in first] == [a.value for a in second]
    assert len({a.to_fraction() for a in first}) == 10
    with pytest.raises(ValidationError):
        sample_angles(9, 0, 128)


class TestDWFraction:
    def test_undefined_when_interior_orbit_stays_inside(self):
        with pytest.raises(DWUndefinedError):
            dw_fraction(make_power_sequence(2), 0j, 8, 24, 0.1, seed=1)

    def test_independent_of_worker_count(self):
        seq = make_example_8_3(ParamSequence.one_minus_reciprocal())
        one = dw_fraction(seq, 0j, 8, 24, 0.1, seed=4, workers=1)
        two = dw_fraction(seq, 0j, 8, 24, 0.1, seed=4, workers=2)
        assert one.converged == two.converged
        assert one.fraction == two.fraction
        assert 0.0 <= one.fraction <= 1.0
        assert one.deterministic_dump() == two.deterministic_dump()


def test_orbit_density_is_reproducible():
    first = orbit_density_experiment(make_power_sequence(2), 6, 4, 40, seed=2, workers=1)
    second = orbit_density_experiment(make_power_sequence(2), 6, 4, 40, seed=2, workers=3)
    assert first.scores == second.scores
    assert all(0.0 <= s <= 1.0 for s in first.scores)
    assert first.K == 4


def test_pull_orbits_split_at_the_fixed_points():
    split = convergence_split(pulls(), [Fraction(1, 4), Fraction(1, 2)], 40)
    assert split.converges == [True, False]
    assert split.tail_max_distance[1] == pytest.approx(0.5)


class TestEscapeLedger:
    def test_rotated_pulls(self):
        ledger = theorem_d_escape_check(parse_sequence_id("thmD:theta=pi/8"), 3, 100, seed=1)
        assert ledger.wraps == 7
        assert ledger.zeta_one_escapes[0] == 0
        assert ledger.all_covered
        assert ledger.image_checks_passed
        assert len(ledger.samples) == 4
        assert ledger.interior_values[-1] > 0.99

    def test_needs_a_ledger(self):
        with pytest.raises(LedgerMissingError):
            theorem_d_escape_check(pulls(), 0, 10)


class TestJoukowskiFamily:
    def test_large_seed_grows_past_three_quarter_power(self):
        ledger = example_8_2_growth_check(300, 100.0, start=100)
        assert ledger.first_exceed_index == 100
        assert ledger.persists
        assert ledger.final_y > 300 ** 0.75

    def test_small_seed_loses_sign(self):
        ledger = example_8_2_growth_check(10, 0.01, start=1, allow_sign_loss=True)
        assert ledger.sign_loss_index == 2
        assert not ledger.persists
        with pytest.raises(SignLossError):
            example_8_2_growth_check(10, 0.01, start=1)

    def test_growth_arguments(self):
        with pytest.raises(ValidationError):
            example_8_2_growth_check(10, 0.0)
        with pytest.raises(ValidationError):
            example_8_2_growth_check(10, 1.0, start=10)

    def test_interior_identity(self):
        assert example_8_2_interior_check(50) < 1e-30
        assert example_8_2_float_drift(50) < 1e-10


class TestCrossRatio:
    def test_invariant_along_pulls(self):
        result = cross_ratio_residual(pulls(), Fraction(1, 4), 60)
        assert not result.degenerate
        assert cross_ratio_passes(result)
        assert result.consequence_residual < 1e-12

    def test_fixed_point_is_degenerate(self):
        assert cross_ratio_residual(pulls(), 0, 10).degenerate

    def test_excluded_point(self):
        with pytest.raises(ExcludedPointError):
            cross_ratio_residual(pulls(), Fraction(1, 2), 10)

    def test_only_for_pulls(self):
        with pytest.raises(ValidationError):
            cross_ratio_residual(make_power_sequence(2), Fraction(1, 4), 10)


def test_zero_one_band():
    low = DWEstimate(fraction=0.01, n_samples=10, horizon=10, tol=0.1, seed=1, sequence_id="a")
    high = DWEstimate(fraction=0.99, n_samples=10, horizon=10, tol=0.1, seed=1, sequence_id="b")
    middle = DWEstimate(fraction=0.5, n_samples=10, horizon=10, tol=0.1, seed=1, sequence_id="c")
    assert zero_one_band([low, high])["in_band"]
    band = zero_one_band([low, middle])
    assert not band["in_band"]
    assert band["middle"] == {"c": 0.5}


def test_run_records_append(tmp_path):
    log = tmp_path / "run_log.jsonl"
    record_run("growth", "ex8.2", {"y0": 100.0}, None, {"persists": True}, 0.5, log)
    record_run("growth", "ex8.2", {"y0": 0.01}, None, {"persists": False}, 0.25, log)
    records = read_run_log(log)
    assert [r.results["persists"] for r in records] == [True, False]
    assert records[0].experiment == "growth"


def test_sample_csv(tmp_path):
    path = write_sample_csv(tmp_path / "samples" / "s.csv", ["n", "value"], [(1, 0.5), (2, 0.25)])
    assert path.read_text() == "n,value\n1,0.5\n2,0.25\n"


class TestPredictedDensity:
    def test_reciprocal_pulls_stay_far_below_full_density(self):
        predicted = predicted_density_score(ParamSequence.one_minus_reciprocal(), 16, 150)
        assert 0.3 < predicted < 0.6

    def test_grows_with_horizon(self):
        a = ParamSequence.one_minus_reciprocal()
        assert predicted_density_score(a, 16, 50) < predicted_density_score(a, 16, 150)

    def test_summable_defects_spread_less(self):
        slow = predicted_density_score(ParamSequence.one_minus_reciprocal(), 16, 150)
        fast = predicted_density_score(ParamSequence.geometric(), 16, 150)
        assert fast < slow

    @pytest.mark.slow
    def test_matches_sampled_orbits(self):
        a = ParamSequence.one_minus_reciprocal()
        sampled = orbit_density_experiment(make_example_8_3(a), 200, 16, 150, seed=8, workers=2)
        assert sampled.mean_score == pytest.approx(predicted_density_score(a, 16, 150), abs=0.15)
