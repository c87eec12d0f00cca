import numpy as np
import pytest

from orbitlab.services.sample_runner import SampleRunner, chunk_generators, derived_seeds


def square_chunk(chunk):
    return [x * x for x in chunk]


def test_split_keeps_order():
    runner = SampleRunner(workers=2, chunk_size=3)
    assert runner.split(range(7)) == [[0, 1, 2], [3, 4, 5], [6]]
    with pytest.raises(ValueError):
        SampleRunner(workers=1, chunk_size=-1)


@pytest.mark.parametrize("workers", [1, 2, 5])
def test_map_samples_independent_of_workers(workers):
    runner = SampleRunner(workers=workers, chunk_size=4)
    assert runner.map_samples(square_chunk, range(10)) == [x * x for x in range(10)]


def test_chunk_streams_are_reproducible_and_distinct():
    first = [g.random() for g in chunk_generators(42, 3)]
    second = [g.random() for g in chunk_generators(42, 3)]
    assert first == second
    assert len(set(first)) == 3
    assert chunk_generators(42, 1)[0].random() == first[0]


def test_derived_seeds():
    seeds = derived_seeds(7, 4)
    assert seeds == derived_seeds(7, 4)
    assert len(set(seeds)) == 4
    assert all(isinstance(s, int) and 0 <= s < 2 ** 64 for s in seeds)
    np.random.SeedSequence(seeds[0])
