"""Chunked concurrent evaluation of independent samples.

Work is split into fixed-size chunks and dispatched to a thread pool; results are
gathered back in chunk order, so the output depends on the chunk size but never on
the worker count or on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from ..config import config

logger = logging.getLogger(__name__)


def chunk_generators(seed: int, n_chunks: int) -> List[np.random.Generator]:
    """Independent counter-based generators, one per chunk, derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def derived_seeds(seed: int, count: int) -> List[int]:
    """64-bit child seeds for nested estimators."""
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


class SampleRunner:
    """Runs per-chunk jobs on a bounded thread pool with deterministic reduction."""

    def __init__(self, workers: Optional[int] = None, chunk_size: Optional[int] = None):
        self.workers = workers or config.worker_count()
        self.chunk_size = chunk_size or config.CHUNK_SIZE
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")

    def split(self, items: Sequence[Any]) -> List[List[Any]]:
        items = list(items)
        return [items[i:i + self.chunk_size] for i in range(0, len(items), self.chunk_size)]

    def run(self, fn: Callable[[Any], Any], jobs: Sequence[Any]) -> List[Any]:
        """Apply ``fn`` to each job; results keep job order."""
        jobs = list(jobs)
        if self.workers == 1 or len(jobs) <= 1:
            return [fn(job) for job in jobs]
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, jobs))

    def map_samples(self, fn: Callable[[List[Any]], List[Any]], items: Sequence[Any]) -> List[Any]:
        """Chunk ``items``, apply ``fn`` per chunk, and flatten in order."""
        chunks = self.split(items)
        logger.debug(f"Dispatching {len(chunks)} chunks to {self.workers} workers")
        return [result for chunk in self.run(fn, chunks) for result in chunk]
