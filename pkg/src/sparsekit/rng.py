"""Deterministic, splittable random streams.

Every stochastic routine in the toolkit draws from a stream identified by a
root seed plus a path of small integers (e.g. ``(iteration, sample_index)``).
Streams are realized with numpy's counter-based Philox generator keyed through
``SeedSequence(entropy=seed, spawn_key=path)``, so any (seed, path) pair maps
to the same byte stream on every platform and under any execution schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Handle for the random substream at (seed, path)."""

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *ids: int) -> "RngStream":
        """Derive the substream at ``path + ids``."""
        return RngStream(self.seed, self.path + ids)

    def generator(self) -> np.random.Generator:
        """Instantiate a fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed & _U64, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def derive_seed(base_seed: int, *path: int) -> int:
    """Collapse (base_seed, path) into a single 64-bit seed.

    Used by the benchmark harness to mint per-matrix and per-vector seeds
    that are themselves reportable in record files.
    """
    ss = np.random.SeedSequence(entropy=base_seed & _U64, spawn_key=path)
    return int(ss.generate_state(1, np.uint64)[0])
