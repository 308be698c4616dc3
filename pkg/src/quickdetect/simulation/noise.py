from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

NOISE_BLOCK = 64


def replication_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed of replication `index`: the SeedSequence child (master_seed, spawn_key=(index,))."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


class NoiseSource:
    """Standard normal noise for a batch of replications.

    Each replication owns a PCG64 generator. Its initial-state draws come first, then observation
    noise in blocks of NOISE_BLOCK steps, so the noise a replication sees depends only on its seed
    and never on which other replications share its batch.
    """

    def __init__(self, master_seed: int, indices: Sequence[int], noise_dim: int, initial_draws: int = 0):
        self._generators = [np.random.Generator(np.random.PCG64(replication_seed(master_seed, i))) for i in indices]
        self._initial = np.stack([g.standard_normal(initial_draws) for g in self._generators]).reshape(
            len(self._generators), initial_draws
        )
        self._block = np.empty((len(self._generators), NOISE_BLOCK, noise_dim))
        self._cursor = NOISE_BLOCK

    def __len__(self) -> int:
        return len(self._generators)

    def initial(self) -> NDArray[np.float64]:
        """(batch, initial_draws) draws for the initial states."""
        return self._initial

    def draw(self, rows: NDArray[np.intp]) -> NDArray[np.float64]:
        """Noise for the next step of the replications in `rows`.

        Rows absent from one call must stay absent from every later call; their generators stop
        advancing.
        """
        if self._cursor == NOISE_BLOCK:
            noise_dim = self._block.shape[2]
            for row in rows:
                self._block[row] = self._generators[row].standard_normal((NOISE_BLOCK, noise_dim))
            self._cursor = 0
        noise = self._block[rows, self._cursor]
        self._cursor += 1
        return noise
