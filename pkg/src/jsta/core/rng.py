"""Seeded counter-based random streams."""
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

ALGORITHM = "philox4x64-10"


@dataclass(frozen=True)
class RandomStream:
    """Philox counter-based generator keyed by ``(seed, stream_id)``.

    Every call to :meth:`generator` restarts the sequence, so the same stream
    always yields bit-identical draws on every platform numpy supports.
    """

    seed: int
    stream_id: int = 0
    algorithm: str = ALGORITHM

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ContractError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.algorithm != ALGORITHM:
            raise ContractError(f"unsupported RNG algorithm {self.algorithm!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.seed), int(self.stream_id)])
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)

    def to_dict(self) -> dict:
        return {"seed": int(self.seed), "stream_id": int(self.stream_id), "algorithm": self.algorithm}


def poisson_sample(mean_field, stream: RandomStream) -> np.ndarray:
    """Independent Poisson draws per cell of a nonnegative mean matrix."""
    mean = np.asarray(mean_field, dtype=float)
    if not np.all(np.isfinite(mean)):
        raise ContractError("Poisson means must be finite")
    if np.any(mean < 0):
        raise ContractError("Poisson means must be nonnegative")
    return stream.generator().poisson(mean).astype(np.int64)
