"""Counter-based per-path random streams.

Each simulated path owns an independent Philox stream keyed by
(master_seed, stream_offset + path_index).  Philox is counter-based, so the
streams are splittable without coordination: any path can be regenerated in
isolation and results do not depend on execution order or the degree of
parallelism.  Kernels consume the stream through fixed-size chunks so that
the compiled and pure-Python backends see bit-identical draws.
"""

from __future__ import annotations

import numpy as np

__all__ = ["path_generator", "StreamFactory", "CHUNK0", "CHUNK_GROWTH", "CHUNK_MAX"]

# Refill chunks grow geometrically so short paths stay cheap and long paths
# amortize the call overhead.  Drawn values are invariant to chunk sizes
# (numpy streams are sequential), but the policy still fixes how uniform and
# normal refills interleave on the underlying counter stream, so both kernel
# backends share these constants.
CHUNK0 = 64
CHUNK_GROWTH = 8
CHUNK_MAX = 16384

_MASK64 = (1 << 64) - 1


def path_generator(master_seed: int, stream_index: int) -> np.random.Generator:
    """Generator for one path: Philox keyed by (master_seed, stream_index)."""
    key = np.array(
        [int(master_seed) & _MASK64, int(stream_index) & _MASK64], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


class StreamFactory:
    """Cheap per-path generators over one re-keyed Philox instance.

    Produces streams identical to ``path_generator`` while skipping the
    bit-generator construction cost per path.  A factory re-keys a single
    Philox object, so it must not be shared across threads; estimators
    create one per worker chunk.
    """

    def __init__(self, master_seed: int):
        self._seed = int(master_seed) & _MASK64
        self._bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))

    def generator(self, stream_index: int) -> np.random.Generator:
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.zeros(4, dtype=np.uint64),
                "key": np.array(
                    [self._seed, int(stream_index) & _MASK64], dtype=np.uint64
                ),
            },
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return np.random.Generator(self._bitgen)
