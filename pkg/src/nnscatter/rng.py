"""Seeded counter-based random streams.

All randomness in the package flows through `stream`, a Philox generator
keyed by the master seed plus an integer path.  Streams for distinct paths
are independent, so fan-out work (per-step measurements, twirl members,
tomography settings) can run in any order, or concurrently, without
changing any sampled number.

Path convention used by the experiment pipeline:
    (purpose, step_index, member_index)
with purposes: 0 = main measurement, 1 = randomized-compiling member
(draws and measurement), 2 = readout calibration, 3 = tomography setting.
"""

from __future__ import annotations

import numpy as np

PURPOSE_MEASURE = 0
PURPOSE_RC = 1
PURPOSE_RCAL = 2
PURPOSE_TOMOGRAPHY = 3


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (master_seed, path)."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))
