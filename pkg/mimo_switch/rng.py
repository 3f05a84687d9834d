"""Seeded, splittable random streams.

Every trial owns a family of independent numpy generators keyed by
``(seed, trial_id, purpose)``, so trials can run in any order or in
parallel and still draw identical numbers.
"""

import numpy as np

PURPOSES = (
    "topology",
    "fading_f1",
    "fading_f2",
    "estimate_f1",
    "estimate_f2",
    "contention_f1",
    "contention_f2",
)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


class TrialStreams:
    def __init__(self, seed: int, trial_id: int):
        self.seed = seed
        self.trial_id = trial_id

    def __getitem__(self, purpose: str) -> np.random.Generator:
        # A fresh generator per lookup keeps draws independent of call order.
        return make_rng(self.seed, self.trial_id, PURPOSES.index(purpose))
