"""Train/test splitting grouped by origin document.

All variants enhanced from the same capture share its content; splitting
them across partitions would leak content from train into test.  The
grouped split therefore assigns whole origin groups to one side, filling
the train partition in seeded-shuffled group order until it reaches the
target fraction (so the achieved sizes are within one origin group of the
target).  The test side always keeps at least one group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, SplitInfeasibleError
from ..seeding import make_rng
from .manifest import DocumentSample


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    group_by_origin: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidArgumentError(
                f"train_fraction {self.train_fraction} outside (0, 1)"
            )


def split_dataset(
    samples: list[DocumentSample], spec: SplitSpec
) -> tuple[list[DocumentSample], list[DocumentSample]]:
    """Deterministic (seeded) partition preserving input order within sides."""
    n = len(samples)
    if n < 2:
        raise SplitInfeasibleError(f"cannot split {n} samples")
    rng = make_rng(spec.seed, "split")

    if not spec.group_by_origin:
        order = rng.permutation(n)
        n_train = int(np.clip(round(spec.train_fraction * n), 1, n - 1))
        train_idx = set(order[:n_train].tolist())
        train = [s for i, s in enumerate(samples) if i in train_idx]
        test = [s for i, s in enumerate(samples) if i not in train_idx]
        return train, test

    groups: dict[str, list[int]] = {}
    for i, s in enumerate(samples):
        groups.setdefault(s.origin_id, []).append(i)
    if len(groups) < 2:
        raise SplitInfeasibleError(
            f"grouped split needs >= 2 distinct origin_ids, got {len(groups)}"
        )
    keys = sorted(groups)
    shuffled = [keys[int(k)] for k in rng.permutation(len(keys))]
    target = spec.train_fraction * n
    train_idx: set[int] = set()
    taken = 0
    for gi, key in enumerate(shuffled):
        remaining_groups = len(shuffled) - gi
        if taken >= target or remaining_groups == 1:
            break  # stop at the target; the last group always stays in test
        train_idx.update(groups[key])
        taken += len(groups[key])
    train = [s for i, s in enumerate(samples) if i in train_idx]
    test = [s for i, s in enumerate(samples) if i not in train_idx]
    assert not {s.origin_id for s in train} & {s.origin_id for s in test}
    return train, test
