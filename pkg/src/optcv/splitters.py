"""Train/test partitions under dependency-respecting schemes.

Buffer observations between train and test are always *discarded*, never
silently returned to training, so every plan is auditable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import DegenerateInput, DimensionError
from .sampling import SeededStream


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint sorted train/test/discarded index sets with a scheme tag."""

    train: tuple
    test: tuple
    discarded: tuple
    scheme: str = ""

    def __post_init__(self):
        train = tuple(sorted(int(i) for i in self.train))
        test = tuple(sorted(int(i) for i in self.test))
        discarded = tuple(sorted(int(i) for i in self.discarded))
        if not train or not test:
            raise DegenerateInput("train and test must both be nonempty")
        sets = (set(train), set(test), set(discarded))
        if len(sets[0]) != len(train) or len(sets[1]) != len(test) or len(sets[2]) != len(discarded):
            raise DegenerateInput("duplicate indices within a set")
        if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
            raise DegenerateInput("train/test/discarded must be pairwise disjoint")
        if min(train + test + discarded) < 0:
            raise DegenerateInput("indices must be non-negative")
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "test", test)
        object.__setattr__(self, "discarded", discarded)

    def to_csv(self, path) -> None:
        assignment = {}
        for i in self.train:
            assignment[i] = "train"
        for i in self.test:
            assignment[i] = "test"
        for i in self.discarded:
            assignment[i] = "discarded"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "assignment"])
            for i in sorted(assignment):
                writer.writerow([i, assignment[i]])


@dataclass(frozen=True)
class DependencyMetadata:
    """Optional structure describing dependencies among the n observations."""

    ordering: tuple | None = None
    groups: tuple | None = None
    adjacency: np.ndarray | None = None

    def __post_init__(self):
        lengths = set()
        if self.ordering is not None:
            ordering = tuple(int(i) for i in self.ordering)
            if set(ordering) != set(range(len(ordering))):
                raise DegenerateInput("ordering must be a permutation of 0..n-1")
            object.__setattr__(self, "ordering", ordering)
            lengths.add(len(ordering))
        if self.groups is not None:
            object.__setattr__(self, "groups", tuple(self.groups))
            lengths.add(len(self.groups))
        if self.adjacency is not None:
            adj = _check_adjacency(self.adjacency)
            object.__setattr__(self, "adjacency", adj)
            lengths.add(adj.shape[0])
        if len(lengths) > 1:
            raise DimensionError(f"metadata lengths disagree: {sorted(lengths)}")


def _check_adjacency(adjacency) -> np.ndarray:
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise DimensionError(f"adjacency must be square, got {adj.shape}")
    adj = adj.astype(bool)
    if np.any(adj != adj.T):
        raise DegenerateInput("adjacency must be symmetric")
    if np.any(np.diag(adj)):
        raise DegenerateInput("adjacency diagonal must be zero")
    return adj


def kfold(n: int, k: int, stream: SeededStream) -> list[SplitPlan]:
    """Random k-fold partition; k = n gives leave-one-out."""
    if not 2 <= k <= n:
        raise DimensionError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = stream.permutation(n)
    folds = np.array_split(perm, k)
    everything = set(range(n))
    return [
        SplitPlan(
            train=tuple(sorted(everything - set(fold.tolist()))),
            test=tuple(fold.tolist()),
            discarded=(),
            scheme=f"kfold(k={k},fold={i})",
        )
        for i, fold in enumerate(folds)
    ]


def temporal_block(n: int, test_fraction: float, gap: int = 0) -> SplitPlan:
    """Chronological holdout: test is the series tail, after a discarded gap."""
    if not 0.0 < test_fraction < 1.0:
        raise DimensionError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if gap < 0:
        raise DimensionError(f"gap must be >= 0, got {gap}")
    m = ceil(n * test_fraction)
    first_test = n - m
    first_gap = first_test - gap
    if first_gap <= 0:
        raise DimensionError(
            f"train would be empty: n={n}, test size {m}, gap {gap}"
        )
    return SplitPlan(
        train=tuple(range(first_gap)),
        test=tuple(range(first_test, n)),
        discarded=tuple(range(first_gap, first_test)),
        scheme=f"temporal_block(test_fraction={test_fraction},gap={gap})",
    )


def non_dependent_cv(n: int, k: int, gap: int) -> list[SplitPlan]:
    """Contiguous k-fold on the time axis with a discarded buffer of width gap.

    Training indices within gap of any test index are moved to discarded;
    gap = 0 reproduces plain contiguous-block k-fold.
    """
    if not 2 <= k <= n:
        raise DimensionError(f"need 2 <= k <= n, got k={k}, n={n}")
    if gap < 0:
        raise DimensionError(f"gap must be >= 0, got {gap}")
    blocks = np.array_split(np.arange(n), k)
    plans = []
    for i, block in enumerate(blocks):
        lo, hi = int(block[0]), int(block[-1])
        train = [t for t in range(n) if t < lo - gap or t > hi + gap]
        if not train:
            raise DimensionError(f"gap {gap} empties the training set for fold {i}")
        discarded = sorted(set(range(n)) - set(train) - set(block.tolist()))
        plans.append(
            SplitPlan(
                train=tuple(train),
                test=tuple(block.tolist()),
                discarded=tuple(discarded),
                scheme=f"non_dependent_cv(k={k},gap={gap},fold={i})",
            )
        )
    return plans


def leave_one_group_out(groups) -> list[SplitPlan]:
    """One plan per distinct group label; the held-out group is the test set."""
    labels = np.asarray(groups)
    distinct = np.unique(labels)
    if distinct.size < 2:
        raise DegenerateInput("need at least 2 distinct group labels")
    plans = []
    indices = np.arange(labels.size)
    for value in distinct:
        mask = labels == value
        plans.append(
            SplitPlan(
                train=tuple(indices[~mask].tolist()),
                test=tuple(indices[mask].tolist()),
                discarded=(),
                scheme=f"leave_one_group_out(group={value})",
            )
        )
    return plans


def network_neighborhood_split(
    adjacency, test_fraction: float, buffer: bool, stream: SeededStream
) -> SplitPlan:
    """Random node holdout; with buffer, train nodes adjacent to test are discarded."""
    adj = _check_adjacency(adjacency)
    n = adj.shape[0]
    if not 0.0 < test_fraction < 1.0:
        raise DimensionError(f"test_fraction must be in (0, 1), got {test_fraction}")
    m = ceil(n * test_fraction)
    if m >= n:
        raise DimensionError(f"test size {m} leaves no training nodes (n={n})")
    test = np.sort(stream.choice_without_replacement(n, m))
    is_test = np.zeros(n, dtype=bool)
    is_test[test] = True
    if buffer:
        touched = adj[is_test].any(axis=0) & ~is_test
    else:
        touched = np.zeros(n, dtype=bool)
    train_mask = ~is_test & ~touched
    if not train_mask.any():
        raise DegenerateInput("buffering removed every training node")
    return SplitPlan(
        train=tuple(np.flatnonzero(train_mask).tolist()),
        test=tuple(test.tolist()),
        discarded=tuple(np.flatnonzero(touched).tolist()),
        scheme=f"network(test_fraction={test_fraction},buffer={buffer})",
    )
