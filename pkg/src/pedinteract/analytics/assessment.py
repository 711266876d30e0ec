"""Conflict-structure assessment: how well a partition separates d_robot distributions."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..errors import InsufficientClustersError, InvalidInputError
from .stats import Ecdf, ks_two_sample, wasserstein1

log = logging.getLogger(__name__)

MIN_CLUSTER_SIZE = 2


@dataclass(frozen=True)
class PairStat:
    a: Any
    b: Any
    n_a: int
    n_b: int
    d_n: float
    p_value: float
    w1: float


@dataclass(frozen=True)
class DiscriminatoryPower:
    max_dn: float
    min_dn: float
    max_pair: PairStat
    min_pair: PairStat
    pairs: tuple[PairStat, ...]
    excluded: tuple = ()


def _class_order(labels):
    return sorted(set(labels.tolist()), key=lambda v: (str(type(v)), v))


def discriminatory_power(labels, d_robot, min_size: int = MIN_CLUSTER_SIZE) -> DiscriminatoryPower:
    """Pairwise KS and W1 between the d_robot samples of every pair of classes.

    Classes with fewer than ``min_size`` members are left out (with a warning).
    The largest and smallest KS statistic are reported with their pairs; ties
    go to the first pair in label order.
    """
    labels = np.asarray(labels)
    d = np.asarray(d_robot, dtype=float).reshape(-1)
    if labels.shape[0] != d.shape[0]:
        raise InvalidInputError("labels and d_robot differ in length")
    groups, excluded = {}, []
    for c in _class_order(labels):
        members = d[labels == c]
        if members.size < min_size:
            excluded.append(c)
        else:
            groups[c] = members
    if excluded:
        warnings.warn(f"classes with fewer than {min_size} members excluded: {excluded}", stacklevel=2)
    if len(groups) < 2:
        raise InsufficientClustersError(f"need 2 classes with >= {min_size} members, have {len(groups)}")
    keys = list(groups)
    pairs = []
    for i, ka in enumerate(keys):
        for kb in keys[i + 1:]:
            ks = ks_two_sample(groups[ka], groups[kb])
            pairs.append(PairStat(ka, kb, groups[ka].size, groups[kb].size, ks.d_n, ks.p_value,
                                  wasserstein1(groups[ka], groups[kb])))
    hi = max(pairs, key=lambda p: p.d_n)
    lo = min(pairs, key=lambda p: p.d_n)
    return DiscriminatoryPower(hi.d_n, lo.d_n, hi, lo, tuple(pairs), tuple(excluded))


def try_discriminatory_power(labels, d_robot, min_size: int = MIN_CLUSTER_SIZE) -> Optional[DiscriminatoryPower]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return discriminatory_power(labels, d_robot, min_size)
    except InsufficientClustersError as exc:
        log.info("discriminatory power unavailable: %s", exc)
        return None


@dataclass
class PartitionComparison:
    power_a: Optional[DiscriminatoryPower]
    power_b: Optional[DiscriminatoryPower]
    classes_a: list
    classes_b: list
    counts: np.ndarray
    ratios: np.ndarray
    global_ratios: np.ndarray
    ecdfs_a: dict = field(default_factory=dict)
    ecdfs_b: dict = field(default_factory=dict)


def compare_partitions(labels_a, labels_b, d_robot) -> PartitionComparison:
    """Discriminatory power of two partitions side by side, plus their cross-tabulation.

    ``counts[i, j]`` is the number of rows in class ``classes_a[i]`` and
    ``classes_b[j]``; ``ratios`` normalises each row of ``counts``;
    ``global_ratios`` is the overall share of each ``classes_b`` value.
    """
    la = np.asarray(labels_a)
    lb = np.asarray(labels_b)
    d = np.asarray(d_robot, dtype=float).reshape(-1)
    if not (la.shape[0] == lb.shape[0] == d.shape[0]):
        raise InvalidInputError("label vectors and d_robot must have equal length")
    ca, cb = _class_order(la), _class_order(lb)
    counts = np.zeros((len(ca), len(cb)), dtype=int)
    for i, a in enumerate(ca):
        for j, b in enumerate(cb):
            counts[i, j] = int(np.count_nonzero((la == a) & (lb == b)))
    row_tot = counts.sum(axis=1, keepdims=True)
    ratios = counts / np.where(row_tot == 0, 1, row_tot)
    total = counts.sum()
    global_ratios = counts.sum(axis=0) / total if total else np.zeros(len(cb))
    return PartitionComparison(
        power_a=try_discriminatory_power(la, d),
        power_b=try_discriminatory_power(lb, d),
        classes_a=ca,
        classes_b=cb,
        counts=counts,
        ratios=ratios,
        global_ratios=global_ratios,
        ecdfs_a={a: Ecdf(d[la == a]) for a in ca},
        ecdfs_b={b: Ecdf(d[lb == b]) for b in cb},
    )
