"""Classification agreement metrics and the outlier report.

ARI is computed exactly (integer pair counts, one rational division at the
end); MCR searches all injective label mappings, which is exhaustive but
fine for the K <= 10 bound enforced here.
"""

from fractions import Fraction
from itertools import permutations
from typing import Optional, Sequence

import numpy as np

from .ecm import FitResult, Kind
from .errors import KindMismatch, LengthMismatch


def _apply_mask(a, b, mask):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"label vectors differ: {a.shape} vs {b.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape:
            raise LengthMismatch(f"mask length {mask.shape} vs labels {a.shape}")
        a, b = a[mask], b[mask]
    return a, b


def _contingency(a, b):
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    table = np.zeros((len(ua), len(ub)), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def adjusted_rand_index_exact(a, b, mask=None) -> Fraction:
    """Hubert-Arabie ARI as an exact rational number.

    Equals 1 iff the partitions are identical up to relabeling.  The
    degenerate case where both partitions are single trivial clusters (zero
    denominator) returns 1: two identical trivial partitions agree
    perfectly.
    """
    a, b = _apply_mask(a, b, mask)
    n = len(a)
    if n < 2:
        raise LengthMismatch("need at least 2 scored observations")
    table = _contingency(a, b)
    sum_ij = sum(_comb2(int(x)) for x in table.flat)
    sum_a = sum(_comb2(int(x)) for x in table.sum(axis=1))
    sum_b = sum(_comb2(int(x)) for x in table.sum(axis=0))
    total = _comb2(n)
    expected = Fraction(sum_a * sum_b, total)
    max_index = Fraction(sum_a + sum_b, 2)
    if max_index == expected:
        return Fraction(1)
    return (sum_ij - expected) / (max_index - expected)


def adjusted_rand_index(a, b, mask=None) -> float:
    """Chance-corrected pair-counting agreement between two partitions."""
    return float(adjusted_rand_index_exact(a, b, mask=mask))


_MAX_MCR_CLUSTERS = 10


def misclassification_rate(truth, pred, mask=None) -> float:
    """Fraction misclassified under the best injective label mapping.

    Exhaustive over mappings of predicted to true labels; predicted cluster
    count must not exceed 10.
    """
    truth, pred = _apply_mask(truth, pred, mask)
    n = len(truth)
    if n == 0:
        raise LengthMismatch("no scored observations")
    table = _contingency(truth, pred)
    k_true, k_pred = table.shape
    if k_pred > _MAX_MCR_CLUSTERS:
        raise ValueError(f"more than {_MAX_MCR_CLUSTERS} predicted clusters")
    # pad so every predicted cluster can map to a distinct slot
    k = max(k_true, k_pred)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[:k_true, :k_pred] = table
    best = 0
    for perm in permutations(range(k)):
        hits = sum(padded[perm[j], j] for j in range(k))
        if hits > best:
            best = hits
    return float(n - best) / n


def outlier_report(result: FitResult, names: Optional[Sequence[str]] = None) -> dict:
    """Per-cluster contamination summary of a CMVN fit.

    For each cluster: alpha-hat, eta-hat, and the observations flagged bad
    (assigned there with good-posterior <= 0.5), sorted by ascending
    good-posterior.
    """
    if result.model.kind is not Kind.CMVN:
        raise KindMismatch("outlier report requires a CMVN fit")
    n = result.hard_labels.shape[0]
    if names is None:
        names = [str(i + 1) for i in range(n)]
    elif len(names) != n:
        raise LengthMismatch(f"names length {len(names)} vs N={n}")
    clusters = []
    for j, comp in enumerate(result.model.components):
        idx = np.flatnonzero((result.hard_labels == j) & result.bad_flags)
        vj = result.resp.v[idx, j]
        order = np.argsort(vj)
        clusters.append({
            "cluster": j + 1,
            "alpha": float(comp.alpha),
            "eta": float(comp.eta),
            "bad_points": [
                {"unit": int(idx[k]) + 1, "name": names[idx[k]], "v": float(vj[k])}
                for k in order
            ],
        })
    return {"schema_version": 1, "clusters": clusters}
