"""Independent naive recomputations used to cross-check the engine.

These deliberately restate the answer-value table over plain strings and sum
with a bare loop; they never import the scoring internals they check.
"""

from fractions import Fraction
from itertools import combinations

LEVEL_VALUES = {
    "Yes": Fraction(1),
    "No": Fraction(0),
    "PartialLow": Fraction(1, 4),
    "PartialModerate": Fraction(1, 2),
    "PartialHigh": Fraction(3, 4),
    "DoesNotApply": Fraction(0),
    "AlternateApproach": Fraction(1),
    "Unknown": Fraction(0),
}


def naive_sum_count(level_by_id: dict, ids, exclude_na: bool):
    """Sum of values and applicable count over ``ids``."""
    total = Fraction(0)
    count = 0
    for eid in ids:
        level = level_by_id[eid]
        if exclude_na and level == "DoesNotApply":
            continue
        total += LEVEL_VALUES[level]
        count += 1
    return total, count


def naive_fraction(total: Fraction, count: int) -> Fraction:
    return Fraction(1) if count == 0 else total / count


def exhaustive_min_upgrades(gains, base_sum, denominator, target):
    """Minimum number of upgrades whose gains reach ``target``; None if none do.

    Enumerates subsets in ascending cardinality. Candidates are pre-sorted by
    gain so a witness at the answer cardinality appears early, but every
    subset of that size would be visited if needed. Infeasibility is certified
    by the all-upgrades bound: no subset can sum past the total.
    """
    if denominator == 0:
        return 0
    need = target * denominator - base_sum
    if need <= 0:
        return 0
    gains = sorted(gains, reverse=True)
    if sum(gains, Fraction(0)) < need:
        return None
    for k in range(1, len(gains) + 1):
        # Sound prune: no size-k subset can beat the k largest gains.
        if sum(gains[:k], Fraction(0)) < need:
            continue
        for combo in combinations(gains, k):
            if sum(combo, Fraction(0)) >= need:
                return k
    return None
