"""CART split primitives: Gini impurity and exact best-split search.

``best_split`` is the reference semantics for node splitting: candidate
thresholds are midpoints between consecutive distinct sorted values of each
candidate feature, the winner maximizes the weighted Gini decrease, and ties
fall to the lower feature index, then the lower threshold. Gains are compared
as exact rationals so the tie-break never depends on floating-point rounding.
The compiled tree builder reproduces these choices; midpoints that round onto
the lower value (possible only for adjacent floats) are skipped by both.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Optional

from ..errors import EmptyCounts
from .dataset import Dataset


def gini(counts: Mapping[str, int] | Mapping[int, int]) -> float:
    """Gini impurity 1 - sum((c_i / n)^2); in [0, 1 - 1/L] for L labels."""
    total = 0
    for c in counts.values():
        if c < 0:
            raise ValueError(f"negative count {c}")
        total += c
    if total == 0:
        raise EmptyCounts("gini of an empty count map")
    s = 0.0
    for c in counts.values():
        p = c / total
        s += p * p
    return 1.0 - s


def best_split(
    data: Dataset,
    candidate_features: Iterable[int] | None = None,
    min_leaf: int = 1,
) -> Optional[tuple[int, float, float]]:
    """Best (feature, threshold, impurity decrease) or None.

    None means the node is pure or no candidate threshold separates it.
    min_leaf filters cuts whose smaller side would fall below it; the public
    contract is min_leaf=1 (every cut between distinct values is legal).
    """
    if len(data) == 0:
        raise ValueError("best_split needs a nonempty dataset")
    if candidate_features is None:
        candidate_features = range(data.feature_dim)
    feats = sorted(set(int(f) for f in candidate_features))
    for f in feats:
        if not 0 <= f < data.feature_dim:
            raise ValueError(f"feature index {f} out of range")

    n = len(data)
    totals: dict[int, int] = {}
    for c in data.y:
        totals[int(c)] = totals.get(int(c), 0) + 1
    if len(totals) <= 1:
        return None
    s_all = sum(v * v for v in totals.values())

    best: Optional[tuple[Fraction, int, float]] = None  # (gain key, feature, thr)
    best_counts = None

    for f in feats:
        order = sorted(range(n), key=lambda i: data.X[i, f])
        lcnt: dict[int, int] = {}
        sl = 0
        nl = 0
        sr = s_all
        for pos in range(n - 1):
            i = order[pos]
            c = int(data.y[i])
            cur = lcnt.get(c, 0)
            sl += 2 * cur + 1
            sr -= 2 * (totals[c] - cur) - 1
            lcnt[c] = cur + 1
            nl += 1
            v_lo = data.X[i, f]
            v_hi = data.X[order[pos + 1], f]
            if v_hi <= v_lo:
                continue
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            thr = (v_lo + v_hi) * 0.5
            if not thr > v_lo:
                continue  # adjacent floats can collapse the midpoint
            key = Fraction(sl * nr + sr * nl, nl * nr)
            if best is None or key > best[0]:
                best = (key, f, thr)
                best_counts = (dict(lcnt), nl)

    if best is None:
        return None

    lcnt, nl = best_counts
    rcnt = {c: totals[c] - lcnt.get(c, 0) for c in totals}
    rcnt = {c: v for c, v in rcnt.items() if v > 0}
    lmap = {c: v for c, v in lcnt.items() if v > 0}
    decrease = (
        gini(totals)
        - (nl / n) * gini(lmap)
        - ((n - nl) / n) * gini(rcnt)
    )
    return best[1], best[2], decrease
