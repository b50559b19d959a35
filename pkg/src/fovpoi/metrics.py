"""Distance between top-k cell sets, via greedy closest-pair-first matching."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import geo_distance
from .grid import CellRef


@dataclass
class MatchReport:
    """Greedy matching of two cell sets.

    ``correct_fraction`` counts pairs within ``tol`` meters over the size of
    the second set (the reference).
    """

    pairs: list[tuple[CellRef, CellRef, float]] = field(default_factory=list)
    sum_min_distance: float = 0.0
    correct_fraction: float = 0.0
    tol: float = 20.0


def sum_min_distances(a, b, tol: float = 20.0) -> MatchReport:
    """Repeatedly pair the closest unmatched cells of ``a`` and ``b``.

    Ties in distance go to the smaller ``(y, x)`` of the ``a`` cell, then of
    the ``b`` cell.
    """
    a, b = list(a), list(b)
    if not a or not b:
        return MatchReport(tol=tol)
    dist = np.array([[geo_distance(ca.center, cb.center) for cb in b] for ca in a])
    ka = np.array([(c.y, c.x) for c in a])
    kb = np.array([(c.y, c.x) for c in b])
    ii, jj = np.meshgrid(np.arange(len(a)), np.arange(len(b)), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    order = np.lexsort((kb[jj, 1], kb[jj, 0], ka[ii, 1], ka[ii, 0], dist.ravel()))
    used_a = np.zeros(len(a), dtype=bool)
    used_b = np.zeros(len(b), dtype=bool)
    pairs = []
    for o in order:
        i, j = ii[o], jj[o]
        if used_a[i] or used_b[j]:
            continue
        used_a[i] = used_b[j] = True
        pairs.append((a[i], b[j], float(dist[i, j])))
        if len(pairs) == min(len(a), len(b)):
            break
    total = float(sum(d for _, _, d in pairs))
    good = sum(1 for _, _, d in pairs if d <= tol)
    return MatchReport(pairs, total, good / len(b), tol)


def correct_fraction(detected, reference, tol: float = 20.0) -> float:
    """Share of ``reference`` cells matched by a detected cell within ``tol`` meters."""
    reference = list(reference)
    if not reference:
        raise ValueError("reference set must not be empty")
    return sum_min_distances(detected, reference, tol).correct_fraction
