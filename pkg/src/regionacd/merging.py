"""Greedy volume-threshold merging of convex part lists.

Repeatedly merges the AABB-adjacent pair whose hull adds the least relative
volume, while that relative error stays within the tolerance.  Exact
complements (added volume ~ 0) always merge, even at tau = 0, via a small
floating-point floor on the threshold.
"""

from __future__ import annotations

import heapq

import numpy as np

from .convex import ConvexPart, merge_pair
from .errors import DegenerateInput

NEIGHBOR_MARGIN_FACTOR = 1e-6   # AABB expansion (fraction of scene diagonal)
TAU_FLOOR = 1e-9                # relative error indistinguishable from exact


def _scene_diagonal(parts: list[ConvexPart]) -> float:
    lo = np.min([p.aabb.min for p in parts], axis=0)
    hi = np.max([p.aabb.max for p in parts], axis=0)
    return float(np.linalg.norm(hi - lo))


def merge_neighbors(parts: list[ConvexPart], tau: float, allowed=None) -> list[ConvexPart]:
    """Greedily merge adjacent parts while relative added volume <= tau.

    ``allowed(a, b, merged)`` may veto a merge (used by the pipeline to keep
    region-exclusion intact).  Merged parts inherit a summed source volume
    and, when both inputs agree, the provenance tag.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if len(parts) < 2:
        return list(parts)
    threshold = max(tau, TAU_FLOOR)
    margin = NEIGHBOR_MARGIN_FACTOR * _scene_diagonal(parts)

    alive: dict[int, ConvexPart] = dict(enumerate(parts))
    next_id = len(parts)
    heap: list[tuple[float, int, int]] = []

    def consider(i: int, j: int):
        a, b = alive[i], alive[j]
        if not a.aabb.overlaps(b.aabb, margin=margin):
            return
        try:
            merged, err = merge_pair(a, b)
        except DegenerateInput:
            return
        rel = err / (a.volume + b.volume)
        if rel > threshold:
            return
        if allowed is not None and not allowed(a, b, merged):
            return
        heapq.heappush(heap, (rel, i, j))

    ids = list(alive)
    for x in range(len(ids)):
        for y in range(x + 1, len(ids)):
            consider(ids[x], ids[y])

    while heap:
        rel, i, j = heapq.heappop(heap)
        if i not in alive or j not in alive:
            continue
        a, b = alive[i], alive[j]
        merged, err = merge_pair(a, b)
        if a.provenance == b.provenance:
            merged.provenance = a.provenance
        merged.source_volume = (a.source_volume or a.volume) + (b.source_volume or b.volume)
        del alive[i], alive[j]
        mid = next_id
        next_id += 1
        alive[mid] = merged
        for k in list(alive):
            if k != mid:
                consider(min(k, mid), max(k, mid))
    return list(alive.values())
