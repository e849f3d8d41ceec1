"""
Clustering module for stockpile_tracker - density-based grouping of event positions
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import Field
from sklearn.cluster import DBSCAN
from sklearn.neighbors import NearestNeighbors

from .config import ValidatedModel
from .exceptions import GeometryError
from .geometry import PointLike

logger = logging.getLogger(__name__)

NOISE = -1


class DbscanParams(ValidatedModel):
    """Search distance (eps, metres) and minimum neighbourhood size.

    min_pts counts the point itself.
    """
    eps: float = Field(gt=0, allow_inf_nan=False)
    min_pts: int = Field(ge=1)


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-point cluster labels (0..k-1) or NOISE, in input order."""
    labels: Tuple[int, ...] = ()
    core: Tuple[bool, ...] = ()

    @property
    def n_clusters(self) -> int:
        return max(self.labels, default=NOISE) + 1

    def __len__(self) -> int:
        return len(self.labels)

    def members(self, cluster_id: int) -> List[int]:
        return [i for i, label in enumerate(self.labels) if label == cluster_id]

    def clusters(self) -> List[List[int]]:
        """Member indices per cluster id, in id order."""
        groups: List[List[int]] = [[] for _ in range(self.n_clusters)]
        for i, label in enumerate(self.labels):
            if label != NOISE:
                groups[label].append(i)
        return groups

    @property
    def noise(self) -> List[int]:
        return self.members(NOISE)


def dbscan(points: Sequence[PointLike], params: DbscanParams) -> ClusterAssignment:
    """Cluster points with DBSCAN.

    Points are sorted lexicographically before fitting. Cluster ids follow
    the first appearance of each cluster's core points in that order, and a
    border point reachable from several clusters joins the lowest id, so the
    partition does not depend on input order.
    """
    n = len(points)
    if n == 0:
        return ClusterAssignment()

    coords = np.asarray([(p[0], p[1]) for p in points], dtype=float)
    if not np.isfinite(coords).all():
        raise GeometryError("dbscan input contains non-finite coordinates")

    order = np.lexsort((coords[:, 1], coords[:, 0]))
    ordered = coords[order]

    fitted = DBSCAN(eps=params.eps, min_samples=params.min_pts).fit(ordered)
    is_core = np.zeros(n, dtype=bool)
    is_core[fitted.core_sample_indices_] = True

    canonical = {}
    labels = np.full(n, NOISE, dtype=int)
    for idx in np.flatnonzero(is_core):
        raw = int(fitted.labels_[idx])
        labels[idx] = canonical.setdefault(raw, len(canonical))

    border = np.flatnonzero(~is_core)
    if border.size and is_core.any():
        core_idx = np.flatnonzero(is_core)
        index = NearestNeighbors(radius=params.eps).fit(ordered[core_idx])
        neighbours = index.radius_neighbors(ordered[border], return_distance=False)
        core_labels = labels[core_idx]
        for i, found in zip(border, neighbours):
            if found.size:
                labels[i] = int(core_labels[found].min())

    result = np.empty(n, dtype=int)
    result[order] = labels
    core_in_input = np.empty(n, dtype=bool)
    core_in_input[order] = is_core

    assignment = ClusterAssignment(
        labels=tuple(int(v) for v in result),
        core=tuple(bool(v) for v in core_in_input),
    )
    logger.debug("dbscan: %d points, %d clusters, %d noise",
                 n, assignment.n_clusters, len(assignment.noise))
    return assignment
