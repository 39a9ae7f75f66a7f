"""Nearest-neighbour spatial relations (Up/Down/Left/Right) and Manhattan detection."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    SPATIAL_RELATIONS,
    LayoutInstance,
    Page,
    PageValidationError,
    RelationEdge,
    RelationType,
    validate_page,
)


class LayoutClass(str, Enum):
    MANHATTAN = "Manhattan"
    NON_MANHATTAN = "NonManhattan"


@dataclass(frozen=True)
class DirectionalNeighbor:
    subject: int
    direction: RelationType
    object: int
    edge_distance: float


def _box_arrays(instances):
    x1 = np.array([i.bbox.x for i in instances], dtype=float)
    y1 = np.array([i.bbox.y for i in instances], dtype=float)
    x2 = np.array([i.bbox.x2 for i in instances], dtype=float)
    y2 = np.array([i.bbox.y2 for i in instances], dtype=float)
    ids = np.array([i.id for i in instances], dtype=np.int64)
    return x1, y1, x2, y2, ids


def _direction_tables(x1, y1, x2, y2):
    """Per direction: (distance matrix, perpendicular overlap matrix); row = subject, col = candidate.

    Entries that are not admissible candidates are +inf in the distance matrix.
    """
    x_ov = np.minimum(x2[:, None], x2[None, :]) - np.maximum(x1[:, None], x1[None, :])
    y_ov = np.minimum(y2[:, None], y2[None, :]) - np.maximum(y1[:, None], y1[None, :])
    n = len(x1)
    not_self = ~np.eye(n, dtype=bool)

    # object.top - subject.bottom, etc.; >= 0 means the object lies on that side
    gaps = {
        RelationType.DOWN: (y1[None, :] - y2[:, None], x_ov),
        RelationType.UP: (y1[:, None] - y2[None, :], x_ov),
        RelationType.RIGHT: (x1[None, :] - x2[:, None], y_ov),
        RelationType.LEFT: (x1[:, None] - x2[None, :], y_ov),
    }
    tables = {}
    for direction, (gap, overlap) in gaps.items():
        ok = (gap >= 0) & (overlap > 0) & not_self
        tables[direction] = (np.where(ok, gap, np.inf), overlap)
    return tables


def _pick(dist_row, overlap_row, ids) -> Optional[int]:
    best = dist_row.min() if len(dist_row) else np.inf
    if not np.isfinite(best):
        return None
    tied = np.flatnonzero(dist_row == best)
    if len(tied) > 1:
        ov = overlap_row[tied]
        tied = tied[ov == ov.max()]
        if len(tied) > 1:
            tied = tied[[np.argmin(ids[tied])]]
    return int(tied[0])


def _check_direction(direction: RelationType) -> None:
    if direction not in SPATIAL_RELATIONS:
        raise ValueError(f"{direction!r} is not a spatial direction")


def nearest_in_direction(subject: LayoutInstance, page: Page,
                         direction: RelationType) -> Optional[DirectionalNeighbor]:
    """Closest instance lying strictly on `direction`'s side of `subject` with perpendicular overlap.

    Ties on facing-edge distance go to the larger perpendicular overlap, then the lower id.
    """
    direction = RelationType(direction)
    _check_direction(direction)
    others = [inst for inst in page.instances if inst.id != subject.id]
    if not others:
        return None
    insts = [subject] + others
    x1, y1, x2, y2, ids = _box_arrays(insts)
    dist, overlap = _direction_tables(x1, y1, x2, y2)[direction]
    j = _pick(dist[0], overlap[0], ids)
    if j is None:
        return None
    return DirectionalNeighbor(subject.id, direction, int(ids[j]), float(dist[0, j]))


def spatial_neighbors(page: Page) -> list[DirectionalNeighbor]:
    insts = page.instances
    if len(insts) < 2:
        return []
    x1, y1, x2, y2, ids = _box_arrays(insts)
    tables = _direction_tables(x1, y1, x2, y2)
    out = []
    for i in range(len(insts)):
        for direction in SPATIAL_RELATIONS:
            dist, overlap = tables[direction]
            j = _pick(dist[i], overlap[i], ids)
            if j is not None:
                out.append(DirectionalNeighbor(int(ids[i]), direction, int(ids[j]), float(dist[i, j])))
    return out


def extract_spatial(page: Page, check: bool = True) -> list[RelationEdge]:
    """One edge (subject, direction, nearest object) per subject and direction that has a neighbour."""
    if check:
        report = validate_page(page)
        if not report.ok:
            raise PageValidationError(report)
    return [RelationEdge(n.subject, n.object, n.direction) for n in spatial_neighbors(page)]


def classify_layout(page: Page, min_gap: float = 0.0) -> LayoutClass:
    """Manhattan when recursive whitespace cuts isolate every instance."""
    from .reading_order import xy_cut

    tree = xy_cut(page, min_gap)
    if all(len(leaf.instance_ids) <= 1 for leaf in tree.leaves()):
        return LayoutClass.MANHATTAN
    return LayoutClass.NON_MANHATTAN
