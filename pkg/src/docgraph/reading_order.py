"""Recursive X-Y cut segmentation and the basic reading order derived from it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import BoundingBox, LayoutInstance, Page

XCUT = "XCut"
YCUT = "YCut"
LEAF = "Leaf"


@dataclass
class CutTree:
    kind: str
    region: BoundingBox
    children: list["CutTree"] = field(default_factory=list)
    instance_ids: list[int] = field(default_factory=list)

    def leaves(self) -> Iterator["CutTree"]:
        if self.kind == LEAF:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def ids(self) -> list[int]:
        """Instance ids under this node in traversal order."""
        return [i for leaf in self.leaves() for i in leaf.instance_ids]

    def nodes(self) -> Iterator["CutTree"]:
        yield self
        for child in self.children:
            yield from child.nodes()

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "region": self.region.as_list()}
        if self.kind == LEAF:
            d["ids"] = list(self.instance_ids)
        else:
            d["children"] = [c.to_dict() for c in self.children]
        return d


def fallback_key(inst: LayoutInstance):
    return (inst.bbox.y, inst.bbox.x, inst.id)


def _extent(instances) -> BoundingBox:
    x1 = min(i.bbox.x for i in instances)
    y1 = min(i.bbox.y for i in instances)
    x2 = max(i.bbox.x2 for i in instances)
    y2 = max(i.bbox.y2 for i in instances)
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def _split(instances, axis: str, min_gap: float) -> list[list[LayoutInstance]]:
    """Group instances whose projections on `axis` are separated by gaps wider than min_gap."""
    if axis == "y":
        span = lambda i: (i.bbox.y, i.bbox.y2)  # noqa: E731
    else:
        span = lambda i: (i.bbox.x, i.bbox.x2)  # noqa: E731
    ordered = sorted(instances, key=lambda i: (span(i), i.id))
    groups = [[ordered[0]]]
    reach = span(ordered[0])[1]
    for inst in ordered[1:]:
        start, end = span(inst)
        if start - reach > min_gap:
            groups.append([inst])
        else:
            groups[-1].append(inst)
        reach = max(reach, end)
    return groups


def _cut(instances, min_gap: float) -> CutTree:
    region = _extent(instances)
    if len(instances) == 1:
        return CutTree(LEAF, region, instance_ids=[instances[0].id])
    for axis, kind in (("y", YCUT), ("x", XCUT)):
        groups = _split(instances, axis, min_gap)
        if len(groups) > 1:
            return CutTree(kind, region, children=[_cut(g, min_gap) for g in groups])
    residue = sorted(instances, key=fallback_key)
    return CutTree(LEAF, region, instance_ids=[i.id for i in residue])


def xy_cut(page: Page, min_gap: float = 0.0) -> CutTree:
    """Split the page at horizontal whitespace bands first, then vertical ones, recursively.

    Every qualifying gap at a level is cut at once, so nodes are n-ary. Regions
    that admit no cut stay as one leaf holding all of their instances.
    """
    if min_gap < 0:
        raise ValueError("min_gap must be non-negative")
    if not page.instances:
        return CutTree(LEAF, BoundingBox(0.0, 0.0, page.width, page.height))
    return _cut(list(page.instances), min_gap)


def reading_order(page: Page, min_gap: float = 0.0, tree: Optional[CutTree] = None) -> list[int]:
    """Depth-first traversal of the cut tree: bands top to bottom, columns left to right."""
    if tree is None:
        tree = xy_cut(page, min_gap)
    return tree.ids()
