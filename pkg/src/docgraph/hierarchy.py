"""Role groups, caption association and the logical section forest."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .core import Category, Page, gap_distance


class RoleGroup(str, Enum):
    STRUCTURAL = "Structural"
    NON_TEXTUAL = "NonTextualContent"
    UNASSOCIATED = "Unassociated"
    REFERENCE_ONLY = "ReferenceOnly"


ROLE_OF_CATEGORY = {
    Category.SECTION_HEADER: RoleGroup.STRUCTURAL,
    Category.TEXT: RoleGroup.STRUCTURAL,
    Category.FORMULA: RoleGroup.STRUCTURAL,
    Category.LIST_ITEM: RoleGroup.STRUCTURAL,
    Category.TABLE: RoleGroup.NON_TEXTUAL,
    Category.PICTURE: RoleGroup.NON_TEXTUAL,
    Category.CAPTION: RoleGroup.NON_TEXTUAL,
    Category.PAGE_HEADER: RoleGroup.UNASSOCIATED,
    Category.PAGE_FOOTER: RoleGroup.UNASSOCIATED,
    Category.TITLE: RoleGroup.UNASSOCIATED,
    Category.FOOTNOTE: RoleGroup.REFERENCE_ONLY,
}

CONTAINERS = (Category.TABLE, Category.PICTURE)
SECTION_CONTENT = (Category.TEXT, Category.FORMULA, Category.LIST_ITEM)


@dataclass
class HierarchyForest:
    parent_of: dict[int, int] = field(default_factory=dict)
    # forest members in reading order; roots are the members without a parent
    nodes: list[int] = field(default_factory=list)

    @property
    def roots(self) -> list[int]:
        return [n for n in self.nodes if n not in self.parent_of]

    def children(self, parent: int) -> list[int]:
        return [n for n in self.nodes if self.parent_of.get(n) == parent]

    def sibling_groups(self) -> list[list[int]]:
        """Roots first, then each parent's children, every group in reading order."""
        groups: dict[Optional[int], list[int]] = {None: []}
        for n in self.nodes:
            groups.setdefault(self.parent_of.get(n), []).append(n)
        return [g for g in groups.values() if g]


def group_roles(page: Page) -> dict[int, RoleGroup]:
    return {inst.id: ROLE_OF_CATEGORY[inst.category] for inst in page.instances}


def associate_captions(page: Page, order: Optional[Sequence[int]] = None) -> list[tuple[int, int]]:
    """Pair each Caption with its closest Table or Picture.

    Closeness is the gap between the nearest edges of the two boxes; equal
    gaps go to the container that comes first in reading order.
    """
    if order is None:
        from .reading_order import reading_order
        order = reading_order(page)
    rank = {iid: k for k, iid in enumerate(order)}
    containers = [i for i in page.instances if i.category in CONTAINERS]
    pairs = []
    for cap in page.instances:
        if cap.category is not Category.CAPTION or not containers:
            continue
        best = min(containers, key=lambda c: (gap_distance(cap.bbox, c.bbox), rank.get(c.id, len(rank)), c.id))
        pairs.append((cap.id, best.id))
    pairs.sort(key=lambda p: rank.get(p[0], len(rank)))
    return pairs


def build_hierarchy(page: Page, order: Sequence[int],
                    captions: Optional[list[tuple[int, int]]] = None) -> HierarchyForest:
    """Flat section forest: every Section-header is a root and owns the content that follows it.

    Tables and Pictures join the section in force at the first reading position
    of their caption+container unit; captions hang under their container.
    """
    insts = page.instance_map()
    rank = {iid: k for k, iid in enumerate(order)}
    if captions is None:
        captions = associate_captions(page, order)
    container_of = dict(captions)

    unit_start: dict[int, int] = {}
    for cap_id, cont_id in captions:
        unit_start[cont_id] = min(unit_start.get(cont_id, rank[cont_id]), rank[cap_id])

    section_at: list[Optional[int]] = []
    current = None
    for iid in order:
        if insts[iid].category is Category.SECTION_HEADER:
            current = iid
        section_at.append(current)

    forest = HierarchyForest()
    for iid in order:
        cat = insts[iid].category
        role = ROLE_OF_CATEGORY[cat]
        if role not in (RoleGroup.STRUCTURAL, RoleGroup.NON_TEXTUAL):
            continue
        forest.nodes.append(iid)
        if cat in SECTION_CONTENT:
            section = section_at[rank[iid]]
            if section is not None:
                forest.parent_of[iid] = section
        elif cat in CONTAINERS:
            section = section_at[unit_start.get(iid, rank[iid])]
            if section is not None:
                forest.parent_of[iid] = section
        elif cat is Category.CAPTION:
            if iid in container_of:
                forest.parent_of[iid] = container_of[iid]
            else:
                section = section_at[rank[iid]]
                if section is not None:
                    forest.parent_of[iid] = section
    return forest
