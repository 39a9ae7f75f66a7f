"""Domain types for layout relation graphs and the box geometry they rest on.

Coordinates are floating-point page pixels with the origin at the top-left
corner and y growing downward. Boxes are stored as (x, y, w, h).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional


class Category(str, Enum):
    CAPTION = "Caption"
    FOOTNOTE = "Footnote"
    FORMULA = "Formula"
    LIST_ITEM = "List-item"
    PAGE_FOOTER = "Page-footer"
    PAGE_HEADER = "Page-header"
    PICTURE = "Picture"
    SECTION_HEADER = "Section-header"
    TABLE = "Table"
    TEXT = "Text"
    TITLE = "Title"

    @classmethod
    def parse(cls, label: str) -> "Category":
        try:
            return cls(label)
        except ValueError:
            raise ValueError(f"unknown category {label!r}") from None


class RelationType(str, Enum):
    UP = "Up"
    DOWN = "Down"
    LEFT = "Left"
    RIGHT = "Right"
    PARENT = "Parent"
    CHILD = "Child"
    SEQUENCE = "Sequence"
    REFERENCE = "Reference"

    @property
    def is_spatial(self) -> bool:
        return self in SPATIAL_RELATIONS

    @property
    def is_logical(self) -> bool:
        return self in LOGICAL_RELATIONS

    @classmethod
    def parse(cls, label: str) -> "RelationType":
        try:
            return cls(label)
        except ValueError:
            raise ValueError(f"unknown relation type {label!r}") from None


SPATIAL_RELATIONS = (RelationType.UP, RelationType.DOWN, RelationType.LEFT, RelationType.RIGHT)
LOGICAL_RELATIONS = (
    RelationType.PARENT,
    RelationType.CHILD,
    RelationType.SEQUENCE,
    RelationType.REFERENCE,
)


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def shifted(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two axis-aligned boxes."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def gap_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between the closest edges of two boxes (0 if they touch)."""
    dx = max(0.0, b.x - a.x2, a.x - b.x2)
    dy = max(0.0, b.y - a.y2, a.y - b.y2)
    return (dx * dx + dy * dy) ** 0.5


@dataclass(frozen=True)
class LayoutInstance:
    id: int
    bbox: BoundingBox
    category: Category
    text: Optional[str] = None
    score: Optional[float] = None


@dataclass(frozen=True)
class RelationEdge:
    subject: int
    object: int
    rel: RelationType
    score: Optional[float] = None
    # auxiliary existence probability carried by prediction files
    existence: Optional[float] = None

    @property
    def triplet(self) -> tuple[int, RelationType, int]:
        return (self.subject, self.rel, self.object)


@dataclass(frozen=True)
class Page:
    id: int
    width: float
    height: float
    instances: tuple[LayoutInstance, ...] = ()
    relations: tuple[RelationEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "relations", tuple(self.relations))

    def instance_map(self) -> dict[int, LayoutInstance]:
        return {inst.id: inst for inst in self.instances}

    def with_relations(self, relations: Iterable[RelationEdge]) -> "Page":
        return replace(self, relations=tuple(relations))

    def stripped(self) -> "Page":
        return replace(self, relations=())


# A page whose (V, E) view is the unit handed to evaluation and export.
DocumentGraph = Page


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple = ()
    message: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ids": list(self.ids), "message": self.message}


@dataclass
class ValidationReport:
    page_id: Optional[int] = None
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, ids=(), message: str = "") -> None:
        self.violations.append(Violation(kind, tuple(ids), message))

    def to_dict(self) -> dict:
        return {"page": self.page_id, "violations": [v.to_dict() for v in self.violations]}


class PageValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        kinds = ", ".join(sorted(report.kinds()))
        super().__init__(f"page {report.page_id} failed validation: {kinds}")


def _find_overlaps(instances: tuple[LayoutInstance, ...]) -> list[tuple[int, int]]:
    # sweep over x so only boxes with intersecting x-intervals are compared
    order = sorted(instances, key=lambda inst: (inst.bbox.x, inst.id))
    active: list[LayoutInstance] = []
    pairs = []
    for inst in order:
        active = [a for a in active if a.bbox.x2 > inst.bbox.x]
        for other in active:
            if intersection_area(other.bbox, inst.bbox) > 0:
                pairs.append(tuple(sorted((other.id, inst.id))))
        active.append(inst)
    return sorted(pairs)


def validate_page(page: Page, allow_overlap: bool = False) -> ValidationReport:
    """Collect every invariant the page breaks; the page itself is left untouched.

    Detector output routinely overlaps, so prediction pages pass allow_overlap.
    """
    report = ValidationReport(page_id=page.id)
    if not (page.width > 0 and page.height > 0):
        report.add("page_size", (page.id,), f"page size {page.width}x{page.height} is not positive")

    id_counts = Counter(inst.id for inst in page.instances)
    for iid, n in sorted(id_counts.items()):
        if n > 1:
            report.add("duplicate_instance_id", (iid,), f"instance id {iid} used {n} times")
        if iid < 0:
            report.add("negative_instance_id", (iid,), f"instance id {iid} is negative")

    for inst in page.instances:
        b = inst.bbox
        if not (b.w > 0 and b.h > 0):
            report.add("degenerate_box", (inst.id,), f"box {b.as_list()} has non-positive size")
        elif b.x < 0 or b.y < 0 or b.x2 > page.width or b.y2 > page.height:
            report.add("out_of_page", (inst.id,), f"box {b.as_list()} leaves the page")
        if inst.score is not None and not 0.0 <= inst.score <= 1.0:
            report.add("score_range", (inst.id,), f"score {inst.score} outside [0, 1]")

    scored = [inst.score is not None for inst in page.instances]
    if any(scored) and not all(scored):
        unscored = tuple(inst.id for inst in page.instances if inst.score is None)
        report.add("mixed_scores", unscored, "some instances carry a score and others do not")

    for a, b in ([] if allow_overlap else _find_overlaps(page.instances)):
        report.add("overlap", (a, b), f"instances {a} and {b} overlap")

    known = set(id_counts)
    seen = set()
    for edge in page.relations:
        missing = [i for i in (edge.subject, edge.object) if i not in known]
        if missing:
            report.add("dangling_endpoint", (edge.subject, edge.object),
                       f"{edge.rel.value} edge references unknown id(s) {missing}")
        if edge.subject == edge.object:
            report.add("self_loop", (edge.subject,), f"{edge.rel.value} edge points at itself")
        if edge.triplet in seen:
            report.add("duplicate_relation", (edge.subject, edge.object),
                       f"duplicate {edge.rel.value} edge")
        seen.add(edge.triplet)
        for name in ("score", "existence"):
            value = getattr(edge, name)
            if value is not None and not 0.0 <= value <= 1.0:
                report.add("score_range", (edge.subject, edge.object), f"{name} {value} outside [0, 1]")
    return report
