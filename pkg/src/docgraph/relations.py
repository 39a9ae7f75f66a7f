"""Logical edges (Parent/Child/Sequence/Reference) and the full annotation pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core import (
    Category,
    DocumentGraph,
    Page,
    PageValidationError,
    RelationEdge,
    RelationType,
    validate_page,
)
from .hierarchy import (
    ROLE_OF_CATEGORY,
    HierarchyForest,
    RoleGroup,
    associate_captions,
    build_hierarchy,
)
from .reading_order import reading_order
from .spatial import extract_spatial

TABLE_REF = "TableRef"
FIGURE_REF = "FigureRef"
FOOTNOTE_REF = "FootnoteRef"
PATTERN_KINDS = (TABLE_REF, FIGURE_REF, FOOTNOTE_REF)

TARGET_CATEGORY = {TABLE_REF: Category.TABLE, FIGURE_REF: Category.PICTURE}

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")

# leading marker of a Footnote's own text
FOOTNOTE_LEAD = re.compile(r"^\s*([⁰¹²³⁴⁵⁶⁷⁸⁹]+|\d{1,3}|[*†‡]+)")


@dataclass(frozen=True)
class ReferencePattern:
    kind: str
    matcher: str
    group: int = 1

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown reference pattern kind {self.kind!r}")

    def compile(self) -> re.Pattern:
        return re.compile(self.matcher, re.IGNORECASE)


DEFAULT_PATTERNS = (
    ReferencePattern(TABLE_REF, r"\bTable\s*(\d+)"),
    ReferencePattern(TABLE_REF, r"\bTab\.\s*(\d+)"),
    ReferencePattern(FIGURE_REF, r"\bFigure\s*(\d+)"),
    ReferencePattern(FIGURE_REF, r"\bFig\.\s*(\d+)"),
    # superscript digits anywhere, or a short number / dagger glued to the end of a word
    ReferencePattern(FOOTNOTE_REF, r"([⁰¹²³⁴⁵⁶⁷⁸⁹]+)"),
    ReferencePattern(FOOTNOTE_REF, r"(?<=[A-Za-z\)\]\.,;:])(\d{1,2}|[*†‡]+)(?![\w*†‡])"),
)


def load_patterns(path) -> list[ReferencePattern]:
    """Read one `kind<TAB>pattern` per line; blank lines and '#' comments are skipped."""
    patterns = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        kind, sep, pattern = line.partition("\t")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'kind<TAB>pattern'")
        try:
            rp = ReferencePattern(kind.strip(), pattern)
            if rp.compile().groups < 1:
                raise ValueError("pattern needs a capture group for the marker")
        except (ValueError, re.error) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        patterns.append(rp)
    if not patterns:
        raise ValueError(f"{path}: no patterns defined")
    return patterns


def _normalize_marker(token: str) -> str:
    token = token.strip().translate(_SUPERSCRIPTS)
    return str(int(token)) if token.isdigit() else token


def _find_markers(text: str, compiled) -> list[tuple[str, str]]:
    """(kind, marker) hits in text order; a span consumed by a Table/Figure hit is not reused."""
    hits = []
    taken: list[tuple[int, int]] = []
    ordered = sorted(compiled, key=lambda kp: kp[0] == FOOTNOTE_REF)
    for kind, group, rx in ordered:
        for m in rx.finditer(text):
            start, end = m.span(group)
            if start < 0 or any(start < e and s < end for s, e in taken):
                continue
            marker = _normalize_marker(m.group(group))
            if kind != FOOTNOTE_REF:
                if not marker.isdigit() or int(marker) < 1:
                    continue
                taken.append(m.span())
            hits.append((m.start(), kind, marker))
    hits.sort()
    return [(kind, marker) for _, kind, marker in hits]


def emit_parent_child(forest: HierarchyForest) -> list[RelationEdge]:
    edges = []
    for child in forest.nodes:
        parent = forest.parent_of.get(child)
        if parent is None:
            continue
        edges.append(RelationEdge(parent, child, RelationType.PARENT))
        edges.append(RelationEdge(child, parent, RelationType.CHILD))
    return edges


def emit_sequence(forest: HierarchyForest, order: Sequence[int]) -> list[RelationEdge]:
    """Chain consecutive siblings (root set included) in reading order."""
    rank = {iid: k for k, iid in enumerate(order)}
    edges = []
    for group in forest.sibling_groups():
        group = sorted(group, key=rank.__getitem__)
        edges.extend(RelationEdge(a, b, RelationType.SEQUENCE) for a, b in zip(group, group[1:]))
    return edges


def emit_references(page: Page, captions: list[tuple[int, int]], order: Sequence[int],
                    patterns: Sequence[ReferencePattern] = DEFAULT_PATTERNS) -> list[RelationEdge]:
    """Link textual mentions to the Table, Picture or Footnote they cite.

    A "Table n"/"Figure n" mention resolves first to the container whose caption
    is labelled with the same marker, otherwise to the n-th container of that kind
    in reading order. Footnote markers resolve to the Footnote whose text starts
    with the same marker. Captions are never targets and a caption does not cite
    its own container.
    """
    if not patterns:
        raise ValueError("at least one reference pattern is required")
    compiled = [(p.kind, p.group, p.compile()) for p in patterns]
    insts = page.instance_map()
    rank = {iid: k for k, iid in enumerate(order)}
    in_order = [insts[i] for i in order]
    container_of = dict(captions)

    label_of: dict[int, tuple[str, str]] = {}
    for cap_id, cont_id in captions:
        text = insts[cap_id].text or ""
        kind = TABLE_REF if insts[cont_id].category is Category.TABLE else FIGURE_REF
        own = _find_markers(text, [c for c in compiled if c[0] == kind])
        # the first marker a caption carries names its container; later ones are citations
        if own and cont_id not in label_of:
            label_of[cont_id] = own[0]

    by_kind = {k: [i.id for i in in_order if i.category is cat] for k, cat in TARGET_CATEGORY.items()}
    footnotes: dict[str, int] = {}
    for inst in in_order:
        if inst.category is Category.FOOTNOTE and inst.text:
            m = FOOTNOTE_LEAD.match(inst.text)
            if m:
                footnotes.setdefault(_normalize_marker(m.group(1)), inst.id)

    edges = []
    seen = set()
    for inst in in_order:
        if not inst.text:
            continue
        if ROLE_OF_CATEGORY[inst.category] not in (RoleGroup.STRUCTURAL, RoleGroup.NON_TEXTUAL):
            continue
        for kind, marker in _find_markers(inst.text, compiled):
            if kind == FOOTNOTE_REF:
                target = footnotes.get(marker)
            else:
                target = next((c for c in by_kind[kind] if label_of.get(c) == (kind, marker)), None)
                if target is None:
                    n = int(marker)
                    target = by_kind[kind][n - 1] if n <= len(by_kind[kind]) else None
            if target is None or target == inst.id or target == container_of.get(inst.id):
                continue
            if insts[target].category is Category.CAPTION:
                continue
            if (inst.id, target) not in seen:
                seen.add((inst.id, target))
                edges.append(RelationEdge(inst.id, target, RelationType.REFERENCE))
    edges.sort(key=lambda e: (rank[e.subject], rank[e.object]))
    return edges


@dataclass
class AnnotateConfig:
    min_gap: float = 0.0
    patterns: Sequence[ReferencePattern] = field(default_factory=lambda: list(DEFAULT_PATTERNS))
    spatial: bool = True
    logical: bool = True


def annotate(page: Page, config: Optional[AnnotateConfig] = None) -> DocumentGraph:
    """Run the rule-based pipeline and return the page carrying the union of all edges.

    Existing relations on the input page are ignored. Raises PageValidationError
    when the page breaks an invariant.
    """
    config = config or AnnotateConfig()
    page = page.stripped()
    report = validate_page(page)
    if not report.ok:
        raise PageValidationError(report)

    edges: list[RelationEdge] = []
    if config.spatial:
        edges += extract_spatial(page, check=False)
    if config.logical:
        order = reading_order(page, config.min_gap)
        captions = associate_captions(page, order)
        forest = build_hierarchy(page, order, captions)
        edges += emit_parent_child(forest)
        edges += emit_sequence(forest, order)
        edges += emit_references(page, captions, order, config.patterns)

    unique = list(dict.fromkeys(edges))
    return page.with_relations(unique)
