"""JSON interchange format, corpus statistics and DOT/GraphML export."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .core import (
    SPATIAL_RELATIONS,
    BoundingBox,
    Category,
    LayoutInstance,
    Page,
    RelationEdge,
    RelationType,
    ValidationReport,
    validate_page,
)

log = logging.getLogger(__name__)

GT = "gt"
PRED = "pred"


class DatasetParseError(ValueError):
    """Malformed input; `location` names the file position or JSON path at fault."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


class DatasetValidationError(ValueError):
    def __init__(self, reports: list[ValidationReport]):
        self.reports = reports
        pages = ", ".join(str(r.page_id) for r in reports)
        super().__init__(f"invariant violations on page(s) {pages}")


@dataclass
class Dataset:
    pages: list[Page] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    # load-time notes such as clamped scores; not serialized
    warnings: list[str] = field(default_factory=list, compare=False)


def _clamp(value, where: str, warnings: list[str]) -> float:
    value = float(value)
    if value < 0.0 or value > 1.0:
        clamped = min(1.0, max(0.0, value))
        msg = f"{where}: score {value} clamped to {clamped}"
        warnings.append(msg)
        log.warning(msg)
        return clamped
    return value


def _number(obj, key, where):
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DatasetParseError(f"{where}.{key}", f"expected a number, got {v!r}")
    return v


def _int(obj, key, where):
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise DatasetParseError(f"{where}.{key}", f"expected an integer, got {v!r}")
    return v


def _parse_instance(raw, where, role, warnings) -> LayoutInstance:
    if not isinstance(raw, dict):
        raise DatasetParseError(where, "instance must be an object")
    iid = _int(raw, "id", where)
    try:
        category = Category.parse(raw.get("category"))
    except ValueError as exc:
        raise DatasetParseError(f"{where}.category", f"instance {iid}: {exc}") from None
    bbox = raw.get("bbox")
    if (not isinstance(bbox, list) or len(bbox) != 4
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in bbox)):
        raise DatasetParseError(f"{where}.bbox", f"instance {iid}: bbox must be [x, y, w, h]")
    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        raise DatasetParseError(f"{where}.text", f"instance {iid}: text must be a string")
    score = None
    if "score" in raw:
        if role == GT:
            raise DatasetParseError(f"{where}.score", f"instance {iid}: ground truth must not carry scores")
        score = _clamp(_number(raw, "score", where), f"{where}.score", warnings)
    elif role == PRED:
        raise DatasetParseError(f"{where}.score", f"instance {iid}: prediction needs a score")
    return LayoutInstance(iid, BoundingBox(*map(float, bbox)), category, text, score)


def _parse_relation(raw, where, role, warnings) -> RelationEdge:
    if not isinstance(raw, dict):
        raise DatasetParseError(where, "relation must be an object")
    subject = _int(raw, "subject", where)
    obj = _int(raw, "object", where)
    try:
        rel = RelationType.parse(raw.get("type"))
    except ValueError as exc:
        raise DatasetParseError(f"{where}.type", str(exc)) from None
    score = existence = None
    if "score" in raw:
        if role == GT:
            raise DatasetParseError(f"{where}.score", "ground-truth relations must not carry scores")
        score = _clamp(_number(raw, "score", where), f"{where}.score", warnings)
    elif role == PRED:
        raise DatasetParseError(f"{where}.score", "predicted relations need a score")
    if "existence" in raw:
        existence = _clamp(_number(raw, "existence", where), f"{where}.existence", warnings)
    return RelationEdge(subject, obj, rel, score, existence)


def page_from_dict(raw, where="pages[0]", role: Optional[str] = None, warnings=None) -> Page:
    warnings = [] if warnings is None else warnings
    if not isinstance(raw, dict):
        raise DatasetParseError(where, "page must be an object")
    pid = _int(raw, "id", where)
    width = float(_number(raw, "width", where))
    height = float(_number(raw, "height", where))
    insts = raw.get("instances", [])
    rels = raw.get("relations", [])
    if not isinstance(insts, list):
        raise DatasetParseError(f"{where}.instances", "expected a list")
    if not isinstance(rels, list):
        raise DatasetParseError(f"{where}.relations", "expected a list")
    instances = [_parse_instance(r, f"{where}.instances[{k}]", role, warnings) for k, r in enumerate(insts)]
    relations = [_parse_relation(r, f"{where}.relations[{k}]", role, warnings) for k, r in enumerate(rels)]
    return Page(pid, width, height, instances, relations)


def dataset_from_dict(raw, source="<data>", role: Optional[str] = None) -> Dataset:
    if not isinstance(raw, dict) or not isinstance(raw.get("pages"), list):
        raise DatasetParseError(source, 'top level must be an object with a "pages" list')
    metadata = raw.get("metadata", {})
    if not isinstance(metadata, dict):
        raise DatasetParseError(f"{source}:metadata", "expected an object")
    warnings: list[str] = []
    pages = [page_from_dict(p, f"{source}:pages[{k}]", role, warnings) for k, p in enumerate(raw["pages"])]
    seen = Counter(p.id for p in pages)
    dup = sorted(pid for pid, n in seen.items() if n > 1)
    if dup:
        raise DatasetParseError(source, f"duplicate page id(s) {dup}")
    return Dataset(pages, dict(metadata), warnings)


def load_dataset(path, role: Optional[str] = None, validate: bool = True) -> Dataset:
    """Read a dataset file; with `validate`, every page must satisfy the page invariants."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DatasetParseError(f"{path}:byte {exc.start}", "not valid UTF-8") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetParseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    dataset = dataset_from_dict(raw, str(path), role)
    if validate:
        reports = (validate_page(p, allow_overlap=role == PRED) for p in dataset.pages)
        bad = [r for r in reports if not r.ok]
        if bad:
            raise DatasetValidationError(bad)
    return dataset


def _opt(d: dict, key: str, value) -> None:
    if value is not None:
        d[key] = value


def page_to_dict(page: Page) -> dict:
    instances = []
    for inst in page.instances:
        d = {"id": inst.id, "category": inst.category.value, "bbox": inst.bbox.as_list()}
        _opt(d, "text", inst.text)
        _opt(d, "score", inst.score)
        instances.append(d)
    relations = []
    for e in page.relations:
        d = {"subject": e.subject, "object": e.object, "type": e.rel.value}
        _opt(d, "score", e.score)
        _opt(d, "existence", e.existence)
        relations.append(d)
    return {"id": page.id, "width": page.width, "height": page.height,
            "instances": instances, "relations": relations}


def dataset_to_dict(dataset: Dataset) -> dict:
    return {"pages": [page_to_dict(p) for p in dataset.pages], "metadata": dataset.metadata}


def dumps_dataset(dataset: Dataset) -> str:
    return json.dumps(dataset_to_dict(dataset), ensure_ascii=False, indent=1) + "\n"


def save_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(dataset), encoding="utf-8")


@dataclass
class StatsReport:
    total_relations: int = 0
    per_type: dict[str, int] = field(default_factory=dict)
    per_pair: dict[tuple[str, str, str], int] = field(default_factory=dict)
    spatial_share: float = 0.0
    logical_share: float = 0.0
    instances_per_category: dict[str, int] = field(default_factory=dict)
    pages: int = 0

    def to_dict(self) -> dict:
        return {
            "pages": self.pages,
            "total_relations": self.total_relations,
            "spatial_share": self.spatial_share,
            "logical_share": self.logical_share,
            "per_type": self.per_type,
            "instances_per_category": self.instances_per_category,
            "per_pair": [{"subject": s, "object": o, "type": t, "count": n}
                         for (s, o, t), n in sorted(self.per_pair.items())],
        }

    def to_text(self) -> str:
        lines = [f"pages            {self.pages}",
                 f"total relations  {self.total_relations}",
                 f"spatial share    {self.spatial_share:.4f}",
                 f"logical share    {self.logical_share:.4f}",
                 "",
                 f"{'relation':<12}{'count':>10}"]
        lines += [f"{k:<12}{v:>10}" for k, v in self.per_type.items()]
        lines += ["", f"{'category':<16}{'instances':>10}"]
        lines += [f"{k:<16}{v:>10}" for k, v in self.instances_per_category.items()]
        if self.per_pair:
            lines += ["", f"{'subject':<16}{'object':<16}{'relation':<12}{'count':>8}"]
            lines += [f"{s:<16}{o:<16}{t:<12}{n:>8}" for (s, o, t), n in sorted(self.per_pair.items())]
        return "\n".join(lines) + "\n"


def compute_stats(dataset: Dataset) -> StatsReport:
    per_type = Counter()
    per_pair = Counter()
    per_cat = Counter()
    for page in dataset.pages:
        cats = {i.id: i.category.value for i in page.instances}
        per_cat.update(cats.values())
        for e in page.relations:
            per_type[e.rel] += 1
            per_pair[(cats.get(e.subject, "?"), cats.get(e.object, "?"), e.rel.value)] += 1
    total = sum(per_type.values())
    spatial = sum(per_type[r] for r in SPATIAL_RELATIONS)
    return StatsReport(
        total_relations=total,
        per_type={r.value: per_type[r] for r in RelationType},
        per_pair=dict(per_pair),
        spatial_share=spatial / total if total else 0.0,
        logical_share=(total - spatial) / total if total else 0.0,
        instances_per_category={c.value: per_cat[c.value] for c in Category},
        pages=len(dataset.pages),
    )


SPATIAL = "spatial"
LOGICAL = "logical"


def parse_type_filter(spec: Optional[str]) -> Optional[set[RelationType]]:
    """'spatial', 'logical', or a comma list of relation names; None keeps everything."""
    if spec is None or spec == "all":
        return None
    types = set()
    for part in spec.split(","):
        part = part.strip()
        if part == SPATIAL:
            types |= {r for r in RelationType if r.is_spatial}
        elif part == LOGICAL:
            types |= {r for r in RelationType if r.is_logical}
        else:
            types.add(RelationType.parse(part))
    return types


def _kept(page: Page, types: Optional[Iterable[RelationType]]) -> list[RelationEdge]:
    if types is None:
        return list(page.relations)
    types = set(types)
    return [e for e in page.relations if e.rel in types]


def _node_label(inst: LayoutInstance) -> str:
    return f"{inst.category.value}#{inst.id}"


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(page: Page, types: Optional[Iterable[RelationType]] = None) -> str:
    lines = [f"digraph page_{page.id} {{"]
    for inst in page.instances:
        lines.append(f"  n{inst.id} [label={_dot_quote(_node_label(inst))}];")
    for e in _kept(page, types):
        attrs = f"label={_dot_quote(e.rel.value)}"
        if e.score is not None:
            attrs += f", score={e.score!r}"
        lines.append(f"  n{e.subject} -> n{e.object} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graphml(page: Page, types: Optional[Iterable[RelationType]] = None) -> str:
    import networkx as nx

    g = nx.MultiDiGraph(name=f"page_{page.id}")
    for inst in page.instances:
        g.add_node(f"n{inst.id}", label=_node_label(inst))
    for e in _kept(page, types):
        attrs = {"label": e.rel.value}
        if e.score is not None:
            attrs["score"] = e.score
        g.add_edge(f"n{e.subject}", f"n{e.object}", key=e.rel.value, **attrs)
    return "\n".join(nx.generate_graphml(g)) + "\n"
