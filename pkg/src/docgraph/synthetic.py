"""Random document pages for property tests and benchmarks.

Boxes live on an integer grid so geometry comparisons are exact. Half of the
pages come from recursive guillotine splits (always Manhattan); the rest are
placed by rejection sampling and are frequently non-Manhattan.
"""

from __future__ import annotations

import random
from typing import Optional

from .core import BoundingBox, Category, LayoutInstance, Page, RelationEdge, RelationType, intersection_area

PAGE_W = 1000
PAGE_H = 1400

_WEIGHTS = {
    Category.TEXT: 30,
    Category.SECTION_HEADER: 10,
    Category.LIST_ITEM: 8,
    Category.FORMULA: 4,
    Category.TABLE: 6,
    Category.PICTURE: 6,
    Category.CAPTION: 8,
    Category.FOOTNOTE: 4,
    Category.PAGE_HEADER: 2,
    Category.PAGE_FOOTER: 2,
    Category.TITLE: 2,
}

_WORDS = "the layout of this page shows results for each method and the data we report".split()


def _text(rng: random.Random, category: Category, counters: dict) -> Optional[str]:
    if category in (Category.TABLE, Category.PICTURE):
        return None
    body = " ".join(rng.choice(_WORDS) for _ in range(rng.randint(3, 10)))
    if category is Category.CAPTION:
        kind = rng.choice(["Table", "Figure"])
        counters[kind] = counters.get(kind, 0) + 1
        return f"{kind} {counters[kind]}: {body}"
    if category is Category.FOOTNOTE:
        counters["fn"] = counters.get("fn", 0) + 1
        return f"{counters['fn']} {body}"
    roll = rng.random()
    if roll < 0.15:
        body += f" (see Table {rng.randint(1, 3)})"
    elif roll < 0.30:
        body += f" as in Fig. {rng.randint(1, 3)}"
    elif roll < 0.40:
        body += f" noted.{rng.randint(1, 3)}"
    return body


def _guillotine(rng: random.Random, region, n: int, out: list, margin: int) -> None:
    x, y, w, h = region
    if n <= 1 or w < 4 * margin or h < 4 * margin:
        if w > 2 * margin and h > 2 * margin:
            out.append((x + margin, y + margin, w - 2 * margin, h - 2 * margin))
        return
    horizontal = rng.random() < (0.7 if h >= w else 0.3)
    k = rng.randint(1, n - 1)
    if horizontal:
        cut = max(2 * margin, min(h - 2 * margin, round(h * k / n)))
        _guillotine(rng, (x, y, w, cut), k, out, margin)
        _guillotine(rng, (x, y + cut, w, h - cut), n - k, out, margin)
    else:
        cut = max(2 * margin, min(w - 2 * margin, round(w * k / n)))
        _guillotine(rng, (x, y, cut, h), k, out, margin)
        _guillotine(rng, (x + cut, y, w - cut, h), n - k, out, margin)


def _scatter(rng: random.Random, n: int, width: int, height: int) -> list:
    boxes: list[BoundingBox] = []
    for _ in range(n * 20):
        if len(boxes) >= n:
            break
        w = rng.randint(20, width // 2)
        h = rng.randint(10, height // 6)
        b = BoundingBox(rng.randint(0, width - w), rng.randint(0, height - h), w, h)
        if all(intersection_area(b, o) == 0 for o in boxes):
            boxes.append(b)
    return [(b.x, b.y, b.w, b.h) for b in boxes]


def random_page(rng: random.Random, page_id: int = 0, max_boxes: int = 50,
                manhattan: Optional[bool] = None, width: int = PAGE_W, height: int = PAGE_H) -> Page:
    n = rng.randint(0, max_boxes)
    if manhattan is None:
        manhattan = rng.random() < 0.5
    if manhattan:
        rects: list = []
        _guillotine(rng, (0, 0, width, height), n, rects, margin=rng.choice([0, 1, 2, 3]))
    else:
        rects = _scatter(rng, n, width, height)
    cats = list(_WEIGHTS)
    weights = list(_WEIGHTS.values())
    counters: dict = {}
    instances = []
    for k, (x, y, w, h) in enumerate(rects):
        cat = rng.choices(cats, weights)[0]
        instances.append(LayoutInstance(k, BoundingBox(float(x), float(y), float(w), float(h)),
                                        cat, _text(rng, cat, counters)))
    return Page(page_id, float(width), float(height), instances)


def random_pages(seed: int, count: int, max_boxes: int = 50) -> list[Page]:
    rng = random.Random(seed)
    return [random_page(rng, page_id=k, max_boxes=max_boxes) for k in range(count)]


def jitter_prediction(rng: random.Random, gt: Page, drop: float = 0.1, noise: float = 4.0,
                      relabel: float = 0.05, spurious_edges: int = 5) -> Page:
    """A fake detector/relation-predictor output derived from an annotated page."""
    instances = []
    id_map = {}
    for inst in gt.instances:
        if rng.random() < drop:
            continue
        b = inst.bbox
        nx = min(max(0.0, b.x + rng.uniform(-noise, noise)), gt.width - 1)
        ny = min(max(0.0, b.y + rng.uniform(-noise, noise)), gt.height - 1)
        nw = min(max(1.0, b.w + rng.uniform(-noise, noise)), gt.width - nx)
        nh = min(max(1.0, b.h + rng.uniform(-noise, noise)), gt.height - ny)
        cat = inst.category
        if rng.random() < relabel:
            cat = rng.choice(list(Category))
        new_id = 1000 + inst.id
        id_map[inst.id] = new_id
        instances.append(LayoutInstance(new_id, BoundingBox(nx, ny, nw, nh), cat, inst.text,
                                        round(rng.uniform(0.3, 1.0), 3)))
    edges = {}
    for e in gt.relations:
        if e.subject in id_map and e.object in id_map and rng.random() > drop:
            edges[(id_map[e.subject], e.rel, id_map[e.object])] = round(rng.uniform(0.2, 1.0), 3)
    ids = list(id_map.values())
    if len(ids) >= 2:
        for _ in range(spurious_edges):
            s, o = rng.sample(ids, 2)
            edges.setdefault((s, rng.choice(list(RelationType)), o), round(rng.uniform(0.0, 1.0), 3))
    relations = [RelationEdge(s, o, r, score) for (s, r, o), score in edges.items()]
    return Page(gt.id, gt.width, gt.height, instances, relations)
