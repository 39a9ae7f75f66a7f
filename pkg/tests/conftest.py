import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from docgraph.core import BoundingBox, Category, LayoutInstance, Page, intersection_area

sys.path.insert(0, str(Path(__file__).parent))

C = Category


def mkpage(*specs, width=1000, height=1000, page_id=0):
    """specs: (category, x, y, w, h[, text]); ids follow argument order."""
    insts = []
    for k, spec in enumerate(specs):
        cat, x, y, w, h, *rest = spec
        insts.append(LayoutInstance(k, BoundingBox(x, y, w, h), cat, rest[0] if rest else None))
    return Page(page_id, width, height, insts)


def _inst(iid, x, y, w, h, cat, score=None):
    return LayoutInstance(iid, BoundingBox(x, y, w, h), cat, None, score)


def random_match_pair(rng, n_max=20):
    """A gt page and a noisy scored prediction on a 100x100 canvas; overlaps allowed."""
    cats = [Category.TEXT, Category.TABLE, Category.PICTURE]
    gts = []
    for k in range(rng.randint(0, n_max)):
        gts.append(_inst(k, rng.randint(0, 80), rng.randint(0, 80), rng.randint(5, 20), rng.randint(5, 20),
                         rng.choice(cats)))
    preds = []
    for k in range(rng.randint(0, n_max)):
        if gts and rng.random() < 0.7:
            g = rng.choice(gts).bbox
            b = (g.x + rng.randint(-3, 3), g.y + rng.randint(-3, 3), g.w + rng.randint(-2, 2), g.h)
        else:
            b = (rng.randint(0, 80), rng.randint(0, 80), rng.randint(5, 20), rng.randint(5, 20))
        preds.append(_inst(100 + k, *b, rng.choice(cats), score=rng.choice([0.3, 0.5, 0.7, 0.9])))
    return Page(0, 100, 100, gts), Page(0, 100, 100, preds)


@st.composite
def layouts(draw, max_boxes=12, size=200):
    """Non-overlapping integer-grid pages."""
    n = draw(st.integers(0, max_boxes))
    boxes = []
    for _ in range(n):
        w = draw(st.integers(1, size // 2))
        h = draw(st.integers(1, size // 2))
        x = draw(st.integers(0, size - w))
        y = draw(st.integers(0, size - h))
        b = BoundingBox(x, y, w, h)
        if all(intersection_area(b, o) == 0 for o in boxes):
            boxes.append(b)
    cats = draw(st.lists(st.sampled_from(list(Category)), min_size=len(boxes), max_size=len(boxes)))
    insts = [LayoutInstance(k, b, c) for k, (b, c) in enumerate(zip(boxes, cats))]
    return Page(0, float(size), float(size), insts)


@pytest.fixture
def pinwheel():
    # four mutually blocking boxes around a hole; no full-width or full-height gap
    return mkpage(
        (C.TEXT, 0, 0, 60, 20),
        (C.TEXT, 60, 0, 20, 60),
        (C.TEXT, 20, 60, 60, 20),
        (C.TEXT, 0, 20, 20, 60),
        width=80, height=80,
    )


# acceptance summary: one line per criterion, printed after the run

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
