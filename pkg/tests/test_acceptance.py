"""Acceptance suite: one test per criterion, each recorded as a PASS/FAIL/SKIP line.

The lines are printed at the end of the pytest run (and immediately with ``-s``).
Criterion 9 needs real data: point DOCGRAPH_CORPUS at a dataset file or a
directory of them.
"""

import json
import os
import random
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_match_pair
from docgraph.cli import run
from docgraph.core import BoundingBox, Category, LayoutInstance, Page, RelationEdge, RelationType
from docgraph.dataset_io import PRED, Dataset, compute_stats, dumps_dataset, load_dataset, save_dataset
from docgraph.evaluation import (
    InstanceMapping,
    ScoredTriplet,
    dla_map,
    evaluate,
    filter_relations,
    fuse_auxiliary,
    match_instances,
    mean_ap_g,
    mean_recall_g,
)
from docgraph.reading_order import reading_order, xy_cut
from docgraph.relations import annotate
from docgraph.spatial import LayoutClass, classify_layout, extract_spatial
from docgraph.synthetic import jitter_prediction, random_pages
from oracles import brute_force_spatial, exhaustive_ap, naive_algorithm1

R = RelationType
C = Category

CORPUS_ENV = "DOCGRAPH_CORPUS"
REFERENCE_TOTAL = 4.13e6
REFERENCE_SPATIAL_SHARE = 0.6406


@contextmanager
def criterion(number, title):
    note = {}
    try:
        yield note
    except pytest.skip.Exception as exc:
        _record("SKIP", number, title, str(exc.msg))
        raise
    except BaseException as exc:
        _record("FAIL", number, title, note.get("detail") or type(exc).__name__)
        raise
    else:
        _record("PASS", number, title, note.get("detail", ""))


def _record(status, number, title, detail):
    line = f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def corpus():
    return random_pages(seed=2024, count=1000, max_boxes=50)


@pytest.fixture(scope="module")
def annotated(corpus):
    return [annotate(p) for p in corpus]


def as_prediction(page, score=1.0):
    return replace(page, instances=[replace(i, score=score) for i in page.instances],
                   relations=[replace(e, score=score) for e in page.relations])


def test_c1_spatial_oracle(corpus):
    with criterion(1, "spatial extraction equals brute-force oracle on 1000 pages") as note:
        assert max(len(p.instances) for p in corpus) <= 50
        elapsed = 0.0
        mismatches = 0
        for page in corpus:
            t0 = time.perf_counter()
            edges = extract_spatial(page)
            elapsed += time.perf_counter() - t0
            got = {(e.subject, e.rel.value, e.object) for e in edges}
            mismatches += len(got ^ brute_force_spatial(page))
        note["detail"] = f"{mismatches} mismatches, {elapsed:.2f}s"
        assert mismatches == 0
        assert elapsed < 10.0


def test_c2_reading_order(corpus):
    with criterion(2, "reading order is a permutation; Manhattan pages keep contiguity and above-ordering") as note:
        bad_perm = bad_contig = bad_above = 0
        manhattan = 0
        for page in corpus:
            tree = xy_cut(page)
            order = reading_order(page, tree=tree)
            if sorted(order) != sorted(i.id for i in page.instances):
                bad_perm += 1
                continue
            if classify_layout(page) is not LayoutClass.MANHATTAN:
                continue
            manhattan += 1
            pos = {iid: k for k, iid in enumerate(order)}
            for node in tree.nodes():
                ranks = sorted(pos[i] for i in node.ids())
                if ranks and ranks[-1] - ranks[0] + 1 != len(ranks):
                    bad_contig += 1
            for a in page.instances:
                for b in page.instances:
                    x_ov = min(a.bbox.x2, b.bbox.x2) - max(a.bbox.x, b.bbox.x)
                    if a.bbox.y2 <= b.bbox.y and x_ov > 0 and pos[a.id] > pos[b.id]:
                        bad_above += 1
        note["detail"] = (f"{manhattan} Manhattan pages; violations: permutation {bad_perm}, "
                          f"contiguity {bad_contig}, above {bad_above}")
        assert manhattan > 0
        assert bad_perm == bad_contig == bad_above == 0


def logical_violations(graph):
    cats = {i.id: i.category for i in graph.instances}
    out = []
    logical = [e for e in graph.relations if e.rel.is_logical]
    parents = {(e.subject, e.object) for e in logical if e.rel is R.PARENT}
    children = {(e.object, e.subject) for e in logical if e.rel is R.CHILD}
    out += [("duality", pair) for pair in parents ^ children]

    seq = [(e.subject, e.object) for e in logical if e.rel is R.SEQUENCE]
    outs = Counter(s for s, _ in seq)
    ins = Counter(o for _, o in seq)
    out += [("sequence_branch", n) for n in sorted(set(outs) | set(ins)) if outs[n] > 1 or ins[n] > 1]
    nxt = dict(seq)
    for start in nxt:
        seen, node = {start}, start
        while node in nxt:
            node = nxt[node]
            if node in seen:
                out.append(("sequence_cycle", start))
                break
            seen.add(node)

    unassociated = {C.PAGE_HEADER, C.PAGE_FOOTER, C.TITLE}
    for e in logical:
        s, o = cats[e.subject], cats[e.object]
        if s in unassociated or o in unassociated or s is C.FOOTNOTE:
            out.append(("role", e.triplet))
        elif o is C.FOOTNOTE and e.rel is not R.REFERENCE:
            out.append(("footnote_non_reference", e.triplet))
    return out


def test_c3_logical_structure(annotated):
    with criterion(3, "logical edges: Parent/Child duality, Sequence paths, role restrictions") as note:
        violations = [v for g in annotated for v in logical_violations(g)]
        kinds = Counter(e.rel for g in annotated for e in g.relations if e.rel.is_logical)
        note["detail"] = f"{len(violations)} violations over {sum(kinds.values())} logical edges"
        assert all(kinds[r] > 0 for r in (R.PARENT, R.CHILD, R.SEQUENCE, R.REFERENCE))
        assert violations == []


def test_c4_algorithm1_fidelity():
    with criterion(4, "instance matching equals naive transliteration on 1000 pairs; strict thresholds") as note:
        rng = random.Random(4)
        mismatches = 0
        for _ in range(1000):
            gt, pred = random_match_pair(rng, n_max=20)
            t = rng.choice([0.3, 0.5, 0.75])
            if match_instances(gt, pred, t).gt_to_pred != naive_algorithm1(gt.instances, pred.instances, t):
                mismatches += 1
        # IoU exactly at the threshold, and a relation score exactly at T_R
        gt = Page(0, 100, 100, [LayoutInstance(0, BoundingBox(0, 0, 10, 10), C.TEXT)])
        half = Page(0, 100, 100, [LayoutInstance(7, BoundingBox(0, 0, 5, 10), C.TEXT, score=1.0)])
        iou_edge = match_instances(gt, half, 0.5).gt_to_pred
        mapping = InstanceMapping.from_gt_map({0: 10, 1: 11})
        at_tr = filter_relations([RelationEdge(10, 11, R.UP, 0.75)], mapping, 0.75)
        above_tr = filter_relations([RelationEdge(10, 11, R.UP, 0.7500001)], mapping, 0.75)
        note["detail"] = f"{mismatches} mismatches"
        assert mismatches == 0
        assert iou_edge == {}
        assert at_tr == [] and len(above_tr) == 1


def test_c5_fixpoints_and_hand_cases(annotated):
    with criterion(5, "perfect-prediction fixpoints and hand cases") as note:
        gts = annotated[:60]
        reports = evaluate(gts, [as_prediction(g) for g in gts], rel_thresholds=(0.5, 0.75, 0.95))
        fix = [(r.rel_threshold, r.mR_g, r.mAP_g, r.dla.map) for r in reports]
        assert [f[0] for f in fix] == [0.5, 0.75, 0.95]
        assert all(f[1:] == (1.0, 1.0, 1.0) for f in fix)

        g = {(0, 1, R.UP, 2), (0, 3, R.UP, 4)}
        x = [ScoredTriplet(1, R.UP, 2, 0.9), ScoredTriplet(5, R.UP, 6, 0.8), ScoredTriplet(3, R.UP, 4, 0.7)]
        ap = mean_ap_g(x, g).mean
        assert exhaustive_ap([True, False, True], 2) == Fraction(5, 6)
        assert abs(ap - 5 / 6) <= 1e-9

        gt = Page(0, 100, 100, [LayoutInstance(0, BoundingBox(0, 0, 10, 10), C.TEXT)])
        pred = Page(0, 100, 100, [LayoutInstance(0, BoundingBox(0, 0, 6, 10), C.TEXT, score=1.0)])
        dla = dla_map([gt], [pred]).map
        assert abs(dla - 0.3) <= 1e-9

        g = {(0, 1, R.SEQUENCE, 2), (0, 1, R.UP, 2)}
        mr = mean_recall_g([ScoredTriplet(1, R.SEQUENCE, 2)], g).mean
        assert mr == 0.5
        note["detail"] = f"mAP_g={ap!r}, DLA mAP={dla!r}, mR_g={mr!r}"


def test_c6_threshold_monotonicity(annotated):
    with criterion(6, "per-category recall non-increasing over T_R 0.5, 0.75, 0.95 on 100 prediction sets") as note:
        rng = random.Random(6)
        violations = 0
        for k in range(100):
            gts = annotated[3 * k:3 * k + 3]
            preds = [jitter_prediction(rng, g) for g in gts]
            reps = evaluate(gts, preds, rel_thresholds=(0.5, 0.75, 0.95), with_dla=False)
            for lo, hi in zip(reps, reps[1:]):
                violations += sum(v > lo.recall[name] for name, v in hi.recall.items())
        note["detail"] = f"{violations} violations"
        assert violations == 0


def test_c7_fusion_contract():
    with criterion(7, "fusion identity, annihilation and bound on 10^5 entries") as note:
        rng = np.random.default_rng(7)
        rel = rng.random((50, 50, 40))
        ex = rng.random((50, 50))
        assert rel.size == 10**5
        dev_identity = np.abs(fuse_auxiliary(rel, np.ones_like(ex)) - rel).max()
        dev_zero = np.abs(fuse_auxiliary(rel, np.zeros_like(ex))).max()
        fused = fuse_auxiliary(rel, ex)
        dev_bound = max(0.0, (fused - np.minimum(rel, ex[:, :, None])).max())
        # elementwise product recomputed one scalar at a time
        dev_product = max(abs(fused[i, j, k] - rel[i, j, k] * ex[i, j]) for i, j, k in np.ndindex(rel.shape))
        worst = max(dev_identity, dev_zero, dev_bound, dev_product)
        note["detail"] = f"max deviation {worst}"
        assert worst == 0.0


MALFORMED = {
    "syntax.json": '{"pages": [\n  {"id": 1,}\n]}',
    "category.json": json.dumps({"pages": [{"id": 1, "width": 10, "height": 10, "instances": [
        {"id": 0, "category": "Header2", "bbox": [0, 0, 1, 1]}]}]}),
    "bbox.json": json.dumps({"pages": [{"id": 1, "width": 10, "height": 10, "instances": [
        {"id": 0, "category": "Text", "bbox": [0, 0, 1]}]}]}),
    "toplevel.json": "[]",
    "encoding.bin": b"\xff\xfe{}",
}


def test_c8_round_trip_and_malformed(tmp_path, capsys):
    with criterion(8, "save/load identity on 100 datasets; malformed input exits 2 with a location") as note:
        rng = random.Random(8)
        unequal = 0
        for k in range(100):
            pages = random_pages(seed=1000 + k, count=rng.randint(0, 4), max_boxes=30)
            if k % 3:
                pages = [annotate(p) for p in pages]
            if k % 3 == 2:
                pages = [jitter_prediction(rng, p) for p in pages]
                pages = [p.with_relations([replace(e, existence=rng.random()) for e in p.relations])
                         for p in pages]
            ds = Dataset(pages, {"seed": 1000 + k, "name": f"set {k}"})
            path = tmp_path / f"d{k}.json"
            save_dataset(ds, path)
            back = load_dataset(path, role=PRED if k % 3 == 2 else None)
            if back != ds or dumps_dataset(back) != path.read_text(encoding="utf-8"):
                unequal += 1

        unlocated = []
        for name, body in MALFORMED.items():
            path = tmp_path / name
            if isinstance(body, bytes):
                path.write_bytes(body)
            else:
                path.write_text(body, encoding="utf-8")
            for cmd in ("validate", "stats"):
                code = run([cmd, str(path)])
                err = capsys.readouterr().err
                if code != 2 or f"{path}:" not in err:
                    unlocated.append((name, cmd, code))
        note["detail"] = f"{unequal} round-trip differences, {len(unlocated)} bad diagnostics"
        assert unequal == 0
        assert unlocated == []


def _corpus_files(root):
    root = Path(root)
    return sorted(root.rglob("*.json")) if root.is_dir() else [root]


def test_c9_corpus_statistics():
    with criterion(9, "corpus relation count and spatial share") as note:
        root = os.environ.get(CORPUS_ENV)
        if not root or not Path(root).exists():
            pytest.skip(f"{CORPUS_ENV} not set; no corpus supplied")
        pages = []
        for path in _corpus_files(root):
            # layout-only pages are annotated first
            pages += [p if p.relations else annotate(p) for p in load_dataset(path, validate=False).pages]
        stats = compute_stats(Dataset(pages))
        rel_err = abs(stats.total_relations - REFERENCE_TOTAL) / REFERENCE_TOTAL
        share_err = abs(stats.spatial_share - REFERENCE_SPATIAL_SHARE)
        note["detail"] = (f"{stats.total_relations} relations ({rel_err:.1%} off), "
                          f"spatial share {stats.spatial_share:.2%}")
        assert rel_err <= 0.05
        assert share_err <= 0.05
