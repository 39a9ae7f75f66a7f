"""Relation-graph metrics: instance matching, relation filtering, mR_g, mAP_g, DLA mAP and score fusion.

Thresholds for matching (IoU) and relation admission (confidence) are strict
lower bounds. DLA mAP follows COCO practice and accepts IoU >= t.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Category, Page, RelationEdge, RelationType, iou

DLA_IOU_THRESHOLDS = tuple(round(0.50 + 0.05 * k, 2) for k in range(10))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass
class InstanceMapping:
    gt_to_pred: dict[int, int] = field(default_factory=dict)  # M
    pred_to_gt: dict[int, int] = field(default_factory=dict)  # L

    @classmethod
    def from_gt_map(cls, gt_to_pred: dict[int, int]) -> "InstanceMapping":
        return cls(dict(gt_to_pred), {p: g for g, p in gt_to_pred.items()})


@dataclass(frozen=True, order=True)
class ScoredTriplet:
    subject: int
    predicate: RelationType
    object: int
    score: float = 1.0
    page: int = 0

    @property
    def key(self):
        return (self.page, self.subject, self.predicate, self.object)


def match_instances(gt: Page, pred: Page, iou_threshold: float = 0.5) -> InstanceMapping:
    """Greedy label-aware matching of predicted instances onto ground truth.

    Predictions are visited by descending score (ties by id). Each one targets
    its best-IoU ground truth of the same label and takes it when the IoU clears
    the threshold and beats the current holder; a displaced prediction is not
    tried again.
    """
    if any(p.score is None for p in pred.instances):
        raise ValueError(f"page {pred.id}: every predicted instance needs a score")
    by_label: dict[Category, list] = defaultdict(list)
    for g in sorted(gt.instances, key=lambda i: i.id):
        by_label[g.category].append(g)

    assigned: dict[int, tuple[int, float]] = {}
    for p in sorted(pred.instances, key=lambda i: (-i.score, i.id)):
        best, best_iou = None, -1.0
        for g in by_label.get(p.category, ()):
            v = iou(g.bbox, p.bbox)
            if v > best_iou:
                best, best_iou = g.id, v
        if best is None or not best_iou > iou_threshold:
            continue
        held = assigned.get(best)
        if held is None or best_iou > held[1]:
            assigned[best] = (p.id, best_iou)
    return InstanceMapping.from_gt_map({g: p for g, (p, _) in assigned.items()})


def filter_relations(pred_edges: Iterable[RelationEdge], mapping: InstanceMapping,
                     rel_threshold: float = 0.5, page: int = 0) -> list[ScoredTriplet]:
    """Keep edges scored strictly above the threshold whose endpoints both matched, in gt ids."""
    L = mapping.pred_to_gt
    out = []
    for e in pred_edges:
        if e.score is None:
            raise ValueError(f"predicted {e.rel.value} edge {e.subject}->{e.object} has no score")
        if e.score > rel_threshold and e.subject in L and e.object in L:
            out.append(ScoredTriplet(L[e.subject], e.rel, L[e.object], e.score, page))
    return out


def gt_triplets(page: Page) -> set[tuple]:
    ids = {i.id for i in page.instances}
    return {(page.id, e.subject, e.rel, e.object)
            for e in page.relations if e.subject in ids and e.object in ids}


@dataclass
class CategoryResult:
    values: dict[str, float]
    mean: Optional[float]
    excluded: list[str]

    @property
    def undefined(self) -> bool:
        return self.mean is None


def _by_predicate(triplets) -> dict[RelationType, list]:
    out: dict[RelationType, list] = defaultdict(list)
    for t in triplets:
        out[t[2] if isinstance(t, tuple) else t.predicate].append(t)
    return out


def _finish(values: dict[RelationType, float], gt_by_rel) -> CategoryResult:
    present = [r for r in RelationType if r in gt_by_rel]
    excluded = [r.value for r in RelationType if r not in gt_by_rel]
    mean = float(np.mean([values[r] for r in present])) if present else None
    return CategoryResult({r.value: values[r] for r in present}, mean, excluded)


def mean_recall_g(x_t: Iterable[ScoredTriplet], gt: Iterable[tuple]) -> CategoryResult:
    """Per-relation recall of ground-truth triplets, averaged over relations present in gt.

    Ground-truth triplets are (page, subject, predicate, object) tuples.
    """
    gt_by_rel = _by_predicate(set(gt))
    found = {t.key for t in x_t}
    recalls = {}
    for rel, items in gt_by_rel.items():
        recalls[rel] = sum(1 for t in items if t in found) / len(items)
    return _finish(recalls, gt_by_rel)


def average_precision(hits: Sequence[bool], n_positive: int) -> float:
    """All-points AP: recall-weighted precision envelope of a ranked hit list."""
    if n_positive == 0:
        return 0.0
    hits = np.asarray(hits, dtype=bool)
    if hits.size == 0:
        return 0.0
    tp = np.cumsum(hits)
    precision = tp / np.arange(1, hits.size + 1)
    recall = tp / n_positive
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


def _dedupe_best(triplets: Iterable[ScoredTriplet]) -> list[ScoredTriplet]:
    best: dict[tuple, ScoredTriplet] = {}
    for t in triplets:
        if t.key not in best or t.score > best[t.key].score:
            best[t.key] = t
    return list(best.values())


def mean_ap_g(x_t: Iterable[ScoredTriplet], gt: Iterable[tuple]) -> CategoryResult:
    gt_set = set(gt)
    gt_by_rel = _by_predicate(gt_set)
    pred_by_rel = _by_predicate(_dedupe_best(x_t))
    aps = {}
    for rel, items in gt_by_rel.items():
        preds = sorted(pred_by_rel.get(rel, ()), key=lambda t: (-t.score, t.key))
        aps[rel] = average_precision([t.key in gt_set for t in preds], len(items))
    return _finish(aps, gt_by_rel)


def _coco_ap(scores: list[float], hits: list[bool], n_gt: int) -> float:
    """101-point interpolated AP."""
    order = np.argsort(-np.asarray(scores, dtype=float), kind="mergesort")
    h = np.asarray(hits, dtype=bool)[order]
    tp = np.cumsum(h)
    fp = np.cumsum(~h)
    recall = tp / n_gt
    precision = tp / np.maximum(tp + fp, np.finfo(float).eps)
    envelope = np.maximum.accumulate(precision[::-1])[::-1] if h.size else precision
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    q = np.array([envelope[i] if i < h.size else 0.0 for i in idx])
    return float(q.mean())


def _greedy_hits(gts, preds, threshold: float) -> list[bool]:
    taken = set()
    hits = []
    for p in preds:
        best, best_iou = None, threshold
        for g in gts:
            if g.id in taken:
                continue
            v = iou(g.bbox, p.bbox)
            if v >= best_iou and (best is None or v > best_iou):
                best, best_iou = g.id, v
        if best is not None:
            taken.add(best)
        hits.append(best is not None)
    return hits


@dataclass
class DlaResult:
    per_class: dict[str, float]
    map: Optional[float]
    excluded: list[str]

    @property
    def undefined(self) -> bool:
        return self.map is None


def dla_map(gt_pages: Sequence[Page], pred_pages: Sequence[Page], max_dets: int = 300,
            thresholds: Sequence[float] = DLA_IOU_THRESHOLDS) -> DlaResult:
    """COCO-style box mAP averaged over classes and IoU thresholds 0.50:0.05:0.95."""
    preds_by_id = {p.id: p for p in pred_pages}
    n_gt: dict[Category, int] = defaultdict(int)
    for g in gt_pages:
        for inst in g.instances:
            n_gt[inst.category] += 1
    classes = [c for c in Category if n_gt[c] > 0]
    if not classes:
        return DlaResult({}, None, [c.value for c in Category])

    per_class = {}
    for c in classes:
        aps = []
        for t in thresholds:
            scores, hits = [], []
            for g in gt_pages:
                pred = preds_by_id.get(g.id)
                if pred is None:
                    continue
                dets = sorted(pred.instances, key=lambda i: (-(i.score or 0.0), i.id))[:max_dets]
                dets = [d for d in dets if d.category is c]
                gts = [i for i in g.instances if i.category is c]
                hits += _greedy_hits(gts, dets, t)
                scores += [d.score or 0.0 for d in dets]
            aps.append(_coco_ap(scores, hits, n_gt[c]))
        per_class[c.value] = float(np.mean(aps))
    mean = float(np.mean(list(per_class.values())))
    return DlaResult(per_class, mean, [c.value for c in Category if n_gt[c] == 0])


def fuse_auxiliary(rel_scores, existence) -> np.ndarray:
    """Scale every relation-class score of a pair by that pair's existence score."""
    rel_scores = np.asarray(rel_scores, dtype=float)
    existence = np.asarray(existence, dtype=float)
    if rel_scores.ndim != 3 or existence.shape != rel_scores.shape[:2]:
        raise ValueError(f"shape mismatch: relation scores {rel_scores.shape}, existence {existence.shape}")
    return rel_scores * existence[:, :, None]


def fuse_edges(edges: Iterable[RelationEdge]) -> list[RelationEdge]:
    """Sparse counterpart of fuse_auxiliary for prediction files carrying `existence`."""
    out = []
    for e in edges:
        if e.existence is None or e.score is None:
            out.append(e)
        else:
            out.append(RelationEdge(e.subject, e.object, e.rel, e.score * e.existence))
    return out


def dense_to_edges(ids: Sequence[int], scores, rel_types: Sequence[RelationType] = tuple(RelationType),
                   min_score: float = 0.0) -> list[RelationEdge]:
    """Turn an N x N x k score array into scored edges, skipping the diagonal and scores <= min_score."""
    scores = np.asarray(scores, dtype=float)
    n = len(ids)
    if scores.shape != (n, n, len(rel_types)):
        raise ValueError(f"expected shape {(n, n, len(rel_types))}, got {scores.shape}")
    edges = []
    for i, j, c in zip(*np.nonzero(scores > min_score)):
        if i != j:
            edges.append(RelationEdge(int(ids[i]), int(ids[j]), RelationType(rel_types[c]), float(scores[i, j, c])))
    return edges


@dataclass
class MetricReport:
    iou_threshold: float
    rel_threshold: float
    recall: dict[str, float]
    ap: dict[str, float]
    mR_g: Optional[float]
    mAP_g: Optional[float]
    excluded_relations: list[str]
    dla: Optional[DlaResult] = None
    pages: int = 0
    matched_instances: int = 0

    @property
    def undefined(self) -> bool:
        return self.mR_g is None or (self.dla is not None and self.dla.undefined)

    def to_dict(self) -> dict:
        d = {
            "iou_threshold": self.iou_threshold,
            "rel_threshold": self.rel_threshold,
            "pages": self.pages,
            "matched_instances": self.matched_instances,
            "mR_g": self.mR_g,
            "mAP_g": self.mAP_g,
            "recall": self.recall,
            "ap": self.ap,
            "excluded_relations": self.excluded_relations,
            "undefined": self.undefined,
        }
        if self.dla is not None:
            d["dla"] = {"mAP": self.dla.map, "per_class": self.dla.per_class, "excluded": self.dla.excluded}
        return d


def _page_matches(args):
    gt, pred, iou_threshold = args
    return match_instances(gt, pred, iou_threshold)


def evaluate(gt_pages: Sequence[Page], pred_pages: Sequence[Page], iou_threshold: float = 0.5,
             rel_thresholds: Sequence[float] = (0.5,), fuse: bool = True, with_dla: bool = True,
             max_dets: int = 300, executor=None) -> list[MetricReport]:
    """One MetricReport per relation threshold; matching is computed once per page.

    Pages pair up by id; a ground-truth page with no prediction counts as an empty prediction.
    """
    preds_by_id = {p.id: p for p in pred_pages}
    pairs = [(g, preds_by_id.get(g.id, Page(g.id, g.width, g.height)), iou_threshold) for g in gt_pages]
    mapper = executor.map if executor is not None else map
    mappings = list(mapper(_page_matches, pairs))

    gt_all = set()
    for g in gt_pages:
        gt_all |= gt_triplets(g)
    dla = dla_map(gt_pages, pred_pages, max_dets) if with_dla else None
    matched = sum(len(m.gt_to_pred) for m in mappings)

    reports = []
    for t in rel_thresholds:
        x_t = []
        for (g, pred, _), mapping in zip(pairs, mappings):
            edges = fuse_edges(pred.relations) if fuse else pred.relations
            x_t += filter_relations(edges, mapping, t, page=g.id)
        rec = mean_recall_g(x_t, gt_all)
        ap = mean_ap_g(x_t, gt_all)
        reports.append(MetricReport(iou_threshold, t, rec.values, ap.values, rec.mean, ap.mean,
                                    rec.excluded, dla, len(pairs), matched))
    return reports
