"""Evaluate simulated predictions across relation thresholds.

Predictions come from jittering annotated synthetic pages (box noise, dropped
and relabelled instances, random scores, spurious edges). Prints a table of
mR_g / mAP_g per T_R, with and without auxiliary-score fusion.

    python3 scripts/threshold_sweep.py --pages 200 --noise 4
"""

import argparse
import random
from dataclasses import replace

from docgraph.evaluation import evaluate
from docgraph.relations import annotate
from docgraph.synthetic import jitter_prediction, random_pages


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pages", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", type=float, default=4.0, help="box jitter in pixels")
    ap.add_argument("--drop", type=float, default=0.1)
    ap.add_argument("--iou-threshold", type=float, default=0.5)
    ap.add_argument("--thresholds", default="0.5,0.75,0.95")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    gts = [annotate(p) for p in random_pages(args.seed, args.pages)]
    preds = [jitter_prediction(rng, g, drop=args.drop, noise=args.noise) for g in gts]
    # a random existence score per edge so fusion has something to do
    preds = [p.with_relations([replace(e, existence=rng.random() ** 0.25) for e in p.relations]) for p in preds]
    grid = tuple(float(t) for t in args.thresholds.split(","))

    print(f"{'T_R':>6} {'fusion':>7} {'mR_g':>7} {'mAP_g':>7} {'DLA mAP':>8}")
    for fuse in (False, True):
        for r in evaluate(gts, preds, args.iou_threshold, grid, fuse=fuse):
            print(f"{r.rel_threshold:>6.2f} {str(fuse):>7} {100 * r.mR_g:>7.2f} {100 * r.mAP_g:>7.2f} "
                  f"{100 * r.dla.map:>8.2f}")


if __name__ == "__main__":
    main()
