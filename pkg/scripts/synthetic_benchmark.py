"""Annotate a synthetic corpus and report timing plus relation statistics.

    python3 scripts/synthetic_benchmark.py --pages 1000 --seed 0 [--out corpus.json]
"""

import argparse
import time

from docgraph.dataset_io import Dataset, compute_stats, save_dataset
from docgraph.relations import annotate
from docgraph.spatial import LayoutClass, classify_layout, extract_spatial
from docgraph.synthetic import random_pages


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pages", type=int, default=1000)
    ap.add_argument("--max-boxes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the annotated corpus here")
    args = ap.parse_args()

    pages = random_pages(args.seed, args.pages, args.max_boxes)
    n_boxes = sum(len(p.instances) for p in pages)
    manhattan = sum(classify_layout(p) is LayoutClass.MANHATTAN for p in pages)

    t0 = time.perf_counter()
    for p in pages:
        extract_spatial(p)
    t_spatial = time.perf_counter() - t0

    t0 = time.perf_counter()
    graphs = [annotate(p) for p in pages]
    t_full = time.perf_counter() - t0

    print(f"pages {len(pages)}, boxes {n_boxes}, Manhattan {manhattan / max(1, len(pages)):.1%}")
    print(f"spatial extraction {t_spatial:.2f}s, full annotation {t_full:.2f}s "
          f"({1000 * t_full / max(1, len(pages)):.2f} ms/page)")
    print()
    stats = compute_stats(Dataset(graphs))
    print(stats.to_text().split("\n\ncategory")[0])
    if args.out:
        save_dataset(Dataset(graphs, {"generator": "docgraph.synthetic", "seed": args.seed}), args.out)
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
