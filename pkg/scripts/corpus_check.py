"""Compare relation statistics of a real corpus against the published totals.

Takes dataset files or directories of them. Pages without relations are
annotated first, so a converted layout-only corpus works too.

    python3 scripts/corpus_check.py data/graphdoc/
"""

import argparse
import sys
from pathlib import Path

from docgraph.dataset_io import Dataset, compute_stats, load_dataset
from docgraph.relations import annotate

REFERENCE_TOTAL = 4.13e6
REFERENCE_SPATIAL_SHARE = 0.6406


def files(paths):
    for p in map(Path, paths):
        yield from sorted(p.rglob("*.json")) if p.is_dir() else [p]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("paths", nargs="+")
    ap.add_argument("--tolerance", type=float, default=0.05)
    args = ap.parse_args()

    pages = []
    for f in files(args.paths):
        pages += [p if p.relations else annotate(p) for p in load_dataset(f, validate=False).pages]
    stats = compute_stats(Dataset(pages))
    rel_err = abs(stats.total_relations - REFERENCE_TOTAL) / REFERENCE_TOTAL
    share_err = abs(stats.spatial_share - REFERENCE_SPATIAL_SHARE)
    print(stats.to_text())
    print(f"total relations {stats.total_relations} vs {REFERENCE_TOTAL:.0f}: {rel_err:.2%} off")
    print(f"spatial share {stats.spatial_share:.4f} vs {REFERENCE_SPATIAL_SHARE}: {share_err:.4f} off")
    ok = rel_err <= args.tolerance and share_err <= args.tolerance
    print("PASS" if ok else "FAIL")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
