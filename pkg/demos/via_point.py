"""G-MDS, G-AMDS and PI2 on the 2-D point via-point task, writing a comparison plot.

Run:  python3 demos/via_point.py [output_dir]
"""

import sys

from mdsearch.harness import compare_suite


def main(out="demo_point"):
    runs, table = compare_suite("point", out, seeds=range(3))
    print(table)
    for name, result in runs.items():
        curve = result.curve.mean
        print(f"{name:<7} cost after update 1: {curve[0]:.3e}, after {len(curve)}: {curve[-1]:.3e}")
    print(f"\nplots and CSV files written to {out}/")


if __name__ == "__main__":
    main(*sys.argv[1:])
