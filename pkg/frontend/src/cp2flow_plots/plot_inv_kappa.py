"""Fiber 1/kappa_23 vs time from a timeseries CSV.

The curve tracks the time remaining to the singularity; it runs to zero
linearly near the final time.
"""

import argparse
import sys

import matplotlib.pyplot as plt

from .common import TIMESERIES_REQUIRED, SchemaError, load_csv


def render(in_path, out_path):
    data = load_csv(in_path, TIMESERIES_REQUIRED)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(data["t"], data["inv_kappa23_fiber"], color="tab:blue", lw=1.2)
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$1/\kappa_{23}$ at the fiber")
    ax.set_title("Fiber curvature proxy vs time")
    fig.tight_layout()
    from .common import save

    save(fig, out_path)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True, help="timeseries CSV")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(args.in_path, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
