"""Cone angle gamma^2 = f^2/g^2 vs arclength from the fiber, for one or more
profile snapshots, overlaid on the 1/sqrt(2) reference of the singularity
model's asymptotic cone.
"""

import argparse
import math
import sys

import matplotlib.pyplot as plt

from .common import SNAPSHOT_REQUIRED, SchemaError, load_csv, save


def render(snapshot_paths, out_path, max_length=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in snapshot_paths:
        data = load_csv(path, SNAPSHOT_REQUIRED)
        length = data["length_from_pi2"]
        order = length.argsort()
        ax.plot(length[order], data["gamma2"][order], lw=1.2, label=str(path))
    ax.axhline(1 / math.sqrt(2), color="k", lw=0.8, ls="--", label=r"$1/\sqrt{2}$")
    if max_length is not None:
        ax.set_xlim(0.0, max_length)
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel(r"length from $\theta = \pi/2$")
    ax.set_ylabel(r"$\gamma^2 = f^2/g^2$")
    ax.set_title("Cone angle near the final time")
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    save(fig, out_path)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--snapshots", nargs="+", required=True, help="snapshot CSVs, earliest first"
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--max-length", type=float, default=None,
        help="clip the horizontal axis to focus on the fiber region",
    )
    args = parser.parse_args(argv)
    try:
        render(args.snapshots, args.out, args.max_length)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
