"""Kahler ratio K = g g_s / f vs theta from one profile snapshot CSV.

K = 1 everywhere on the unperturbed metric; near the singular time the
curve dips to -1 near theta = pi/2, where the metric approaches the Kahler
subspace with reversed orientation.
"""

import argparse
import sys

import matplotlib.pyplot as plt

from .common import SNAPSHOT_REQUIRED, SchemaError, load_csv, save


def render(in_path, out_path):
    data = load_csv(in_path, SNAPSHOT_REQUIRED)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(data["theta"], data["K"], color="tab:red", lw=1.2)
    for ref in (1.0, -1.0):
        ax.axhline(ref, color="0.6", lw=0.6, ls="--")
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$K = g\,g_s/f$")
    ax.set_title("Kahler ratio near the final time")
    fig.tight_layout()
    save(fig, out_path)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True, help="snapshot CSV")
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
