"""Figure regeneration from simulator CSV output.

Three single-shot scripts, one per figure kind:

* fiber 1/kappa_23 vs time (from a timeseries CSV),
* Kahler ratio K vs theta (from one profile snapshot CSV),
* cone angle gamma^2 vs arclength from the fiber, several snapshots overlaid
  against the 1/sqrt(2) reference line.

The scripts read only the documented CSV schemas; they have no access to
simulator internals.
"""

__version__ = "0.1.0"
