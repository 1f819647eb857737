"""``python -m gstep.solver.highs_cli MODEL.mps SOLUTION.sol [--gap G] [--time-limit T]``

A stand-alone MPS-in, solution-file-out solver built on HiGHS, usable as
the ``$GSTEP_SOLVER`` command.
"""
from __future__ import annotations

import argparse
import sys

from .backends import solve_mps_with_highs


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="gstep-highs", description=__doc__.splitlines()[0])
    ap.add_argument("mps")
    ap.add_argument("solution")
    ap.add_argument("--gap", type=float, default=1e-4)
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args(argv)
    status = solve_mps_with_highs(args.mps, args.solution, args.gap, args.time_limit)
    print(status)
    return 0


if __name__ == "__main__":
    sys.exit(main())
