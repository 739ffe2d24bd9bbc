#!/usr/bin/env python3
"""Regenerate the NLAR2 centering constant.

The sin/cos recursion has a nonzero long-run mean; the generator subtracts a
fixed constant so emitted series are approximately zero-mean.  This script
recomputes that constant from a single long calibration run (independent
innovations, documented seed) and prints the literal to paste into
``secondwild.dgp.NLAR2_LONG_RUN_MEAN``.
"""

import numpy as np

from secondwild.dgp import InnovationKind, gen_innovations, nlar2_path
from secondwild.rng import RngStream

CALIBRATION_SEED = 20240614
CALIBRATION_LENGTH = 100_000
CALIBRATION_BURN_IN = 10_000


def main() -> None:
    n = CALIBRATION_BURN_IN + CALIBRATION_LENGTH
    eps = gen_innovations(InnovationKind.INDEPENDENT, n, RngStream(CALIBRATION_SEED, 0))
    path = nlar2_path(eps)[CALIBRATION_BURN_IN:]
    mean = float(np.mean(path))
    print(f"NLAR2_LONG_RUN_MEAN = {mean!r}")


if __name__ == "__main__":
    main()
