"""Integrated squared bias, variance and MSE of the empirical, checkerboard
and empirical beta copulas for n = 20, 30, ..., 100.

    python scripts/measures_study.py --reps 20000 --out results/measures
"""

from _common import parser, run_models

from empbeta.reference import fgm, gauss, independence

if __name__ == "__main__":
    args = parser(__doc__.splitlines()[0], "20:100:10", "results/measures").parse_args()
    run_models([fgm(-1.0), independence(), gauss(0.5)], ("empirical", "checkerboard", "beta"), args)
