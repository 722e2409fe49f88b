"""Empirical beta copula against empirical Bernstein copulas with degree
ceil(n/3) and the data-size dependent degree, every n from 20 to 100.

Every sample size is included so the divisibility pattern of ceil(n/3)
shows up.  ``--pair-across-n`` nests the samples across n.
"""

from _common import parser, run_models

from empbeta.reference import fgm, gauss, gumbel

if __name__ == "__main__":
    p = parser(__doc__.splitlines()[0], "20:100:1", "results/bernstein")
    p.add_argument("--pair-across-n", action="store_true")
    args = p.parse_args()
    run_models([fgm(-1.0), gauss(0.5), gumbel(tau=0.5)], ("beta", "bernstein:n/3", "bernstein:jsv"),
               args, pair_across_n=args.pair_across_n)
