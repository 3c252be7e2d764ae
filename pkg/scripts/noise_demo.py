"""Curvature and beta statistics of noisy samples of a circle and a segment.

As the noise amplitude shrinks, the sampled set gets closer to a smooth
curve and the median curvature K(x, R) over atoms should drop with it. This
is a qualitative picture only; no threshold is asserted.

    python3 scripts/noise_demo.py --samples 60 --R 0.3
"""

import argparse

import numpy as np

from betacurv.beta import BetaParams, beta_ball
from betacurv.curvature import CurvatureParams, curvature_exact
from betacurv.synth import synthesize


def stats(mu, R, r_beta):
    cp = CurvatureParams(1, 2.0, 0.0, R)
    K = np.array([curvature_exact(mu, x, cp).value for x in mu.positions])
    b = np.array([beta_ball(mu, x, r_beta, BetaParams(1))[0] for x in mu.positions])
    return np.median(K), np.max(K), np.median(b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--R", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    amplitudes = [0.1, 0.03, 0.01, 0.003, 0.001, 0.0]
    print(f"{'base':<8} {'noise':>7} {'median K':>12} {'max K':>12} {'median beta':>12}")
    for base, extra in (("circle", {"radius": 1.0}), ("segment", {"length": 2.0})):
        for amp in amplitudes:
            params = {"base": base, "amplitude": amp, "samples": args.samples, **extra}
            mu = synthesize("noisy", params, args.seed)
            med, top, beta = stats(mu, args.R, args.R)
            print(f"{base:<8} {amp:>7g} {med:>12.4g} {top:>12.4g} {beta:>12.4g}")


if __name__ == "__main__":
    main()
