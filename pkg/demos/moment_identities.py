"""Walk through the basic moment identities on small sums.

Three routes to the same number: the meet-in-the-middle exact engine, the
O(N^2s) brute-force pairing, and midpoint quadrature on a Nyquist grid. The
s = 1 moment collapses to N^-sigma times the coefficient energy, and at
sigma = 0 the all-ones s = 2 moment counts diagonal solutions exactly.
"""

import argparse

import numpy as np

from momentcurve import (
    ExpSumSpec,
    coeffs_for,
    moment_brute,
    moment_exact,
    moment_quadrature,
    vinogradov_count,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=6)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    n = args.N
    coeffs = coeffs_for("random_sign", n, args.seed)
    spec = ExpSumSpec(n=n, coeffs=coeffs, sigma=args.sigma, h0=0.25)
    print(f"spec: N={n}, sigma={args.sigma}, random signs (seed {args.seed})")

    energy = float(np.sum(np.abs(coeffs) ** 2))
    m1 = moment_exact(spec, 1).value
    print(f"\ns=1 moment          {m1:.15g}")
    print(f"N^-sigma * energy   {n ** -args.sigma * energy:.15g}")

    print("\nthree routes, s = 2:")
    exact = moment_exact(spec, 2)
    brute = moment_brute(spec, 2)
    quad = moment_quadrature(spec, 4.0, oversample=4.0)
    print(f"  exact      {exact.value:.15g}")
    print(f"  brute      {brute.value:.15g}")
    print(f"  quadrature {quad.value:.15g}  (err estimate {quad.err_estimate:.2e})")

    ones = ExpSumSpec(n=n, coeffs=np.ones(n), sigma=0.0)
    m2 = moment_exact(ones, 2).value
    count = vinogradov_count(n, 2)
    print(f"\nall-ones, sigma=0, s=2 moment: {m2:.15g}")
    print(f"diagonal solution count 2N^2-N: {count} (N={n})")
    print(f"2*{n}^2-{n} = {2 * n * n - n}")


if __name__ == "__main__":
    main()
