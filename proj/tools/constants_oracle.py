#!/usr/bin/env python3
"""Exact rational evaluation of the envelope constants for N=3, gamma=1 (and gamma=2 for kappa).

Writes tests/golden/constants_oracle.json. Run from the repository root.
"""
import json
import math
import sys
from fractions import Fraction as Fr

N = 3
MASS, ENERGY = Fr(1), Fr(4)  # ||F0||_0, ||F0||_2 of a normalized datum in dimension 3
A2 = Fr(2, 3)                # hard spheres with A0 = 1
RHO, T = Fr(1), Fr(1)


def k_s(s, gamma):
    expo = max(s - 2, 0) / gamma
    base = Fr(2) ** (s + 7) * (ENERGY / MASS) * (1 + 1 / (16 * ENERGY * A2 * gamma))
    assert expo == int(expo)
    return ENERGY * base ** int(expo)


def exact_sqrt(q):
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    assert n * n == q.numerator and d * d == q.denominator
    return Fr(n, d)


def main():
    k3, k4 = k_s(3, 1), k_s(4, 1)
    t0 = Fr(1)
    # a = [K4 (1 + max{1, 1/t0})^{2/gamma}]^{-(2-gamma)/2} at gamma = 1
    a = 1 / exact_sqrt(k4 * (1 + max(Fr(1), 1 / t0)) ** 2)
    alpha = Fr(2)  # (2/gamma)^{gamma/(2-gamma)} at gamma = 1
    beta = Fr(1, 2) * (2 ** 6 * (N + 1) ** 2 * RHO * T) ** 2
    kappa = 2 ** 6 * (N + 1) ** 2 * RHO * T
    inv = 4 * ENERGY / (N * RHO ** 2) + Fr(6, N) * (ENERGY / RHO ** 2) ** 2
    d0 = min(RHO / 2, T / (2 * inv))
    values = {"K3": k3, "K4": k4, "a": a, "alpha": alpha, "beta": beta, "kappa": kappa, "D0": d0}
    out = {k: {"fraction": f"{v.numerator}/{v.denominator}", "value": float(v)} for k, v in values.items()}
    out["inputs"] = {"N": N, "mass": 1, "energy_norm": 4, "A2": "2/3", "rho": 1, "T": 1, "t0": 1}
    path = sys.argv[1] if len(sys.argv) > 1 else "tests/golden/constants_oracle.json"
    with open(path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
