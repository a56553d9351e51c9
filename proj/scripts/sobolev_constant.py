#!/usr/bin/env python3
"""Best Sobolev constant S = N(N-2) pi (Gamma(N/2) / Gamma(N))^(2/N).

Prints the values stored as kSobolevConstant3 and kSobolevConstant4 in
core/include/nlsn/oracle.hpp, evaluated with 40 significant digits.
"""
from mpmath import gamma, mp, mpf, pi


def sobolev_constant(n: int) -> mpf:
    return n * (n - 2) * pi * (gamma(mpf(n) / 2) / gamma(n)) ** (mpf(2) / n)


if __name__ == "__main__":
    mp.dps = 40
    for n in (3, 4):
        print(f"N={n}  S={mp.nstr(sobolev_constant(n), 30)}")
