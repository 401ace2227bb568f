"""Generate frozen Chebyshev tables for large-argument Bessel evaluation.

For x >= 8 the Bessel functions are evaluated through the modulus/phase
decomposition

    J_n(x) = sqrt(2/(pi*x)) * (P_n(x) cos(chi_n) - Q_n(x) sin(chi_n))
    Y_n(x) = sqrt(2/(pi*x)) * (P_n(x) sin(chi_n) + Q_n(x) cos(chi_n))

with chi_n = x - (2n+1)*pi/4.  P_n and x*Q_n are smooth functions of
v = (8/x)^2 on [0, 1]; this script fits them with Chebyshev series using
50-digit arithmetic and freezes the coefficients into
src/arcrom/_bessel_tables.py.

Run from the repository root:

    python tools/gen_bessel_tables.py
"""

from __future__ import annotations

import pathlib

import mpmath as mp
import numpy as np

mp.mp.dps = 50

DEGREE = 80
TRUNC = 1e-19
OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "arcrom" / "_bessel_tables.py"


def pq(n: int, x: mp.mpf) -> tuple[mp.mpf, mp.mpf]:
    """Modulus components P_n(x), Q_n(x) from exact Bessel values."""
    chi = x - (2 * n + 1) * mp.pi / 4
    amp = mp.sqrt(mp.pi * x / 2)
    j = mp.besselj(n, x)
    y = mp.bessely(n, x)
    # Invert the 2x2 rotation [cos -sin; sin cos] applied to (P, Q).
    p = amp * (j * mp.cos(chi) + y * mp.sin(chi))
    q = amp * (-j * mp.sin(chi) + y * mp.cos(chi))
    return p, q


def cheb_fit(fun, degree: int) -> np.ndarray:
    """Chebyshev coefficients of fun on [0, 1] (first-kind nodes)."""
    m = degree + 1
    nodes = [mp.cos(mp.pi * (mp.mpf(2 * k + 1)) / (2 * m)) for k in range(m)]
    vals = [fun((t + 1) / 2) for t in nodes]  # map [-1,1] -> [0,1]
    coeffs = []
    for j in range(m):
        acc = mp.mpf(0)
        for k in range(m):
            acc += vals[k] * mp.cos(mp.pi * j * (2 * k + 1) / (2 * m))
        c = 2 * acc / m
        if j == 0:
            c /= 2
        coeffs.append(c)
    arr = np.array([float(c) for c in coeffs])
    # Truncate negligible tail.
    keep = len(arr)
    while keep > 1 and abs(arr[keep - 1]) < TRUNC:
        keep -= 1
    return arr[:keep]


def main() -> None:
    tables = {}
    for n in (0, 1):
        # v = (8/x)^2 in (0, 1]; v -> 0 is x -> infinity where P=1, xQ -> ...
        def pfun(v, n=n):
            if v == 0:
                return mp.mpf(1)
            x = 8 / mp.sqrt(v)
            return pq(n, x)[0]

        def qfun(v, n=n):
            mu = 4 * n * n
            if v == 0:
                return mp.mpf(mu - 1) / 8  # limit of x*Q_n(x)
            x = 8 / mp.sqrt(v)
            return x * pq(n, x)[1]

        tables[f"P{n}"] = cheb_fit(pfun, DEGREE)
        tables[f"XQ{n}"] = cheb_fit(qfun, DEGREE)

    lines = [
        '"""Frozen Chebyshev coefficients for large-argument Bessel evaluation.',
        "",
        "Auto-generated by tools/gen_bessel_tables.py; do not edit by hand.",
        "Coefficients are for Chebyshev series in v = (8/x)**2 on [0, 1]",
        "(argument mapped to [-1, 1] as 2*v - 1) of the amplitude functions",
        "P_n(x) and x*Q_n(x), n in {0, 1}.",
        '"""',
        "",
        "import numpy as np",
        "",
    ]
    for name, arr in tables.items():
        body = ",\n    ".join(repr(float(c)) for c in arr)
        lines.append(f"{name} = np.array([\n    {body},\n])")
        lines.append("")
    OUT.write_text("\n".join(lines))
    for name, arr in tables.items():
        print(f"{name}: {len(arr)} coefficients, last = {arr[-1]:.3e}")


if __name__ == "__main__":
    main()
