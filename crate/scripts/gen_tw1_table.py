"""Tabulate the GOE Tracy-Widom CDF F1 on s in [-6, 4], step 0.05.

F1(s) = det(I - B_s) on L^2(0, inf) with kernel B_s(x, y) = Ai(x + y + s)
(Ferrari-Spohn form). The Fredholm determinant is discretised with
Gauss-Legendre quadrature (Bornemann's method) on a truncated interval.

Usage: python3 scripts/gen_tw1_table.py > crates/core/data/tw1_cdf.csv
"""
import sys

import numpy as np
from scipy.special import airy


def f1(s, nodes=160):
    upper = 14.0 + max(0.0, -s)
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * upper * (x + 1.0)
    w = 0.5 * upper * w
    sw = np.sqrt(w)
    kernel = airy(x[:, None] + x[None, :] + s)[0]
    return np.linalg.det(np.eye(nodes) - sw[:, None] * kernel * sw[None, :])


def moments(step=0.005):
    s = np.arange(-9.0, 7.0 + step / 2, step)
    cdf = np.array([f1(v) for v in s])
    pdf = np.gradient(cdf, s)
    mean = np.trapezoid(s * pdf, s)
    var = np.trapezoid((s - mean) ** 2 * pdf, s)
    return mean, var


def main():
    if len(sys.argv) > 1 and sys.argv[1] == "--moments":
        mean, var = moments()
        print(f"mean={mean:.6f} var={var:.6f}")
        return
    print("s,F1")
    for i in range(201):
        s = -6.0 + 0.05 * i
        print(f"{s:.2f},{min(max(f1(s), 0.0), 1.0):.12e}")


if __name__ == "__main__":
    main()
