"""Regenerates the frozen reference numbers used by the C++ tests.

Requires mpmath, numpy and scipy. Not run by ctest.
"""
import mpmath as mp
import numpy as np
from scipy.special import mathieu_a, mathieu_b

mp.mp.dps = 50

# Physicists' Hermite polynomial and normalized Hermite functions.
print("H_150(5) =", mp.nstr(mp.hermite(150, 5), 20))
for n, x in [(0, 0.3), (5, 1.2), (40, 3.0), (150, 5.0), (300, 10.0)]:
    v = mp.hermite(n, x) * mp.exp(-x**2 / 2) / mp.sqrt(2**n * mp.factorial(n) * mp.sqrt(mp.pi))
    print(f"psi_{n}({x}) =", mp.nstr(v, 20))

# Transmon at n_g = 0: H = 4 E_C n^2 - E_J cos(phi). With phi = 2z the
# eigenvalue problem is Mathieu's equation with q = -E_J / (2 E_C); the
# 2pi-periodic solutions have even orders and a(-q) = a(q), b(-q) = b(q).
ec, ej = 0.2, 10.0
q = ej / (2 * ec)
vals = sorted([mathieu_a(2 * k, q) for k in range(8)] + [mathieu_b(2 * k, q) for k in range(1, 8)])
print("transmon levels (GHz):", [repr(float(v * ec)) for v in vals[:6]])
