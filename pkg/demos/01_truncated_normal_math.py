"""The scalar building block: the unit-variance normal conditioned to [a, b].

Walks through the density, the closed-form mean, and the mean-shift
function (odd about the interval midpoint, strictly increasing), checking
each claim against plain Simpson quadrature as it goes.
"""

import numpy as np

from truncgibbs import SpinInterval, TruncatedNormal, density, mean, varphi, varphi_inverse

interval = SpinInterval(0.0, 1.0)

print("Truncated normal on [0, 1], pre-truncation mean m, unit variance")
print()
print(f"{'m':>6} {'mean-shift':>12} {'E[X]':>10} {'quadrature':>12}")
grid = np.linspace(0.0, 1.0, 2001)
w = np.ones(grid.size)
w[1:-1:2], w[2:-1:2] = 4.0, 2.0
w *= (grid[1] - grid[0]) / 3.0
for m in (-1.0, 0.0, 0.25, 0.5, 0.75, 1.0, 2.0):
    tn = TruncatedNormal(m, interval)
    g = np.asarray(density(tn, grid))
    quad_mean = float(w @ (grid * g))
    print(f"{m:>6.2f} {varphi(m, interval):>12.6f} {mean(tn):>10.6f} {quad_mean:>12.6f}")

print()
print("The density integrates to one (Simpson on 2000 subintervals):")
for m in (0.0, 0.5, 3.0):
    tn = TruncatedNormal(m, interval)
    total = float(w @ np.asarray(density(tn, grid)))
    print(f"  m={m:>4.1f}: integral = {total:.12f}")

print()
print("Odd symmetry about the midpoint: varphi(1/2 + t) = -varphi(1/2 - t)")
for t in (0.1, 0.3, 0.5):
    left = varphi(0.5 - t, interval)
    right = varphi(0.5 + t, interval)
    print(f"  t={t}: {right:+.10f} vs {-left:+.10f}")

print()
print("The mean shift is invertible on [a, b]; round trips recover m:")
for m in (0.05, 0.4, 0.93):
    y = varphi(m, interval)
    back = varphi_inverse(y, interval)
    print(f"  m={m}: varphi={y:+.6f}, inverse gives {back:.12f}")

print()
print("E[X] always sits strictly inside (a, b), even for distant means:")
for m in (-30.0, -5.0, 8.0, 40.0):
    print(f"  m={m:>6.1f}: E[X] = {mean(TruncatedNormal(m, interval)):.6f}")
