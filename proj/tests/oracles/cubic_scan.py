"""Independent oracle for the exact additivity scan of f(x) = x^3, Q = 8."""
from fractions import Fraction
from math import gcd

Q = 8
points = sorted({Fraction(p, q) for q in range(1, Q + 1) for p in range(q + 1) if gcd(p, q) == 1})
best = None
pairs = 0
for x in points:
    for y in points:
        if x + y > 1:
            break
        pairs += 1
        r = abs((x + y) ** 3 - x ** 3 - y ** 3)
        if best is None or r > best[0]:
            best = (r, x, y)
print("points", len(points), "pairs", pairs)
print("residual", best[0], "at", best[1], best[2])
