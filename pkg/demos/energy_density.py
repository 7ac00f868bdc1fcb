"""
The convex energy density
=========================

The Lyapunov functional integrates ``Phi(u)`` over the domain, where ``Phi`` is
the doubly integrated reciprocal of the attraction sensitivity and vanishes
with zero slope at ``s = 1``. This script compares the closed forms against
adaptive quadrature and shows how the attraction exponent changes the shape.
"""
import numpy as np

from chemoflux import PhiEvaluator

s = np.array([1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0])

# For p = 2 the density is the entropy s log s - s + 1.
entropy = s * np.log(s) - s + 1
print("p = 2, closed form vs entropy:", np.max(np.abs(PhiEvaluator(2.0)(s) - entropy)))

# Whenever 2 - p is a nonnegative integer a binomial expansion gives a closed
# form; forcing quadrature shows both paths agree.
for p in (2.0, 1.0, 0.0):
    exact = PhiEvaluator(p)(s)
    quad = PhiEvaluator(p, method="quad")(s)
    print(f"p = {p:g}: max |closed - quad| = {np.max(np.abs(exact - quad)):.2e}")

# Non-integer exponents always go through quadrature.
print()
print("     s " + "".join(f"{f'p={p:g}':>12}" for p in (0.5, 1.5, 2.5, 3.0)))
for value in s:
    row = [PhiEvaluator(p)(value) for p in (0.5, 1.5, 2.5, 3.0)]
    print(f"{value:6g} " + "".join(f"{x:12.5g}" for x in row))

# Larger p damps the growth of Phi at large densities: Phi'' = 1/(s (s+1)^(p-2)).
