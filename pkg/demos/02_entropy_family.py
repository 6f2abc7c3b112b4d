"""The renormalisation entropies S_ell and their companions.

S_ell equals v^2/2 on |v| <= ell, blends through a cubic up to 2 ell and is
linear beyond, so it is convex with bounded second derivative.  The script
tabulates S_ell, its derivatives and the H-functions at a few points and then
runs the full identity report used by the test suite.
"""
import numpy as np

from stochch.entropy import EntropySpec, h1, h2, h3, identity_report, power_alpha_bundle, s, s_prime, s_second

spec = EntropySpec.sell(2.0)
print(" v      S        S'      S''      H1       H2       H3")
for v in (-5.0, -3.0, -1.0, 0.0, 1.0, 3.0, 5.0):
    print(f"{v:4.1f} {s(spec, v):8.4f} {s_prime(spec, v):7.3f} {s_second(spec, v):7.3f} "
          f"{h1(spec, v):8.4f} {h2(spec, v):8.4f} {h3(spec, v):8.4f}")

pos, neg = EntropySpec.sell(2.0, "+"), EntropySpec.sell(2.0, "-")
v = np.linspace(-10, 10, 2001)
print("\nsplitting S(v) = S(v+) + S(v-) exact:", bool(np.array_equal(s(spec, v), s(pos, v) + s(neg, v))))

alpha = 0.5
S, dS, _ = power_alpha_bundle(alpha, v)
gap = (S * v - 0.5 * dS * v**2) - 0.5 * (1 - alpha) * np.abs(v) ** (2 + alpha)
print(f"power entropy coercivity margin on [-10, 10]: min {gap.min():.3e} (>= 0)")

print("\nidentity report (largest scaled disagreement per ell):")
for ell, entry in identity_report().items():
    print(f"  ell = {ell:4.1f}: {entry['worst']:.1e} over {entry['n_points']} points, "
          f"convex={entry['convex']}, splitting exact={entry['splitting_exact']}")
