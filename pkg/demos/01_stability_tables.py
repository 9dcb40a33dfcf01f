"""Exponent chains, Routh tables and which observer layouts can be made stable."""

import numpy as np

from intderiv import ObserverConfig, alpha_chain, check, lemma1_feasible, observer_char_poly, routh_hurwitz
from intderiv.stability import char_poly

# The terminal exponent fixes the whole chain; alpha_n = 1 gives the linear observer.
for alpha_n in (1.0, 0.9, 0.8, 0.5):
    print(f"alpha_3 = {alpha_n}:", np.round(alpha_chain(3, alpha_n).alphas, 6))

# Routh table of the third-order observer used for tracking cos t.
cfg = ObserverConfig(n=3, p=2, gains=(0.1, 2.0, 1.0), epsilon=0.5, alpha_n=0.8)
print()
print(routh_hurwitz(observer_char_poly(cfg)).format())

# Shrinking eps scales the measured-slot coefficient up.  Unit gains are not
# always enough for a feasible layout ((4,3) fails at eps = 0.9), but no
# choice of gains rescues the fifth-order layouts.
print()
for n in (2, 3, 4, 5):
    for p in range(2, n + 1):
        chain = alpha_chain(n, 0.8)
        verdicts = [str(routh_hurwitz(char_poly([1.0] * n, p, e, chain[p])).verdict) for e in (0.9, 0.5, 0.1, 0.01)]
        print(f"(n,p)=({n},{p}) feasible={lemma1_feasible(n, p)!s:5}  unit gains:", ", ".join(verdicts))

# Validation lists every problem at once.
bad = ObserverConfig(n=5, p=3, gains=(1.0, -1.0, 1.0, 1.0, 1.0), epsilon=1.2, alpha_n=0.8)
print()
for d in check(bad):
    print(d)
