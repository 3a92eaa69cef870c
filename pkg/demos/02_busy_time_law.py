"""Closed-form busy-time law next to a million simulated busy periods."""

import numpy as np

from ldfec import CodeParams, IidChannel
from ldfec import analysis as A
from ldfec.sim import Scenario, run

l, eps = 5, 0.1
pmf = A.busy_time_pmf(l, eps)
rep = run(Scenario(CodeParams.stream(l), IidChannel(eps), N=l * 3_600_000, ideal_recovery=True, seeds=[2024]))
h = rep.busy_pmf()

print(f"l={l}, eps={eps}: {rep.busy_periods} busy periods simulated\n")
print(" s   analytic    simulated")
for s in range(8):
    sim = h[s] if s < len(h) else 0.0
    print(f"{s:2d}  {pmf[s]:.6f}   {sim:.6f}")
n = max(len(h), len(pmf.probs))
tv = 0.5 * np.abs(np.pad(h, (0, n - len(h))) - np.pad(pmf.probs, (0, n - len(pmf.probs)))).sum()
print(f"\ntotal variation distance: {tv:.5f}")

m = A.busy_time_moments(l, eps)
print(f"E(S) = {m.E_S:.5f}, delay bound = {A.delay_upper_bound(l, eps):.4f}, simulated = {rep.delay_per_slot:.4f}")
