"""How small fields cause decoding failures, and what the bounds say about it.

The measured column counts coded packets that arrived but added nothing
(their row was dependent on what the decoder already had).  It tracks the
failure bound closely but is not the same quantity: one busy period that
fails to reach full rank on time can produce several such packets.
"""

from ldfec import CodeParams, IidChannel
from ldfec import analysis as A
from ldfec.sim import Scenario, run

l, eps = 5, 0.1
print(" bits  failure bound   non-innovative coded packets per slot")
for bits in (1, 2, 4, 8):
    Q = 2**bits
    bound = A.stream_failure_bound(l, eps, Q)
    rep = run(Scenario(CodeParams.stream(l), IidChannel(eps), N=50_000, field_bits=bits, seeds=[3]))
    print(f"{bits:5d}  {bound:.3e}     {rep.dependence_events / rep.n_slots:.3e}")

print("\nrank bounds for a 6-dimensional busy period:")
for Q in (2, 4, 256):
    lo, up = A.rank_bounds(6, Q)
    print(f"  Q={Q:3d}: {lo:.6f} <= P(full rank) <= {up:.6f}")
