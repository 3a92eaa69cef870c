"""Walk through a single pause in in-order delivery.

Six information packets go out with l = 4, so a coded packet follows
every three.  Slots 2 and 4 are erased: the second information packet and
the first repair packet.  Nothing after u1 can be released until the
coded packet at slot 8 arrives, at which point five packets come out at
once.
"""

import numpy as np

from ldfec import CodeParams, encode_stream, field
from ldfec.codec import decoder_for

F = field(8)
params = CodeParams.stream(4)
info = F.random(np.random.default_rng(0), (6, 2))
packets = encode_stream(info, params, F, seed=1)
erased = {2, 4}

dec = decoder_for(params, F)
for p in packets:
    got = dec.ingest(p.slot, p, p.slot in erased)
    mark = "  x" if p.slot in erased else "   "
    released = ", ".join(f"u{d.index} (delay {d.delay})" for d in got)
    print(f"slot {p.slot}:{mark} {p!r:14} {released}")

bp = dec.busy[0]
print(f"\nbusy period opened at slot {bp.t_tilde}, closed at slot {bp.T}, spanning {bp.S} intervals")
print("recovered payloads match:", all(np.array_equal(dec.known[j], info[j - 1]) for j in range(1, 7)))
