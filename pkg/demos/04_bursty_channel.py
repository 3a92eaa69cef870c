"""Same average loss, increasingly bursty: how the stream code's delay grows."""

from ldfec import CodeParams, GilbertElliottChannel, IidChannel
from ldfec.sim import Scenario, run

code = CodeParams.stream(10)
print(f"{'channel':24} {'mean delay':>10}  loss rate")
for ch in [IidChannel(0.05)] + [GilbertElliottChannel(0.05, b) for b in (1, 2, 4, 8)]:
    rep = run(Scenario(code, ch, N=500_000, ideal_recovery=True, seeds=[1], replications=2))
    name = f"iid eps={ch.epsilon}" if isinstance(ch, IidChannel) else f"bursty E(L)={ch.expected_burst:g}"
    print(f"{name:24} {rep.mean_delay:10.2f}  {rep.per:.4f}")
