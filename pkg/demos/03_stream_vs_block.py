"""Delay and loss at rate 0.8: sliding-window stream code against block codes.

Longer blocks lose fewer packets but make every packet wait for the whole
block; the stream code delivers everything with delay comparable to the
shortest block.
"""

from ldfec import CodeParams, IidChannel
from ldfec.sim import Scenario, run

eps = 0.1
codes = [("stream l=5", CodeParams.stream(5))] + [
    (f"block ({k * 5 // 4},{k})", CodeParams.block(k * 5 // 4, k)) for k in (4, 16, 64)
]
print(f"{'code':14} {'mean delay':>11} {'loss rate':>10}")
for name, code in codes:
    rep = run(Scenario(code, IidChannel(eps), N=200_000, seeds=[7]))
    print(f"{name:14} {rep.mean_delay:11.3f} {rep.per:10.4f}")
