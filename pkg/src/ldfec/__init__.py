"""Low-delay streaming erasure codes: codec, channels, analysis and simulation."""

from .channel import GilbertElliottChannel, IidChannel
from .codec import BlockEncoder, CodeParams, Decoder, Packet, SlidingEncoder, encode_block, encode_group, encode_stream
from .gf import GF2m, field, solve

__version__ = "0.1.0"
