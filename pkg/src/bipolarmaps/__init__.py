"""Random bipolar-oriented planar maps with heavy-tailed face degrees.

Submodules: ``stepdist`` (step law), ``sewing`` (maps from move sequences),
``walks`` (lattice walks and exact laws), ``uibpm`` (infinite-volume map),
``canon`` (rooted-graph codes), ``levy`` (limit processes), ``stats``
(estimators and experiments), ``io`` and ``cli``.
"""

from .sewing import build_map, decode_map, validate_bipolar
from .stepdist import EDGE, EdgeMove, FaceMove, power_law_distribution

__version__ = "0.1.0"

__all__ = [
    "EDGE",
    "EdgeMove",
    "FaceMove",
    "power_law_distribution",
    "build_map",
    "decode_map",
    "validate_bipolar",
]
