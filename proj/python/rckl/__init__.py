"""Kernel learning from relative-comparison triplets.

Thin wrapper around the compiled extension: triplet-set utilities (counting,
transitive closure, conflict detection, the adversarial ordering), dense PSD
kernel operations, STE/GNMDS losses with gradients, the projected-gradient
solver, and the synthetic-data generators.
"""

from rckl._rckl import *  # noqa: F401,F403
from rckl._rckl import __doc__  # noqa: F401
