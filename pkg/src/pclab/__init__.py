"""pclab: a numerical laboratory for zeta-zero statistics and explicit prime formulas."""

__version__ = "0.1.0"
