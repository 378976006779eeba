"""High-order shallow-water solver on the rotated cubed-sphere grid."""

__version__ = "0.1.0"
