"""Error-correcting codes for networks with worst-case bit-flip errors."""

__version__ = "0.1.0"
