"""Microcavity atom-chip toolkit.

Cavity optics figures of merit, chip thermal Green's functions, wire
magnetostatics and resonance-stabilization servo simulation, backed by the
C++ core in ``cavitychip._core``.
"""

from cavitychip._core import magnetics, optics, plant, servo, specfun, thermal

__all__ = ["specfun", "optics", "thermal", "magnetics", "plant", "servo"]
__version__ = "0.1.0"
