"""Tactile thermography of prismatic tissue inclusions.

Simulates steady heat conduction in a compressed tissue block containing a
heat-generating prismatic tumor, reduces the surface temperature trace to a
compact Fourier signature, and learns the inclusion's base-shape order from
those signatures with an RBF interpolation network.
"""

__version__ = "0.1.0"
