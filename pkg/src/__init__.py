"""
collide-pbe
Deterministic solver for coagulation with collisional breakage.
"""

__version__ = "0.1.0"
