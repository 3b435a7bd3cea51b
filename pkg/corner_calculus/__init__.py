"""
Corner Calculus
---------------
Exact symbolic engine for local models of manifolds with corners: b-maps, p-clean
arrangements of affine p-submanifolds, iterated real blow-up with chart atlases, and
generalized (stretched) products with their multidiagonals and Lie algebroids.
"""

__version__ = "0.4.0"
