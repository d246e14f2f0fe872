"""Finite-window simulation lab for invariant random graph structures.

Subpackages cover: window graph models and rooted-ball geometry, random
colourings and their expansion statistics, mass-transport identities,
percolation clusters with connection cost bounds, balanced partition
search, Poisson/Palm/Voronoi calculus on flat tori, and the bivariate
Gaussian orthant identity.  Everything stochastic is driven by derived
seeds so that identical inputs reproduce identical outputs byte for byte.
"""

__version__ = "0.1.0"
