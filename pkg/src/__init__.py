"""segregation-lab: numerical laboratory for strongly competing half-Laplacian systems."""

__version__ = "0.1.0"
