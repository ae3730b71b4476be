"""catsweep: desk-scale numerics for catenoid estimates and sweepout constructions."""

__version__ = "0.1.0"
