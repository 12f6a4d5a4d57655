"""odtshift: AC-Stark shifts, trap potentials and absorption-imaging
corrections for alkali atoms in a focused-Gaussian optical dipole trap."""

__version__ = "0.1.0"
