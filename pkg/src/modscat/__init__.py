"""Modified scattering for a cubic NLS with the potential ``2/(1+x^2)``."""

__version__ = "0.1.0"
