"""AP schemes for kinetic chemotaxis models and their drift-diffusion limits."""

__version__ = "0.1.0"
