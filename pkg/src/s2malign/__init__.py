"""Signal-to-model alignment through a learned latent correlation space."""

__version__ = "0.1.0"
