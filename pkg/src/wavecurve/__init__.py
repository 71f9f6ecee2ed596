"""Near-field channel synthesis and estimation under wavefront anisotropy."""

__version__ = "0.1.0"
