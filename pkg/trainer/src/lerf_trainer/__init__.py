"""Training and export toolchain for learned-resampling LUT banks."""

__version__ = "0.1.0"
