"""Fashion-theme trend analytics over sentiment-scored short texts."""

__version__ = "0.1.0"

from ._accel import backend  # noqa: E402

__all__ = ["__version__", "backend"]
