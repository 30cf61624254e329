"""sl2forms: forms of SL(2) representations in dimension 4 over F_{p^m}."""

__all__ = ["__version__"]
__version__ = "0.1.0"
