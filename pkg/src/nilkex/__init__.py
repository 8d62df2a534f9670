"""Nilpotent-group multiparty key exchange and its cryptanalysis."""

__version__ = "0.1.0"
