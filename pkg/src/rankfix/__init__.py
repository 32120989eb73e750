"""Verification toolkit for Gaussian-word fixed-point arguments in SL3 and Sp4."""

__version__ = "0.1.0"
