"""Constellation shaping toolkit for OFDM joint sensing and communication links."""

__version__ = "0.1.0"
