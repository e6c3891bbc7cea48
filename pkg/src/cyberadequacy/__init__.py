"""Cyber-physical generation adequacy: attack graphs, COPT, LOLE and Monte Carlo."""
__version__ = "0.1.0"
