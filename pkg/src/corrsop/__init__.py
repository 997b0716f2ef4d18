"""Secrecy outage probability of correlated multi-antenna Rayleigh wiretap channels."""
__version__ = "0.1.0"
