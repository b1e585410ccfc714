"""Decide quasi-sure, strong and weak no-arbitrage on finite scenario trees with multiple priors."""

__version__ = "0.1.0"
