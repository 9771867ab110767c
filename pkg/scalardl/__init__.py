"""
Scalarized multi-objective decentralized training: agents minimize their own
losses blended with the coordinator's criteria, and the empirical behaviour is
checked against the convergence and drift bounds of the analysis.
"""

__version__ = "0.1.0"
