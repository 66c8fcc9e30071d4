"""
DORAL-sim - Budgeted contextual bandits with delayed feedback

A simulation engine and benchmark harness for delay-oriented resource allocation.
"""

__version__ = "0.1.0"
