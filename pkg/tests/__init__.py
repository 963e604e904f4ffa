"""
Test suite for the FiberSuperradiance package.

Unit tests for the model, the exact and Dicke solvers and the closed-form
analytics, plus end-to-end tests of the command-line front end.
"""

__version__ = "1.0.0"
