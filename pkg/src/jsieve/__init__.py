"""Blowup trees at infinity and the filters a Jacobian counterexample must pass."""
__version__ = "0.1.0"
