"""Numerical verification of kink asymptotic stability hypotheses and Klein-Gordon simulation."""
__version__ = "0.1.0"
