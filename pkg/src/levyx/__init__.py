"""Transformations of Laplace exponents of spectrally one-sided Levy processes
and the objects built from them: scale functions, exponential functionals,
positive self-similar Markov processes and Monte Carlo oracles."""

__version__ = "0.1.0"
