"""Inverse local times of reflected diffusions at 0.

Modules: ``specfun`` (gamma and modified Bessel functions),
``subordinator`` (Laplace exponents, Levy densities, samplers and checks),
``diffusion`` (reflected Bessel-type simulation and local time),
``trace`` (Levy densities of subordinate Brownian motion), ``green``
(Green functions on an interval) and ``cli`` (the ``ilt-lab`` runner).
"""

__version__ = "0.1.0"

__all__ = ["specfun", "subordinator", "diffusion", "trace", "green", "cli", "__version__"]
