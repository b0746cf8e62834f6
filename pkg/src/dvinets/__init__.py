"""Bayesian D-vine copula models for ordinal, count and mixed-margin time series.

The package couples empirical margins to a stationary Markov-p D-vine copula
whose pair copulas are five-parameter mixtures of rotated Gumbels.  Discrete
margins are handled by augmenting the likelihood with latent uniforms on the
probability-integral boxes; the augmented posterior is estimated either by
stochastic-gradient variational Bayes (`dvinets.vbda`) or by an exact MCMC
data-augmentation sampler (`dvinets.mcmc`).
"""

__version__ = "0.1.0"

EPS_U = 1e-10
