"""Exception types raised by spectral_clt."""


class ConfigurationError(ValueError):
    """Invalid process specification or experiment configuration."""


class MarkovSpecError(ConfigurationError):
    """A Markov chain specification violates one of its invariants.

    ``invariant`` names the violated property: ``"stochastic"``,
    ``"stationary"``, ``"reversible"``, ``"centered"`` or ``"ergodic"``.
    """

    def __init__(self, invariant, message):
        super().__init__(message)
        self.invariant = invariant
