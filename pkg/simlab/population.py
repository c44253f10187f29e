import math

import numpy as np
from scipy import signal

from estimation.estimators import PopulationData


def gen_population(cfg, rng):
    """
    y_k = k + z_k for k = 1..N, with z_k = rho z_{k-1} + eps_k and
    eps_k ~ Normal(0, noise_sd).

    z_0 is drawn from the stationary law Normal(0, noise_sd / sqrt(1 - rho^2)),
    so the noise has no burn-in at the start of the list.
    """
    rho, sigma = cfg.ar_coefficient, cfg.noise_sd
    z0 = rng.normal(0.0, sigma / math.sqrt(1 - rho**2))
    eps = rng.normal(0.0, sigma, cfg.N)
    z, _ = signal.lfilter([1.0], [1.0, -rho], eps, zi=[rho * z0])
    return PopulationData(np.arange(1, cfg.N + 1) + z)
