"""
Route oscillation multipliers: how often one announcement is re-observed
within an hour.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import optimize, stats

from exceptions import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class OscillationModel:
    """
    Integer multiplier round(Y) clipped to [1, max_multiplier], Y lognormal.

    The lognormal parameters are solved so that the discrete multiplier
    (not Y) has the requested mean and standard deviation.
    """

    mean: float = 6.43
    std: float = 17.79
    max_multiplier: int = 500
    shape: str = 'lognormal'
    _pmf: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.shape != 'lognormal':
            raise ConfigError(f"unsupported oscillation shape '{self.shape}'")
        if self.mean < 1 or self.std < 0 or self.max_multiplier < 1:
            raise ConfigError(f"invalid oscillation parameters mean={self.mean} std={self.std}")

    @classmethod
    def from_dict(cls, config: Dict) -> "OscillationModel":
        return cls(
            mean=float(config.get('mean', 6.43)),
            std=float(config.get('std', 17.79)),
            max_multiplier=int(config.get('max_multiplier', 500)),
            shape=str(config.get('shape', 'lognormal')),
        )

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.max_multiplier + 1)

    def _discrete_pmf(self, mu: float, sigma: float) -> np.ndarray:
        edges = np.concatenate(([-np.inf], self.support[:-1] + 0.5, [np.inf]))
        cdf = stats.lognorm.cdf(np.clip(edges, 0, None), s=sigma, scale=np.exp(mu))
        return np.diff(cdf)

    def _moments(self, pmf: np.ndarray):
        m = float(np.dot(pmf, self.support))
        var = float(np.dot(pmf, (self.support - m) ** 2))
        return m, np.sqrt(max(var, 0.0))

    def calibrate(self) -> np.ndarray:
        """Solve the lognormal parameters and cache the multiplier pmf."""
        if self.std == 0:
            pmf = np.zeros(self.max_multiplier)
            pmf[min(max(int(round(self.mean)), 1), self.max_multiplier) - 1] = 1.0
            self._pmf = pmf
            return pmf
        sigma2 = np.log1p((self.std / self.mean) ** 2)
        start = np.array([np.log(self.mean) - sigma2 / 2, np.sqrt(sigma2)])

        def residuals(params):
            m, s = self._moments(self._discrete_pmf(params[0], params[1]))
            return [(m - self.mean) / self.mean, (s - self.std) / max(self.std, 1.0)]

        fit = optimize.least_squares(residuals, start, bounds=([-10.0, 1e-3], [10.0, 10.0]))
        pmf = self._discrete_pmf(*fit.x)
        pmf = pmf / pmf.sum()
        m, s = self._moments(pmf)
        if abs(m - self.mean) > 0.01 * self.mean:
            logger.warning("oscillation calibration off target: mean %.3f (wanted %.3f), std %.3f (wanted %.3f)",
                           m, self.mean, s, self.std)
        else:
            logger.debug("oscillation model mu=%.4f sigma=%.4f: mean %.3f std %.3f", fit.x[0], fit.x[1], m, s)
        self._pmf = pmf
        return pmf

    @property
    def pmf(self) -> np.ndarray:
        if self._pmf is None:
            self.calibrate()
        return self._pmf

    def moments(self):
        """Mean and standard deviation of the calibrated multiplier."""
        return self._moments(self.pmf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n multipliers by stratified inverse-transform sampling."""
        if n <= 0:
            return np.zeros(0, dtype=np.int64)
        u = (rng.permutation(n) + rng.random(n)) / n
        cdf = np.cumsum(self.pmf)
        cdf[-1] = 1.0
        return self.support[np.searchsorted(cdf, u, side='right').clip(max=self.max_multiplier - 1)]
