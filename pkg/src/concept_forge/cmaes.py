"""(mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation.

Standard formulation with positive recombination weights, rank-one and
rank-mu covariance updates, and the stalled-path indicator ``h_sigma``.
Minimizes; callers negate objectives they want to maximize.
"""
from __future__ import annotations

import math

import numpy as np


class CMAESError(RuntimeError):
    pass


class CMAES:
    """Ask/tell CMA-ES driven by an explicit ``numpy.random.Generator``.

    Parameters
    ----------
    mean : array_like
        Initial distribution mean.
    sigma : float
        Initial step size.
    popsize : int
        Offspring per generation (lambda).
    rng : numpy.random.Generator
        Source of all randomness, so runs are reproducible.
    """

    def __init__(self, mean, sigma: float, popsize: int, rng: np.random.Generator):
        mean = np.array(mean, dtype=np.float64).ravel()
        n = mean.shape[0]
        if n == 0:
            raise CMAESError("search space has dimension zero")
        if not np.all(np.isfinite(mean)):
            raise CMAESError("initial mean is not finite")
        if not (sigma > 0 and math.isfinite(sigma)):
            raise CMAESError(f"initial step size must be positive and finite, got {sigma}")
        if popsize < 2:
            raise CMAESError("population must hold at least two individuals")
        self.n = n
        self.lam = int(popsize)
        self.mu = self.lam // 2
        w = math.log((self.lam + 1) / 2) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n ** 2))

        self.rng = rng
        self.mean = mean
        self.sigma = float(sigma)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.generation = 0
        self._y = None

    def ask(self) -> np.ndarray:
        """Sample ``lam`` candidates, one per row."""
        z = self.rng.standard_normal((self.lam, self.n))
        self._y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * self._y

    def tell(self, solutions: np.ndarray, fitness, tiebreak=None) -> None:
        """Update the distribution from the candidates of the last :meth:`ask`.

        ``tiebreak`` (lower is better) only orders candidates whose fitness is
        exactly equal.
        """
        if self._y is None:
            raise CMAESError("tell() called before ask()")
        fitness = np.asarray(fitness, dtype=np.float64)
        if fitness.shape != (self.lam,):
            raise CMAESError(f"expected {self.lam} fitness values, got {fitness.shape}")
        # stable sorts keep remaining ties in sampling order, so runs are reproducible
        if tiebreak is None:
            order = np.argsort(fitness, kind="stable")[: self.mu]
        else:
            order = np.lexsort((np.asarray(tiebreak, dtype=np.float64), fitness))[: self.mu]
        y_sel = self._y[order]
        y_w = self.weights @ y_sel
        self.mean = self.mean + self.sigma * y_w

        inv_sqrt = (self.B / self.D) @ self.B.T
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (inv_sqrt @ y_w)
        self.generation += 1
        ps_norm = float(np.linalg.norm(self.ps))
        hsig = ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) / self.chi_n < 1.4 + 2 / (self.n + 1)
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w

        rank_mu = (y_sel.T * self.weights) @ y_sel
        self.C = ((1 - self.c1 - self.cmu + (1 - hsig) * self.c1 * self.cc * (2 - self.cc)) * self.C
                  + self.c1 * np.outer(self.pc, self.pc)
                  + self.cmu * rank_mu)
        self.sigma *= math.exp(min(1.0, (self.cs / self.damps) * (ps_norm / self.chi_n - 1)))

        self.C = (self.C + self.C.T) / 2
        evals, self.B = np.linalg.eigh(self.C)
        if not np.all(np.isfinite(evals)):
            raise CMAESError("covariance matrix became non-finite")
        self.D = np.sqrt(np.maximum(evals, 1e-30))
        self._y = None

    @property
    def max_step(self) -> float:
        return self.sigma * float(self.D.max())
