"""
Per-context censored ridge regression and the delayed LinUCB index.

The design matrix V grows at pull time; the response vector G only grows when
a reward comes back within the cut-off window. Solves go through a Cholesky
factorisation of V, never an explicit inverse.
"""

import logging
import math
from collections import deque
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)


class ContextRegressor:
    """
    Ridge estimator of one context's parameter vector.

    Attributes:
        context: Context index j
        dim: Feature dimension d
        lam: Ridge parameter lambda > 0
        window: Cut-off m; the last floor(m) pulled feature vectors are kept
        V: d x d design matrix, lambda*I + sum f f^T
        G: d-vector, sum of in-window rewards times features
        pull_count: t_j, number of pulls made in this context
        version: Bumped on every state change (lets callers cache scores)

    Example:
        reg = ContextRegressor(context=0, dim=5, lam=1.0, window=500)
        reg.record_pull(f)
        reg.record_feedback(f, reward, within_cutoff=True)
        gamma = reg.index(f, delta=0.05)
    """

    def __init__(self, context: int, dim: int, lam: float = 1.0, window: float = 500):
        if not lam > 0:
            raise InvalidParameterError(f"lambda: must be > 0, got {lam}")
        self.context = context
        self.dim = dim
        self.lam = float(lam)
        self.window = window
        self.V = self.lam * np.eye(dim)
        self.G = np.zeros(dim)
        self.pull_count = 0
        self.version = 0
        maxlen = None if math.isinf(window) else max(int(window), 0)
        self.recent_pulls: Deque[np.ndarray] = deque(maxlen=maxlen)
        # distinct vectors in the window and how often each occurs
        self._window_rows: Dict[bytes, Tuple[np.ndarray, int]] = {}
        self._factor = None
        self._factor_version = -1

    def _check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.dim,):
            raise InvalidParameterError(
                f"features: expected dimension {self.dim}, got shape {f.shape}"
            )
        return f

    def _cholesky(self):
        if self._factor_version != self.version:
            self._factor = cho_factor(self.V, lower=True)
            self._factor_version = self.version
        return self._factor

    def record_pull(self, f: np.ndarray) -> "ContextRegressor":
        f = self._check(f)
        self.V += np.outer(f, f)
        if self.recent_pulls.maxlen != 0:
            if len(self.recent_pulls) == self.recent_pulls.maxlen:
                self._count_window_row(self.recent_pulls[0], -1)
            self.recent_pulls.append(f)
            self._count_window_row(f, 1)
        self.pull_count += 1
        self.version += 1
        return self

    def record_feedback(
        self, f: np.ndarray, reward: float, within_cutoff: bool
    ) -> "ContextRegressor":
        """Add reward*f to G if it returned within the cut-off; a censored reward counts as zero."""
        if not within_cutoff or reward == 0:
            return self
        self.G += reward * self._check(f)
        self.version += 1
        return self

    def theta_hat(self) -> np.ndarray:
        return cho_solve(self._cholesky(), self.G)

    def inverse_norms(self, F: np.ndarray) -> np.ndarray:
        """||x||_{V^-1} for every row x of F."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if F.shape[0] == 0:
            return np.zeros(0)
        solved = cho_solve(self._cholesky(), F.T)
        return np.sqrt(np.maximum(np.einsum("ij,ji->i", F, solved), 0.0))

    def confidence_width(self, delta: float) -> float:
        """f_{t,delta} = sqrt(lam) + sqrt(2 ln(1/delta) + d ln((d*lam + t_j) / (d*lam)))."""
        if not 0 < delta < 1:
            raise InvalidParameterError(f"delta: must lie in (0, 1), got {delta}")
        d_lam = self.dim * self.lam
        growth = math.log((d_lam + self.pull_count) / d_lam)
        inner = 2.0 * math.log(1.0 / delta) + self.dim * growth
        return math.sqrt(self.lam) + math.sqrt(inner)

    def _count_window_row(self, f: np.ndarray, step: int) -> None:
        key = f.tobytes()
        row, count = self._window_rows.get(key, (f, 0))
        if count + step <= 0:
            self._window_rows.pop(key, None)
        else:
            self._window_rows[key] = (row, count + step)

    def window_penalty(self) -> float:
        """Sum of ||f'||_{V^-1} over the recent pulls, evaluated with the current V."""
        if not self._window_rows:
            return 0.0
        rows, counts = zip(*self._window_rows.values())
        norms = self.inverse_norms(np.vstack(rows))
        return float(np.dot(np.asarray(counts, dtype=float), norms))

    def index_all(self, F: np.ndarray, delta: float) -> np.ndarray:
        """Delayed LinUCB index gamma for every row of F."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        exploration = 2.0 * self.confidence_width(delta) + self.window_penalty()
        return F @ self.theta_hat() + exploration * self.inverse_norms(F)

    def index(self, f: np.ndarray, delta: float) -> float:
        return float(self.index_all(self._check(f)[None, :], delta)[0])


def record_pull(reg: ContextRegressor, f: np.ndarray) -> ContextRegressor:
    return reg.record_pull(f)


def record_feedback(
    reg: ContextRegressor, f: np.ndarray, reward: float, within_cutoff: bool
) -> ContextRegressor:
    return reg.record_feedback(f, reward, within_cutoff)


def theta_hat(reg: ContextRegressor) -> np.ndarray:
    return reg.theta_hat()


def index(reg: ContextRegressor, f: np.ndarray, delta: float) -> float:
    return reg.index(f, delta)


def index_all(reg: ContextRegressor, F: np.ndarray, delta: float) -> np.ndarray:
    return reg.index_all(F, delta)


def regressors_for(
    n_contexts: int, dim: int, lam: float, window: float
) -> List[ContextRegressor]:
    """One independent regressor per context class."""
    logger.debug("Building %d regressors (d=%d, lambda=%s)", n_contexts, dim, lam)
    return [ContextRegressor(j, dim, lam=lam, window=window) for j in range(n_contexts)]


def estimation_error(reg: ContextRegressor, theta: Optional[np.ndarray]) -> float:
    """||theta_hat - theta||_2, or NaN when the truth is unknown."""
    if theta is None:
        return math.nan
    return float(np.linalg.norm(reg.theta_hat() - theta))
