"""Bayes risks via the trace formula, and the min-/max-DeGroot distances.

For a prior over n hypotheses and an observation channel, the value of
observing the output is the drop in Bayes risk.  Scoring correct guesses
(identity loss, to be minimized) yields the min-DeGroot distance; scoring
errors (complement loss) yields the max-DeGroot distance.  For two
hypotheses both collapse to the classical DeGroot statistical information.
"""

from __future__ import annotations

import numpy as np

from .channel import Channel, Pmf, as_channel
from .exceptions import ValidationError


def identity_loss(n: int) -> np.ndarray:
    """Loss 1 for guessing the true state (the avoid-detection objective)."""
    return np.eye(n)


def complement_loss(n: int) -> np.ndarray:
    """Loss 1 for every wrong guess (the usual 0-1 loss)."""
    return np.ones((n, n)) - np.eye(n)


def _as_prior(prior, n: int) -> np.ndarray:
    lam = prior.probs if isinstance(prior, Pmf) else Pmf(prior).probs
    if lam.size != n:
        raise ValidationError(f"prior has {lam.size} states, channel has {n} inputs")
    return lam


def risk(prior, channel, loss, estimator) -> float:
    """Expected loss Tr(L' diag(prior) W P) of a randomized estimator P."""
    ch = as_channel(channel)
    est = as_channel(estimator)
    lam = _as_prior(prior, ch.n)
    L = np.asarray(loss, dtype=np.float64)
    if L.shape != (ch.n, ch.n):
        raise ValidationError(f"loss matrix must be {ch.n} x {ch.n}")
    if not np.all(np.isfinite(L)):
        raise ValidationError("loss matrix must be finite")
    if est.n != ch.m or est.m != ch.n:
        raise ValidationError(f"estimator must be {ch.m} x {ch.n}")
    return float(np.trace(L.T @ np.diag(lam) @ ch.matrix @ est.matrix))


def min_degroot(prior, channel) -> float:
    """Risk drop under the identity loss:
    min(prior) - sum_y min_i prior_i W_i(y)."""
    ch = as_channel(channel)
    _require_multiway(ch)
    lam = _as_prior(prior, ch.n)
    weighted = lam[:, None] * ch.matrix
    return float(lam.min() - weighted.min(axis=0).sum())


def max_degroot(prior, channel) -> float:
    """Risk drop under the complement loss:
    sum_y max_i prior_i W_i(y) - max(prior)."""
    ch = as_channel(channel)
    _require_multiway(ch)
    lam = _as_prior(prior, ch.n)
    weighted = lam[:, None] * ch.matrix
    return float(weighted.max(axis=0).sum() - lam.max())


def optimal_estimator(prior, channel, loss_kind: str = "identity") -> Channel:
    """Closed-form Bayes-optimal deterministic estimator.

    Identity loss: per output, guess the least likely posterior state.
    Complement loss: per output, guess the most likely posterior state.
    Smallest index wins ties.
    """
    ch = as_channel(channel)
    lam = _as_prior(prior, ch.n)
    weighted = lam[:, None] * ch.matrix
    if loss_kind == "identity":
        choice = np.argmin(weighted, axis=0)
    elif loss_kind == "complement":
        choice = np.argmax(weighted, axis=0)
    else:
        raise ValidationError('loss_kind must be "identity" or "complement"')
    P = np.zeros((ch.m, ch.n))
    P[np.arange(ch.m), choice] = 1.0
    return Channel(P)


def prior_risk(prior, n: int, loss_kind: str = "identity") -> float:
    """Bayes risk before any observation."""
    lam = _as_prior(prior, n)
    if loss_kind == "identity":
        return float(lam.min())
    if loss_kind == "complement":
        return float(1.0 - lam.max())
    raise ValidationError('loss_kind must be "identity" or "complement"')


def _require_multiway(ch) -> None:
    if ch.n < 2:
        raise ValidationError("DeGroot distances need at least two hypotheses")
