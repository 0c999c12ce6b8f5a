"""Finite-alphabet PMFs, row-stochastic channels, and their scalar coefficients.

A channel is an ``n x m`` row-stochastic matrix whose rows are conditional
PMFs over a common output alphabet.  This module provides the four scalar
coefficients attached to such a matrix (the column-minimum mass ``tau``, the
column-maximum mass ``tau_max``, the column-second-largest mass ``tau_max2``,
and the Dobrushin total-variation coefficient ``eta_tv``), the extremal trace
characterizations of ``tau`` and ``tau_max``, the minorization split
``W_ij = alpha * mu_j + (1 - alpha) * residual_ij``, the equivalent
erasure-channel degradation, and channel algebra (composition, Kronecker
product).

All values are immutable after construction and every operation is a pure
function, so everything here can be shared freely across threads.
Alphabets are index sets ``0..m-1``; labels are cosmetic only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import AlphabetMismatchError, DegradationError, ValidationError

# Input validation absorbs text-format rounding; reconstruction identities
# hold at double precision on desk-scale matrices.
VALIDATION_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-12


def _as_prob_vector(values, *, what: str = "pmf") -> np.ndarray:
    """Coerce to a 1-D probability vector, normalized exactly."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError(f"{what} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    if arr.min() < -RECONSTRUCTION_TOL:
        raise ValidationError(f"{what} has a negative entry: {arr.min()!r}")
    arr = np.maximum(arr, 0.0)
    total = float(arr.sum())
    if abs(total - 1.0) > VALIDATION_TOL:
        raise ValidationError(f"{what} entries sum to {total!r}, not 1 within {VALIDATION_TOL}")
    arr = arr / total
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """A probability vector on a finite alphabet of size ``m``.

    Entries are nonnegative and sum to one; the constructor renormalizes
    exactly after checking the sum is within ``1e-9`` of one.
    """

    probs: np.ndarray
    labels: tuple[str, ...] | None = None

    def __init__(self, probs, labels: Sequence[str] | None = None):
        arr = _as_prob_vector(probs)
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != arr.size:
                raise ValidationError("labels length does not match alphabet size")
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.size

    def to_list(self) -> list[float]:
        return [float(p) for p in self.probs]


@dataclass(frozen=True, eq=False)
class Channel:
    """An ``n x m`` row-stochastic matrix; rows are conditional PMFs."""

    matrix: np.ndarray
    input_labels: tuple[str, ...] | None = None
    output_labels: tuple[str, ...] | None = None

    def __init__(self, rows, input_labels=None, output_labels=None):
        if isinstance(rows, Channel):
            mat = rows.matrix
        elif len(rows) and isinstance(rows[0], Pmf):
            sizes = {r.size for r in rows}
            if len(sizes) != 1:
                raise ValidationError("channel rows must share one output alphabet")
            mat = np.stack([r.probs for r in rows])
        else:
            mat = np.asarray(rows, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ValidationError("channel must be a nonempty 2-D matrix")
        mat = np.stack([_as_prob_vector(row, what=f"channel row {i}") for i, row in enumerate(mat)])
        mat.setflags(write=False)
        if input_labels is not None:
            input_labels = tuple(str(s) for s in input_labels)
            if len(input_labels) != mat.shape[0]:
                raise ValidationError("input_labels length does not match input count")
        if output_labels is not None:
            output_labels = tuple(str(s) for s in output_labels)
            if len(output_labels) != mat.shape[1]:
                raise ValidationError("output_labels length does not match alphabet size")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "input_labels", input_labels)
        object.__setattr__(self, "output_labels", output_labels)

    @property
    def n(self) -> int:
        """Number of inputs (rows)."""
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        """Output alphabet size (columns)."""
        return int(self.matrix.shape[1])

    @property
    def rows(self) -> tuple[Pmf, ...]:
        return tuple(Pmf(row, self.output_labels) for row in self.matrix)

    # -- serialization ----------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "Channel":
        """Parse ``{"rows": [[...], ...], "input_labels"?, "output_labels"?}``."""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid channel JSON: {exc}") from exc
        if not isinstance(obj, dict) or "rows" not in obj:
            raise ValidationError('channel JSON must be an object with a "rows" key')
        rows = obj["rows"]
        _reject_negative_text_entries(rows)
        return cls(rows, obj.get("input_labels"), obj.get("output_labels"))

    @classmethod
    def from_csv(cls, text: str) -> "Channel":
        """Parse one comma-separated row per line; an optional header is discarded."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValidationError("empty channel CSV")
        rows = []
        for idx, line in enumerate(lines):
            fields = [f.strip() for f in line.split(",")]
            try:
                row = [float(f) for f in fields]
            except ValueError:
                if idx == 0:
                    continue  # header line
                raise ValidationError(f"non-numeric CSV entry on line {idx + 1}")
            rows.append(row)
        if not rows:
            raise ValidationError("channel CSV contains no numeric rows")
        if len({len(r) for r in rows}) != 1:
            raise ValidationError("channel CSV rows have inconsistent lengths")
        _reject_negative_text_entries(rows)
        return cls(rows)

    def to_dict(self) -> dict:
        out: dict = {"rows": [[float(v) for v in row] for row in self.matrix]}
        if self.input_labels is not None:
            out["input_labels"] = list(self.input_labels)
        if self.output_labels is not None:
            out["output_labels"] = list(self.output_labels)
        return out


def _reject_negative_text_entries(rows) -> None:
    # Parsers are strict: any negative entry is rejected outright.
    for row in rows:
        for v in row:
            if float(v) < 0:
                raise ValidationError(f"negative entry {v!r} in parsed channel")


def as_channel(obj) -> Channel:
    """Wrap a matrix-like object (or pass a Channel through)."""
    return obj if isinstance(obj, Channel) else Channel(obj)


def stack_pmfs(pmfs: Iterable) -> Channel:
    """Stack PMFs (or raw vectors) as the rows of a channel."""
    rows = [p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=np.float64) for p in pmfs]
    if not rows:
        raise ValidationError("no PMFs given")
    if any(r.shape != rows[0].shape or r.ndim != 1 for r in rows):
        raise AlphabetMismatchError("PMFs must share one alphabet")
    return Channel(np.stack(rows))


# ---------------------------------------------------------------------------
# Scalar coefficients
# ---------------------------------------------------------------------------


def doeblin(channel) -> float:
    """Doeblin coefficient: the total column-minimum mass, in [0, 1]."""
    W = as_channel(channel).matrix
    return float(W.min(axis=0).sum())


def max_doeblin(channel) -> float:
    """Max-Doeblin coefficient: the total column-maximum mass, in [1, n]."""
    W = as_channel(channel).matrix
    return float(W.max(axis=0).sum())


def max2_doeblin(channel) -> float:
    """Total column second-largest mass.

    Where several rows tie for a column's maximum, the second-largest value
    equals that maximum.  Undefined for a single row.
    """
    W = as_channel(channel).matrix
    _require_multiway(W, "max2_doeblin")
    ordered = np.sort(W, axis=0)  # ascending per column
    return float(ordered[-2, :].sum())


def dobrushin_tv(channel) -> float:
    """Dobrushin coefficient: the largest pairwise total-variation distance."""
    W = as_channel(channel).matrix
    _require_multiway(W, "dobrushin_tv")
    n = W.shape[0]
    best = 0.0
    for i in range(n):
        diffs = 0.5 * np.abs(W[i + 1 :] - W[i]).sum(axis=1)
        if diffs.size:
            best = max(best, float(diffs.max()))
    return best


def tv_distance(p, q) -> float:
    """Total variation distance between two PMFs (half the L1 distance)."""
    pa = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=np.float64)
    qa = q.probs if isinstance(q, Pmf) else np.asarray(q, dtype=np.float64)
    return float(0.5 * np.abs(pa - qa).sum())


def _require_multiway(W: np.ndarray, op: str) -> None:
    if W.shape[0] < 2:
        raise ValidationError(f"{op} requires at least two rows")


@dataclass(frozen=True)
class CoefficientReport:
    """The six scalar coefficients of one channel."""

    tau: float
    gamma: float
    tau_max: float
    gamma_max: float
    tau_max2: float
    eta_tv: float

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "gamma": self.gamma,
            "tau_max": self.tau_max,
            "gamma_max": self.gamma_max,
            "tau_max2": self.tau_max2,
            "eta_tv": self.eta_tv,
        }


def report(channel) -> CoefficientReport:
    """Compute all six coefficients of a channel with at least two rows."""
    ch = as_channel(channel)
    _require_multiway(ch.matrix, "report")
    tau = doeblin(ch)
    tmax = max_doeblin(ch)
    return CoefficientReport(
        tau=tau,
        gamma=1.0 - tau,
        tau_max=tmax,
        gamma_max=(tmax - 1.0) / (ch.n - 1),
        tau_max2=max2_doeblin(ch),
        eta_tv=dobrushin_tv(ch),
    )


# ---------------------------------------------------------------------------
# Trace characterizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceResult:
    value: float
    kernel: Channel  # deterministic m x n estimation kernel attaining the value


def _trace_extremum(channel, pick) -> TraceResult:
    ch = as_channel(channel)
    W = ch.matrix
    choice = pick(W, axis=0)  # smallest attaining index per column on ties
    P = np.zeros((ch.m, ch.n))
    P[np.arange(ch.m), choice] = 1.0
    value = float(W[choice, np.arange(ch.m)].sum())
    return TraceResult(value=value, kernel=Channel(P))


def min_trace(channel) -> TraceResult:
    """Minimum of Tr(P W) over row-stochastic ``m x n`` matrices P.

    The value is the Doeblin coefficient; the minimizer puts unit mass, in
    row j, on the smallest row index attaining the column-j minimum.
    """
    return _trace_extremum(channel, np.argmin)


def max_trace(channel) -> TraceResult:
    """Maximum of Tr(P W); dual to :func:`min_trace` with column maxima."""
    return _trace_extremum(channel, np.argmax)


# ---------------------------------------------------------------------------
# Minorization and erasure degradation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinorizationSplit:
    """Decomposition ``W_ij = alpha * mu_j + (1 - alpha) * residual_ij``.

    ``alpha`` is the Doeblin coefficient.  When ``alpha`` is 0 (``mu``
    undefined) or 1 (residual undefined) the undefined part is filled with
    uniform distributions and ``degenerate`` is set.
    """

    alpha: float
    mu: Pmf
    residual: Channel
    degenerate: bool = False


def minorization_split(channel) -> MinorizationSplit:
    ch = as_channel(channel)
    W = ch.matrix
    n, m = W.shape
    colmin = W.min(axis=0)
    alpha = float(colmin.sum())
    degenerate = False
    if alpha <= 0.0:
        mu = np.full(m, 1.0 / m)
        degenerate = True
    else:
        mu = colmin / alpha
    raw = W - colmin[None, :]
    shortfall = raw.sum(axis=1)  # each equals 1 - alpha exactly in real arithmetic
    if float(shortfall.max()) <= RECONSTRUCTION_TOL:
        residual = np.full((n, m), 1.0 / m)
        degenerate = True
    else:
        residual = np.maximum(raw, 0.0) / shortfall[:, None]
    return MinorizationSplit(
        alpha=alpha,
        mu=Pmf(mu),
        residual=Channel(residual),
        degenerate=degenerate,
    )


def erasure_channel(r: int, epsilon: float) -> Channel:
    """The ``r``-input erasure channel: keep the input w.p. ``1 - epsilon``,
    emit the erasure symbol (last column) w.p. ``epsilon``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError("erasure probability must lie in [0, 1]")
    E = np.hstack([(1.0 - epsilon) * np.eye(r), np.full((r, 1), epsilon)])
    return Channel(E)


def erasure_degradation(channel, epsilon: float) -> Channel:
    """A kernel P through which the epsilon-erasure channel reproduces W.

    Returns an ``(n+1) x m`` channel (rows: the n non-erased inputs, then
    the erasure symbol) with ``W = E_epsilon @ P`` entrywise.  Feasible
    exactly when ``epsilon <= doeblin(W)``; at equality the erasure row is
    the minorizing distribution.
    """
    ch = as_channel(channel)
    W = ch.matrix
    n, m = W.shape
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError("erasure probability must lie in [0, 1]")
    tau = doeblin(ch)
    if epsilon > tau + RECONSTRUCTION_TOL:
        raise DegradationError(
            f"no degradation at erasure rate {epsilon!r}: it exceeds the "
            f"Doeblin coefficient {tau!r}"
        )
    epsilon = min(epsilon, tau)
    if epsilon == 0.0:
        rows = np.vstack([W, np.full((1, m), 1.0 / m)])
        return Channel(rows)
    mu = W.min(axis=0) / tau
    if 1.0 - epsilon <= RECONSTRUCTION_TOL:
        # tau = epsilon = 1: all rows equal, the non-erased rows carry no mass.
        body = np.full((n, m), 1.0 / m)
    else:
        body = np.maximum(W - epsilon * mu[None, :], 0.0) / (1.0 - epsilon)
    return Channel(np.vstack([body, mu[None, :]]))


# ---------------------------------------------------------------------------
# Channel algebra
# ---------------------------------------------------------------------------


def compose(first, second) -> Channel:
    """Matrix product of channels (apply ``first``, then ``second``)."""
    V = as_channel(first).matrix
    W = as_channel(second).matrix
    if V.shape[1] != W.shape[0]:
        raise ValidationError(
            f"inner dimensions disagree: {V.shape[1]} outputs vs {W.shape[0]} inputs"
        )
    prod = V @ W
    # Rows already sum to one up to rounding; renormalize to absorb it.
    prod = prod / prod.sum(axis=1, keepdims=True)
    return Channel(prod)


def tensor(first, second) -> Channel:
    """Kronecker product; both coefficients multiply across it."""
    V = as_channel(first).matrix
    W = as_channel(second).matrix
    return Channel(np.kron(V, W))
