"""Terminal metrics (NMAC, NMSD, Price of Choices), the expected-cardinality
recurrence predictor for the randomized algorithm, and summary statistics.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, fields

from .model import InvalidParameterError, SlotState


class SapNonzeroError(ValueError):
    """Price of Choices is only defined for runs with all SAP = 0."""


class ZeroAggregateError(ValueError):
    """A PoC ratio against an empty terminal aggregate is meaningless."""


class TooFewSamplesError(ValueError):
    """Confidence intervals need at least two samples."""


def nmac(final: SlotState, n: int) -> float:
    """Normalized aggregate cardinality of one trial: sum |O_i| / (m*n)."""
    m = len(final.sets)
    return sum(s.mask.bit_count() for s in final.sets) / (m * n)


def nmsd(final: SlotState, n: int) -> float:
    """Normalized expensive-link downloads of one trial: sum c_i / (m*n)."""
    m = len(final.sets)
    return sum(final.downloads) / (m * n)


def price_of_choices(alpha, final_aggregate, sap=0.0) -> float:
    """alpha / terminal aggregate; alpha is alpha_star for the exact ratio or
    aggregate_upper_bound for the certified over-estimate (bound >= alpha*).

    Only defined when every node's SAP was 0 for the whole run; pass the
    run's sap (scalar or per-node values) so that misuse raises.
    """
    values = sap if isinstance(sap, (list, tuple)) else (sap,)
    if any(v != 0 for v in values):
        raise SapNonzeroError(
            "price of choices is undefined when any node downloads (sap > 0)"
        )
    if final_aggregate <= 0:
        raise ZeroAggregateError("terminal aggregate must be positive")
    return alpha / final_aggregate


def expected_cardinality_step(e: float, m: int, n: int) -> float:
    """One step of the mean-cardinality recurrence for the randomized
    algorithm: a node pairs with a given GT partner with probability
    1/(m-1)^2, gains n-E with relative weight (1 - E/n), and the pairing
    fails only on identical sets, with probability generalized from
    1/C(n, E) via Gamma.  Computed with log-Gamma differences so large n
    cannot overflow."""
    if e >= n:
        return float(n)
    log_inv_binom = (
        math.lgamma(e + 1) + math.lgamma(n - e + 1) - math.lgamma(n + 1)
    )
    return e + (e / (m - 1) ** 2) * (1 - e / n) * (1 - math.exp(log_inv_binom))


def predict_expected_cardinality(m: int, n: int, k: int, epochs: int) -> list[float]:
    """E(x_1) = k, then the recurrence; non-decreasing and bounded by n."""
    if m < 2:
        raise InvalidParameterError(f"need m >= 2, got {m}")
    if not 1 <= k <= n - 1:
        raise InvalidParameterError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if epochs < 1:
        raise InvalidParameterError(f"epochs must be >= 1, got {epochs}")
    out = [float(k)]
    for _ in range(epochs - 1):
        out.append(expected_cardinality_step(out[-1], m, n))
    return out


_Z = {0.90: 1.6449, 0.95: 1.9600, 0.99: 2.5758}


def confidence_interval(samples, level: float = 0.95) -> tuple[float, float]:
    """(mean, z * s / sqrt(N)) with s the sample standard deviation."""
    if level not in _Z:
        raise InvalidParameterError(f"supported levels: {sorted(_Z)}, got {level}")
    values = [float(x) for x in samples]
    if len(values) < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {len(values)}")
    mean = statistics.fmean(values)
    half = _Z[level] * statistics.stdev(values) / math.sqrt(len(values))
    return mean, half


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo run's outputs; field order is the CSV column order."""

    scenario_id: str
    algorithm: str
    m: int
    n: int
    k: int
    sap: float
    pef: float
    trial: int
    seed: int
    r_end: int
    truncated: bool
    aggregate: int
    downloads: int
    nmac: float
    nmsd: float
    poc_exact: float | None
    poc_bound: float | None


CSV_COLUMNS = tuple(f.name for f in fields(TrialRecord))
