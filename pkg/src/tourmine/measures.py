"""Interest measures for sequential rules, with Klosgen as the canonical weight.

All probabilities are relative frequencies over sequences:
P(X) = |X|/n, P(Y) = |Y|/n, P(XY) = |X->Y|/n. The measures:

  confidence        P(XY)/P(X)
  added value       confidence - P(Y)
  Klosgen           sqrt(P(XY)) * added value
  lift              confidence / P(Y)
  certainty factor  AV/(1-P(Y)) for positive AV, AV/P(Y) for negative
  J-measure         P(X) * KL( P(Y|X) || P(Y) ) in bits
  cond. entropy     binary entropy of confidence, in bits

Ratios are computed as a single division of exact integer cross-products, so
each stored value is the correctly rounded double of its defining rational.
That makes scale invariance exact: multiplying all four counts by a constant
leaves every ratio-derived measure bit-identical.

Note the Klosgen value is structurally bounded: with relative supports,
|Klosgen| <= sqrt(s)*(1-s) maximized near 0.385, and it is exactly zero at
statistical independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rules import SequentialRule

MEASURE_NAMES = (
    "support",
    "confidence",
    "lift",
    "added_value",
    "klosgen",
    "certainty_factor",
    "j_measure",
    "conditional_entropy",
)

# Measures usable as movement-graph arc weights.
WEIGHT_MEASURES = ("klosgen", "support", "confidence", "lift")


@dataclass(frozen=True, slots=True)
class MeasureVector:
    support_rel: float
    support_count: int
    confidence: float
    lift: float
    added_value: float
    klosgen: float
    certainty_factor: float
    j_measure: float
    conditional_entropy: float

    def by_name(self, name: str) -> float:
        if name == "support":
            return self.support_rel
        if name not in MEASURE_NAMES:
            raise ValueError(f"unknown measure {name!r} (choose from {MEASURE_NAMES})")
        return getattr(self, name)


@dataclass(frozen=True, slots=True)
class MeasuredRule:
    rule: SequentialRule
    measures: MeasureVector


def compute_measures(rule: SequentialRule) -> MeasureVector:
    """Compute all eight measures for one rule."""
    r, x, y, n = rule.seq_count_rule, rule.seq_count_x, rule.seq_count_y, rule.n_sequences

    support_rel = r / n
    confidence = r / x
    lift = (r * n) / (x * y)
    added_value = (r * n - y * x) / (x * n)
    klosgen = math.sqrt(support_rel) * added_value

    if added_value == 0.0:
        certainty_factor = 0.0
    elif added_value > 0.0:
        # AV > 0 forces y < n, so the denominator is nonzero.
        certainty_factor = added_value * n / (n - y)
    else:
        certainty_factor = added_value * n / y

    # J-measure: terms with a zero coefficient vanish by the 0*log(.)=0
    # convention; a positive coefficient against a zero reference
    # probability diverges honestly to +inf (only possible when y == n).
    j = (r / n) * math.log2((r * n) / (x * y))
    if x > r:
        if y == n:
            j = math.inf
        else:
            j += ((x - r) / n) * math.log2(((x - r) * n) / ((n - y) * x))

    if r == x:
        cond_entropy = 0.0
    else:
        p = confidence
        cond_entropy = -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))

    return MeasureVector(
        support_rel=support_rel,
        support_count=r,
        confidence=confidence,
        lift=lift,
        added_value=added_value,
        klosgen=klosgen,
        certainty_factor=certainty_factor,
        j_measure=j,
        conditional_entropy=cond_entropy,
    )


def measure_rules(rules: list[SequentialRule]) -> list[MeasuredRule]:
    return [MeasuredRule(rule, compute_measures(rule)) for rule in rules]


def measure_table(
    measured: list[MeasuredRule], top_k: int, by: str = "klosgen"
) -> list[MeasuredRule]:
    """Top-k rules under the named measure, descending; ties break by (X, Y)."""
    if by not in MEASURE_NAMES:
        raise ValueError(f"unknown measure {by!r} (choose from {MEASURE_NAMES})")
    ranked = sorted(
        measured,
        key=lambda mr: (
            -mr.measures.by_name(by),
            mr.rule.antecedent,
            mr.rule.consequent,
        ),
    )
    return ranked[: max(top_k, 0)]


def format_table(rows: list[MeasuredRule]) -> str:
    """Render ranked rules with the standard comparison columns."""
    header = f"{'Rule':<40} {'Kl':>9} {'Supp':>8} {'Conf':>7} {'Lift':>7} {'CF':>7} {'J':>7} {'CE':>7}"
    lines = [header, "-" * len(header)]
    for mr in rows:
        m = mr.measures
        name = f"{mr.rule.antecedent} -> {mr.rule.consequent}"
        lines.append(
            f"{name:<40} {m.klosgen:>9.4f} {m.support_count:>8d} {m.confidence:>7.4f} "
            f"{m.lift:>7.4f} {m.certainty_factor:>7.4f} {m.j_measure:>7.4f} {m.conditional_entropy:>7.4f}"
        )
    return "\n".join(lines)


MEASURES_CSV_HEADER = [
    "X",
    "Y",
    "support_rel",
    "confidence",
    "lift",
    "added_value",
    "klosgen",
    "certainty_factor",
    "j_measure",
    "conditional_entropy",
]


def write_measures_csv(measured: list[MeasuredRule], path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MEASURES_CSV_HEADER)
        for mr in measured:
            m = mr.measures
            writer.writerow(
                [mr.rule.antecedent, mr.rule.consequent]
                + [
                    f"{v:.6f}"
                    for v in (
                        m.support_rel,
                        m.confidence,
                        m.lift,
                        m.added_value,
                        m.klosgen,
                        m.certainty_factor,
                        m.j_measure,
                        m.conditional_entropy,
                    )
                ]
            )


def read_measures_csv(path) -> list[dict]:
    """Rows as dicts with X, Y and float measure values."""
    import csv

    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            parsed: dict = {"X": row["X"], "Y": row["Y"]}
            for col in MEASURES_CSV_HEADER[2:]:
                parsed[col] = float(row[col])
            rows.append(parsed)
    return rows
