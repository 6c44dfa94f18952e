"""Attachment scores and the feature-ablation report."""

import json
from dataclasses import dataclass, field

from .errors import DataError


@dataclass
class EvalResult:
    uas: float
    las: float
    tokens: int
    correct_heads: int
    correct_labeled: int
    per_relation: dict = field(default_factory=dict)


def score(gold, predicted, exclude_punct: bool = False, punct_tags=frozenset({"PUNCT", "CH"})) -> EvalResult:
    """Unlabeled/labeled attachment scores over aligned sentences.

    ``predicted`` holds one arc list per gold sentence (each arc a
    (head, dep, rel) record covering every token exactly once). Punctuation
    is excluded by gold POS tag only when the flag is set.
    """
    if len(gold) != len(predicted):
        raise DataError(
            f"gold has {len(gold)} sentences, predictions have {len(predicted)}"
        )
    total = heads = labeled = 0
    per_relation = {}
    for si, (sentence, arcs) in enumerate(zip(gold, predicted)):
        rows = [None] * len(sentence)
        for arc in arcs:
            if not 1 <= arc.dep <= len(sentence) or rows[arc.dep - 1] is not None:
                raise DataError(f"sentence {si + 1}: predictions misaligned with gold tokens")
            rows[arc.dep - 1] = arc
        if any(r is None for r in rows):
            raise DataError(f"sentence {si + 1}: predictions misaligned with gold tokens")
        for token, arc in zip(sentence, rows):
            if exclude_punct and token.pos in punct_tags:
                continue
            total += 1
            stats = per_relation.setdefault(token.deprel, [0, 0, 0])
            stats[0] += 1
            if arc.head == token.head:
                heads += 1
                stats[1] += 1
                if arc.rel == token.deprel:
                    labeled += 1
                    stats[2] += 1
    uas = 100.0 * heads / total if total else 0.0
    las = 100.0 * labeled / total if total else 0.0
    return EvalResult(uas, las, total, heads, labeled, per_relation)


def _normalize(results):
    """Accept config -> EvalResult or config -> {condition -> EvalResult}."""
    table = {}
    conditions = []
    for config, value in results.items():
        row = value if isinstance(value, dict) else {"test": value}
        table[config] = row
        for condition in row:
            if condition not in conditions:
                conditions.append(condition)
    return table, conditions


def ablation_records(results) -> list:
    """Machine-readable rows, one JSON-compatible record per cell."""
    table, _ = _normalize(results)
    records = []
    for config, row in table.items():
        for condition, result in row.items():
            records.append(
                {
                    "config": config,
                    "condition": condition,
                    "uas": round(result.uas, 2),
                    "las": round(result.las, 2),
                    "tokens": result.tokens,
                }
            )
    return records


def ablation_report(results) -> str:
    """Aligned text table: one row per feature configuration."""
    table, conditions = _normalize(results)
    if not conditions:
        conditions = ["test"]
    headers = ["model"]
    for condition in conditions:
        headers += [f"{condition} UAS%", f"{condition} LAS%"]
    rows = [headers]
    for config, row in table.items():
        cells = [config]
        for condition in conditions:
            result = row.get(condition)
            if result is None:
                cells += ["-", "-"]
            else:
                cells += [f"{result.uas:.2f}", f"{result.las:.2f}"]
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = []
    for ri, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if ri == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_records(results) -> str:
    return "\n".join(json.dumps(r, ensure_ascii=False) for r in ablation_records(results)) + "\n"
