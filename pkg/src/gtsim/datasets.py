"""LIBSVM-format parsing and uniform splitting across agents.

The sparse text format is one sample per line: a label followed by
``index:value`` pairs with strictly increasing 1-based indices. Labels are
normalized to {+1, -1} (0/1 sources map 0 to -1). Indices are converted to
0-based internally; the feature dimension is the corpus-wide max index so all
agents share one model dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import LogisticEnsemble

__all__ = [
    "ParseError",
    "LabeledDataset",
    "parse_libsvm",
    "load_libsvm",
    "to_text",
    "split_uniform",
    "maxabs_scale",
    "to_logistic_ensemble",
]


class ParseError(ValueError):
    """Malformed LIBSVM input; carries the 1-based source line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class LabeledDataset:
    """Sparse labeled rows: list of (label, {feature index: value}), 0-based."""

    rows: tuple
    d: int

    @property
    def m(self) -> int:
        return len(self.rows)


def _parse_label(token: str, line_no: int) -> int:
    try:
        val = float(token)
    except ValueError:
        raise ParseError(line_no, f"bad label {token!r}") from None
    if val == 1.0:
        return 1
    if val == -1.0 or val == 0.0:
        return -1
    raise ParseError(line_no, f"label must be one of -1, 0, +1, got {token!r}")


def parse_libsvm(source, d: int | None = None) -> LabeledDataset:
    """Parse LIBSVM text (a string or an iterable of lines).

    Blank lines are skipped and a ``#`` comment suffix is ignored. Malformed
    pairs, non-numeric values, and non-increasing indices raise
    :class:`ParseError` with the offending line number. ``d`` overrides the
    inferred feature dimension (must cover every index seen).
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    rows = []
    max_idx = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label = _parse_label(tokens[0], line_no)
        feats = {}
        prev_idx = 0
        for tok in tokens[1:]:
            if ":" not in tok:
                raise ParseError(line_no, f"malformed index:value pair {tok!r}")
            idx_s, val_s = tok.split(":", 1)
            try:
                idx = int(idx_s)
            except ValueError:
                raise ParseError(line_no, f"non-integer feature index {idx_s!r}") from None
            try:
                val = float(val_s)
            except ValueError:
                raise ParseError(line_no, f"non-numeric feature value {val_s!r}") from None
            if idx < 1:
                raise ParseError(line_no, f"feature indices are 1-based, got {idx}")
            if idx <= prev_idx:
                raise ParseError(line_no, f"indices must be strictly increasing, got {idx} after {prev_idx}")
            feats[idx - 1] = val
            prev_idx = idx
            max_idx = max(max_idx, idx)
        rows.append((label, feats))
    if d is None:
        d = max_idx
    elif d < max_idx:
        raise ParseError(0, f"d override {d} smaller than max feature index {max_idx}")
    return LabeledDataset(rows=tuple(rows), d=d)


def load_libsvm(path, d: int | None = None) -> LabeledDataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, d=d)


def to_text(ds: LabeledDataset) -> str:
    """Serialize back to canonical LIBSVM text (round-trips with parse)."""
    lines = []
    for label, feats in ds.rows:
        parts = ["+1" if label > 0 else "-1"]
        for idx in sorted(feats):
            parts.append(f"{idx + 1}:{feats[idx]!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def split_uniform(ds: LabeledDataset, n: int, seed: int = 0):
    """Split into n near-equal parts: seeded permutation, then contiguous chunks.

    The first ``m mod n`` agents receive one extra sample; the union of the
    outputs equals the input multiset.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    if n > ds.m:
        raise ValueError(f"too few samples: cannot split {ds.m} rows across {n} agents")
    perm = np.random.default_rng(seed).permutation(ds.m)
    base, extra = divmod(ds.m, n)
    parts = []
    pos = 0
    for i in range(n):
        size = base + (1 if i < extra else 0)
        chunk = perm[pos:pos + size]
        parts.append(LabeledDataset(rows=tuple(ds.rows[j] for j in chunk), d=ds.d))
        pos += size
    return parts


def _densify(ds: LabeledDataset):
    h = np.zeros((ds.m, ds.d))
    y = np.empty(ds.m)
    for r, (label, feats) in enumerate(ds.rows):
        y[r] = label
        for idx, val in feats.items():
            h[r, idx] = val
    return h, y


def maxabs_scale(ds: LabeledDataset) -> LabeledDataset:
    """Optional per-coordinate max-abs feature scaling (off by default)."""
    scale = np.zeros(ds.d)
    for _, feats in ds.rows:
        for idx, val in feats.items():
            scale[idx] = max(scale[idx], abs(val))
    scale[scale == 0.0] = 1.0
    rows = tuple(
        (label, {idx: val / scale[idx] for idx, val in feats.items()})
        for label, feats in ds.rows
    )
    return LabeledDataset(rows=rows, d=ds.d)


def to_logistic_ensemble(parts, eta: float = 0.0, d: int | None = None) -> LogisticEnsemble:
    """Densify per-agent datasets into a logistic cost ensemble."""
    if d is None:
        d = max(p.d for p in parts)
    feats, labels = [], []
    for p in parts:
        h, y = _densify(LabeledDataset(rows=p.rows, d=d))
        feats.append(h)
        labels.append(y)
    return LogisticEnsemble(feats, labels, eta=eta)
