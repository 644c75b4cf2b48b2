"""Level 1: obscure PII columns (drop, mask, surrogate-replace, hash-pseudonymize).

Non-PII columns pass through untouched, so downstream utility is unchanged;
this is the weakest rung of the ladder and is meant to be composed with the
stronger ones.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .data import IDENTIFIER, ColumnSpec, Dataset, _render_cell
from .rng import generator


@dataclass(frozen=True)
class Drop:
    """Remove the column entirely."""


@dataclass(frozen=True)
class Mask:
    """Keep the trailing ``keep_last`` characters, overwrite the rest with ``fill``.

    Degenerates gracefully: keep_last >= len(value) leaves the value unchanged,
    keep_last == 0 masks everything.
    """

    keep_last: int = 4
    fill: str = "X"

    def __post_init__(self):
        if self.keep_last < 0:
            raise ValueError("keep_last must be >= 0")
        if len(self.fill) != 1:
            raise ValueError("fill must be a single character")


@dataclass(frozen=True)
class SurrogateReplace:
    """Replace each distinct value with a distinct synthetic token, per seed.

    Tokens come from a seeded pool ("NAME-000143" style) rather than realistic
    fakes, so they cannot collide with real identities. The mapping preserves
    the column's equality partition and nothing else.
    """

    seed: int = 0


@dataclass(frozen=True)
class HashPseudonym:
    """Salted one-way digest, truncated to 16 hex characters."""

    salt: bytes = b""


Action = Drop | Mask | SurrogateReplace | HashPseudonym

_ACTION_NAMES = {Drop: "drop", Mask: "mask", SurrogateReplace: "surrogate", HashPseudonym: "hash"}


@dataclass(frozen=True)
class ObscurePolicy:
    """Per-PII-column action map. Every PII column must be covered, and only those."""

    actions: Mapping[str, Action]

    def __post_init__(self):
        object.__setattr__(self, "actions", dict(self.actions))

    def to_json_dict(self) -> dict:
        out = {}
        for name, action in self.actions.items():
            if isinstance(action, Drop):
                out[name] = {"action": "drop"}
            elif isinstance(action, Mask):
                out[name] = {"action": "mask", "keep_last": action.keep_last, "fill": action.fill}
            elif isinstance(action, SurrogateReplace):
                out[name] = {"action": "surrogate", "seed": action.seed}
            elif isinstance(action, HashPseudonym):
                out[name] = {"action": "hash", "salt": action.salt.decode("utf-8")}
            else:
                raise ValueError(f"unknown action {action!r}")
        return out

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ObscurePolicy":
        actions: dict[str, Action] = {}
        for name, entry in d.items():
            kind = entry.get("action")
            if kind == "drop":
                actions[name] = Drop()
            elif kind == "mask":
                actions[name] = Mask(
                    keep_last=int(entry.get("keep_last", 4)), fill=entry.get("fill", "X")
                )
            elif kind == "surrogate":
                actions[name] = SurrogateReplace(seed=int(entry.get("seed", 0)))
            elif kind == "hash":
                actions[name] = HashPseudonym(salt=str(entry.get("salt", "")).encode("utf-8"))
            else:
                raise ValueError(f"column {name!r}: unknown action {kind!r}")
        return cls(actions)


def load_policy(path: str | Path) -> ObscurePolicy:
    with Path(path).open("r", encoding="utf-8") as fh:
        return ObscurePolicy.from_json_dict(json.load(fh))


def save_policy(policy: ObscurePolicy, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(policy.to_json_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class PolicyAudit:
    """Coverage report: which PII columns exist, what happens to each, what's missing."""

    pii_columns: tuple[str, ...]
    actions: dict[str, str]
    uncovered: tuple[str, ...]
    dangling: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.uncovered and not self.dangling


def audit_policy(dataset: Dataset, policy: ObscurePolicy) -> PolicyAudit:
    """Report-only check that ``policy`` covers exactly the PII columns."""
    pii = tuple(c.name for c in dataset.schema if c.pii)
    known = set(dataset.column_names)
    actions = {
        name: _ACTION_NAMES[type(action)]
        for name, action in policy.actions.items()
        if name in pii
    }
    uncovered = tuple(name for name in pii if name not in policy.actions)
    dangling = tuple(
        name
        for name in policy.actions
        if name not in known or not dataset.spec(name).pii
    )
    return PolicyAudit(pii_columns=pii, actions=actions, uncovered=uncovered, dangling=dangling)


def _mask_value(value: str, action: Mask) -> str:
    if action.keep_last >= len(value):
        return value
    kept = value[len(value) - action.keep_last:] if action.keep_last else ""
    return action.fill * (len(value) - action.keep_last) + kept


def _surrogate_map(rendered: np.ndarray, column: str, action: SurrogateReplace) -> dict[str, str]:
    # Distinct values sorted before token assignment: the mapping depends only
    # on the value set and the seed, not on row order.
    distinct = sorted(set(rendered.tolist()))
    pool_size = max(1_000_000, 10 * len(distinct))
    rng = generator(action.seed, f"surrogate:{column}")
    numbers = rng.choice(pool_size, size=len(distinct), replace=False)
    prefix = column.upper()
    return {value: f"{prefix}-{int(num):06d}" for value, num in zip(distinct, numbers)}


def _hash_value(value: str, action: HashPseudonym) -> str:
    digest = hashlib.blake2b(action.salt + value.encode("utf-8"), digest_size=16)
    return digest.hexdigest()[:16]


def obscure(dataset: Dataset, policy: ObscurePolicy) -> Dataset:
    """Apply ``policy`` to every PII column; non-PII columns are byte-identical.

    Transformed columns become identifier-kind (their values are opaque strings
    after masking/replacement); dropped columns disappear from the schema. Row
    count never changes.
    """
    audit = audit_policy(dataset, policy)
    if audit.uncovered:
        raise ValueError(f"policy leaves PII columns uncovered: {list(audit.uncovered)}")
    if audit.dangling:
        raise ValueError(
            f"policy names unknown or non-PII columns: {list(audit.dangling)}"
        )

    out_schema: list[ColumnSpec] = []
    out_columns: list[np.ndarray] = []
    for spec, col in zip(dataset.schema, dataset.columns):
        action = policy.actions.get(spec.name)
        if action is None:
            out_schema.append(spec)
            out_columns.append(col)
            continue
        if isinstance(action, Drop):
            continue
        rendered = np.asarray(
            [_render_cell(spec, v) for v in col], dtype=object
        )
        if isinstance(action, Mask):
            transformed = np.asarray([_mask_value(v, action) for v in rendered], dtype=object)
        elif isinstance(action, SurrogateReplace):
            mapping = _surrogate_map(rendered, spec.name, action)
            transformed = np.asarray([mapping[v] for v in rendered], dtype=object)
        else:
            transformed = np.asarray([_hash_value(v, action) for v in rendered], dtype=object)
        out_schema.append(ColumnSpec(name=spec.name, kind=IDENTIFIER, pii=True))
        out_columns.append(transformed)

    return Dataset(tuple(out_schema), tuple(out_columns), dataset.row_ids, dataset.provenance)
