"""Reading and writing pipeline artifacts.

Artifacts bind literals by attribute and category NAME, not by integer
code, so a saved file stands on its own and can be applied to any dataset
whose columns carry the same names. A literal naming a category the new
dataset never exhibits simply matches no rows.

All writes are atomic (temp file in the target directory, then rename),
and JSON is emitted with sorted keys so identical content is identical
bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, is_dataclass

import numpy as np

from .brl import BrlConfig, RuleList, TrainDiagnostics
from .dataset import AttributeSchema, CategoricalDataset, DatasetError, Literal
from .miner import MiningResult, Rule, ScoredRule

FORMAT_VERSION = 1

__all__ = [
    "ArtifactError",
    "ModelArtifact",
    "write_rules",
    "read_rules",
    "write_model",
    "read_model",
    "write_csv",
    "csv_lines",
    "atomic_write_text",
]


class ArtifactError(ValueError):
    """An artifact file is missing, malformed, or inconsistent."""


def atomic_write_text(path, text: str) -> None:
    """Write text so readers never observe a half-written file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_json(path, kind: str) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ArtifactError(f"cannot read {kind} file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path} is not a valid {kind} file: {exc}") from None
    if not isinstance(payload, dict):
        raise ArtifactError(f"{path} is not a valid {kind} file: expected an object")
    return payload


def _require(payload: dict, key: str, path) -> object:
    if key not in payload:
        raise ArtifactError(f"{path}: missing required field {key!r}")
    return payload[key]


def _schema_records(schemas) -> list[dict]:
    return [
        {"name": s.name, "categories": list(s.categories), "kind": s.kind}
        for s in schemas
    ]


def _schemas_from_records(records, path) -> tuple[AttributeSchema, ...]:
    try:
        return tuple(
            AttributeSchema(
                name=r["name"], categories=tuple(r["categories"]), kind=r["kind"]
            )
            for r in records
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"{path}: bad attribute record: {exc}") from None


def _literal_records(rule: Rule, dataset: CategoricalDataset) -> list[dict]:
    out = []
    for lit in rule.literals:
        schema = dataset.schemas[lit.attribute]
        out.append(
            {"attribute": schema.name, "category": schema.categories[lit.category]}
        )
    return out


def _bind_rule(records, dataset: CategoricalDataset, path) -> Rule:
    literals = []
    for rec in records:
        name = rec["attribute"]
        category = rec["category"]
        try:
            attr = dataset.attribute_index(name)
        except DatasetError:
            raise ArtifactError(
                f"{path}: rule references unknown attribute {name!r}"
            ) from None
        categories = dataset.schemas[attr].categories
        if category not in categories:
            raise ArtifactError(
                f"{path}: attribute {name!r} has no category {category!r}"
            )
        literals.append(Literal(attr, categories.index(category)))
    return Rule.of(literals)


def write_rules(
    path,
    result,
    dataset: CategoricalDataset,
    config,
) -> None:
    """Write a mining result; ``config`` is a MinerConfig or a plain record dict."""
    payload = {
        "format": FORMAT_VERSION,
        "kind": "rules",
        "status": result.status,
        "label_name": dataset.label_name,
        "label_names": list(dataset.label_names),
        "attributes": _schema_records(dataset.schemas),
        "miner_config": asdict(config) if is_dataclass(config) else dict(config),
        "rules": [
            {
                "literals": _literal_records(sr.rule, dataset),
                "label": dataset.label_names[sr.label],
                "score": float(sr.score),
                "support": float(sr.support),
            }
            for sr in result.rules
        ],
    }
    atomic_write_text(path, _dump_json(payload))


def read_rules(path, dataset: CategoricalDataset) -> MiningResult:
    """Load mined rules and bind them to ``dataset`` by name.

    Per-label buckets are rebuilt from the stored union, so the result
    carries exactly the rules the file lists.
    """
    payload = _load_json(path, "rules")
    if payload.get("kind") != "rules":
        raise ArtifactError(f"{path}: not a rules file")
    stored_labels = list(_require(payload, "label_names", path))
    if stored_labels != list(dataset.label_names):
        raise ArtifactError(
            f"{path}: label names {stored_labels} do not match the dataset's "
            f"{list(dataset.label_names)}"
        )
    scored = []
    for rec in _require(payload, "rules", path):
        try:
            rule = _bind_rule(rec["literals"], dataset, path)
            label = stored_labels.index(rec["label"])
            scored.append(
                ScoredRule(
                    rule=rule,
                    label=label,
                    score=float(rec["score"]),
                    support=float(rec["support"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ArtifactError(f"{path}: bad rule record: {exc}") from None
    per_label = tuple(
        tuple(sr for sr in scored if sr.label == k)
        for k in range(len(stored_labels))
    )
    return MiningResult(
        rules=tuple(scored),
        per_label=per_label,
        status=str(_require(payload, "status", path)),
    )


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    """A fitted rule list in name-bound form, ready to apply to new data."""

    label_name: str
    label_names: tuple[str, ...]
    attributes: tuple[AttributeSchema, ...]
    rules: tuple[tuple[tuple[str, str], ...], ...]
    capture_counts: np.ndarray
    alpha: np.ndarray
    diagnostics: dict
    brl_config: dict

    @property
    def n_labels(self) -> int:
        return len(self.label_names)

    def clause_probabilities(self) -> np.ndarray:
        smoothed = self.capture_counts + self.alpha[None, :]
        return smoothed / smoothed.sum(axis=1, keepdims=True)

    def describe_rule(self, index: int) -> str:
        return " and ".join(
            f"{attr} is {cat}" for attr, cat in self.rules[index]
        )

    def predict_proba(self, dataset: CategoricalDataset) -> np.ndarray:
        """First-match clause probabilities for every row of ``dataset``.

        Literals are matched by attribute and category name; a category the
        dataset never exhibits matches no rows. Unknown attributes are an
        error since silently skipping a literal would change the rule.
        """
        probs = self.clause_probabilities()
        out = np.empty((dataset.n, self.n_labels), dtype=np.float64)
        remaining = np.ones(dataset.n, dtype=bool)
        for j, literals in enumerate(self.rules):
            mask = np.ones(dataset.n, dtype=bool)
            for attr_name, category in literals:
                try:
                    attr = dataset.attribute_index(attr_name)
                except DatasetError:
                    raise ArtifactError(
                        f"model references unknown attribute {attr_name!r}"
                    ) from None
                categories = dataset.schemas[attr].categories
                if category in categories:
                    mask &= dataset.X[:, attr] == categories.index(category)
                else:
                    mask &= False
            captured = remaining & mask
            out[captured] = probs[j]
            remaining &= ~captured
        out[remaining] = probs[len(self.rules)]
        return out

    def predict(self, dataset: CategoricalDataset) -> np.ndarray:
        return np.argmax(self.predict_proba(dataset), axis=1)

    def render(self) -> str:
        """The fitted list as if / else-if / else text."""
        probs = self.clause_probabilities()
        lines = []
        for j, literals in enumerate(self.rules):
            head = "if" if j == 0 else "else if"
            k = int(np.argmax(probs[j]))
            lines.append(
                f"{head} {self.describe_rule(j)} "
                f"then {self.label_names[k]} (P = {probs[j, k]:.2f})"
            )
        k = int(np.argmax(probs[len(self.rules)]))
        default = f"{self.label_names[k]} (P = {probs[len(self.rules), k]:.2f})"
        if self.rules:
            lines.append(f"else {default}")
        else:
            lines.append(f"always {default}")
        return "\n".join(lines)


def write_model(
    path,
    rule_list: RuleList,
    diagnostics: TrainDiagnostics,
    dataset: CategoricalDataset,
    config: BrlConfig,
) -> None:
    payload = {
        "format": FORMAT_VERSION,
        "kind": "model",
        "label_name": dataset.label_name,
        "label_names": list(dataset.label_names),
        "attributes": _schema_records(dataset.schemas),
        "rules": [_literal_records(rule, dataset) for rule in rule_list.rules],
        "capture_counts": rule_list.capture_counts.tolist(),
        "alpha": rule_list.alpha.tolist(),
        "diagnostics": asdict(diagnostics),
        "brl_config": asdict(config),
    }
    atomic_write_text(path, _dump_json(payload))


def read_model(path) -> ModelArtifact:
    payload = _load_json(path, "model")
    if payload.get("kind") != "model":
        raise ArtifactError(f"{path}: not a model file")
    label_names = tuple(_require(payload, "label_names", path))
    attributes = _schemas_from_records(_require(payload, "attributes", path), path)
    rules = []
    for rule_records in _require(payload, "rules", path):
        try:
            rules.append(
                tuple((rec["attribute"], rec["category"]) for rec in rule_records)
            )
        except (KeyError, TypeError) as exc:
            raise ArtifactError(f"{path}: bad rule record: {exc}") from None
    counts = np.asarray(_require(payload, "capture_counts", path), dtype=np.int64)
    alpha = np.asarray(_require(payload, "alpha", path), dtype=np.float64)
    if counts.ndim != 2 or counts.shape != (len(rules) + 1, len(label_names)):
        raise ArtifactError(f"{path}: capture_counts shape does not match rules")
    if alpha.shape != (len(label_names),) or np.any(alpha <= 0):
        raise ArtifactError(f"{path}: alpha must be positive per label")
    known = {s.name for s in attributes}
    for rule_literals in rules:
        for attr_name, _ in rule_literals:
            if attr_name not in known:
                raise ArtifactError(
                    f"{path}: rule references unknown attribute {attr_name!r}"
                )
    return ModelArtifact(
        label_name=str(payload.get("label_name", "label")),
        label_names=label_names,
        attributes=attributes,
        rules=tuple(rules),
        capture_counts=counts,
        alpha=alpha,
        diagnostics=dict(_require(payload, "diagnostics", path)),
        brl_config=dict(_require(payload, "brl_config", path)),
    )


def csv_lines(header, rows) -> list[str]:
    """Comma-separated lines; floats rendered with ``repr`` so equal values
    are equal bytes."""
    def cell(value) -> str:
        if isinstance(value, float):
            return repr(value)
        return str(value)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    return lines


def write_csv(path, header, rows) -> None:
    """Write one comma-separated table atomically."""
    atomic_write_text(path, "\n".join(csv_lines(header, rows)) + "\n")
