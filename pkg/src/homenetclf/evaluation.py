"""Multi-class metrics: confusion matrix, per-class precision/recall, reports.

Confusion matrices are oriented with true labels on rows and predicted
labels on columns.  Precision or recall with a zero denominator is reported
as undefined (``None`` in memory, ``"n/a"`` in rendered tables) rather than
silently coerced to a number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .datagen import CLASS_NAMES
from .errors import ConfigurationError, DataFormatError


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (num_classes, num_classes) int64, rows=true, cols=pred
    class_names: list[str]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        header = "true\\pred," + ",".join(self.class_names)
        rows = [
            name + "," + ",".join(str(int(v)) for v in row)
            for name, row in zip(self.class_names, self.counts)
        ]
        return "\n".join([header] + rows) + "\n"

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def from_csv(cls, text: str) -> "ConfusionMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("true\\pred,"):
            raise DataFormatError("not a confusion matrix CSV")
        names = lines[0].split(",")[1:]
        counts = np.zeros((len(names), len(names)), dtype=np.int64)
        for i, line in enumerate(lines[1:]):
            cells = line.split(",")
            counts[i] = [int(c) for c in cells[1:]]
        return cls(counts=counts, class_names=names)


@dataclass
class ClassMetrics:
    name: str
    precision: float | None
    recall: float | None
    support: int


@dataclass
class MetricsReport:
    test_case_id: str
    accuracy: float
    per_class: list[ClassMetrics]
    macro_precision: float | None
    macro_recall: float | None
    total: int

    def class_metrics(self, name: str) -> ClassMetrics:
        for cm in self.per_class:
            if cm.name == name:
                return cm
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "test_case_id": self.test_case_id,
            "accuracy": self.accuracy,
            "total": self.total,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "per_class": [
                {
                    "class": cm.name,
                    "precision": cm.precision,
                    "recall": cm.recall,
                    "support": cm.support,
                }
                for cm in self.per_class
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            test_case_id=d["test_case_id"],
            accuracy=d["accuracy"],
            total=d["total"],
            macro_precision=d["macro_precision"],
            macro_recall=d["macro_recall"],
            per_class=[
                ClassMetrics(
                    name=row["class"],
                    precision=row["precision"],
                    recall=row["recall"],
                    support=row["support"],
                )
                for row in d["per_class"]
            ],
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "MetricsReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def confusion(
    preds: Sequence[int], labels: Sequence[int], class_names: list[str] | None = None
) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a matrix; rows=true, cols=pred."""
    if len(preds) != len(labels):
        raise ConfigurationError(
            f"predictions ({len(preds)}) and labels ({len(labels)}) differ in length"
        )
    if len(preds) == 0:
        raise ConfigurationError("cannot build a confusion matrix from zero samples")
    names = class_names if class_names is not None else CLASS_NAMES
    n = len(names)
    counts = np.zeros((n, n), dtype=np.int64)
    for p, y in zip(preds, labels):
        counts[int(y), int(p)] += 1
    return ConfusionMatrix(counts=counts, class_names=names)


def metrics(cm: ConfusionMatrix, test_case_id: str = "") -> MetricsReport:
    counts = cm.counts
    total = int(counts.sum())
    if total == 0:
        raise ConfigurationError("empty confusion matrix")
    per_class: list[ClassMetrics] = []
    for i, name in enumerate(cm.class_names):
        col = int(counts[:, i].sum())
        row = int(counts[i, :].sum())
        diag = int(counts[i, i])
        per_class.append(
            ClassMetrics(
                name=name,
                precision=diag / col if col > 0 else None,
                recall=diag / row if row > 0 else None,
                support=row,
            )
        )
    defined_p = [c.precision for c in per_class if c.precision is not None]
    defined_r = [c.recall for c in per_class if c.recall is not None]
    return MetricsReport(
        test_case_id=test_case_id,
        accuracy=float(np.trace(counts)) / total,
        per_class=per_class,
        macro_precision=sum(defined_p) / len(defined_p) if defined_p else None,
        macro_recall=sum(defined_r) / len(defined_r) if defined_r else None,
        total=total,
    )


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def comparison_table(reports: list[MetricsReport]) -> str:
    """Render per-class P/R for several test cases side by side.

    A uniquely best value per class/metric is marked ``*`` and a uniquely
    worst one ``!``.
    """
    if not reports:
        return ""
    names = [c.name for c in reports[0].per_class]
    col_w = max(len(r.test_case_id) for r in reports) + 2
    col_w = max(col_w, 13)
    label_w = max(len(n) for n in names) + 2
    lines = [
        " " * label_w + "".join(r.test_case_id.rjust(col_w) for r in reports),
        " " * label_w + "".join("P / R".rjust(col_w) for _ in reports),
    ]
    for cname in names:
        row = [cname.ljust(label_w)]
        for metric_kind in ("precision", "recall"):
            values = [getattr(r.class_metrics(cname), metric_kind) for r in reports]
            defined = [v for v in values if v is not None]
            best = max(defined) if defined else None
            worst = min(defined) if defined else None
            marks = []
            for v in values:
                mark = ""
                if v is not None and defined.count(v) == 1:
                    if v == best:
                        mark = "*"
                    elif v == worst:
                        mark = "!"
                marks.append(_fmt(v) + mark)
            row.append(marks)
        cells = [
            f"{p} / {r}".rjust(col_w) for p, r in zip(row[1], row[2])
        ]
        lines.append(row[0] + "".join(cells))
    lines.append(
        "accuracy".ljust(label_w)
        + "".join(f"{r.accuracy:.4f}".rjust(col_w) for r in reports)
    )
    return "\n".join(lines) + "\n"
