"""Aggregation of experiment records and report rendering (CSV, markdown, SVG)."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .grid import AlgorithmSpec, ExperimentRecord

__all__ = [
    "AggregateRow",
    "aggregate",
    "RECORDS_SCHEMA",
    "AGGREGATE_SCHEMA",
    "write_records_csv",
    "read_records_csv",
    "write_aggregate_csv",
    "read_aggregate_csv",
    "render_markdown",
    "render_svg",
    "emit_report",
    "MISSING",
]

RECORDS_SCHEMA = "# gsslnoise-records v1"
AGGREGATE_SCHEMA = "# gsslnoise-aggregate v1"
MISSING = "NA"
UNSET = "---"


@dataclass
class AggregateRow:
    dataset: str
    affinity: str
    algorithm: str
    alpha: float | None
    mu: float | None
    p: float | None
    label_fraction: float
    noise_rate: float
    mean: float
    std: float
    n_seeds: int
    n_failed: int = 0

    @property
    def spec(self) -> AlgorithmSpec:
        return AlgorithmSpec(self.algorithm, self.alpha, self.mu, self.p)

    def sort_key(self):
        return (self.dataset, self.affinity, self.spec.sort_key(), -self.label_fraction, self.noise_rate)

    @property
    def missing(self) -> bool:
        return self.n_seeds == 0


def aggregate(records) -> list:
    """Mean and sample standard deviation over seeds for every other coordinate.

    Failed cells are left out and counted in ``n_failed``.  A single-seed
    group reports a standard deviation of 0; a group without valid cells
    reports NaN for both statistics.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups = defaultdict(list)
    failed = defaultdict(int)
    for r in records:
        key = (r.dataset, r.affinity, r.algorithm, r.alpha, r.mu, r.p, r.label_fraction, r.noise_rate)
        if r.failed or not math.isfinite(r.accuracy):
            failed[key] += 1
            groups.setdefault(key, [])
        else:
            groups[key].append((r.seed, r.accuracy))
    rows = []
    for key, vals in groups.items():
        # seed order fixes the summation order, so the output is record-order invariant
        acc = np.array([a for _, a in sorted(vals)])
        if acc.size == 0:
            mean = std = math.nan
        else:
            mean = float(acc.sum() / acc.size)
            std = float(np.sqrt(((acc - mean) ** 2).sum() / (acc.size - 1))) if acc.size > 1 else 0.0
        rows.append(AggregateRow(*key, mean=mean, std=std, n_seeds=int(acc.size), n_failed=failed[key]))
    rows.sort(key=AggregateRow.sort_key)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return MISSING if math.isnan(value) else repr(value)
    return str(value)


def _parse_opt(text):
    return None if text == "" else float(text)


def _parse_float(text):
    return math.nan if text == MISSING else float(text)


_RECORD_FIELDS = [f.name for f in fields(ExperimentRecord)]
_AGG_FIELDS = [f.name for f in fields(AggregateRow)]


def _write(path, schema, header, rows):
    buf = io.StringIO()
    buf.write(schema + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _read(path, schema):
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != schema:
        raise ValueError(f"{path}: expected schema line {schema!r}")
    return list(csv.DictReader(lines[1:]))


def write_records_csv(records, path=None, timing: bool = True) -> str:
    """Serialise records; ``timing=False`` zeroes wall times for byte-stable output."""
    rows = []
    for r in records:
        d = asdict(r)
        if not timing:
            d["wall_time"] = 0.0
        rows.append(d)
    return _write(path, RECORDS_SCHEMA, _RECORD_FIELDS, rows)


def read_records_csv(path) -> list:
    out = []
    for d in _read(path, RECORDS_SCHEMA):
        out.append(ExperimentRecord(
            seed=int(d["seed"]), dataset=d["dataset"],
            label_fraction=float(d["label_fraction"]), noise_rate=float(d["noise_rate"]),
            affinity=d["affinity"], algorithm=d["algorithm"],
            alpha=_parse_opt(d["alpha"]), mu=_parse_opt(d["mu"]), p=_parse_opt(d["p"]),
            accuracy=_parse_float(d["accuracy"]), wall_time=float(d["wall_time"]),
            iterations=int(d["iterations"]), isolated=int(d["isolated"]),
            flipped=int(d["flipped"]), error=d["error"],
        ))
    return out


def write_aggregate_csv(rows, path=None) -> str:
    return _write(path, AGGREGATE_SCHEMA, _AGG_FIELDS, [asdict(r) for r in rows])


def read_aggregate_csv(path) -> list:
    out = []
    for d in _read(path, AGGREGATE_SCHEMA):
        out.append(AggregateRow(
            dataset=d["dataset"], affinity=d["affinity"], algorithm=d["algorithm"],
            alpha=_parse_opt(d["alpha"]), mu=_parse_opt(d["mu"]), p=_parse_opt(d["p"]),
            label_fraction=float(d["label_fraction"]), noise_rate=float(d["noise_rate"]),
            mean=_parse_float(d["mean"]), std=_parse_float(d["std"]),
            n_seeds=int(d["n_seeds"]), n_failed=int(d["n_failed"]),
        ))
    return out


def _pct(x) -> str:
    return f"{100 * x:g}%"


def _hp(x) -> str:
    return UNSET if x is None else f"{x:g}"


def _cell(row) -> str:
    if row is None or row.missing:
        return MISSING
    return f"{row.mean:.5f}±{row.std:.5f}"


def render_markdown(rows) -> str:
    """Tables laid out like the published ones: one per dataset and affinity,
    rows grouped by noise rate, one accuracy column per label fraction."""
    rows = sorted(rows, key=AggregateRow.sort_key)
    if not rows:
        raise ValueError("no rows to render")
    out = []
    blocks = {}
    for r in rows:
        blocks.setdefault((r.dataset, r.affinity), []).append(r)
    for (dataset, affinity), block in blocks.items():
        fractions = sorted({r.label_fraction for r in block}, reverse=True)
        rates = sorted({r.noise_rate for r in block})
        specs = sorted({r.spec for r in block}, key=AlgorithmSpec.sort_key)
        index = {(r.spec, r.label_fraction, r.noise_rate): r for r in block}
        header = ["Algorithm", "α", "μ", "p", "Noise"] + [f"Acc. ({_pct(f)} labeled)" for f in fractions]
        out.append(f"### {dataset}, {affinity}")
        out.append("")
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "|".join("---" for _ in header) + "|")
        for rate in rates:
            for spec in specs:
                cells = [spec.name.upper(), _hp(spec.alpha), _hp(spec.mu), _hp(spec.p), _pct(rate)]
                cells += [_cell(index.get((spec, f, rate))) for f in fractions]
                out.append("| " + " | ".join(cells) + " |")
        out.append("")
    return "\n".join(out)


def render_svg(rows, path) -> Path:
    """Accuracy against noise rate: one panel per (dataset, label fraction),
    one line per algorithm, error bars of one standard deviation."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = sorted(rows, key=AggregateRow.sort_key)
    if not rows:
        raise ValueError("no rows to render")
    datasets = list(dict.fromkeys((r.dataset, r.affinity) for r in rows))
    fractions = sorted({r.label_fraction for r in rows}, reverse=True)
    with matplotlib.rc_context({"svg.hashsalt": "gsslnoise", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(datasets), len(fractions), squeeze=False,
                                 figsize=(3.2 * len(fractions), 2.8 * len(datasets)), sharey=True)
        for a, (dataset, affinity) in enumerate(datasets):
            for b, frac in enumerate(fractions):
                ax = axes[a, b]
                sel = [r for r in rows if (r.dataset, r.affinity) == (dataset, affinity)
                       and r.label_fraction == frac and not r.missing]
                for spec in sorted({r.spec for r in sel}, key=AlgorithmSpec.sort_key):
                    line = sorted((r for r in sel if r.spec == spec), key=lambda r: r.noise_rate)
                    ax.errorbar([r.noise_rate for r in line], [r.mean for r in line],
                                yerr=[r.std for r in line], label=spec.label, capsize=2, marker="o", ms=3)
                ax.set_title(f"{dataset}, {_pct(frac)} labeled", fontsize=9)
                ax.set_xlabel("noise rate")
                if b == 0:
                    ax.set_ylabel("accuracy")
        axes[0, -1].legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


def emit_report(rows, fmt: str, path) -> Path:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to report")
    path = Path(path)
    if fmt == "csv":
        write_aggregate_csv(rows, path)
    elif fmt == "markdown":
        path.write_text(render_markdown(rows), encoding="utf-8")
    elif fmt in ("svg", "svg-plot"):
        render_svg(rows, path)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path
