"""
A small experiment grid
=======================

The same harness that runs the full tables, shrunk to a few seconds:
five seeds, two label fractions, three noise rates.  Writes the records
CSV, an aggregate CSV and a markdown table into ``demo_out/``.
"""

from pathlib import Path

from gsslnoise.bench import (
    AffinitySpec,
    DatasetSpec,
    GridConfig,
    aggregate,
    emit_report,
    run_grid,
    write_records_csv,
)

config = GridConfig(
    seeds=range(5),
    datasets=[DatasetSpec("g241c", n=400, d=50), DatasetSpec("digit1", n=400, d=50)],
    label_fractions=[0.10, 0.05],
    noise_rates=[0.0, 0.10, 0.35],
    affinities=[AffinitySpec(k=10)],
)
print("cells:", config.cell_count)
records = run_grid(config)
out = Path("demo_out")
out.mkdir(exist_ok=True)
write_records_csv(records, out / "records.csv")
rows = aggregate(records)
emit_report(rows, "csv", out / "report.csv")
emit_report(rows, "markdown", out / "report.md")
print((out / "report.md").read_text())
