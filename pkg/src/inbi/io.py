"""CSV and YAML readers/writers for scenarios, frontiers and experiment reports."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import yaml

from .auam import AuamResult
from .aws import AwsResult
from .model import SLOTS_PER_DAY, BuildingScenario

SCENARIO_COLUMNS = ("slot", "load_critical", "load_sched", "load_switch", "wind", "pv", "temperature")


def _writer(path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def write_rows(path, header, rows) -> Path:
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        w.writerows(rows)
    return Path(path)


def write_scenario(scenario: BuildingScenario, out_dir) -> Path:
    """One CSV per building plus ``scenario.yaml``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for b in range(scenario.n_buildings):
        name = f"building_{b:03d}.csv"
        rows = [
            (t, *(float(getattr(scenario, c)[b, t]) for c in SCENARIO_COLUMNS[1:6]), float(scenario.temperature[t]))
            for t in range(SLOTS_PER_DAY)
        ]
        write_rows(out / name, SCENARIO_COLUMNS, rows)
        files.append(name)
    manifest = {
        "name": scenario.name,
        "n_ordinary": scenario.n_ordinary,
        "n_special": scenario.n_special,
        "buildings": files,
        "cost_factors": {"w1": scenario.w1, "w2": scenario.w2, "l": scenario.l},
        "p1_total": scenario.p1_total,
        "p2_total": scenario.p2_total,
    }
    path = out / "scenario.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=False)
    return path


def read_scenario(manifest_path) -> BuildingScenario:
    """Load a scenario written by ``write_scenario`` (or hand-built in the same layout).

    Raises:
        ValueError: missing columns, wrong slot count or a roster mismatch.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        m = yaml.safe_load(fh)
    files = m["buildings"]
    if len(files) != m["n_ordinary"] + m["n_special"]:
        raise ValueError("building file count does not match the roster split")
    cols = {c: [] for c in SCENARIO_COLUMNS[1:]}
    for name in files:
        with open(manifest_path.parent / name, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(SCENARIO_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{name}: missing columns {sorted(missing)}")
            rows = sorted(reader, key=lambda r: int(r["slot"]))
        if [int(r["slot"]) for r in rows] != list(range(SLOTS_PER_DAY)):
            raise ValueError(f"{name}: expected slots 0..{SLOTS_PER_DAY - 1}")
        for c in cols:
            cols[c].append([float(r[c]) for r in rows])
    cf = m.get("cost_factors", {})
    return BuildingScenario(
        n_ordinary=m["n_ordinary"], n_special=m["n_special"],
        load_critical=np.array(cols["load_critical"]), load_sched=np.array(cols["load_sched"]),
        load_switch=np.array(cols["load_switch"]), pv=np.array(cols["pv"]), wind=np.array(cols["wind"]),
        # Temperature is shared; the first building's column is authoritative.
        temperature=np.array(cols["temperature"][0]),
        w1=cf.get("w1", 2070.0), w2=cf.get("w2", 0.096), l=cf.get("l", 5000.0),
        p1_total=m.get("p1_total", 0.0), p2_total=m.get("p2_total", 0.0), name=m.get("name", "scenario"),
    )


def write_frontier(path, frontier, selected=(), compromise: int | None = None) -> Path:
    """``index,source,f1,f2,f3,s1,s2,s3,selected,compromise,x0..`` for every frontier point."""
    sel = set(selected)
    d = frontier.X.shape[1] if len(frontier) else 0
    header = ["index", "source", "f1", "f2", "f3", "s1", "s2", "s3", "selected", "compromise"]
    header += [f"x{k}" for k in range(d)]
    rows = [
        [i, p.source, *map(float, p.f), *map(float, p.s), int(i in sel), int(i == compromise), *map(float, p.x)]
        for i, p in enumerate(frontier.points)
    ]
    return write_rows(path, header, rows)


def write_aws_report(path, aws: AwsResult) -> Path:
    rows = [(r.plane, r.segment, r.lam, int(r.accepted), *map(float, r.f)) for r in aws.records]
    return write_rows(path, ("plane", "segment", "lambda", "accepted", "f1", "f2", "f3"), rows)


def write_auam_trace(path, auam: AuamResult) -> Path:
    rows = [(t, *map(float, p), m, d) for t, p, m, d in auam.trace_rows()]
    return write_rows(path, ("theta", "sbar_x", "sbar_y", "sbar_z", "matched_idx", "distance"), rows)


CASE_HEADER = ("case", "algorithm", "equipment_cost", "supply_cost", "comfort_pct")


def write_case_table(path, rows) -> Path:
    return write_rows(path, CASE_HEADER,
                      [(r.case_id, r.algorithm, r.equipment_cost, r.supply_cost, r.comfort_pct) for r in rows])


def format_case_table(rows) -> str:
    """Fixed-width text version of the comparison table."""
    lines = [f"{'case':<9}{'alg':<6}{'equipment (yuan)':>18}{'supply (yuan)':>16}{'comfort %':>11}"]
    for r in rows:
        lines.append(f"{r.case_id:<9}{r.algorithm:<6}{r.equipment_cost:>18.1f}{r.supply_cost:>16.1f}{r.comfort_pct:>11.2f}")
    return "\n".join(lines) + "\n"


def write_deviation(path, report) -> Path:
    rows = [(b + 1, float(off), float(on)) for b, (off, on) in enumerate(zip(report.deviation_off, report.deviation_on))]
    rows.append(("mean", report.mean_off, report.mean_on))
    return write_rows(path, ("building", "deviation_off_pct", "deviation_on_pct"), rows)


def write_smoothing(path, rows) -> Path:
    return write_rows(path, ("n_buildings", "algorithm", "equipment_cost", "baseline_cost", "degree_pct"),
                      [(r.n_buildings, r.algorithm, r.equipment_cost, r.baseline_cost, r.degree) for r in rows])
