"""Scan execution and result serialization."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .fock import bh_ground_energy
from .models import bose_hubbard_polynomial
from .vqe import optimize

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
THREADS_ENV = "CVVQE_THREADS"


def point_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def columns(ed_cutoffs) -> list[str]:
    return (
        ["schema_version", "point", "scan_name", "scan_value", "status", "vqe_energy"]
        + [f"ed_energy_n{c}" for c in ed_cutoffs]
        + ["squeezing_cost_db", "subtraction_probability", "purity", "ladder_op_count",
           "iterations", "converged", "seed", "config_hash", "error"]
    )


def run_point(config: ExperimentConfig, index: int, scan_value) -> tuple[dict, float]:
    """Optimize one scan point; returns (record, wall time in seconds)."""
    start = time.perf_counter()
    seed = point_seed(config.seed, index)
    record = {
        "schema_version": SCHEMA_VERSION,
        "point": index,
        "scan_name": config.scan_name or "",
        "scan_value": scan_value,
        "seed": seed,
        "config_hash": config.hash(),
        "error": "",
    }
    try:
        model = config.model(scan_value)
        ansatz = config.ansatz(model.n_sites, scan_value)
        H = bose_hubbard_polynomial(model)
        result = optimize(ansatz, H, config.optimizer(seed))
        record.update(
            status="ok",
            vqe_energy=result.best_energy,
            squeezing_cost_db=result.resources.squeezing_cost_db,
            subtraction_probability=result.resources.subtraction_probability,
            purity=result.resources.purity,
            ladder_op_count=result.resources.ladder_op_count,
            iterations=result.iterations,
            converged=result.converged,
        )
        for c in config.ed_cutoffs:
            record[f"ed_energy_n{c}"] = bh_ground_energy(model, c)
    except Exception as exc:  # a failed point is reported, never fabricated
        log.error("scan point %d (%s) failed: %s", index, scan_value, exc)
        record.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return record, time.perf_counter() - start


def _worker(args):
    resolved, index, value = args
    return run_point(ExperimentConfig.from_dict(resolved), index, value)


def run_scan(config: ExperimentConfig, threads: int | None = None) -> tuple[list[dict], list[float]]:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    jobs = [(config.resolved, i, v) for i, v in enumerate(config.scan_values)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            out = list(pool.map(_worker, jobs))
    else:
        out = [_worker(job) for job in jobs]
    return [r for r, _ in out], [t for _, t in out]


# ---------------------------------------------------------------------------
# output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def records_to_csv(records: list[dict], ed_cutoffs) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = columns(ed_cutoffs)
    writer.writerow(cols)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in cols])
    return buf.getvalue()


def records_to_json(records: list[dict], ed_cutoffs) -> str:
    cols = columns(ed_cutoffs)
    rows = []
    for rec in records:
        row = {}
        for c in cols:
            v = rec.get(c)
            row[c] = float(v) if isinstance(v, np.floating) else v
        rows.append(row)
    return json.dumps({"schema_version": SCHEMA_VERSION, "columns": cols, "records": rows},
                      indent=2, allow_nan=True) + "\n"


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(config: ExperimentConfig, records: list[dict], wall_times: list[float]) -> Path:
    out = config.output_path
    atomic_write(out / "results.csv", records_to_csv(records, config.ed_cutoffs))
    atomic_write(out / "results.json", records_to_json(records, config.ed_cutoffs))
    atomic_write(out / "resolved_config.json",
                 json.dumps(config.resolved, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    timing = [{"point": r["point"], "wall_time_seconds": t} for r, t in zip(records, wall_times)]
    atomic_write(out / "timings.json", json.dumps(timing, indent=2) + "\n")
    return out


def ed_rows(config: ExperimentConfig, cutoffs=None) -> list[tuple]:
    rows = []
    for value in config.scan_values if config.scan_name in ("U", "t", "mu") else [None]:
        model = config.model(value)
        for c in cutoffs or config.ed_cutoffs:
            rows.append((value, c, bh_ground_energy(model, c)))
    return rows
