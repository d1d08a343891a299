"""Seeded multi-trial experiments with CSV and JSON summary output.

Trial ``i`` of an experiment with base seed ``s`` draws all of its randomness
from ``numpy.random.SeedSequence([s, i])``, so rows do not depend on how many
worker processes run the batch or in which order trials finish.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from hamcore.packer import DEFAULT_CHECKPOINTS, EmptyCore, PackerConfig, pack, pack_process
from hamcore.random_models import sample_gnm_min_degree
from hamcore.verify import validate_certificate

GNM_HEADER = ["trial", "outcome", "cycles", "tail_size", "reservoir_used", "ms"]
PROCESS_HEADER = ["trial", "checkpoint", "t", "core_size", "outcome", "cycles", "tail_size", "reservoir_used", "ms"]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


@dataclass
class ExperimentSpec:
    n: int
    k: int
    c: float = 3.0
    trials: int = 1
    seed: int = 0
    model: str = "gnm-mindeg"
    checkpoints: tuple = DEFAULT_CHECKPOINTS
    parallel: int = 1
    reservoir_fraction: float = 0.5
    depth_cap: int = 60
    record_ms: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.parallel < 1:
            raise ValueError("parallel must be at least 1")
        if self.model not in ("gnm-mindeg", "process"):
            raise ValueError(f"unknown model {self.model!r}")

    def packer_config(self, c: float | None = None, strict: bool = True) -> PackerConfig:
        return PackerConfig(
            k=self.k, c=self.c if c is None else c, n=self.n, seed=self.seed,
            reservoir_fraction=self.reservoir_fraction, depth_cap=self.depth_cap, check_hypotheses=strict,
        )


@dataclass
class TrialRecord:
    trial: int
    outcome: str  # success, partial or failure
    cycles: int
    tail_size: int
    reservoir_used: int
    ms: float
    checkpoint: int = -1
    t: int = -1
    core_size: int = -1
    extra: dict = field(default_factory=dict)

    def row(self, header: Sequence[str], record_ms: bool) -> list:
        vals = asdict(self)
        vals["ms"] = f"{self.ms:.1f}" if record_ms else ""
        return [vals[h] for h in header]


def _outcome(cert, graph) -> str:
    if cert.status == "failed":
        return "failure"
    verdict = validate_certificate(graph, cert)
    if not verdict.passed:
        return "failure"
    return "success" if cert.complete else "partial"


def run_trial(spec: ExperimentSpec, trial: int) -> list[TrialRecord]:
    rng = trial_rng(spec.seed, trial)
    if spec.model == "gnm-mindeg":
        start = time.perf_counter()
        g = sample_gnm_min_degree(spec.n, round(spec.c * spec.n), spec.k, rng)
        cert = pack(g, spec.packer_config(), rng)
        ms = (time.perf_counter() - start) * 1000
        used = cert.audit.get("reservoir_used_total", 0)
        return [TrialRecord(trial, _outcome(cert, g), len(cert.cycles), cert.tail_size, used, ms)]
    start = time.perf_counter()
    out = []
    results = pack_process(spec.n, spec.k, spec.packer_config(strict=False), rng, spec.checkpoints)
    for idx, cp in enumerate(results):
        ms = (time.perf_counter() - start) * 1000
        if isinstance(cp, EmptyCore):
            out.append(TrialRecord(trial, "empty_core", 0, 0, 0, ms, idx, cp.t, 0))
            continue
        cert = cp.certificate
        used = cert.audit.get("reservoir_used_total", 0)
        out.append(TrialRecord(
            trial, _outcome(cert, cp.core_graph), len(cert.cycles), cert.tail_size, used, ms,
            idx, cp.t, cp.core_size, {"tau": cp.tau},
        ))
    return out


def _run_one(args) -> list[TrialRecord]:
    spec, trial = args
    try:
        return run_trial(spec, trial)
    except Exception as exc:  # one bad trial must not sink the batch
        return [TrialRecord(trial, "failure", 0, 0, 0, 0.0, extra={"error": repr(exc)})]


def run_experiment(spec: ExperimentSpec) -> list[TrialRecord]:
    jobs = [(spec, i) for i in range(spec.trials)]
    if spec.parallel == 1:
        batches = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=spec.parallel) as pool:
            batches = list(pool.map(_run_one, jobs))
    records = [r for b in batches for r in b]
    records.sort(key=lambda r: (r.trial, r.checkpoint))
    return records


def header_for(spec: ExperimentSpec) -> list[str]:
    return GNM_HEADER if spec.model == "gnm-mindeg" else PROCESS_HEADER


def records_to_csv(records: Sequence[TrialRecord], spec: ExperimentSpec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = header_for(spec)
    w.writerow(header)
    for r in records:
        w.writerow(r.row(header, spec.record_ms))
    return buf.getvalue()


def summarize(records: Sequence[TrialRecord], spec: ExperimentSpec) -> dict:
    def stats(rs):
        ms = np.array([r.ms for r in rs]) if rs else np.zeros(0)
        succ = sum(r.outcome == "success" for r in rs)
        return {
            "rows": len(rs),
            "success_rate": succ / len(rs) if rs else 0.0,
            "successes": succ,
            "mean_tail_size": float(np.mean([r.tail_size for r in rs])) if rs else 0.0,
            "ms_p50": float(np.percentile(ms, 50)) if ms.size else 0.0,
            "ms_p90": float(np.percentile(ms, 90)) if ms.size else 0.0,
            "ms_max": float(ms.max()) if ms.size else 0.0,
        }

    out = {"spec": {k: v for k, v in asdict(spec).items() if k != "parallel"}, **stats(list(records))}
    if spec.model == "process":
        by_cp: dict = {}
        for r in records:
            by_cp.setdefault(r.checkpoint, []).append(r)
        out["checkpoints"] = {str(cp): stats(rs) for cp, rs in sorted(by_cp.items())}
    return out


def write_outputs(records: Sequence[TrialRecord], spec: ExperimentSpec, csv_path: str | Path, summary_path: str | Path | None) -> dict:
    csv_path = Path(csv_path)
    csv_path.write_text(records_to_csv(records, spec), encoding="utf-8", newline="\n")
    summary = summarize(records, spec)
    if summary_path is None:
        summary_path = csv_path.with_suffix(".json")
    Path(summary_path).write_text(json.dumps(summary, indent=2, default=list) + "\n", encoding="utf-8", newline="\n")
    return summary
