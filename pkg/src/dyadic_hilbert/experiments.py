"""Seeded growth studies and their CSV/JSON reports."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .analysis import NormEstimate, adversarial_selection_norm, opnorm_l2, opnorm_lp_lower
from .dyadic import DomainError
from .field import SEED_LIMIT, generate_field
from .haar import MAX_RESOLUTION

CSV_HEADER = ("n", "field", "p", "method", "value", "residual", "iterations", "seed")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def derive_seed(seed: int, *keys: int) -> int:
    """Platform-independent 64-bit child seed for ``(seed, *keys)``."""
    words = [seed & 0xFFFFFFFF, seed >> 32, *keys]
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0])


@dataclass
class RunConfig:
    resolutions: list = field(default_factory=lambda: [2, 3, 4])
    p_values: list = field(default_factory=lambda: [2.0])
    trials: int = 4
    seed: int = 0
    field_mode: dict = field(default_factory=lambda: {"mode": "random", "pmax": 0.5})
    output_path: Optional[str] = None
    adversarial: bool = False
    budget: int = 4
    maxiter: int = 500
    tol: float = 1e-8

    def __post_init__(self):
        self.resolutions = [int(n) for n in self.resolutions]
        self.p_values = [float(p) for p in self.p_values]
        if not self.resolutions:
            raise DomainError("at least one resolution is required")
        if any(not 1 <= n <= MAX_RESOLUTION for n in self.resolutions):
            raise DomainError(f"resolutions must lie in 1..{MAX_RESOLUTION}")
        if not self.p_values or any(p <= 1 for p in self.p_values):
            raise DomainError("p values must exceed 1")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not 0 <= self.seed < SEED_LIMIT:
            raise DomainError("seed must be an unsigned 64-bit integer")
        mode = self.field_mode.get("mode")
        if mode not in ("random", "constant"):
            raise DomainError(f"unknown field mode {mode!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> RunConfig:
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ReportRow:
    n: int
    field: str
    estimate: NormEstimate

    @property
    def key(self):
        return (self.n, self.field, self.estimate.p)


@dataclass
class ExperimentReport:
    rows: list
    metadata: dict

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: r.key)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.sorted_rows():
            e = r.estimate
            w.writerow([r.n, r.field, fmt(e.p), e.method, fmt(e.value), fmt(e.residual),
                        e.iterations, e.seed])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{"n": r.n, "field": r.field, **r.estimate.to_dict()} for r in self.sorted_rows()]
        return json.dumps({"metadata": self.metadata, "rows": rows}, sort_keys=True, indent=2) + "\n"


def field_descriptor(mode: dict, n: int, trial: int) -> str:
    # semicolons keep the descriptor a single unquoted CSV field
    if mode["mode"] == "constant":
        base = f"constant(k={int(mode.get('k', 0))})"
    else:
        depth = mode.get("depth")
        base = f"random(pmax={fmt(mode.get('pmax', 0.5))};depth={n if depth is None else depth})"
    return f"{base}#{trial:03d}"


def _task(config: RunConfig, n: int, trial: int, p: Optional[float]) -> ReportRow:
    if p is None:
        s = derive_seed(config.seed, n, trial, 2)
        est, _ = adversarial_selection_norm(n, config.budget, s)
        return ReportRow(n, f"adversarial#{trial:03d}", est)
    mode = dict(config.field_mode)
    kind = mode.pop("mode")
    v = generate_field(derive_seed(config.seed, n, trial, 0), n, kind, **mode)
    s = derive_seed(config.seed, n, trial, 1)
    if p == 2.0:
        est = opnorm_l2(v, config.maxiter, config.tol, s)
    else:
        est = opnorm_lp_lower(v, p, config.budget, s)
    return ReportRow(n, field_descriptor(config.field_mode, n, trial), est)


def _run_task(args) -> ReportRow:
    return _task(*args)


def run_growth(config: RunConfig, jobs: int = 1) -> ExperimentReport:
    """Estimate norms for every (resolution, trial, p); rows come back sorted."""
    if jobs < 1:
        raise DomainError("jobs must be at least 1")
    tasks = [(config, n, t, p) for n in config.resolutions for t in range(config.trials)
             for p in config.p_values]
    if config.adversarial:
        tasks += [(config, n, t, None) for n in config.resolutions for t in range(config.trials)]
    if jobs == 1:
        rows = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_task, tasks))
    meta = {"seed": config.seed, "tool_version": __version__, "config": config.to_dict()}
    report = ExperimentReport(rows, meta)
    report.rows = report.sorted_rows()
    return report


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
