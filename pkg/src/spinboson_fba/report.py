"""Result envelope, JSON/CSV emission and the plain-text report."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .config import to_json
from .errors import FBAError

SCHEMA_VERSION = "1.0"
STATUSES = ("pass", "fail", "warn")


def artifact_version() -> str:
    from . import __version__

    return __version__


@dataclass
class CheckRecord:
    name: str
    status: str
    residual: float
    tolerance: float
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        r = float(self.residual)
        self.residual = r if math.isfinite(r) else float("inf")
        self.tolerance = float(self.tolerance)


def check(name: str, residual, tolerance, detail: str = "", warn_only: bool = False) -> CheckRecord:
    ok = bool(math.isfinite(float(residual)) and float(residual) <= float(tolerance))
    status = "pass" if ok else ("warn" if warn_only else "fail")
    return CheckRecord(name, status, float(residual), float(tolerance), detail)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class ResultEnvelope:
    task: str
    config: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION
    version: str = field(default_factory=artifact_version)

    def add(self, rec: CheckRecord) -> CheckRecord:
        self.checks.append(rec)
        return rec

    def fail(self, name: str, exc: Exception, tolerance: float = 0.0) -> CheckRecord:
        residual = getattr(exc, "deviation", float("inf"))
        return self.add(CheckRecord(name, "fail", residual, tolerance, f"{type(exc).__name__}: {exc}"))

    def table(self, name: str, columns) -> Table:
        t = self.tables.setdefault(name, Table(list(columns)))
        return t

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def all_passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def counts(self) -> dict:
        return {s: sum(c.status == s for c in self.checks) for s in STATUSES}

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "schema_version": self.schema_version,
            "artifact_version": self.version,
            "task": self.task,
            "config": self.config,
            "config_hash": self.config_hash,
            "checks": [asdict(c) for c in self.checks],
            "tables": {k: {"columns": t.columns, "rows": to_json(t.rows)} for k, t in self.tables.items()},
        }
        if timing:
            d["timing"] = self.timing
        return _finite(d)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultEnvelope":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise FBAError(f"unsupported schema version {d.get('schema_version')!r}")
        env = cls(
            task=d["task"],
            config=d["config"],
            checks=[CheckRecord(**{k: _unfinite(v) for k, v in c.items()}) for c in d["checks"]],
            tables={k: Table(t["columns"], t["rows"]) for k, t in d["tables"].items()},
            timing=d.get("timing", {}),
            schema_version=d["schema_version"],
            version=d["artifact_version"],
        )
        return env

    def determinism_hash(self) -> str:
        blob = json.dumps(self.to_dict(timing=False), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _finite(v):
    """JSON has no infinities: encode them as strings."""
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_finite(x) for x in v]
    return v


def _unfinite(v):
    if v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def text_report(env: ResultEnvelope) -> str:
    c = env.counts()
    lines = [
        f"task: {env.task}",
        f"artifact version: {env.version}  schema: {env.schema_version}",
        f"config hash: {env.config_hash}",
        f"seed: {env.config.get('numerics', {}).get('seed')}",
        f"checks: {len(env.checks)}  pass: {c['pass']}  fail: {c['fail']}  warn: {c['warn']}",
        "",
    ]
    width = max((len(x.name) for x in env.checks), default=10)
    for x in env.checks:
        lines.append(f"[{x.status.upper():4}] {x.name:<{width}}  residual={x.residual:.3e}  tol={x.tolerance:.1e}  {x.detail}")
    for name, t in env.tables.items():
        lines.append(f"table {name}: {len(t.rows)} rows")
    lines.append("")
    lines.append("RESULT: " + ("PASS" if env.all_passed else "FAIL"))
    return "\n".join(lines) + "\n"


def _csv_cell(v):
    v = _finite(to_json(v))
    return json.dumps(v) if isinstance(v, list) else v


def emit(env: ResultEnvelope, out_dir, fmt: str = "json") -> list[Path]:
    """Write ``envelope.json`` (always), ``<table>.csv`` for csv/both and ``report.txt``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        p = out / "envelope.json"
        p.write_text(json.dumps(env.to_dict(), indent=2, sort_keys=True) + "\n")
        written.append(p)
        if fmt in ("csv", "both"):
            for name, t in env.tables.items():
                p = out / f"{name}.csv"
                with p.open("w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(t.columns)
                    for row in t.rows:
                        w.writerow([_csv_cell(v) for v in row])
                written.append(p)
        p = out / "report.txt"
        p.write_text(text_report(env))
        written.append(p)
    except OSError as exc:
        raise FBAError(f"cannot write results to {out}: {exc}") from exc
    return written


def load_envelope(path) -> ResultEnvelope:
    return ResultEnvelope.from_dict(json.loads(Path(path).read_text()))
