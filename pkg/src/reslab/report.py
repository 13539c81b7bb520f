"""Experiment reports, pass/fail flags and byte-stable CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from .fitting import FitResult

HARD, SOFT, REPORT = "hard", "soft", "report"
CSV_HEADER = ("experiment", "scale", "quantity", "value", "stderr")


@dataclass
class Flag:
    name: str
    criterion: int
    kind: str
    passed: bool
    value: float
    threshold: str

    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return f"[{word}] criterion {self.criterion} ({self.kind}) {self.name}: {_fmt(self.value)} vs {self.threshold}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed: int
    rows: List[tuple] = field(default_factory=list)
    fits: List[dict] = field(default_factory=list)
    flags: List[Flag] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    wall_time: float = 0.0

    def add_row(self, scale, quantity: str, value: float, stderr: Optional[float] = None):
        self.rows.append((scale, quantity, float(value), None if stderr is None else float(stderr)))

    def add_fit(self, quantity: str, fit: FitResult):
        self.fits.append({
            "quantity": quantity, "slope": fit.slope, "intercept": fit.intercept,
            "residual": fit.residual, "n_points": fit.n_points, "slope_stderr": fit.slope_stderr,
        })

    def fit(self, quantity: str) -> dict:
        for f in self.fits:
            if f["quantity"] == quantity:
                return f
        raise KeyError(quantity)

    def add_flag(self, name: str, criterion: int, kind: str, passed: bool, value, threshold: str) -> Flag:
        if kind not in (HARD, SOFT, REPORT):
            raise ValueError(f"unknown flag kind {kind!r}")
        fl = Flag(name, int(criterion), kind, bool(passed), value if isinstance(value, (int, str)) else float(value), threshold)
        self.flags.append(fl)
        return fl

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "rows": [list(r) for r in self.rows],
            "fits": self.fits,
            "flags": [vars(f).copy() for f in self.flags],
            "notes": list(self.notes),
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        rep = cls(d["experiment"], d["config"], d["seed"])
        rep.rows = [tuple(r) for r in d["rows"]]
        rep.fits = list(d["fits"])
        rep.flags = [Flag(**f) for f in d["flags"]]
        rep.notes = list(d.get("notes", []))
        rep.wall_time = d.get("wall_time", 0.0)
        return rep


def exit_code(reports: Iterable[ExperimentReport]) -> int:
    """1 if a hard flag fails, else 2 if a soft or report flag deviates, else 0."""
    flags = [f for r in reports for f in r.flags]
    if any(f.kind == HARD and not f.passed for f in flags):
        return 1
    if any(not f.passed for f in flags):
        return 2
    return 0


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render_json(reports: Sequence[ExperimentReport], include_timing: bool = False) -> str:
    payload = {"reports": [_clean(r.to_dict(include_timing)) for r in reports]}
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(reports: Sequence[ExperimentReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        for scale, qty, val, err in rep.rows:
            w.writerow([rep.experiment, scale, qty, repr(val), "" if err is None else repr(err)])
        for f in rep.fits:
            w.writerow([rep.experiment, "fit", f"{f['quantity']}.slope", repr(f["slope"]),
                        repr(f["slope_stderr"])])
    return buf.getvalue()


def emit_report(reports: Union[ExperimentReport, Sequence[ExperimentReport]],
                path: Union[str, Path], fmt: str = "csv", include_timing: bool = False) -> Path:
    """Write reports as CSV or JSON; the bytes depend only on the measured content."""
    if isinstance(reports, ExperimentReport):
        reports = [reports]
    if fmt == "csv":
        text = render_csv(reports)
    elif fmt == "json":
        text = render_json(reports, include_timing)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_json_report(path: Union[str, Path]) -> List[ExperimentReport]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [ExperimentReport.from_dict(d) for d in data["reports"]]


# exponent summary -----------------------------------------------------------

DEGREE_TABLE = (
    ("phase IBPs + TT* localization", "wide", -1.5),
    ("two local Strichartz estimates", "wide", -1.0),
    ("bilinear decoupling gain", "wide", -0.25),
    ("wide region combined", "-", -2.75),
    ("outcome on one dyad (narrow)", "-", -1.0),
)


def render_degree_table(measured: dict) -> str:
    """Plain-text comparison of reference exponents with measured ones.

    ``measured`` maps each row label of ``DEGREE_TABLE`` to a float or None.
    """
    head = f"{'block':34s} {'region':6s} {'reference':>10s} {'measured':>10s}"
    lines = [head, "-" * len(head)]
    for label, region, ref in DEGREE_TABLE:
        m = measured.get(label)
        ms = "n/a" if m is None or not math.isfinite(m) else f"{m:+.3f}"
        lines.append(f"{label:34s} {region:6s} {ref:>+10.3f} {ms:>10s}")
    return "\n".join(lines) + "\n"
