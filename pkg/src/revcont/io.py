"""File formats: distributions, menus and reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .mechanism import Menu
from .valuation import AllocationSpace, DiscreteValuation, validate

REPORT_COLUMNS = ("suite", "instance_digest", "lhs", "rhs", "slack", "holds")


def parse_distribution(obj: dict) -> DiscreteValuation:
    if not isinstance(obj, dict) or "support" not in obj or "probs" not in obj:
        raise ValueError("distribution JSON needs 'support' and 'probs'")
    d = validate(obj["support"], obj["probs"])
    if "k" in obj and int(obj["k"]) != d.k:
        raise ValueError(f"declared k={obj['k']} but points have {d.k} coordinates")
    return d


def load_distribution(path: str | Path) -> DiscreteValuation:
    """Read a distribution from JSON, or from CSV with the mass in the last column."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
        try:
            vals = [[float(c) for c in r] for r in rows]
        except ValueError:
            vals = [[float(c) for c in r] for r in rows[1:]]  # header row
        if not vals or any(len(r) < 2 for r in vals):
            raise ValueError("CSV rows need at least one coordinate and a probability")
        return validate([r[:-1] for r in vals], [r[-1] for r in vals])
    return parse_distribution(json.loads(text))


def dump_distribution(d: DiscreteValuation) -> str:
    return json.dumps(d.to_dict(), sort_keys=True)


def parse_menu(obj: dict) -> Menu:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ValueError("menu JSON needs 'entries'")
    space = AllocationSpace.parse(obj.get("space", "additive"))
    entries = []
    for e in obj["entries"]:
        entries.append((e["q"], e["s"]))
    k = len(entries[0][0]) if entries else obj.get("k")
    if k is None:
        raise ValueError("empty menu needs 'k'")
    return Menu.build(entries, space, k=int(k))


def load_menu(path: str | Path) -> Menu:
    return parse_menu(json.loads(Path(path).read_text()))


def dump_menu(menu: Menu) -> str:
    return json.dumps(menu.to_dict(), sort_keys=True)


def fmt(v: float) -> str:
    """Twelve significant digits."""
    return format(float(v), ".12g")


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(fmt(v)) if math.isfinite(v) else str(v)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def to_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys and floats cut to 12 significant digits."""
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2) + "\n"


def reports_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([
            r["suite"],
            r["instance_digest"],
            fmt(r["lhs"]),
            fmt(r["rhs"]),
            fmt(r["slack"]),
            "true" if r["holds"] else "false",
        ])
    return buf.getvalue()


def emit_report(reports: Iterable, fmt_: str, path: str | Path | None) -> str:
    """Serialize reports as ``csv`` or ``json``; write to ``path`` if given."""
    reports = list(reports)
    if fmt_ == "csv":
        text = reports_to_csv(r.row() if hasattr(r, "row") else r for r in reports)
    elif fmt_ == "json":
        text = to_json([r.to_dict() if hasattr(r, "to_dict") else r for r in reports])
    else:
        raise ValueError(f"unknown report format {fmt_!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
