"""CSV/JSON formats, run configuration and the on-disk spectrum cache."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigensolve import SpectrumRecord, solver_tag
from .lattice import LatticeGeometry

log = logging.getLogger(__name__)

CACHE_ENV = "TORUSWEYL_CACHE"
FLOAT_FMT = "%.17g"


def fmt(x):
    return FLOAT_FMT % x


# ---------------------------------------------------------------------------
# atomic writes


def atomic_write_text(path, text):
    """Write via a temporary file in the target directory and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# CSV


def matrix_to_csv(matrix) -> str:
    a = np.asarray(matrix)
    if np.iscomplexobj(a):
        raise ValueError("matrix CSV holds real entries; take the real part after checking it")
    return "".join(",".join(fmt(x) for x in row) + "\n" for row in a)


def write_matrix_csv(path, matrix):
    atomic_write_text(path, matrix_to_csv(matrix))


def read_matrix_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    return np.array(rows, dtype=np.float64)


def table_to_csv(header, rows) -> str:
    """Plain CSV; floats rendered with 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(fmt(v))
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def read_table_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# JSON


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def spectrum_to_json(rec: SpectrumRecord) -> str:
    return canonical_json(rec.to_dict())


def spectrum_from_json(text) -> SpectrumRecord:
    return SpectrumRecord.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# config and cache keys


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line in canonical form; ``to_json`` round-trips exactly."""

    command: str
    params: dict = field(default_factory=dict)
    hbar: float = 1.0
    out: str | None = None
    cache_dir: str | None = None
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        return {"command": self.command, "params": dict(self.params), "hbar": float(self.hbar),
                "out": self.out, "cache_dir": self.cache_dir, "tolerances": dict(self.tolerances)}

    def to_json(self):
        return canonical_json(self.to_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["command"], d.get("params", {}), d.get("hbar", 1.0), d.get("out"),
                   d.get("cache_dir"), d.get("tolerances", {}))


def cache_key(geom: LatticeGeometry, route, symbol="h", solver=None) -> str:
    """SHA-256 over the exact float reprs of the geometry, route, symbol and solver tag."""
    payload = json.dumps({
        "N": geom.N,
        "ell_x": repr(geom.ell_x),
        "ell_xi": repr(geom.ell_xi),
        "hbar": repr(geom.hbar),
        "route": str(route),
        "symbol": symbol,
        "solver": solver or solver_tag(),
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def default_cache_dir():
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "torusweyl"


class SpectrumCache:
    """Directory of ``<key>.json`` spectrum records."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory else default_cache_dir()

    def path(self, key):
        return self.directory / f"{key}.json"

    def load(self, key):
        """The cached record, or ``None`` if absent or unreadable (logged as a warning)."""
        p = self.path(key)
        if not p.exists():
            return None
        try:
            return spectrum_from_json(p.read_text(encoding="utf-8"))
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("discarding corrupt cache entry %s: %s", p, exc)
            return None

    def store(self, key, rec: SpectrumRecord):
        atomic_write_text(self.path(key), spectrum_to_json(rec))

    def get_or_compute(self, key, compute):
        rec = self.load(key)
        if rec is not None:
            return rec, True
        rec = compute()
        self.store(key, rec)
        return rec, False
