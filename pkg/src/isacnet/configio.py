"""Configuration files, tabular output and run manifests."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import DomainError, ParseError, ValidationError
from .network import Allocation, NetworkConfig

__all__ = ["RunSettings", "LoadedConfig", "RunManifest", "load_config", "parse_config_text",
           "config_hash", "write_table", "write_manifest", "tool_version"]

NETWORK_KEYS = {"lambda_b": float, "m_t": int, "m_r": int, "p_t": float, "alpha": float, "beta": float,
                "xi_sq": float, "kappa": float, "delta_t": float, "j_max": int}
ALLOCATION_KEYS = {"k": int, "l": int, "j": int, "q": int}
RUN_KEYS = {"n_realizations": int, "seed": int, "r_window_km": float, "rel_tol": float}
SECTIONS = {"network": NETWORK_KEYS, "allocation": ALLOCATION_KEYS, "run": RUN_KEYS}


@dataclass(frozen=True)
class RunSettings:
    n_realizations: int = 20000
    seed: int = 0
    r_window_km: Optional[float] = None
    rel_tol: Optional[float] = None


@dataclass(frozen=True)
class LoadedConfig:
    """Result of reading a config file.

    ``defaulted`` lists the ``section.key`` names that were not given and
    therefore took their default value.
    """

    network: NetworkConfig
    allocation: Allocation
    run: RunSettings
    defaulted: tuple = ()

    def as_dict(self) -> dict:
        return {"network": self.network.as_dict(), "allocation": asdict(self.allocation),
                "run": asdict(self.run)}


def _locate(lines, section, key):
    """1-based (line, column) of ``key`` inside ``[section]``."""
    current = None
    for n, raw in enumerate(lines, 1):
        s = raw.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            continue
        if current == section:
            m = re.match(r"\s*([^=:#;\s]+)\s*[=:]", raw)
            if m and m.group(1).lower() == key:
                return n, m.start(1) + 1
    return None, None


def _convert(kind, text):
    if kind is int:
        if not re.fullmatch(r"[+-]?\d+", text):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(text)
    val = float(text)
    if not math.isfinite(val):
        raise ValueError(f"expected a finite number, got {text!r}")
    return val


def parse_config_text(text: str) -> LoadedConfig:
    """Parse ``[network]``, ``[allocation]`` and ``[run]`` key = value sections.

    Raises
    ------
    ParseError
        Syntax errors, duplicate sections/keys, unknown sections or keys and
        unparsable values, with the offending line and column.
    ValidationError
        Values that parse but violate a configuration invariant.
    """
    lines = text.splitlines()
    cp = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ParseError("key outside of any section", e.lineno, 1) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        what = f"duplicate key {e.option!r}" if hasattr(e, "option") else f"duplicate section {e.section!r}"
        raise ParseError(what, e.lineno, 1) from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ParseError("malformed line", lineno, 1) from None

    values, defaulted = {}, []
    for section in cp.sections():
        if section not in SECTIONS:
            line = next((n for n, raw in enumerate(lines, 1) if raw.strip() == f"[{section}]"), None)
            raise ParseError(f"unknown section [{section}]", line, 1)
        for key, raw in cp.items(section):
            kind = SECTIONS[section].get(key)
            line, col = _locate(lines, section, key)
            if kind is None:
                raise ParseError(f"unknown key {key!r} in [{section}]", line, col)
            try:
                values[(section, key)] = _convert(kind, raw.strip())
            except ValueError as e:
                raise ParseError(f"{section}.{key}: {e}", line, col) from None
    for section, keys in SECTIONS.items():
        defaulted += [f"{section}.{k}" for k in keys if (section, k) not in values]

    def pick(section):
        return {k: v for (s, k), v in values.items() if s == section}

    net = NetworkConfig(**pick("network"))
    try:
        alloc = Allocation(**pick("allocation"))
    except DomainError as e:
        raise ValidationError(str(e)) from None
    run = RunSettings(**pick("run"))
    if run.n_realizations < 2:
        raise ValidationError("run.n_realizations must be >= 2")
    if run.r_window_km is not None and not run.r_window_km > 0:
        raise ValidationError("run.r_window_km must be > 0")
    if run.rel_tol is not None and not run.rel_tol > 0:
        raise ValidationError("run.rel_tol must be > 0")
    return LoadedConfig(net, alloc, run, tuple(defaulted))


def load_config(path) -> LoadedConfig:
    """Read a config file; ``None`` or the literal ``"defaults"`` gives the default setup."""
    if path is None or str(path) == "defaults":
        return parse_config_text("")
    return parse_config_text(Path(path).read_text())


def config_hash(payload: dict) -> str:
    """SHA-256 of the canonical JSON form of ``payload``."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # not installed as a distribution
        return "0.1.0"


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return "" if v is None else str(v)


def write_table(columns, rows, fmt: str = "csv") -> str:
    """Render rows as CSV or JSON text (deterministic for identical input)."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        clean = [{c: (None if isinstance(r.get(c), float) and math.isnan(r.get(c)) else r.get(c))
                  for c in columns} for r in rows]
        return json.dumps({"columns": list(columns), "rows": clean}, indent=2, default=str) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


@dataclass
class RunManifest:
    config_hash: str
    command: str
    seed: int
    tool_version: str
    started: str
    finished: str = ""
    outputs: list = field(default_factory=list)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(manifest: RunManifest, path) -> Path:
    p = Path(path)
    p.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return p
