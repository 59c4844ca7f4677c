"""Run configuration, binary field snapshots and diagnostics CSV files.

Snapshot layout (one field per file)::

    FPME1\\n
    dim=<d>\\n n=<n>\\n length=<L>\\n s=<s>\\n t=<t>\\n field=<u|p>\\n
    \\n
    <n**dim little-endian float64 values, row-major>

Reals in the header are written with 17 significant digits so they round
trip exactly.
"""

import csv
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .diagnostics import DiagnosticsRecord
from .errors import (ConfigParseError, ConstraintViolation, FracPMEError, MalformedHeader,
                     SnapshotError, TruncatedPayload, UnknownKey)
from .grid import Grid
from .state import (MODES, TORUS, CosinePerturbation, FromSnapshot, GaussianBump, State,
                    Zero)

__all__ = [
    "SnapshotHeader",
    "write_field",
    "read_field",
    "write_snapshot",
    "read_snapshot",
    "write_csv",
    "read_csv",
    "RunConfig",
    "parse_config",
    "load_config",
]

MAGIC = b"FPME1\n"
_HEADER_KEYS = ("dim", "n", "length", "s", "t", "field")


def _fmt(x):
    return "%.17g" % x


@dataclass(frozen=True)
class SnapshotHeader:
    dim: int
    n: int
    length: float
    s: float
    t: float
    field: str


def write_field(path, values, grid, s, t, name):
    """Write one field snapshot to ``path``."""
    if name not in ("u", "p"):
        raise FracPMEError(f"field name must be 'u' or 'p', got {name!r}")
    values = np.asarray(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise FracPMEError(f"field shape {values.shape} does not match grid {grid.shape}")
    head = (
        f"dim={grid.dim}\nn={grid.n}\nlength={_fmt(grid.length)}\n"
        f"s={_fmt(s)}\nt={_fmt(t)}\nfield={name}\n\n"
    )
    payload = np.ascontiguousarray(values).astype("<f8", copy=False).tobytes(order="C")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC + head.encode("ascii") + payload)
    except OSError as exc:
        raise SnapshotError(f"cannot write snapshot {path}: {exc}") from exc


def read_field(path):
    """Read a single-field snapshot; returns ``(SnapshotHeader, values)``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if not data.startswith(MAGIC):
        raise MalformedHeader(f"{path}: bad magic bytes {data[:6]!r}")
    end = data.find(b"\n\n", len(MAGIC) - 1)
    if end < 0:
        raise MalformedHeader(f"{path}: header not terminated by a blank line")
    lines = data[len(MAGIC):end].decode("ascii", errors="replace").split("\n")
    items = {}
    for line in lines:
        key, sep, val = line.partition("=")
        if not sep:
            raise MalformedHeader(f"{path}: header line {line!r} is not key=value")
        items[key] = val
    if tuple(items) != _HEADER_KEYS:
        raise MalformedHeader(f"{path}: header keys {tuple(items)} != {_HEADER_KEYS}")
    try:
        header = SnapshotHeader(
            dim=int(items["dim"]), n=int(items["n"]), length=float(items["length"]),
            s=float(items["s"]), t=float(items["t"]), field=items["field"],
        )
        grid = Grid(header.dim, header.n, header.length)
    except (ValueError, FracPMEError) as exc:
        raise MalformedHeader(f"{path}: invalid header value ({exc})") from exc
    if header.field not in ("u", "p"):
        raise MalformedHeader(f"{path}: unknown field {header.field!r}")
    payload = data[end + 2:]
    expected = 8 * grid.size
    if len(payload) < expected:
        raise TruncatedPayload(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise SnapshotError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(grid.shape)
    return header, values


def snapshot_paths(stem):
    stem = str(stem)
    return Path(stem + "_u.fpme"), Path(stem + "_p.fpme")


def write_snapshot(state, stem, s):
    """Write ``<stem>_u.fpme`` and ``<stem>_p.fpme``."""
    pu, pp = snapshot_paths(stem)
    write_field(pu, state.u, state.grid, s, state.t, "u")
    write_field(pp, state.p, state.grid, s, state.t, "p")
    return pu, pp


def read_snapshot(stem):
    """Inverse of :func:`write_snapshot`; returns ``(State, s)``."""
    pu, pp = snapshot_paths(stem)
    hu, u = read_field(pu)
    hp, p = read_field(pp)
    if hu.field != "u" or hp.field != "p":
        raise MalformedHeader(f"{stem}: field tags {hu.field!r}/{hp.field!r}, expected u/p")
    if (hu.dim, hu.n, hu.length, hu.s, hu.t) != (hp.dim, hp.n, hp.length, hp.s, hp.t):
        raise MalformedHeader(f"{stem}: u and p headers disagree")
    return State(Grid(hu.dim, hu.n, hu.length), u, p, hu.t), hu.s


# CSV


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DiagnosticsRecord.columns())
        for rec in records:
            w.writerow([repr(float(x)) for x in rec.as_row()])


def read_csv(path):
    """Read a diagnostics CSV into a dict of column arrays (any columns accepted)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FracPMEError(f"{path}: empty CSV")
    head = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise FracPMEError(f"{path}: non-numeric or ragged row ({exc})") from exc
    if data.size == 0:
        data = data.reshape(0, len(head))
    return {h: data[:, i] for i, h in enumerate(head)}


# configuration


@dataclass
class InitialSpec:
    type: str = "zero"
    amplitude: float = 1.0
    width: Optional[float] = None
    center: Optional[Tuple[float, ...]] = None
    base: float = 1.0
    mode: int = 1
    path: Optional[str] = None

    def build(self, grid):
        if self.type == "zero":
            return Zero()
        if self.type == "gaussian_bump":
            width = grid.length / 10 if self.width is None else self.width
            return GaussianBump(self.amplitude, width, self.center)
        if self.type == "cosine_perturbation":
            return CosinePerturbation(self.base, self.amplitude, self.mode)
        if self.type == "from_snapshot":
            return FromSnapshot(self.path)
        raise ConstraintViolation(f"unknown initial data type {self.type!r}")


_INIT_TYPES = ("zero", "gaussian_bump", "cosine_perturbation", "from_snapshot")


@dataclass
class RunConfig:
    s: float = 0.75
    dim: int = 1
    n: int = 64
    length: float = 2 * np.pi
    mode: str = TORUS
    t_end: float = 1.0
    sample_every: int = 1
    dt_max: Optional[float] = None
    cfl_safety: float = 0.4
    splitting: str = "strang"
    flux: str = "muscl"
    output: str = "out"
    snapshot_every: int = 0
    seed: int = 0
    u0: InitialSpec = field(default_factory=lambda: InitialSpec(type="gaussian_bump"))
    p0: InitialSpec = field(default_factory=InitialSpec)

    def grid(self):
        return Grid(self.dim, self.n, self.length)

    def solver_kwargs(self):
        return dict(s=self.s, t_end=self.t_end, cfl_safety=self.cfl_safety,
                    splitting=self.splitting, sample_every=self.sample_every,
                    dt_max=self.dt_max, mode=self.mode, flux=self.flux)


def _as_int(v):
    return int(v)


def _as_opt_float(v):
    return None if v.lower() in ("none", "") else float(v)


def _as_center(v):
    return tuple(float(x) for x in v.split(","))


_TOP = {
    "s": float, "dim": _as_int, "n": _as_int, "length": float, "mode": str,
    "t_end": float, "sample_every": _as_int, "dt_max": _as_opt_float,
    "cfl_safety": float, "splitting": str, "flux": str, "output": str,
    "snapshot_every": _as_int, "seed": _as_int,
}
_INIT = {
    "type": str, "amplitude": float, "width": _as_opt_float, "center": _as_center,
    "base": float, "mode": _as_int, "path": str,
}


def parse_config(text):
    """Parse ``key = value`` lines into a validated :class:`RunConfig`.

    ``#`` starts a comment. Initial data use prefixed keys, e.g.
    ``u0_type = gaussian_bump`` and ``u0_width = 2.5``.
    """
    cfg = RunConfig()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in seen:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        prefix, _, sub = key.partition("_")
        try:
            if key in _TOP:
                setattr(cfg, key, _TOP[key](val))
            elif prefix in ("u0", "p0") and sub in _INIT:
                setattr(getattr(cfg, prefix), sub, _INIT[sub](val))
            else:
                raise UnknownKey(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FracPMEError):
                raise
            raise ConfigParseError(f"line {lineno}: cannot parse {key} = {val!r} ({exc})") from exc
    _validate(cfg)
    return cfg


def _validate(cfg):
    def bad(msg):
        raise ConstraintViolation(msg)

    if not 0.5 < cfg.s <= 1.0:
        bad(f"s = {cfg.s!r} outside (1/2, 1], the range where torus solutions are known to exist")
    if cfg.dim not in (1, 2, 3):
        bad(f"dim = {cfg.dim!r} must be 1, 2 or 3")
    if cfg.n < 8 or cfg.n & (cfg.n - 1):
        bad(f"n = {cfg.n!r} must be a power of two >= 8")
    if not cfg.length > 0:
        bad(f"length = {cfg.length!r} must be positive")
    if cfg.mode not in MODES:
        bad(f"mode = {cfg.mode!r} must be one of {MODES}")
    if not cfg.t_end > 0:
        bad(f"t_end = {cfg.t_end!r} must be positive")
    if cfg.sample_every < 1:
        bad("sample_every must be >= 1")
    if cfg.dt_max is not None and not cfg.dt_max > 0:
        bad("dt_max must be positive")
    if not 0 < cfg.cfl_safety <= 1:
        bad(f"cfl_safety = {cfg.cfl_safety!r} must lie in (0, 1]")
    if cfg.splitting not in ("strang", "lie"):
        bad(f"splitting = {cfg.splitting!r} must be 'strang' or 'lie'")
    if cfg.flux not in ("muscl", "donor"):
        bad(f"flux = {cfg.flux!r} must be 'muscl' or 'donor'")
    if cfg.snapshot_every < 0:
        bad("snapshot_every must be >= 0")
    for name in ("u0", "p0"):
        spec = getattr(cfg, name)
        if spec.type not in _INIT_TYPES:
            bad(f"{name}_type = {spec.type!r} must be one of {_INIT_TYPES}")
        if spec.amplitude < 0:
            bad(f"{name}_amplitude must be nonnegative")
        if spec.width is not None and not spec.width > 0:
            bad(f"{name}_width must be positive")
        if spec.center is not None and len(spec.center) != cfg.dim:
            bad(f"{name}_center needs {cfg.dim} components")
        if spec.type == "from_snapshot" and not spec.path:
            bad(f"{name}_path is required for from_snapshot")


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FracPMEError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
