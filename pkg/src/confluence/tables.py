"""Persistent, resumable storage for acquired point tables.

Multi-stage searches run for a long time and reach heights where q only
fits in arbitrary-precision integers, so every file stores q as a decimal
string — never a float.  Stored residues are 15-decimal renderings for
human inspection only; the loader recomputes authoritative residues and
rejects files whose stored values disagree, so corruption cannot survive a
round trip.  All serialization is canonical (fixed field order, fixed
number formatting), making identical data byte-identical on disk, which is
what the split-resume guarantees are measured against.

A run directory holds one points file, one cursor/state file and one gap
file per order, plus the originating configuration; a lock file makes the
directory single-writer (readers are unrestricted).
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from ._primes import prime_sequence
from .confsearch import GapTable, Window
from .errors import LockError, TableFormatError
from .modspace import ConfluencePoint
from .precision import ExactT, residue

__all__ = [
    "DirectoryLock",
    "PointTableFile",
    "load_gap_table",
    "load_state",
    "load_table",
    "save_gap_table",
    "save_state",
    "save_table",
]

_POINTS_MAGIC = "confluence-points v1"
_STATE_MAGIC = "confluence-state v1"
_GAPS_MAGIC = "confluence-gaps v1"
_THETA = "pi/2"  # the fixed quarter-turn offset in the residue definition

#: stored residues are rounded to 15 decimals; recomputation must agree
_RESIDUE_MATCH = 2e-15


@dataclass(frozen=True)
class PointTableFile:
    """In-memory form of one persisted point table."""

    base_pair: tuple[int, int]
    order: int
    delta: float
    windows: tuple[Window, ...]
    points: tuple[ConfluencePoint, ...]

    @classmethod
    def from_points(cls, points: Sequence[ConfluencePoint]) -> "PointTableFile":
        if not points:
            raise TableFormatError("cannot persist an empty point table")
        head = points[0]
        if any(
            p.order != head.order or p.t.base_pair != head.t.base_pair
            for p in points
        ):
            raise TableFormatError("all points must share order and base pair")
        return cls(
            head.t.base_pair,
            head.order,
            head.delta,
            head.effective_windows(),
            tuple(points),
        )


def _k_definition(base_pair: tuple[int, int]) -> str:
    p1, p2 = base_pair
    return f"pi/(log {p2} - log {p1})"


def _format_windows(windows: Sequence[Window]) -> str:
    return ";".join(f"{kind}:{w!r}" for kind, w in windows)


def _parse_windows(text: str) -> tuple[Window, ...]:
    out = []
    for part in text.split(";"):
        kind, _, value = part.partition(":")
        if kind not in ("one", "sym") or not value:
            raise TableFormatError(f"malformed window {part!r}")
        out.append((kind, float(value)))
    return tuple(out)


def _checksummed(magic: str, body: str) -> str:
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return f"{magic}\nchecksum: {digest}\n{body}"


def _read_checksummed(path: Path, magic: str) -> list[str]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TableFormatError(f"cannot read {path}: {exc}") from exc
    lines = raw.split("\n")
    if not lines or lines[0] != magic:
        raise TableFormatError(
            f"{path}: expected header {magic!r}, got {lines[0] if lines else ''!r}"
        )
    if len(lines) < 2 or not lines[1].startswith("checksum: "):
        raise TableFormatError(f"{path}: missing checksum line")
    stored = lines[1][len("checksum: "):]
    body = "\n".join(lines[2:])
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if digest != stored:
        raise TableFormatError(f"{path}: checksum mismatch (file corrupted)")
    return [line for line in lines[2:] if line]


def _parse_fields(lines: list[str], path: Path, required: Sequence[str]) -> dict:
    fields = {}
    for line in lines:
        key, sep, value = line.partition(": ")
        if not sep:
            raise TableFormatError(f"{path}: malformed field line {line!r}")
        fields[key] = value
    for key in required:
        if key not in fields:
            raise TableFormatError(f"{path}: missing field {key!r}")
    return fields


# ---------------------------------------------------------------------------
# Point tables
# ---------------------------------------------------------------------------


def save_table(table: PointTableFile, path: Union[str, Path]) -> None:
    """Write the table in canonical byte-deterministic form."""
    path = Path(path)
    p1, p2 = table.base_pair
    lines = [
        f"pair: {p1},{p2}",
        f"order: {table.order}",
        f"delta: {table.delta!r}",
        f"theta: {_THETA}",
        f"k: {_k_definition(table.base_pair)}",
        f"windows: {_format_windows(table.windows)}",
        f"count: {len(table.points)}",
    ]
    for point in table.points:
        residues = " ".join(f"{float(r):+.15f}" for r in point.residues)
        lines.append(f"{point.q} {residues}")
    body = "\n".join(lines) + "\n"
    path.write_text(_checksummed(_POINTS_MAGIC, body), encoding="utf-8")


def load_table(path: Union[str, Path]) -> PointTableFile:
    """Read a point table, recomputing and re-verifying every residue.

    The stored residues are advisory; this recomputes each one from the
    exact q and requires agreement to the file's rounding, then re-checks
    the header windows, so a loaded table is as trustworthy as a freshly
    acquired one.
    """
    path = Path(path)
    lines = _read_checksummed(path, _POINTS_MAGIC)
    header = [ln for ln in lines if not ln[:1].isdigit()]
    rows = [ln for ln in lines if ln[:1].isdigit()]
    fields = _parse_fields(
        header, path,
        ["pair", "order", "delta", "theta", "k", "windows", "count"],
    )
    try:
        p1, p2 = (int(x) for x in fields["pair"].split(","))
        order = int(fields["order"])
        delta = float(fields["delta"])
        count = int(fields["count"])
    except ValueError as exc:
        raise TableFormatError(f"{path}: malformed header value: {exc}") from exc
    if fields["theta"] != _THETA:
        raise TableFormatError(f"{path}: unsupported theta {fields['theta']!r}")
    if fields["k"] != _k_definition((p1, p2)):
        raise TableFormatError(f"{path}: k definition does not match pair")
    windows = _parse_windows(fields["windows"])
    if len(windows) != order:
        raise TableFormatError(f"{path}: expected {order} windows")
    if len(rows) != count:
        raise TableFormatError(f"{path}: count says {count}, found {len(rows)} rows")

    primes = prime_sequence((p1, p2), order)
    points = []
    prev_q: Optional[int] = None
    for row in rows:
        parts = row.split(" ")
        if len(parts) != 1 + order:
            raise TableFormatError(f"{path}: row {parts[0]}: expected {order} residues")
        try:
            q = int(parts[0])
            stored = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise TableFormatError(f"{path}: malformed row: {exc}") from exc
        if prev_q is not None and q <= prev_q:
            raise TableFormatError(
                f"{path}: rows not sorted ascending at q={q}"
            )
        prev_q = q
        t = ExactT(q, (p1, p2))
        computed = tuple(residue(t, p) for p in primes)
        for p, r, s in zip(primes, computed, stored):
            if abs(float(r) - s) > _RESIDUE_MATCH:
                raise TableFormatError(
                    f"{path}: stored residue for prime {p} at q={q} is {s}, "
                    f"recomputed {float(r):+.15f} (file corrupted?)"
                )
        point = ConfluencePoint(order, t, delta, computed, windows)
        point.validate()
        points.append(point)
    return PointTableFile((p1, p2), order, delta, windows, tuple(points))


# ---------------------------------------------------------------------------
# Gap tables and walk state
# ---------------------------------------------------------------------------


def save_gap_table(table: GapTable, path: Union[str, Path]) -> None:
    body = (
        f"order: {table.order}\n"
        f"source_delta: {table.source_delta!r}\n"
        f"gaps: {','.join(str(g) for g in table.gaps)}\n"
        f"counts: {','.join(str(c) for c in table.counts)}\n"
    )
    Path(path).write_text(_checksummed(_GAPS_MAGIC, body), encoding="utf-8")


def load_gap_table(path: Union[str, Path]) -> GapTable:
    path = Path(path)
    fields = _parse_fields(
        _read_checksummed(path, _GAPS_MAGIC), path,
        ["order", "source_delta", "gaps", "counts"],
    )
    try:
        return GapTable(
            int(fields["order"]),
            tuple(int(g) for g in fields["gaps"].split(",")),
            tuple(int(c) for c in fields["counts"].split(",")),
            float(fields["source_delta"]),
        )
    except ValueError as exc:
        raise TableFormatError(f"{path}: malformed gap table: {exc}") from exc


def save_state(
    order: int,
    last_visited: Optional[ExactT],
    steps_done: int,
    delta_used: float,
    member_windows: Sequence[Window],
    path: Union[str, Path],
) -> None:
    """Persist one order's walk cursor so a later run can resume it."""
    body = (
        f"order: {order}\n"
        f"last_visited: {'-' if last_visited is None else last_visited.q}\n"
        f"steps_done: {steps_done}\n"
        f"delta_used: {delta_used!r}\n"
        f"member_windows: {_format_windows(member_windows)}\n"
    )
    Path(path).write_text(_checksummed(_STATE_MAGIC, body), encoding="utf-8")


def load_state(
    path: Union[str, Path], base_pair: tuple[int, int]
) -> tuple[int, Optional[ExactT], int, float, tuple[Window, ...]]:
    path = Path(path)
    fields = _parse_fields(
        _read_checksummed(path, _STATE_MAGIC), path,
        ["order", "last_visited", "steps_done", "delta_used", "member_windows"],
    )
    try:
        last = fields["last_visited"]
        return (
            int(fields["order"]),
            None if last == "-" else ExactT(int(last), base_pair),
            int(fields["steps_done"]),
            float(fields["delta_used"]),
            _parse_windows(fields["member_windows"]),
        )
    except ValueError as exc:
        raise TableFormatError(f"{path}: malformed state: {exc}") from exc


# ---------------------------------------------------------------------------
# Directory lock
# ---------------------------------------------------------------------------


class DirectoryLock:
    """Exclusive-writer lock on an output directory.

    Creation is atomic (O_EXCL); a second writer gets :class:`LockError`
    naming the holder.  Use as a context manager.  Readers never lock.
    """

    def __init__(self, directory: Union[str, Path]):
        self._path = Path(directory) / "confluence-run.lock"
        self._held = False

    def __enter__(self) -> "DirectoryLock":
        self._path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self._path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o644)
        except FileExistsError:
            holder = ""
            try:
                holder = self._path.read_text(encoding="utf-8").strip()
            except OSError:
                pass
            raise LockError(
                f"{self._path.parent} is locked by process {holder or 'unknown'}; "
                f"remove {self._path.name} if that process is gone"
            ) from None
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(f"{os.getpid()}\n")
        self._held = True
        return self

    def __exit__(self, *exc_info) -> None:
        if self._held:
            self._held = False
            try:
                self._path.unlink()
            except OSError:
                pass
