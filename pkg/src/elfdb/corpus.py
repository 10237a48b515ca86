"""Build corpora of parsed ELF files and expand them along DT_NEEDED edges.

Dependency resolution emulates the common dynamic-loader search order
(RPATH-without-RUNPATH up the loader chain, then the configured library
path, then the dependent's RUNPATH, then the default directories) against
an explicit SearchConfig rather than ambient process state.
"""

from __future__ import annotations

import logging
import os
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

from . import reader
from .reader import DT_RPATH, DT_RUNPATH, DT_SONAME, ElfObject

log = logging.getLogger(__name__)

DEFAULT_SEARCH_DIRS = (
    "/lib",
    "/usr/lib",
    "/lib/x86_64-linux-gnu",
    "/usr/lib/x86_64-linux-gnu",
)


class CorpusError(Exception):
    """Every input path failed to produce an entry."""


class Provenance(Enum):
    EXPLICIT = "EXPLICIT"
    RECURSIVE = "RECURSIVE"


@dataclass(frozen=True)
class CatalogEntry:
    path: str  # canonical absolute path
    provenance: Provenance
    object: ElfObject


@dataclass(frozen=True)
class UnresolvedDependency:
    soname: str
    dependent: str
    reason: str = "not found"


@dataclass(frozen=True)
class CorpusCatalog:
    """Parsed files in insertion order: explicit first, then BFS discovery."""

    entries: tuple[CatalogEntry, ...] = ()
    skipped: tuple[str, ...] = ()  # non-ELF files seen while walking
    read_errors: tuple[tuple[str, str], ...] = ()  # (path, why)
    unresolved: tuple[UnresolvedDependency, ...] = ()

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(e.path for e in self.entries)

    def get(self, path: str) -> Optional[CatalogEntry]:
        real = os.path.realpath(path)
        for entry in self.entries:
            if entry.path == real:
                return entry
        return None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class SearchConfig:
    ld_library_path: tuple[str, ...] = ()
    default_dirs: tuple[str, ...] = DEFAULT_SEARCH_DIRS
    origin_substitution: bool = True

    @classmethod
    def from_environment(cls, **overrides) -> "SearchConfig":
        """Copy LD_LIBRARY_PATH from the process environment."""
        raw = os.environ.get("LD_LIBRARY_PATH", "")
        dirs = tuple(d for d in raw.split(":") if d)
        return cls(ld_library_path=dirs, **overrides)


def _iter_directory(path: str, recurse: bool) -> Iterable[str]:
    if recurse:
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for name in sorted(files):
                yield os.path.join(root, name)
    else:
        with os.scandir(path) as it:
            for entry in sorted(it, key=lambda e: e.name):
                if not entry.is_dir():
                    yield entry.path


def add_paths(paths: Sequence[str], recurse_dirs: bool = False) -> CorpusCatalog:
    """Parse files (and directory members) into a catalog of EXPLICIT entries.

    Directories are walked one level deep unless `recurse_dirs`.  Non-ELF
    files inside directories are skipped and counted; unreadable or
    malformed inputs are collected as read errors.  Raises CorpusError only
    when paths were given and every one of them failed outright.
    """
    entries: list[CatalogEntry] = []
    seen: set[str] = set()
    skipped: list[str] = []
    errors: list[tuple[str, str]] = []
    any_ok = False

    def add_file(file_path: str, from_directory: bool) -> bool:
        real = os.path.realpath(file_path)
        if real in seen:
            return True
        try:
            with open(real, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            errors.append((file_path, str(exc)))
            return False
        if not data.startswith(reader.ELF_MAGIC):
            if from_directory:
                skipped.append(file_path)
                return True
            errors.append((file_path, "not an ELF file"))
            return False
        try:
            obj = reader.open_elf(data, real)
        except reader.ElfError as exc:
            errors.append((file_path, str(exc)))
            return False
        seen.add(real)
        entries.append(CatalogEntry(path=real, provenance=Provenance.EXPLICIT, object=obj))
        return True

    for path in paths:
        if os.path.isdir(path):
            ok = True
            try:
                for file_path in _iter_directory(path, recurse_dirs):
                    add_file(file_path, from_directory=True)
            except OSError as exc:
                errors.append((path, str(exc)))
                ok = False
            any_ok = any_ok or ok
        else:
            any_ok = add_file(path, from_directory=False) or any_ok

    for path, why in errors:
        log.warning("skipping %s: %s", path, why)
    if paths and not any_ok:
        detail = "; ".join(f"{p}: {why}" for p, why in errors)
        raise CorpusError(f"no usable inputs: {detail}")
    return CorpusCatalog(
        entries=tuple(entries), skipped=tuple(skipped), read_errors=tuple(errors)
    )


def _search_path_entries(obj: ElfObject, tag: int, origin_ok: bool) -> list[str]:
    raw = reader.dynamic_string(obj, tag)
    if not raw:
        return []
    origin = os.path.dirname(obj.path)
    dirs = []
    for part in raw.split(":"):
        if not part:
            continue
        if origin_ok:
            part = part.replace("${ORIGIN}", origin).replace("$ORIGIN", origin)
        dirs.append(part)
    return dirs


def _search_order(dependent_chain: Sequence[ElfObject], cfg: SearchConfig) -> list[str]:
    """Candidate directories for one NEEDED lookup, highest priority first."""
    dependent = dependent_chain[0]
    dirs: list[str] = []
    has_runpath = reader.dynamic_string(dependent, DT_RUNPATH) is not None
    if not has_runpath:
        for holder in dependent_chain:
            dirs += _search_path_entries(holder, DT_RPATH, cfg.origin_substitution)
    dirs += list(cfg.ld_library_path)
    dirs += _search_path_entries(dependent, DT_RUNPATH, cfg.origin_substitution)
    dirs += list(cfg.default_dirs)
    return dirs


def resolve_recursive(catalog: CorpusCatalog, cfg: Optional[SearchConfig] = None) -> CorpusCatalog:
    """Expand the catalog with the transitive closure of DT_NEEDED.

    Breadth-first and cycle-safe: a soname is resolved at most once, first
    existing regular file on the search path wins, and discovered objects
    join the catalog with RECURSIVE provenance.  Missing or unparseable
    dependencies are reported in `unresolved` and resolution continues.
    Idempotent: a second pass adds nothing.
    """
    if not catalog.entries:
        raise ValueError("resolve_recursive requires a non-empty catalog")
    if cfg is None:
        cfg = SearchConfig()

    entries = list(catalog.entries)
    known_paths = {e.path for e in entries}
    # A soname already provided by a catalog member is never re-resolved.
    settled: set[str] = set()
    for entry in entries:
        soname = reader.dynamic_string(entry.object, DT_SONAME)
        if soname:
            settled.add(soname)
        settled.add(os.path.basename(entry.path))

    unresolved: list[UnresolvedDependency] = []
    queue: deque[tuple[ElfObject, ...]] = deque((e.object,) for e in catalog.entries)
    while queue:
        chain = queue.popleft()
        dependent = chain[0]
        search_dirs = None
        for soname in reader.needed_libraries(dependent):
            if soname in settled:
                continue
            settled.add(soname)
            if search_dirs is None:
                search_dirs = _search_order(chain, cfg)
            found = None
            for directory in search_dirs:
                candidate = os.path.join(directory, soname)
                if os.path.isfile(candidate):
                    found = os.path.realpath(candidate)
                    break
            if found is None:
                unresolved.append(UnresolvedDependency(soname=soname, dependent=dependent.path))
                continue
            if found in known_paths:
                continue
            try:
                obj = reader.load_elf(found)
            except (reader.ElfError, OSError) as exc:
                unresolved.append(
                    UnresolvedDependency(soname=soname, dependent=dependent.path, reason=str(exc))
                )
                continue
            known_paths.add(found)
            entries.append(CatalogEntry(path=found, provenance=Provenance.RECURSIVE, object=obj))
            queue.append((obj, *chain))

    return replace(
        catalog,
        entries=tuple(entries),
        unresolved=tuple(unresolved),
    )
