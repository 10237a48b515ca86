"""Shared fixtures and independent oracles.

The oracles shell out to binutils (readelf, c++filt) and parse its text
output; they never touch the package's own parsing path, so count, version,
and dynamic-entry comparisons are genuinely independent cross-checks.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
from dataclasses import dataclass
from typing import Optional

import pytest

from elfdb import bench
from elfdb.bench import SymbolSpec

READELF = shutil.which("readelf")
CXXFILT = shutil.which("c++filt")

SYSTEM_DIRS = ("/bin", "/usr/bin", "/lib/x86_64-linux-gnu", "/usr/lib/x86_64-linux-gnu")

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
RUBY_LIKE = os.path.join(FIXTURE_DIR, "ruby_like.so")


def require_readelf():
    if READELF is None:
        pytest.skip("readelf not available for oracle comparison")


def run_readelf(*args: str) -> str:
    require_readelf()
    return subprocess.run(
        [READELF, *args], capture_output=True, text=True, check=True
    ).stdout


_TABLE_HEADER = re.compile(r"Symbol table '(\S+)' contains (\d+) entries:")
_SYMBOL_LINE = re.compile(
    r"^\s*(\d+):\s+([0-9a-fA-F]+)\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*(.*)$"
)


@dataclass(frozen=True)
class OracleSymbol:
    index: int
    value: int
    size: str
    sym_type: str
    bind: str
    vis: str
    ndx: str
    name: str
    version: Optional[str]
    version_default: bool


def _split_versioned_name(raw: str) -> tuple[str, Optional[str], bool]:
    raw = re.sub(r"\s+\(\d+\)$", "", raw.strip())  # drop the " (N)" index suffix
    if "@@" in raw:
        name, version = raw.split("@@", 1)
        return name, version, True
    if "@" in raw:
        name, version = raw.rsplit("@", 1)
        return name, version, False
    return raw, None, False


def readelf_symbol_tables(path: str) -> dict[str, list[OracleSymbol]]:
    """All symbol tables as readelf reports them, keyed by section name."""
    out = run_readelf("-sW", path)
    tables: dict[str, list[OracleSymbol]] = {}
    current: Optional[list[OracleSymbol]] = None
    for line in out.splitlines():
        header = _TABLE_HEADER.search(line)
        if header:
            current = tables.setdefault(header.group(1), [])
            continue
        if current is None:
            continue
        m = _SYMBOL_LINE.match(line)
        if not m or m.group(3) == "Size":
            continue
        name, version, default = _split_versioned_name(m.group(8))
        current.append(
            OracleSymbol(
                index=int(m.group(1)),
                value=int(m.group(2), 16),
                size=m.group(3),
                sym_type=m.group(4),
                bind=m.group(5),
                vis=m.group(6),
                ndx=m.group(7),
                name=name,
                version=version,
                version_default=default,
            )
        )
    return tables


def readelf_table_counts(path: str) -> dict[str, int]:
    out = run_readelf("-sW", path)
    return {m.group(1): int(m.group(2)) for m in _TABLE_HEADER.finditer(out)}


_DYNAMIC_LINE = re.compile(r"^ 0x[0-9a-fA-F]+ \((\w+)\)\s+(.*)$")
_BRACKETED = re.compile(r"\[(.*)\]$")


def readelf_dynamic(path: str) -> list[tuple[str, str]]:
    """(tag, text) rows from readelf -d; bracket values are unwrapped."""
    out = run_readelf("-dW", path)
    rows = []
    for line in out.splitlines():
        m = _DYNAMIC_LINE.match(line)
        if not m:
            continue
        value = m.group(2).strip()
        bracket = _BRACKETED.search(value)
        rows.append((m.group(1), bracket.group(1) if bracket else value))
    return rows


def cxxfilt(name: str) -> str:
    if CXXFILT is None:
        pytest.skip("c++filt not available for oracle comparison")
    return subprocess.run(
        [CXXFILT, name], capture_output=True, text=True, check=True
    ).stdout.strip()


_SEED_ELVES = (
    "/bin/ls",
    "/bin/cat",
    "/lib/x86_64-linux-gnu/libc.so.6",
    "/lib/x86_64-linux-gnu/libz.so.1",
)


def system_elves(limit: int = 24) -> list[str]:
    """Real ELF files from the system, deterministic order, deduplicated."""
    found: list[str] = []
    seen: set[str] = set()
    for path in _SEED_ELVES:
        if os.path.isfile(path):
            real = os.path.realpath(path)
            if real not in seen:
                seen.add(real)
                found.append(real)
    for root in SYSTEM_DIRS:
        if not os.path.isdir(root):
            continue
        for name in sorted(os.listdir(root)):
            path = os.path.join(root, name)
            if not os.path.isfile(path):
                continue
            try:
                with open(path, "rb") as fh:
                    magic = fh.read(4)
            except OSError:
                continue
            if magic != b"\x7fELF":
                continue
            real = os.path.realpath(path)
            if real in seen:
                continue
            seen.add(real)
            found.append(real)
            if len(found) >= limit:
                return found
    return found


@pytest.fixture
def make_elf(tmp_path):
    """Factory writing one synthetic ELF into the test's tmp dir."""

    def build(name: str = "lib.so", **kwargs) -> bench.WrittenElf:
        return bench.write_elf(str(tmp_path / name), **kwargs)

    return build


def exported_funcs(*names: str) -> list[SymbolSpec]:
    return [SymbolSpec(name=n) for n in names]
