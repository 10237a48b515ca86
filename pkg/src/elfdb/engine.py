"""Bridge between the relational schema and an embedded SQLite engine.

A Session owns an in-memory SQLite database holding the seven schema
tables.  Each table follows a strategy: MEMOIZED tables are filled when the
session is registered, LAZY tables are filled the first time a statement
references them, so queries only pay for the tables they touch.  (The
stdlib engine offers no Python-level virtual tables, so deferred
materialization stands in for lazy virtual evaluation; the observable
contract - pay at first query, identical results - is the same.)

`export_database` persists the whole schema to an ordinary SQLite 3 file
via CREATE TABLE ... AS SELECT, readable by any stock SQLite tooling.
"""

from __future__ import annotations

import os
import re
import sqlite3
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .corpus import CorpusCatalog
from .model import SCHEMA, TABLE_NAMES, TABLE_PRODUCERS


class RegistrationFailure(Exception):
    """The engine rejected the schema or the strategy set is invalid."""


class SqlError(Exception):
    """A statement failed to parse, bind, or run."""


class WriteRejected(SqlError):
    """A statement attempted to mutate the schema or its tables."""


class ExportAborted(Exception):
    """Materializing the export failed; no partial file is left behind."""


class StrategyMode(Enum):
    LAZY = "LAZY"
    MEMOIZED = "MEMOIZED"


@dataclass(frozen=True)
class TableStrategy:
    table_name: str
    mode: StrategyMode


@dataclass(frozen=True)
class QueryResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class ExportSummary:
    tables: int
    rows: int
    per_table: dict[str, int]


_CREATE_SQL = {
    name: 'CREATE TABLE "{}" ({})'.format(
        name, ", ".join(f'"{col}" {affinity}' for col, affinity in columns)
    )
    for name, columns in SCHEMA.items()
}

_INSERT_SQL = {
    name: 'INSERT INTO "{}" VALUES ({})'.format(name, ", ".join("?" * len(columns)))
    for name, columns in SCHEMA.items()
}

_TABLE_REFERENCE = re.compile(
    r"\b(" + "|".join(TABLE_NAMES) + r")\b", re.IGNORECASE
)

# Authorizer action codes that mutate state; everything else passes.
_DENIED_ACTIONS = frozenset(
    getattr(sqlite3, name)
    for name in (
        "SQLITE_INSERT",
        "SQLITE_UPDATE",
        "SQLITE_DELETE",
        "SQLITE_ALTER_TABLE",
        "SQLITE_REINDEX",
        "SQLITE_ANALYZE",
        "SQLITE_ATTACH",
        "SQLITE_DETACH",
        "SQLITE_TRANSACTION",
        "SQLITE_SAVEPOINT",
        "SQLITE_CREATE_INDEX",
        "SQLITE_CREATE_TABLE",
        "SQLITE_CREATE_TEMP_INDEX",
        "SQLITE_CREATE_TEMP_TABLE",
        "SQLITE_CREATE_TEMP_TRIGGER",
        "SQLITE_CREATE_TEMP_VIEW",
        "SQLITE_CREATE_TRIGGER",
        "SQLITE_CREATE_VIEW",
        "SQLITE_CREATE_VTABLE",
        "SQLITE_DROP_INDEX",
        "SQLITE_DROP_TABLE",
        "SQLITE_DROP_TEMP_INDEX",
        "SQLITE_DROP_TEMP_TABLE",
        "SQLITE_DROP_TEMP_TRIGGER",
        "SQLITE_DROP_TEMP_VIEW",
        "SQLITE_DROP_TRIGGER",
        "SQLITE_DROP_VIEW",
        "SQLITE_DROP_VTABLE",
    )
    if hasattr(sqlite3, name)
)

Strategies = Union[None, Iterable[TableStrategy], Mapping[str, StrategyMode]]


def _allow_all(_action, _arg1, _arg2, _dbname, _source):
    # set_authorizer(None) only clears the hook on Python 3.11+; installing a
    # permissive callback works everywhere.
    return sqlite3.SQLITE_OK


def _normalize_strategies(strategies: Strategies) -> dict[str, StrategyMode]:
    modes = {name: StrategyMode.LAZY for name in TABLE_NAMES}
    if strategies is None:
        return modes
    if isinstance(strategies, Mapping):
        items = strategies.items()
    else:
        items = [(s.table_name, s.mode) for s in strategies]
    for name, mode in items:
        key = name.lower()
        if key not in modes:
            raise RegistrationFailure(f"unknown table in strategy: {name!r}")
        modes[key] = StrategyMode(mode)
    return modes


class Session:
    """A SQL namespace over one immutable corpus.  One statement at a time."""

    def __init__(self, catalog: CorpusCatalog, strategies: Strategies = None):
        self._catalog = catalog
        self._modes = _normalize_strategies(strategies)
        self._conn = sqlite3.connect(":memory:", isolation_level=None)
        self._pending = set(TABLE_NAMES)
        self._write_denied = False
        try:
            for name in TABLE_NAMES:
                self._conn.execute(_CREATE_SQL[name])
        except sqlite3.Error as exc:
            raise RegistrationFailure(str(exc)) from exc
        for name in TABLE_NAMES:
            if self._modes[name] == StrategyMode.MEMOIZED:
                self._materialize(name)

    @property
    def catalog(self) -> CorpusCatalog:
        return self._catalog

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(e.path for e in self._catalog.entries)

    @property
    def table_names(self) -> tuple[str, ...]:
        return TABLE_NAMES

    def strategy(self, table_name: str) -> StrategyMode:
        return self._modes[table_name]

    def _materialize(self, table: str) -> None:
        if table not in self._pending:
            return
        producer = TABLE_PRODUCERS[table]
        rows = (tup for entry in self._catalog.entries for tup in producer(entry.object))
        self._conn.execute("BEGIN")
        try:
            self._conn.executemany(_INSERT_SQL[table], rows)
            self._conn.execute("COMMIT")
        except BaseException:
            self._conn.execute("ROLLBACK")
            raise
        self._pending.discard(table)

    def _materialize_referenced(self, sql: str) -> None:
        if not self._pending:
            return
        for match in _TABLE_REFERENCE.finditer(sql):
            self._materialize(match.group(1).lower())

    def materialize_all(self) -> None:
        for name in TABLE_NAMES:
            self._materialize(name)

    def _authorize(self, action, _arg1, _arg2, _dbname, _source):
        if action in _DENIED_ACTIONS:
            self._write_denied = True
            return sqlite3.SQLITE_DENY
        return sqlite3.SQLITE_OK

    def execute(self, sql: str, params: Optional[Mapping[str, object]] = None) -> QueryResult:
        """Run one read-only statement and fetch its full result set.

        Raises WriteRejected for any statement that would mutate state and
        SqlError for everything else the engine refuses.
        """
        self._materialize_referenced(sql)
        self._write_denied = False
        self._conn.set_authorizer(self._authorize)
        try:
            cursor = self._conn.execute(sql, dict(params) if params else {})
            rows = cursor.fetchall()
            columns = tuple(d[0] for d in cursor.description) if cursor.description else ()
        except (sqlite3.Error, sqlite3.Warning) as exc:
            if self._write_denied:
                raise WriteRejected(str(exc)) from exc
            raise SqlError(str(exc)) from exc
        finally:
            self._conn.set_authorizer(_allow_all)
        return QueryResult(columns=columns, rows=tuple(tuple(r) for r in rows))

    def schema_sql(self) -> tuple[str, ...]:
        cur = self._conn.execute(
            "SELECT sql FROM sqlite_master WHERE type = 'table' ORDER BY name"
        )
        return tuple(row[0] for row in cur.fetchall())

    def export_database(self, dest: Union[str, os.PathLike], overwrite: bool = False) -> ExportSummary:
        """Materialize every table into a standalone SQLite file at `dest`.

        Uses CREATE TABLE AS SELECT per table into a temp file, then atomically
        renames, so a failed export leaves nothing behind.  Raises
        FileExistsError when `dest` exists and `overwrite` is false.
        """
        dest = os.fspath(dest)
        if os.path.exists(dest) and not overwrite:
            raise FileExistsError(f"refusing to overwrite existing file: {dest}")
        dest_dir = os.path.dirname(os.path.abspath(dest)) or "."
        if not os.path.isdir(dest_dir):
            raise FileNotFoundError(f"no such directory: {dest_dir}")
        self.materialize_all()
        tmp = os.path.join(dest_dir, f".{os.path.basename(dest)}.tmp{os.getpid()}")
        per_table: dict[str, int] = {}
        try:
            self._conn.execute("ATTACH DATABASE ? AS export", (tmp,))
            try:
                self._conn.execute("BEGIN")
                for name in TABLE_NAMES:
                    self._conn.execute(
                        f'CREATE TABLE export."{name}" AS SELECT * FROM main."{name}"'
                    )
                    count = self._conn.execute(
                        f'SELECT COUNT(*) FROM export."{name}"'
                    ).fetchone()[0]
                    per_table[name] = count
                self._conn.execute("COMMIT")
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise
            finally:
                self._conn.execute("DETACH DATABASE export")
            os.replace(tmp, dest)
        except (sqlite3.Error, OSError) as exc:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise ExportAborted(str(exc)) from exc
        return ExportSummary(
            tables=len(TABLE_NAMES), rows=sum(per_table.values()), per_table=per_table
        )

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def register(catalog: CorpusCatalog, strategies: Strategies = None) -> Session:
    """Create a Session whose SQL namespace holds all seven schema tables."""
    return Session(catalog, strategies)
