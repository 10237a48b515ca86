import os

import pytest

from elfdb import analyses, corpus, engine
from elfdb.analyses import (
    UnknownPath,
    count_symbols,
    diff_symbols,
    interposition_audit,
    python_extension_check,
    runpath,
    symbol_histogram,
)
from elfdb.bench import GeneratedElfSpec, SymbolSpec, generate_elf, write_elf

from conftest import RUBY_LIKE, exported_funcs


def session_over(*paths):
    return engine.register(corpus.add_paths(list(paths)))


class TestInterpositionAudit:
    def test_planted_duplicate(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=exported_funcs("foo", "only_a"))
        write_elf(b, symbols=exported_funcs("foo", "only_b"))
        with session_over(a, b) as session:
            report = interposition_audit(session)
        assert report.columns == ("name", "version", "symbol_count", "libraries")
        assert len(report.rows) == 1
        name, version, count, libraries = report.rows[0]
        assert (name, version, count) == ("foo", None, 2)
        assert libraries == ":".join(sorted([os.path.realpath(a), os.path.realpath(b)]))

    def test_single_file_no_duplicates(self, tmp_path):
        a = str(tmp_path / "a.so")
        write_elf(a, symbols=exported_funcs("foo", "bar"))
        with session_over(a) as session:
            assert interposition_audit(session).rows == ()

    def test_bss_duplicates_excluded(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=[SymbolSpec("dup", sym_type="OBJECT", section=".bss", size=8)])
        write_elf(b, symbols=[SymbolSpec("dup", sym_type="OBJECT", section=".bss", size=8)])
        with session_over(a, b) as session:
            assert interposition_audit(session).rows == ()

    def test_local_and_imported_duplicates_excluded(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        for path in (a, b):
            write_elf(
                path,
                symbols=[
                    SymbolSpec("local_dup", binding="LOCAL"),
                    SymbolSpec("import_dup", section="SHN_UNDEF"),
                ],
            )
        with session_over(a, b) as session:
            assert interposition_audit(session).rows == ()

    def test_report_invariant_under_registration_order(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=exported_funcs("foo"))
        write_elf(b, symbols=exported_funcs("foo"))
        with session_over(a, b) as one, session_over(b, a) as two:
            assert interposition_audit(one).rows == interposition_audit(two).rows


class TestCountSymbols:
    def test_interpreter_fixture_is_22(self):
        with session_over(RUBY_LIKE) as session:
            assert count_symbols(session, RUBY_LIKE) == 22

    def test_null_only_imported_count_zero(self, tmp_path):
        lib = str(tmp_path / "n.so")
        write_elf(lib, symbols=[])
        with session_over(lib) as session:
            assert count_symbols(session, lib, imported_only=True) == 0
            assert count_symbols(session, lib) == 1

    def test_generated_file_counts_null_row(self, tmp_path):
        dest = str(tmp_path / "g.so")
        manifest = generate_elf(GeneratedElfSpec(symbol_count=37), dest)
        with session_over(dest) as session:
            assert count_symbols(session, dest) == len(manifest.names) + 1

    def test_falls_back_to_symtab(self, tmp_path):
        lib = str(tmp_path / "s.so")
        # no dynsym content beyond null, but a populated symtab
        write_elf(lib, symbols=[], symtab_symbols=exported_funcs("one", "two"))
        with session_over(lib) as session:
            # .dynsym exists (null only) so it wins the table choice
            assert count_symbols(session, lib) == 1

    def test_unknown_path(self, tmp_path):
        lib = str(tmp_path / "k.so")
        write_elf(lib, symbols=[])
        with session_over(lib) as session:
            with pytest.raises(UnknownPath):
                count_symbols(session, "/no/such/file")


class TestRunpath:
    def test_two_entries(self, tmp_path):
        lib = str(tmp_path / "r.so")
        write_elf(lib, symbols=exported_funcs("f"), runpath="/opt/lib:/usr/local/lib")
        with session_over(lib) as session:
            assert runpath(session, lib) == ["/opt/lib", "/usr/local/lib"]

    def test_absent(self, tmp_path):
        lib = str(tmp_path / "r.so")
        write_elf(lib, symbols=[])
        with session_over(lib) as session:
            assert runpath(session, lib) == []

    def test_split_semantics(self, tmp_path):
        lib = str(tmp_path / "r.so")
        write_elf(lib, symbols=exported_funcs("f"), runpath="a:b")
        with session_over(lib) as session:
            assert runpath(session, lib) == ["a", "b"]

    def test_rpath_fallback(self, tmp_path):
        lib = str(tmp_path / "r.so")
        write_elf(lib, symbols=exported_funcs("f"), rpath="/legacy")
        with session_over(lib) as session:
            assert runpath(session, lib) == ["/legacy"]


class TestPythonExtensionCheck:
    def test_py3_extension(self, tmp_path):
        lib = str(tmp_path / "spam3.so")
        write_elf(lib, symbols=exported_funcs("PyInit_spam"))
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "spam") == 3

    def test_py2_extension(self, tmp_path):
        lib = str(tmp_path / "spam2.so")
        write_elf(lib, symbols=exported_funcs("initspam"))
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "spam") == 2

    def test_cffi_pypy(self, tmp_path):
        lib = str(tmp_path / "cffi.so")
        write_elf(lib, symbols=exported_funcs("_cffi_pypyinit_spam"))
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "spam") == 2

    def test_imported_init_does_not_count(self, tmp_path):
        lib = str(tmp_path / "imp.so")
        write_elf(lib, symbols=[SymbolSpec("PyInit_spam", section="SHN_UNDEF")])
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "spam") is None

    def test_no_match(self, tmp_path):
        lib = str(tmp_path / "plain.so")
        write_elf(lib, symbols=exported_funcs("whatever"))
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "spam") is None

    def test_wrong_module_name(self, tmp_path):
        lib = str(tmp_path / "other.so")
        write_elf(lib, symbols=exported_funcs("PyInit_spam"))
        with session_over(lib) as session:
            assert python_extension_check(session, lib, "eggs") is None


class TestDiffSymbols:
    def test_identical_is_empty(self, tmp_path):
        lib = str(tmp_path / "same.so")
        write_elf(lib, symbols=exported_funcs("f", "g"))
        with session_over(lib) as session:
            assert diff_symbols(session, lib, lib).rows == ()

    def test_added_function(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=[SymbolSpec("f", size=8)])
        write_elf(b, symbols=[SymbolSpec("f", size=8), SymbolSpec("g", size=16)])
        with session_over(a, b) as session:
            report = diff_symbols(session, a, b)
        assert report.rows == (("ADDED", "g", "g", "FUNC", None, 16),)

    def test_zero_size_symbols_ignored(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=[SymbolSpec("zero", size=0)])
        write_elf(b, symbols=[])
        with session_over(a, b) as session:
            assert diff_symbols(session, a, b).rows == ()

    def test_added_removed_resized_trio(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(
            a,
            symbols=[
                SymbolSpec("stays", size=4),
                SymbolSpec("gone", sym_type="OBJECT", section=".data", size=8),
                SymbolSpec("grows", size=16),
            ],
        )
        write_elf(
            b,
            symbols=[
                SymbolSpec("stays", size=4),
                SymbolSpec("fresh", size=32),
                SymbolSpec("grows", size=24),
            ],
        )
        with session_over(a, b) as session:
            report = diff_symbols(session, a, b)
        assert report.rows == (
            ("ADDED", "fresh", "fresh", "FUNC", None, 32),
            ("REMOVED", "gone", "gone", "OBJECT", 8, None),
            ("RESIZED", "grows", "grows", "FUNC", 16, 24),
        )

    def test_added_equals_reverse_removed(self, tmp_path):
        a = str(tmp_path / "a.so")
        b = str(tmp_path / "b.so")
        write_elf(a, symbols=[SymbolSpec("x", size=4)])
        write_elf(b, symbols=[SymbolSpec("x", size=4), SymbolSpec("y", size=2)])
        with session_over(a, b) as session:
            forward = diff_symbols(session, a, b)
            backward = diff_symbols(session, b, a)
        added = [r[1:] for r in forward.rows if r[0] == "ADDED"]
        removed = [
            (r[1], r[2], r[3], None, r[4]) for r in backward.rows if r[0] == "REMOVED"
        ]
        assert added == removed

    def test_unknown_path(self, tmp_path):
        lib = str(tmp_path / "x.so")
        write_elf(lib, symbols=[])
        with session_over(lib) as session:
            with pytest.raises(UnknownPath):
                diff_symbols(session, lib, "/absent")


class TestSymbolHistogram:
    def test_planted_counts(self, tmp_path):
        targets = {"five.so": 5, "fifty.so": 50, "fivehundred.so": 500}
        paths = []
        for name, total in targets.items():
            dest = str(tmp_path / name)
            generate_elf(GeneratedElfSpec(symbol_count=total - 1), dest)
            paths.append(dest)
        with session_over(*paths) as session:
            report = symbol_histogram(session)
        counts = {os.path.basename(path): n for path, n in report.rows}
        assert counts == targets
        assert [n for _, n in report.rows] == [500, 50, 5]  # descending
        assert report.buckets == (("1-9", 1), ("10-99", 1), ("100-999", 1))

    def test_empty_corpus(self):
        with engine.register(corpus.CorpusCatalog()) as session:
            report = symbol_histogram(session)
        assert report.rows == ()
        assert report.buckets == ()

    def test_fixed_bucket_width(self, tmp_path):
        for i, total in enumerate((3, 7, 12)):
            generate_elf(GeneratedElfSpec(symbol_count=total - 1), str(tmp_path / f"f{i}.so"))
        with session_over(*(str(p) for p in sorted(tmp_path.iterdir()))) as session:
            report = symbol_histogram(session, bucket_width=10)
        assert report.buckets == (("0-9", 2), ("10-19", 1))
