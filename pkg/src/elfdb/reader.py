"""Parser turning raw ELF bytes into an immutable in-memory object model.

Supports ELF32 and ELF64 in either byte order.  Parsing is strict: a
truncated table, an out-of-range offset, or a string offset past its
table's end fails the whole file rather than producing partial results.
The model is purely structural; relational concerns live in `model`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class ElfError(Exception):
    """Base class for parse failures."""


class NotElf(ElfError):
    """The input does not start with the ELF magic bytes."""


class Malformed(ElfError):
    """The input claims to be ELF but violates the format; carries a reason."""


ELF_MAGIC = b"\x7fELF"

# e_ident indices
EI_CLASS, EI_DATA, EI_VERSION, EI_OSABI, EI_ABIVERSION = 4, 5, 6, 7, 8

# Section header types
SHT_NULL = 0
SHT_PROGBITS = 1
SHT_SYMTAB = 2
SHT_STRTAB = 3
SHT_DYNAMIC = 6
SHT_NOBITS = 8
SHT_DYNSYM = 11
SHT_GNU_VERDEF = 0x6FFFFFFD
SHT_GNU_VERNEED = 0x6FFFFFFE
SHT_GNU_VERSYM = 0x6FFFFFFF

# Reserved section indices
SHN_UNDEF = 0
SHN_LORESERVE = 0xFF00
SHN_ABS = 0xFFF1
SHN_COMMON = 0xFFF2
SHN_XINDEX = 0xFFFF

# Section flag bits, rendered readelf-style as single letters.
SECTION_FLAG_LETTERS = (
    (0x1, "W"),          # WRITE
    (0x2, "A"),          # ALLOC
    (0x4, "X"),          # EXECINSTR
    (0x10, "M"),         # MERGE
    (0x20, "S"),         # STRINGS
    (0x40, "I"),         # INFO_LINK
    (0x80, "L"),         # LINK_ORDER
    (0x100, "O"),        # OS_NONCONFORMING
    (0x200, "G"),        # GROUP
    (0x400, "T"),        # TLS
    (0x800, "C"),        # COMPRESSED
    (0x80000000, "E"),   # EXCLUDE
)

SHF_ALLOC = 0x2
SHF_EXECINSTR = 0x4

# Program header flag bits
PF_X, PF_W, PF_R = 0x1, 0x2, 0x4

# Dynamic tags
DT_NULL = 0
DT_NEEDED = 1
DT_SONAME = 14
DT_RPATH = 15
DT_RUNPATH = 29

FILE_TYPE_NAMES = {1: "REL", 2: "EXEC", 3: "DYN", 4: "CORE"}

MACHINE_NAMES = {
    0: "NONE",
    2: "SPARC",
    3: "386",
    8: "MIPS",
    20: "PPC",
    21: "PPC64",
    22: "S390",
    40: "ARM",
    50: "IA_64",
    62: "X86_64",
    183: "AARCH64",
    243: "RISCV",
    247: "BPF",
    258: "LOONGARCH",
}

EM_X86_64 = 62

OSABI_NAMES = {
    0: "SYSV",
    1: "HPUX",
    2: "NETBSD",
    3: "GNU",
    6: "SOLARIS",
    8: "IRIX",
    9: "FREEBSD",
    10: "TRU64",
    12: "OPENBSD",
    97: "ARM",
    255: "STANDALONE",
}

SECTION_TYPE_NAMES = {
    0: "NULL",
    1: "PROGBITS",
    2: "SYMTAB",
    3: "STRTAB",
    4: "RELA",
    5: "HASH",
    6: "DYNAMIC",
    7: "NOTE",
    8: "NOBITS",
    9: "REL",
    10: "SHLIB",
    11: "DYNSYM",
    14: "INIT_ARRAY",
    15: "FINI_ARRAY",
    16: "PREINIT_ARRAY",
    17: "GROUP",
    18: "SYMTAB_SHNDX",
    19: "RELR",
    0x6FFFFFF5: "GNU_ATTRIBUTES",
    0x6FFFFFF6: "GNU_HASH",
    0x6FFFFFF7: "GNU_LIBLIST",
    0x6FFFFFFD: "GNU_VERDEF",
    0x6FFFFFFE: "GNU_VERNEED",
    0x6FFFFFFF: "GNU_VERSYM",
}

SEGMENT_TYPE_NAMES = {
    0: "NULL",
    1: "LOAD",
    2: "DYNAMIC",
    3: "INTERP",
    4: "NOTE",
    5: "SHLIB",
    6: "PHDR",
    7: "TLS",
    0x6474E550: "GNU_EH_FRAME",
    0x6474E551: "GNU_STACK",
    0x6474E552: "GNU_RELRO",
    0x6474E553: "GNU_PROPERTY",
    0x6474E554: "GNU_SFRAME",
}

SYMBOL_TYPE_NAMES = {
    0: "NOTYPE",
    1: "OBJECT",
    2: "FUNC",
    3: "SECTION",
    4: "FILE",
    6: "TLS",
    10: "GNU_IFUNC",
}

SYMBOL_BINDING_NAMES = {0: "LOCAL", 1: "GLOBAL", 2: "WEAK"}

SYMBOL_VISIBILITY_NAMES = {0: "DEFAULT", 1: "INTERNAL", 2: "HIDDEN", 3: "PROTECTED"}

DYNAMIC_TAG_NAMES = {
    0: "NULL",
    1: "NEEDED",
    2: "PLTRELSZ",
    3: "PLTGOT",
    4: "HASH",
    5: "STRTAB",
    6: "SYMTAB",
    7: "RELA",
    8: "RELASZ",
    9: "RELAENT",
    10: "STRSZ",
    11: "SYMENT",
    12: "INIT",
    13: "FINI",
    14: "SONAME",
    15: "RPATH",
    16: "SYMBOLIC",
    17: "REL",
    18: "RELSZ",
    19: "RELENT",
    20: "PLTREL",
    21: "DEBUG",
    22: "TEXTREL",
    23: "JMPREL",
    24: "BIND_NOW",
    25: "INIT_ARRAY",
    26: "FINI_ARRAY",
    27: "INIT_ARRAYSZ",
    28: "FINI_ARRAYSZ",
    29: "RUNPATH",
    30: "FLAGS",
    32: "PREINIT_ARRAY",
    33: "PREINIT_ARRAYSZ",
    34: "SYMTAB_SHNDX",
    35: "RELRSZ",
    36: "RELR",
    37: "RELRENT",
    0x6FFFFDF5: "GNU_PRELINKED",
    0x6FFFFDF6: "GNU_CONFLICTSZ",
    0x6FFFFDF7: "GNU_LIBLISTSZ",
    0x6FFFFEF5: "GNU_HASH",
    0x6FFFFFF0: "VERSYM",
    0x6FFFFFF9: "RELACOUNT",
    0x6FFFFFFA: "RELCOUNT",
    0x6FFFFFFB: "FLAGS_1",
    0x6FFFFFFC: "VERDEF",
    0x6FFFFFFD: "VERDEFNUM",
    0x6FFFFFFE: "VERNEED",
    0x6FFFFFFF: "VERNEEDNUM",
}


def render_code(code: int, names: dict[int, str]) -> str:
    """Canonical text for an enum code: the known name, else decimal."""
    return names.get(code, str(code))


def section_flag_letters(flags: int) -> str:
    return "".join(letter for bit, letter in SECTION_FLAG_LETTERS if flags & bit)


def segment_flag_letters(flags: int) -> str:
    out = ""
    if flags & PF_R:
        out += "R"
    if flags & PF_W:
        out += "W"
    if flags & PF_X:
        out += "X"
    return out


def decode_bytes(raw: bytes) -> str:
    # Lossless-enough rendering: UTF-8 with escapes for stray bytes, so the
    # result is always a bindable str containing no NUL surprises.
    return raw.decode("utf-8", "backslashreplace")


class ElfClass(Enum):
    ELF32 = 1
    ELF64 = 2


class DataEncoding(Enum):
    LSB = 1
    MSB = 2


class SymbolTableKind(Enum):
    """Which symbol table a symbol came from."""

    SYMTAB = ".symtab"
    DYNSYM = ".dynsym"


@dataclass(frozen=True, slots=True)
class ElfIdent:
    elf_class: ElfClass
    data_encoding: DataEncoding
    ei_version: int
    os_abi: int
    abi_version: int


@dataclass(frozen=True, slots=True)
class ElfHeader:
    ident: ElfIdent
    file_type_code: int
    machine_code: int
    version: int
    entry_point: int
    phoff: int
    shoff: int
    flags: int
    ehsize: int
    phentsize: int
    phnum: int
    shentsize: int
    shnum: int
    shstrndx: int

    @property
    def file_type(self) -> str:
        return render_code(self.file_type_code, FILE_TYPE_NAMES)

    @property
    def machine(self) -> str:
        return render_code(self.machine_code, MACHINE_NAMES)


@dataclass(frozen=True, slots=True)
class Section:
    index: int
    name: str
    type_code: int
    flags: int
    address: int
    offset: int
    size: int
    link: int
    info: int
    addralign: int
    entsize: int
    content: bytes

    @property
    def type_name(self) -> str:
        return render_code(self.type_code, SECTION_TYPE_NAMES)

    @property
    def flag_letters(self) -> str:
        return section_flag_letters(self.flags)


@dataclass(frozen=True, slots=True)
class Segment:
    index: int
    type_code: int
    flags: int
    offset: int
    vaddr: int
    paddr: int
    filesz: int
    memsz: int
    align: int

    @property
    def type_name(self) -> str:
        return render_code(self.type_code, SEGMENT_TYPE_NAMES)

    @property
    def flag_letters(self) -> str:
        return segment_flag_letters(self.flags)


@dataclass(frozen=True, slots=True)
class RawSymbol:
    table: SymbolTableKind
    index: int
    name_offset: int
    name: str
    value: int
    size: int
    type_code: int
    binding_code: int
    visibility_code: int
    shndx: int
    version: Optional[str]
    version_default: bool

    @property
    def type_name(self) -> str:
        return render_code(self.type_code, SYMBOL_TYPE_NAMES)

    @property
    def binding_name(self) -> str:
        return render_code(self.binding_code, SYMBOL_BINDING_NAMES)

    @property
    def visibility_name(self) -> str:
        return render_code(self.visibility_code, SYMBOL_VISIBILITY_NAMES)


@dataclass(frozen=True, slots=True)
class DynamicEntry:
    ordinal: int
    tag_code: int
    value: int

    @property
    def tag_name(self) -> str:
        return render_code(self.tag_code, DYNAMIC_TAG_NAMES)


@dataclass(frozen=True, slots=True)
class ElfObject:
    """One fully parsed ELF file.  Immutable; safe to share across threads."""

    path: str
    header: ElfHeader
    sections: tuple[Section, ...]
    segments: tuple[Segment, ...]
    symbols: tuple[RawSymbol, ...]
    dynamic: tuple[DynamicEntry, ...]
    # Version machinery for .dynsym: the raw versym words plus the maps
    # resolving a version index to its string (needed vs defined).
    versym: tuple[int, ...] = ()
    verneed: dict[int, str] = field(default_factory=dict)
    verdef: dict[int, str] = field(default_factory=dict)

    def sections_of_type(self, type_code: int) -> tuple[Section, ...]:
        return tuple(s for s in self.sections if s.type_code == type_code)

    def section_named(self, name: str) -> Optional[Section]:
        for s in self.sections:
            if s.name == name:
                return s
        return None

    def symbols_in(self, table: SymbolTableKind) -> tuple[RawSymbol, ...]:
        return tuple(s for s in self.symbols if s.table == table)


def string_at(table: bytes, offset: int, what: str) -> str:
    """The NUL-terminated string at `offset`; Malformed if out of bounds."""
    if offset >= len(table):
        raise Malformed(f"{what} string offset {offset} past table end ({len(table)})")
    end = table.find(b"\x00", offset)
    if end < 0:
        raise Malformed(f"{what} string at offset {offset} is not NUL-terminated")
    return decode_bytes(table[offset:end])


class _Layouts:
    """struct.Struct instances for one class/endianness combination."""

    def __init__(self, elf_class: ElfClass, encoding: DataEncoding):
        bo = "<" if encoding == DataEncoding.LSB else ">"
        if elf_class == ElfClass.ELF64:
            self.ehdr = struct.Struct(bo + "HHIQQQIHHHHHH")
            self.shdr = struct.Struct(bo + "IIQQQQIIQQ")
            self.phdr = struct.Struct(bo + "IIQQQQQQ")
            self.sym = struct.Struct(bo + "IBBHQQ")
            self.dyn = struct.Struct(bo + "QQ")
            self.phdr_has_leading_flags = True
            self.sym_is_64 = True
        else:
            self.ehdr = struct.Struct(bo + "HHIIIIIHHHHHH")
            self.shdr = struct.Struct(bo + "IIIIIIIIII")
            self.phdr = struct.Struct(bo + "IIIIIIII")
            self.sym = struct.Struct(bo + "IIIBBH")
            self.dyn = struct.Struct(bo + "II")
            self.phdr_has_leading_flags = False
            self.sym_is_64 = False
        self.half = struct.Struct(bo + "H")
        self.verneed = struct.Struct(bo + "HHIII")
        self.vernaux = struct.Struct(bo + "IHHII")
        self.verdef = struct.Struct(bo + "HHHHIII")
        self.verdaux = struct.Struct(bo + "II")


_LAYOUT_CACHE: dict[tuple[ElfClass, DataEncoding], _Layouts] = {}


def _layouts(elf_class: ElfClass, encoding: DataEncoding) -> _Layouts:
    key = (elf_class, encoding)
    if key not in _LAYOUT_CACHE:
        _LAYOUT_CACHE[key] = _Layouts(*key)
    return _LAYOUT_CACHE[key]


def _parse_ident(data: bytes) -> ElfIdent:
    if len(data) < 4 or data[:4] != ELF_MAGIC:
        raise NotElf("missing ELF magic")
    if len(data) < 16:
        raise Malformed("truncated header")
    try:
        elf_class = ElfClass(data[EI_CLASS])
        encoding = DataEncoding(data[EI_DATA])
    except ValueError:
        raise Malformed(
            f"unsupported class/encoding bytes {data[EI_CLASS]}/{data[EI_DATA]}"
        ) from None
    return ElfIdent(
        elf_class=elf_class,
        data_encoding=encoding,
        ei_version=data[EI_VERSION],
        os_abi=data[EI_OSABI],
        abi_version=data[EI_ABIVERSION],
    )


def _parse_header(data: bytes, ident: ElfIdent, lay: _Layouts) -> ElfHeader:
    want = 16 + lay.ehdr.size
    if len(data) < want:
        raise Malformed("truncated header")
    (
        e_type,
        e_machine,
        e_version,
        e_entry,
        e_phoff,
        e_shoff,
        e_flags,
        e_ehsize,
        e_phentsize,
        e_phnum,
        e_shentsize,
        e_shnum,
        e_shstrndx,
    ) = lay.ehdr.unpack_from(data, 16)
    return ElfHeader(
        ident=ident,
        file_type_code=e_type,
        machine_code=e_machine,
        version=e_version,
        entry_point=e_entry,
        phoff=e_phoff,
        shoff=e_shoff,
        flags=e_flags,
        ehsize=e_ehsize,
        phentsize=e_phentsize,
        phnum=e_phnum,
        shentsize=e_shentsize,
        shnum=e_shnum,
        shstrndx=e_shstrndx,
    )


def _parse_sections(data: bytes, hdr: ElfHeader, lay: _Layouts) -> tuple[list, int, int]:
    """Raw section records plus the effective shnum/shstrndx.

    Handles extended numbering: e_shnum == 0 stores the real count in
    section 0's sh_size, and e_shstrndx == SHN_XINDEX stores the real string
    table index in section 0's sh_link.
    """
    if hdr.shoff == 0:
        return [], 0, 0
    if hdr.shentsize < lay.shdr.size:
        raise Malformed(f"section header entry size {hdr.shentsize} too small")
    if hdr.shoff + hdr.shentsize > len(data):
        raise Malformed("section header table out of bounds")
    first = lay.shdr.unpack_from(data, hdr.shoff)
    shnum = hdr.shnum if hdr.shnum != 0 else first[5]  # sh_size of section 0
    shstrndx = hdr.shstrndx if hdr.shstrndx != SHN_XINDEX else first[6]  # sh_link
    if hdr.shoff + shnum * hdr.shentsize > len(data):
        raise Malformed("section header table out of bounds")
    raw = [lay.shdr.unpack_from(data, hdr.shoff + i * hdr.shentsize) for i in range(shnum)]
    return raw, shnum, shstrndx


def _section_content(data: bytes, type_code: int, offset: int, size: int, index: int) -> bytes:
    if type_code in (SHT_NULL, SHT_NOBITS):
        return b""
    if offset + size > len(data):
        raise Malformed(f"section {index} content [{offset}, {offset + size}) out of bounds")
    return data[offset : offset + size]


def _parse_segments(data: bytes, hdr: ElfHeader, lay: _Layouts) -> list[Segment]:
    if hdr.phoff == 0 or hdr.phnum == 0:
        return []
    if hdr.phentsize < lay.phdr.size:
        raise Malformed(f"program header entry size {hdr.phentsize} too small")
    if hdr.phoff + hdr.phnum * hdr.phentsize > len(data):
        raise Malformed("program header table out of bounds")
    segments = []
    for i in range(hdr.phnum):
        rec = lay.phdr.unpack_from(data, hdr.phoff + i * hdr.phentsize)
        if lay.phdr_has_leading_flags:
            p_type, p_flags, p_offset, p_vaddr, p_paddr, p_filesz, p_memsz, p_align = rec
        else:
            p_type, p_offset, p_vaddr, p_paddr, p_filesz, p_memsz, p_flags, p_align = rec
        if p_filesz > p_memsz:
            raise Malformed(f"segment {i} filesz {p_filesz} exceeds memsz {p_memsz}")
        if p_offset + p_filesz > len(data):
            raise Malformed(f"segment {i} file range out of bounds")
        segments.append(
            Segment(
                index=i,
                type_code=p_type,
                flags=p_flags,
                offset=p_offset,
                vaddr=p_vaddr,
                paddr=p_paddr,
                filesz=p_filesz,
                memsz=p_memsz,
                align=p_align,
            )
        )
    return segments


def _parse_versym(section: Section, lay: _Layouts) -> tuple[int, ...]:
    count = section.size // 2
    return tuple(lay.half.unpack_from(section.content, i * 2)[0] for i in range(count))


def _parse_verneed(section: Section, strtab: bytes, count: int, lay: _Layouts) -> dict[int, str]:
    """Map version index -> version name from a GNU verneed section."""
    out: dict[int, str] = {}
    buf = section.content
    offset = 0
    for _ in range(count):
        if offset + lay.verneed.size > len(buf):
            raise Malformed("verneed entry out of bounds")
        _vn_version, vn_cnt, _vn_file, vn_aux, vn_next = lay.verneed.unpack_from(buf, offset)
        aux = offset + vn_aux
        for _ in range(vn_cnt):
            if aux + lay.vernaux.size > len(buf):
                raise Malformed("vernaux entry out of bounds")
            _hash, _flags, vna_other, vna_name, vna_next = lay.vernaux.unpack_from(buf, aux)
            out[vna_other & 0x7FFF] = string_at(strtab, vna_name, "version")
            if vna_next == 0:
                break
            aux += vna_next
        if vn_next == 0:
            break
        offset += vn_next
    return out


def _parse_verdef(section: Section, strtab: bytes, count: int, lay: _Layouts) -> dict[int, str]:
    """Map version index -> version name from a GNU verdef section."""
    out: dict[int, str] = {}
    buf = section.content
    offset = 0
    for _ in range(count):
        if offset + lay.verdef.size > len(buf):
            raise Malformed("verdef entry out of bounds")
        _ver, _flags, vd_ndx, vd_cnt, _hash, vd_aux, vd_next = lay.verdef.unpack_from(buf, offset)
        if vd_cnt >= 1:
            aux = offset + vd_aux
            if aux + lay.verdaux.size > len(buf):
                raise Malformed("verdaux entry out of bounds")
            vda_name, _vda_next = lay.verdaux.unpack_from(buf, aux)
            out[vd_ndx & 0x7FFF] = string_at(strtab, vda_name, "version")
        if vd_next == 0:
            break
        offset += vd_next
    return out


def _resolve_version(
    versym: tuple[int, ...],
    verneed: dict[int, str],
    verdef: dict[int, str],
    sym_index: int,
) -> tuple[Optional[str], bool]:
    """(version, default) for one .dynsym index, per the GNU versioning rules.

    Index 0/1 (LOCAL/GLOBAL) and symbols beyond the versym array carry no
    version.  Defined versions honor the hidden bit: clear means the default
    definition.  Needed versions are never the default.
    """
    if sym_index >= len(versym):
        return None, False
    word = versym[sym_index]
    idx = word & 0x7FFF
    hidden = bool(word & 0x8000)
    if idx <= 1:
        return None, False
    if idx in verdef:
        return verdef[idx], not hidden
    if idx in verneed:
        return verneed[idx], False
    raise Malformed(f"version index {idx} not defined by verneed/verdef")


def _linked_strtab(sections: list[Section], link: int, what: str) -> bytes:
    if link >= len(sections):
        raise Malformed(f"{what} string table link {link} out of range")
    return sections[link].content


def _parse_symbols(
    data_sections: list[Section],
    lay: _Layouts,
    versym: tuple[int, ...],
    verneed: dict[int, str],
    verdef: dict[int, str],
    shnum: int,
) -> list[RawSymbol]:
    symbols: list[RawSymbol] = []
    for kind, type_code in ((SymbolTableKind.DYNSYM, SHT_DYNSYM), (SymbolTableKind.SYMTAB, SHT_SYMTAB)):
        for sec in data_sections:
            if sec.type_code != type_code:
                continue
            entsize = lay.sym.size
            if sec.entsize != 0 and sec.entsize != entsize:
                raise Malformed(f"symbol table {sec.name!r} entsize {sec.entsize} != {entsize}")
            if sec.size % entsize != 0:
                raise Malformed(f"symbol table {sec.name!r} size not a multiple of {entsize}")
            strtab = _linked_strtab(data_sections, sec.link, f"symbol table {sec.name!r}")
            count = sec.size // entsize
            versioned = kind == SymbolTableKind.DYNSYM and versym
            for i in range(count):
                rec = lay.sym.unpack_from(sec.content, i * entsize)
                if lay.sym_is_64:
                    st_name, st_info, st_other, st_shndx, st_value, st_size = rec
                else:
                    st_name, st_value, st_size, st_info, st_other, st_shndx = rec
                name = string_at(strtab, st_name, "symbol name")
                if not (st_shndx < shnum or st_shndx >= SHN_LORESERVE):
                    raise Malformed(
                        f"symbol {i} in {sec.name!r} references section {st_shndx} "
                        f"of {shnum}"
                    )
                version: Optional[str] = None
                default = False
                if versioned:
                    version, default = _resolve_version(versym, verneed, verdef, i)
                symbols.append(
                    RawSymbol(
                        table=kind,
                        index=i,
                        name_offset=st_name,
                        name=name,
                        value=st_value,
                        size=st_size,
                        type_code=st_info & 0xF,
                        binding_code=st_info >> 4,
                        visibility_code=st_other & 0x3,
                        shndx=st_shndx,
                        version=version,
                        version_default=default,
                    )
                )
    return symbols


def _parse_dynamic(sections: list[Section], lay: _Layouts) -> list[DynamicEntry]:
    entries: list[DynamicEntry] = []
    for sec in sections:
        if sec.type_code != SHT_DYNAMIC:
            continue
        entsize = lay.dyn.size
        count = len(sec.content) // entsize
        for i in range(count):
            d_tag, d_val = lay.dyn.unpack_from(sec.content, i * entsize)
            entries.append(DynamicEntry(ordinal=i, tag_code=d_tag, value=d_val))
            if d_tag == DT_NULL:
                return entries
        return entries
    return entries


def open_elf(data: bytes, origin_path: str) -> ElfObject:
    """Parse `data` (a whole ELF file) into an ElfObject keyed by `origin_path`.

    Raises NotElf when the magic is absent and Malformed for any structural
    violation; a single bad record fails the whole file.
    """
    ident = _parse_ident(data)
    lay = _layouts(ident.elf_class, ident.data_encoding)
    hdr = _parse_header(data, ident, lay)

    raw_sections, shnum, shstrndx = _parse_sections(data, hdr, lay)
    if shnum and not shstrndx < shnum:
        raise Malformed(f"shstrndx {shstrndx} out of range ({shnum} sections)")

    # First pass: contents; second pass: names via the section header strtab.
    unnamed = []
    for i, rec in enumerate(raw_sections):
        sh_name, sh_type, sh_flags, sh_addr, sh_offset, sh_size, sh_link, sh_info, sh_align, sh_entsize = rec
        content = _section_content(data, sh_type, sh_offset, sh_size, i)
        unnamed.append(
            Section(
                index=i,
                name="",
                type_code=sh_type,
                flags=sh_flags,
                address=sh_addr,
                offset=sh_offset,
                size=sh_size,
                link=sh_link,
                info=sh_info,
                addralign=sh_align,
                entsize=sh_entsize,
                content=content,
            )
        )
    sections: list[Section] = []
    if unnamed:
        shstrtab = unnamed[shstrndx].content
        for i, (rec, sec) in enumerate(zip(raw_sections, unnamed)):
            name = string_at(shstrtab, rec[0], f"section {i} name")
            sections.append(
                Section(
                    index=sec.index,
                    name=name,
                    type_code=sec.type_code,
                    flags=sec.flags,
                    address=sec.address,
                    offset=sec.offset,
                    size=sec.size,
                    link=sec.link,
                    info=sec.info,
                    addralign=sec.addralign,
                    entsize=sec.entsize,
                    content=sec.content,
                )
            )

    segments = _parse_segments(data, hdr, lay)

    versym: tuple[int, ...] = ()
    verneed: dict[int, str] = {}
    verdef: dict[int, str] = {}
    for sec in sections:
        if sec.type_code == SHT_GNU_VERSYM:
            versym = _parse_versym(sec, lay)
        elif sec.type_code == SHT_GNU_VERNEED:
            strtab = _linked_strtab(sections, sec.link, "verneed")
            verneed = _parse_verneed(sec, strtab, sec.info, lay)
        elif sec.type_code == SHT_GNU_VERDEF:
            strtab = _linked_strtab(sections, sec.link, "verdef")
            verdef = _parse_verdef(sec, strtab, sec.info, lay)

    symbols = _parse_symbols(sections, lay, versym, verneed, verdef, shnum)
    dynamic = _parse_dynamic(sections, lay)

    return ElfObject(
        path=origin_path,
        header=hdr,
        sections=tuple(sections),
        segments=tuple(segments),
        symbols=tuple(symbols),
        dynamic=tuple(dynamic),
        versym=versym,
        verneed=verneed,
        verdef=verdef,
    )


def load_elf(path: str) -> ElfObject:
    """Read and parse the file at `path` (symlinks resolved)."""
    import os

    real = os.path.realpath(path)
    with open(real, "rb") as fh:
        return open_elf(fh.read(), real)


def resolve_symbol_version(
    obj: ElfObject, sym_index: int, table: SymbolTableKind
) -> Optional[tuple[str, bool]]:
    """Version string and default-bit for one symbol, or None when unversioned.

    Only .dynsym symbols carry versions, and only when the file has a
    .gnu.version section.
    """
    if table != SymbolTableKind.DYNSYM or not obj.versym:
        return None
    syms = obj.symbols_in(table)
    if not 0 <= sym_index < len(syms):
        raise Malformed(f"symbol index {sym_index} out of range for {table.value}")
    version, default = _resolve_version(obj.versym, obj.verneed, obj.verdef, sym_index)
    if version is None:
        return None
    return version, default


def needed_libraries(obj: ElfObject) -> list[str]:
    """DT_NEEDED strings in .dynamic order; empty for static objects."""
    dynamic_sections = obj.sections_of_type(SHT_DYNAMIC)
    if not dynamic_sections:
        return []
    strtab = _linked_strtab(list(obj.sections), dynamic_sections[0].link, ".dynamic")
    out = []
    for entry in obj.dynamic:
        if entry.tag_code == DT_NULL:
            break
        if entry.tag_code == DT_NEEDED:
            out.append(string_at(strtab, entry.value, "NEEDED"))
    return out


def dynamic_string(obj: ElfObject, tag_code: int) -> Optional[str]:
    """The string value of the first dynamic entry with `tag_code`, if any."""
    dynamic_sections = obj.sections_of_type(SHT_DYNAMIC)
    if not dynamic_sections:
        return None
    strtab = _linked_strtab(list(obj.sections), dynamic_sections[0].link, ".dynamic")
    for entry in obj.dynamic:
        if entry.tag_code == DT_NULL:
            break
        if entry.tag_code == tag_code:
            return string_at(strtab, entry.value, DYNAMIC_TAG_NAMES.get(tag_code, str(tag_code)))
    return None
