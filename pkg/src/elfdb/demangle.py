"""Itanium-ABI symbol demangling as a total function.

The default decoder is `__cxa_demangle` from the host C++ runtime, loaded
via ctypes; when no runtime is present, or a name does not decode, the
input is returned unchanged.  Only "_Z"-prefixed names are ever touched.
"""

from __future__ import annotations

import ctypes
import ctypes.util
from typing import Callable, Optional

Decoder = Callable[[str], Optional[str]]

_cached_decoder: Optional[Decoder] = None
_probed = False


def _load_cxa_decoder() -> Optional[Decoder]:
    for lib_name in ("stdc++", "c++"):
        path = ctypes.util.find_library(lib_name)
        if path is None:
            continue
        try:
            lib = ctypes.CDLL(path)
            fn = lib.__cxa_demangle
        except (OSError, AttributeError):
            continue
        fn.restype = ctypes.c_void_p
        fn.argtypes = [
            ctypes.c_char_p,
            ctypes.c_void_p,
            ctypes.c_void_p,
            ctypes.POINTER(ctypes.c_int),
        ]
        free = ctypes.CDLL(None).free
        free.argtypes = [ctypes.c_void_p]

        def decode(name: str) -> Optional[str]:
            status = ctypes.c_int()
            buf = fn(name.encode("utf-8", "surrogateescape"), None, None, ctypes.byref(status))
            if not buf or status.value != 0:
                return None
            try:
                return ctypes.string_at(buf).decode("utf-8", "backslashreplace")
            finally:
                free(buf)

        return decode
    return None


def default_decoder() -> Optional[Decoder]:
    """The process-wide decoder, probed once; None when unavailable."""
    global _cached_decoder, _probed
    if not _probed:
        _cached_decoder = _load_cxa_decoder()
        _probed = True
    return _cached_decoder


def demangle(name: str, decoder: Optional[Decoder] = None) -> str:
    """Demangled form of `name`, or `name` itself when not decodable.

    Total: never raises.  Names without the "_Z" prefix pass through
    untouched regardless of decoder availability.
    """
    if not name.startswith("_Z"):
        return name
    if decoder is None:
        decoder = default_decoder()
        if decoder is None:
            return name
    try:
        decoded = decoder(name)
    except Exception:
        return name
    return decoded if decoded else name
