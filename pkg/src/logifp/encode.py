"""Bit-exact encodings: the enumerating structure encoding enc(.), the
relation-to-bitstring encoding J with its canonical preimage, and the
ordered-structure-to-string reduction.

Bit order is least-significant-bit first throughout (element 3 in width 3
is "110"); brackets are written as the ASCII characters '[' and ']'.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

from .core import (
    Signature,
    StringStructure,
    Structure,
    ceil_log,
    from_text,
    log_pow,
)
from .errors import (
    ArityMismatch,
    DomainTooSmall,
    NotChunkAligned,
    Overflow,
    OutOfRange,
    ParseError,
    TooManyChunks,
    Unordered,
)


def _bits_lsb_first(j: int, width: int) -> str:
    return "".join("1" if (j >> i) & 1 else "0" for i in range(width))


def enc_element(j: int, width: int) -> str:
    """'[' + width bits of j, LSB first + ']'."""
    if j < 0 or j >= (1 << width):
        raise Overflow(f"{j} does not fit in {width} bits")
    return "[" + _bits_lsb_first(j, width) + "]"


def enc_tuple(t: Sequence[int], width: int) -> str:
    return "[" + "".join(enc_element(c, width) for c in t) + "]"


def enc_relation(tuples: Iterable[tuple], width: int) -> str:
    """Tuples in lexicographic ascending order, making enc a set function."""
    return "[" + "".join(enc_tuple(t, width) for t in sorted(tuples)) + "]"


def enc_structure(a: Structure) -> str:
    if not a.sig.ordered:
        raise Unordered("enc needs an ordered structure")
    if a.n < 2:
        raise DomainTooSmall(f"enc needs n >= 2, got {a.n}")
    width = ceil_log(a.n)
    domain = "[" + "".join(enc_element(j, width) for j in range(a.n)) + "]"
    rels = "".join(enc_relation(a.rels[name], width) for name in a.sig.names)
    return "[" + domain + rels + "]"


def dec_structure(s: str, sig: Signature) -> Structure:
    """Inverse of enc_structure; exact on its image."""
    if not sig.ordered:
        raise Unordered("dec needs an ordered signature")
    pos = 0

    def expect(ch: str):
        nonlocal pos
        if pos >= len(s) or s[pos] != ch:
            raise ParseError(f"expected {ch!r} at position {pos}")
        pos += 1

    def peek():
        return s[pos] if pos < len(s) else ""

    def element(width: int) -> int:
        nonlocal pos
        expect("[")
        bits = s[pos:pos + width]
        if len(bits) != width or any(b not in "01" for b in bits):
            raise ParseError(f"bad {width}-bit element at position {pos}")
        pos += width
        expect("]")
        return sum((1 << i) for i, b in enumerate(bits) if b == "1")

    expect("[")
    expect("[")
    # the domain block fixes n; element j must encode index j
    count = 0
    indices = []
    while peek() == "[":
        # width is unknown until the block closes; scan the raw bits
        start = pos
        pos += 1
        bits = ""
        while peek() in "01":
            bits += s[pos]
            pos += 1
        expect("]")
        indices.append(bits)
        count += 1
    expect("]")
    n = count
    if n < 2:
        raise ParseError(f"domain block lists {n} elements, need >= 2")
    width = ceil_log(n)
    for j, bits in enumerate(indices):
        if bits != _bits_lsb_first(j, width) or len(bits) != width:
            raise ParseError(f"domain element {j} encoded as {bits!r}")
    rels: dict[str, set] = {}
    for name, arity in sig.relations:
        expect("[")
        tuples = set()
        while peek() == "[":
            expect("[")
            t = []
            while peek() == "[":
                t.append(element(width))
            expect("]")
            if len(t) != arity:
                raise ArityMismatch(f"{name} tuple of length {len(t)}, expected {arity}")
            tuples.add(tuple(t))
        expect("]")
        rels[name] = tuples
    expect("]")
    if pos != len(s):
        raise ParseError(f"trailing input at position {pos}")
    return Structure(sig, n, rels)


def j_encode(u_size: int, s: Union[Sequence[tuple], frozenset, set]) -> str:
    """Lossy relation-to-bitstring encoding: per tuple (a, b) emit b's low
    ceil_log(u_size)-1 bits, LSB first; the first component and the top bit
    are dropped.  Sequences keep their given order; sets are sorted."""
    width = ceil_log(u_size)
    if width < 2:
        raise DomainTooSmall(f"ceil_log({u_size}) = {width} < 2")
    tuples = list(s) if isinstance(s, (list, tuple)) else sorted(s)
    out = []
    for t in tuples:
        if len(t) != 2:
            raise ArityMismatch(f"tuple {t} is not binary")
        a, b = t
        if not (0 <= a < u_size and 0 <= b < u_size):
            raise OutOfRange(f"tuple {t} not over [0,{u_size})")
        out.append(_bits_lsb_first(b, width)[:-1])
    return "".join(out)


def j_preimage(u_size: int, w: str, k: int) -> frozenset:
    """Canonical preimage of a chunk-aligned {0,1} string: chunk i becomes
    the tuple (i mod u_size, b_i) with b_i's top bit 0."""
    width = ceil_log(u_size)
    if width < 2:
        raise DomainTooSmall(f"ceil_log({u_size}) = {width} < 2")
    chunk = width - 1
    if len(w) % chunk != 0:
        raise NotChunkAligned(f"length {len(w)} not a multiple of {chunk}")
    count = len(w) // chunk
    if count > log_pow(u_size, k):
        raise TooManyChunks(f"{count} chunks exceeds bound {log_pow(u_size, k)}")
    tuples = set()
    for i in range(count):
        bits = w[i * chunk:(i + 1) * chunk]
        b = sum((1 << j) for j, bit in enumerate(bits) if bit == "1")
        tuples.add((i % u_size, b))
    return frozenset(tuples)


def to_string_structure(a: Structure) -> StringStructure:
    """The string structure of enc_structure(a); equal strings iff equal
    ordered structures."""
    return from_text(enc_structure(a))


def concat_hash(*parts) -> StringStructure:
    """Join strings (or string structures) with single '#' separators."""
    texts = [p.text if isinstance(p, StringStructure) else str(p) for p in parts]
    return from_text("#".join(texts))
