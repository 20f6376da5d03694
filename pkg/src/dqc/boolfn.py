"""Boolean functions as explicit truth tables.

Inputs are written x_1 x_2 ... x_n (as strings or bit sequences) and the
table is indexed by the integer sum(x_i * 2**(i-1)), i.e. x_1 is the
lowest-order bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import InputShapeError, NoWitnessError, ParseError

MAX_VARS = 20

Bits = Union[str, Sequence[int]]


def to_bits(x: Bits) -> tuple[int, ...]:
    if isinstance(x, str):
        if any(c not in "01" for c in x):
            raise InputShapeError(f"not a bit string: {x!r}")
        return tuple(int(c) for c in x)
    out = tuple(int(b) for b in x)
    if any(b not in (0, 1) for b in out):
        raise InputShapeError(f"not a bit sequence: {x!r}")
    return out


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for i, b in enumerate(bits):
        v |= b << i
    return v


def int_to_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))


def bitstr(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


@dataclass(frozen=True)
class BoolFn:
    n: int
    table: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VARS:
            raise InputShapeError(f"n must be in [1, {MAX_VARS}], got {self.n}")
        if len(self.table) != 1 << self.n:
            raise InputShapeError(
                f"table has {len(self.table)} entries, expected {1 << self.n}"
            )
        object.__setattr__(self, "table", tuple(int(b) & 1 for b in self.table))

    def __call__(self, x: Bits) -> int:
        return eval_function(self, x)

    def at(self, index: int) -> int:
        return self.table[index]

    def inputs(self) -> Iterable[tuple[int, ...]]:
        for v in range(1 << self.n):
            yield int_to_bits(v, self.n)

    def preimage(self, bit: int) -> list[int]:
        return [v for v, b in enumerate(self.table) if b == bit]

    @classmethod
    def from_callable(cls, n: int, fn, name: str = "") -> "BoolFn":
        return cls(n, tuple(int(fn(int_to_bits(v, n))) & 1 for v in range(1 << n)), name)


@dataclass(frozen=True)
class WitnessPair:
    index: int
    w: tuple[int, ...]
    w_tilde: tuple[int, ...]

    def __post_init__(self):
        diff = [i + 1 for i, (a, b) in enumerate(zip(self.w, self.w_tilde)) if a != b]
        if diff != [self.index]:
            raise InputShapeError(f"witness pair differs at {diff}, not [{self.index}]")


def eval_function(f: BoolFn, x: Bits) -> int:
    bits = to_bits(x)
    if len(bits) != f.n:
        raise InputShapeError(f"expected {f.n} input bits, got {len(bits)}")
    return f.table[bits_to_int(bits)]


def _check_index(f: BoolFn, i: int):
    if not 1 <= i <= f.n:
        raise InputShapeError(f"variable index {i} outside [1, {f.n}]")


def depends_on(f: BoolFn, i: int) -> int:
    _check_index(f, i)
    mask = 1 << (i - 1)
    t = f.table
    return int(any(t[v] != t[v ^ mask] for v in range(len(t)) if not v & mask))


def witness_pair(f: BoolFn, i: int) -> WitnessPair:
    """Smallest-encoded w with f(w)=0 whose flip at position i gives a 1."""
    _check_index(f, i)
    mask = 1 << (i - 1)
    for v, b in enumerate(f.table):
        if b == 0 and f.table[v ^ mask] == 1:
            return WitnessPair(i, int_to_bits(v, f.n), int_to_bits(v ^ mask, f.n))
    raise NoWitnessError(f"{f.name or 'function'} does not depend on x_{i}")


def depends_on_all(f: BoolFn) -> bool:
    return all(depends_on(f, i) for i in range(1, f.n + 1))


# -- named built-ins ---------------------------------------------------------

def _popcount(v: int) -> int:
    return bin(v).count("1")


def named(name: str, n: int) -> BoolFn:
    size = 1 << n
    if name == "and":
        table = [int(v == size - 1) for v in range(size)]
    elif name == "or":
        table = [int(v != 0) for v in range(size)]
    elif name == "parity":
        table = [_popcount(v) & 1 for v in range(size)]
    elif name == "majority":
        table = [int(2 * _popcount(v) > n) for v in range(size)]
    elif name == "const0":
        table = [0] * size
    elif name == "const1":
        table = [1] * size
    else:
        raise ValueError(f"unknown built-in function {name!r}")
    return BoolFn(n, tuple(table), f"{name}_{n}")


BUILTINS = ("and", "or", "parity", "majority", "const0", "const1")


# -- hex truth-table files ----------------------------------------------------
# One line of hex digits; digit j carries table bits 4j..4j+3 with bit 4j as
# the digit's most significant bit, so the table reads left to right.  An
# optional "<n>:" prefix fixes n (required when 2^n is not a multiple of 4).

def to_hex(f: BoolFn) -> str:
    bits = list(f.table) + [0] * (-len(f.table) % 4)
    digits = []
    for j in range(0, len(bits), 4):
        a, b, c, d = bits[j:j + 4]
        digits.append("%x" % (a << 3 | b << 2 | c << 1 | d))
    return f"{f.n}:" + "".join(digits)


def from_hex(text: str, name: str = "") -> BoolFn:
    text = text.strip()
    n = None
    if ":" in text:
        head, text = text.split(":", 1)
        try:
            n = int(head)
        except ValueError:
            raise ParseError(f"bad variable count {head!r}", 1) from None
    try:
        bits = []
        for ch in text:
            d = int(ch, 16)
            bits.extend((d >> s) & 1 for s in (3, 2, 1, 0))
    except ValueError:
        raise ParseError(f"bad hex digit in {text!r}", 1) from None
    if n is None:
        n = max(len(bits), 1).bit_length() - 1
        if 1 << n != len(bits):
            raise ParseError(f"{len(bits)} bits is not a power of two; add an 'n:' prefix", 1)
    if len(bits) < 1 << n or any(bits[1 << n:]):
        raise ParseError(f"hex table does not hold exactly 2^{n} bits", 1)
    return BoolFn(n, tuple(bits[:1 << n]), name)


def load_function(path) -> BoolFn:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) != 1:
        raise ParseError("truth table file must contain exactly one line")
    return from_hex(lines[0], name=str(path))


def parse_function_spec(spec: str) -> BoolFn:
    """Resolve ``name:n`` for a built-in, otherwise treat as a hex table file."""
    if ":" in spec:
        head, tail = spec.split(":", 1)
        if head in BUILTINS:
            return named(head, int(tail))
    return load_function(spec)
