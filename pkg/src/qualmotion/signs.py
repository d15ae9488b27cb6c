"""Sign calculus over {+, 0, -} with set-valued (indefinite) results.

A :class:`SignSet` is a nonempty subset of the three signs, stored as a
3-bit mask (``+`` = 1, ``0`` = 2, ``-`` = 4).  A definite :class:`Sign`
compares and hashes equal to the singleton set holding it, so the two can
be mixed freely.  A :class:`SignVec` is a triple of sign sets whose
denotation is the Cartesian product of its components.

The scalar tables below are the only place where arithmetic is defined;
every set and vector operation is derived from them by taking unions.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, NamedTuple, Sequence


class Sign(enum.IntEnum):
    PLUS = 1
    ZERO = 2
    MINUS = 4

    def __str__(self) -> str:
        return _SYMBOL[self.value]

    @property
    def inverse(self) -> Sign:
        return _NEG_SIGN[self]


SIGNS: tuple[Sign, ...] = (Sign.PLUS, Sign.ZERO, Sign.MINUS)
_SYMBOL = {1: "+", 2: "0", 4: "-"}
_NEG_SIGN = {Sign.PLUS: Sign.MINUS, Sign.ZERO: Sign.ZERO, Sign.MINUS: Sign.PLUS}
_PARSE = {"+": 1, "0": 2, "-": 4, "−": 4}

P, Z, M = 1, 2, 4
ANY = 7

# Definite-sign operation tables; rows are the left operand.
_ADD_DEF = {
    (P, P): P, (P, Z): P, (P, M): ANY,
    (M, P): ANY, (M, Z): M, (M, M): M,
    (Z, P): P, (Z, Z): Z, (Z, M): M,
}
_SUB_DEF = {
    (P, P): ANY, (P, Z): P, (P, M): P,
    (M, P): M, (M, Z): M, (M, M): ANY,
    (Z, P): M, (Z, Z): Z, (Z, M): P,
}
_MUL_DEF = {
    (P, P): P, (P, Z): Z, (P, M): M,
    (M, P): M, (M, Z): Z, (M, M): P,
    (Z, P): Z, (Z, Z): Z, (Z, M): Z,
}


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(b for b in (P, Z, M) if mask & b)


def _lift(table: dict[tuple[int, int], int]) -> list[list[int]]:
    """Extend a definite table to all masks 0..7 (0 is the empty set)."""
    out = [[0] * 8 for _ in range(8)]
    for a in range(8):
        for b in range(8):
            acc = 0
            for x in _bits(a):
                for y in _bits(b):
                    acc |= table[x, y]
            out[a][b] = acc
    return out


ADD = _lift(_ADD_DEF)
SUB = _lift(_SUB_DEF)
MUL = _lift(_MUL_DEF)
NEG = [0] * 8
for _m in range(8):
    NEG[_m] = (_m & Z) | (P if _m & M else 0) | (M if _m & P else 0)


class SignSet(int):
    """Nonempty set of signs; immutable and interned for masks 1..7."""

    __slots__ = ()
    _cache: dict[int, SignSet] = {}

    def __new__(cls, mask: int | Iterable[Sign] = ANY) -> SignSet:
        if not isinstance(mask, int):
            mask = reduce(lambda acc, s: acc | int(s), mask, 0)
        mask = int(mask)
        try:
            return cls._cache[mask]
        except KeyError:
            pass
        if not 1 <= mask <= 7:
            raise ValueError(f"sign set mask must be in 1..7, got {mask}")
        obj = super().__new__(cls, mask)
        cls._cache[mask] = obj
        return obj

    @classmethod
    def parse(cls, text: str) -> SignSet:
        """Parse ``+``, ``-``, ``0``, ``*`` or a bracketed set such as ``[+0]``."""
        t = text.strip()
        if t == "*":
            return cls(ANY)
        if t.startswith("[") and t.endswith("]"):
            body = t[1:-1]
            if not body:
                raise ValueError(f"empty sign set {text!r}")
        elif len(t) == 1:
            body = t
        else:
            raise ValueError(f"not a sign or sign set: {text!r}")
        mask = 0
        for ch in body:
            if ch not in _PARSE:
                raise ValueError(f"bad sign character {ch!r} in {text!r}")
            mask |= _PARSE[ch]
        return cls(mask)

    @property
    def signs(self) -> tuple[Sign, ...]:
        return tuple(Sign(b) for b in _bits(self))

    @property
    def is_definite(self) -> bool:
        return int(self) in (P, Z, M)

    def __iter__(self) -> Iterator[Sign]:
        return iter(self.signs)

    def __len__(self) -> int:
        return len(_bits(self))

    def __contains__(self, item: object) -> bool:
        if isinstance(item, int):
            return 0 < int(item) and (int(item) & ~int(self)) == 0
        return False

    def issubset(self, other: int) -> bool:
        return (int(self) & ~int(other)) == 0

    def __or__(self, other: int) -> SignSet:  # type: ignore[override]
        return SignSet(int(self) | int(other))

    def __and__(self, other: int) -> int:  # type: ignore[override]
        # may be empty, so the raw mask is returned
        return int(self) & int(other)

    def __str__(self) -> str:
        if self.is_definite:
            return _SYMBOL[int(self)]
        return "[" + "".join(ch for b, ch in ((P, "+"), (M, "-"), (Z, "0")) if self & b) + "]"

    def __repr__(self) -> str:
        return f"SignSet({str(self)!r})"


PLUS = SignSet(P)
ZERO = SignSet(Z)
MINUS = SignSet(M)
STAR = SignSet(ANY)


class SignVec(NamedTuple):
    """Qualitative 3-vector; each component is a :class:`SignSet`."""

    x: SignSet
    y: SignSet
    z: SignSet

    @classmethod
    def of(cls, *components: int | str) -> SignVec:
        """Build from masks, signs or sign strings: ``SignVec.of("+", "[-0]", 0)``.

        A single string argument of length 3 is split into characters.
        """
        if len(components) == 1 and isinstance(components[0], str) and len(components[0]) == 3:
            components = tuple(components[0])
        if len(components) != 3:
            raise ValueError("a sign vector has exactly three components")
        return cls(*(SignSet.parse(c) if isinstance(c, str) else SignSet(Z if c == 0 else c) for c in components))

    @classmethod
    def from_masks(cls, masks: Sequence[int]) -> SignVec:
        return cls(SignSet(masks[0]), SignSet(masks[1]), SignSet(masks[2]))

    @classmethod
    def parse(cls, items: Sequence[str]) -> SignVec:
        if isinstance(items, str) or len(items) != 3:
            raise ValueError(f"sign vector must be a 3-array of sign strings, got {items!r}")
        return cls(*(SignSet.parse(s) for s in items))

    def encode(self) -> list[str]:
        return [str(c) for c in self]

    @property
    def is_definite(self) -> bool:
        return all(c.is_definite for c in self)

    def denotation(self) -> set[SignVec]:
        return {SignVec(*(SignSet(s) for s in combo)) for combo in itertools.product(*self)}

    def __contains__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, tuple) or len(other) != 3:
            return False
        return all(int(o) & ~int(c) == 0 for o, c in zip(other, self))

    def issubset(self, other: Sequence[int]) -> bool:
        return all(int(a) & ~int(b) == 0 for a, b in zip(self, other))

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self) + ")"


ZERO_VEC = SignVec(ZERO, ZERO, ZERO)

#: All 27 definite sign vectors, in canonical order.
ALL_DEFINITE: tuple[SignVec, ...] = tuple(
    SignVec(SignSet(a), SignSet(b), SignSet(c)) for a in (P, Z, M) for b in (P, Z, M) for c in (P, Z, M)
)
#: The 26 definite sign vectors other than (0,0,0).
NONZERO_DEFINITE: tuple[SignVec, ...] = tuple(v for v in ALL_DEFINITE if v != ZERO_VEC)


# -- scalar operations --------------------------------------------------------

def sign_add(a: int, b: int) -> SignSet:
    return SignSet(ADD[a][b])


def sign_sub(a: int, b: int) -> SignSet:
    return SignSet(SUB[a][b])


def sign_mul(a: int, b: int) -> SignSet:
    return SignSet(MUL[a][b])


def negate(a: int) -> SignSet:
    return SignSet(NEG[a])


# -- vector operations (raw-mask helpers first, used by the hot paths) ---------

def add_masks(a: Sequence[int], b: Sequence[int]) -> tuple[int, int, int]:
    return (ADD[a[0]][b[0]], ADD[a[1]][b[1]], ADD[a[2]][b[2]])


def cross_masks(u: Sequence[int], v: Sequence[int]) -> tuple[int, int, int]:
    return (
        SUB[MUL[u[1]][v[2]]][MUL[u[2]][v[1]]],
        SUB[MUL[u[2]][v[0]]][MUL[u[0]][v[2]]],
        SUB[MUL[u[0]][v[1]]][MUL[u[1]][v[0]]],
    )


def dot_mask(u: Sequence[int], v: Sequence[int]) -> int:
    return ADD[ADD[MUL[u[0]][v[0]]][MUL[u[1]][v[1]]]][MUL[u[2]][v[2]]]


def vec_add(a: SignVec, b: SignVec) -> SignVec:
    return SignVec.from_masks(add_masks(a, b))


def vec_sub(a: SignVec, b: SignVec) -> SignVec:
    return SignVec.from_masks((SUB[a[0]][b[0]], SUB[a[1]][b[1]], SUB[a[2]][b[2]]))


def vec_cross(a: SignVec, b: SignVec) -> SignVec:
    return SignVec.from_masks(cross_masks(a, b))


def vec_dot(a: SignVec, b: SignVec) -> SignSet:
    return SignSet(dot_mask(a, b))


def inverse(v: SignVec) -> SignVec:
    return SignVec(SignSet(NEG[v[0]]), SignSet(NEG[v[1]]), SignSet(NEG[v[2]]))


def big_sum(vs: Iterable[SignVec]) -> SignVec:
    """Left fold of :func:`vec_add`; the empty sum is ``(0,0,0)``."""
    acc: tuple[int, int, int] = (Z, Z, Z)
    for v in vs:
        acc = add_masks(acc, v)
    return SignVec.from_masks(acc)


# -- quantization -------------------------------------------------------------

@dataclass(frozen=True)
class QuantizationConfig:
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


def quantize_scalar(value: float, epsilon: float = 0.0) -> SignSet:
    if not math.isfinite(value):
        raise ValueError(f"cannot quantize non-finite value {value!r}")
    if abs(value) <= epsilon:
        return ZERO
    return PLUS if value > 0 else MINUS


def quantize(v: Sequence[float], cfg: QuantizationConfig | float = 0.0) -> SignVec:
    """Map a numeric 3-vector to its definite sign vector (dead-band ``epsilon``)."""
    eps = cfg.epsilon if isinstance(cfg, QuantizationConfig) else float(cfg)
    if len(v) != 3:
        raise ValueError(f"expected a 3-vector, got length {len(v)}")
    return SignVec(*(quantize_scalar(float(c), eps) for c in v))
