"""Exact algebra for complex-weighted sums of multi-qubit Pauli strings.

A Pauli string is encoded symplectically by two bitmasks (x, z):
qubit q carries X if only bit q of x is set, Z if only bit q of z,
Y if both, identity if neither.  With the canonical operator

    P(x, z) = i^{popcount(x & z)} * X^x * Z^z

single-string products reduce to XOR on the masks plus an exact
quarter-phase integer, so no floating-point phase drift accumulates:

    P(x1, z1) P(x2, z2) = i^k P(x1^x2, z1^z2),
    k = pc(x1&z1) + pc(x2&z2) - pc(x3&z3) + 2*pc(z1&x2)  (mod 4).

PauliSum stores its terms in canonically sorted numpy arrays, so equal
operators compare equal and all bulk arithmetic is vectorized.  Values
are immutable after construction; every operation returns a new object
and is safe to call from concurrent workers.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Tuple, Union

import numpy as np

__all__ = [
    "PauliString",
    "PauliSum",
    "DEFAULT_THRESHOLD",
    "commutator",
]

DEFAULT_THRESHOLD = 1e-12

_LETTERS = ("I", "X", "Y", "Z")
# (x_bit, z_bit) per letter
_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_I_POW = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=np.complex128)

_MASK = np.uint64


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


class DimensionError(ValueError):
    """Qubit-count mismatch between operands."""


class PauliString:
    """A single Pauli word on ``n_qubits`` qubits (no coefficient).

    Sparse view: ``letters()`` maps qubit index -> 'X'/'Y'/'Z' with
    identity implied on absent indices; the all-identity string is the
    empty map.  Hashable, so usable as a dict key.
    """

    __slots__ = ("n_qubits", "x", "z")

    def __init__(self, n_qubits: int, letters: Mapping[int, str] | None = None):
        if n_qubits <= 0:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        x = 0
        z = 0
        if letters:
            for q, letter in letters.items():
                if not 0 <= q < n_qubits:
                    raise ValueError(f"qubit index {q} outside [0, {n_qubits})")
                try:
                    xb, zb = _LETTER_BITS[letter]
                except KeyError:
                    raise ValueError(f"invalid Pauli letter {letter!r}") from None
                x |= xb << q
                z |= zb << q
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def from_masks(cls, n_qubits: int, x: int, z: int) -> "PauliString":
        if (x | z) >> n_qubits:
            raise ValueError("mask touches qubits outside range")
        s = cls.__new__(cls)
        object.__setattr__(s, "n_qubits", n_qubits)
        object.__setattr__(s, "x", int(x))
        object.__setattr__(s, "z", int(z))
        return s

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls.from_masks(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, n_qubits: int, label: str) -> "PauliString":
        """Parse e.g. ``"X0 Y3 Z5"``; the empty string is the identity."""
        letters: dict[int, str] = {}
        for token in label.split():
            letter, idx = token[0].upper(), token[1:]
            if letter not in _LETTER_BITS or not idx.isdigit():
                raise ValueError(f"bad Pauli token {token!r}")
            q = int(idx)
            if q in letters:
                raise ValueError(f"duplicate qubit {q} in {label!r}")
            letters[q] = letter
        return cls(n_qubits, letters)

    def letters(self) -> dict[int, str]:
        """Qubit -> letter map in ascending qubit order."""
        out: dict[int, str] = {}
        support = self.x | self.z
        q = 0
        while support >> q:
            xb = (self.x >> q) & 1
            zb = (self.z >> q) & 1
            if xb or zb:
                out[q] = "Y" if (xb and zb) else ("X" if xb else "Z")
            q += 1
        return out

    @property
    def weight(self) -> int:
        return int(self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def label(self) -> str:
        return " ".join(f"{letter}{q}" for q, letter in self.letters().items())

    def mul(self, other: "PauliString") -> Tuple[int, "PauliString"]:
        """Product ``self * other`` as (phase power k, string): i^k * string."""
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit-count mismatch in PauliString product")
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        k = (
            (self.x & self.z).bit_count()
            + (other.x & other.z).bit_count()
            - (x3 & z3).bit_count()
            + 2 * (self.z & other.x).bit_count()
        ) % 4
        return k, PauliString.from_masks(self.n_qubits, x3, z3)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit-count mismatch")
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n_qubits == other.n_qubits
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.n_qubits, self.x, self.z))

    def __repr__(self) -> str:
        return f"PauliString({self.n_qubits}, {self.label()!r})"


TermKey = Union[PauliString, str, Mapping[int, str]]


class PauliSum:
    """Complex-weighted sum of Pauli strings in canonical merged form.

    Terms are kept sorted by (x, z) mask with duplicates merged and
    exact-zero coefficients dropped, so structurally equal operators
    compare equal.  Instances are immutable.
    """

    __slots__ = ("n_qubits", "_x", "_z", "_c", "_cache")

    def __init__(self, n_qubits: int, terms: Iterable[Tuple[TermKey, complex]] = ()):
        if n_qubits <= 0:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        xs: list[int] = []
        zs: list[int] = []
        cs: list[complex] = []
        for key, coeff in terms:
            s = self._as_string(n_qubits, key)
            xs.append(s.x)
            zs.append(s.z)
            cs.append(complex(coeff))
        x = np.asarray(xs, dtype=_MASK)
        z = np.asarray(zs, dtype=_MASK)
        c = np.asarray(cs, dtype=np.complex128)
        x, z, c = _canonicalize(x, z, c)
        self._init_raw(n_qubits, x, z, c)

    @staticmethod
    def _as_string(n_qubits: int, key: TermKey) -> PauliString:
        if isinstance(key, PauliString):
            if key.n_qubits != n_qubits:
                raise DimensionError("PauliString qubit count differs from sum")
            return key
        if isinstance(key, str):
            return PauliString.from_label(n_qubits, key)
        return PauliString(n_qubits, key)

    def _init_raw(self, n_qubits: int, x: np.ndarray, z: np.ndarray, c: np.ndarray):
        for arr in (x, z, c):
            arr.setflags(write=False)
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_z", z)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    @classmethod
    def _from_canonical(cls, n_qubits: int, x, z, c) -> "PauliSum":
        s = cls.__new__(cls)
        s._init_raw(n_qubits, x, z, c)
        return s

    @classmethod
    def from_arrays(cls, n_qubits: int, x, z, c) -> "PauliSum":
        """Build from raw mask/coefficient arrays (merged on entry)."""
        x = np.asarray(x, dtype=_MASK)
        z = np.asarray(z, dtype=_MASK)
        c = np.asarray(c, dtype=np.complex128)
        if len({x.shape, z.shape, c.shape}) != 1:
            raise ValueError("mask/coefficient arrays must share a shape")
        if x.size and int((x | z).max()) >> n_qubits:
            raise ValueError("mask touches qubits outside range")
        return cls._from_canonical(n_qubits, *_canonicalize(x, z, c))

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, [(PauliString.identity(n_qubits), coeff)])

    # -- inspection ------------------------------------------------------

    def term_count(self) -> int:
        return int(self._c.size)

    def __len__(self) -> int:
        return self.term_count()

    def terms(self) -> Iterator[Tuple[PauliString, complex]]:
        for x, z, c in zip(self._x, self._z, self._c):
            yield PauliString.from_masks(self.n_qubits, int(x), int(z)), complex(c)

    def coefficient(self, key: TermKey) -> complex:
        s = self._as_string(self.n_qubits, key)
        i = np.searchsorted(self._x, _MASK(s.x))
        while i < self._x.size and self._x[i] == s.x:
            if self._z[i] == s.z:
                return complex(self._c[i])
            i += 1
        return 0.0

    def masks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Read-only (x, z, coeff) arrays in canonical order."""
        return self._x, self._z, self._c

    def max_abs_coeff(self) -> float:
        return float(np.abs(self._c).max()) if self._c.size else 0.0

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        # strings are self-adjoint, so hermiticity == real coefficients
        if not self._c.size:
            return True
        return float(np.abs(self._c.imag).max()) <= tol

    def is_anti_hermitian(self, tol: float = 1e-10) -> bool:
        if not self._c.size:
            return True
        return float(np.abs(self._c.real).max()) <= tol

    # -- algebra ---------------------------------------------------------

    def _check_dim(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(
                f"qubit-count mismatch: {self.n_qubits} vs {other.n_qubits}"
            )

    def add(self, other: "PauliSum") -> "PauliSum":
        self._check_dim(other)
        x = np.concatenate([self._x, other._x])
        z = np.concatenate([self._z, other._z])
        c = np.concatenate([self._c, other._c])
        return PauliSum._from_canonical(self.n_qubits, *_canonicalize(x, z, c))

    def scale(self, factor: complex) -> "PauliSum":
        c = self._c * complex(factor)
        if factor == 0:
            return PauliSum.zero(self.n_qubits)
        return PauliSum._from_canonical(self.n_qubits, self._x.copy(), self._z.copy(), c)

    def adjoint(self) -> "PauliSum":
        return PauliSum._from_canonical(
            self.n_qubits, self._x.copy(), self._z.copy(), np.conj(self._c)
        )

    def mul(self, other: "PauliSum", chunk: int = 1 << 22) -> "PauliSum":
        """Exact operator product, merged.

        The pairwise product table is materialized in blocks of at most
        ``chunk`` entries to bound peak memory for large operands.
        """
        self._check_dim(other)
        na, nb = self._x.size, other._x.size
        if na == 0 or nb == 0:
            return PauliSum.zero(self.n_qubits)
        rows = max(1, chunk // nb)
        pieces = []
        for start in range(0, na, rows):
            stop = min(na, start + rows)
            x1 = self._x[start:stop, None]
            z1 = self._z[start:stop, None]
            c1 = self._c[start:stop, None]
            x3 = x1 ^ other._x[None, :]
            z3 = z1 ^ other._z[None, :]
            k = (
                _popcount(x1 & z1)
                + _popcount(other._x & other._z)[None, :]
                - _popcount(x3 & z3)
                + 2 * _popcount(z1 & other._x[None, :])
            ) % 4
            c3 = (c1 * other._c[None, :]) * _I_POW[k]
            pieces.append(_canonicalize(x3.ravel(), z3.ravel(), c3.ravel()))
        if len(pieces) == 1:
            x, z, c = pieces[0]
        else:
            x = np.concatenate([p[0] for p in pieces])
            z = np.concatenate([p[1] for p in pieces])
            c = np.concatenate([p[2] for p in pieces])
            x, z, c = _canonicalize(x, z, c)
        return PauliSum._from_canonical(self.n_qubits, x, z, c)

    def commutator(self, other: "PauliSum") -> "PauliSum":
        """ab - ba, merged."""
        return self.mul(other).add(other.mul(self).scale(-1.0))

    def simplify(self, threshold: float = DEFAULT_THRESHOLD) -> "PauliSum":
        """Drop terms with |coefficient| <= threshold (duplicates are
        already merged by construction)."""
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        keep = np.abs(self._c) > threshold
        if keep.all():
            return self
        return PauliSum._from_canonical(
            self.n_qubits, self._x[keep], self._z[keep], self._c[keep]
        )

    # -- operators -------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return self.add(other)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self.add(other.scale(-1.0))

    def __neg__(self) -> "PauliSum":
        return self.scale(-1.0)

    def __mul__(self, other) -> "PauliSum":
        if isinstance(other, PauliSum):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other) -> "PauliSum":
        return self.scale(other)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliSum)
            and self.n_qubits == other.n_qubits
            and self._x.shape == other._x.shape
            and bool(np.all(self._x == other._x))
            and bool(np.all(self._z == other._z))
            and bool(np.all(self._c == other._c))
        )

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        """True when ``self - other`` has no coefficient above atol."""
        self._check_dim(other)
        diff = self - other
        return diff.max_abs_coeff() <= atol

    def __repr__(self) -> str:
        n = self.term_count()
        head = ", ".join(
            f"({c:.6g})*{s.label() or 'I'}" for s, c in list(self.terms())[:4]
        )
        tail = ", ..." if n > 4 else ""
        return f"PauliSum({self.n_qubits} qubits, {n} terms: {head}{tail})"

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        """Line-oriented dump: ``<coeff_re> <coeff_im> <string>`` per term,
        empty string for the identity."""
        lines = []
        for s, c in self.terms():
            label = s.label()
            base = f"{c.real!r} {c.imag!r}"
            lines.append(f"{base} {label}" if label else base)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, n_qubits: int, text: str) -> "PauliSum":
        terms = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) < 2:
                raise ValueError(f"line {ln}: expected '<re> <im> [letters...]'")
            try:
                coeff = complex(float(fields[0]), float(fields[1]))
            except ValueError:
                raise ValueError(f"line {ln}: bad coefficient fields") from None
            label = " ".join(fields[2:])
            terms.append((PauliString.from_label(n_qubits, label), coeff))
        return cls(n_qubits, terms)


def _canonicalize(x: np.ndarray, z: np.ndarray, c: np.ndarray):
    """Sort by (x, z), merge duplicate strings, drop exact zeros."""
    if x.size == 0:
        return x.astype(_MASK), z.astype(_MASK), c.astype(np.complex128)
    order = np.lexsort((z, x))
    x = x[order]
    z = z[order]
    c = c[order]
    boundary = np.empty(x.size, dtype=bool)
    boundary[0] = True
    np.logical_or(x[1:] != x[:-1], z[1:] != z[:-1], out=boundary[1:])
    starts = np.flatnonzero(boundary)
    if starts.size != x.size:
        c = np.add.reduceat(c, starts)
        x = x[starts]
        z = z[starts]
    keep = c != 0
    if not keep.all():
        x, z, c = x[keep], z[keep], c[keep]
    return x, z, c


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """Module-level convenience for ``a.commutator(b)``."""
    return a.commutator(b)
