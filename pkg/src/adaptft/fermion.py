"""Molecular integrals, second-quantized operators, and operator pools.

Spin-orbital convention is *blocked*: spatial orbital p maps to qubit p
for alpha spin and qubit p + n_spatial for beta spin.  Occupied qubits
read 1 in the computational basis.

The qubit images use the Jordan-Wigner encoding

    a_p      = Z_0 ... Z_{p-1} (X_p + iY_p)/2
    a_p^dag  = Z_0 ... Z_{p-1} (X_p - iY_p)/2

so the number operator a_p^dag a_p maps to (I - Z_p)/2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from .pauli import PauliString, PauliSum, DEFAULT_THRESHOLD

__all__ = [
    "MolecularSystem",
    "FermionOperator",
    "OperatorPool",
    "FcidumpError",
    "parse_fcidump",
    "jordan_wigner",
    "build_hamiltonian",
    "s_squared",
    "s_z",
    "number_operator",
    "penalized_hamiltonian",
    "make_pool",
    "hf_occupations",
    "spin_orbital_index",
    "POOL_FLAVORS",
]

POOL_FLAVORS = ("fermionic", "qubit_excitation", "pauli_string")


def spin_orbital_index(p: int, spin: int, n_spatial: int) -> int:
    """Blocked mapping: (spatial p, spin 0=alpha/1=beta) -> qubit index."""
    return p + spin * n_spatial


class FcidumpError(ValueError):
    """Malformed FCIDUMP input; message carries the offending line number."""


@dataclass(frozen=True)
class MolecularSystem:
    """Active-space integrals in chemist (pq|rs) ordering, Hartree units."""

    n_spatial_orbitals: int
    n_electrons: int
    ms2: int
    core_energy: float
    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        n = self.n_spatial_orbitals
        if self.h1.shape != (n, n):
            raise ValueError(f"h1 must be {n}x{n}")
        if self.h2.shape != (n, n, n, n):
            raise ValueError(f"h2 must be rank-4 with dimension {n}")
        if self.n_electrons > 2 * n:
            raise ValueError("more electrons than spin-orbitals")
        if np.abs(self.h1 - self.h1.T).max() > 1e-10:
            raise ValueError("h1 is not symmetric")
        h2 = self.h2
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.abs(h2 - h2.transpose(perm)).max() > 1e-10:
                raise ValueError("h2 violates 8-fold permutational symmetry")
        self.h1.setflags(write=False)
        self.h2.setflags(write=False)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial_orbitals


# ladder factor: (spin-orbital index, 1 for creation / 0 for annihilation)
LadderTerm = Tuple[Tuple[int, int], ...]


class FermionOperator:
    """Sparse sum of ordered creation/annihilation products.

    ``terms`` maps a ladder sequence (tuples of (index, dagger)) to a
    complex coefficient.  Products concatenate sequences; no normal
    ordering is performed (the Jordan-Wigner image handles nilpotency
    and anticommutation exactly).
    """

    __slots__ = ("terms",)

    def __init__(self, term: Sequence[Tuple[int, int]] | None = None, coeff: complex = 1.0):
        self.terms: dict[LadderTerm, complex] = {}
        if term is not None:
            self.terms[tuple((int(i), int(d)) for i, d in term)] = complex(coeff)
        elif coeff != 1.0:
            self.terms[()] = complex(coeff)

    @classmethod
    def zero(cls) -> "FermionOperator":
        op = cls()
        return op

    @classmethod
    def from_terms(cls, items: Iterable[Tuple[Sequence[Tuple[int, int]], complex]]) -> "FermionOperator":
        op = cls()
        for term, coeff in items:
            key = tuple((int(i), int(d)) for i, d in term)
            op.terms[key] = op.terms.get(key, 0.0) + complex(coeff)
        return op

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = FermionOperator()
        out.terms = dict(self.terms)
        for k, v in other.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + v
        return out

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = FermionOperator()
            for ka, va in self.terms.items():
                for kb, vb in other.terms.items():
                    k = ka + kb
                    out.terms[k] = out.terms.get(k, 0.0) + va * vb
            return out
        out = FermionOperator()
        out.terms = {k: v * complex(other) for k, v in self.terms.items()}
        return out

    def __rmul__(self, other) -> "FermionOperator":
        return self * other

    def __neg__(self) -> "FermionOperator":
        return self * (-1.0)

    def adjoint(self) -> "FermionOperator":
        out = FermionOperator()
        for k, v in self.terms.items():
            key = tuple((i, 1 - d) for i, d in reversed(k))
            out.terms[key] = out.terms.get(key, 0.0) + np.conj(v)
        return out

    def max_index(self) -> int:
        return max((i for k in self.terms for i, _ in k), default=-1)

    def __repr__(self) -> str:
        def fmt(k):
            return " ".join(f"{i}^" if d else f"{i}" for i, d in k) or "1"

        body = " + ".join(f"({v:.4g})*[{fmt(k)}]" for k, v in list(self.terms.items())[:4])
        more = " + ..." if len(self.terms) > 4 else ""
        return f"FermionOperator({body}{more})"


def _ladder_branches(index: int, dagger: int, with_chain: bool):
    """JW image of a single ladder factor as two (x, z, coeff) branches."""
    bit = 1 << index
    chain = (bit - 1) if with_chain else 0
    y_coeff = -0.5j if dagger else 0.5j
    return ((bit, chain, 0.5), (bit, chain | bit, y_coeff))


def _mask_product(x1: int, z1: int, x2: int, z2: int) -> Tuple[int, int, int]:
    """(x3, z3, phase power k) for P(x1,z1)*P(x2,z2) = i^k P(x3,z3)."""
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    k = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    ) % 4
    return x3, z3, k


_I_POW = (1.0, 1.0j, -1.0, -1.0j)


def _term_strings(term: LadderTerm, coeff: complex, with_chain: bool):
    """Expand one ladder product into a list of (x, z, coeff) strings."""
    acc = [(0, 0, coeff)]
    for index, dagger in term:
        branches = _ladder_branches(index, dagger, with_chain)
        nxt = []
        for x1, z1, c1 in acc:
            for x2, z2, c2 in branches:
                x3, z3, k = _mask_product(x1, z1, x2, z2)
                nxt.append((x3, z3, c1 * c2 * _I_POW[k]))
        acc = nxt
    return acc


def _strings_to_sum(n_qubits: int, strings) -> PauliSum:
    if not strings:
        return PauliSum.zero(n_qubits)
    x = np.fromiter((s[0] for s in strings), dtype=np.uint64, count=len(strings))
    z = np.fromiter((s[1] for s in strings), dtype=np.uint64, count=len(strings))
    c = np.fromiter((s[2] for s in strings), dtype=np.complex128, count=len(strings))
    return PauliSum.from_arrays(n_qubits, x, z, c)


def jordan_wigner(op: FermionOperator, n_so: int) -> PauliSum:
    """Exact Jordan-Wigner image of ``op`` on ``n_so`` qubits."""
    top = op.max_index()
    if top >= n_so:
        raise ValueError(f"ladder index {top} out of range for {n_so} spin-orbitals")
    strings: list = []
    for term, coeff in op.terms.items():
        if coeff == 0.0:
            continue
        strings.extend(_term_strings(term, coeff, with_chain=True))
    return _strings_to_sum(n_so, strings)


def _qubit_excitation_image(term_pairs, n_qubits: int) -> PauliSum:
    """Like jordan_wigner but with the fermionic Z-chains removed
    (qubit creation/annihilation operators)."""
    strings: list = []
    for term, coeff in term_pairs:
        acc = [(0, 0, coeff)]
        for index, dagger in term:
            branches = _ladder_branches(index, dagger, with_chain=False)
            nxt = []
            for x1, z1, c1 in acc:
                for x2, z2, c2 in branches:
                    x3, z3, k = _mask_product(x1, z1, x2, z2)
                    nxt.append((x3, z3, c1 * c2 * _I_POW[k]))
            acc = nxt
        strings.extend(acc)
    return _strings_to_sum(n_qubits, strings)


# ---------------------------------------------------------------------------
# FCIDUMP
# ---------------------------------------------------------------------------

_HEADER_END = re.compile(r"(&END|\$END|/)", re.IGNORECASE)
_KEYVAL = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=(?:[,\s][A-Za-z0-9_]+\s*=)|$)")


def parse_fcidump(text: str) -> MolecularSystem:
    """Parse an FCIDUMP: namelist header then ``value i j k l`` records.

    Two-electron records are chemist-ordered (ij|kl) with 1-based
    indices and are expanded to all 8 permutational images; ``i j 0 0``
    records fill h1; the ``0 0 0 0`` record is the core energy.
    Conflicting duplicates raise :class:`FcidumpError` with the line.
    """
    lines = text.splitlines()
    header_parts: list[str] = []
    body_start = None
    for ln, raw in enumerate(lines):
        m = _HEADER_END.search(raw)
        if m:
            header_parts.append(raw[: m.start()])
            body_start = ln + 1
            break
        header_parts.append(raw)
    if body_start is None:
        raise FcidumpError("line 1: header namelist is never terminated")
    header = " ".join(header_parts)
    if "&FCI" not in header.upper():
        raise FcidumpError("line 1: missing &FCI namelist header")
    header = header[header.upper().index("&FCI") + 4 :]

    keys: dict[str, str] = {}
    for m in _KEYVAL.finditer(header):
        keys[m.group(1).upper()] = m.group(2).strip().rstrip(",")
    try:
        norb = int(keys["NORB"])
        nelec = int(keys["NELEC"])
    except KeyError as missing:
        raise FcidumpError(f"line 1: header lacks {missing.args[0]}") from None
    except ValueError:
        raise FcidumpError("line 1: non-integer NORB/NELEC") from None
    ms2 = int(keys.get("MS2", "0") or 0)
    if norb <= 0:
        raise FcidumpError("line 1: NORB must be positive")

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    core = 0.0
    seen: dict[tuple, tuple[float, int]] = {}

    def canonical2(i, j, k, l):
        ij = (i, j) if i >= j else (j, i)
        kl = (k, l) if k >= l else (l, k)
        return (ij, kl) if ij >= kl else (kl, ij)

    for ln in range(body_start, len(lines)):
        line = lines[ln].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise FcidumpError(f"line {ln + 1}: expected 'value i j k l'")
        try:
            value = float(fields[0].replace("D", "e").replace("d", "e"))
            i, j, k, l = (int(f) for f in fields[1:])
        except ValueError:
            raise FcidumpError(f"line {ln + 1}: malformed record") from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"line {ln + 1}: orbital index {idx} out of range 1..{norb}")
        if i == 0 and j == 0 and k == 0 and l == 0:
            key = ("core",)
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {ln + 1}: one-electron record with zero index")
            key = ("h1",) + ((i, j) if i >= j else (j, i))
        elif i == 0 or j == 0 or k == 0 or l == 0:
            raise FcidumpError(f"line {ln + 1}: mixed zero/nonzero indices")
        else:
            key = ("h2",) + canonical2(i, j, k, l)
        if key in seen:
            prev, prev_ln = seen[key]
            if abs(prev - value) > 1e-10:
                raise FcidumpError(
                    f"line {ln + 1}: conflicting duplicate of line {prev_ln} "
                    f"({prev!r} vs {value!r})"
                )
            continue
        seen[key] = (value, ln + 1)
        if key[0] == "core":
            core = value
        elif key[0] == "h1":
            a, b = i - 1, j - 1
            h1[a, b] = h1[b, a] = value
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for p, q, r, s in (
                (a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
                (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a),
            ):
                h2[p, q, r, s] = value

    return MolecularSystem(
        n_spatial_orbitals=norb,
        n_electrons=nelec,
        ms2=ms2,
        core_energy=core,
        h1=h1,
        h2=h2,
    )


# ---------------------------------------------------------------------------
# Hamiltonian and spin operators
# ---------------------------------------------------------------------------

def build_hamiltonian(sys: MolecularSystem, threshold: float = DEFAULT_THRESHOLD) -> PauliSum:
    """Qubit Hamiltonian on 2n qubits, Hermitian, core energy included.

    Chemist integrals are converted to the physicist two-body
    coefficient on the fly: the ladder product a^dag_P a^dag_Q a_R a_S
    carries (1/2) (ps|qr) with matched spins (P,S) and (Q,R).
    """
    n = sys.n_spatial_orbitals
    nq = sys.n_qubits
    strings: list = []
    if sys.core_energy != 0.0:
        strings.append((0, 0, complex(sys.core_energy)))

    h1 = sys.h1
    for p in range(n):
        for q in range(n):
            v = h1[p, q]
            if v == 0.0:
                continue
            for spin in (0, 1):
                P = spin_orbital_index(p, spin, n)
                Q = spin_orbital_index(q, spin, n)
                strings.extend(_term_strings(((P, 1), (Q, 0)), v, True))

    h2 = sys.h2
    for p in range(n):
        for s in range(n):
            for q in range(n):
                for r in range(n):
                    v = h2[p, s, q, r]  # chemist (ps|qr)
                    if v == 0.0:
                        continue
                    half = 0.5 * v
                    for spin_a in (0, 1):
                        P = spin_orbital_index(p, spin_a, n)
                        S = spin_orbital_index(s, spin_a, n)
                        for spin_b in (0, 1):
                            Q = spin_orbital_index(q, spin_b, n)
                            R = spin_orbital_index(r, spin_b, n)
                            if P == Q or R == S:
                                continue  # a^dag a^dag / a a with equal index vanish
                            strings.extend(
                                _term_strings(((P, 1), (Q, 1), (R, 0), (S, 0)), half, True)
                            )

    return _strings_to_sum(nq, strings).simplify(threshold)


def number_operator(n_so: int) -> PauliSum:
    """Total particle number as a qubit operator."""
    op = FermionOperator.from_terms((((p, 1), (p, 0)), 1.0) for p in range(n_so))
    return jordan_wigner(op, n_so)


def _sz_fermion(n_spatial: int) -> FermionOperator:
    items = []
    for p in range(n_spatial):
        items.append(((( spin_orbital_index(p, 0, n_spatial), 1), (spin_orbital_index(p, 0, n_spatial), 0)), 0.5))
        items.append(((( spin_orbital_index(p, 1, n_spatial), 1), (spin_orbital_index(p, 1, n_spatial), 0)), -0.5))
    return FermionOperator.from_terms(items)


def s_z(n_spatial_orbitals: int) -> PauliSum:
    """Z-projection of total spin as a qubit operator."""
    return jordan_wigner(_sz_fermion(n_spatial_orbitals), 2 * n_spatial_orbitals)


def s_squared(n_spatial_orbitals: int) -> PauliSum:
    """Total-spin operator S^2 = S-S+ + Sz(Sz + 1) as a qubit operator."""
    n = n_spatial_orbitals
    s_plus = FermionOperator.from_terms(
        ((((spin_orbital_index(p, 0, n), 1), (spin_orbital_index(p, 1, n), 0)), 1.0) for p in range(n))
    )
    s_minus = s_plus.adjoint()
    sz = _sz_fermion(n)
    s2 = s_minus * s_plus + sz * sz + sz
    return jordan_wigner(s2, 2 * n).simplify(0.0)


def penalized_hamiltonian(hamiltonian: PauliSum, mu: float) -> PauliSum:
    """H + (mu/2) S^2; biases optimization toward singlet states."""
    if hamiltonian.n_qubits % 2:
        raise ValueError("penalized Hamiltonian needs an even qubit count")
    if mu == 0.0:
        return hamiltonian
    s2 = s_squared(hamiltonian.n_qubits // 2)
    return hamiltonian + s2.scale(mu / 2.0)


def hf_occupations(sys: MolecularSystem) -> tuple[int, ...]:
    """Occupied qubits of the lowest-orbital (Hartree-Fock) determinant."""
    n = sys.n_spatial_orbitals
    n_alpha = (sys.n_electrons + sys.ms2) // 2
    n_beta = sys.n_electrons - n_alpha
    if not (0 <= n_beta <= n_alpha <= n):
        raise ValueError("inconsistent electron count / MS2")
    occ = [spin_orbital_index(p, 0, n) for p in range(n_alpha)]
    occ += [spin_orbital_index(p, 1, n) for p in range(n_beta)]
    return tuple(sorted(occ))


# ---------------------------------------------------------------------------
# Operator pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorPool:
    """Indexed anti-Hermitian generators of a single flavor."""

    flavor: str
    generators: tuple[PauliSum, ...]
    labels: tuple[str, ...]
    n_qubits: int = field(default=0)

    def __post_init__(self):
        if self.flavor not in POOL_FLAVORS:
            raise ValueError(f"unknown pool flavor {self.flavor!r}")
        if len(self.generators) != len(self.labels):
            raise ValueError("generators/labels length mismatch")
        nq = self.n_qubits or (self.generators[0].n_qubits if self.generators else 0)
        object.__setattr__(self, "n_qubits", nq)
        for g, label in zip(self.generators, self.labels):
            if g.n_qubits != nq:
                raise ValueError(f"generator {label}: wrong qubit count")
            if not g.is_anti_hermitian(0.0):
                raise ValueError(f"generator {label} is not exactly anti-Hermitian")

    def __len__(self) -> int:
        return len(self.generators)

    def dump(self) -> str:
        """One generator per line: label, TAB, ';'-joined term dump."""
        lines = []
        for g, label in zip(self.generators, self.labels):
            terms = ";".join(
                f"{c.real!r} {c.imag!r} {s.label()}".rstrip() for s, c in g.terms()
            )
            lines.append(f"{label}\t{terms}")
        return "\n".join(lines) + ("\n" if lines else "")


def _so_label(so: int, n: int) -> str:
    return f"{so % n}{'a' if so < n else 'b'}"


def _excitation_index_sets(n: int):
    """Shared spin-preserving index enumeration for the f and q pools.

    Singles: spin-orbital pairs P<Q with equal spin.  Doubles: disjoint
    creation pair (P<Q) and annihilation pair (R<S), all four indices
    distinct, net Sz preserved, with (P,Q) > (R,S) to drop the
    redundant negated partner.
    """
    n_so = 2 * n
    spin = lambda so: 0 if so < n else 1
    singles = [
        (P, Q)
        for P in range(n_so)
        for Q in range(P + 1, n_so)
        if spin(P) == spin(Q)
    ]
    pairs = [
        (P, Q) for P in range(n_so) for Q in range(P + 1, n_so)
    ]
    doubles = []
    for a, (P, Q) in enumerate(pairs):
        for R, S in pairs[:a]:
            if len({P, Q, R, S}) != 4:
                continue
            if spin(P) + spin(Q) != spin(R) + spin(S):
                continue
            doubles.append((P, Q, R, S))
    return singles, doubles


def make_pool(flavor: str, sys: MolecularSystem) -> OperatorPool:
    """Generate the requested operator pool for a molecular system.

    fermionic        JW-mapped anti-Hermitian singles/doubles (Z-chains kept)
    qubit_excitation same index sets with the Z-chains removed
    pauli_string     deduplicated odd-Y Pauli words from the
                     qubit-excitation decomposition (weight 2 and 4)
    """
    if flavor not in POOL_FLAVORS:
        raise ValueError(f"unknown pool flavor {flavor!r}")
    n = sys.n_spatial_orbitals
    nq = sys.n_qubits
    singles, doubles = _excitation_index_sets(n)

    if flavor in ("fermionic", "qubit_excitation"):
        gens: list[PauliSum] = []
        labels: list[str] = []
        for P, Q in singles:
            pairs = [(((P, 1), (Q, 0)), 1.0), (((Q, 1), (P, 0)), -1.0)]
            if flavor == "fermionic":
                g = jordan_wigner(FermionOperator.from_terms(pairs), nq)
            else:
                g = _qubit_excitation_image(pairs, nq)
            gens.append(g)
            labels.append(f"s:{_so_label(Q, n)}->{_so_label(P, n)}")
        for P, Q, R, S in doubles:
            pairs = [
                (((P, 1), (Q, 1), (R, 0), (S, 0)), 1.0),
                (((S, 1), (R, 1), (Q, 0), (P, 0)), -1.0),
            ]
            if flavor == "fermionic":
                g = jordan_wigner(FermionOperator.from_terms(pairs), nq)
            else:
                g = _qubit_excitation_image(pairs, nq)
            gens.append(g)
            labels.append(
                f"d:{_so_label(R, n)},{_so_label(S, n)}->"
                f"{_so_label(P, n)},{_so_label(Q, n)}"
            )
        return OperatorPool(flavor, tuple(gens), tuple(labels), nq)

    # pauli_string: decompose the qubit-excitation pool into odd-Y words
    seen: set[tuple[int, int]] = set()
    gens = []
    labels = []

    def add_string(letters: dict[int, str]):
        s = PauliString(nq, letters)
        key = (s.x, s.z)
        if key in seen:
            return
        seen.add(key)
        gens.append(PauliSum(nq, [(s, 1.0j)]))
        labels.append(s.label())

    for P, Q in singles:
        add_string({P: "X", Q: "Y"})
        add_string({P: "Y", Q: "X"})
    for P, Q, R, S in doubles:
        qubits = sorted((P, Q, R, S))
        for pattern in range(16):
            word = ["Y" if (pattern >> i) & 1 else "X" for i in range(4)]
            if word.count("Y") % 2 == 0:
                continue
            add_string(dict(zip(qubits, word)))
    return OperatorPool("pauli_string", tuple(gens), tuple(labels), nq)
