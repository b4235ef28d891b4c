"""Pauli-string algebra on N sites.

A :class:`PauliString` is a tensor product of single-site Pauli letters
(``I``, ``X``, ``Y``, ``Z``) with a complex coefficient.  An
:class:`Operator` is a weight-merged sum of Pauli strings and is the
representation used for every Hamiltonian and derived operator in this
package.  Site ``j`` of a letters string maps to bit ``j`` of dense
matrices built with :meth:`Operator.dense` (site 0 is the least
significant bit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

LETTERS = "IXYZ"

# (a, b) -> (phase, a*b) for single-site Pauli products
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

ZERO_TOL = 1e-14


def pauli_anticommutes(a: str, b: str) -> bool:
    """True iff the Pauli strings ``a`` and ``b`` anticommute.

    Two strings anticommute iff the number of sites where both letters are
    non-identity and different is odd.
    """
    if len(a) != len(b):
        raise ValueError(f"site count mismatch: {len(a)} vs {len(b)}")
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 1


def _mul_letters(a: str, b: str) -> tuple[complex, str]:
    phase: complex = 1
    out = []
    for x, y in zip(a, b):
        ph, c = _MUL[(x, y)]
        phase *= ph
        out.append(c)
    return phase, "".join(out)


@dataclass(frozen=True)
class PauliString:
    """A weighted Pauli string, e.g. ``PauliString("XXIZ", -1.0)``."""

    letters: str
    coeff: complex = 1.0

    def __post_init__(self):
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {bad!r}")

    @classmethod
    def from_sites(cls, n: int, sites: Mapping[int, str], coeff: complex = 1.0) -> "PauliString":
        """Build a length-``n`` string with the given ``site -> letter`` map."""
        word = ["I"] * n
        for j, letter in sites.items():
            if not 0 <= j < n:
                raise ValueError(f"site {j} outside [0, {n})")
            word[j] = letter
        return cls("".join(word), coeff)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return sum(1 for c in self.letters if c != "I")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.letters) if c != "I")

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("site count mismatch")
        phase, word = _mul_letters(self.letters, other.letters)
        return PauliString(word, self.coeff * other.coeff * phase)

    def anticommutes(self, other: "PauliString") -> bool:
        return pauli_anticommutes(self.letters, other.letters)

    def dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; site 0 is the least significant bit."""
        mat = np.array([[self.coeff]], dtype=complex)
        for j in reversed(range(self.n)):
            mat = np.kron(mat, _DENSE[self.letters[j]])
        return mat


class Operator:
    """A weight-merged sum of Pauli strings on ``n`` sites.

    Terms with merged weight below ``ZERO_TOL`` are dropped, so operator
    equality can be tested term-by-term.  Instances are immutable.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Iterable[tuple[str, complex]] = ()):
        merged: dict[str, complex] = {}
        for word, w in terms:
            if len(word) != n:
                raise ValueError(f"term {word!r} has length {len(word)}, expected {n}")
            merged[word] = merged.get(word, 0.0) + w
        self.n = n
        self._terms = {
            word: w for word, w in merged.items() if abs(w) > ZERO_TOL
        }

    @classmethod
    def from_strings(cls, strings: Iterable[PauliString]) -> "Operator":
        strings = list(strings)
        if not strings:
            raise ValueError("empty operator needs an explicit site count")
        n = strings[0].n
        return cls(n, ((s.letters, s.coeff) for s in strings))

    @classmethod
    def zero(cls, n: int) -> "Operator":
        return cls(n, ())

    def terms(self) -> Iterator[tuple[str, complex]]:
        return iter(sorted(self._terms.items()))

    def strings(self) -> Iterator[PauliString]:
        return (PauliString(word, w) for word, w in self.terms())

    @property
    def num_terms(self) -> int:
        return len(self._terms)

    def weight(self, word: str) -> complex:
        return self._terms.get(word, 0.0)

    @property
    def max_support(self) -> int:
        """Largest number of non-identity letters over all terms."""
        return max((sum(1 for c in w if c != "I") for w in self._terms), default=0)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(w.imag) <= tol for w in self._terms.values())

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.n, list(self._terms.items()) + list(other._terms.items()))

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> "Operator":
        return Operator(self.n, ((w, scalar * c) for w, c in self._terms.items()))

    def __matmul__(self, other: "Operator") -> "Operator":
        """Operator product, expanded term-by-term and re-merged."""
        self._check(other)
        out: dict[str, complex] = {}
        for wa, ca in self._terms.items():
            for wb, cb in other._terms.items():
                phase, word = _mul_letters(wa, wb)
                out[word] = out.get(word, 0.0) + ca * cb * phase
        return Operator(self.n, out.items())

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def __eq__(self, other) -> bool:
        if not isinstance(other, Operator):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def allclose(self, other: "Operator", tol: float = 1e-12) -> bool:
        if self.n != other.n:
            return False
        words = set(self._terms) | set(other._terms)
        return all(abs(self.weight(w) - other.weight(w)) <= tol for w in words)

    def dense(self) -> np.ndarray:
        dim = 2**self.n
        mat = np.zeros((dim, dim), dtype=complex)
        for s in self.strings():
            mat += s.dense()
        return mat

    def sparse(self):
        """CSR matrix; preferred over dense() beyond ~10 sites."""
        import scipy.sparse as sp

        site = {
            "I": sp.identity(2, format="csr", dtype=complex),
            "X": sp.csr_matrix(_DENSE["X"]),
            "Y": sp.csr_matrix(_DENSE["Y"]),
            "Z": sp.csr_matrix(_DENSE["Z"]),
        }
        total = None
        for word, w in self.terms():
            mat = sp.identity(1, format="csr", dtype=complex)
            for j in reversed(range(self.n)):
                mat = sp.kron(mat, site[word[j]], format="csr")
            total = w * mat if total is None else total + w * mat
        if total is None:
            dim = 2**self.n
            return sp.csr_matrix((dim, dim), dtype=complex)
        return total

    def to_json(self) -> str:
        items = [{"pauli": w, "weight": c.real if abs(c.imag) <= ZERO_TOL else [c.real, c.imag]}
                 for w, c in self.terms()]
        return json.dumps(items)

    @classmethod
    def from_json(cls, text: str, n: int | None = None) -> "Operator":
        items = json.loads(text)
        if not items and n is None:
            raise ValueError("empty operator needs an explicit site count")
        terms = []
        for item in items:
            w = item["weight"]
            terms.append((item["pauli"], complex(w[0], w[1]) if isinstance(w, list) else complex(w)))
        return cls(n if n is not None else len(items[0]["pauli"]), terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{w}" for w, c in list(self.terms())[:6])
        more = "" if self.num_terms <= 6 else f" + ... ({self.num_terms} terms)"
        return f"Operator(n={self.n}, {body}{more})"

    def _check(self, other: "Operator") -> None:
        if self.n != other.n:
            raise ValueError(f"site count mismatch: {self.n} vs {other.n}")


def error_shift_operator(p: PauliString, ham: Operator) -> Operator:
    """Energy-shift operator P H P - H for a Pauli error P.

    Conjugating by P flips the sign of exactly the terms of ``ham`` that
    anticommute with P, so the result is -2 times their sum.
    """
    if p.n != ham.n:
        raise ValueError(f"site count mismatch: {p.n} vs {ham.n}")
    return Operator(
        ham.n,
        ((word, -2.0 * w) for word, w in ham.terms() if pauli_anticommutes(p.letters, word)),
    )
