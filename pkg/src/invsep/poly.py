"""Sparse multivariate polynomials over real or complex scalars.

A polynomial is a finite map from exponent tuples (one non-negative integer
per coordinate) to coefficients.  Coefficients are double-precision complex;
terms whose magnitude falls below ``ZERO_THRESHOLD`` are dropped on
normalization, so the zero polynomial is the empty term map.  Term iteration
and serialization follow graded lexicographic order, which makes every dump
deterministic.

Polynomials are immutable after construction; all operations return new
objects and are safe to share across workers.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

ZERO_THRESHOLD = 1e-12
DEGREE_CAP_DEFAULT = 64

Exponent = tuple[int, ...]


class DegreeCapExceeded(RuntimeError):
    """Raised when a symbolic power would exceed the degree cap.

    Signals the caller to switch to the evaluation path instead of
    silently truncating.
    """


@dataclass(frozen=True)
class HomogeneityInfo:
    homogeneous: bool
    degree: int | None


def _grlex_key(exp: Exponent) -> tuple:
    return (sum(exp), exp)


def _phase_for_turn(turn: Fraction) -> complex:
    # Quarter turns are exact; they cover every real (+/-1) group action.
    turn = turn % 1
    if turn == 0:
        return 1.0
    if turn == Fraction(1, 2):
        return -1.0
    if turn == Fraction(1, 4):
        return 1j
    if turn == Fraction(3, 4):
        return -1j
    return cmath.exp(2j * cmath.pi * float(turn))


class Polynomial:
    """Immutable sparse polynomial in ``dim`` variables.

    ``field`` is ``"R"`` or ``"C"``.  Real polynomials store real
    coefficients and evaluate to floats at real points; complex ones
    evaluate to complex scalars.
    """

    __slots__ = ("dim", "field", "_terms", "_sorted", "_arrays")

    def __init__(self, dim: int, terms: Mapping[Exponent, complex] | None = None,
                 field: str = "C"):
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        if field not in ("R", "C"):
            raise ValueError(f"field must be 'R' or 'C', got {field!r}")
        clean: dict[Exponent, complex] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != dim:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {dim}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = complex(coeff)
            if field == "R":
                if abs(c.imag) > ZERO_THRESHOLD:
                    raise ValueError(f"complex coefficient {c} in a real polynomial")
                c = complex(c.real, 0.0)
            if abs(c) < ZERO_THRESHOLD:
                continue
            prev = clean.get(exp)
            c = c if prev is None else prev + c
            if abs(c) < ZERO_THRESHOLD:
                clean.pop(exp, None)
            else:
                clean[exp] = c
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_sorted", None)
        object.__setattr__(self, "_arrays", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dim: int, field: str = "C") -> "Polynomial":
        return cls(dim, {}, field)

    @classmethod
    def constant(cls, dim: int, value: complex, field: str = "C") -> "Polynomial":
        return cls(dim, {(0,) * dim: value}, field)

    @classmethod
    def coordinate(cls, dim: int, index: int, field: str = "C") -> "Polynomial":
        """The coordinate functional x_{index+1} (0-based index)."""
        if not 0 <= index < dim:
            raise ValueError(f"coordinate index {index} out of range for dim {dim}")
        exp = [0] * dim
        exp[index] = 1
        return cls(dim, {tuple(exp): 1.0}, field)

    @classmethod
    def linear(cls, coeffs: Iterable[complex], field: str = "C") -> "Polynomial":
        coeffs = list(coeffs)
        dim = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * dim
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(dim, terms, field)

    @classmethod
    def monomial(cls, dim: int, exp: Exponent, coeff: complex = 1.0,
                 field: str = "C") -> "Polynomial":
        return cls(dim, {tuple(exp): coeff}, field)

    # -- inspection ----------------------------------------------------

    def terms(self) -> Iterator[tuple[Exponent, complex]]:
        """Terms in graded lexicographic order."""
        if self._sorted is None:
            object.__setattr__(self, "_sorted",
                               sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0])))
        return iter(self._sorted)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def num_terms(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(e) for e in self._terms)

    def coefficient(self, exp: Exponent) -> complex:
        return self._terms.get(tuple(exp), 0.0)

    def homogeneity(self) -> HomogeneityInfo:
        if not self._terms:
            return HomogeneityInfo(True, 0)
        degrees = {sum(e) for e in self._terms}
        if len(degrees) == 1:
            return HomogeneityInfo(True, degrees.pop())
        return HomogeneityInfo(False, None)

    # -- ring operations ----------------------------------------------

    def _check_compatible(self, other: "Polynomial") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.field != other.field:
            raise ValueError(f"field mismatch: {self.field} vs {other.field}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            out[exp] = out.get(exp, 0.0) + c
        return Polynomial(self.dim, out, self.field)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def scale(self, factor: complex) -> "Polynomial":
        if self.field == "R" and abs(complex(factor).imag) > ZERO_THRESHOLD:
            raise ValueError("complex scale factor on a real polynomial")
        return Polynomial(self.dim, {e: c * factor for e, c in self._terms.items()},
                          self.field)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check_compatible(other)
            out: dict[Exponent, complex] = {}
            for ea, ca in self._terms.items():
                for eb, cb in other._terms.items():
                    exp = tuple(x + y for x, y in zip(ea, eb))
                    out[exp] = out.get(exp, 0.0) + ca * cb
            return Polynomial(self.dim, out, self.field)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def pow(self, m: int, degree_cap: int = DEGREE_CAP_DEFAULT) -> "Polynomial":
        """Symbolic m-th power by repeated squaring.

        Raises :class:`DegreeCapExceeded` when the predicted degree
        ``m * self.degree`` exceeds ``degree_cap``; callers then switch to
        the numeric evaluation path.
        """
        if m < 1:
            raise ValueError(f"power must be >= 1, got {m}")
        if self.is_zero:
            return self
        predicted = m * self.degree
        if predicted > degree_cap:
            raise DegreeCapExceeded(
                f"power {m} of a degree-{self.degree} polynomial reaches degree "
                f"{predicted} > cap {degree_cap}; use the evaluation path")
        result = Polynomial.constant(self.dim, 1.0, self.field)
        base = self
        e = m
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __pow__(self, m: int) -> "Polynomial":
        return self.pow(m)

    # -- composition with linear maps ----------------------------------

    def compose_linear(self, element) -> "Polynomial":
        """The polynomial w -> P(A(w)) for a structured linear map A.

        Permutation-with-phases maps reindex exponents and rotate
        coefficients exactly; dense matrices expand symbolically (the
        degree is preserved, only the term count grows).
        """
        if element.dim != self.dim:
            raise ValueError(f"element dimension {element.dim} != {self.dim}")
        phased = getattr(element, "perm", None)
        if phased is not None:
            return self._compose_phased(element)
        return self._compose_dense(element.as_matrix())

    def _compose_phased(self, element) -> "Polynomial":
        perm = element.perm
        turns = element.turns
        if self.field == "R" and any(t % 1 not in (Fraction(0), Fraction(1, 2))
                                     for t in turns):
            raise ValueError("complex phases applied to a real polynomial")
        out: dict[Exponent, complex] = {}
        for exp, coeff in self._terms.items():
            new_exp = [0] * self.dim
            turn = Fraction(0)
            for i, e in enumerate(exp):
                if e:
                    new_exp[perm[i]] = e
                    turn += turns[i] * e
            key = tuple(new_exp)
            c = coeff * _phase_for_turn(turn)
            out[key] = out.get(key, 0.0) + c
        return Polynomial(self.dim, out, self.field)

    def _compose_dense(self, matrix: np.ndarray) -> "Polynomial":
        if self.field == "R" and np.iscomplexobj(matrix) and np.abs(matrix.imag).max() > ZERO_THRESHOLD:
            raise ValueError("complex matrix applied to a real polynomial")
        rows = [Polynomial.linear(np.asarray(matrix)[i, :], self.field)
                for i in range(self.dim)]
        powers: dict[tuple[int, int], Polynomial] = {}

        def row_power(i: int, e: int) -> Polynomial:
            got = powers.get((i, e))
            if got is None:
                got = rows[i].pow(e, degree_cap=max(DEGREE_CAP_DEFAULT, e))
                powers[(i, e)] = got
            return got

        total = Polynomial.zero(self.dim, self.field)
        for exp, coeff in self._terms.items():
            term = Polynomial.constant(self.dim, coeff, self.field)
            for i, e in enumerate(exp):
                if e:
                    term = term * row_power(i, e)
            total = total + term
        return total

    # -- coordinate restriction / extension -----------------------------

    def restrict(self, n: int) -> "Polynomial":
        """Substitute 0 for every coordinate beyond the first n."""
        if not 1 <= n <= self.dim:
            raise ValueError(f"cannot restrict dim {self.dim} to {n}")
        out = {}
        for exp, c in self._terms.items():
            if all(e == 0 for e in exp[n:]):
                out[exp[:n]] = c
        return Polynomial(n, out, self.field)

    def extend(self, n: int) -> "Polynomial":
        """Embed into n >= dim coordinates (pre-compose with truncation)."""
        if n < self.dim:
            raise ValueError(f"cannot extend dim {self.dim} to {n}")
        pad = (0,) * (n - self.dim)
        return Polynomial(n, {exp + pad: c for exp, c in self._terms.items()},
                          self.field)

    # -- evaluation ------------------------------------------------------

    def _eval_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            items = list(self.terms())
            exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.dim)
            coeffs = np.array([c for _, c in items], dtype=np.complex128)
            object.__setattr__(self, "_arrays", (exps, coeffs))
        return self._arrays

    def eval(self, x) -> complex | float:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise ValueError(f"point of shape {x.shape}, expected ({self.dim},)")
        if self.is_zero:
            return 0.0 if self.field == "R" and not np.iscomplexobj(x) else 0j
        total = 0j
        for exp, coeff in self.terms():
            term = coeff
            for xi, e in zip(x, exp):
                if e:
                    term *= xi ** e
            total += term
        if self.field == "R" and not np.iscomplexobj(x):
            return total.real
        return total

    def __call__(self, x):
        return self.eval(x)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an array of shape (k, dim)."""
        points = np.asarray(points)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(f"points of shape {points.shape}, expected (k, {self.dim})")
        k = points.shape[0]
        if self.is_zero or k == 0:
            out = np.zeros(k, dtype=np.complex128)
        else:
            exps, coeffs = self._eval_arrays()
            pts = points.astype(np.complex128, copy=False)
            # chunk so the (rows, terms, dim) broadcast stays inside ~64MB
            rows = max(1, int(4e6 / max(1, exps.shape[0] * self.dim)))
            pieces = []
            for start in range(0, k, rows):
                block = pts[start:start + rows]
                mono = np.prod(block[:, None, :] ** exps[None, :, :], axis=2)
                pieces.append(mono @ coeffs)
            out = np.concatenate(pieces)
        if self.field == "R" and not np.iscomplexobj(points):
            return out.real
        return out

    # -- comparison and serialization -------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.dim == other.dim and self.field == other.field
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.dim, self.field, tuple(self.terms())))

    def almost_equal(self, other: "Polynomial", tol: float = 1e-10) -> bool:
        """Term-map equality within tol on every coefficient."""
        if self.dim != other.dim or self.field != other.field:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= tol
                   for k in keys)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "field": self.field,
            "terms": [{"exp": list(exp), "re": c.real, "im": c.imag}
                      for exp, c in self.terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        terms = {tuple(t["exp"]): complex(t.get("re", 0.0), t.get("im", 0.0))
                 for t in data["terms"]}
        return cls(int(data["dim"]), terms, data.get("field", "C"))

    def __repr__(self) -> str:
        if self.is_zero:
            return f"Polynomial(0; dim={self.dim}, {self.field})"
        parts = []
        for exp, c in list(self.terms())[:4]:
            mono = "*".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}"
                            for i, e in enumerate(exp) if e) or "1"
            parts.append(f"({c:.4g})*{mono}")
        more = "" if self.num_terms <= 4 else f" + {self.num_terms - 4} more"
        return f"Polynomial({' + '.join(parts)}{more}; dim={self.dim}, {self.field})"
