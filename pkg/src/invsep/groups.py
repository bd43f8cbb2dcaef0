"""Structured group actions: elements, finite groups, the circle/torus.

Elements come in two flavors.  :class:`PhasedPermutation` covers plain
permutations, signed permutations, diagonal root-of-unity phases, and any
composition of those; its phase data is exact (fractions of a full turn), so
element deduplication never compares floats.  :class:`DenseElement` is the
general matrix fallback, keyed by rounding entries to 1e-9.

Finite groups carry the uniform averaging weight 1/|G|; the circle/torus is
averaged by root-of-unity quadrature, which is exact for polynomial degrees
below the node count.  Infinite groups enter only through their
finite-dimensional truncations (see :func:`project_group`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .poly import Polynomial, _phase_for_turn

ELEMENT_MATCH_TOL = 1e-10
DENSE_KEY_SCALE = 1e9


class ClosureCapExceeded(RuntimeError):
    """Group closure grew past the cap (group too large or infinite)."""


def _as_turn(t) -> Fraction:
    if isinstance(t, Fraction):
        return t % 1
    if isinstance(t, tuple):
        return Fraction(t[0], t[1]) % 1
    if isinstance(t, int):
        return Fraction(t) % 1
    raise TypeError(f"turn must be a Fraction, int, or (num, den) pair, got {t!r}")


class PhasedPermutation:
    """Linear map (g x)_i = exp(2*pi*i*turns_i) * x[perm[i]].

    ``perm`` is a bijection of range(dim); ``turns`` holds exact fractions
    of a full circle, so composition and inversion stay exact.
    """

    __slots__ = ("perm", "turns", "_phases", "_inv")

    def __init__(self, perm: Sequence[int], turns: Sequence | None = None):
        perm = tuple(int(p) for p in perm)
        n = len(perm)
        if sorted(perm) != list(range(n)):
            raise ValueError(f"{perm} is not a permutation of range({n})")
        if turns is None:
            turns = (Fraction(0),) * n
        else:
            turns = tuple(_as_turn(t) for t in turns)
            if len(turns) != n:
                raise ValueError("turns length must match permutation length")
        self.perm = perm
        self.turns = turns
        self._phases = None
        self._inv = None

    @property
    def dim(self) -> int:
        return len(self.perm)

    @property
    def is_real(self) -> bool:
        half = Fraction(1, 2)
        return all(t in (0, half) for t in self.turns)

    def phases(self) -> np.ndarray:
        if self._phases is None:
            vals = [_phase_for_turn(t) for t in self.turns]
            if self.is_real:
                self._phases = np.array([v.real if isinstance(v, complex) else v
                                         for v in vals], dtype=np.float64)
            else:
                self._phases = np.array(vals, dtype=np.complex128)
        return self._phases

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point of dimension {x.shape[-1]}, expected {self.dim}")
        return x[..., list(self.perm)] * self.phases()

    def compose(self, other) -> "PhasedPermutation | DenseElement":
        """The map x -> self(other(x))."""
        if isinstance(other, DenseElement):
            return DenseElement(self.as_matrix() @ other.matrix)
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in composition")
        perm = tuple(other.perm[p] for p in self.perm)
        turns = tuple(self.turns[i] + other.turns[self.perm[i]]
                      for i in range(self.dim))
        return PhasedPermutation(perm, turns)

    def inverse(self) -> "PhasedPermutation":
        if self._inv is None:
            n = self.dim
            q = [0] * n
            for i, p in enumerate(self.perm):
                q[p] = i
            turns = tuple(-self.turns[q[j]] for j in range(n))
            self._inv = PhasedPermutation(tuple(q), turns)
        return self._inv

    @property
    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.dim)) and all(t == 0 for t in self.turns)

    def as_matrix(self) -> np.ndarray:
        dtype = np.float64 if self.is_real else np.complex128
        m = np.zeros((self.dim, self.dim), dtype=dtype)
        ph = self.phases()
        for i, p in enumerate(self.perm):
            m[i, p] = ph[i]
        return m

    def key(self) -> tuple:
        return ("pp", self.perm,
                tuple((t.numerator, t.denominator) for t in self.turns))

    def sort_key(self) -> tuple:
        return (0, self.perm,
                tuple((t.numerator, t.denominator) for t in self.turns))

    def __eq__(self, other):
        return isinstance(other, PhasedPermutation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if all(t == 0 for t in self.turns):
            return f"PhasedPermutation(perm={self.perm})"
        return f"PhasedPermutation(perm={self.perm}, turns={[str(t) for t in self.turns]})"


class DenseElement:
    """General invertible matrix element (fallback representation)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        self.matrix = m.astype(np.complex128) if np.iscomplexobj(m) else m.astype(np.float64)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x) -> np.ndarray:
        return np.asarray(x) @ self.matrix.T

    def compose(self, other) -> "DenseElement":
        return DenseElement(self.matrix @ _as_matrix(other))

    def inverse(self) -> "DenseElement":
        return DenseElement(np.linalg.inv(self.matrix))

    @property
    def is_identity(self) -> bool:
        return np.allclose(self.matrix, np.eye(self.dim), atol=ELEMENT_MATCH_TOL)

    def as_matrix(self) -> np.ndarray:
        return self.matrix

    def key(self) -> tuple:
        m = np.asarray(self.matrix, dtype=np.complex128)
        # +0.0 maps -0.0 to 0.0 so the key is sign-of-zero stable
        flat = tuple(int(round(v.real * DENSE_KEY_SCALE)) + 0 for v in m.ravel()) + \
               tuple(int(round(v.imag * DENSE_KEY_SCALE)) + 0 for v in m.ravel())
        return ("dense", self.dim, flat)

    def sort_key(self) -> tuple:
        return (1,) + self.key()[1:]

    def __eq__(self, other):
        return isinstance(other, DenseElement) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"DenseElement(dim={self.dim})"


GroupElement = PhasedPermutation | DenseElement


def _as_matrix(el) -> np.ndarray:
    return el.matrix if isinstance(el, DenseElement) else el.as_matrix()


# ---------------------------------------------------------------------------
# element constructors


def identity(dim: int) -> PhasedPermutation:
    return PhasedPermutation(range(dim))


def permutation(perm: Sequence[int]) -> PhasedPermutation:
    return PhasedPermutation(perm)


def transposition(dim: int, i: int, j: int) -> PhasedPermutation:
    perm = list(range(dim))
    perm[i], perm[j] = perm[j], perm[i]
    return PhasedPermutation(perm)


def cyclic_shift(dim: int) -> PhasedPermutation:
    return PhasedPermutation(tuple((i + 1) % dim for i in range(dim)))


def signed_permutation(perm: Sequence[int], signs: Sequence[int]) -> PhasedPermutation:
    turns = [Fraction(0) if s == 1 else Fraction(1, 2) for s in signs]
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    return PhasedPermutation(perm, turns)


def diagonal_phases(turns: Sequence) -> PhasedPermutation:
    turns = [_as_turn(t) for t in turns]
    return PhasedPermutation(range(len(turns)), turns)


def roots_generator(dim: int, m: int) -> PhasedPermutation:
    """Multiply coordinate m (1-based) by the primitive m-th root of unity."""
    if not 2 <= m <= dim:
        raise ValueError(f"coordinate index m={m} out of range 2..{dim}")
    turns = [Fraction(0)] * dim
    turns[m - 1] = Fraction(1, m)
    return PhasedPermutation(range(dim), turns)


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup:
    """A finite set of invertible elements with uniform Haar weight 1/|G|.

    Elements are stored in canonical sort order, so every iteration (and
    hence every floating-point reduction) is reproducible.
    """

    def __init__(self, elements: Iterable[GroupElement], check: bool = True):
        seen: dict[tuple, GroupElement] = {}
        for el in elements:
            seen.setdefault(el.key(), el)
        if not seen:
            raise ValueError("a group needs at least one element")
        els = sorted(seen.values(), key=lambda e: e.sort_key())
        dims = {e.dim for e in els}
        if len(dims) != 1:
            raise ValueError(f"mixed element dimensions: {sorted(dims)}")
        self.dim = dims.pop()
        self.elements = els
        self._index = {e.key(): i for i, e in enumerate(els)}
        if check:
            self._check_axioms()

    def _check_axioms(self) -> None:
        if not any(e.is_identity for e in self.elements):
            raise ValueError("identity element missing")
        for e in self.elements:
            if e.inverse().key() not in self._index:
                raise ValueError(f"inverse of {e!r} missing")
        for a in self.elements:
            for b in self.elements:
                if a.compose(b).key() not in self._index:
                    raise ValueError(f"not closed: {a!r} * {b!r} escapes the set")

    @property
    def weight(self) -> float:
        return 1.0 / len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, el: GroupElement) -> bool:
        return el.key() in self._index

    def element_order(self, el: GroupElement, cap: int = 10000) -> int:
        acc = el
        for k in range(1, cap + 1):
            if acc.is_identity:
                return k
            acc = acc.compose(el)
        raise ClosureCapExceeded(f"element order exceeds {cap}")

    def __repr__(self):
        return f"FiniteGroup(|G|={len(self)}, dim={self.dim})"


def generate_group(generators: Sequence[GroupElement], cap: int = 100000) -> FiniteGroup:
    """Breadth-first closure of the generators under composition."""
    if not generators:
        raise ValueError("no generators")
    dims = {g.dim for g in generators}
    if len(dims) != 1:
        raise ValueError("generators must share a dimension")
    seed = identity(dims.pop())
    seen: dict[tuple, GroupElement] = {seed.key(): seed}
    boundary = [seed]
    while boundary:
        fresh = []
        for g in generators:
            for b in boundary:
                c = g.compose(b)
                k = c.key()
                if k not in seen:
                    seen[k] = c
                    fresh.append(c)
                    if len(seen) > cap:
                        raise ClosureCapExceeded(
                            f"closure exceeded cap {cap}; group too large or infinite")
        boundary = fresh
    # BFS over generator words covers all products, so skip the quadratic recheck
    return FiniteGroup(seen.values(), check=False)


# named constructions ---------------------------------------------------------


def sym_group(n: int) -> FiniteGroup:
    """All coordinate permutations of R^n / C^n."""
    if n > 7:
        raise ClosureCapExceeded(f"Sym({n}) has {math.factorial(n)} elements; too large")
    return FiniteGroup((PhasedPermutation(p) for p in itertools.permutations(range(n))),
                       check=False)

def trivial_group(n: int) -> FiniteGroup:
    return FiniteGroup([identity(n)], check=False)


def r_truncation(n: int) -> FiniteGroup:
    """Roots-of-unity phases: coordinate m carries any m-th root of unity."""
    if math.factorial(n) > 50000:
        raise ClosureCapExceeded(f"truncated roots group at n={n} too large")
    ranges = [range(m) for m in range(2, n + 1)]
    els = []
    for ks in itertools.product(*ranges):
        turns = [Fraction(0)] + [Fraction(k, m) for k, m in zip(ks, range(2, n + 1))]
        els.append(PhasedPermutation(range(n), turns))
    return FiniteGroup(els, check=False)


def rf_generated(n: int, cap: int = 100000) -> FiniteGroup:
    """Same group as :func:`r_truncation`, built by generator closure."""
    return generate_group([roots_generator(n, m) for m in range(2, n + 1)], cap=cap)


def block_permutation_group(block_sizes: Sequence[int]) -> FiniteGroup:
    """Permutations preserving each consecutive block of coordinates."""
    sizes = [int(b) for b in block_sizes]
    if any(b < 1 for b in sizes):
        raise ValueError("block sizes must be positive")
    order = math.prod(math.factorial(b) for b in sizes)
    if order > 50000:
        raise ClosureCapExceeded(f"block permutation group of order {order} too large")
    offsets = np.cumsum([0] + sizes)
    per_block = [list(itertools.permutations(range(b))) for b in sizes]
    els = []
    for combo in itertools.product(*per_block):
        perm = []
        for off, local in zip(offsets, combo):
            perm.extend(off + p for p in local)
        els.append(PhasedPermutation(perm))
    return FiniteGroup(els, check=False)


def signed_permutation_group(n: int) -> FiniteGroup:
    """All permutations with per-coordinate sign flips (order n! * 2^n)."""
    order = math.factorial(n) * 2 ** n
    if order > 50000:
        raise ClosureCapExceeded(f"signed permutation group of order {order} too large")
    els = []
    for p in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            els.append(signed_permutation(p, signs))
    return FiniteGroup(els, check=False)


def signed_index_group(n: int) -> FiniteGroup:
    """Permutations of 2n coordinates preserving the first and last n-blocks.

    Coordinate layout: indices 0..n-1 are the negative-index block, n..2n-1
    the positive-index block.
    """
    return block_permutation_group([n, n])


def dyadic_permutation_group(level: int) -> FiniteGroup:
    """Permutations of the 2^level dyadic intervals (full enumeration)."""
    if level > 2:
        raise ClosureCapExceeded(
            f"Sym(2^{level}) too large to enumerate; sample with random_permutation")
    return sym_group(2 ** level)


def random_permutation(n: int, rng: np.random.Generator) -> PhasedPermutation:
    return PhasedPermutation(rng.permutation(n))


@dataclass(frozen=True)
class TorusGroup:
    """Circle/torus action by unit phases on a subset of coordinates.

    Averaging uses the M-th roots of unity with equal weights per acting
    coordinate; this quadrature is exact for (trigonometric) polynomial
    degree below M.  ``order=None`` lets each operation pick
    4 * (max degree involved) + 1, which keeps every casebook average exact.
    """

    dim: int
    acting: tuple[int, ...] = (0,)
    order: int | None = None

    def __post_init__(self):
        if not self.acting:
            raise ValueError("at least one acting coordinate required")
        if any(not 0 <= a < self.dim for a in self.acting):
            raise ValueError("acting coordinates out of range")
        if self.order is not None and self.order < 1:
            raise ValueError("quadrature order must be positive")

    def effective_order(self, max_degree: int) -> int:
        return self.order if self.order is not None else 4 * max(max_degree, 1) + 1

    def nodes(self, max_degree: int = 1) -> Iterator[PhasedPermutation]:
        m = self.effective_order(max_degree)
        if m ** len(self.acting) > 10 ** 6:
            raise ClosureCapExceeded("torus quadrature grid too large")
        for ks in itertools.product(range(m), repeat=len(self.acting)):
            turns = [Fraction(0)] * self.dim
            for a, k in zip(self.acting, ks):
                turns[a] = Fraction(k, m)
            yield PhasedPermutation(range(self.dim), turns)

    def node_weight(self, max_degree: int = 1) -> float:
        return 1.0 / self.effective_order(max_degree) ** len(self.acting)

    def random_element(self, rng: np.random.Generator) -> PhasedPermutation:
        # dyadic 2^-30 grid: dense enough to stand in for a uniform angle
        denom = 2 ** 30
        turns = [Fraction(0)] * self.dim
        for a in self.acting:
            turns[a] = Fraction(int(rng.integers(0, denom)), denom)
        return PhasedPermutation(range(self.dim), turns)


def circle_group(order: int | None = None) -> TorusGroup:
    """The circle acting on C^1 by rotation."""
    return TorusGroup(dim=1, acting=(0,), order=order)


# ---------------------------------------------------------------------------
# averaging, orbits, projections


def _sorted_mean(values: list[complex]) -> complex:
    # fixed summation order makes the average exactly invariant under
    # relabeling of the group elements
    arr = np.asarray(values, dtype=np.complex128)
    order = np.lexsort((arr.imag, arr.real))
    return complex(arr[order].sum() / len(arr))


def haar_average(f: Callable[[GroupElement], complex], G, max_degree: int = 1) -> complex:
    """Average f over the group's normalized Haar measure.

    Finite groups use the uniform weight; the torus uses root-of-unity
    quadrature with ``G.effective_order(max_degree)`` nodes.
    """
    if isinstance(G, FiniteGroup):
        return _sorted_mean([complex(f(g)) for g in G])
    if isinstance(G, TorusGroup):
        return _sorted_mean([complex(f(g)) for g in G.nodes(max_degree)])
    raise TypeError(f"unsupported group type {type(G).__name__}")


def orbit(G: FiniteGroup, z, tol: float = ELEMENT_MATCH_TOL) -> list[np.ndarray]:
    """Deduplicated orbit {g(z) : g in G}, coalescing points within tol."""
    z = np.asarray(z)
    reps: list[np.ndarray] = []
    for g in G:
        pt = g.apply(z)
        if not any(np.max(np.abs(pt - r)) <= tol for r in reps):
            reps.append(pt)
    return reps


@dataclass
class ProjectionResult:
    """Outcome of projecting a group to its leading n coordinates."""

    elements: list[GroupElement]
    is_group: bool
    witness: dict | None
    group: FiniteGroup | None


def _project_element(g: GroupElement, n: int) -> GroupElement:
    if isinstance(g, PhasedPermutation):
        if all(p < n for p in g.perm[:n]):
            return PhasedPermutation(g.perm[:n], g.turns[:n])
        mat = np.zeros((n, n), dtype=np.complex128)
        ph = np.asarray(g.phases(), dtype=np.complex128)
        for i in range(n):
            if g.perm[i] < n:
                mat[i, g.perm[i]] = ph[i]
        return DenseElement(mat)
    return DenseElement(np.asarray(g.as_matrix())[:n, :n])


def project_group(G: FiniteGroup, n: int) -> ProjectionResult:
    """Compute the truncated family {leading n x n block of g : g in G}.

    The family need not be a group; when it is not, the result carries a
    witness (a non-invertible projected element, or a product that escapes
    the set).
    """
    if not 1 <= n <= G.dim:
        raise ValueError(f"projection dimension {n} out of range 1..{G.dim}")
    projected: dict[tuple, GroupElement] = {}
    for g in G:
        pg = _project_element(g, n)
        projected.setdefault(pg.key(), pg)
    els = sorted(projected.values(), key=lambda e: e.sort_key())
    for el in els:
        mat = np.asarray(el.as_matrix())
        if abs(np.linalg.det(mat)) < 1e-9:
            zero_cols = [j for j in range(n) if np.max(np.abs(mat[:, j])) < 1e-12]
            return ProjectionResult(els, False,
                                    {"kind": "non_invertible",
                                     "element": el.key(),
                                     "zero_columns": zero_cols}, None)
    keys = set(projected)
    for a in els:
        for b in els:
            c = a.compose(b)
            if c.key() not in keys:
                return ProjectionResult(els, False,
                                        {"kind": "not_closed",
                                         "left": a.key(), "right": b.key(),
                                         "product": c.key()}, None)
    return ProjectionResult(els, True, None, FiniteGroup(els, check=False))


# ---------------------------------------------------------------------------
# numeric verification


@dataclass
class InvarianceReport:
    max_deviation: float
    witness_point: np.ndarray | None
    witness_element: tuple | None


def _sample_points(rng: np.random.Generator, count: int, dim: int, field: str) -> np.ndarray:
    pts = rng.standard_normal((count, dim))
    if field == "C":
        pts = (pts + 1j * rng.standard_normal((count, dim))) / np.sqrt(2.0)
    return pts


def verify_invariance(G, P: Polynomial, samples: int = 32, seed: int = 0) -> InvarianceReport:
    """Max over sampled points and group elements of |P(g z) - P(z)|."""
    if G.dim != P.dim:
        raise ValueError(f"group dim {G.dim} != polynomial dim {P.dim}")
    rng = np.random.default_rng([seed, 7001])
    pts = _sample_points(rng, samples, P.dim, P.field)
    if isinstance(G, FiniteGroup):
        els = list(G)
    else:
        els = [G.random_element(rng) for _ in range(max(8, samples // 2))]
    worst = 0.0
    w_pt = None
    w_el = None
    base = P.eval_many(pts)
    for g in els:
        moved = P.eval_many(np.stack([g.apply(p) for p in pts]))
        dev = np.abs(moved - base)
        i = int(np.argmax(dev))
        if dev[i] > worst:
            worst = float(dev[i])
            w_pt = pts[i]
            w_el = g.key()
    return InvarianceReport(worst, w_pt, w_el)


@dataclass
class SetInvarianceReport:
    invariant: bool
    max_displacement: float
    witness_point: np.ndarray | None
    witness_element: tuple | None


def verify_set_invariance(G: FiniteGroup, points, tol: float = 1e-8) -> SetInvarianceReport:
    """Check that every g maps every point of the cloud back into the cloud.

    Displacement is the distance from g(k) to its nearest neighbor in K;
    the set is invariant when the worst displacement stays within tol.
    """
    pts = np.asarray(points)
    if pts.ndim != 2:
        raise ValueError("point cloud must be a (k, n) array")
    if pts.shape[0] == 0:
        raise ValueError("point cloud is empty")
    worst = 0.0
    w_pt = None
    w_el = None
    for g in G:
        moved = np.stack([g.apply(p) for p in pts])
        # distance of each moved point to the nearest original point
        d = np.sqrt(np.abs(moved[:, None, :] - pts[None, :, :]) ** 2 @ np.ones(pts.shape[1]))
        nearest = d.min(axis=1)
        i = int(np.argmax(nearest))
        if nearest[i] > worst:
            worst = float(nearest[i])
            w_pt = pts[i]
            w_el = g.key()
    return SetInvarianceReport(worst <= tol, worst, w_pt, w_el)


# ---------------------------------------------------------------------------
# GroupSpec: JSON-friendly named constructors


def build_group(spec: dict) -> FiniteGroup | TorusGroup:
    """Realize a group from its JSON description.

    Kinds: symN, r_trunc, rf_gen, block_perm, signed_perm, signed_index,
    dyadic, circle, trivial, custom.
    """
    kind = spec.get("kind")
    if kind == "symN":
        return sym_group(int(spec["n"]))
    if kind == "r_trunc":
        return r_truncation(int(spec["n"]))
    if kind == "rf_gen":
        return rf_generated(int(spec["n"]), cap=int(spec.get("cap", 100000)))
    if kind == "block_perm":
        return block_permutation_group([int(b) for b in spec["blocks"]])
    if kind == "signed_perm":
        return signed_permutation_group(int(spec["n"]))
    if kind == "signed_index":
        return signed_index_group(int(spec["n"]))
    if kind == "dyadic":
        return dyadic_permutation_group(int(spec["level"]))
    if kind == "circle":
        return TorusGroup(dim=int(spec.get("dim", 1)),
                          acting=tuple(spec.get("acting", (0,))),
                          order=spec.get("order"))
    if kind == "trivial":
        return trivial_group(int(spec["n"]))
    if kind == "custom":
        gens = [element_from_dict(e) for e in spec["generators"]]
        return generate_group(gens, cap=int(spec.get("cap", 100000)))
    raise ValueError(f"unknown group kind {kind!r}")


def element_from_dict(data: dict) -> GroupElement:
    if "matrix" in data:
        raw = data["matrix"]
        mat = np.array([[complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                         for v in row] for row in raw])
        return DenseElement(mat)
    perm = data["perm"]
    turns = [Fraction(int(t[0]), int(t[1])) for t in data.get("turns", [])] or None
    return PhasedPermutation(perm, turns)


def element_to_dict(el: GroupElement) -> dict:
    if isinstance(el, PhasedPermutation):
        return {"perm": list(el.perm),
                "turns": [[t.numerator, t.denominator] for t in el.turns]}
    m = el.as_matrix()
    return {"matrix": [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]}
