"""Group averaging of polynomials: the symmetrization projection and its
m-th power variant, in symbolic and evaluation form.

For finite groups the symbolic route composes term-by-term with each
structured element, so the only averaging error is coefficient rounding.
The torus route averages over quadrature nodes; with the default node count
(4 * degree + 1) every average of a polynomial is quadrature-exact, so the
symmetrized monomials that vanish analytically come out below the
coefficient zero-threshold and are dropped.
"""

from __future__ import annotations

import numpy as np

from .groups import FiniteGroup, TorusGroup, haar_average
from .poly import DEGREE_CAP_DEFAULT, Polynomial


def _average_composed(Q: Polynomial, elements, weight: float) -> Polynomial:
    acc: dict = {}
    for g in elements:
        for exp, c in Q.compose_linear(g)._terms.items():
            acc[exp] = acc.get(exp, 0.0) + c
    return Polynomial(Q.dim, {e: c * weight for e, c in acc.items()}, Q.field)


def symmetrize(Q: Polynomial, G) -> Polynomial:
    """Average of Q over the group: a projection onto invariant polynomials.

    Already-invariant polynomials are fixed points (up to coefficient
    rounding); applying the operator twice equals applying it once.
    """
    if G.dim != Q.dim:
        raise ValueError(f"group dim {G.dim} != polynomial dim {Q.dim}")
    if isinstance(G, FiniteGroup):
        return _average_composed(Q, G.elements, G.weight)
    if isinstance(G, TorusGroup):
        deg = max(Q.degree, 1)
        return _average_composed(Q, G.nodes(deg), G.node_weight(deg))
    raise TypeError(f"unsupported group type {type(G).__name__}")


def m_symmetrization(Q: Polynomial, G, m: int,
                     degree_cap: int = DEGREE_CAP_DEFAULT) -> Polynomial:
    """Average of the m-th power of Q composed with each group element.

    The result is invariant, and m*k-homogeneous whenever Q is
    k-homogeneous.  Raises :class:`~invsep.poly.DegreeCapExceeded` when the
    symbolic power overflows the cap; use :func:`eval_m_symmetrization`
    then.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return symmetrize(Q.pow(m, degree_cap=degree_cap), G)


def eval_m_symmetrization(Q: Polynomial, G, m: int, w) -> complex:
    """Evaluate the m-th symmetrization at a point without expanding it.

    Agrees with ``m_symmetrization(Q, G, m)(w)`` wherever the symbolic
    path runs; stays available past any degree cap.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    w = np.asarray(w)
    if w.shape != (Q.dim,):
        raise ValueError(f"point of shape {w.shape}, expected ({Q.dim},)")
    wc = w.astype(np.complex128)
    return haar_average(lambda g: complex(Q.eval(g.apply(wc))) ** m, G,
                        max_degree=max(Q.degree * m, 1))
