"""Exact characteristic polynomials and cospectrality of graphs.

Eigenvalue multisets are compared through characteristic polynomials with integer
coefficients, so no floating point tolerance is involved.
"""

import logging

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from fvm.game_comonads import check_graph
from fvm.structures import search_isomorphism

log = logging.getLogger(__name__)


def adjacency_matrix(G):
    """Adjacency matrix of a loopless undirected graph, rows in universe order."""
    check_graph(G)
    index = {x: i for i, x in enumerate(G.universe)}
    M = np.zeros((len(G), len(G)), dtype=object)
    for x, y in G.relations["E"]:
        M[index[x], index[y]] = 1
    return M


def char_poly(M):
    """Coefficients of ``det(xI - M)``, leading coefficient first.

    Faddeev-LeVerrier recurrence over Python integers; the divisions by ``k`` are exact.
    """
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"Expected a square matrix, got shape {M.shape}")
    identity = np.identity(n, dtype=int).astype(object)
    coefficients = [1]
    N = np.zeros((n, n), dtype=object)
    for k in range(1, n + 1):
        N = M.dot(N) + coefficients[-1] * identity
        trace = int(np.trace(M.dot(N)))
        if trace % k:
            raise ArithmeticError(f"Non-integral coefficient at step {k}, the matrix is not integral")
        coefficients.append(-trace // k)
    return coefficients


def char_poly_reference(M):
    """The same coefficients computed by sympy, for cross-checking."""
    rows = [[ZZ(int(x)) for x in row] for row in np.asarray(M, dtype=object)]
    n = len(rows)
    if n == 0:
        return [1]
    return [int(c) for c in DomainMatrix(rows, (n, n), ZZ).charpoly()]


def graph_char_poly(G):
    return char_poly(adjacency_matrix(G))


def cospectral(G, H):
    """Whether the adjacency matrices of G and H have the same eigenvalues with multiplicity."""
    return graph_char_poly(G) == graph_char_poly(H)


def format_poly(coefficients):
    """``[1, 0, -1]`` as ``x^2 - 1``."""
    n = len(coefficients) - 1
    terms = []
    for i, c in enumerate(coefficients):
        if c == 0:
            continue
        power = n - i
        magnitude = abs(c)
        if power == 0:
            body = str(magnitude)
        else:
            body = ("" if magnitude == 1 else str(magnitude)) + ("x" if power == 1 else f"x^{power}")
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


def spectra_report(G, H):
    """Lines comparing the spectra of two graphs; isomorphism is reported alongside."""
    p, q = graph_char_poly(G), graph_char_poly(H)
    iso = search_isomorphism(G, H)
    return [
        f"CHARPOLY G {format_poly(p)}",
        f"CHARPOLY H {format_poly(q)}",
        f"COSPECTRAL {'yes' if p == q else 'no'}",
        f"ISOMORPHIC {'yes' if iso is not None else 'no'}",
    ]
