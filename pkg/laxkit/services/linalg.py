"""Exact linear algebra over Q(i) on top of sympy's sparse DomainMatrix.

Vectors are sparse dicts ``{column: value}``; zero entries are never stored.
"""
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from .exactmath import K, ONE, ZERO, Scalar

Vector = Dict[int, Scalar]


def _sparse(rows: Sequence[Mapping[int, Scalar]]) -> Dict[int, Dict[int, Scalar]]:
    return {i: {j: v for j, v in row.items() if v} for i, row in enumerate(rows) if any(row.values())}


def rref(rows: Sequence[Mapping[int, Scalar]], ncols: int) -> Tuple[List[Vector], Tuple[int, ...]]:
    """Reduced row echelon form of the given rows (Gauss-Jordan over Q(i))."""
    dod = _sparse(rows)
    if not dod or ncols == 0:
        return [], ()
    keys = sorted(dod)
    compact = {new: dod[old] for new, old in enumerate(keys)}
    matrix = DomainMatrix.from_dod(compact, (len(keys), ncols), K)
    reduced, pivots = matrix.rref(method="GJ")
    out = reduced.to_dod()
    return [dict(out.get(i, {})) for i in range(len(pivots))], tuple(pivots)


def kernel(rows: Sequence[Mapping[int, Scalar]], ncols: int) -> List[Vector]:
    """Basis of {x : row . x = 0 for all rows}; one vector per free column, that column set to 1."""
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis: List[Vector] = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec: Vector = {free: ONE}
        for row, pivot in zip(reduced, pivots):
            c = row.get(free)
            if c:
                vec[pivot] = -c
        basis.append(vec)
    return basis


def solve_many(rows: Sequence[Mapping[int, Scalar]], rhs: Sequence[Sequence[Scalar]],
               ncols: int) -> List[Optional[Vector]]:
    """Particular solutions (free variables zero) of A x = b for each right-hand side b.

    ``rhs[j][i]`` is the value required of row i for system j; None marks an inconsistent system.
    """
    if not rhs:
        return []
    augmented = []
    for i, row in enumerate(rows):
        full = dict(row)
        for j, b in enumerate(rhs):
            if b[i]:
                full[ncols + j] = b[i]
        augmented.append(full)
    reduced, pivots = rref(augmented, ncols + len(rhs))
    results: List[Optional[Vector]] = []
    for j in range(len(rhs)):
        col = ncols + j
        solution: Optional[Vector] = {}
        for row, pivot in zip(reduced, pivots):
            value = row.get(col, ZERO)
            if pivot >= ncols:
                if value:
                    solution = None
                    break
                continue
            if value:
                solution[pivot] = value
        results.append(solution)
    return results


def solve(rows: Sequence[Mapping[int, Scalar]], rhs: Sequence[Scalar], ncols: int) -> Optional[Vector]:
    return solve_many(rows, [rhs], ncols)[0]


def rank(vectors: Sequence[Mapping[int, Scalar]], ncols: int) -> int:
    return len(rref(vectors, ncols)[1])


def dot(row: Mapping[int, Scalar], vec: Mapping[int, Scalar]) -> Scalar:
    acc = ZERO
    small, large = (row, vec) if len(row) <= len(vec) else (vec, row)
    for j, v in small.items():
        w = large.get(j)
        if w:
            acc = acc + v * w
    return acc


def combine(vectors: Sequence[Mapping[int, Scalar]], coefficients: Mapping[int, Scalar]) -> Vector:
    """Sum of coefficients[i] * vectors[i]."""
    out: Vector = {}
    for i, c in coefficients.items():
        if not c:
            continue
        for j, v in vectors[i].items():
            out[j] = out.get(j, ZERO) + c * v
    return {j: v for j, v in out.items() if v}


def compose_rows(rows: Sequence[Mapping[int, Scalar]], basis: Sequence[Mapping[int, Scalar]]) -> List[Vector]:
    """Rows of A.B where B has the given basis vectors as columns."""
    out = []
    for row in rows:
        image = {k: dot(row, vec) for k, vec in enumerate(basis)}
        out.append({k: v for k, v in image.items() if v})
    return out


# ---------------------------------------------------------------------------
# small dense matrices (the finite-dimensional algebra)


def matrix(rows: Sequence[Sequence[Scalar]]) -> DomainMatrix:
    n = len(rows)
    m = len(rows[0]) if rows else 0
    return DomainMatrix([[K.convert(x) for x in r] for r in rows], (n, m), K)


def zeros(n: int, m: Optional[int] = None) -> DomainMatrix:
    m = n if m is None else m
    return DomainMatrix([[ZERO] * m for _ in range(n)], (n, m), K)


def identity(n: int) -> DomainMatrix:
    return DomainMatrix.eye(n, K).to_dense()


def unit(n: int, i: int, j: int) -> DomainMatrix:
    rows = [[ZERO] * n for _ in range(n)]
    rows[i][j] = ONE
    return DomainMatrix(rows, (n, n), K)


def entries(m: DomainMatrix) -> List[List[Scalar]]:
    return m.to_dense().to_list()


def flatten(m: DomainMatrix) -> List[Scalar]:
    """Row-major entry list."""
    return [x for row in entries(m) for x in row]


def from_flat(values: Sequence[Scalar], n: int) -> DomainMatrix:
    return DomainMatrix([list(values[i * n:(i + 1) * n]) for i in range(n)], (n, n), K)


def commutator(a: DomainMatrix, b: DomainMatrix) -> DomainMatrix:
    return a * b - b * a


def trace(m: DomainMatrix) -> Scalar:
    acc = ZERO
    rows = entries(m)
    for i in range(len(rows)):
        acc = acc + rows[i][i]
    return acc


def is_zero(m: DomainMatrix) -> bool:
    return m.is_zero_matrix
