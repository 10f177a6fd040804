"""The finite-dimensional matrix algebras g and their ordered bases.

gl(n) uses the matrix units E_ij in row-major order, s(n) the identity. For sl, so and sp
the basis is a Chevalley basis: Cartan elements H^1..H^l, then positive root vectors by
height, then the negative ones in the same order. so(n) is realised with X^t = -X and is
obtained from the split form (anti-diagonal J) through U with U^t U = J; sp(2n) uses
X^t sigma + sigma X = 0, reached from the standard block form by a symplectic basis change.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, List, Literal, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from ..core.errors import ChevalleyError, FamilyError
from . import linalg
from .exactmath import IMAG_UNIT, K, ONE, ZERO, Scalar, format_scalar
from .linalg import Vector

logger = logging.getLogger(__name__)

Family = Literal["gl", "sl", "s", "so", "sp"]
FAMILIES: Tuple[str, ...] = ("gl", "sl", "s", "so", "sp")

Root = Tuple[int, ...]


@dataclass(frozen=True)
class AlgebraSpec:
    """``n`` is the matrix size except for sp, where matrices are 2n x 2n."""

    family: Family
    n: int
    sigma: Optional[Tuple[Tuple[Scalar, ...], ...]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FamilyError(f"unknown family {self.family!r}")
        minimum = {"gl": 1, "s": 1, "sl": 2, "so": 3, "sp": 1}[self.family]
        if self.n < minimum:
            raise FamilyError(f"{self.family}({self.n}) is not supported; need n >= {minimum}")
        if self.family != "sp" and self.sigma is not None:
            raise FamilyError("sigma is only meaningful for sp")
        if self.family == "sp":
            sigma = self.sigma_matrix()
            if sigma.transpose() != -sigma:
                raise FamilyError("sigma must be skew-symmetric")
            if sigma.rank() != self.size:
                raise FamilyError("sigma must be invertible")

    @property
    def size(self) -> int:
        return 2 * self.n if self.family == "sp" else self.n

    def sigma_matrix(self) -> DomainMatrix:
        if self.family != "sp":
            raise FamilyError("sigma is only defined for sp")
        if self.sigma is not None:
            return linalg.matrix(self.sigma)
        return standard_sigma(self.n)

    @property
    def eps(self) -> int:
        """Allowed pole order at a Tyurin point."""
        return 2 if self.family == "sp" else 1

    @property
    def is_simple(self) -> bool:
        return self.family in ("sl", "so", "sp") and not (self.family == "so" and self.n == 4)

    @property
    def is_semisimple(self) -> bool:
        return self.family in ("sl", "so", "sp")

    @property
    def name(self) -> str:
        return f"{self.family}({self.size})"


def standard_sigma(n: int) -> DomainMatrix:
    rows = [[ZERO] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        rows[i][n + i] = ONE
        rows[n + i][i] = -ONE
    return linalg.matrix(rows)


# ---------------------------------------------------------------------------
# defining constraints


def _flat(i: int, j: int, n: int) -> int:
    return i * n + j


def membership_constraints(family: str, size: int, sigma: Optional[DomainMatrix] = None) -> List[Vector]:
    """Linear functionals on row-major entries cutting the family out of gl(size)."""
    n = size
    rows: List[Vector] = []
    if family == "sl":
        rows.append({_flat(i, i, n): ONE for i in range(n)})
    elif family == "s":
        for i in range(n):
            for j in range(n):
                if i != j:
                    rows.append({_flat(i, j, n): ONE})
        for i in range(1, n):
            rows.append({_flat(i, i, n): ONE, _flat(0, 0, n): -ONE})
    elif family == "so":
        for i in range(n):
            for j in range(i, n):
                rows.append({_flat(i, i, n): ONE} if i == j else {_flat(i, j, n): ONE, _flat(j, i, n): ONE})
    elif family in ("sp", "so_split"):
        s = linalg.entries(sigma)
        # (X^t s + s X)_ij = sum_k X_ki s_kj + s_ik X_kj
        for i in range(n):
            for j in range(n):
                row: Vector = {}
                for k in range(n):
                    if s[k][j]:
                        row[_flat(k, i, n)] = row.get(_flat(k, i, n), ZERO) + s[k][j]
                    if s[i][k]:
                        row[_flat(k, j, n)] = row.get(_flat(k, j, n), ZERO) + s[i][k]
                row = {c: v for c, v in row.items() if v}
                if row:
                    rows.append(row)
    return rows


def antidiagonal(n: int) -> DomainMatrix:
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        rows[i][n - 1 - i] = ONE
    return linalg.matrix(rows)


def isotropic_frame(n: int) -> DomainMatrix:
    """U with U^t U = J (anti-diagonal); columns pair e_{2k} +- i e_{2k+1}."""
    rows = [[ZERO] * n for _ in range(n)]
    half = K(1, 0) / K(2, 0)
    for k in range(n // 2):
        rows[2 * k][k] = ONE
        rows[2 * k + 1][k] = IMAG_UNIT
        rows[2 * k][n - 1 - k] = half
        rows[2 * k + 1][n - 1 - k] = -IMAG_UNIT * half
    if n % 2:
        rows[n - 1][n // 2] = ONE
    return linalg.matrix(rows)


def symplectic_frame(sigma: DomainMatrix) -> DomainMatrix:
    """B with B^t sigma B = standard block form (symplectic Gram-Schmidt)."""
    size = sigma.shape[0]
    n = size // 2

    def form(x: List[Scalar], y: List[Scalar]) -> Scalar:
        acc = ZERO
        s = linalg.entries(sigma)
        for i in range(size):
            if not x[i]:
                continue
            for j in range(size):
                if s[i][j] and y[j]:
                    acc = acc + x[i] * s[i][j] * y[j]
        return acc

    remaining = [[ONE if i == j else ZERO for i in range(size)] for j in range(size)]
    es: List[List[Scalar]] = []
    fs: List[List[Scalar]] = []
    while remaining:
        e = remaining.pop(0)
        partner = next((k for k, v in enumerate(remaining) if form(e, v)), None)
        if partner is None:
            raise FamilyError("sigma is degenerate")
        f = remaining.pop(partner)
        scale = ONE / form(e, f)
        f = [x * scale for x in f]
        es.append(e)
        fs.append(f)
        projected = []
        for v in remaining:
            a, b = form(e, v), form(f, v)
            projected.append([v[i] - a * f[i] + b * e[i] for i in range(size)])
        remaining = [v for v in projected if any(v)]
    columns = es + fs
    if len(columns) != 2 * n:
        raise FamilyError("sigma is degenerate")
    return linalg.matrix([[columns[c][r] for c in range(size)] for r in range(size)])


# ---------------------------------------------------------------------------
# Chevalley construction in split form


@dataclass
class ChevalleyBasis:
    """Chevalley data: Cartan elements H^i, root vectors E^alpha and their pairing.

    Roots are recorded by their coordinates in the simple roots (negative roots negated).
    """

    spec: AlgebraSpec
    rank: int
    simple_roots: Tuple[Root, ...]
    positive_roots: Tuple[Root, ...]
    root_vectors: Dict[Root, DomainMatrix]
    cartan: Tuple[DomainMatrix, ...]
    coroots: Dict[Root, DomainMatrix]
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    weights: Dict[Root, Root] = field(default_factory=dict)

    @property
    def roots(self) -> Tuple[Root, ...]:
        return self.positive_roots + tuple(negate(r) for r in self.positive_roots)

    def is_root(self, r: Root) -> bool:
        return r in self.root_vectors

    def height(self, r: Root) -> int:
        return sum(r)

    def pairing(self, beta: Root, alpha: Root) -> int:
        """<beta, alpha^vee> = beta(H^alpha), read off the matrices."""
        h = self.coroots[alpha] if alpha in self.coroots else self.coroots[negate(alpha)]
        e = self.root_vectors[beta]
        return _eigenvalue(h, e)

    def elements(self) -> List[DomainMatrix]:
        ordered = list(self.cartan)
        ordered += [self.root_vectors[r] for r in self.positive_roots]
        ordered += [self.root_vectors[negate(r)] for r in self.positive_roots]
        return ordered

    def labels(self) -> List[str]:
        def root_label(r: Root) -> str:
            return "E[" + ",".join(str(c) for c in r) + "]"

        out = [f"H{i + 1}" for i in range(self.rank)]
        out += [root_label(r) for r in self.positive_roots]
        out += [root_label(negate(r)) for r in self.positive_roots]
        return out


def negate(r: Root) -> Root:
    return tuple(-c for c in r)


def _add(a: Root, b: Root) -> Root:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Root, b: Root) -> Root:
    return tuple(x - y for x, y in zip(a, b))


def _scaled(a: Root, k: int) -> Root:
    return tuple(k * x for x in a)


def _eigenvalue(h: DomainMatrix, e: DomainMatrix) -> int:
    """lambda with [h, e] = lambda e."""
    flat_e = linalg.flatten(e)
    flat_c = linalg.flatten(linalg.commutator(h, e))
    pos = next(i for i, x in enumerate(flat_e) if x)
    ratio = flat_c[pos] / flat_e[pos]
    if ratio.y or ratio.x.denominator != 1:
        raise ChevalleyError("root value is not an integer")
    return int(ratio.x.numerator)


def _split_data(spec: AlgebraSpec) -> Tuple[int, List[Vector], List[Root]]:
    """Split realisation: (size, constraints, diagonal weight of each basis index)."""
    size = spec.size
    if spec.family == "sl":
        weights = [tuple(1 if k == i else 0 for k in range(size)) for i in range(size)]
        return size, membership_constraints("sl", size), weights
    if spec.family == "sp":
        n = spec.n
        weights = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
        weights += [tuple(-1 if k == i else 0 for k in range(n)) for i in range(n)]
        return size, membership_constraints("sp", size, standard_sigma(n)), weights
    if spec.family == "so":
        rank = size // 2
        weights = []
        for i in range(size):
            if i < rank:
                weights.append(tuple(1 if k == i else 0 for k in range(rank)))
            elif i >= size - rank:
                weights.append(tuple(-1 if k == size - 1 - i else 0 for k in range(rank)))
            else:
                weights.append(tuple(0 for _ in range(rank)))
        return size, membership_constraints("so_split", size, antidiagonal(size)), weights
    raise ChevalleyError(f"no Chevalley basis for family {spec.family}; use the gl split")


def _is_positive(w: Root) -> bool:
    for c in w:
        if c:
            return c > 0
    return False


def build_chevalley(spec: AlgebraSpec) -> ChevalleyBasis:
    """Constructs the Chevalley basis in split form, then moves it to the working realisation."""
    size, constraints, diag = _split_data(spec)

    groups: Dict[Root, List[Tuple[int, int]]] = {}
    for i in range(size):
        for j in range(size):
            if i == j:
                continue
            w = _sub(diag[i], diag[j])
            if any(w):
                groups.setdefault(w, []).append((i, j))

    root_spaces: Dict[Root, DomainMatrix] = {}
    for w, units in sorted(groups.items()):
        cols = {_flat(i, j, size): k for k, (i, j) in enumerate(units)}
        rows = [{cols[c]: v for c, v in row.items() if c in cols} for row in constraints]
        space = linalg.kernel(rows, len(units))
        if not space:
            continue
        if len(space) > 1:
            raise ChevalleyError(f"weight {w} has a root space of dimension {len(space)}")
        vec = space[0]
        first = min(vec)
        scale = ONE / vec[first]
        m = [[ZERO] * size for _ in range(size)]
        for k, v in vec.items():
            i, j = units[k]
            m[i][j] = v * scale
        root_spaces[w] = linalg.matrix(m)

    weight_roots = set(root_spaces)
    positive = [w for w in weight_roots if _is_positive(w)]
    simple = [w for w in positive
              if not any(_sub(w, a) in weight_roots and _is_positive(_sub(w, a)) for a in positive)]
    simple.sort(reverse=True)
    rank = len(simple)

    # simple-root coordinates by breadth-first search over heights
    coords: Dict[Root, Root] = {s: tuple(1 if k == i else 0 for k in range(rank)) for i, s in enumerate(simple)}
    frontier = list(simple)
    while frontier:
        nxt = []
        for w in frontier:
            for i, s in enumerate(simple):
                u = _add(w, s)
                if u in weight_roots and u not in coords:
                    coords[u] = _add(coords[w], coords[s])
                    nxt.append(u)
        frontier = nxt
    if len(coords) != len(positive):
        raise ChevalleyError("positive roots are not generated by the simple roots")
    weight_of = {c: w for w, c in coords.items()}
    pos_roots = sorted(coords.values(), key=lambda r: (sum(r), negate(r)))

    vectors: Dict[Root, DomainMatrix] = {}
    coroots: Dict[Root, DomainMatrix] = {}
    for i, s in enumerate(simple):
        r = coords[s]
        e = root_spaces[s]
        f = root_spaces[negate(s)]
        h = linalg.commutator(e, f)
        value = _eigenvalue(h, e)
        if value == 0:
            raise ChevalleyError(f"degenerate simple root {s}")
        f = f * (K(2, 0) / K(value, 0))
        vectors[r] = e
        vectors[negate(r)] = f
        coroots[r] = linalg.commutator(e, f)

    def in_roots(c: Root) -> bool:
        if all(x >= 0 for x in c):
            return c in weight_of
        return negate(c) in weight_of

    for beta in pos_roots:
        if sum(beta) == 1:
            continue
        for i in range(rank):
            unit_i = tuple(1 if k == i else 0 for k in range(rank))
            alpha = _sub(beta, unit_i)
            if alpha in weight_of:
                break
        else:
            raise ChevalleyError(f"root {beta} is not reachable from a simple root")
        p = 0
        while in_roots(_sub(alpha, _scaled(unit_i, p + 1))):
            p += 1
        factor = ONE / K(p + 1, 0)
        vectors[beta] = linalg.commutator(vectors[unit_i], vectors[alpha]) * factor
        vectors[negate(beta)] = linalg.commutator(vectors[negate(unit_i)], vectors[negate(alpha)]) * (-factor)
        coroots[beta] = linalg.commutator(vectors[beta], vectors[negate(beta)])

    cartan = [coroots[tuple(1 if k == i else 0 for k in range(rank))] for i in range(rank)]

    # move to the working realisation
    if spec.family == "so":
        u = isotropic_frame(size)
        u_inv = antidiagonal(size) * u.transpose()
        move = lambda x: u * x * u_inv  # noqa: E731
    elif spec.family == "sp":
        b = symplectic_frame(spec.sigma_matrix())
        b_inv = b.inv()
        move = lambda x: b * x * b_inv  # noqa: E731
    else:
        move = lambda x: x  # noqa: E731
    vectors = {r: move(m) for r, m in vectors.items()}
    coroots = {r: move(m) for r, m in coroots.items()}
    cartan = [move(m) for m in cartan]

    simple_coords = tuple(coords[s] for s in simple)
    basis = ChevalleyBasis(
        spec=spec,
        rank=rank,
        simple_roots=simple_coords,
        positive_roots=tuple(pos_roots),
        root_vectors=vectors,
        cartan=tuple(cartan),
        coroots=coroots,
        cartan_matrix=(),
        weights={c: w for c, w in weight_of.items()},
    )
    basis.cartan_matrix = tuple(
        tuple(basis.pairing(simple_coords[j], simple_coords[i]) for j in range(rank)) for i in range(rank)
    )
    logger.debug("Chevalley basis for %s: rank %d, %d positive roots", spec.name, rank, len(pos_roots))
    return basis


# ---------------------------------------------------------------------------
# the algebra with coordinates


class FiniteAlgebra:
    """g inside gl(size) with an ordered basis, coordinates and structure constants."""

    def __init__(self, spec: AlgebraSpec, basis: Sequence[DomainMatrix], labels: Sequence[str],
                 chevalley: Optional[ChevalleyBasis] = None):
        self.spec = spec
        self.size = spec.size
        self.basis: Tuple[DomainMatrix, ...] = tuple(basis)
        self.labels: Tuple[str, ...] = tuple(labels)
        self.chevalley = chevalley
        self.dim = len(self.basis)
        flat = [dict((k, v) for k, v in enumerate(linalg.flatten(b)) if v) for b in self.basis]
        self._flat_basis = flat
        reduced, pivots = linalg.rref(flat, self.size ** 2)
        if len(pivots) != self.dim:
            raise FamilyError(f"basis of {spec.name} is linearly dependent")
        self.pivots: Tuple[int, ...] = pivots
        square = DomainMatrix([[flat[u].get(p, ZERO) for u in range(self.dim)] for p in pivots],
                              (self.dim, self.dim), K)
        self._left_inverse = linalg.entries(square.inv())

    # coordinates

    def coordinates(self, flat_entries: Sequence) -> List:
        """Coordinates of a row-major entry list (scalars or rational functions)."""
        out = []
        for row in self._left_inverse:
            acc = None
            for c, p in zip(row, self.pivots):
                if not c:
                    continue
                term = flat_entries[p] * c
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else flat_entries[0] * ZERO)
        return out

    def matrix_coordinates(self, m: DomainMatrix) -> List[Scalar]:
        return self.coordinates(linalg.flatten(m))

    def contains(self, m: DomainMatrix) -> bool:
        coords = self.matrix_coordinates(m)
        rebuilt = self.combination(coords)
        return linalg.is_zero(rebuilt - m.to_dense())

    def combination(self, coefficients: Sequence[Scalar]) -> DomainMatrix:
        acc = linalg.zeros(self.size)
        for c, b in zip(coefficients, self.basis):
            if c:
                acc = acc + b * c
        return acc

    # invariants

    @cached_property
    def annihilator(self) -> List[Vector]:
        """Independent functionals on row-major entries vanishing exactly on g."""
        return linalg.kernel(self._flat_basis, self.size ** 2)

    @cached_property
    def structure(self) -> Dict[Tuple[int, int], Tuple[Tuple[int, Scalar], ...]]:
        """c^w_{uv}: [X^u, X^v] = sum_w c^w_{uv} X^w, nonzero entries only."""
        table: Dict[Tuple[int, int], Tuple[Tuple[int, Scalar], ...]] = {}
        for u in range(self.dim):
            for v in range(u + 1, self.dim):
                coords = self.matrix_coordinates(linalg.commutator(self.basis[u], self.basis[v]))
                terms = tuple((w, c) for w, c in enumerate(coords) if c)
                if terms:
                    table[(u, v)] = terms
                    table[(v, u)] = tuple((w, -c) for w, c in terms)
        return table

    def bracket_coordinates(self, a: Sequence[Scalar], b: Sequence[Scalar]) -> List[Scalar]:
        out = [ZERO] * self.dim
        for (u, v), terms in self.structure.items():
            if a[u] and b[v]:
                coef = a[u] * b[v]
                for w, c in terms:
                    out[w] = out[w] + coef * c
        return out

    @cached_property
    def trace_gram(self) -> Tuple[Tuple[Scalar, ...], ...]:
        return tuple(tuple(linalg.trace(x * y) for y in self.basis) for x in self.basis)

    @cached_property
    def traces(self) -> Tuple[Scalar, ...]:
        return tuple(linalg.trace(x) for x in self.basis)

    @cached_property
    def killing(self) -> Tuple[Tuple[Scalar, ...], ...]:
        ad = []
        for u in range(self.dim):
            rows = [[ZERO] * self.dim for _ in range(self.dim)]
            for v in range(self.dim):
                for w, c in self.structure.get((u, v), ()):
                    rows[w][v] = c
            ad.append(DomainMatrix(rows, (self.dim, self.dim), K))
        return tuple(tuple(linalg.trace(a * b) for b in ad) for a in ad)

    def describe(self) -> Dict[str, object]:
        return {
            "algebra": self.spec.name,
            "dim": self.dim,
            "labels": list(self.labels),
            "basis": [[[format_scalar(x) for x in row] for row in linalg.entries(b)] for b in self.basis],
        }


@lru_cache(maxsize=None)
def finite_algebra(spec: AlgebraSpec) -> FiniteAlgebra:
    size = spec.size
    if spec.family == "gl":
        basis = [linalg.unit(size, i, j) for i in range(size) for j in range(size)]
        labels = [f"E{i + 1}{j + 1}" if size < 10 else f"E{i + 1},{j + 1}" for i in range(size) for j in range(size)]
        return FiniteAlgebra(spec, basis, labels)
    if spec.family == "s":
        return FiniteAlgebra(spec, [linalg.identity(size)], ["I"])
    chevalley = build_chevalley(spec)
    return FiniteAlgebra(spec, chevalley.elements(), chevalley.labels(), chevalley)


def connection_algebra(spec: AlgebraSpec) -> FiniteAlgebra:
    """Values of the connection form: gl for gl, sl and s; g itself for so and sp."""
    if spec.family in ("gl", "sl", "s"):
        return finite_algebra(AlgebraSpec("gl", spec.size))
    return finite_algebra(spec)


@lru_cache(maxsize=None)
def mixed_structure(spec: AlgebraSpec) -> Dict[Tuple[int, int], Tuple[Tuple[int, Scalar], ...]]:
    """d^w_{av}: [W^a, X^v] in g-coordinates, W^a running over the connection basis."""
    g = finite_algebra(spec)
    w_alg = connection_algebra(spec)
    table = {}
    for a, wa in enumerate(w_alg.basis):
        for v, xv in enumerate(g.basis):
            coords = g.matrix_coordinates(linalg.commutator(wa, xv))
            terms = tuple((w, c) for w, c in enumerate(coords) if c)
            if terms:
                table[(a, v)] = terms
    return table
