"""Even integral lattices presented by a symmetric integer Gram matrix.

The basis is implicit: vectors are integer (or rational, for dual elements)
coordinate tuples, and the pairing of x and y is x^T G y.  Discriminant
groups are returned as torsion quadratic modules carrying dual-fraction
representatives of their generators, so elements can be moved between
abstract coordinates and vectors in the ambient rational span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .exact import (
    QMatrix,
    congruence_diagonalize,
    det,
    fraction_matrix,
    int_matrix,
    inverse,
    is_symmetric,
    mat_mul,
    mat_vec,
    matrix_dims,
    snf,
    transpose,
)
from .torsion import (
    TorsionQuadraticModule,
    TqmAutomorphism,
    reduce_mod1,
    reduce_mod2,
)


class OddLatticeError(ValueError):
    pass


class IntegralLattice:
    """Nondegenerate integral lattice; degenerate Gram input is rejected."""

    __slots__ = ("gram", "rank", "det")

    def __init__(self, gram):
        rows, cols = matrix_dims(gram)
        if rows != cols:
            raise ValueError("gram matrix must be square")
        g = []
        for row in gram:
            if any(Fraction(x).denominator != 1 for x in row):
                raise ValueError("gram matrix must be integral")
            g.append([int(x) for x in row])
        if not is_symmetric(g):
            raise ValueError("gram matrix must be symmetric")
        d = det(g)
        if d == 0:
            raise ValueError("gram matrix must be nondegenerate")
        self.gram = tuple(tuple(row) for row in g)
        self.rank = rows
        self.det = int(d)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def gram_rows(self) -> list[list[int]]:
        return [list(row) for row in self.gram]

    def inner(self, x, y) -> Fraction:
        gx = mat_vec(self.gram, [Fraction(c) for c in x])
        return sum(a * Fraction(b) for a, b in zip(gx, y))

    def rescale(self, n: int) -> "IntegralLattice":
        if n < 1:
            raise ValueError("rescaling factor must be positive")
        return IntegralLattice([[n * x for x in row] for row in self.gram])

    def dual_gram(self) -> QMatrix:
        return inverse(self.gram)

    def signature(self) -> tuple[int, int]:
        from .exact import signature_of

        pos, neg, zero = signature_of(self.gram)
        assert zero == 0  # nondegenerate by construction
        return pos, neg

    def is_isometry(self, g) -> bool:
        rows, cols = matrix_dims(g)
        if rows != cols or rows != self.rank:
            raise ValueError("matrix rank mismatch")
        gtg = mat_mul(transpose(g), mat_mul(self.gram_rows(), g))
        return all(
            Fraction(gtg[i][j]) == self.gram[i][j]
            for i in range(self.rank)
            for j in range(self.rank)
        )

    # -- discriminant group ----------------------------------------------------

    def discriminant_group(self) -> TorsionQuadraticModule:
        """A_L in invariant-factor form, with dual-fraction generators.

        Generators come from the Smith normal form of the Gram matrix under
        the fixed pivot rule, with representatives reduced into [0,1); their
        orders form the divisibility chain d_1 | d_2 | ...
        """
        dec = self._snf_presentation()
        return self._module_from_presentation(*dec)

    def dual_basis_discriminant_group(self) -> TorsionQuadraticModule:
        """A_L presented on the columns of the inverse Gram matrix.

        The column orders need not form a divisibility chain (for the main
        family they read 6k, 3, 9); raises if the columns fail to present the
        group, i.e. if the product of their orders is not |det|.
        """
        if not self.is_even:
            raise OddLatticeError("lattice not even")
        ginv = self.dual_gram()
        n = self.rank
        cols = [[ginv[r][i] for r in range(n)] for i in range(n)]
        orders = [_column_order(c) for c in cols]
        kept = [i for i in range(n) if orders[i] > 1]
        from math import prod

        if prod(orders[i] for i in kept) != abs(self.det):
            raise ValueError("dual basis columns do not present the group")
        gens = [tuple(reduce_mod1(x) for x in cols[i]) for i in kept]
        coord_map = [list(self.gram[i]) for i in kept]
        return self._assemble_module([orders[i] for i in kept], gens, coord_map)

    def _snf_presentation(self):
        if not self.is_even:
            raise OddLatticeError("lattice not even")
        dec = snf(self.gram_rows())
        n = self.rank
        u_inv = int_matrix(inverse(dec.u))
        cols_mat = mat_mul(self.dual_gram(), fraction_matrix(u_inv))
        orders = [dec.d[i][i] for i in range(n)]
        kept = [i for i in range(n) if orders[i] > 1]
        gens = [
            tuple(reduce_mod1(cols_mat[r][i]) for r in range(n)) for i in kept
        ]
        ug = mat_mul(dec.u, self.gram_rows())
        coord_map = [list(ug[i]) for i in kept]
        return [orders[i] for i in kept], gens, coord_map

    def _module_from_presentation(self, orders, gens, coord_map):
        from math import prod

        assert prod(orders) == abs(self.det)
        return self._assemble_module(orders, gens, coord_map)

    def _assemble_module(self, orders, gens, coord_map) -> TorsionQuadraticModule:
        q_diag = [reduce_mod2(self.inner(g, g)) for g in gens]
        b_mat = [[reduce_mod1(self.inner(g, h)) for h in gens] for g in gens]
        return TorsionQuadraticModule(
            orders, q_diag, b_mat, gens=gens, coord_map=coord_map, lattice=self
        )

    def discriminant_value(self, vec) -> Fraction:
        """q of a dual-lattice vector given in basis coordinates, mod 2Z."""
        if not self.is_even:
            raise OddLatticeError("lattice not even")
        self._check_dual(vec)
        return reduce_mod2(self.inner(vec, vec))

    def discriminant_pairing(self, x, y) -> Fraction:
        self._check_dual(x)
        self._check_dual(y)
        return reduce_mod1(self.inner(x, y))

    def _check_dual(self, vec) -> None:
        for entry in mat_vec(self.gram_rows(), [Fraction(c) for c in vec]):
            if Fraction(entry).denominator != 1:
                raise ValueError("vector is not in the dual lattice")

    def __repr__(self) -> str:
        return "IntegralLattice(%r)" % (self.gram_rows(),)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegralLattice) and self.gram == other.gram

    def __hash__(self) -> int:
        return hash(self.gram)


def _column_order(col) -> int:
    from math import lcm

    return lcm(*(Fraction(x).denominator for x in col))


@dataclass(frozen=True)
class LatticeMap:
    """Integer matrix whose column j gives the image of source basis vector j
    in the basis of the target."""

    matrix: tuple[tuple[int, ...], ...]
    source: IntegralLattice
    target: IntegralLattice

    def __init__(self, matrix, source, target):
        object.__setattr__(
            self, "matrix", tuple(tuple(int(x) for x in row) for row in matrix)
        )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        rows, cols = matrix_dims(self.matrix)
        if rows != target.rank or cols != source.rank:
            raise ValueError("map shape mismatch")

    @property
    def is_isometric_embedding(self) -> bool:
        m = [list(r) for r in self.matrix]
        pulled = mat_mul(transpose(m), mat_mul(self.target.gram_rows(), m))
        return all(
            Fraction(pulled[i][j]) == self.source.gram[i][j]
            for i in range(self.source.rank)
            for j in range(self.source.rank)
        )


def sublattice_index(inner: LatticeMap) -> int:
    """Index of the image of a full-rank isometric embedding.

    Computed as |det| of the base-change matrix and, independently, as the
    square root of the discriminant ratio; the two must agree.
    """
    if not inner.is_isometric_embedding:
        raise ValueError("map is not an isometric embedding")
    by_det = abs(int(det(inner.matrix)))
    ratio = Fraction(inner.source.det, inner.target.det)
    if by_det == 0 or ratio != by_det * by_det:
        raise ValueError(
            "internal consistency error: index %d vs discriminant ratio %s"
            % (by_det, ratio)
        )
    return by_det


def induced_discriminant_action(
    lattice: IntegralLattice, g, module: TorsionQuadraticModule | None = None
) -> TqmAutomorphism:
    """The action of an isometry g on the discriminant group.

    ``module`` may be any presentation of A_L carrying dual-fraction
    generators and a coordinate map (defaults to the invariant-factor one).
    """
    if not lattice.is_isometry(g):
        raise ValueError("matrix is not an isometry of the lattice")
    if module is None:
        module = lattice.discriminant_group()
    cols = []
    for gen in module.gens:
        image = mat_vec(g, list(gen))
        cols.append(module.coords_of_dual([reduce_mod1(Fraction(x)) for x in image]))
    matrix = [[cols[j][i] for j in range(len(cols))] for i in range(module.ngens)]
    return TqmAutomorphism(matrix, module)


# -- lattice file format -------------------------------------------------------


def lattice_from_json_text(text: str) -> IntegralLattice:
    """Parse the shared lattice file format: {"rank": n, "gram": [[...], ...]}."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError("invalid lattice file: %s" % exc) from exc
    if not isinstance(payload, dict):
        raise ValueError("invalid lattice file: expected a single object")
    try:
        rank = payload["rank"]
        gram = payload["gram"]
    except (TypeError, KeyError):
        raise ValueError("invalid lattice file: fields 'rank' and 'gram' required")
    if not isinstance(rank, int):
        raise ValueError("invalid lattice file: rank must be an integer")
    if (
        not isinstance(gram, list)
        or len(gram) != rank
        or any(not isinstance(row, list) or len(row) != rank for row in gram)
    ):
        raise ValueError("invalid lattice file: gram must be rank x rank")
    for row in gram:
        for x in row:
            if not isinstance(x, int) or isinstance(x, bool):
                raise ValueError("invalid lattice file: entries must be integers")
    if any(gram[i][j] != gram[j][i] for i in range(rank) for j in range(rank)):
        raise ValueError("invalid lattice file: gram must be symmetric")
    return IntegralLattice(gram)


def lattice_to_json_text(lattice: IntegralLattice) -> str:
    return json.dumps({"rank": lattice.rank, "gram": lattice.gram_rows()})
