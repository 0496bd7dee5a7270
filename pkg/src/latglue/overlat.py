"""Over-lattices of an even lattice via isotropic subgroups of its discriminant.

Prime-order isotropic subgroups are enumerated with one canonical generator
each (lexicographically least among the nonzero multiples, compared through
dual-fraction representatives), over-lattices are realized as pull-backs with
an HNF-canonical basis, and isomorphism witnesses are found by a pruned
backtracking search over bounded-entry isometries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exact import (
    IntMatrix,
    QMatrix,
    det,
    hnf,
    int_matrix,
    inverse,
    mat_mul,
    mat_vec,
    matrix_dims,
    transpose,
)
from .lattice import IntegralLattice, LatticeMap, induced_discriminant_action
from .torsion import (
    TorsionQuadraticModule,
    canonical_subgroup_generator,
    cyclic_subgroup,
    reduce_mod1,
    tqm_isometric,
)


class NotIsotropicError(ValueError):
    pass


@dataclass(frozen=True)
class IsotropicSubgroup:
    """Cyclic prime-order isotropic subgroup, held by its canonical generator."""

    module: TorsionQuadraticModule
    generator: tuple[int, ...]
    vector: tuple[Fraction, ...] | None
    order: int
    q_value: Fraction

    def __post_init__(self):
        if self.q_value != 0:
            raise NotIsotropicError("subgroup not isotropic")
        if self.module.element_order(self.generator) != self.order:
            raise ValueError("generator order mismatch")

    def elements(self) -> frozenset[tuple[int, ...]]:
        return cyclic_subgroup(self.module, self.generator)


def order_p_subgroups(
    module: TorsionQuadraticModule, p: int
) -> list[tuple[tuple[int, ...], Fraction]]:
    """All order-p subgroups as (canonical generator, q of that generator).

    The canonical generator is the lexicographically least of the p-1 nonzero
    multiples; when the module carries dual-fraction representatives the
    comparison happens there, matching how witnesses are quoted downstream.
    """
    per_coord = []
    for d in module.orders:
        if d % p == 0:
            step = d // p
            per_coord.append([m * step for m in range(p)])
        else:
            per_coord.append([0])
    subgroups = []
    seen: set[tuple[int, ...]] = set()
    for x in itertools.product(*per_coord):
        if not any(x) or x in seen:
            continue
        multiples = [module.scale(m, x) for m in range(1, p)]
        seen.update(multiples)
        if module.gens is not None:
            canonical = min(multiples, key=module.dual_vector)
        else:
            canonical = min(multiples)
        subgroups.append((canonical, module.q(canonical)))
    if module.gens is not None:
        subgroups.sort(key=lambda pair: module.dual_vector(pair[0]))
    else:
        subgroups.sort()
    return subgroups


def enumerate_prime_isotropic(
    lattice: IntegralLattice,
    p: int,
    module: TorsionQuadraticModule | None = None,
) -> tuple[list[IsotropicSubgroup], list[tuple[tuple[Fraction, ...], Fraction]]]:
    """Isotropic order-p subgroups of A_L, plus the rejected ones with q != 0.

    Returns ([IsotropicSubgroup], [(canonical dual-fraction generator, q)]).
    """
    if module is None:
        module = lattice.discriminant_group()
    isotropic = []
    rejected = []
    for gen, q_val in order_p_subgroups(module, p):
        vec = module.dual_vector(gen)
        if q_val == 0:
            isotropic.append(
                IsotropicSubgroup(
                    module=module, generator=gen, vector=vec, order=p, q_value=q_val
                )
            )
        else:
            rejected.append((vec, q_val))
    return isotropic, rejected


@dataclass(frozen=True)
class OverLattice:
    """Index-p over-lattice of ``base`` built from an isotropic subgroup.

    ``basis`` rows express the over-lattice basis in base coordinates
    (HNF-canonical); ``lattice`` carries the integral Gram matrix in that
    basis, and ``embedding`` maps the base into the over-lattice.
    """

    base: IntegralLattice
    subgroup: IsotropicSubgroup
    basis: tuple[tuple[Fraction, ...], ...]
    lattice: IntegralLattice
    embedding: LatticeMap

    @property
    def index(self) -> int:
        return self.subgroup.order


def construct_overlattice(
    base: IntegralLattice, subgroup: IsotropicSubgroup
) -> OverLattice:
    """Pull back <generator> along the quotient map: the lattice base + Z*v."""
    if subgroup.module.lattice != base:
        raise ValueError("subgroup does not live on this lattice")
    if subgroup.module.q(subgroup.generator) != 0:
        raise NotIsotropicError("subgroup not isotropic")
    p = subgroup.order
    n = base.rank
    vec = subgroup.vector
    stacked = [[p if i == j else 0 for j in range(n)] for i in range(n)]
    stacked.append(int_matrix([[Fraction(c) * p for c in vec]])[0])
    reduced = hnf(stacked)
    basis = [[Fraction(x, p) for x in row] for row in reduced]
    gram = mat_mul(basis, mat_mul(base.gram_rows(), transpose(basis)))
    try:
        gram_int = int_matrix(gram)
    except ValueError:
        raise NotIsotropicError("subgroup not isotropic")
    if any(gram_int[i][i] % 2 for i in range(n)):
        raise NotIsotropicError("subgroup not isotropic")
    over = IntegralLattice(gram_int)
    assert over.det * p * p == base.det  # discriminant drops by the index squared
    basis_inv = inverse(basis)
    embedding = LatticeMap(int_matrix(transpose(basis_inv)), base, over)
    assert abs(int(det(embedding.matrix))) == p
    return OverLattice(
        base=base,
        subgroup=subgroup,
        basis=tuple(tuple(row) for row in basis),
        lattice=over,
        embedding=embedding,
    )


def recovered_subgroup(over: OverLattice) -> tuple[int, ...]:
    """Re-derive the isotropic subgroup from the embedding (round-trip check)."""
    module = over.subgroup.module
    for row in over.basis:
        vec = tuple(reduce_mod1(Fraction(x)) for x in row)
        if any(vec):
            coords = module.coords_of_dual(vec)
            return canonical_subgroup_generator(module, coords, over.index)
    raise ValueError("over-lattice equals its base")


def same_genus(
    l1: IntegralLattice, l2: IntegralLattice, brute_bound: int = 2000
) -> bool:
    """Genus equality: same signature and isometric discriminant forms."""
    if l1.signature() != l2.signature():
        return False
    return tqm_isometric(
        l1.discriminant_group(), l2.discriminant_group(), brute_bound=brute_bound
    )


# -- bounded congruence / isometry search --------------------------------------


def congruence_search_iter(gram_a, target_b, bound: int):
    """Yield integer X with X^T A X = B, entries in [-bound, bound].

    Columns are assembled left to right; candidate columns run in
    lexicographic order, so results appear in a deterministic order.  A is
    the ambient Gram matrix (n x n), B the target Gram (m x m, m <= n).
    """
    n, _ = matrix_dims(gram_a)
    m, _ = matrix_dims(target_b)
    rows_a = [list(r) for r in gram_a]

    norm_cache: dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]] = {}

    def candidates(norm: int):
        if norm not in norm_cache:
            found = []
            for v in itertools.product(range(-bound, bound + 1), repeat=n):
                av = tuple(sum(r * c for r, c in zip(row, v)) for row in rows_a)
                if sum(a * c for a, c in zip(av, v)) == norm:
                    found.append((v, av))
            norm_cache[norm] = found
        return norm_cache[norm]

    chosen: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def assemble():
        return [[chosen[j][0][i] for j in range(m)] for i in range(n)]

    def search(j: int):
        if j == m:
            yield assemble()
            return
        for v, av in candidates(target_b[j][j]):
            if all(
                sum(a * c for a, c in zip(prev_av, v)) == target_b[i][j]
                for i, (_, prev_av) in enumerate(chosen)
            ):
                chosen.append((v, av))
                yield from search(j + 1)
                chosen.pop()

    yield from search(0)


def congruence_search(gram_a, target_b, bound: int, limit: int | None = None):
    out = []
    for x in congruence_search_iter(gram_a, target_b, bound):
        out.append(x)
        if limit is not None and len(out) >= limit:
            break
    return out


def congruence_witness(gram_a, target_b, bound: int) -> IntMatrix | None:
    for x in congruence_search_iter(gram_a, target_b, bound):
        return x
    return None


def isometry_search(lattice: IntegralLattice, bound: int) -> list[IntMatrix]:
    """All isometries of the lattice with entries in [-bound, bound]."""
    return congruence_search(lattice.gram_rows(), lattice.gram_rows(), bound)


def overlattice_isomorphic_witness(
    lattice: IntegralLattice,
    h1: IsotropicSubgroup,
    h2: IsotropicSubgroup,
    search_bound: int,
) -> LatticeMap | None:
    """Bounded search for g in O(L) whose discriminant action maps h1 onto h2.

    Absence of a witness within the bound proves nothing; a returned witness
    is independently re-verified.
    """
    if h1.module is not h2.module:
        raise ValueError("subgroups must live on the same discriminant group")
    module = h1.module
    target = cyclic_subgroup(module, h2.generator)
    for g in congruence_search_iter(lattice.gram_rows(), lattice.gram_rows(), search_bound):
        action = induced_discriminant_action(lattice, g, module)
        if cyclic_subgroup(module, action.apply(h1.generator)) == target:
            assert lattice.is_isometry(g)
            return LatticeMap(g, lattice, lattice)
    return None
