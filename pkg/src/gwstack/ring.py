"""Exact small-quantum-ring arithmetic over a finite target datum.

A target geometry enters this package as a :class:`TargetData`: a graded
basis of (orbifold) cohomology classes, the intersection pairing, the
2- and 3-point genus-zero structure constants at each curve degree, and
one divisor factorization per basis class that is neither the identity
nor a divisor.  Two constructors are built in,

* :func:`build_p1b` -- the weighted projective line P(1,b), whose
  orbifold cohomology has basis 1, a, a^2, ..., a^(b-1), x where a
  generates the twisted sectors and x = a^b is the untwisted divisor
  class (hyperplane of degree 1/b).  The small quantum ring is
  Q[q][a] / (b a^(b+1) - q).
* :func:`build_p2` -- the projective plane with basis 1, h, h^2, whose
  small quantum ring is Q[q][h] / (h^3 - q).

Everything downstream (the quantum product, specializations at a chosen
value of q, the reconstruction engine) is driven by the datum alone.
All coefficients are ``fractions.Fraction``; no floating point number
appears anywhere in this package.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)

Matrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class DivisorStep:
    """A single-term divisor factorization of one basis class.

    Records that <a_partner, a_divisor, *>_shift = coeff * a_target as a
    class-valued 2-point bracket, i.e. pairing the left side against the
    full basis and contracting with the inverse pairing returns exactly
    one term.  The reconstruction engine pivots on these records, so the
    single-term property is checked at construction time.
    """

    partner: int
    divisor: int
    shift: int
    coeff: Fraction


@dataclass(frozen=True, eq=False)
class TargetData:
    """Finite description of one target geometry.

    Instances are immutable by convention (the mapping fields are never
    mutated after construction) and compare by identity, which lets the
    module-level caches key on the object itself.

    ``power_basis`` is set to b for targets whose basis class k is the
    k-th power of a single degree-lowest generator subject to the
    relation b * a^(b+1) = q; it unlocks the exponent-arithmetic fast
    paths and the multiplicity-vector file formats.  ``None`` otherwise.
    """

    id: str
    orbdeg: tuple[Fraction, ...]
    dim: Fraction
    c1_degree: Fraction
    fundamental_index: int
    divisor_indices: tuple[int, ...]
    divisor_degree: Mapping[int, Fraction]
    pairing: Matrix
    base3: Mapping[tuple[int, int, int, int], Fraction]
    base2: Mapping[tuple[int, int, int], Fraction]
    divisor_factorization: Mapping[int, DivisorStep]
    basis_names: tuple[str, ...]
    power_basis: Optional[int] = None

    @property
    def basis_size(self) -> int:
        return len(self.orbdeg)


@dataclass(frozen=True)
class QRingElem:
    """An element of the small quantum ring over Q[q].

    ``coeffs[r]`` is the coefficient of basis class r, stored as a
    polynomial in q with ascending powers and no trailing zeros, so that
    structural equality of tuples is equality in the ring.
    """

    coeffs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "coeffs", tuple(_poly_trim(p) for p in self.coeffs)
        )

    @staticmethod
    def zero(size: int) -> "QRingElem":
        return QRingElem(((),) * size)

    @staticmethod
    def basis(size: int, index: int) -> "QRingElem":
        if not 0 <= index < size:
            raise ValueError(f"basis index {index} out of range for size {size}")
        rows = [()] * size
        rows[index] = (ONE,)
        return QRingElem(tuple(rows))

    def is_zero(self) -> bool:
        return all(not p for p in self.coeffs)

    def __add__(self, other: "QRingElem") -> "QRingElem":
        if len(self.coeffs) != len(other.coeffs):
            raise ValueError("basis-size mismatch")
        return QRingElem(
            tuple(_poly_add(p, q) for p, q in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other: "QRingElem") -> "QRingElem":
        return self + other.scale(-ONE)

    def scale(self, c) -> "QRingElem":
        c = Fraction(c)
        return QRingElem(tuple(_poly_scale(p, c) for p in self.coeffs))

    def at(self, lam) -> tuple[Fraction, ...]:
        """Evaluate q := lam, returning a plain coefficient vector."""
        lam = Fraction(lam)
        return tuple(_poly_eval(p, lam) for p in self.coeffs)


@dataclass(frozen=True)
class SpecializedRing:
    """The quantum ring with q specialized to a fixed rational value.

    ``mult_table[i][j]`` is the coefficient vector of the product of
    basis classes i and j.  At ``lam == 0`` this is the orbifold
    cohomology ring; at nonzero ``lam`` a specialization of the small
    quantum ring.
    """

    lam: Fraction
    mult_table: tuple[tuple[tuple[Fraction, ...], ...], ...]

    @property
    def basis_size(self) -> int:
        return len(self.mult_table)

    def mult(
        self, u: Sequence[Fraction], v: Sequence[Fraction]
    ) -> tuple[Fraction, ...]:
        m = self.basis_size
        if len(u) != m or len(v) != m:
            raise ValueError("basis-size mismatch")
        out = [ZERO] * m
        for i, ui in enumerate(u):
            if not ui:
                continue
            for j, vj in enumerate(v):
                if not vj:
                    continue
                c = ui * vj
                for l, t in enumerate(self.mult_table[i][j]):
                    if t:
                        out[l] += c * t
        return tuple(out)


# -- polynomial helpers (dense, ascending powers of q) ----------------------


def _poly_trim(p: Iterable[Fraction]) -> tuple[Fraction, ...]:
    out = list(p)
    while out and not out[-1]:
        out.pop()
    return tuple(out)


def _poly_add(p, q):
    n = max(len(p), len(q))
    return _poly_trim(
        [
            (p[k] if k < len(p) else ZERO) + (q[k] if k < len(q) else ZERO)
            for k in range(n)
        ]
    )


def _poly_scale(p, c: Fraction):
    if not c:
        return ()
    return tuple(c * a for a in p)


def _poly_mul(p, q):
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, bb in enumerate(q):
            out[i + j] += a * bb
    return _poly_trim(out)


def _poly_eval(p, lam: Fraction) -> Fraction:
    acc = ZERO
    for a in reversed(p):
        acc = acc * lam + a
    return acc


# -- target constructors -----------------------------------------------------


def qreduce(b: int, k: int) -> tuple[int, int]:
    """Reduce a generator power: a^k = (q/b)^s a^r with k = s(b+1) + r.

    Returns ``(s, r)`` with 0 <= r <= b.  This is the normal form of the
    relation b a^(b+1) = q in Q[q][a].
    """
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    if k < 0:
        raise ValueError(f"exponent must be nonnegative, got {k}")
    return divmod(k, b + 1)[0], k % (b + 1)


def build_p1b(b: int) -> TargetData:
    """Target datum for the weighted projective line P(1,b).

    Basis class k (0 <= k <= b) is a^k of orbifold degree 2k/b; class 0
    is the identity and class b the untwisted divisor x of degree 1/b.
    The nonzero structure constants are

        <a^i, a^j, a^k>_0 = 1/b    when i + j + k = b,
        <a^i, a^j, a^k>_1 = 1/b^2  when i + j + k = 2b + 1,
        <a^i, a^j>_1      = 1/b    when i + j = b + 1,

    and the pairing is eta(a^i, a^j) = 1/b when i + j = b.  Every
    twisted class a^t with 1 <= t <= b - 1 factors through the divisor:
    <a^(t+1), x, *>_1 = (1/b) a^t.
    """
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    size = b + 1
    inv_b = Fraction(1, b)
    orbdeg = tuple(Fraction(2 * k, b) for k in range(size))
    pairing = tuple(
        tuple(inv_b if i + j == b else ZERO for j in range(size))
        for i in range(size)
    )
    base3: dict[tuple[int, int, int, int], Fraction] = {}
    for i in range(size):
        for j in range(i, size):
            for k in range(j, size):
                if i + j + k == b:
                    base3[(i, j, k, 0)] = inv_b
                elif i + j + k == 2 * b + 1:
                    base3[(i, j, k, 1)] = inv_b * inv_b
    base2 = {
        (i, j, 1): inv_b
        for i in range(size)
        for j in range(i, size)
        if i + j == b + 1
    }
    steps = {
        t: DivisorStep(partner=t + 1, divisor=b, shift=1, coeff=inv_b)
        for t in range(1, b)
    }
    names = ("1",) + tuple(f"a^{k}" for k in range(1, b)) + ("x",)
    td = TargetData(
        id=f"P(1,{b})",
        orbdeg=orbdeg,
        dim=Fraction(1),
        c1_degree=Fraction(b + 1, b),
        fundamental_index=0,
        divisor_indices=(b,),
        divisor_degree={b: inv_b},
        pairing=pairing,
        base3=base3,
        base2=base2,
        divisor_factorization=steps,
        basis_names=names,
        power_basis=b,
    )
    validate_target(td)
    return td


def build_p2() -> TargetData:
    """Target datum for the projective plane.

    Basis 1, h, h^2 with h the hyperplane class; the only quantum
    corrections below the reconstruction threshold are
    <h^2, h^2, h>_1 = 1 and <h^2, h^2>_1 = 1 (one line through two
    points), and h^2 factors as <h, h, *>_0 = h^2.
    """
    orbdeg = (Fraction(0), Fraction(2), Fraction(4))
    pairing = tuple(
        tuple(ONE if i + j == 2 else ZERO for j in range(3)) for i in range(3)
    )
    base3 = {
        (0, 0, 2, 0): ONE,
        (0, 1, 1, 0): ONE,
        (1, 2, 2, 1): ONE,
    }
    base2 = {(2, 2, 1): ONE}
    steps = {2: DivisorStep(partner=1, divisor=1, shift=0, coeff=ONE)}
    td = TargetData(
        id="P2",
        orbdeg=orbdeg,
        dim=Fraction(2),
        c1_degree=Fraction(3),
        fundamental_index=0,
        divisor_indices=(1,),
        divisor_degree={1: ONE},
        pairing=pairing,
        base3=base3,
        base2=base2,
        divisor_factorization=steps,
        basis_names=("1", "h", "h^2"),
        power_basis=None,
    )
    validate_target(td)
    return td


# -- pairing inversion and the basis product table ---------------------------

_INVERSE_CACHE: "weakref.WeakKeyDictionary[TargetData, Matrix]" = (
    weakref.WeakKeyDictionary()
)
_PRODUCT_CACHE: "weakref.WeakKeyDictionary[TargetData, tuple]" = (
    weakref.WeakKeyDictionary()
)


def _invert(matrix: Matrix) -> Matrix:
    n = len(matrix)
    aug = [
        list(row) + [ONE if i == j else ZERO for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ValueError("pairing matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = aug[col][col]
        aug[col] = [a / scale for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [a - c * p for a, p in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def pairing_inverse(td: TargetData) -> Matrix:
    """Inverse of the intersection pairing, cached per target."""
    cached = _INVERSE_CACHE.get(td)
    if cached is None:
        cached = _invert(td.pairing)
        _INVERSE_CACHE[td] = cached
    return cached


def three_point(td: TargetData, i: int, j: int, k: int, d: int) -> Fraction:
    """Structure constant <a_i, a_j, a_k>_d; zero when absent."""
    if d < 0:
        return ZERO
    key = tuple(sorted((i, j, k))) + (d,)
    return td.base3.get(key, ZERO)


def two_point(td: TargetData, i: int, j: int, d: int) -> Fraction:
    """Structure constant <a_i, a_j>_d for d >= 1; zero when absent.

    Degree zero is rejected: the 2-point bracket at degree 0 is the
    (unstable) pairing and never enters the recursion through here.
    """
    if d < 1:
        raise ValueError(f"2-point constants require d >= 1, got {d}")
    key = tuple(sorted((i, j))) + (d,)
    return td.base2.get(key, ZERO)


def basis_product_via_pairing(
    td: TargetData, i: int, j: int
) -> tuple[tuple[int, int, Fraction], ...]:
    """Product of basis classes i and j by pairing contraction.

    Returns the nonzero terms as ``(q_degree, basis_index, coeff)``
    triples, computed from the 3-point constants alone:
    a_i * a_j = sum_d q^d sum_{k,l} <a_i, a_j, a_k>_d g^{kl} a_l.
    """
    ginv = pairing_inverse(td)
    size = td.basis_size
    degrees = sorted({key[3] for key in td.base3})
    out = []
    for d in degrees:
        for l in range(size):
            c = sum(
                (three_point(td, i, j, k, d) * ginv[k][l] for k in range(size)),
                ZERO,
            )
            if c:
                out.append((d, l, c))
    return tuple(out)


def _basis_products(td: TargetData):
    """Full basis product table, cached per target.

    On targets with a power basis the product is exponent addition
    followed by :func:`qreduce`; elsewhere it is pairing contraction.
    The two routes agree wherever both apply (tested).
    """
    cached = _PRODUCT_CACHE.get(td)
    if cached is not None:
        return cached
    size = td.basis_size
    b = td.power_basis
    table = []
    for i in range(size):
        row = []
        for j in range(size):
            if b is not None:
                s, r = qreduce(b, i + j)
                row.append(((s, r, Fraction(1, b**s)),))
            else:
                row.append(basis_product_via_pairing(td, i, j))
        table.append(tuple(row))
    table = tuple(table)
    _PRODUCT_CACHE[td] = table
    return table


def basis_element(td: TargetData, index: int) -> QRingElem:
    return QRingElem.basis(td.basis_size, index)


def qmul(td: TargetData, u: QRingElem, v: QRingElem) -> QRingElem:
    """Product in the small quantum ring over Q[q]."""
    size = td.basis_size
    if len(u.coeffs) != size or len(v.coeffs) != size:
        raise ValueError("basis-size mismatch")
    table = _basis_products(td)
    acc: list[tuple[Fraction, ...]] = [()] * size
    for r, pr in enumerate(u.coeffs):
        if not pr:
            continue
        for s, ps in enumerate(v.coeffs):
            if not ps:
                continue
            conv = _poly_mul(pr, ps)
            for dq, l, c in table[r][s]:
                term = _poly_scale(conv, c)
                if dq:
                    term = (ZERO,) * dq + term
                acc[l] = _poly_add(acc[l], term)
    return QRingElem(tuple(acc))


def specialize(td: TargetData, lam) -> SpecializedRing:
    """The ring with q set to ``lam`` (0 gives orbifold cohomology)."""
    lam = Fraction(lam)
    table = _basis_products(td)
    size = td.basis_size
    mult = []
    for i in range(size):
        row = []
        for j in range(size):
            vec = [ZERO] * size
            for dq, l, c in table[i][j]:
                vec[l] += c * lam**dq
            row.append(tuple(vec))
        mult.append(tuple(row))
    return SpecializedRing(lam=lam, mult_table=tuple(mult))


def divisor_generation_check(td: TargetData, lam) -> bool:
    """Whether the divisor classes generate the ring at q = lam.

    Saturates the span of the identity under multiplication by the
    divisor classes, over exact rationals, and reports whether it fills
    the whole ring.
    """
    ring = specialize(td, lam)
    size = td.basis_size

    rows: list[tuple[int, list[Fraction]]] = []  # (pivot column, unit-pivot row)

    def add(vec: Sequence[Fraction]) -> bool:
        w = list(vec)
        for piv, row in rows:
            c = w[piv]
            if c:
                w = [a - c * r for a, r in zip(w, row)]
        for idx, a in enumerate(w):
            if a:
                rows.append((idx, [x / a for x in w]))
                return True
        return False

    unit = lambda k: tuple(ONE if i == k else ZERO for i in range(size))
    start = unit(td.fundamental_index)
    add(start)
    frontier = [start]
    while frontier and len(rows) < size:
        fresh = []
        for vec in frontier:
            for div in td.divisor_indices:
                prod = ring.mult(vec, unit(div))
                if add(prod):
                    fresh.append(prod)
        frontier = fresh
    return len(rows) == size


# -- construction-time validation --------------------------------------------


def validate_target(td: TargetData) -> None:
    """Check the internal consistency of a target datum.

    Raises ``ValueError`` on the first violation.  Everything here is a
    structural axiom the reconstruction engine relies on: degree
    homogeneity of every stored constant, the identity acting through
    the pairing, divisor constants matching the 2-point data, and each
    divisor factorization reproducing exactly one basis class under
    pairing contraction.
    """
    size = td.basis_size
    fund = td.fundamental_index
    if not 0 <= fund < size:
        raise ValueError("fundamental index out of range")
    if td.orbdeg[fund] != 0:
        raise ValueError("the identity class must sit in degree 0")
    if td.c1_degree <= 0:
        raise ValueError("c1 degree must be positive")
    if len(td.pairing) != size or any(len(row) != size for row in td.pairing):
        raise ValueError("pairing matrix has the wrong shape")
    for i in range(size):
        for j in range(size):
            if td.pairing[i][j] != td.pairing[j][i]:
                raise ValueError("pairing matrix is not symmetric")
    ginv = pairing_inverse(td)  # raises if singular
    for div in td.divisor_indices:
        if div == fund or not 0 <= div < size:
            raise ValueError(f"bad divisor index {div}")
        if div not in td.divisor_degree or td.divisor_degree[div] <= 0:
            raise ValueError(f"divisor {div} needs a positive degree")

    # Degree homogeneity: a nonzero n-point constant at degree d forces
    # sum(orbdeg) = 2 d c1 + 2 dim + 2(n - 3).
    for (i, j, k, d), val in td.base3.items():
        if not val:
            raise ValueError("zero entries must be omitted from base3")
        if d < 0 or not (0 <= i <= j <= k < size):
            raise ValueError(f"bad base3 key {(i, j, k, d)}")
        total = td.orbdeg[i] + td.orbdeg[j] + td.orbdeg[k]
        if total != 2 * d * td.c1_degree + 2 * td.dim:
            raise ValueError(f"base3 entry {(i, j, k, d)} violates the degree axiom")
    for (i, j, d), val in td.base2.items():
        if not val:
            raise ValueError("zero entries must be omitted from base2")
        if d < 1 or not (0 <= i <= j < size):
            raise ValueError(f"bad base2 key {(i, j, d)}")
        total = td.orbdeg[i] + td.orbdeg[j]
        if total != 2 * d * td.c1_degree + 2 * td.dim - 2:
            raise ValueError(f"base2 entry {(i, j, d)} violates the degree axiom")

    # The identity pairs classes at degree 0 and does nothing else.
    for (i, j, k, d), val in td.base3.items():
        if i == fund and (d != 0 or val != td.pairing[j][k]):
            raise ValueError(f"base3 entry {(i, j, k, d)} breaks the identity axiom")
    for i in range(size):
        for j in range(size):
            key = tuple(sorted((fund, i, j))) + (0,)
            if td.base3.get(key, ZERO) != td.pairing[i][j]:
                raise ValueError("identity does not reproduce the pairing at degree 0")

    # Divisor insertions at positive degree reduce to 2-point data.
    for div in td.divisor_indices:
        weight = td.divisor_degree[div]
        for (i, j, k, d), val in td.base3.items():
            if d < 1:
                continue
            for rest in _drop_one((i, j, k), div):
                expected = d * weight * td.base2.get(rest + (d,), ZERO)
                if val != expected:
                    raise ValueError(
                        f"base3 entry {(i, j, k, d)} disagrees with the divisor axiom"
                    )
        for (i, j, d), val in td.base2.items():
            key = tuple(sorted((i, j, div))) + (d,)
            if td.base3.get(key, ZERO) != d * weight * val:
                raise ValueError(
                    f"base2 entry {(i, j, d)} disagrees with the divisor axiom"
                )

    # Factorization coverage and the single-term property.
    degrees = sorted({key[3] for key in td.base3} | {0})
    for t in range(size):
        if t == fund or t in td.divisor_indices:
            continue
        step = td.divisor_factorization.get(t)
        if step is None:
            raise ValueError(f"basis class {t} has no divisor factorization")
        if step.divisor not in td.divisor_indices or not step.coeff:
            raise ValueError(f"bad factorization record for class {t}")
        for d in degrees:
            for l in range(size):
                c = sum(
                    (
                        three_point(td, step.partner, step.divisor, k, d) * ginv[k][l]
                        for k in range(size)
                    ),
                    ZERO,
                )
                want = step.coeff if (d == step.shift and l == t) else ZERO
                if c != want:
                    raise ValueError(
                        f"factorization of class {t} is not single-term at degree {d}"
                    )


def _drop_one(values: tuple[int, ...], item: int):
    """Yield the tuple with one occurrence of ``item`` removed, if present."""
    out = []
    seen = False
    for v in values:
        if v == item and not seen:
            seen = True
            continue
        out.append(v)
    if seen:
        yield tuple(sorted(out))
