"""Free graded-commutative algebra over exact rationals.

The algebra is generated by named symbols in degrees <= 0.  For every
algebra generator g there is a form symbol d(g) representing the Kaehler
differential d_dR(g); the form symbol has the same degree as g but the
opposite Koszul parity, so d(z) d(z) can be nonzero when |z| is odd.

Elements are stored as dicts from normalized monomials to Fraction
coefficients.  The normal form lists symbols in declaration order
(algebra generators first, then form symbols); reordering contributes
the Koszul sign (-1)^(parity*parity) per crossing.  Everything is exact;
no floats anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping


class Generator:
    """A graded symbol: a coordinate, a tier generator, or d_dR of one."""

    __slots__ = ("name", "degree", "form_of")

    def __init__(self, name: str, degree: int, form_of: str | None = None):
        self.name = name
        self.degree = degree
        self.form_of = form_of  # underlying generator name when this is d_dR(g)

    @property
    def parity(self) -> int:
        p = self.degree
        if self.form_of is not None:
            p += 1
        return p & 1

    @property
    def is_form(self) -> bool:
        return self.form_of is not None

    def __repr__(self):
        if self.is_form:
            return "d(%s)" % self.form_of
        return self.name


class GradedAlgebra:
    """Free graded-commutative algebra on named generators over Q.

    Generators are declared as (name, degree) pairs with degree <= 0;
    declaration order fixes the canonical monomial order.  Form symbols
    d(g) are created automatically and sort after all algebra generators.
    """

    def __init__(self, generators: Iterable[tuple[str, int]]):
        gens = []
        seen = set()
        for name, degree in generators:
            if name in seen:
                raise ValueError("duplicate generator name %r" % name)
            if degree > 0:
                raise ValueError(
                    "generator %r has degree %d; degrees must be <= 0" % (name, degree)
                )
            seen.add(name)
            gens.append(Generator(name, degree))
        n = len(gens)
        self.symbols: list[Generator] = gens + [
            Generator("d(%s)" % g.name, g.degree, form_of=g.name) for g in gens
        ]
        self._index = {g.name: i for i, g in enumerate(self.symbols)}
        self.ngens = n

    # -- lookups ---------------------------------------------------------

    def generator_names(self) -> list[str]:
        return [g.name for g in self.symbols[: self.ngens]]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError("unknown symbol %r" % name) from None

    def form_index(self, name: str) -> int:
        i = self.index(name)
        if i >= self.ngens:
            raise KeyError("%r is already a form symbol" % name)
        return i + self.ngens

    def symbol(self, i: int) -> Generator:
        return self.symbols[i]

    def degree_of(self, name: str) -> int:
        return self.symbols[self.index(name)].degree

    def same_generators(self, other: GradedAlgebra) -> bool:
        if self is other:
            return True
        return [(g.name, g.degree) for g in self.symbols] == [
            (g.name, g.degree) for g in other.symbols
        ]

    # -- element constructors -------------------------------------------

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, {})

    def one(self) -> AlgebraElement:
        return AlgebraElement(self, {(): Fraction(1)})

    def scalar(self, c) -> AlgebraElement:
        c = Fraction(c)
        return AlgebraElement(self, {(): c} if c else {})

    def gen(self, name: str) -> AlgebraElement:
        i = self.index(name)
        if i >= self.ngens:
            raise ValueError("use form() for form symbols")
        return AlgebraElement(self, {((i, 1),): Fraction(1)})

    def form(self, name: str) -> AlgebraElement:
        """The 1-form d_dR(name)."""
        return AlgebraElement(self, {((self.form_index(name), 1),): Fraction(1)})

    # -- monomial arithmetic --------------------------------------------

    def _mul_monomials(self, m1, m2):
        """Multiply two normalized monomials; returns (sign, monomial) or (0, None)."""
        if not m1:
            return 1, m2
        if not m2:
            return 1, m1
        sign = 1
        syms = self.symbols
        # Koszul crossings: each factor of m2 moves left past the factors of
        # m1 with strictly larger index.
        for j2, e2 in m2:
            p2 = syms[j2].parity
            if p2 and (e2 & 1):
                for j1, e1 in m1:
                    if j1 > j2 and syms[j1].parity and (e1 & 1):
                        sign = -sign
        merged = {}
        for j, e in m1:
            merged[j] = e
        for j, e in m2:
            merged[j] = merged.get(j, 0) + e
        for j, e in merged.items():
            if e > 1 and syms[j].parity:
                return 0, None  # odd symbol squares to zero
        return sign, tuple(sorted(merged.items()))

    def monomial_degree(self, m) -> int:
        return sum(e * self.symbols[j].degree for j, e in m)

    def monomial_parity(self, m) -> int:
        return sum(e * self.symbols[j].parity for j, e in m) & 1

    def monomial_form_count(self, m) -> int:
        return sum(e for j, e in m if self.symbols[j].is_form)


class AlgebraElement:
    """A finite Q-linear combination of normalized monomials."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: GradedAlgebra, terms: Mapping):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}

    # arithmetic

    def _check(self, other: AlgebraElement):
        if not self.algebra.same_generators(other.algebra):
            raise ValueError("elements live over different generator sets")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.scalar(other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return AlgebraElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return AlgebraElement(self.algebra, {m: c * v for m, v in self.terms.items()})
        self._check(other)
        alg = self.algebra
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                sign, m = alg._mul_monomials(m1, m2)
                if sign:
                    out[m] = out.get(m, Fraction(0)) + sign * c1 * c2
        return AlgebraElement(alg, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined here")
        out = self.algebra.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.scalar(other)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra.same_generators(other.algebra) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # structure

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {self.algebra.monomial_degree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int | None:
        """Total degree of a homogeneous element; None for 0 or mixed."""
        degs = self.degrees()
        if len(degs) == 1:
            return degs.pop()
        return None

    def form_counts(self) -> set[int]:
        return {self.algebra.monomial_form_count(m) for m in self.terms}

    def homogeneous_part(self, degree: int) -> AlgebraElement:
        alg = self.algebra
        return AlgebraElement(
            alg, {m: c for m, c in self.terms.items() if alg.monomial_degree(m) == degree}
        )

    def uses(self, names: Iterable[str]) -> bool:
        idxs = {self.algebra.index(n) for n in names}
        idxs |= {i + self.algebra.ngens for i in idxs if i < self.algebra.ngens}
        return any(j in idxs for m in self.terms for j, _ in m)

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        """Augmentation at a point: degree-0 coordinates take the given values,
        every negative-degree generator goes to 0.  Form symbols are not allowed."""
        alg = self.algebra
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for j, e in m:
                s = alg.symbols[j]
                if s.is_form:
                    raise ValueError("cannot evaluate a form symbol at a point")
                if s.degree < 0:
                    v = Fraction(0)
                    break
                if s.name not in point:
                    raise KeyError("no value for coordinate %r" % s.name)
                v *= Fraction(point[s.name]) ** e
            total += v
        return total

    def map_terms(self, f) -> AlgebraElement:
        out: dict = {}
        for m, c in self.terms.items():
            elem = f(m, c)
            for mm, cc in elem.terms.items():
                out[mm] = out.get(mm, Fraction(0)) + cc
        return AlgebraElement(self.algebra, out)

    # printing

    def _monomial_str(self, m) -> str:
        parts = []
        for j, e in m:
            s = self.algebra.symbols[j]
            parts.append(s.name if e == 1 else "%s^%d" % (s.name, e))
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        alg = self.algebra
        # sort: by total degree descending, then monomial key; deterministic
        keys = sorted(
            self.terms, key=lambda m: (-alg.monomial_degree(m), m)
        )
        chunks = []
        for m in keys:
            c = self.terms[m]
            ms = self._monomial_str(m)
            if not ms:
                body = str(c)
            elif c == 1:
                body = ms
            elif c == -1:
                body = "-" + ms
            else:
                body = "%s*%s" % (c, ms)
            if chunks and not body.startswith("-"):
                chunks.append("+" + body)
            else:
                chunks.append(body)
        return "".join(chunks)

    __repr__ = __str__


class Derivation:
    """A graded derivation determined by its images on symbols.

    parity is the Koszul parity of the operator: applying it to a product
    inserts (-1)^(parity * parity(prefix)) by the graded Leibniz rule.
    degree is what it adds to the degree of homogeneous arguments.
    images maps symbol index -> AlgebraElement; missing entries act as 0.
    """

    __slots__ = ("algebra", "degree", "parity", "images")

    def __init__(self, algebra: GradedAlgebra, degree: int, parity: int, images: dict):
        self.algebra = algebra
        self.degree = degree
        self.parity = parity & 1
        self.images = {j: img for j, img in images.items() if img}

    def __call__(self, elem: AlgebraElement) -> AlgebraElement:
        alg = self.algebra
        if not alg.same_generators(elem.algebra):
            raise ValueError("derivation and element live over different generator sets")
        out: dict = {}
        for m, c in elem.terms.items():
            for mm, cc in self._apply_monomial(m).terms.items():
                out[mm] = out.get(mm, Fraction(0)) + c * cc
        return AlgebraElement(alg, out)

    def _apply_monomial(self, m) -> AlgebraElement:
        alg = self.algebra
        out = alg.zero()
        prefix_parity = 0
        for t, (j, e) in enumerate(m):
            img = self.images.get(j)
            p = alg.symbols[j].parity
            if img is not None:
                sign = -1 if (self.parity and prefix_parity) else 1
                left = AlgebraElement(alg, {m[:t]: Fraction(1)})
                mid = AlgebraElement(alg, {((j, e - 1),) if e > 1 else (): Fraction(1)})
                right = AlgebraElement(alg, {m[t + 1:]: Fraction(1)})
                out = out + (sign * e) * (left * mid * img * right)
            prefix_parity ^= (p * e) & 1
        return out


def partial(name: str, a: AlgebraElement) -> AlgebraElement:
    """Left graded partial derivative in the algebra generator `name`.

    Each monomial is normal-ordered to bring the generator leftmost,
    picking up Koszul signs, and one copy is stripped.
    """
    alg = a.algebra
    j = alg.index(name)
    if j >= alg.ngens:
        raise ValueError("partials are only taken in algebra generators, not forms")
    g = alg.symbols[j]
    d = Derivation(alg, -g.degree, g.parity, {j: alg.one()})
    return d(a)


def de_rham(a: AlgebraElement) -> AlgebraElement:
    """The de Rham differential: g -> d_dR(g) on algebra generators,
    0 on form symbols, extended as an odd derivation.  Squares to zero."""
    alg = a.algebra
    images = {
        j: alg.form(alg.symbols[j].name) for j in range(alg.ngens)
    }
    return Derivation(alg, 0, 1, images)(a)


def contract(name: str, omega: AlgebraElement) -> AlgebraElement:
    """Interior product with the coordinate vector field dual to `name`:
    <d/dg, d_dR(g')> = delta(g,g'), extended as a graded derivation."""
    alg = omega.algebra
    j = alg.index(name)
    if j >= alg.ngens:
        raise ValueError("contract expects an algebra generator name")
    if omega and 0 in omega.form_counts():
        raise ValueError("cannot contract a 0-form")
    g = alg.symbols[j]
    d = Derivation(alg, -g.degree, (g.parity + 1) & 1, {j + alg.ngens: alg.one()})
    return d(omega)


def wedge_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Graded-commutative product; identical to a * b."""
    return a * b


def transport(a: AlgebraElement, target: GradedAlgebra) -> AlgebraElement:
    """Rebuild an element over another algebra containing (by name, at the
    same degree) every symbol the element uses.  Koszul signs are
    recomputed against the target's canonical order."""
    if target.same_generators(a.algebra):
        return AlgebraElement(target, a.terms)
    src = a.algebra
    out = target.zero()
    for m, c in a.terms.items():
        elem = target.scalar(c)
        for j, e in m:
            s = src.symbols[j]
            name = s.form_of if s.is_form else s.name
            if target.degree_of(name) != s.degree:
                raise ValueError("symbol %r changes degree under transport" % name)
            factor = target.form(name) if s.is_form else target.gen(name)
            elem = elem * factor**e
        out = out + elem
    return out


def substitute(
    a: AlgebraElement, images: Mapping[str, AlgebraElement], target: GradedAlgebra
) -> AlgebraElement:
    """Coordinate substitution for classical polynomials: every degree-0
    generator is replaced by its image in the target algebra.  Negative
    degrees and form symbols are refused."""
    out = target.zero()
    for m, c in a.terms.items():
        elem = target.scalar(c)
        for j, e in m:
            s = a.algebra.symbols[j]
            if s.is_form or s.degree != 0:
                raise ValueError("substitute works on classical polynomials only")
            if s.name not in images:
                raise KeyError("no image for coordinate %r" % s.name)
            elem = elem * images[s.name] ** e
        out = out + elem
    return out
