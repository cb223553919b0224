"""Calculus of motivic classes with finite-cyclic monodromy actions.

Elements are finite sums of formal products of class symbols with exact
coefficients.  Coefficients live in the ring generated over the integers
by a square root of the Tate class and the inverses of (L^k - 1): they
are Laurent polynomials in the half-power atom s (s*s = L) times a
signed multiset of (L^k - 1) factors, kept factored so that inverting
the general-linear-group classes is exact.

Two products coexist.  The plain product refuses half-powers of L and
keeps double-cover classes symbolic (their plain square is 2*[cover],
not L-anything).  The twisted product substitutes the trivial double
cover by 1 - s throughout, which makes the square root behave (s (.) s
gives L) and collapses the vanishing-cycle normal forms.  The quotient
ring that identifies twisted products of double-cover classes with their
tensor product is modeled by mbar_normalize's fusion rewrite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd

__all__ = [
    "MotiveError",
    "Coeff",
    "ClassSymbol",
    "MotiveElement",
    "MorphismLabel",
    "StackContext",
    "Stratum",
    "unit",
    "coeff_element",
    "symbol_element",
    "l_half_power",
    "integer",
    "cover_symbol",
    "mu_symbol",
    "dot",
    "odot",
    "upsilon",
    "mbar_normalize",
    "gl_class",
    "inverse_class",
    "push",
    "pull",
    "compose",
    "assemble_stack_motive",
    "oriented_chart_motive",
    "euler_specialize",
    "register_odot_pair",
    "clear_odot_registry",
]


class MotiveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficients


class Coeff:
    """num: Laurent polynomial in s as {power: int}; fac: {k: exponent}
    meaning the product of (L^k - 1)^exponent = (s^2k - 1)^exponent,
    exponents negative for denominator factors.  Exact and hashable-free;
    equality goes through subtraction so that differently-factored
    representatives of the same element compare equal."""

    __slots__ = ("num", "fac")

    def __init__(self, num=None, fac=None):
        self.num = {p: c for p, c in (num or {}).items() if c}
        self.fac = {k: e for k, e in (fac or {}).items() if e}
        if not self.num:
            self.fac = {}

    @staticmethod
    def zero() -> "Coeff":
        return Coeff()

    @staticmethod
    def one() -> "Coeff":
        return Coeff({0: 1})

    @staticmethod
    def integer(n: int) -> "Coeff":
        return Coeff({0: n})

    @staticmethod
    def s_power(a: int) -> "Coeff":
        """s^a, that is L^(a/2)."""
        return Coeff({a: 1})

    def __bool__(self):
        return bool(self.num)

    def _expand_fac_into_num(self, extra: dict) -> dict:
        """num times the product of (s^2k - 1)^e for e >= 0 entries of extra."""
        out = dict(self.num)
        for k, e in extra.items():
            if e < 0:
                raise MotiveError("cannot expand a denominator factor")
            for _ in range(e):
                nxt: dict = {}
                for p, c in out.items():
                    nxt[p + 2 * k] = nxt.get(p + 2 * k, 0) + c
                    nxt[p] = nxt.get(p, 0) - c
                out = {p: c for p, c in nxt.items() if c}
        return out

    def __add__(self, other: "Coeff") -> "Coeff":
        if not self:
            return other
        if not other:
            return self
        keys = set(self.fac) | set(other.fac)
        common = {k: min(self.fac.get(k, 0), other.fac.get(k, 0)) for k in keys}
        a = self._expand_fac_into_num(
            {k: self.fac.get(k, 0) - common[k] for k in keys}
        )
        b = other._expand_fac_into_num(
            {k: other.fac.get(k, 0) - common[k] for k in keys}
        )
        for p, c in b.items():
            a[p] = a.get(p, 0) + c
        return Coeff(a, common)

    def __neg__(self) -> "Coeff":
        return Coeff({p: -c for p, c in self.num.items()}, self.fac)

    def __sub__(self, other: "Coeff") -> "Coeff":
        return self + (-other)

    def __mul__(self, other: "Coeff") -> "Coeff":
        if not self or not other:
            return Coeff()
        num: dict = {}
        for p1, c1 in self.num.items():
            for p2, c2 in other.num.items():
                num[p1 + p2] = num.get(p1 + p2, 0) + c1 * c2
        fac = dict(self.fac)
        for k, e in other.fac.items():
            fac[k] = fac.get(k, 0) + e
        return Coeff(num, fac)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Coeff.integer(other)
        if not isinstance(other, Coeff):
            return NotImplemented
        return not (self - other)

    def __hash__(self):
        raise TypeError("Coeff is not hashable")

    def has_odd_powers(self) -> bool:
        return any(p & 1 for p in self.num)

    def is_invertible(self) -> bool:
        return len(self.num) == 1 and next(iter(self.num.values())) in (1, -1)

    def inverse(self) -> "Coeff":
        if not self.is_invertible():
            raise MotiveError(
                "coefficient %s is not a unit (need a signed power of L^(1/2) "
                "times (L^k-1) factors)" % self
            )
        ((p, c),) = self.num.items()
        return Coeff({-p: c}, {k: -e for k, e in self.fac.items()})

    def euler(self) -> int:
        """Value at s = -1; refuses retained denominator factors, which
        would vanish there."""
        if any(e < 0 for e in self.fac.values()):
            raise MotiveError(
                "Euler specialization undefined: (L^k-1) factors remain in "
                "the denominator of %s" % self
            )
        if any(e > 0 for e in self.fac.values()):
            return 0  # every (L^k - 1) factor vanishes at s = -1
        return sum(c * (-1) ** (p & 1) for p, c in self.num.items())

    # printing: s^2 is L, s is Lh (the half power)

    @staticmethod
    def _power_str(p: int) -> str:
        if p == 0:
            return "1"
        if p % 2 == 0:
            return "L" if p == 2 else "L^%d" % (p // 2)
        return "Lh" if p == 1 else "Lh^%d" % p

    def __str__(self):
        if not self.num:
            return "0"
        parts = []
        for p in sorted(self.num, reverse=True):
            c = self.num[p]
            ps = self._power_str(p)
            if ps == "1":
                body = str(c)
            elif c == 1:
                body = ps
            elif c == -1:
                body = "-" + ps
            else:
                body = "%d*%s" % (c, ps)
            if parts and not body.startswith("-"):
                parts.append("+" + body)
            else:
                parts.append(body)
        out = "".join(parts)
        if len(self.num) > 1 and self.fac:
            out = "(%s)" % out
        ups = [
            ("(L^%d-1)" % k if e == 1 else "(L^%d-1)^%d" % (k, e))
            for k, e in sorted(self.fac.items())
            if e > 0
        ]
        downs = [
            ("(L^%d-1)" % k if e == -1 else "(L^%d-1)^%d" % (k, -e))
            for k, e in sorted(self.fac.items())
            if e < 0
        ]
        if ups:
            out = out + "*" + "*".join(ups) if out != "1" else "*".join(ups)
        if downs:
            out = "%s/%s" % (out, "*".join(downs))
        return out

    __repr__ = __str__


# ---------------------------------------------------------------------------
# class symbols


@dataclass(frozen=True)
class ClassSymbol:
    """An opaque motivic class over a base, with a finite-cyclic action
    of order n (n = 1 means the action is trivial).

    kind:
      var      plain variety class
      cover2   principal Z/2-bundle class; labels is its tensor decomposition,
               the empty set being the TRIVIAL double cover
      mun      mu_n torsor class
      fib      formal fibre product of two parent symbols
      pullback formal pullback of parts[0] along route
      stratum  locally closed piece of a stack
    route records pushforward relabelings, outermost last.
    inv = -1 marks the formal inverse of a declared-invertible class.
    """

    label: str
    base: str = "pt"
    n: int = 1
    kind: str = "var"
    labels: frozenset = frozenset()
    parts: tuple = ()
    route: tuple = ()
    inv: int = 1

    def key(self):
        return (
            self.kind,
            self.label,
            self.base,
            self.n,
            tuple(sorted(self.labels)),
            tuple(p.key() for p in self.parts),
            self.route,
            self.inv,
        )

    def is_trivial_cover(self) -> bool:
        return self.kind == "cover2" and not self.labels and not self.route

    def __str__(self):
        body = self.label
        for r in self.route:
            body = "%s!%s" % (r, body)
        return "[%s]" % body if self.inv == 1 else "[%s]^-1" % body

    __repr__ = __str__


def cover_symbol(labels=(), base: str = "pt", label: str | None = None) -> ClassSymbol:
    """A principal Z/2-bundle class; empty labels give the trivial cover."""
    ls = frozenset(labels)
    if label is None:
        label = "cov(%s)" % ",".join(sorted(ls)) if ls else "triv2"
    return ClassSymbol(label=label, base=base, n=2, kind="cover2", labels=ls)


def mu_symbol(n: int, base: str = "pt") -> ClassSymbol:
    if n < 1:
        raise MotiveError("action order must be >= 1")
    return ClassSymbol(label="mu%d" % n, base=base, n=n, kind="mun")


# ---------------------------------------------------------------------------
# elements


def _normalize_term(syms) -> tuple:
    """Sort a symbol tuple and cancel adjacent inverse pairs."""
    out = sorted(syms, key=lambda s: (s.key()[:7],) + ((s.inv),))
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            a, b = out[i], out[i + 1]
            if a.inv != b.inv and replace(a, inv=1) == replace(b, inv=1):
                del out[i : i + 2]
                changed = True
                break
    return tuple(out)


class MotiveElement:
    """Finite sum of coefficient-weighted symbol products over one base.

    base None means "over any base" (pure coefficients); binary
    operations unify bases and refuse genuinely different ones.
    provenance records how the element was built (pullbacks, twisted
    products) so the pushforward rules can recognize their patterns; it
    never participates in equality.
    """

    __slots__ = ("base", "terms", "provenance")

    def __init__(self, terms, base=None, provenance=None):
        self.base = base
        self.terms = {}
        for syms, c in terms.items():
            if not c:
                continue
            key = _normalize_term(syms)
            cur = self.terms.get(key)
            self.terms[key] = c if cur is None else cur + c
        self.terms = {k: c for k, c in self.terms.items() if c}
        self.provenance = provenance

    # base bookkeeping

    @staticmethod
    def _join_base(a, b):
        if a is None:
            return b
        if b is None or a == b:
            return a
        raise MotiveError("elements live over different bases: %r vs %r" % (a, b))

    # ring structure

    def __add__(self, other):
        other = _as_element(other)
        base = self._join_base(self.base, other.base)
        out = {k: c for k, c in self.terms.items()}
        for k, c in other.terms.items():
            cur = out.get(k)
            out[k] = c if cur is None else cur + c
        return MotiveElement(out, base)

    __radd__ = __add__

    def __neg__(self):
        return MotiveElement(
            {k: -c for k, c in self.terms.items()}, self.base
        )

    def __sub__(self, other):
        return self + (-_as_element(other))

    def __rsub__(self, other):
        return (-self) + _as_element(other)

    def scale(self, c: Coeff) -> "MotiveElement":
        return MotiveElement(
            {k: c * v for k, v in self.terms.items()}, self.base
        )

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Coeff)):
            other = _as_element(other)
        if not isinstance(other, MotiveElement):
            return NotImplemented
        if self.base is not None and other.base is not None and self.base != other.base:
            return False
        diff = _subst_trivial(self) - _subst_trivial(other)
        return not diff

    def __hash__(self):
        raise TypeError("MotiveElement is not hashable")

    def symbols(self):
        for syms in self.terms:
            yield from syms

    def __str__(self):
        if not self.terms:
            return "0"
        chunks = []
        for syms in sorted(self.terms, key=lambda t: tuple(s.key() for s in t)):
            c = self.terms[syms]
            cs = str(c)
            body = "*".join(str(s) for s in syms)
            if not body:
                chunk = cs
            elif cs == "1":
                chunk = body
            elif cs == "-1":
                chunk = "-" + body
            else:
                chunk = "(%s)*%s" % (cs, body) if ("+" in cs or "-" in cs[1:]) else "%s*%s" % (cs, body)
            if chunks and not chunk.startswith("-"):
                chunks.append("+" + chunk)
            else:
                chunks.append(chunk)
        return "".join(chunks)

    __repr__ = __str__


def _as_element(x) -> MotiveElement:
    if isinstance(x, MotiveElement):
        return x
    if isinstance(x, Coeff):
        return MotiveElement({(): x})
    if isinstance(x, int):
        return MotiveElement({(): Coeff.integer(x)})
    if isinstance(x, ClassSymbol):
        return symbol_element(x)
    raise MotiveError("cannot interpret %r as a motivic element" % (x,))


def unit(base=None) -> MotiveElement:
    return MotiveElement({(): Coeff.one()}, base)


def zero(base=None) -> MotiveElement:
    return MotiveElement({}, base)


def coeff_element(c: Coeff, base=None) -> MotiveElement:
    return MotiveElement({(): c}, base)


def l_half_power(a: int, base=None) -> MotiveElement:
    """L^(a/2) as an element."""
    return MotiveElement({(): Coeff.s_power(a)}, base)


def integer(n: int, base=None) -> MotiveElement:
    return MotiveElement({(): Coeff.integer(n)}, base)


def symbol_element(sym: ClassSymbol, base=None) -> MotiveElement:
    return MotiveElement({(sym,): Coeff.one()}, base or sym.base)


def _subst_trivial(m: MotiveElement) -> MotiveElement:
    """Replace every trivial double-cover factor by 1 - s (the defining
    half-power relation): this is the twisted-lane normal form."""
    out: dict = {}
    one_minus_s = Coeff({0: 1, 1: -1})
    for syms, c in m.terms.items():
        kept = []
        for s in syms:
            if s.is_trivial_cover():
                c = c * one_minus_s
            else:
                kept.append(s)
        key = tuple(kept)
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return MotiveElement(out, m.base, m.provenance)


# ---------------------------------------------------------------------------
# the two products


def dot(a: MotiveElement, b: MotiveElement) -> MotiveElement:
    """Plain fibre-product multiplication.

    Half-powers of L are refused (their plain square is not L); trivial
    double covers stay symbolic, two of them multiplying to twice one
    (the four-point product splits into two diagonal orbits); other
    nontrivial pairs become opaque fibre-product symbols.
    """
    a, b = _as_element(a), _as_element(b)
    base = MotiveElement._join_base(a.base, b.base)
    for side in (a, b):
        if any(c.has_odd_powers() for c in side.terms.values()):
            raise MotiveError(
                "plain product refuses half-integer powers of L; "
                "use the twisted product for those"
            )
    out = MotiveElement({}, base)
    for sa, ca in a.terms.items():
        for sb, cb in b.terms.items():
            coeff = ca * cb
            plain = [s for s in sa if s.n == 1] + [s for s in sb if s.n == 1]
            acta = [s for s in sa if s.n > 1]
            actb = [s for s in sb if s.n > 1]
            syms = list(plain)
            for s1, s2 in zip(acta, actb):
                if s1.is_trivial_cover() and s2.is_trivial_cover():
                    coeff = coeff * Coeff.integer(2)
                    syms.append(s1)
                else:
                    lo, hi = sorted((s1, s2), key=lambda s: s.key())
                    syms.append(
                        ClassSymbol(
                            label="(%s x %s)" % (lo.label, hi.label),
                            base=base or "pt",
                            n=(s1.n * s2.n) // gcd(s1.n, s2.n),
                            kind="fib",
                            parts=(lo, hi),
                        )
                    )
            rest = acta[len(actb):] + actb[len(acta):]
            syms.extend(rest)
            out = out + MotiveElement({tuple(syms): coeff}, base)
    return out


_ODOT_REGISTRY: dict = {}


def register_odot_pair(s1: ClassSymbol, s2: ClassSymbol, result: MotiveElement) -> None:
    """Declare the twisted product of two specific opaque symbols, for
    callers who computed the underlying quotient geometry themselves."""
    _ODOT_REGISTRY[frozenset((s1.key(), s2.key()))] = result


def clear_odot_registry() -> None:
    _ODOT_REGISTRY.clear()


def _apply_registry(term: tuple, base) -> MotiveElement | None:
    for i in range(len(term)):
        for j in range(i + 1, len(term)):
            hit = _ODOT_REGISTRY.get(frozenset((term[i].key(), term[j].key())))
            if hit is not None:
                rest = term[:i] + term[i + 1 : j] + term[j + 1 :]
                out = hit
                for s in rest:
                    out = odot(out, symbol_element(s, base))
                return out
    return None


def odot(a, b) -> MotiveElement:
    """Twisted multiplication: the trivial double cover is substituted
    by 1 - s throughout, making s an honest square root of L; symbols
    with trivial action multiply as in the plain product; registered
    pair rules resolve declared quotients; remaining products of acted
    symbols stay as formal products (mbar_normalize fuses double
    covers further)."""
    a, b = _as_element(a), _as_element(b)
    base = MotiveElement._join_base(a.base, b.base)
    a, b = _subst_trivial(a), _subst_trivial(b)
    out = MotiveElement({}, base)
    for sa, ca in a.terms.items():
        for sb, cb in b.terms.items():
            term = tuple(sa + sb)
            hit = _apply_registry(term, base)
            if hit is not None:
                out = out + hit.scale(ca * cb)
            else:
                out = out + MotiveElement({term: ca * cb}, base)
    return MotiveElement(out.terms, base, provenance=("odot", a, b))


def upsilon(p, base=None) -> MotiveElement:
    """The normalized cover class: s^-1 (.) (1 - [P]).  The trivial
    cover collapses to the unit."""
    if isinstance(p, ClassSymbol):
        sym = p
    elif isinstance(p, (frozenset, set, tuple, list)):
        sym = cover_symbol(p, base or "pt")
    else:
        raise MotiveError("upsilon expects a cover symbol or a label set")
    if sym.kind != "cover2":
        raise MotiveError("upsilon expects a principal Z/2-bundle class")
    b = base or sym.base
    return odot(l_half_power(-1, b), unit(b) - symbol_element(sym, b))


def _fuse_pair(p: ClassSymbol, q: ClassSymbol, base) -> MotiveElement:
    # [P] (.) [Q] = (s-1) + [P] + [Q] - s*[P tensor Q]
    tensor = cover_symbol(p.labels ^ q.labels, base or p.base)
    s = Coeff.s_power(1)
    return (
        coeff_element(s - Coeff.one(), base)
        + symbol_element(p, base)
        + symbol_element(q, base)
        - symbol_element(tensor, base).scale(s)
    )


def mbar_normalize(m) -> MotiveElement:
    """Normal form in the quotient ring where twisted products of
    double-cover classes fuse into the class of their tensor product.
    Idempotent; a twisted-ring morphism."""
    m = _subst_trivial(_as_element(m))
    out = MotiveElement({}, m.base)
    for syms, c in m.terms.items():
        covers = [s for s in syms if s.kind == "cover2" and not s.route]
        if len(covers) >= 2:
            rest = list(syms)
            rest.remove(covers[0])
            rest.remove(covers[1])
            fused = _fuse_pair(covers[0], covers[1], m.base)
            tail = MotiveElement({tuple(rest): c}, m.base)
            out = out + mbar_normalize(_mul_terms(fused, tail))
        else:
            out = out + MotiveElement({syms: c}, m.base)
    return out


def _mul_terms(a: MotiveElement, b: MotiveElement) -> MotiveElement:
    """Raw term-by-term product (no rewrite rules); used internally by
    the fusion rewrite where re-running odot would loop."""
    out: dict = {}
    for sa, ca in a.terms.items():
        for sb, cb in b.terms.items():
            key = tuple(sa + sb)
            c = ca * cb
            cur = out.get(key)
            out[key] = c if cur is None else cur + c
    return MotiveElement(out, MotiveElement._join_base(a.base, b.base))


def gl_class(n: int, base=None) -> MotiveElement:
    """The class of the rank-n general linear group:
    L^(n(n-1)/2) * prod_{k=1..n} (L^k - 1).  A unit of the coefficient
    ring, so it inverts exactly."""
    if n < 0:
        raise MotiveError("rank must be >= 0")
    return coeff_element(
        Coeff({n * (n - 1): 1}, {k: 1 for k in range(1, n + 1)}), base
    )


def inverse_class(m: MotiveElement) -> MotiveElement:
    """Inverse of a one-term element whose coefficient is a unit; a lone
    symbol inverts formally (inv flag), coefficients invert exactly."""
    m = _as_element(m)
    if len(m.terms) != 1:
        raise MotiveError("only single-term elements invert")
    ((syms, c),) = m.terms.items()
    inv = c.inverse()
    flipped = tuple(replace(s, inv=-s.inv) for s in syms)
    return MotiveElement({flipped: inv}, m.base)


# ---------------------------------------------------------------------------
# morphisms, pushforward, pullback


@dataclass(frozen=True)
class MorphismLabel:
    """A declared morphism between base labels.

    kind: identity | representable | smooth | zlt_bundle | open_stratum
          | stack
    reldim: relative dimension for smooth morphisms and bundles.
    group/"group_n": structure group of a Zariski-locally-trivial
    principal bundle: "GL" with its rank, or the label of a declared
    special group whose class is group_class.
    factors: for composites, the atomic labels in application order
    (source side first); empty means this label is itself atomic.
    """

    name: str
    source: str
    target: str
    kind: str = "representable"
    reldim: int = 0
    group: str | None = None
    group_n: int = 0
    group_class: tuple = ()  # optional ((symbols, coeff-ish MotiveElement),) wrapper unused; kept simple below
    factors: tuple = ()

    def atoms(self) -> tuple:
        return self.factors if self.factors else (self,)

    def key(self) -> tuple:
        return tuple(f.name for f in self.atoms())


def compose(psi: MorphismLabel, phi: MorphismLabel) -> MorphismLabel:
    """psi after phi."""
    if phi.target != psi.source:
        raise MotiveError(
            "cannot compose: %s ends at %r but %s starts at %r"
            % (phi.name, phi.target, psi.name, psi.source)
        )
    return MorphismLabel(
        name="%s.%s" % (psi.name, phi.name),
        source=phi.source,
        target=psi.target,
        kind="composite",
        factors=phi.atoms() + psi.atoms(),
    )


def _source_bundle_class(f: MorphismLabel, base) -> MotiveElement:
    """[total space of f] as a multiple of the unit over the target, for
    trivializable bundles: the group class itself."""
    if f.kind == "identity":
        return unit(base)
    if f.kind == "zlt_bundle":
        if f.group == "GL":
            return gl_class(f.group_n, base)
        sym = ClassSymbol(label=f.group or "G", base=base or "pt", kind="var")
        return symbol_element(sym, base)
    raise MotiveError(
        "no closed form for the total-space class of a %s morphism" % f.kind
    )


def push(phi: MorphismLabel, m: MotiveElement) -> MotiveElement:
    """Pushforward: relabels classes along the morphism.

    Recognized patterns, applied before relabeling:
      - push(phi, pull(phi, M)) = [total space] (.) M for bundles and
        the identity;
      - the projection formula push(M (.) pull(phi, N)) = push(M) (.) N.
    Pure coefficients stay coefficients (they are pulled back from the
    point, so they factor through); the unit term itself becomes the
    class of the source.
    """
    m = _as_element(m)
    prov = m.provenance
    if prov is not None and prov[0] == "pull" and prov[1] == phi.key():
        return odot(_source_bundle_class(phi, m.base and None), prov[2])
    if prov is not None and prov[0] == "odot":
        u, v = prov[1], prov[2]
        for left, right in ((u, v), (v, u)):
            rp = right.provenance
            if rp is not None and rp[0] == "pull" and rp[1] == phi.key():
                return odot(push(phi, left), rp[2])
    out = m
    for f in phi.atoms():
        out = _push_one(f, out)
    return out


def _push_one(f: MorphismLabel, m: MotiveElement) -> MotiveElement:
    if m.base is not None and m.base != f.source:
        raise MotiveError(
            "cannot push a class over %r along a morphism from %r"
            % (m.base, f.source)
        )
    if f.kind == "identity":
        return MotiveElement(m.terms, f.target, m.provenance)
    out: dict = {}
    for syms, c in m.terms.items():
        if syms:
            key = tuple(replace(s, base=f.target, route=s.route + (f.name,)) for s in syms)
        else:
            key = (
                ClassSymbol(label=f.source, base=f.target, kind="var", route=(f.name,)),
            )
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return MotiveElement(out, f.target)


def pull(phi: MorphismLabel, m: MotiveElement, ctx: "StackContext | None" = None) -> MotiveElement:
    """Pullback: forms fibre-product classes along the morphism.

    Factors apply in reverse order (contravariance), so functoriality
    pull(psi after phi) = pull(phi) of pull(psi) holds structurally.
    Pulling through a stack morphism needs the stack's stratification
    and emits the stratified sum with general-linear inverse weights.
    """
    m = _as_element(m)
    out = m
    for f in reversed(phi.atoms()):
        out = _pull_one(f, out, ctx)
    return MotiveElement(out.terms, out.base, provenance=("pull", phi.key(), m))


def _pull_one(f: MorphismLabel, m: MotiveElement, ctx) -> MotiveElement:
    if m.base is not None and m.base != f.target:
        raise MotiveError(
            "cannot pull a class over %r along a morphism into %r"
            % (m.base, f.target)
        )
    if f.kind == "identity":
        return MotiveElement(m.terms, f.source, m.provenance)
    if f.kind == "stack":
        if ctx is None:
            raise MotiveError(
                "pullback along a non-representable morphism needs a "
                "stratification context"
            )
        total = MotiveElement({}, f.source)
        for st in ctx.strata:
            piece = _plain_pull(f, m, via=st.atlas if st.atlas != f.source else None)
            if st.group_n:
                piece = odot(inverse_class(gl_class(st.group_n)), piece)
            total = total + piece
        return total
    return _plain_pull(f, m, via=None)


def _plain_pull(f: MorphismLabel, m: MotiveElement, via: str | None) -> MotiveElement:
    out: dict = {}
    for syms, c in m.terms.items():
        key = tuple(
            ClassSymbol(
                label="%s^*%s" % (f.name, s.label) if via is None
                else "%s^*%s@%s" % (f.name, s.label, via),
                base=f.source,
                n=s.n,
                kind="pullback",
                labels=s.labels,
                parts=(s,),
            )
            for s in syms
        )
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return MotiveElement(out, f.source)


# ---------------------------------------------------------------------------
# stacks


@dataclass(frozen=True)
class Stratum:
    label: str
    group_n: int
    atlas: str
    reldim: int


@dataclass(frozen=True)
class StackContext:
    """A declared stratification of a stack into global quotients:
    each stratum is covered by an atlas with a general-linear group of
    the given rank acting (rank 0 means the stratum is a scheme)."""

    space: str
    strata: tuple

    def __init__(self, space, strata):
        object.__setattr__(self, "space", space)
        object.__setattr__(
            self,
            "strata",
            tuple(s if isinstance(s, Stratum) else Stratum(*s) for s in strata),
        )


def assemble_stack_motive(
    ctx: StackContext, data: dict
) -> MotiveElement:
    """Glue per-stratum chart classes into one class over the stack.

    data maps stratum label -> (atlas_class, chart_motive): the atlas
    class must be invertible (one term, unit coefficient); each term
    contributes
        push(incl, inverse(atlas_class) (.) push(atlas_map, L^(reldim/2) (.) chart)).
    A single scheme stratum covering the stack itself with unit atlas
    class returns the chart class unchanged.
    """
    total = MotiveElement({}, ctx.space)
    for st in ctx.strata:
        if st.label not in data:
            raise MotiveError("no chart data for stratum %r" % st.label)
        atlas_class, chart = data[st.label]
        ident = st.label == ctx.space and st.atlas == ctx.space and st.group_n == 0
        incl = MorphismLabel(
            name="incl_%s" % st.label,
            source=st.label,
            target=ctx.space,
            kind="identity" if ident else "open_stratum",
        )
        atlas_map = MorphismLabel(
            name="atlas_%s" % st.label,
            source=st.atlas,
            target=st.label,
            kind="identity" if ident else "smooth",
            reldim=st.reldim,
        )
        inner = odot(l_half_power(st.reldim, st.atlas), chart)
        piece = odot(inverse_class(atlas_class), push(atlas_map, inner))
        total = total + push(incl, piece)
    return total


def oriented_chart_motive(m: MotiveElement, q) -> MotiveElement:
    """Twist a chart's vanishing-cycle class by the normalized class of
    its orientation double cover, in quotient-ring normal form."""
    m = _as_element(m)
    return mbar_normalize(odot(m, upsilon(q, m.base)))


# ---------------------------------------------------------------------------
# Euler specialization


def euler_specialize(m: MotiveElement, table: dict | None = None) -> int:
    """Ring morphism to the integers: s goes to -1 (so L to 1), symbols
    to their declared Euler numbers.  Torsor classes of cyclic type
    default to their point count; everything else must be declared."""
    m = _subst_trivial(_as_element(m))
    table = table or {}
    total = Fraction(0)
    for syms, c in m.terms.items():
        v = Fraction(c.euler())
        for s in syms:
            if s.label in table:
                ev = Fraction(table[s.label])
            elif s.kind == "mun":
                ev = Fraction(s.n)
            elif s.kind == "pullback" and s.parts and s.parts[0].label in table:
                ev = Fraction(table[s.parts[0].label])
            else:
                raise MotiveError(
                    "no declared Euler number for symbol %s" % s
                )
            if s.inv == -1:
                if not ev:
                    raise MotiveError(
                        "Euler number of inverted class %s is zero" % s
                    )
                v = v / ev
            else:
                v = v * ev
        total += v
    if total.denominator != 1:
        raise MotiveError("Euler specialization is not an integer: %s" % total)
    return int(total)
