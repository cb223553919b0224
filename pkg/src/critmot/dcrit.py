"""Derived critical loci of polynomials and critical-chart bookkeeping.

A polynomial f on affine m-space has a shift -1 model whose coordinate
ring is freely extended by one degree -1 partner per coordinate, with
d(partner_j) = df/dx_j.  Classical critical charts carry f, its Jacobian
ideal, and an optional base point where all partials vanish; overlaps of
charts are compared by testing that the two potentials differ by an
element of the square of the overlap ideal, certified by explicit
cofactors found through bounded-degree linear algebra.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from . import linalg
from .darboux import DarbouxModel, DarbouxSpec, build_darboux
from .graded import AlgebraElement, GradedAlgebra, partial, substitute, transport


class DcritError(ValueError):
    pass


def affine_algebra(names: Sequence[str]) -> GradedAlgebra:
    """The coordinate ring of affine space: every generator in degree 0."""
    return GradedAlgebra((n, 0) for n in names)


def _require_classical(f: AlgebraElement, what: str = "polynomial") -> None:
    alg = f.algebra
    if any(g.degree != 0 for g in alg.symbols[: alg.ngens]):
        raise DcritError("%s must live in a degree-0 coordinate ring" % what)
    if f and f.form_counts() != {0}:
        raise DcritError("%s may not contain form symbols" % what)


def poly_degree(f: AlgebraElement) -> int:
    """Total polynomial degree (all generators count 1); 0 for constants
    and for the zero polynomial."""
    if not f:
        return 0
    return max(sum(e for _, e in m) for m in f.terms)


class CriticalChart:
    """A polynomial with its Jacobian ideal and an optional base point.

    The base point must be critical; the chart records the critical
    value there.  normalized() returns the chart whose representative
    has the critical value subtracted off, which is the normalization
    that section comparisons expect.
    """

    def __init__(
        self,
        f: AlgebraElement,
        base_point: Mapping[str, Fraction] | None = None,
    ):
        _require_classical(f)
        self.algebra = f.algebra
        self.f = f
        self.coords = self.algebra.generator_names()
        self.jacobian = [partial(x, f) for x in self.coords]
        self.base_point = dict(base_point) if base_point is not None else None
        self.critical_value: Fraction | None = None
        if self.base_point is not None:
            bad = [
                x
                for x, df in zip(self.coords, self.jacobian)
                if df.evaluate(self.base_point)
            ]
            if bad:
                raise DcritError(
                    "base point is not critical: d/d%s nonzero there" % bad[0]
                )
            self.critical_value = f.evaluate(self.base_point)

    def normalized(self) -> CriticalChart:
        if self.base_point is None:
            raise DcritError("chart has no base point to normalize at")
        return CriticalChart(self.f - self.critical_value, self.base_point)

    def is_critical(self, point: Mapping[str, Fraction]) -> bool:
        return all(not df.evaluate(point) for df in self.jacobian)


def chart_section_check(chart: CriticalChart, point: Mapping[str, Fraction]) -> bool:
    """Does the chart's current representative vanish at the point?

    This is the pointwise stand-in for "the potential restricts to zero
    on the reduced critical locus": charts whose value at the point is a
    nonzero critical value fail until normalized."""
    return not chart.f.evaluate(point)


def derived_crit(f: AlgebraElement) -> DarbouxModel:
    """The shift -1 model of the critical locus of f.

    Coordinates keep their names; the degree -1 partners pick up the
    "_anti" suffix, with d(partner_j) = df/dx_j, constant pairing form
    sum d_dR(partner_j) d_dR(x_j), and potential -f.
    """
    _require_classical(f)
    names = f.algebra.generator_names()
    spec = DarbouxSpec(-1, {0: len(names)}, base_names=names)
    spec.hamiltonian = transport(f, spec.algebra)
    return build_darboux(spec)


def point_dims(f: AlgebraElement, point: Mapping[str, Fraction]) -> dict:
    """Pointwise numerics at a critical point: the Hessian rank r, the
    tangent dimension m - r, the four-term restriction sequence dims
    (m-r, m, m, m-r), and the square-of-top-forms fibre exponent 2(m-r)."""
    _require_classical(f)
    names = f.algebra.generator_names()
    m = len(names)
    grads = [partial(x, f) for x in names]
    bad = [x for x, df in zip(names, grads) if df.evaluate(point)]
    if bad:
        raise DcritError("point is not critical: d/d%s nonzero there" % bad[0])
    hessian = [
        [partial(xj, gi).evaluate(point) for xj in names] for gi in grads
    ]
    r = linalg.rank(hessian)
    return {
        "hessian_rank": r,
        "tangent_dim": m - r,
        "sequence_dims": (m - r, m, m, m - r),
        "canonical_fibre_exponent": 2 * (m - r),
    }


class GlueDatum:
    """Two potentials mapped into a shared ambient space, with the ideal
    of the overlap: the comparison asks whether the difference of the
    pulled-back potentials lies in the square of that ideal.

    theta / theta_prime send each source coordinate to an ambient
    polynomial.  bound caps the total degree of candidate cofactors;
    None picks deg(difference) + 2.
    """

    def __init__(
        self,
        ambient: GradedAlgebra,
        ideal: Sequence[AlgebraElement],
        f: AlgebraElement,
        f_prime: AlgebraElement,
        theta: Mapping[str, AlgebraElement],
        theta_prime: Mapping[str, AlgebraElement],
        bound: int | None = None,
    ):
        if any(g.degree != 0 for g in ambient.symbols[: ambient.ngens]):
            raise DcritError("ambient must be a degree-0 coordinate ring")
        for g in ideal:
            _require_classical(g, "ideal generator")
            if not ambient.same_generators(g.algebra):
                raise DcritError("ideal generator lives outside the ambient ring")
        _require_classical(f, "potential")
        _require_classical(f_prime, "potential")
        self.ambient = ambient
        self.ideal = list(ideal)
        self.f = f
        self.f_prime = f_prime
        self.theta = dict(theta)
        self.theta_prime = dict(theta_prime)
        self.bound = bound

    def difference(self) -> AlgebraElement:
        lhs = substitute(self.f, self.theta, self.ambient)
        rhs = substitute(self.f_prime, self.theta_prime, self.ambient)
        return lhs - rhs


class GlueResult:
    """Boolean verdict plus, on success, the cofactor certificate
    writing the difference as sum c_ab * g_a * g_b with deg c_ab <= bound."""

    def __init__(self, ok, bound, difference, certificate, detail):
        self.ok = ok
        self.bound = bound
        self.difference = difference
        self.certificate = certificate  # {(a, b): AlgebraElement} or None
        self.detail = detail

    def __bool__(self):
        return self.ok

    def certificate_strings(self) -> dict[str, str]:
        if not self.certificate:
            return {}
        return {
            "g%d*g%d" % (a, b): str(c) for (a, b), c in self.certificate.items()
        }


def _monomials_up_to(alg: GradedAlgebra, bound: int) -> list[AlgebraElement]:
    names = alg.generator_names()
    out = [alg.one()]
    for total in range(1, bound + 1):
        for combo in combinations_with_replacement(names, total):
            m = alg.one()
            for n in combo:
                m = m * alg.gen(n)
            out.append(m)
    return out


def glue_check(g: GlueDatum) -> GlueResult:
    """Bounded-degree membership of the potential difference in the
    square of the overlap ideal, by exact linear algebra.

    Sound: a returned certificate is verified by re-expansion.  Complete
    only per bound: a False verdict means no cofactors of total degree
    <= bound exist (raising the bound can only turn False into True).
    """
    target = g.difference()
    if not target:
        return GlueResult(True, g.bound or 0, target, {}, "difference is zero")
    deg = poly_degree(target)
    bound = g.bound if g.bound is not None else deg + 2
    if bound < deg:
        raise DcritError(
            "degree bound %d is below the difference's degree %d" % (bound, deg)
        )
    if not g.ideal:
        return GlueResult(False, bound, target, None, "empty ideal, nonzero difference")

    pairs = [
        (a, b)
        for a in range(len(g.ideal))
        for b in range(a, len(g.ideal))
    ]
    products = {ab: g.ideal[ab[0]] * g.ideal[ab[1]] for ab in pairs}
    monomials = _monomials_up_to(g.ambient, bound)

    columns = []  # (pair, monomial elem, column polynomial)
    for ab in pairs:
        for mu in monomials:
            col = mu * products[ab]
            if col:
                columns.append((ab, mu, col))

    keys: set = set(target.terms)
    for _, _, col in columns:
        keys.update(col.terms)
    key_list = sorted(keys)
    matrix = [
        [col.terms.get(key, Fraction(0)) for _, _, col in columns]
        for key in key_list
    ]
    rhs = [target.terms.get(key, Fraction(0)) for key in key_list]
    sol = linalg.solve(matrix, rhs)
    if sol is None:
        return GlueResult(
            False, bound, target, None,
            "no cofactors of total degree <= %d express the difference" % bound,
        )
    cert: dict = {}
    for coeff, (ab, mu, _) in zip(sol, columns):
        if coeff:
            cert[ab] = cert.get(ab, g.ambient.zero()) + coeff * mu
    check = g.ambient.zero()
    for ab, c in cert.items():
        check = check + c * products[ab]
    if check - target:
        raise AssertionError("certificate failed re-expansion; solver bug")
    return GlueResult(True, bound, target, cert, "certificate verified by re-expansion")
