"""Standard-form cdgas: tiered free graded algebras with a differential.

A standard-form algebra is built over a polynomial ring of degree-0
coordinates by adjoining generators tier by tier; the differential image
of a tier-t generator may only use strictly earlier tiers, and d*d = 0
is certified symbolically at build time.

Points are exact-rational points of the coordinate space lying on the
classical locus (every tier-1 image vanishes there).  The cotangent
fibre complex at a point is the linearization of the generator images;
its ranks give the pointwise cohomology dimensions, and minimality
means that every linearization matrix vanishes.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .graded import AlgebraElement, Derivation, GradedAlgebra, de_rham, partial
from . import linalg


class CdgaError(ValueError):
    pass


class StandardFormCdga:
    """A validated tiered cdga.  Use build_standard_form to construct."""

    def __init__(self, algebra: GradedAlgebra, images: dict[str, AlgebraElement]):
        self.algebra = algebra
        self.images = images
        self.base_names = [
            g.name for g in algebra.symbols[: algebra.ngens] if g.degree == 0
        ]
        tiers: dict[int, list[str]] = {}
        for g in algebra.symbols[: algebra.ngens]:
            if g.degree < 0:
                tiers.setdefault(-g.degree, []).append(g.name)
        self.tiers = {t: tiers[t] for t in sorted(tiers)}
        self.depth = max(self.tiers) if self.tiers else 0
        self._d = self._make_differential()

    def _make_differential(self) -> Derivation:
        alg = self.algebra
        imgs: dict[int, AlgebraElement] = {}
        for name, img in self.images.items():
            if img:
                imgs[alg.index(name)] = img
                # d anticommutes with d_dR, so d(d_dR g) = -d_dR(d g)
                imgs[alg.form_index(name)] = -de_rham(img)
        return Derivation(alg, 1, 1, imgs)

    def d(self, a: AlgebraElement) -> AlgebraElement:
        """The internal differential, extended to forms."""
        return self._d(a)

    def d_gen(self, name: str) -> AlgebraElement:
        return self.images.get(name, self.algebra.zero())

    def generators_of_degree(self, degree: int) -> list[str]:
        return [
            g.name
            for g in self.algebra.symbols[: self.algebra.ngens]
            if g.degree == degree
        ]

    def check_point(self, point: Mapping[str, Fraction]) -> None:
        """A valid point lies on Spec H0: all tier-1 images vanish there."""
        for name in self.base_names:
            if name not in point:
                raise CdgaError("point is missing coordinate %r" % name)
        for name in self.tiers.get(1, []):
            v = self.d_gen(name).evaluate(point)
            if v:
                raise CdgaError(
                    "point is not on the classical locus: d(%s) = %s there" % (name, v)
                )


def build_standard_form(
    algebra: GradedAlgebra, images: Mapping[str, AlgebraElement]
) -> StandardFormCdga:
    """Validate and build.  images maps negative-degree generator names to
    their differential images; omitted generators get d = 0.

    Raises CdgaError on degree mismatch, same-or-later tier references,
    or d*d != 0 (reporting the offending generator and residual).
    """
    alg = algebra
    gens = alg.symbols[: alg.ngens]
    by_name = {g.name: g for g in gens}
    images = dict(images)
    for name in images:
        if name not in by_name:
            raise CdgaError("image given for unknown generator %r" % name)
        if by_name[name].degree == 0:
            raise CdgaError("degree-0 coordinate %r cannot have a differential" % name)
    full: dict[str, AlgebraElement] = {}
    for g in gens:
        if g.degree < 0:
            full[g.name] = images.get(g.name, alg.zero())
    for name, img in full.items():
        if not img:
            continue
        want = by_name[name].degree + 1
        if not img.is_homogeneous() or img.degree() != want:
            raise CdgaError(
                "d(%s) must be homogeneous of degree %d, got %s" % (name, want, img)
            )
        if img.form_counts() not in ({0}, set()):
            raise CdgaError("d(%s) may not contain form symbols" % name)
        tier = -by_name[name].degree
        for m in img.terms:
            for j, _ in m:
                used = alg.symbols[j]
                if -used.degree >= tier:
                    raise CdgaError(
                        "d(%s) refers to %s of tier %d; only tiers below %d are allowed"
                        % (name, used.name, -used.degree, tier)
                    )
    out = StandardFormCdga(alg, full)
    for name, img in full.items():
        res = out.d(img)
        if res:
            raise CdgaError("d*d != 0 on %s: residual %s" % (name, res))
    return out


def h0_presentation(a: StandardFormCdga) -> list[AlgebraElement]:
    """Generators of the ideal I with H0 = (degree-0 ring)/I: the tier-1 images."""
    return [a.d_gen(name) for name in a.tiers.get(1, [])]


def fibre_complex(
    a: StandardFormCdga, point: Mapping[str, Fraction]
) -> dict[int, list[list[Fraction]]]:
    """Linearization matrices of the cotangent fibre at a point.

    Returns {j: M_j} where M_j has one row per generator of degree j+1 and
    one column per generator of degree j; the (h, g) entry is the
    coefficient of h in d(g), linearized and evaluated at the point.
    Consecutive matrices compose to zero.
    """
    a.check_point(point)
    degrees = sorted(
        {g.degree for g in a.algebra.symbols[: a.algebra.ngens]}
    )
    out: dict[int, list[list[Fraction]]] = {}
    for j in degrees:
        cols = a.generators_of_degree(j)
        rows = a.generators_of_degree(j + 1)
        if not cols:
            continue
        mat = []
        for h in rows:
            row = []
            for g in cols:
                row.append(partial(h, a.d_gen(g)).evaluate(point))
            mat.append(row)
        out[j] = mat
    return out


def cohomology_dims(
    a: StandardFormCdga, point: Mapping[str, Fraction]
) -> dict[int, int]:
    """dim H^j of the cotangent fibre at the point, by rank-nullity."""
    mats = fibre_complex(a, point)
    ranks = {j: linalg.rank(m) for j, m in mats.items()}
    dims = {}
    for j in mats:
        n_j = len(mats[j][0]) if mats[j] else len(a.generators_of_degree(j))
        dims[j] = n_j - ranks.get(j, 0) - ranks.get(j - 1, 0)
    return dims


def is_minimal_at(a: StandardFormCdga, point: Mapping[str, Fraction]) -> bool:
    """True iff every fibre linearization vanishes at the point."""
    mats = fibre_complex(a, point)
    return all(all(not v for v in row) for m in mats.values() for row in m)


def differential_on_forms(a: StandardFormCdga, omega: AlgebraElement) -> AlgebraElement:
    """The differential extended to form elements; anticommutes with d_dR."""
    return a.d(omega)
