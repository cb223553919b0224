"""Shifted symplectic models in paired Darboux coordinates.

A model of shift k < 0 is a standard-form cdga whose generators come in
pairs (x_i, y_i) of degrees (-i, k+i), plus a self-paired middle block z
at degree k/2 when k = 2 mod 4, plus optional extra generators w at
degree k-1 for quotient-stack presentations.  The constant pairing form
omega0, the Hamiltonian H of degree k+1, and the differential d(g) =
{H, g} are tied together by the master equation {H, H} = 0.

All identities (d*d = 0, d omega0 = 0, the potential identities for the
primitive phi, bracket/differential consistency) are verified exactly at
build time; there is no numerical tolerance anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from . import linalg
from .cdga import CdgaError, StandardFormCdga, build_standard_form
from .graded import (
    AlgebraElement,
    GradedAlgebra,
    contract,
    de_rham,
    partial,
)


class DarbouxError(ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _classify(k: int) -> tuple[str, int, int]:
    """Return (kind, d, top) for the shift k: top is the largest x-block
    index; the z-block, when present, sits at index top + 1."""
    if k >= 0:
        raise DarbouxError("shift k must be negative, got %d" % k)
    a = -k
    if a % 2 == 1:
        return "odd", (a - 1) // 2, (a - 1) // 2
    if a % 4 == 0:
        return "div4", a // 4, a // 2
    return "strong2mod4", (a - 2) // 4, (a - 2) // 2


class DarbouxSpec:
    """Shift, block sizes, generator roster, and the Hamiltonian.

    blocks maps block index i to the number of (x_i, y_i) pairs; for
    k = 2 mod 4 the extra key top+1 sizes the self-paired z-block.
    Block 0 pairs a degree-0 coordinate with its degree-k partner; the
    coordinates can be given custom names (partners get name + "_anti").
    stacky adds that many unpaired generators w_j in degree k-1.
    """

    def __init__(
        self,
        k: int,
        blocks: Mapping[int, int],
        base_names: Sequence[str] | None = None,
        stacky: int = 0,
    ):
        self.k = k
        self.kind, self.d, self.top = _classify(k)
        zkey = self.top + 1 if self.kind == "strong2mod4" else None
        for i, m in blocks.items():
            if not (0 <= i <= self.top or i == zkey):
                raise DarbouxError("no block at index %d for shift %d" % (i, k))
            if m < 0:
                raise DarbouxError("block %d has negative size" % i)
        self.blocks = {i: blocks.get(i, 0) for i in range(self.top + 1)}
        self.z_count = blocks.get(zkey, 0) if zkey is not None else 0
        if stacky < 0:
            raise DarbouxError("stacky count must be >= 0")
        self.stacky = stacky

        m0 = self.blocks[0]
        if base_names is not None:
            base_names = list(base_names)
            if blocks.get(0, len(base_names)) != len(base_names):
                raise DarbouxError("block 0 size disagrees with base_names")
            self.blocks[0] = m0 = len(base_names)

        self.pairs: list[tuple[str, str, int]] = []
        roster: list[tuple[str, int, int, int, int]] = []  # name, deg, species, i, j
        for i in range(self.top + 1):
            for j in range(1, self.blocks[i] + 1):
                if i == 0 and base_names is not None:
                    xn, yn = base_names[j - 1], base_names[j - 1] + "_anti"
                else:
                    xn, yn = "x%d_%d" % (i, j), "y%d_%d" % (i, j)
                self.pairs.append((xn, yn, i))
                roster.append((xn, -i, 0, i, j))
                roster.append((yn, k + i, 2, i, j))
        self.z_names = ["z_%d" % j for j in range(1, self.z_count + 1)]
        for j, zn in enumerate(self.z_names, start=1):
            roster.append((zn, k // 2, 1, self.top + 1, j))
        self.w_names = ["w_%d" % j for j in range(1, stacky + 1)]
        for j, wn in enumerate(self.w_names, start=1):
            roster.append((wn, k - 1, 3, 0, j))
        roster.sort(key=lambda r: (-r[1], r[2], r[3], r[4]))
        self.algebra = GradedAlgebra((name, deg) for name, deg, *_ in roster)

        self.hamiltonian: AlgebraElement | None = None
        self.w_images: dict[str, AlgebraElement] = {}

    # convenience accessors

    def var(self, name: str) -> AlgebraElement:
        return self.algebra.gen(name)

    def vars(self) -> dict[str, AlgebraElement]:
        return {n: self.algebra.gen(n) for n in self.algebra.generator_names()}

    def base_names(self) -> list[str]:
        return [xn for xn, _, i in self.pairs if i == 0]

    def core_names(self) -> list[str]:
        """Generators of the symplectic block (everything except the w's)."""
        out = []
        for xn, yn, _ in self.pairs:
            out.extend((xn, yn))
        out.extend(self.z_names)
        return out


# sign tables for the differential d(g) = {H, g}.  The x-side always
# carries +1; the y-side alternates for even shifts, and the self-paired
# z-block carries 1/2 so that the pairing block of omega0 (which is
# 2*identity there) inverts consistently.

def _tau(kind: str, i: int) -> int:
    if kind == "odd":
        return 1
    return -1 if i % 2 == 0 else 1


_KAPPA_Z = Fraction(1, 2)


def _check_hamiltonian(spec: DarbouxSpec, h: AlgebraElement) -> None:
    if not spec.algebra.same_generators(h.algebra):
        raise DarbouxError("Hamiltonian lives over a different generator set")
    if h and h.form_counts() != {0}:
        raise DarbouxError("Hamiltonian may not contain form symbols")
    if h and (not h.is_homogeneous() or h.degree() != spec.k + 1):
        raise DarbouxError(
            "Hamiltonian must be homogeneous of degree %d" % (spec.k + 1)
        )
    if spec.w_names and h.uses(spec.w_names):
        raise DarbouxError("Hamiltonian may not involve the stacky generators")


def poisson_bracket(
    model_or_spec, a: AlgebraElement, b: AlgebraElement
) -> AlgebraElement:
    """The degree -k biderivation dual to the Darboux pairing form.

    {a, -} acts as the derivation whose generator images are read off
    the partials of a against the paired partner, so {H, g} = d(g) and
    the graded Leibniz rule holds on both slots.
    """
    spec = model_or_spec.spec if isinstance(model_or_spec, DarbouxModel) else model_or_spec
    out = spec.algebra.zero()
    for xn, yn, i in spec.pairs:
        t = _tau(spec.kind, i)
        out = out + partial(yn, a) * partial(xn, b) + t * (
            partial(xn, a) * partial(yn, b)
        )
    for zn in spec.z_names:
        out = out + _KAPPA_Z * (partial(zn, a) * partial(zn, b))
    return out


def master_equation_residual(spec: DarbouxSpec) -> AlgebraElement:
    """The obstruction to {H, H} = 0, in the normalization natural to
    each shift class: the block-signed sum of partial products for odd
    and 2 mod 4 shifts (with the quarter-square z-term in the latter),
    and the full self-bracket for shifts divisible by 4."""
    h = spec.hamiltonian
    if h is None:
        raise DarbouxError("spec has no Hamiltonian")
    _check_hamiltonian(spec, h)
    if spec.kind == "div4":
        return poisson_bracket(spec, h, h)
    out = spec.algebra.zero()
    for xn, yn, i in spec.pairs:
        if i == 0:
            continue  # the degree-0 partner never appears in H for degree reasons
        out = out + _tau(spec.kind, i) * (partial(xn, h) * partial(yn, h))
    for zn in spec.z_names:
        out = out + Fraction(1, 4) * (partial(zn, h) ** 2)
    return out


def _pairing_form(spec: DarbouxSpec) -> AlgebraElement:
    alg = spec.algebra
    out = alg.zero()
    for xn, yn, _ in spec.pairs:
        out = out + alg.form(yn) * alg.form(xn)
    for zn in spec.z_names:
        out = out + alg.form(zn) * alg.form(zn)
    return out


def _differential_images(spec: DarbouxSpec) -> dict[str, AlgebraElement]:
    h = spec.hamiltonian
    images: dict[str, AlgebraElement] = {}
    for xn, yn, i in spec.pairs:
        if i > 0:
            images[xn] = partial(yn, h)
        images[yn] = _tau(spec.kind, i) * partial(xn, h)
    for zn in spec.z_names:
        images[zn] = _KAPPA_Z * partial(zn, h)
    for wn, img in spec.w_images.items():
        if wn not in spec.w_names:
            raise DarbouxError("w-image given for unknown generator %r" % wn)
        images[wn] = img
    return images


def _primitive(spec: DarbouxSpec) -> AlgebraElement:
    """The 1-form phi with d_dR(phi) = omega0 and d(phi) = -d_dR(Phi).

    The y-side of block i carries weight (|k| - i)/|k| and the x-side
    carries i/|k| times the same block sign as the differential; the
    self-paired z-block carries weight 1.  Solving the two identities
    simultaneously pins these weights (up to the kernel of the system,
    where this is the unique choice extending the odd-shift pattern).
    """
    alg = spec.algebra
    n = -spec.k
    out = alg.zero()
    for xn, yn, i in spec.pairs:
        out = out + Fraction(n - i, n) * (alg.gen(yn) * alg.form(xn))
        if i:
            out = out + Fraction(_tau(spec.kind, i) * i, n) * (
                alg.gen(xn) * alg.form(yn)
            )
    for zn in spec.z_names:
        out = out + alg.gen(zn) * alg.form(zn)
    return out


class DarbouxModel:
    """A verified model: the cdga, the pairing form, and the potentials."""

    def __init__(
        self,
        spec: DarbouxSpec,
        cdga: StandardFormCdga,
        omega0: AlgebraElement,
        phi_big: AlgebraElement,
        phi_small: AlgebraElement | None,
    ):
        self.spec = spec
        self.cdga = cdga
        self.omega0 = omega0
        self.phi_big = phi_big        # -H / |k|; d-closed once the master equation holds
        self.phi_small = phi_small    # weighted primitive 1-form of omega0
        self.kind = "stacky" if spec.stacky else spec.kind
        self.k = spec.k

    @property
    def algebra(self) -> GradedAlgebra:
        return self.spec.algebra

    @property
    def hamiltonian(self) -> AlgebraElement:
        return self.spec.hamiltonian

    def d(self, a: AlgebraElement) -> AlgebraElement:
        return self.cdga.d(a)

    def bracket(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        return poisson_bracket(self.spec, a, b)

    def verify(self, points: Iterable[Mapping[str, Fraction]] = ()) -> list:
        """Re-run every defining identity; returns (name, ok, detail) triples."""
        spec, h = self.spec, self.spec.hamiltonian
        checks = []

        def add(name, elem):
            checks.append((name, not elem, "0" if not elem else str(elem)))

        add("master-equation", master_equation_residual(spec))
        bad_sq = [n for n, img in self.cdga.images.items() if self.d(img)]
        checks.append(
            ("differential-squares-to-zero", not bad_sq, ", ".join(bad_sq))
        )
        add("self-bracket", self.bracket(h, h))
        mismatch = spec.algebra.zero()
        for name in spec.core_names():
            g = spec.algebra.gen(name)
            mismatch = mismatch + (self.d(g) - self.bracket(h, g))
        add("bracket-matches-differential", mismatch)
        add("d-of-potential", self.d(self.phi_big))
        add("d-of-pairing-form", self.d(self.omega0))
        add("de-rham-of-pairing-form", de_rham(self.omega0))
        if self.phi_small is not None:
            add("primitive-recovers-pairing-form", de_rham(self.phi_small) - self.omega0)
            add(
                "potential-pairs-with-primitive",
                de_rham(self.phi_big) + self.d(self.phi_small),
            )
        for p, point in enumerate(points):
            ok = nondegenerate_at(self.omega0, point)
            checks.append(("nondegenerate-at-point-%d" % p, ok, ""))
        return checks


def build_darboux(spec: DarbouxSpec, verify: bool = True) -> DarbouxModel:
    """Assemble and certify the model for a spec whose Hamiltonian solves
    the master equation.  Raises DarbouxError (carrying the residual)
    when it does not, and on any failed identity."""
    if spec.hamiltonian is None:
        raise DarbouxError("spec has no Hamiltonian")
    res = master_equation_residual(spec)
    if res:
        raise DarbouxError(
            "master equation fails: residual %s" % res, residual=res
        )
    try:
        cdga = build_standard_form(spec.algebra, _differential_images(spec))
    except CdgaError as e:
        raise DarbouxError("differential is inconsistent: %s" % e) from e
    model = DarbouxModel(
        spec,
        cdga,
        _pairing_form(spec),
        spec.hamiltonian / spec.k,  # -H / |k|
        _primitive(spec),
    )
    if verify:
        bad = [(n, d) for n, ok, d in model.verify() if not ok]
        if bad:
            raise DarbouxError(
                "model identities fail: %s"
                % "; ".join("%s -> %s" % nd for nd in bad)
            )
    return model


def build_stacky_darboux(spec: DarbouxSpec, verify: bool = True) -> DarbouxModel:
    """Like build_darboux, allowing extra w-generators with user images.

    The symplectic identities are checked on the paired core; the only
    condition on the supplied d(w_j) is homogeneity and d*d = 0."""
    for wn, img in spec.w_images.items():
        if img and (not img.is_homogeneous() or img.degree() != spec.k):
            raise DarbouxError(
                "d(%s) must be homogeneous of degree %d" % (wn, spec.k)
            )
    return build_darboux(spec, verify=verify)


def nondegenerate_at(omega0: AlgebraElement, point: Mapping[str, Fraction]) -> bool:
    """Whether the pairing blocks of a 2-form are all invertible at a point.

    Generators of degree a pair against generators of degree k - a; every
    block must be square and of full rank.  A zero form on a nonempty
    algebra is degenerate by convention.
    """
    alg = omega0.algebra
    if not omega0:
        return alg.ngens == 0
    if omega0.form_counts() != {2}:
        raise DarbouxError("expected a homogeneous 2-form")
    if not omega0.is_homogeneous():
        raise DarbouxError("expected a 2-form of pure degree")
    k = omega0.degree()
    by_degree: dict[int, list[str]] = {}
    for g in alg.symbols[: alg.ngens]:
        by_degree.setdefault(g.degree, []).append(g.name)
    for name in by_degree.get(0, []):
        if name not in point:
            raise CdgaError("point is missing coordinate %r" % name)
    seen = set()
    for a, rows in by_degree.items():
        b = k - a
        if frozenset((a, b)) in seen:
            continue
        seen.add(frozenset((a, b)))
        cols = by_degree.get(b)
        if cols is None:
            return False
        matrix = []
        for g in rows:
            row = []
            half = contract(g, omega0)
            for hname in cols:
                row.append(contract(hname, half).evaluate(point))
            matrix.append(row)
        if not linalg.is_invertible(matrix):
            return False
    return True


# -- random model generation (test suites and the CLI's sampling mode) --

def _xside_monomials(spec: DarbouxSpec, degree: int, max_factors: int):
    """All monomials of the given graded degree in the x-generators with
    at most max_factors factors, as elements.  Never touches y, z or w,
    so a Hamiltonian drawn from these solves the master equation for free."""
    alg = spec.algebra
    neg = [xn for xn, _, i in spec.pairs if i > 0]
    base = [xn for xn, _, i in spec.pairs if i == 0]
    out: list[AlgebraElement] = []

    def go(idx, deg_left, fac_left, acc):
        # deg_left is the degree still to absorb; always <= 0
        if deg_left == 0:
            for m in _base_monomials(alg, base, fac_left):
                out.append(acc * m)
            return
        if idx == len(neg) or fac_left == 0:
            return
        go(idx + 1, deg_left, fac_left, acc)
        g, dg = neg[idx], alg.degree_of(neg[idx])
        cap = 1 if dg % 2 else fac_left
        elem = acc
        for e in range(1, cap + 1):
            if fac_left - e < 0 or deg_left - e * dg > 0:
                break
            elem = elem * alg.gen(g)
            if not elem:
                break
            go(idx + 1, deg_left - e * dg, fac_left - e, elem)

    go(0, degree, max_factors, alg.one())
    return [m for m in out if m]


def _base_monomials(alg, base, fac_left):
    outs = [alg.one()]
    for count in range(1, fac_left + 1):
        for combo in combinations_with_replacement(base, count):
            m = alg.one()
            for b in combo:
                m = m * alg.gen(b)
            outs.append(m)
    return outs


def sample_spec(k: int, rng, max_mult: int = 3, max_terms: int = 4) -> DarbouxSpec:
    """A random odd-shift spec with a y-free Hamiltonian (for which the
    master equation holds for free).  Degrees of freedom are kept small;
    this is a test-corpus generator, not a survey of the moduli space."""
    kind, d, top = _classify(k)
    blocks = {i: rng.randint(0 if i else 1, max_mult) for i in range(top + 1)}
    spec = DarbouxSpec(k, blocks)
    pool = _xside_monomials(spec, k + 1, 4)
    h = spec.algebra.zero()
    if pool:
        for _ in range(rng.randint(1, max_terms)):
            c = Fraction(rng.randint(-4, 4), rng.choice((1, 2, 3)))
            h = h + c * rng.choice(pool)
    spec.hamiltonian = h
    return spec


def sample_point(spec: DarbouxSpec, rng) -> dict[str, Fraction]:
    return {
        name: Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
        for name in spec.base_names()
    }
