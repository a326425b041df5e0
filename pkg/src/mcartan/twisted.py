"""Twisted complexes and homotopy idempotents as explicit polynomial data.

A twisted complex is a formal direct sum of shifted objects with a strictly
filtration-increasing degree-1 matrix ``delta`` satisfying the Maurer-Cartan
equation; the equation is polynomial in the matrix entries because the
filtration has finitely many steps.

A homotopy idempotent on a twisted complex is a tower of components
``wp[d] in hom^(1-d)(V, V)`` satisfying, for every d >= 1,

    sum over r, s_1 + ... + s_r = d of mu^r(wp[s_1], ..., wp[s_r])
        =  wp[d-1]   (d even)   /   0   (d odd),

and the whole tower embeds as a single Maurer-Cartan element delta_wp on a
periodic complex (V, V, V, ...).  A finite window of that complex decides
the equations: paths contributing to an entry never leave the window, so the
windowed residual entries reproduce the idempotent equations exactly.  The
window entries carry a position-parity sign twist (-1)^p that compensates
the direct-sum offset signs (see docs/signs.md).
"""

from __future__ import annotations

from fractions import Fraction

from .ainf import (
    HomElt,
    ModelCategory,
    ParamPoly,
    Summand,
    deformed_mu,
    hom_cochain_complex,
    mc_residual,
)
from .homalg import NovikovField, cohomology, matrix_rank
from .novikov import INFINITY, NovikovSeries

__all__ = [
    "TwistedComplexDatum",
    "HomotopyIdempotent",
    "IdempotentWindow",
    "pre_twisted_space",
    "mc_polynomial_system",
    "check_idempotent",
    "idempotent_window",
    "endomorphism_cohomology",
    "is_point_like",
]


class TwistedComplexDatum:
    """Summand list plus a validated twisted differential.

    Wraps a single-object ModelCategory; ``self.model`` exposes the full
    structure maps of the twisted complex, ``self.name`` its object.
    """

    def __init__(self, cat, summands, delta_entries=None, name="V",
                 validate=True):
        self.base = cat
        self.name = name
        self.summands = [
            s if isinstance(s, Summand) else Summand(*s) for s in summands
        ]
        self.model = ModelCategory(cat, {name: (self.summands, None)})
        coeffs = {}
        for (j, k, basis_name), c in (delta_entries or {}).items():
            coeffs[ModelCategory.block_key(j, k, basis_name)] = (
                NovikovSeries.coerce(c)
            )
        self.delta = HomElt(self.model, name, name, coeffs)
        if validate:
            self._validate()
        if self.delta:
            self.model.set_delta(name, self.delta)

    def _validate(self):
        pair = (self.name, self.name)
        for key in self.delta.coeffs:
            j, k, _ = ModelCategory.split_key(key)
            if self.summands[k].filt < self.summands[j].filt + 1:
                raise ValueError(
                    f"delta entry {key} does not strictly increase the "
                    f"filtration: f({k}) < 1 + f({j})"
                )
            e = self.model.basis_element(pair, key)
            if e.degree != 1:
                raise ValueError(f"delta entry {key} has degree {e.degree}")
        res = mc_residual(self.delta, check=False)
        if res:
            raise ValueError(f"twisted differential fails Maurer-Cartan: {res!r}")

    def endomorphism_space(self):
        return self.model.hom_basis(self.name, self.name)

    def unit(self) -> HomElt:
        return self.model.unit(self.name)

    def element(self, entries) -> HomElt:
        coeffs = {}
        for (j, k, basis_name), c in entries.items():
            coeffs[ModelCategory.block_key(j, k, basis_name)] = c
        return HomElt(self.model, self.name, self.name, coeffs)


def pre_twisted_space(cat, summands):
    """Basis of the space of legal twisted differentials: the degree-1
    endomorphism components whose block filtration increases by at least 1."""
    datum = TwistedComplexDatum(cat, summands, None, validate=False)
    out = []
    for e in datum.endomorphism_space():
        j, k, _ = ModelCategory.split_key(e.name)
        if e.degree != 1:
            continue
        if datum.summands[k].filt >= datum.summands[j].filt + 1:
            out.append(e)
    return datum, out


def mc_polynomial_system(cat, summands):
    """The Maurer-Cartan equations as polynomials in the coordinates of the
    pre-twisted space.

    Returns (datum, variables, equations): ``variables`` is the basis of the
    pre-twisted space, coordinates t_0..t_{n-1}; ``equations`` maps each
    output basis name to a ParamPoly that must vanish.  Total degrees are
    bounded by the number of filtration steps.
    """
    datum, variables = pre_twisted_space(cat, summands)
    n = len(variables)
    coeffs = {
        e.name: ParamPoly.variable(i, n) for i, e in enumerate(variables)
    }
    generic = HomElt(datum.model, datum.name, datum.name, coeffs)
    residual = mc_residual(generic, check=False)
    equations = dict(residual.coeffs)
    return datum, variables, equations


class HomotopyIdempotent:
    """Tower wp[d] in hom^(1-d)(V, V), d >= 1, over a twisted complex."""

    def __init__(self, datum: TwistedComplexDatum, components: dict):
        self.datum = datum
        self.components = {}
        pair = (datum.name, datum.name)
        for d, elt in components.items():
            d = int(d)
            if d < 1:
                raise ValueError("components are indexed by d >= 1")
            if not isinstance(elt, HomElt):
                elt = datum.element(elt)
            for key in elt.coeffs:
                e = datum.model.basis_element(pair, key)
                if e.degree != 1 - d:
                    raise ValueError(
                        f"component {d} entry {key} has degree {e.degree}, "
                        f"expected {1 - d}"
                    )
            if elt:
                self.components[d] = elt

    def component(self, d) -> HomElt:
        elt = self.components.get(d)
        if elt is None:
            return self.datum.model.zero_elt(self.datum.name, self.datum.name)
        return elt

    def degree_bound(self) -> int:
        """Largest d with hom^(1-d)(V, V) nonzero; components beyond vanish."""
        degs = [e.degree for e in self.datum.endomorphism_space()]
        return 1 - min(degs) if degs else 1


def _compositions_of(d):
    """All ordered tuples of positive integers summing to d."""
    if d == 0:
        yield ()
        return
    for first in range(1, d + 1):
        for rest in _compositions_of(d - first):
            yield (first,) + rest


def check_idempotent(wp: HomotopyIdempotent) -> dict:
    """Evaluate the idempotent equations for every d up to the degree bound.

    Returns a dict d -> residual HomElt (left side minus right side); the
    idempotent is valid iff every residual vanishes.
    """
    datum = wp.datum
    model = datum.model
    cap = model.arity_cap
    unit = datum.unit()
    if unit is None:
        raise ValueError("the carrier complex has no strict unit")
    bound = wp.degree_bound() + 1
    report = {}
    for d in range(1, bound + 1):
        total = model.zero_elt(datum.name, datum.name)
        for parts in _compositions_of(d):
            if len(parts) > cap:
                continue
            args = [wp.component(s) for s in parts]
            if any(not a for a in args):
                continue
            total = total + model.mu(args)
        if d % 2 == 0:
            total = total - wp.component(d - 1)
        if total:
            report[d] = total
    return report


class IdempotentWindow:
    """A finite window of the periodic complex encoding an idempotent.

    Positions p = 0..N-1 stand for complex indices i = -p; entries go from
    position p to position p-s.  ``residual`` maps block pairs (p_src, p_dst)
    to the nonvanishing Maurer-Cartan residual entries.
    """

    def __init__(self, length, model, delta_wp, residual_entries):
        self.length = length
        self.model = model
        self.delta_wp = delta_wp
        self.residual = residual_entries

    @property
    def interior_ok(self) -> bool:
        return not self.residual


def idempotent_window(wp: HomotopyIdempotent, length: int) -> IdempotentWindow:
    """Encode the idempotent as a window Maurer-Cartan element and evaluate
    its residual.

    Entries follow the periodic pattern: one-step entries alternate wp[1] and
    wp[1] - e with the position parity, longer steps carry wp[s]; every entry
    is twisted by (-1)^p for the offset signs.  The residual vanishes exactly
    when the idempotent equations hold (every contributing path stays inside
    the window, so no boundary correction is needed).
    """
    datum = wp.datum
    N = int(length)
    if N < wp.degree_bound() + 2:
        raise ValueError(
            f"window of length {N} is too small; need at least "
            f"{wp.degree_bound() + 2}"
        )
    unit = datum.unit()
    if unit is None:
        raise ValueError("the carrier complex has no strict unit")
    parent = datum.model
    window = ModelCategory(
        parent,
        {
            "W": (
                [Summand(datum.name, p, Fraction(N - 1 - p)) for p in range(N)],
                None,
            )
        },
    )
    coeffs: dict = {}

    def place(p_src, p_dst, elt: HomElt, sign: int):
        for name, c in elt.coeffs.items():
            key = ModelCategory.block_key(p_src, p_dst, name)
            add = c if sign == 1 else -c
            if key in coeffs:
                add = coeffs[key] + add
            if add:
                coeffs[key] = add
            elif key in coeffs:
                del coeffs[key]

    for p in range(1, N):
        sign = 1 if p % 2 == 0 else -1
        one_step = wp.component(1)
        if p % 2 == 1:
            one_step = one_step - unit
        place(p, p - 1, one_step, sign)
        for s in range(2, p + 1):
            comp = wp.component(s)
            if comp:
                place(p, p - s, comp, sign)
    delta_wp = HomElt(window, "W", "W", coeffs)
    residual = mc_residual(delta_wp, check=False)
    entries: dict = {}
    for key, c in residual.coeffs.items():
        p_src, p_dst, name = ModelCategory.split_key(key)
        entries.setdefault((p_src, p_dst), {})[name] = c
    return IdempotentWindow(N, window, delta_wp, entries)


def endomorphism_cohomology(wp: HomotopyIdempotent, field=None):
    """Graded ranks of the corner algebra [wp^1] H^i [wp^1] and its products.

    Returns (ranks, corner_reps, product_pairing) where ``ranks`` maps degree
    to the rank of the idempotent-cornered cohomology, ``corner_reps`` maps
    degree to cochain representatives spanning the corner image, and
    ``product_pairing[(i, j)]`` is the list of projected products of the
    degree-i and degree-j corner representatives.
    """
    if field is None:
        field = NovikovField()
    datum = wp.datum
    model = datum.model
    name = datum.name
    cx, names = hom_cochain_complex(model, name, name, field=field)
    h = cohomology(cx)
    p1 = wp.component(1)

    def corner(elt: HomElt) -> HomElt:
        return model.mu([model.mu([p1, elt]), p1])

    ranks = {}
    corner_reps: dict = {}
    for k, summary in h.items():
        if summary.dim == 0:
            ranks[k] = 0
            corner_reps[k] = []
            continue
        images = []
        for rep in summary.representatives:
            elt = HomElt(
                model, name, name,
                {n: c for n, c in zip(names[k], rep) if c},
            )
            img = corner(elt)
            images.append((img, summary.project(img.coefficient_vector(names[k]))))
        coords = [c for _, c in images]
        ranks[k] = matrix_rank(coords, field) if coords else 0
        # keep an independent spanning subset of the corner image
        kept = []
        kept_coords: list = []
        for img, c in images:
            trial = kept_coords + [c]
            if matrix_rank(trial, field) > len(kept_coords):
                kept.append(img)
                kept_coords.append(c)
        corner_reps[k] = kept

    products = {}
    degrees = sorted(ranks)
    for i in degrees:
        for j in degrees:
            if i + j not in h:
                continue
            pairs = []
            for a in corner_reps[i]:
                for b in corner_reps[j]:
                    prod = model.mu([a, b])
                    vec = prod.coefficient_vector(names[i + j])
                    pairs.append(h[i + j].project(vec))
            if pairs:
                products[(i, j)] = pairs
    return ranks, corner_reps, products


def is_point_like(wp: HomotopyIdempotent, field=None) -> bool:
    """Corner cohomology ranks (1, 2, 1) in degrees (0, 1, 2), zero
    elsewhere, with nonvanishing product H^1 x H^1 -> H^2."""
    ranks, _, products = endomorphism_cohomology(wp, field=field)
    expected = {0: 1, 1: 2, 2: 1}
    for k, r in ranks.items():
        if r != expected.get(k, 0):
            return False
    for k in expected:
        if ranks.get(k, 0) != expected[k]:
            return False
    h1_products = products.get((1, 1), [])
    return any(any(c for c in vec) for vec in h1_products)
