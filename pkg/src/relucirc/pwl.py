"""Piecewise-linear geometry in the plane.

A sum of weighted ReLU terms f(p) = sum_i c_i * max{0, <a_i, p> + b_i} is
differentiable everywhere except on a union of full lines.  The target
max{0, x1, x2} kinks on three half-lines instead, so any such sum either has
a kink where the target is smooth or is affine and misses the target's value
somewhere.  This module computes the kink locus and builds those witnesses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .circuit import (
    ArityError,
    Circuit,
    ContractError,
    GateKind,
    InvariantViolationError,
    Rational,
    evaluate,
    exact,
    gate_wire,
    parse_wire,
)

Point = tuple[Fraction, Fraction]


def _point(p: Sequence[Rational]) -> Point:
    if len(p) != 2:
        raise ArityError("expected a point in the plane")
    return (exact(p[0]), exact(p[1]))


@dataclass(frozen=True)
class PwlTerm:
    """c * max{0, <normal, p> + bias}; a zero normal makes a constant term."""

    coeff: Fraction
    normal: tuple[Fraction, Fraction]
    bias: Fraction

    def value(self, p: Point) -> Fraction:
        arg = self.normal[0] * p[0] + self.normal[1] * p[1] + self.bias
        return self.coeff * max(Fraction(0), arg)


def pwl_term(coeff: Rational, normal: Sequence[Rational], bias: Rational) -> PwlTerm:
    return PwlTerm(exact(coeff), _point(normal), exact(bias))


@dataclass(frozen=True)
class PwlSum:
    terms: tuple[PwlTerm, ...]

    def value(self, point: Sequence[Rational]) -> Fraction:
        p = _point(point)
        return sum((t.value(p) for t in self.terms), Fraction(0))

    def one_sided_derivative(
        self, point: Sequence[Rational], direction: Sequence[Rational]
    ) -> Fraction:
        """d/dt f(p + t v) at t = 0 from the right, exactly.

        A term strictly inside its active halfplane contributes <a, v>, one
        strictly outside contributes 0, and one sitting on its kink line
        contributes max{0, <a, v>}.
        """
        p = _point(point)
        v = _point(direction)
        total = Fraction(0)
        for t in self.terms:
            arg = t.normal[0] * p[0] + t.normal[1] * p[1] + t.bias
            slope = t.normal[0] * v[0] + t.normal[1] * v[1]
            if arg > 0:
                total += t.coeff * slope
            elif arg == 0:
                total += t.coeff * max(Fraction(0), slope)
        return total


def pwl_sum(triples: Iterable[tuple[Rational, Sequence[Rational], Rational]]) -> PwlSum:
    return PwlSum(tuple(pwl_term(c, a, b) for c, a, b in triples))


# ---------------------------------------------------------------------------
# canonical lines and the kink locus

@dataclass(frozen=True)
class CanonicalLine:
    """{p : <normal, p> + offset = 0} with a primitive lex-positive integer normal."""

    normal: tuple[int, int]
    offset: Fraction

    def contains(self, p: Point) -> bool:
        return self.normal[0] * p[0] + self.normal[1] * p[1] + self.offset == 0

    def base_point(self) -> Point:
        n1, n2 = self.normal
        s = n1 * n1 + n2 * n2
        return (Fraction(-self.offset * n1, s), Fraction(-self.offset * n2, s))

    def direction(self) -> tuple[int, int]:
        return (-self.normal[1], self.normal[0])


def canonical_line(
    normal: Sequence[Rational], bias: Rational
) -> tuple[CanonicalLine, Fraction]:
    """Canonical form of <normal, p> + bias = 0, plus the factor lam with
    normal = lam * (canonical normal).  Idempotent on already-canonical input."""
    a1, a2 = _point(normal)
    if a1 == 0 and a2 == 0:
        raise ContractError("a zero normal determines no line")
    q = math.lcm(a1.denominator, a2.denominator)
    i1, i2 = int(a1 * q), int(a2 * q)
    g = math.gcd(i1, i2)
    n1, n2 = i1 // g, i2 // g
    if n1 < 0 or (n1 == 0 and n2 < 0):
        n1, n2 = -n1, -n2
    lam = a1 / n1 if n1 else a2 / n2
    return CanonicalLine((n1, n2), exact(bias) / lam), lam


@dataclass(frozen=True)
class LocusLine:
    """A kink line together with the net gradient jump across it."""

    line: CanonicalLine
    jump: tuple[Fraction, Fraction]


@dataclass(frozen=True)
class LineSet:
    lines: tuple[LocusLine, ...]

    def __post_init__(self):
        if any(loc.jump == (0, 0) for loc in self.lines):
            raise InvariantViolationError("locus line with zero jump")


def nondiff_locus(f: PwlSum) -> LineSet:
    """The exact set of points where f is not differentiable, as full lines.

    Terms sharing a line aggregate: crossing the line along its normal, the
    gradient jumps by (sum_i c_i |lam_i|) * normal, where a_i = lam_i * normal.
    Lines where that sum cancels to zero are smooth and excluded.
    """
    acc: dict[CanonicalLine, Fraction] = {}
    for term in f.terms:
        if term.normal == (0, 0):
            continue
        line, lam = canonical_line(term.normal, term.bias)
        acc[line] = acc.get(line, Fraction(0)) + term.coeff * abs(lam)
    lines = []
    for line in sorted(acc, key=lambda l: (l.normal, l.offset)):
        j = acc[line]
        if j != 0:
            lines.append(
                LocusLine(line, (j * line.normal[0], j * line.normal[1]))
            )
    return LineSet(tuple(lines))


# ---------------------------------------------------------------------------
# the target max{0, x1, x2}

def max0xy_value(point: Sequence[Rational]) -> Fraction:
    p = _point(point)
    return max(Fraction(0), p[0], p[1])


def max0xy_one_sided(point: Sequence[Rational], direction: Sequence[Rational]) -> Fraction:
    """One-sided derivative of the target: largest slope among the maximizers."""
    p = _point(point)
    v = _point(direction)
    best = max(Fraction(0), p[0], p[1])
    slopes = []
    if best == 0:
        slopes.append(Fraction(0))
    if p[0] == best:
        slopes.append(v[0])
    if p[1] == best:
        slopes.append(v[1])
    return max(slopes)


def max0xy_smooth_at(point: Sequence[Rational]) -> bool:
    """The target is differentiable exactly where its maximizer is unique."""
    p = _point(point)
    best = max(Fraction(0), p[0], p[1])
    return [Fraction(0), p[0], p[1]].count(best) == 1


# ---------------------------------------------------------------------------
# refutation

@dataclass(frozen=True)
class Witness:
    """A point separating f from the target.

    kind "differentiability": along `direction` v at `point`, the sum of the
    two one-sided derivatives D_v + D_{-v} is zero for any function smooth
    there; `f_result` and `target_result` hold that sum for each side.
    kind "value": `f_result` and `target_result` are the two values at `point`.
    """

    kind: str
    point: Point
    direction: tuple[Fraction, Fraction] | None
    f_result: Fraction
    target_result: Fraction


@dataclass(frozen=True)
class RefutationReport:
    locus: LineSet
    witness: Witness
    grid_max_error: Fraction


def grid_points(radius: Rational, step: Rational) -> list[Fraction]:
    r, s = exact(radius), exact(step)
    if s <= 0 or r < 0:
        raise ArityError("grid needs radius >= 0 and step > 0")
    count = int(r / s)
    return [k * s for k in range(-count, count + 1)]


def grid_max_error(
    f: PwlSum, radius: Rational = 10, step: Rational = Fraction(1, 2)
) -> Fraction:
    axis = grid_points(radius, step)
    worst = Fraction(0)
    for p1 in axis:
        for p2 in axis:
            gap = abs(f.value((p1, p2)) - max(Fraction(0), p1, p2))
            if gap > worst:
                worst = gap
    return worst


def _smooth_point_on(line: CanonicalLine, others: Sequence[CanonicalLine]) -> Point:
    """A point of `line` where the target is differentiable and no other
    locus line passes.  Each other line crosses `line` at most once and the
    target rules out at most one half plus three points, so a short scan of
    integer parameters in both directions always lands."""
    base = line.base_point()
    d = line.direction()
    for k in range(1, len(others) + 30):
        for s in (1, -1):
            t = s * k
            p = (base[0] + t * d[0], base[1] + t * d[1])
            if not max0xy_smooth_at(p):
                continue
            if any(o.contains(p) for o in others):
                continue
            return p
    raise InvariantViolationError("no smooth probe point found on the line")


def refute_max0xy(
    f: PwlSum, radius: Rational = 10, step: Rational = Fraction(1, 2)
) -> RefutationReport:
    """Witness that f differs from max{0, x1, x2}.

    If f has any kink line, some point of it avoids the target's three kink
    rays, and the one-sided derivative sums differ there.  Otherwise f is
    affine, and one of four fixed probe points must disagree in value (no
    affine function matches the target on all four).
    """
    locus = nondiff_locus(f)
    err = grid_max_error(f, radius, step)
    if not locus.lines:
        for raw in ((0, 0), (1, 0), (0, 1), (-1, -1)):
            p = _point(raw)
            fv = f.value(p)
            tv = max0xy_value(p)
            if fv != tv:
                return RefutationReport(locus, Witness("value", p, None, fv, tv), err)
        raise InvariantViolationError("affine sum matched the target at all probes")
    loc = locus.lines[0]
    p = _smooth_point_on(loc.line, [other.line for other in locus.lines[1:]])
    v = (Fraction(loc.line.normal[0]), Fraction(loc.line.normal[1]))
    neg = (-v[0], -v[1])
    lhs = f.one_sided_derivative(p, v) + f.one_sided_derivative(p, neg)
    rhs = max0xy_one_sided(p, v) + max0xy_one_sided(p, neg)
    if lhs == rhs:
        raise InvariantViolationError("derivative sums coincide at a locus point")
    return RefutationReport(locus, Witness("differentiability", p, v, lhs, rhs), err)


# ---------------------------------------------------------------------------
# exact grid checks for circuits

def first_grid_mismatch(
    circuit: Circuit, radius: Rational = 10, step: Rational = Fraction(1, 2)
) -> tuple[Point, Fraction, Fraction] | None:
    """First grid point where the circuit and max{0, x1, x2} differ, if any."""
    if circuit.input_count != 2:
        raise ArityError("expected a circuit on two inputs")
    axis = grid_points(radius, step)
    for p1 in axis:
        for p2 in axis:
            got = evaluate(circuit, (p1, p2))
            want = max(Fraction(0), p1, p2)
            if got != want:
                return ((p1, p2), got, want)
    return None


def verify_depth2_max(
    circuit: Circuit, grid_radius: Rational = 10, grid_step: Rational = Fraction(1, 2)
) -> bool:
    """Exact equality with max{0, x1, x2} on the whole rational grid."""
    return first_grid_mismatch(circuit, grid_radius, grid_step) is None


# ---------------------------------------------------------------------------
# serialization

def pwl_to_json(f: PwlSum) -> dict:
    from .serialize import rational_to_str

    return {
        "terms": [
            {
                "coeff": rational_to_str(t.coeff),
                "normal": [rational_to_str(t.normal[0]), rational_to_str(t.normal[1])],
                "bias": rational_to_str(t.bias),
            }
            for t in f.terms
        ]
    }


def pwl_from_json(doc: dict) -> PwlSum:
    from .serialize import FormatError, rational_from_str

    if not isinstance(doc, dict) or not isinstance(doc.get("terms"), list):
        raise FormatError("expected an object with a 'terms' list")
    terms = []
    for i, raw in enumerate(doc["terms"]):
        try:
            normal = raw["normal"]
            if len(normal) != 2:
                raise FormatError(f"term {i}: normal must have two coordinates")
            terms.append(
                PwlTerm(
                    rational_from_str(raw["coeff"]),
                    (rational_from_str(normal[0]), rational_from_str(normal[1])),
                    rational_from_str(raw["bias"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"term {i} is malformed: {exc}") from exc
    return PwlSum(tuple(terms))


def dump_pwl(f: PwlSum, path: str) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pwl_to_json(f), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pwl(path: str) -> PwlSum:
    import json

    from .serialize import FormatError

    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
    return pwl_from_json(doc)


def refutation_to_json(report: RefutationReport) -> dict:
    from .serialize import rational_to_str

    w = report.witness
    witness = {
        "kind": w.kind,
        "point": [rational_to_str(w.point[0]), rational_to_str(w.point[1])],
        "direction": None
        if w.direction is None
        else [rational_to_str(w.direction[0]), rational_to_str(w.direction[1])],
        "fResult": rational_to_str(w.f_result),
        "targetResult": rational_to_str(w.target_result),
    }
    return {
        "locusLines": [
            {
                "normal": list(loc.line.normal),
                "offset": rational_to_str(loc.line.offset),
                "jump": [rational_to_str(loc.jump[0]), rational_to_str(loc.jump[1])],
            }
            for loc in report.locus.lines
        ],
        "witness": witness,
        "gridMaxError": rational_to_str(report.grid_max_error),
    }


def pwl_from_depth2(circuit: Circuit) -> PwlSum:
    """Flatten a one-hidden-layer SUM-of-ReLU circuit on two inputs to a PwlSum.

    Skip wires and the output bias are affine, so they decompose through
    t = max{0,t} - max{0,-t} and a constant max{0, 0 + 1} term.
    """
    if circuit.input_count != 2:
        raise ArityError("expected a circuit on two inputs")
    if len(circuit.layers) != 1 or any(
        g.kind is not GateKind.RELU for g in circuit.layers[0]
    ):
        raise ContractError("expected exactly one hidden layer of ReLU gates")
    if circuit.output_gate.kind is not GateKind.SUM:
        raise ContractError("expected a SUM output gate")

    def input_pair(form) -> tuple[Fraction, Fraction]:
        w = [Fraction(0), Fraction(0)]
        for wire, c in form.weights.items():
            _, i, _ = parse_wire(wire)
            w[i - 1] = c
        return (w[0], w[1])

    terms: list[PwlTerm] = []
    out_form = circuit.output_gate.form
    for j, gate in enumerate(circuit.layers[0], start=1):
        alpha = out_form.weights.get(gate_wire(1, j), Fraction(0))
        if alpha:
            terms.append(PwlTerm(alpha, input_pair(gate.form), gate.form.bias))
    affine_w = (Fraction(0), Fraction(0))
    const = out_form.bias
    if circuit.skip_wires is not None:
        affine_w = input_pair(circuit.skip_wires)
        const += circuit.skip_wires.bias
    for axis in range(2):
        c = affine_w[axis]
        if c:
            e = (Fraction(1), Fraction(0)) if axis == 0 else (Fraction(0), Fraction(1))
            terms.append(PwlTerm(c, e, Fraction(0)))
            terms.append(PwlTerm(-c, (-e[0], -e[1]), Fraction(0)))
    if const:
        terms.append(PwlTerm(const, (Fraction(0), Fraction(0)), Fraction(1)))
    return PwlSum(tuple(terms))
