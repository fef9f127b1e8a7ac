"""
Why max{0, x1, x2} needs depth
==============================

A sum of ReLUs of affine functions kinks along full lines in the plane, but
max{0, x1, x2} kinks along three half-lines.  So no Sum-of-ReLU computes it:
either some kink line of the sum crosses a region where the target is smooth,
or the sum is affine and misses the target's value outright.  Depth two,
however, suffices -- and both facts are checked exactly, in rationals.
"""
from fractions import Fraction

from relucirc import (
    evaluate,
    max0xy_depth2,
    nondiff_locus,
    pwl_sum,
    refute_max0xy,
    verify_depth2_max,
)


def fmt(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_point(p):
    return "(" + ", ".join(fmt(v) for v in p) + ")"


# --- two ReLU layers get it exactly right ------------------------------------
circuit = max0xy_depth2()
print(f"two-layer circuit: {circuit.relu_count} ReLU gates,"
      f" {len(circuit.layers)} hidden layers")
for p in ((3, -1), (-2, -5), (1, 4), (Fraction(1, 2), Fraction(1, 2))):
    print(f"  circuit{fmt_point(p)} = {fmt(evaluate(circuit, p))}"
          f"  (target {fmt(max(0, *p))})")
print(f"  equals the target on the default 41x41 grid: {verify_depth2_max(circuit)}")

# --- a flat candidate and where it breaks ------------------------------------
# 1/2 (x1 + x2 + |x1 - x2|) = max{x1, x2}: correct whenever the max is the
# larger coordinate, wrong once both go negative.
half = Fraction(1, 2)
candidate = pwl_sum([
    (half, (1, -1), 0), (half, (-1, 1), 0),    # |x1 - x2|
    (half, (1, 1), 0), (-half, (-1, -1), 0),   # x1 + x2, as a hinge pair
])
locus = nondiff_locus(candidate)
print("\ncandidate 1/2 (x1 + x2 + |x1 - x2|):")
for loc in locus.lines:
    n1, n2 = loc.line.normal
    print(f"  kink line {n1}*x1 + {n2}*x2 + {fmt(loc.line.offset)} = 0,"
          f" gradient jump {fmt_point(loc.jump)}")

report = refute_max0xy(candidate)
w = report.witness
print(f"  witness ({w.kind}): at {fmt_point(w.point)} along {fmt_point(w.direction)},")
print(f"    sided-derivative sum of the candidate: {fmt(w.f_result)}")
print(f"    sided-derivative sum of the target:    {fmt(w.target_result)}")
print(f"  max |candidate - target| on the grid: {fmt(report.grid_max_error)}")

# --- even the zero function gets a concrete witness --------------------------
flat = refute_max0xy(pwl_sum([]))
print(f"\nzero function: value witness at {fmt_point(flat.witness.point)},"
      f" candidate {fmt(flat.witness.f_result)}"
      f" vs target {fmt(flat.witness.target_result)}")
