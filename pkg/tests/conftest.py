"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's vectorized paths: circuits
are re-evaluated wire by wire with plain Fractions so the fast implementation
is checked against something it shares no code with.
"""

import random
from fractions import Fraction

import pytest

from relucirc import (
    Circuit,
    Gate,
    GateKind,
    TruthTable,
    affine,
    gate_wire,
    input_wire,
    vertex,
)


def scalar_forward(circuit, point):
    """Pre-activation of the output gate, computed wire by wire."""
    wires = {input_wire(i + 1): Fraction(x) for i, x in enumerate(point)}
    for k, layer in enumerate(circuit.layers, start=1):
        level = {}
        for j, g in enumerate(layer, start=1):
            t = g.form.value(wires)
            if g.kind is GateKind.RELU:
                t = max(t, Fraction(0))
            elif g.kind is GateKind.LTF:
                t = Fraction(1) if t >= 0 else Fraction(-1)
            level[gate_wire(k, j)] = t
        wires.update(level)
    t = circuit.output_gate.form.value(wires)
    if circuit.skip_wires is not None:
        t += circuit.skip_wires.value(wires)
    return t


def scalar_evaluate(circuit, point):
    t = scalar_forward(circuit, point)
    kind = circuit.output_gate.kind
    if kind is GateKind.RELU:
        return max(t, Fraction(0))
    if kind is GateKind.LTF:
        return Fraction(1) if t >= 0 else Fraction(-1)
    return t


def scalar_table(circuit):
    n = circuit.input_count
    signs = []
    for idx in range(1 << n):
        v = scalar_evaluate(circuit, vertex(n, idx))
        signs.append(1 if v == 1 else -1)
    return TruthTable.from_signs(n, signs)


def random_circuit(rng, n, depth, max_width, *, span=9, rational=True,
                   skip_ok=True, out_kind=GateKind.LTF, bottom_relu_only=False):
    """Random layered circuit; weights are small rationals by default."""

    def coeff():
        num = rng.randint(-span, span)
        den = rng.randint(1, 7) if rational else 1
        return Fraction(num, den)

    layers = []
    prev_width = n
    for k in range(1, depth):
        gates = []
        for _ in range(rng.randint(1, max_width)):
            w = {}
            for i in range(prev_width):
                if rng.random() < 0.8:
                    wire = input_wire(i + 1) if k == 1 else gate_wire(k - 1, i + 1)
                    w[wire] = coeff()
            relu = (k == 1 and bottom_relu_only) or rng.random() < 0.85
            gates.append(Gate(GateKind.RELU if relu else GateKind.LTF,
                              affine(w, coeff())))
        layers.append(tuple(gates))
        prev_width = len(gates)
    out_w = {}
    for i in range(prev_width):
        wire = input_wire(i + 1) if depth == 1 else gate_wire(depth - 1, i + 1)
        out_w[wire] = coeff()
    skip = None
    if skip_ok and rng.random() < 0.4:
        skip = affine({input_wire(rng.randint(1, n)): coeff()}, coeff())
    return Circuit(n, tuple(layers), Gate(out_kind, affine(out_w, coeff())), skip)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
