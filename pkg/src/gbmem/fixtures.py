"""Benchmark program generators.

Each returns a Program; all gates are Clifford+T.  ghz and bv are
CNOT-dominated with long idle stretches per qubit, which favors parking
qubits in memory; ising_like is T-dominated so runtime is pinned by the
factory rate on any architecture.
"""

from __future__ import annotations

from .compiler import Op, Program


def ghz(n: int) -> Program:
    """H on qubit 0 then a CNOT chain 0-1, 1-2, ..., n-2 - n-1."""
    if n < 2:
        raise ValueError("ghz needs n >= 2")
    ops = [Op("H", (0,))]
    ops += [Op("CNOT", (i, i + 1)) for i in range(n - 1)]
    return Program(n_qubits=n, ops=tuple(ops))


def bv(n: int, secret: int | None = None) -> Program:
    """Bernstein-Vazirani oracle pattern: fan-in CNOTs onto a target.

    Qubit n-1 is the target; secret defaults to all ones.  Hadamards
    bracket the oracle on the inputs.
    """
    if n < 2:
        raise ValueError("bv needs n >= 2")
    if secret is None:
        secret = (1 << (n - 1)) - 1
    ops = [Op("H", (i,)) for i in range(n - 1)]
    ops += [Op("CNOT", (i, n - 1))
            for i in range(n - 1) if (secret >> i) & 1]
    ops += [Op("H", (i,)) for i in range(n - 1)]
    return Program(n_qubits=n, ops=tuple(ops))


def adder_like(n: int) -> Program:
    """Ripple-carry shaped mix: per position a Toffoli decomposition
    skeleton (2 CNOTs, 2 T, 1 H) coupling neighbors."""
    if n < 3:
        raise ValueError("adder_like needs n >= 3")
    ops = []
    for i in range(n - 2):
        a, b, c = i, i + 1, i + 2
        ops += [Op("H", (c,)), Op("CNOT", (b, c)), Op("T", (c,)),
                Op("CNOT", (a, c)), Op("T", (b,)), Op("H", (c,))]
    return Program(n_qubits=n, ops=tuple(ops))


def ising_like(n: int, layers: int = 4, t_per_rot: int = 8) -> Program:
    """Trotterized Ising step: per layer, ZZ rotations as CNOT-T*-CNOT on
    even then odd bonds, then an X rotation (T*) per site.

    Each rotation is synthesized into t_per_rot sequential T gates, the
    way an Rz compiles into a T-heavy word, so the program is strongly
    T-dominated and its runtime is pinned by factory throughput.
    """
    if n < 2 or layers < 1 or t_per_rot < 1:
        raise ValueError("ising_like needs n >= 2, layers >= 1, "
                         "t_per_rot >= 1")
    ops = []
    for _ in range(layers):
        for start in (0, 1):
            for i in range(start, n - 1, 2):
                ops.append(Op("CNOT", (i, i + 1)))
                ops += [Op("T", (i + 1,))] * t_per_rot
                ops.append(Op("CNOT", (i, i + 1)))
        for i in range(n):
            ops += [Op("T", (i,))] * t_per_rot
    n_rot = (n - 1 + n) * layers
    return Program(n_qubits=n, ops=tuple(ops), n_rz=n_rot, eps_rz=1e-9)


FIXTURES = {"ghz": ghz, "bv": bv, "adder": adder_like, "ising": ising_like}
