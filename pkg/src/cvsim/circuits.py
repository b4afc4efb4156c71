"""Circuit-text generators for the preset experiments.

These emit ``.cvc`` source so the Monte-Carlo oracle can replay any preset
outcome by outcome. The golden corpus shipped in ``cvsim/corpus`` was produced
with the same layouts.
"""

from __future__ import annotations

from math import sqrt
from typing import Sequence

from .cluster import NETWORKS
from .elements import EprParams
from .protocols import UNITY_GAIN_REFLECTANCE


def _n(v: float) -> str:
    return format(v, ".17g")


def source(kind: str, *args: float) -> str:
    """Right-hand side of a ``mode`` line: ``vacuum``, ``coherent x p`` or ``squeezed vsq vanti [angle]``."""
    if kind == "vacuum":
        return "vacuum"
    if kind == "coherent":
        x, p = args
        return f"coherent x={_n(x)} p={_n(p)}"
    if kind == "squeezed":
        vsq, vanti, *angle = args
        return f"squeezed vsq={_n(vsq)} vanti={_n(vanti)} angle={_n(angle[0] if angle else 0.0)}"
    raise ValueError(f"unknown source kind {kind!r}")


def _epr_lines(a: str, b: str, epr: EprParams) -> list[str]:
    vax = epr.v_anti_x if epr.v_anti_x is not None else 1.0 / epr.v_sq_x
    vap = epr.v_anti_p if epr.v_anti_p is not None else 1.0 / epr.v_sq_p
    return [
        f"mode {a} {source('squeezed', epr.v_sq_x, vax, 0.0)}",
        f"mode {b} {source('squeezed', epr.v_sq_p, vap, 90.0)}",
    ]


def teleport_circuit(
    input_source: str,
    hops: Sequence[EprParams],
    gains: Sequence[tuple[float, float]] | None = None,
) -> str:
    """Sequential teleportation; hop ``i`` uses modes ``a{i}`` (Alice) and ``b{i}`` (Bob)."""
    gains = gains or [(1.0, 1.0)] * len(hops)
    lines = ["cvc 1", f"mode in {input_source}"]
    for i, epr in enumerate(hops, start=1):
        lines += _epr_lines(f"a{i}", f"b{i}", epr)
    cur = "in"
    for i, (gx, gp) in enumerate(gains, start=1):
        a, b = f"a{i}", f"b{i}"
        lines += [
            f"bs {a} {b} T=0.5",
            f"bs {a} {cur} T=0.5",
            f"homodyne {cur} angle=0 -> xu{i}",
            f"homodyne {a} angle=90 -> pv{i}",
            f"ff xu{i} -> displace {b} x gain={_n(gx * sqrt(2))}",
            f"ff pv{i} -> displace {b} p gain={_n(gp * sqrt(2))}",
        ]
        cur = b
    return "\n".join(lines) + "\n"


def gate_teleport_circuit(input_source: str, ancilla_v_sq: float, ancilla_v_anti: float | None = None) -> str:
    vanti = 1.0 / ancilla_v_sq if ancilla_v_anti is None else ancilla_v_anti
    return "\n".join(
        [
            "cvc 1",
            f"mode in {input_source}",
            f"mode anc {source('squeezed', ancilla_v_sq, vanti, 0.0)}",
            "qnd in anc G=1",
            "homodyne in angle=90 -> m",
            "ff m -> displace anc p gain=1",
        ]
    ) + "\n"


def qnd_offline_circuit(
    v_sq: float,
    v_anti: float | None = None,
    R: float = UNITY_GAIN_REFLECTANCE,
    inputs: tuple[str, str] = ("vacuum", "vacuum"),
) -> str:
    """Beam splitter, x-squeezer on s1 and p-squeezer on s2 (both offline), beam splitter."""
    vanti = 1.0 / v_sq if v_anti is None else v_anti
    ff = -sqrt((1.0 - R) / R)
    return "\n".join(
        [
            "cvc 1",
            f"mode s1 {inputs[0]}",
            f"mode s2 {inputs[1]}",
            f"mode ancA {source('squeezed', v_sq, vanti, 0.0)}",
            f"mode ancB {source('squeezed', v_sq, vanti, 90.0)}",
            f"bs s2 s1 T={_n(R / (1 + R))}",
            f"bs s1 ancA T={_n(R)}",
            "homodyne ancA angle=90 -> ma",
            f"ff ma -> displace s1 p gain={_n(ff)}",
            f"bs s2 ancB T={_n(R)}",
            "homodyne ancB angle=0 -> mb",
            f"ff mb -> displace s2 x gain={_n(ff)}",
            f"bs s1 s2 T={_n(1 / (1 + R))}",
        ]
    ) + "\n"


def cluster_circuit(shape: str, v_sq: float, v_anti: float | None = None) -> str:
    vanti = 1.0 / v_sq if v_anti is None else v_anti
    lines = ["cvc 1"] + [f"mode c{i} {source('squeezed', v_sq, vanti, 90.0)}" for i in range(1, 5)]
    for op, modes, param in NETWORKS[shape]:
        names = " ".join(f"c{m + 1}" for m in modes)
        if op == "bs":
            lines.append(f"bs {names} T={_n(param)}")
        elif op == "phase":
            lines.append(f"phase {names} deg={_n(param)}")
        else:
            lines.append(f"fourier {names}")
    return "\n".join(lines) + "\n"
