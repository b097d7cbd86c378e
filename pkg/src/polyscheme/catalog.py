"""Reduction structures, their degrees and parameter budgets.

A single reduction switches off the last structurally free entry of one
row of ``A`` or ``B``.  After ``r`` reductions a structure keeps ``m^2 - r``
free parameters in canonical form, so it can only match every polynomial
of degree ``d`` when ``d + 1 <= m^2 - r``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .scheme import ReductionPattern, structural_degree

__all__ = [
    "StructureEntry",
    "ChartRecord",
    "enumerate_structures",
    "max_admissible_degree",
    "chart_data",
    "pattern_from_counts",
    "reduce_once",
    "entries_to_csv",
    "chart_to_csv",
]

M_MAX = 8


@dataclass(frozen=True)
class StructureEntry:
    m: int
    r: int
    pattern: ReductionPattern
    degree: int

    @property
    def dof(self) -> int:
        return self.m * self.m - self.r

    @property
    def admissible(self) -> bool:
        return self.degree <= self.dof - 1


@dataclass(frozen=True)
class ChartRecord:
    m: int
    r: int
    degree: int
    admissible: bool
    witness: str  # pattern id of one structure with this degree


def pattern_from_counts(m: int, a_counts, b_counts) -> ReductionPattern:
    """Pattern with ``a_counts[k-1]`` trailing entries of A row ``k`` switched off (same for B)."""
    def rows(counts):
        out = []
        for k, n in enumerate(counts, start=1):
            if not 0 <= n <= k - 1:
                raise ValueError(f"row {k} admits 0..{k - 1} reductions, got {n}")
            out.append((False,) + (True,) * (k - n) + (False,) * n)
        return tuple(out)

    return ReductionPattern(rows(a_counts), rows(b_counts))


def reduce_once(pattern: ReductionPattern, side: str, k: int) -> ReductionPattern | None:
    """Switch off the last free entry of row ``k`` of ``side``; None if the factor would become empty."""
    A = [list(r) for r in pattern.A_mask]
    B = [list(r) for r in pattern.B_mask]
    row = (A if side == "A" else B)[k - 1]
    free = [j for j, v in enumerate(row) if v]
    if len(free) <= 1:
        return None
    row[free[-1]] = False
    return ReductionPattern(tuple(map(tuple, A)), tuple(map(tuple, B)))


def _compositions(caps, total):
    """All vectors ``0 <= v_i <= caps[i]`` with ``sum(v) == total``."""
    if not caps:
        if total == 0:
            yield ()
        return
    head, rest = caps[0], caps[1:]
    room = sum(rest)
    for v in range(max(0, total - room), min(head, total) + 1):
        for tail in _compositions(rest, total - v):
            yield (v,) + tail


def enumerate_structures(m: int, r_max: int, r_min: int = 0) -> list[StructureEntry]:
    """Every structure reachable from the unreduced one by ``r_min .. r_max`` single reductions.

    Reductions always act at the end of a row, so a structure is determined
    by how many reductions each of the ``2m`` rows received; row ``k`` takes
    at most ``k - 1`` so its factor stays nonempty.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    caps = tuple(k - 1 for k in range(1, m + 1)) * 2
    out = []
    for r in range(r_min, min(r_max, sum(caps)) + 1):
        for counts in _compositions(caps, r):
            p = pattern_from_counts(m, counts[:m], counts[m:])
            out.append(StructureEntry(m, r, p, structural_degree(p)))
    return out


def max_admissible_degree(m: int, r_max: int | None = None) -> tuple[int, list[StructureEntry]]:
    """Largest admissible structural degree with at most ``r_max`` reductions, plus all witnesses.

    ``r_max`` defaults to ``m``, enough to reach the maximum for every
    ``m <= 8``: the degree budget ``m^2 - r - 1`` only shrinks with ``r``.
    """
    if r_max is None:
        r_max = m
    best, wit = -1, []
    for e in enumerate_structures(m, r_max):
        if not e.admissible:
            continue
        if e.degree > best:
            best, wit = e.degree, [e]
        elif e.degree == best:
            wit.append(e)
    return best, wit


def chart_data(m_max: int, r_max: int, m_min: int = 2) -> list[ChartRecord]:
    """One record per distinct ``(m, r, degree)``; the witness is the first pattern in enumeration order."""
    if m_max > M_MAX:
        raise ValueError(f"m_max is capped at {M_MAX}")
    seen = {}
    for m in range(m_min, m_max + 1):
        for e in enumerate_structures(m, r_max):
            key = (m, e.r, e.degree)
            if key not in seen:
                seen[key] = ChartRecord(m, e.r, e.degree, e.admissible, e.pattern.pattern_id)
    return sorted(seen.values(), key=lambda c: (c.m, c.r, -c.degree))


_COLUMNS = ["m", "r", "degree", "admissible", "pattern-id"]


def entries_to_csv(entries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for e in entries:
        w.writerow([e.m, e.r, e.degree, str(e.admissible).lower(), e.pattern.pattern_id])
    return buf.getvalue()


def chart_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for c in records:
        w.writerow([c.m, c.r, c.degree, str(c.admissible).lower(), c.witness])
    return buf.getvalue()
