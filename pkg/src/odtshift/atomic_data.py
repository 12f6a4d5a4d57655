"""Hyperfine states, dipole transitions and the catalog text format.

A catalog is a flat list of |F> -> |F'> lines, each carrying a vacuum
wavelength, the J-reduced dipole matrix element <J||er||J'> in atomic
units, and (for lines a probe addresses) the natural linewidth.  The
bundled Rb-87 file is transcribed from standard line-data compilations;
nuclear spin travels with the file so other alkalis remain possible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterator, Optional

from .angular import AngularMomentumError, HalfInt

__all__ = [
    "CONSTANTS",
    "Catalog",
    "CatalogError",
    "HyperfineState",
    "PhysicalConstants",
    "Transition",
    "bundled_catalog",
    "load_catalog",
    "parse_catalog",
    "serialize_catalog",
    "transitions_from",
]


class CatalogError(ValueError):
    """Catalog text cannot be parsed, or a physical invariant is violated."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 exact values plus the beta conversion constant.

    beta_conversion makes (2J+1)/(2J'+1) * K * D^2 / lambda^3 equal the
    line's partial decay rate in rad/s when lambda is expressed in
    Angstroms and D in atomic units; the unit convention was frozen
    empirically against the known Rb-87 trap numbers.
    """

    c: float
    h: float
    hbar: float
    kB: float
    beta_conversion: float


CONSTANTS = PhysicalConstants(
    c=299792458.0,
    h=6.62607015e-34,
    hbar=1.054571817e-34,
    kB=1.380649e-23,
    beta_conversion=2.02613e18,
)


@dataclass(frozen=True)
class HyperfineState:
    """One hyperfine level (term, J, F), optionally narrowed to a single
    mF sublevel; mF=None means all sublevels."""

    term: str
    J: HalfInt
    F: HalfInt
    mF: Optional[HalfInt] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "J", HalfInt.of(self.J))
            object.__setattr__(self, "F", HalfInt.of(self.F))
            if self.mF is not None:
                object.__setattr__(self, "mF", HalfInt.of(self.mF))
        except AngularMomentumError as exc:
            raise CatalogError(str(exc)) from exc
        if self.J.twice_value < 0 or self.F.twice_value < 0:
            raise CatalogError(f"negative J or F in {self.term}")
        if self.mF is not None:
            tF, tm = self.F.twice_value, self.mF.twice_value
            if abs(tm) > tF or (tF - tm) % 2:
                raise CatalogError(
                    f"mF={self.mF} invalid for F={self.F} in {self.term}")

    @property
    def level(self) -> "HyperfineState":
        """The same level with mF stripped."""
        return HyperfineState(self.term, self.J, self.F) if self.mF is not None else self

    def sublevels(self) -> Iterator["HyperfineState"]:
        """Concrete Zeeman states, mF = -F..F (just self when mF is set)."""
        if self.mF is not None:
            yield self
            return
        tF = self.F.twice_value
        for tm in range(-tF, tF + 1, 2):
            yield HyperfineState(self.term, self.J, self.F, HalfInt(tm))

    def __str__(self) -> str:
        base = f"{self.term} F={self.F}"
        return base if self.mF is None else f"{base} mF={self.mF}"


@dataclass(frozen=True)
class Transition:
    """One dipole-allowed |F> -> |F'> line."""

    lower: HyperfineState
    upper: HyperfineState
    wavelength_nm: float
    dipole_au: float
    linewidth_mhz: Optional[float] = None

    def __post_init__(self):
        if self.lower.mF is not None or self.upper.mF is not None:
            raise CatalogError("catalog transitions must not carry mF")
        if not self.wavelength_nm > 0:
            raise CatalogError(f"wavelength must be positive in {self}")
        if self.dipole_au < 0:
            raise CatalogError(f"dipole moment must be >= 0 in {self}")
        if self.linewidth_mhz is not None and self.linewidth_mhz <= 0:
            raise CatalogError(f"linewidth must be positive in {self}")
        dF = abs(self.lower.F.twice_value - self.upper.F.twice_value)
        dJ = abs(self.lower.J.twice_value - self.upper.J.twice_value)
        if dF > 2 or dJ > 2:
            raise CatalogError(f"dipole selection rule violated in {self}")
        if self.lower.F.twice_value == 0 and self.upper.F.twice_value == 0:
            raise CatalogError(f"F=0 -> F'=0 is dipole forbidden in {self}")

    @property
    def omega(self) -> float:
        """Angular transition frequency 2*pi*c/lambda in rad/s."""
        return 2 * math.pi * CONSTANTS.c / (self.wavelength_nm * 1e-9)

    @property
    def gamma(self) -> Optional[float]:
        """Natural linewidth as angular frequency in rad/s, if known."""
        if self.linewidth_mhz is None:
            return None
        return 2 * math.pi * self.linewidth_mhz * 1e6

    def __str__(self) -> str:
        return f"{self.lower} -> {self.upper} @ {self.wavelength_nm} nm"


@dataclass(frozen=True)
class Catalog:
    atom: str
    nuclear_spin: HalfInt
    transitions: tuple

    def __post_init__(self):
        object.__setattr__(self, "nuclear_spin", HalfInt.of(self.nuclear_spin))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        tI = self.nuclear_spin.twice_value
        seen = set()
        for t in self.transitions:
            for st in (t.lower, t.upper):
                tJ, tF = st.J.twice_value, st.F.twice_value
                if not (abs(tJ - tI) <= tF <= tJ + tI) or (tJ + tI - tF) % 2:
                    raise CatalogError(
                        f"F={st.F} inconsistent with J={st.J}, I={self.nuclear_spin}"
                        f" in {t}")
            key = ((t.lower.term, t.lower.J, t.lower.F),
                   (t.upper.term, t.upper.J, t.upper.F))
            if key in seen:
                raise CatalogError(f"duplicate transition {t}")
            seen.add(key)


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse_catalog(text: str, source: str = "<string>") -> Catalog:
    """Parse the catalog text format.

    Header line: ``atom <label> nuclear_2I <int>``; data lines hold
    8 or 9 whitespace-separated columns; ``#`` starts a comment.
    """
    atom = None
    nuclear = None
    transitions = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        toks = line.split()
        if atom is None:
            if len(toks) != 4 or toks[0] != "atom" or toks[2] != "nuclear_2I":
                raise CatalogError(
                    f"{source}, line {lineno}: expected header"
                    f" 'atom <label> nuclear_2I <value>', got {line!r}")
            atom = toks[1]
            try:
                nuclear = HalfInt(int(toks[3]))
            except ValueError as exc:
                raise CatalogError(
                    f"{source}, line {lineno}: bad nuclear_2I {toks[3]!r}") from exc
            continue
        if len(toks) not in (8, 9):
            raise CatalogError(
                f"{source}, line {lineno}: expected 8 or 9 columns, got {len(toks)}")
        try:
            lower = HyperfineState(toks[0], HalfInt(int(toks[1])), HalfInt(int(toks[2])))
            upper = HyperfineState(toks[3], HalfInt(int(toks[4])), HalfInt(int(toks[5])))
            tr = Transition(
                lower, upper,
                wavelength_nm=float(toks[6]),
                dipole_au=float(toks[7]),
                linewidth_mhz=float(toks[8]) if len(toks) == 9 else None,
            )
        except (CatalogError, ValueError) as exc:
            raise CatalogError(f"{source}, line {lineno}: {exc}") from exc
        transitions.append(tr)
    if atom is None:
        raise CatalogError(f"{source}: missing header line")
    try:
        return Catalog(atom, nuclear, transitions)
    except CatalogError as exc:
        raise CatalogError(f"{source}: {exc}") from exc


def load_catalog(path) -> Catalog:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_catalog(fh.read(), source=str(path))


def serialize_catalog(catalog: Catalog) -> str:
    """Canonical text form: header plus one row per transition, numbers in
    shortest-roundtrip float notation.  parse_catalog(serialize_catalog(c))
    reproduces c exactly; comments from an input file are not retained."""
    lines = [f"atom {catalog.atom} nuclear_2I {catalog.nuclear_spin.twice_value}"]
    for t in catalog.transitions:
        toks = [
            t.lower.term, str(t.lower.J.twice_value), str(t.lower.F.twice_value),
            t.upper.term, str(t.upper.J.twice_value), str(t.upper.F.twice_value),
            str(float(t.wavelength_nm)), str(float(t.dipole_au)),
        ]
        if t.linewidth_mhz is not None:
            toks.append(str(float(t.linewidth_mhz)))
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def transitions_from(catalog: Catalog, lower: HyperfineState) -> list:
    """All catalog lines whose lower level matches (term, J, F) of the
    given state, in file order; mF on the query is ignored."""
    key = (lower.term, lower.J, lower.F)
    return [t for t in catalog.transitions
            if (t.lower.term, t.lower.J, t.lower.F) == key]


@lru_cache(maxsize=1)
def bundled_catalog() -> Catalog:
    """The Rb-87 catalog shipped with the package."""
    text = resources.files("odtshift").joinpath("data/rb87_catalog.txt").read_text()
    return parse_catalog(text, source="rb87_catalog.txt")
