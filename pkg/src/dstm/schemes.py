"""Named DSTM schemes.

==============  =====  ==================================================
scheme          N_T    construction
==============  =====  ==================================================
o4              4      rate-3/4 orthogonal code, two 3-D spherical groups
o4-psk          4      rate-3/4 orthogonal code, PSK on each symbol
o4-half-psk     4      rate-1/2 orthogonal code, PSK on each symbol
qo4             4      quasi-orthogonal code, two symbol-pair groups
o8              8      rate-1/2 orthogonal code, two 4-D spherical groups
o8-psk          8      rate-1/2 orthogonal code, PSK on each symbol
qo8             8      rate-3/4 ABBA code, three symbol-pair groups
==============  =====  ==================================================
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from . import codes
from .codebook import Codebook, DecodingGroup, assemble
from .constellations import (
    SphericalCode,
    builtin_sphere,
    load_sphere,
    psk,
    qo_pairwise,
    sphere_to_joint,
    theorem1_theta,
)

__all__ = ["SchemeSpec", "SCHEMES", "SHIPPED", "parse_theta", "parse_sphere", "build_codebook"]

SCHEMES = ("o4", "o4-psk", "o4-half-psk", "qo4", "o8", "o8-psk", "qo8")

_N_TX = {"o4": 4, "o4-psk": 4, "o4-half-psk": 4, "qo4": 4, "o8": 8, "o8-psk": 8, "qo8": 8}

_PI_RE = re.compile(r"^\s*(?:([0-9.]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_theta(text, M: int | None = None) -> float:
    """Rotation from ``"theorem1"``, ``"pi/8"``, ``"3pi/16"`` or a number."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t == "theorem1":
        if M is None:
            raise ValueError("theorem1 rotation needs M")
        return theorem1_theta(M)
    m = _PI_RE.match(t)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(t)


def parse_sphere(text: str) -> SphericalCode:
    """``builtin:DxN`` or a path to a coordinate file."""
    if text.startswith("builtin:"):
        d, n = text[len("builtin:") :].lower().split("x")
        return builtin_sphere(int(d), int(n))
    return load_sphere(text)


@dataclass(frozen=True)
class SchemeSpec:
    scheme: str
    m: int | None = None
    theta: str | float = "theorem1"
    sphere: str | None = None
    psk: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.scheme in ("qo4", "qo8"):
            if self.m is None:
                raise ValueError(f"{self.scheme} needs M")
            if self.sphere is not None or self.psk is not None:
                raise ValueError(f"{self.scheme} takes M and theta only")
        elif self.scheme in ("o4", "o8"):
            if self.sphere is None:
                raise ValueError(f"{self.scheme} needs a spherical code")
            if self.m is not None or self.psk is not None:
                raise ValueError(f"{self.scheme} takes a spherical code only")
        else:
            if self.psk is None:
                raise ValueError(f"{self.scheme} needs a PSK size")
            if self.m is not None or self.sphere is not None:
                raise ValueError(f"{self.scheme} takes a PSK size only")

    @property
    def n_tx(self) -> int:
        return _N_TX[self.scheme]

    @property
    def label(self) -> str:
        if self.m is not None:
            if self.theta == "theorem1":
                return f"{self.scheme}-M{self.m}"
            return f"{self.scheme}-M{self.m}-theta{str(self.theta).replace('/', '_')}"
        if self.psk is not None:
            return f"{self.scheme}{self.psk}"
        s = self.sphere
        return f"{self.scheme}-{s[len('builtin:'):] if s.startswith('builtin:') else 'file'}"

    def build(self) -> Codebook:
        return build_codebook(self)

    def as_dict(self) -> dict:
        out = {"scheme": self.scheme}
        if self.m is not None:
            out.update(m=self.m, theta=self.theta)
        if self.sphere is not None:
            out["sphere"] = self.sphere
        if self.psk is not None:
            out["psk"] = self.psk
        return out


@lru_cache(maxsize=None)
def _dispersion(code: str):
    builder, n_sym, n_tx = codes.BUILDERS[code]
    return codes.extract_dispersion(builder, n_sym, n_tx)


def _slot_groups(*groups):
    return [tuple(g) for g in groups]


@lru_cache(maxsize=32)
def build_codebook(spec: SchemeSpec) -> Codebook:
    s = spec.scheme
    if s in ("qo4", "qo8"):
        n_groups = 2 if s == "qo4" else 3
        theta = parse_theta(spec.theta, spec.m)
        pset = qo_pairwise(spec.m, theta, n_groups)
        if s == "qo4":
            # (c1, c4) and (c2, c3)
            slots = _slot_groups((0, 1, 6, 7), (2, 3, 4, 5))
            disp = _dispersion("qostbc4")
        else:
            # (c1, c4), (c2, c5), (c3, c6)
            slots = _slot_groups((0, 1, 6, 7), (2, 3, 8, 9), (4, 5, 10, 11))
            disp = _dispersion("qostbc8")
        groups = [DecodingGroup(sl, pset) for sl in slots]
        return assemble(disp, groups, "quasi-orthogonal", spec.label)

    if s in ("o4", "o8"):
        sphere = parse_sphere(spec.sphere)
        want = 3 if s == "o4" else 4
        if sphere.dim != want:
            raise ValueError(f"{s} needs a {want}-D spherical code, got {sphere.dim}-D")
        cset = sphere_to_joint(sphere, 0.5)
        if s == "o4":
            # {Re c1, Im c1, Re c2} and {Im c2, Re c3, Im c3}
            slots = _slot_groups((0, 1, 2), (3, 4, 5))
            disp = _dispersion("ostbc4")
        else:
            slots = _slot_groups((0, 1, 2, 3), (4, 5, 6, 7))
            disp = _dispersion("ostbc8")
        return assemble(disp, [DecodingGroup(sl, cset) for sl in slots], "orthogonal", spec.label)

    code = {"o4-psk": "ostbc4", "o4-half-psk": "ostbc4_half", "o8-psk": "ostbc8"}[s]
    disp = _dispersion(code)
    cset = psk(spec.psk, 1.0 / disp.n_sym)
    slots = _slot_groups(*[(2 * k, 2 * k + 1) for k in range(disp.n_sym)])
    return assemble(disp, [DecodingGroup(sl, cset) for sl in slots], "orthogonal", spec.label)


# Every configuration compared in the coding-gain tables.
SHIPPED = (
    SchemeSpec("o4", sphere="builtin:3x8"),
    SchemeSpec("qo4", m=4),
    SchemeSpec("o4-psk", psk=4),
    SchemeSpec("o4", sphere="builtin:3x16"),
    SchemeSpec("qo4", m=8),
    SchemeSpec("o4-half-psk", psk=16),
    SchemeSpec("o8", sphere="builtin:4x64"),
    SchemeSpec("qo8", m=8),
    SchemeSpec("o8-psk", psk=8),
)
