"""Discrete complex constellations with per-point priors and cached moments.

Built-in QAM/PSK alphabets are normalized to unit symbol variance
(``Var_S[S] = 1``); custom alphabets are taken as-is and never rescaled.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

BUILTIN_NAMES = ("bpsk", "qpsk", "16qam", "64qam", "8psk", "16psk")

# Moment / prior validation tolerances.
_PRIOR_TOL_BUILTIN = 1e-12
_PRIOR_TOL_CUSTOM = 1e-9


@dataclass(frozen=True)
class Constellation:
    """A finite complex alphabet ``{a_j}`` with prior probabilities ``p_a``.

    First and second moments are cached at construction; instances are
    immutable and safe to share across threads.

    Attributes
    ----------
    points : tuple of complex
        Constellation points (pairwise distinct).
    priors : tuple of float
        Prior probability of each point; non-negative, summing to 1.
    name : str
        Identifier ("qpsk", "custom", ...); informational only.
    """

    points: tuple
    priors: tuple
    name: str = "custom"
    mean: complex = field(init=False)
    energy: float = field(init=False)
    variance: float = field(init=False)

    def __post_init__(self):
        points = tuple(complex(p) for p in self.points)
        priors = tuple(float(p) for p in self.priors)
        if len(points) == 0:
            raise ValueError("constellation needs at least one point")
        if len(points) != len(priors):
            raise ValueError(
                f"{len(points)} points but {len(priors)} priors"
            )
        if any(p < 0 for p in priors):
            raise ValueError("priors must be non-negative")
        psum = sum(priors)
        if abs(psum - 1.0) > _PRIOR_TOL_CUSTOM:
            raise ValueError(f"priors sum to {psum!r}, expected 1")
        for j in range(len(points)):
            for k in range(j + 1, len(points)):
                if points[j] == points[k]:
                    raise ValueError(f"duplicate constellation point {points[j]}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "priors", priors)
        mean = sum(p * a for p, a in zip(priors, points))
        energy = sum(p * abs(a) ** 2 for p, a in zip(priors, points))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "energy", energy)
        object.__setattr__(self, "variance", energy - abs(mean) ** 2)

    def __len__(self):
        return len(self.points)

    @cached_property
    def points_array(self) -> np.ndarray:
        """Points as a read-only complex ndarray."""
        arr = np.asarray(self.points, dtype=np.complex128)
        arr.setflags(write=False)
        return arr

    @cached_property
    def priors_array(self) -> np.ndarray:
        arr = np.asarray(self.priors, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    def slice(self, z):
        """Hard decision: nearest constellation point(s) to ``z``.

        Ties are broken toward the lowest point index. Accepts a scalar or
        an ndarray; returns the same shape.

        Parameters
        ----------
        z : complex or ndarray
            Observation(s) to quantize.
        """
        idx = self.slice_index(z)
        if np.ndim(idx) == 0:
            return self.points[int(idx)]
        return self.points_array[idx]

    def slice_index(self, z):
        """Index of the nearest point; lowest index wins ties."""
        z = np.asarray(z, dtype=np.complex128)
        d2 = np.abs(z[..., None] - self.points_array) ** 2
        # argmin returns the first minimum, which is the lowest-index rule
        return np.argmin(d2, axis=-1)


def make_builtin(name: str) -> Constellation:
    """Return a named uniform-prior alphabet scaled to unit variance.

    QAM points lie on the odd-integer square grid (row-major by
    (Re, Im)), PSK points counterclockwise on the unit circle starting at
    angle 0, both before the unit-variance scaling.

    Parameters
    ----------
    name : str
        One of ``bpsk, qpsk, 16qam, 64qam, 8psk, 16psk``.
    """
    key = name.strip().lower().replace("-", "")
    if key == "bpsk":
        pts = [1.0 + 0.0j, -1.0 + 0.0j]
    elif key == "qpsk":
        pts = _qam_grid(2)
    elif key == "16qam":
        pts = _qam_grid(4)
    elif key == "64qam":
        pts = _qam_grid(8)
    elif key == "8psk":
        pts = _psk_circle(8)
    elif key == "16psk":
        pts = _psk_circle(16)
    else:
        raise ValueError(
            f"unknown constellation {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        )
    k = len(pts)
    priors = [1.0 / k] * k
    energy = sum(abs(a) ** 2 for a in pts) / k
    pts = [a / energy ** 0.5 for a in pts]
    return Constellation(tuple(pts), tuple(priors), name=key)


def _qam_grid(m: int):
    """m x m square grid on odd integers, row-major by (Re, Im)."""
    levels = [2 * i - (m - 1) for i in range(m)]
    return [complex(re, im) for re in levels for im in levels]


def _psk_circle(k: int):
    pts = [cmath.exp(2j * cmath.pi * j / k) for j in range(k)]
    # snap near-zero components so e.g. the angle-pi point is exactly -1
    return [complex(round(p.real, 15), round(p.imag, 15)) for p in pts]


def make_custom(points, priors) -> Constellation:
    """Build an alphabet from explicit points and priors (no rescaling)."""
    return Constellation(tuple(points), tuple(priors), name="custom")


def scale(c: Constellation, factor: float) -> Constellation:
    """Multiply every point by ``factor`` (> 0); priors unchanged."""
    factor = float(factor)
    if not factor > 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return Constellation(
        tuple(a * factor for a in c.points), c.priors, name=c.name
    )


def load_custom(path) -> Constellation:
    """Load a custom alphabet from a JSON file.

    Expected format: array of ``{"re": <f64>, "im": <f64>, "prior": <f64>}``
    records.
    """
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list) or not records:
        raise ValueError(f"{path}: expected a non-empty JSON array")
    points, priors = [], []
    for i, rec in enumerate(records):
        try:
            points.append(complex(float(rec["re"]), float(rec["im"])))
            priors.append(float(rec["prior"]))
        except (TypeError, KeyError) as exc:
            raise ValueError(f"{path}: record {i} malformed: {exc}") from exc
    return Constellation(tuple(points), tuple(priors), name="custom")


def resolve(ident: str) -> Constellation:
    """Resolve a CLI-style identifier: builtin name or path to a JSON file."""
    key = ident.strip().lower().replace("-", "")
    if key in BUILTIN_NAMES:
        return make_builtin(key)
    try:
        return load_custom(ident)
    except FileNotFoundError:
        raise ValueError(
            f"unknown constellation {ident!r}: not a builtin "
            f"({', '.join(BUILTIN_NAMES)}) and no such file"
        ) from None
