"""Synthetic margin datasets, random label noise, and dataset file I/O.

The generator draws unit-ball points that a hidden unit vector ``u``
separates with margin at least ``tau``: each point is
``x = s * m * u + r * v`` for a random sign ``s``, margin ``m`` uniform in
``[tau, 1]``, a uniform direction ``v`` orthogonal to ``u`` and radius
``r`` uniform in ``[0, sqrt(1 - m^2)]``, labeled ``y = s``.  By
construction ``|u . x| = m >= tau`` and ``||x|| <= 1``.

Label noise flips each label independently with probability ``eta``; the
flip decisions are a function of the noise seed and example index only,
never of the features or labels, which is the independence the privacy
argument needs.

Dataset files are UTF-8 CSV with ``d`` feature columns then a ``+1``/``-1``
label column, optionally preceded by a ``# d=.. tau=.. seed=..`` header
line.  Floats are written with ``repr`` so a write/read round trip is
exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import BadConfigError, NormViolationError, ParseError
from .halfspace import LabeledSample
from .rng import stream

__all__ = [
    "GeneratorConfig",
    "NoiseConfig",
    "generate_margin_sample",
    "apply_rcn",
    "write_sample",
    "read_sample",
    "write_flips",
    "read_flips",
]


@dataclass(frozen=True)
class GeneratorConfig:
    """Dimension, size, target margin and seed for sample generation."""

    d: int
    n: int
    tau: float
    seed: int
    target_direction: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.d) < 1 or int(self.n) < 1:
            raise BadConfigError("d and n must be at least 1")
        if not 0.0 < float(self.tau) < 1.0:
            raise BadConfigError(f"tau must lie in (0, 1), got {self.tau}")
        if int(self.seed) < 0:
            raise BadConfigError("seed must be a nonnegative integer")
        if self.target_direction is not None:
            u = np.asarray(self.target_direction, dtype=np.float64)
            if u.shape != (int(self.d),):
                raise BadConfigError("target_direction must have shape (d,)")
            if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
                raise BadConfigError("target_direction must be a unit vector")
            object.__setattr__(self, "target_direction", u)


@dataclass(frozen=True)
class NoiseConfig:
    """Random-classification-noise rate and seed."""

    eta: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= float(self.eta) < 0.5:
            raise BadConfigError(f"eta must lie in [0, 0.5), got {self.eta}")
        if int(self.seed) < 0:
            raise BadConfigError("seed must be a nonnegative integer")


def generate_margin_sample(cfg: GeneratorConfig) -> tuple[LabeledSample, np.ndarray]:
    """Draw a tau-margin sample plus the hidden target direction.

    Every example satisfies ``|u . x| >= tau`` and ``||x|| <= 1`` (checked
    on each batch); labels equal ``sign(u . x)``.
    """
    d, n, tau = int(cfg.d), int(cfg.n), float(cfg.tau)
    g = stream(cfg.seed, "margin-sample")

    if cfg.target_direction is not None:
        u = cfg.target_direction.copy()
    else:
        u = g.standard_normal(d)
        u /= np.linalg.norm(u)

    signs = g.integers(0, 2, n) * 2.0 - 1.0
    margins = g.uniform(tau, 1.0, n)

    if d == 1:
        x = (signs * margins)[:, None] * u[None, :]
    else:
        raw = g.standard_normal((n, d))
        raw -= (raw @ u)[:, None] * u[None, :]
        norms = np.linalg.norm(raw, axis=1)
        directions = np.where(norms[:, None] > 0, raw / np.where(norms > 0, norms, 1.0)[:, None], 0.0)
        radii = g.uniform(0.0, 1.0, n) * np.sqrt(1.0 - margins**2)
        x = (signs * margins)[:, None] * u[None, :] + radii[:, None] * directions

    achieved = np.abs(x @ u)
    if achieved.min() < tau - 1e-12:
        raise AssertionError("generated sample violates the margin guarantee")
    if np.einsum("ij,ij->i", x, x).max() > (1.0 + 1e-9) ** 2:
        raise AssertionError("generated sample leaves the unit ball")
    return LabeledSample(x, signs), u


def apply_rcn(sample: LabeledSample, noise: NoiseConfig) -> tuple[LabeledSample, np.ndarray]:
    """Flip each label independently with probability ``eta``.

    Flip decisions depend only on ``(noise.seed, index)``; the same seed on
    any sample of the same size produces the same flip set.  Returns the
    noised sample and the flipped indices (sorted, possibly empty).
    """
    g = stream(noise.seed, "rcn")
    uniforms = g.random(sample.n)
    mask = uniforms < float(noise.eta)
    flipped = np.flatnonzero(mask)
    if flipped.size == 0:
        return sample, flipped
    y = sample.y.copy()
    y[mask] = -y[mask]
    return LabeledSample(sample.x, y), flipped


def write_sample(
    sample: LabeledSample,
    path,
    tau: Optional[float] = None,
    seed: Optional[int] = None,
) -> None:
    """Write a sample as CSV; floats use ``repr`` for exact round trips."""
    lines = []
    header = f"# d={sample.d}"
    if tau is not None:
        header += f" tau={tau!r}"
    if seed is not None:
        header += f" seed={int(seed)}"
    lines.append(header)
    for row, label in zip(sample.x, sample.y):
        text = ",".join(repr(float(v)) for v in row)
        lines.append(f"{text},{'+1' if label > 0 else '-1'}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sample(path) -> LabeledSample:
    """Parse a CSV sample file written by :func:`write_sample`.

    Raises ``ParseError`` with the offending line and column, or
    ``NormViolationError`` when a row lies outside the unit ball by more
    than 1e-6.
    """
    rows: list[list[float]] = []
    labels: list[float] = []
    width: Optional[int] = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
            if width < 2:
                raise ParseError("a row needs at least one feature and a label", lineno)
        elif len(fields) != width:
            raise ParseError(
                f"expected {width} fields, found {len(fields)}", lineno
            )
        values = []
        for col, field in enumerate(fields[:-1], start=1):
            try:
                values.append(float(field))
            except ValueError:
                raise ParseError(f"bad float {field!r}", lineno, col) from None
        label_text = fields[-1].strip()
        if label_text == "+1":
            labels.append(1.0)
        elif label_text == "-1":
            labels.append(-1.0)
        else:
            raise ParseError(
                f"bad label {label_text!r}, expected '+1' or '-1'", lineno, width
            )
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", line=1)
    x = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    if norms.max() > 1.0 + 1e-6:
        raise NormViolationError(
            f"a row has norm {norms.max():.9g}, beyond the unit ball"
        )
    # Excesses within the looser 1e-6 file tolerance are scaled back so the
    # in-memory invariant holds; rows already within tolerance are kept
    # bit-exact.
    over = norms > 1.0 + 1e-9
    if over.any():
        x[over] /= norms[over][:, None]
    return LabeledSample(x, np.asarray(labels))


def write_flips(flipped_indices, path) -> None:
    """Write flipped indices, one per line."""
    indices = np.asarray(flipped_indices, dtype=np.int64)
    Path(path).write_text(
        "\n".join(str(int(i)) for i in indices) + ("\n" if indices.size else ""),
        encoding="utf-8",
    )


def read_flips(path) -> np.ndarray:
    """Read a flip-index file written by :func:`write_flips`."""
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise ParseError(f"bad index {line!r}", lineno) from None
    return np.asarray(out, dtype=np.int64)
