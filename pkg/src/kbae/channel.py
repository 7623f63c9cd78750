"""Synthetic mmWave cascaded channels and optimal phase-shift matrices.

Each channel realization holds two complex length-N vectors: user-to-surface
and surface-to-station. The surface is an M x M uniform planar array with
N = M*M unit cells; links are clustered geometric sums of uniform-planar-array
steering vectors weighted by complex Gaussian path gains. Phase matrices are
tagged with their value domain: ``raw`` phases in [0, 2*pi) or ``normalized``
values in [0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

TWO_PI = 2.0 * math.pi

RAW = "raw"
NORMALIZED = "normalized"


@dataclass
class PhaseShiftMatrix:
    """M x M per-cell phase values plus the domain they live in."""

    values: np.ndarray
    domain: str = RAW

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ShapeError(f"phase matrix must be square, got {self.values.shape}")
        if self.domain not in (RAW, NORMALIZED):
            raise DomainError(f"unknown phase domain {self.domain!r}")

    @property
    def m(self):
        return self.values.shape[0]

    def to_vector(self):
        """Row-major length-N view of the matrix."""
        return self.values.reshape(-1)

    @classmethod
    def from_vector(cls, vec, domain=RAW):
        vec = np.asarray(vec, dtype=np.float64)
        m = math.isqrt(vec.size)
        if m * m != vec.size:
            raise ShapeError(f"vector length {vec.size} is not a perfect square")
        return cls(vec.reshape(m, m).copy(), domain)


def normalize(psm):
    """Map raw phases [0, 2*pi) linearly onto [0, 1)."""
    if psm.domain != RAW:
        raise DomainError("normalize expects a raw phase matrix")
    return PhaseShiftMatrix(psm.values / TWO_PI, NORMALIZED)


def denormalize(psm):
    """Exact inverse of :func:`normalize`."""
    if psm.domain != NORMALIZED:
        raise DomainError("denormalize expects a normalized phase matrix")
    return PhaseShiftMatrix(psm.values * TWO_PI, RAW)


@dataclass
class ChannelRealization:
    """One draw of the two link vectors (user->surface, surface->station)."""

    h_sr: np.ndarray
    h_rd: np.ndarray

    def __post_init__(self):
        self.h_sr = np.asarray(self.h_sr, dtype=np.complex128)
        self.h_rd = np.asarray(self.h_rd, dtype=np.complex128)
        if self.h_sr.shape != self.h_rd.shape or self.h_sr.ndim != 1:
            raise ShapeError(
                f"link vectors must be equal-length 1-D, got {self.h_sr.shape} "
                f"and {self.h_rd.shape}"
            )
        n = self.h_sr.size
        if math.isqrt(n) ** 2 != n:
            raise ShapeError(f"vector length {n} is not a square number of cells")

    @property
    def n(self):
        return self.h_sr.size


@dataclass(frozen=True)
class ChannelConfig:
    """Stand-in clustered geometric channel generator settings."""

    m: int = 32
    paths_sr: int = 3
    paths_rd: int = 2
    gain_var: float = 1.0
    az_range: tuple = (-math.pi, math.pi)
    el_range: tuple = (-math.pi / 2, math.pi / 2)
    spacing: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"m must be positive, got {self.m}")
        if self.paths_sr < 1 or self.paths_rd < 1:
            raise ConfigError("path counts must be >= 1")
        if self.gain_var <= 0:
            raise ConfigError(f"gain variance must be > 0, got {self.gain_var}")
        if self.spacing <= 0:
            raise ConfigError(f"element spacing must be > 0, got {self.spacing}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def n(self):
        return self.m * self.m


def upa_steering(m, azimuth, elevation, spacing=0.5):
    """Steering vector of an m x m planar array, flattened row-major.

    Per-element magnitude is 1/sqrt(m*m) so a single unit-variance path has
    mean per-element power 1/N.
    """
    idx = np.arange(m)
    horiz = np.exp(1j * TWO_PI * spacing * math.sin(azimuth) * math.cos(elevation) * idx)
    vert = np.exp(1j * TWO_PI * spacing * math.sin(elevation) * idx)
    return np.outer(vert, horiz).reshape(-1) / m


def _link(rng, cfg, paths):
    az = rng.uniform(cfg.az_range[0], cfg.az_range[1], paths)
    el = rng.uniform(cfg.el_range[0], cfg.el_range[1], paths)
    scale = math.sqrt(cfg.gain_var / (2.0 * paths))
    gains = scale * (rng.standard_normal(paths) + 1j * rng.standard_normal(paths))
    h = np.zeros(cfg.n, dtype=np.complex128)
    for p in range(paths):
        h += gains[p] * upa_steering(cfg.m, az[p], el[p], cfg.spacing)
    return h


def gen_channel(cfg, index):
    """Draw the channel for one sample; deterministic in (cfg.seed, index)."""
    rng = np.random.default_rng([cfg.seed, int(index)])
    return ChannelRealization(
        h_sr=_link(rng, cfg, cfg.paths_sr),
        h_rd=_link(rng, cfg, cfg.paths_rd),
    )


def optimal_phase(h_sr, h_rd, literal_sign=False):
    """Capacity-optimal per-cell phases for the cascaded link.

    Default co-phases the per-element products: theta_i = -arg(h_sr_i * h_rd_i)
    mod 2*pi, which aligns every term of the cascaded sum. ``literal_sign``
    flips to +arg. Elements with a zero product get phase 0.
    """
    h_sr = np.asarray(h_sr, dtype=np.complex128)
    h_rd = np.asarray(h_rd, dtype=np.complex128)
    if h_sr.shape != h_rd.shape:
        raise ShapeError(f"link lengths differ: {h_sr.shape} vs {h_rd.shape}")
    prod = h_sr * h_rd
    sign = 1.0 if literal_sign else -1.0
    theta = np.remainder(sign * np.angle(prod), TWO_PI)
    # float remainder may round up to exactly 2*pi
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    theta = np.where(prod == 0, 0.0, theta)
    return PhaseShiftMatrix.from_vector(theta, RAW)


def cascaded_gain(h_sr, h_rd, psm):
    """Equivalent scalar channel: sum_i h_rd_i * e^{j*theta_i} * h_sr_i."""
    if psm.domain != RAW:
        raise DomainError("cascaded_gain expects raw phases")
    h_sr = np.asarray(h_sr, dtype=np.complex128)
    h_rd = np.asarray(h_rd, dtype=np.complex128)
    theta = psm.to_vector()
    if h_sr.size != theta.size or h_rd.size != theta.size:
        raise ShapeError(
            f"phase count {theta.size} does not match link length {h_sr.size}"
        )
    return complex(np.sum(h_rd * np.exp(1j * theta) * h_sr))


def gen_phase_samples(cfg, count, start_index=0, literal_sign=False):
    """Generate ``count`` normalized optimal phase matrices as (count, M, M)."""
    out = np.empty((count, cfg.m, cfg.m), dtype=np.float64)
    for i in range(count):
        ch = gen_channel(cfg, start_index + i)
        psm = optimal_phase(ch.h_sr, ch.h_rd, literal_sign=literal_sign)
        out[i] = normalize(psm).values
    return out
