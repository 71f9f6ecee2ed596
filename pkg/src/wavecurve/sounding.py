"""SRFT hybrid combiner and noisy pilot synthesis.

The combiner W = R F2 D is a random unit-modulus diagonal followed by the
unitary 2D DFT on the array index grid and a uniform random selection of M
distinct DFT bins.  Rows are orthonormal by construction, so measurement
noise stays white; apply/adjoint are FFT-based and never materialize W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import unvec, vec
from .errors import ConfigError


@dataclass(frozen=True)
class Combiner:
    """Structured SRFT observation operator for an ny x nz array."""

    ny: int
    nz: int
    selected_rows: np.ndarray  # (M,) flat C-order indices into the DFT grid
    diag_phases: np.ndarray  # (N,) unit-modulus complex, antenna order (vec'd)
    n_rf: int
    p: int
    seed: int

    @property
    def n(self) -> int:
        return self.ny * self.nz

    @property
    def m(self) -> int:
        return self.selected_rows.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        """W x for a length-N channel-domain vector."""
        xm = unvec(self.diag_phases * x, self.ny, self.nz)
        spec = np.fft.fft2(xm) / np.sqrt(self.n)
        return spec.ravel()[self.selected_rows]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """W^H y, a length-N channel-domain vector."""
        spec = np.zeros((self.ny, self.nz), dtype=complex)
        spec.ravel()[self.selected_rows] = y
        xm = np.fft.ifft2(spec) * np.sqrt(self.n)
        return np.conj(self.diag_phases) * vec(xm)

    def dense(self) -> np.ndarray:
        """Materialized M x N matrix; small arrays / tests only."""
        w = np.empty((self.m, self.n), dtype=complex)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = 1.0
            w[:, i] = self.apply(e)
        return w

    def pilot_blocks(self) -> list[np.ndarray]:
        """Row indices per pilot: P blocks of N_RF rows."""
        return [
            np.arange(b * self.n_rf, (b + 1) * self.n_rf)
            for b in range(self.p)
        ]


@dataclass(frozen=True)
class Observation:
    """One noisy observation y = W (a_scale h) + n."""

    y: np.ndarray
    snr_db: float | None  # None disables noise
    noise_seed: int
    a_scale: float


def make_srft_combiner(ny: int, nz: int, n_rf: int, p: int, seed: int) -> Combiner:
    n = ny * nz
    m = n_rf * p
    if m > n:
        raise ConfigError(f"M = n_rf*p = {m} exceeds N = {n}")
    rng = np.random.default_rng(seed)
    phases = np.exp(2j * np.pi * rng.uniform(size=n))
    rows = rng.choice(n, size=m, replace=False)
    return Combiner(
        ny=ny,
        nz=nz,
        selected_rows=rows,
        diag_phases=phases,
        n_rf=n_rf,
        p=p,
        seed=seed,
    )


def observe(
    h: np.ndarray,
    c: Combiner,
    snr_db: float | None,
    noise_seed: int = 0,
) -> Observation:
    """Synthesize y = W (a_scale h) + n with n ~ CN(0, I_M).

    The gain scale is set so that snr = a_scale^2 |h|^2 / sigma^2 with unit
    per-element noise variance.  snr_db = None (or +inf) disables noise.
    """
    h = np.asarray(h)
    if h.size != c.n:
        raise ConfigError(f"channel length {h.size} != N = {c.n}")
    norm = np.linalg.norm(h)
    if snr_db is None or np.isinf(snr_db):
        a_scale = 1.0
        noise = 0.0
    else:
        a_scale = np.sqrt(10.0 ** (snr_db / 10.0)) / norm
        rng = np.random.default_rng(noise_seed)
        noise = (
            rng.standard_normal(c.m) + 1j * rng.standard_normal(c.m)
        ) / np.sqrt(2.0)
    y = c.apply(a_scale * h) + noise
    return Observation(y=y, snr_db=snr_db, noise_seed=noise_seed, a_scale=a_scale)
