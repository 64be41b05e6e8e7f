"""Monte Carlo emulation of the time-tagging fibre spectrometer.

A long dispersive fibre maps each detected frequency to an arrival time
(``tau_g = L (beta1 + beta2 (w - w_ref))``); a detector with finite
efficiency and Gaussian timing jitter stamps the arrival relative to the
pulse sync. Each pulse produces at most one tag per channel.

Randomness is drawn from counter-based Philox streams keyed by
``(seed, block_index)`` with a fixed block size, so the tag stream is the
same whether blocks are generated sequentially or in parallel.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .spectral import C_LIGHT, SpectralGrid

__all__ = [
    "FiberSpectrometer",
    "RunConfig",
    "TAG_DTYPE",
    "CHANNEL_A",
    "CHANNEL_B",
    "OK",
    "CLAMPED",
    "DISCARDED",
    "ModelError",
    "group_delay",
    "arrival_to_omega",
    "band_times",
    "simulate_run",
    "write_qtag",
    "read_qtag",
    "qtag_bytes",
    "parse_qtag",
]

CHANNEL_A, CHANNEL_B = 0, 1
OK, CLAMPED, DISCARDED = 0, 1, 2
BLOCK_SIZE = 1 << 16

TAG_DTYPE = np.dtype([("pulse_index", "<u8"), ("channel", "u1"), ("arrival", "<i8")])  # packed, 17 bytes
QTAG_MAGIC = b"QTAG"
QTAG_VERSION = 1
_HEADER = struct.Struct("<4sIQ")


class ModelError(ValueError):
    """Click probabilities that cannot be sampled as one click per pulse."""


@dataclass(frozen=True)
class FiberSpectrometer:
    """Dispersive fibre plus single-photon detector; SI units throughout."""

    ref_omega: float = 2 * np.pi * C_LIGHT / 1550e-9
    length: float = 5e3
    beta1_ref: float = 1.4682 / C_LIGHT
    beta2: float = 23e-30 / 1e-3
    jitter_sigma: float = 35e-12
    efficiency: float = 0.65
    time_bin: float = 1e-12

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("fibre length must be positive")
        if self.beta2 == 0 or not np.isfinite(self.beta2):
            raise ValueError("beta2 must be finite and non-zero")
        if not 0 <= self.efficiency <= 1:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.jitter_sigma < 0:
            raise ValueError("jitter must be non-negative")
        if not self.time_bin > 0:
            raise ValueError("time_bin must be positive")

    @property
    def time_per_omega(self) -> float:
        """``d tau / d omega = L beta2``."""
        return self.length * self.beta2


@dataclass(frozen=True)
class RunConfig:
    n_pulses: int
    rng_seed: int = 0
    dark_count_rate: float = 0.0  # 1/s
    rep_rate: float = 100e6  # only used to turn the dark count rate into a per-pulse probability

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError("n_pulses must be a positive integer")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.dark_count_rate < 0:
            raise ValueError("dark_count_rate must be non-negative")
        if not self.rep_rate > 0:
            raise ValueError("rep_rate must be positive")


def group_delay(fib: FiberSpectrometer, omega):
    return fib.length * (fib.beta1_ref + fib.beta2 * (np.asarray(omega, dtype=float) - fib.ref_omega))


def band_times(fib: FiberSpectrometer, band: tuple[float, float]) -> tuple[float, float]:
    t = group_delay(fib, np.asarray(band))
    return float(t.min()), float(t.max())


def arrival_to_omega(fib: FiberSpectrometer, arrival, band: tuple[float, float] | None = None,
                     guard: float | None = None):
    """Invert the linear delay map.

    Returns ``(omega, status)``. With ``band`` given, arrivals outside the
    band's time window but within ``guard`` (default ``5 * jitter_sigma``)
    are clamped to the band edge (status ``CLAMPED``); further ones are
    ``DISCARDED`` and their omega is NaN.
    """
    t = np.asarray(arrival, dtype=float)
    omega = fib.ref_omega + (t / fib.length - fib.beta1_ref) / fib.beta2
    status = np.zeros(t.shape, dtype=np.uint8)
    if band is not None:
        lo, hi = band
        if guard is None:
            guard = 5 * fib.jitter_sigma
        t_lo, t_hi = band_times(fib, band)
        out = (t < t_lo) | (t > t_hi)
        far = (t < t_lo - guard) | (t > t_hi + guard)
        status[out] = CLAMPED
        status[far] = DISCARDED
        omega = np.clip(omega, lo, hi)
        omega = np.where(far, np.nan, omega)
    if omega.ndim == 0:
        return float(omega), int(status)
    return omega, status


def _cumulative(p, efficiency, name):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise ValueError(f"channel {name} probabilities must lie in [0, 1]")
    q = np.cumsum(p * efficiency)
    if q[-1] > 1 + 1e-12:
        raise ModelError(
            f"channel {name}: total click probability {q[-1]:.3f} exceeds 1; lower alpha or refine bins"
        )
    return q


def _channel_tags(rng, n, q, omega, fib, p_dark, t_band):
    # full-block draws keep pulse i's variates independent of the run length
    u = rng.random(BLOCK_SIZE)[:n]
    jit = rng.standard_normal(BLOCK_SIZE)[:n]
    u_dark = rng.random(BLOCK_SIZE)[:n]
    t_dark = rng.random(BLOCK_SIZE)[:n]
    k = np.searchsorted(q, u, side="right")
    sig = k < q.size
    t_sig = group_delay(fib, omega[np.minimum(k, q.size - 1)]) + fib.jitter_sigma * jit
    dark = u_dark < p_dark
    t_dk = t_band[0] + (t_band[1] - t_band[0]) * t_dark
    t = np.where(sig & dark, np.minimum(t_sig, t_dk), np.where(sig, t_sig, t_dk))
    hit = sig | dark
    tb_fs = int(round(fib.time_bin * 1e15))
    ticks = np.rint(t[hit] / fib.time_bin).astype(np.int64) * tb_fs
    return np.nonzero(hit)[0], ticks


def _simulate_block(b, n_pulses, qa, qb, omega, fib_a, fib_b, cfg, band):
    start = b * BLOCK_SIZE
    n = min(BLOCK_SIZE, n_pulses - start)
    rng = np.random.Generator(np.random.Philox(key=int(cfg.rng_seed) | (b << 64)))
    p_dark = -np.expm1(-cfg.dark_count_rate / cfg.rep_rate)
    out = []
    for ch, q, fib in ((CHANNEL_A, qa, fib_a), (CHANNEL_B, qb, fib_b)):
        idx, ticks = _channel_tags(rng, n, q, omega, fib, p_dark, band_times(fib, band))
        rec = np.empty(idx.size, dtype=TAG_DTYPE)
        rec["pulse_index"] = start + idx
        rec["channel"] = ch
        rec["arrival"] = ticks
        out.append(rec)
    tags = np.concatenate(out)
    order = np.lexsort((tags["channel"], tags["pulse_index"]))
    return tags[order]


def simulate_run(p_a, p_b, grid: SpectralGrid, fib_a: FiberSpectrometer, fib_b: FiberSpectrometer,
                 cfg: RunConfig, workers: int = 1) -> np.ndarray:
    """Sample a tag stream from per-bin click probabilities.

    Per pulse and channel, bin ``k`` clicks with probability
    ``p_k * efficiency``; no signal click otherwise. The arrival is the
    bin's group delay plus Gaussian jitter, quantised to ``time_bin`` and
    stored in femtoseconds. Dark counts arrive uniformly across the band's
    time window; if a dark and a signal click share a pulse the earlier one
    is kept.

    Returns a ``TAG_DTYPE`` array sorted by ``(pulse_index, channel)``.
    """
    omega = grid.omega
    if np.shape(p_a) != omega.shape or np.shape(p_b) != omega.shape:
        raise ValueError("probability vectors must match the grid")
    qa = _cumulative(p_a, fib_a.efficiency, "A")
    qb = _cumulative(p_b, fib_b.efficiency, "B")
    n_blocks = -(-cfg.n_pulses // BLOCK_SIZE)
    args = (cfg.n_pulses, qa, qb, omega, fib_a, fib_b, cfg, grid.band)
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(lambda b: _simulate_block(b, *args), range(n_blocks)))
    else:
        blocks = [_simulate_block(b, *args) for b in range(n_blocks)]
    if not blocks:
        return np.empty(0, dtype=TAG_DTYPE)
    return np.concatenate(blocks)


# --- QTAG binary format --------------------------------------------------------
# header: magic "QTAG", u32 version = 1, u64 record count (little-endian)
# record: u64 pulse_index, u8 channel (0 = A, 1 = B), i64 arrival in fs


def qtag_bytes(tags: np.ndarray) -> bytes:
    tags = np.asarray(tags, dtype=TAG_DTYPE)
    return _HEADER.pack(QTAG_MAGIC, QTAG_VERSION, tags.size) + tags.tobytes()


def parse_qtag(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ValueError("truncated QTAG header")
    magic, version, count = _HEADER.unpack_from(data)
    if magic != QTAG_MAGIC:
        raise ValueError("not a QTAG file")
    if version != QTAG_VERSION:
        raise ValueError(f"unsupported QTAG version {version}")
    body = data[_HEADER.size:]
    if len(body) != count * TAG_DTYPE.itemsize:
        raise ValueError(f"QTAG record count {count} does not match payload size {len(body)}")
    return np.frombuffer(body, dtype=TAG_DTYPE).copy()


def write_qtag(path, tags: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(qtag_bytes(tags))


def read_qtag(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return parse_qtag(fh.read())
