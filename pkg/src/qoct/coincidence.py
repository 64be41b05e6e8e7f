"""Tag streams back to joint spectra: pairing, time-to-frequency, histogramming."""

from __future__ import annotations

import numpy as np

from .events import CHANNEL_A, CHANNEL_B, DISCARDED, CLAMPED, FiberSpectrometer, arrival_to_omega
from .spectral import JointSpectrum, SpectralGrid

__all__ = [
    "PAIR_DTYPE",
    "InputError",
    "match_pairs",
    "match_by_window",
    "accumulate",
    "normalize",
    "tv_distance",
    "format_summary",
]

PAIR_DTYPE = np.dtype([("pulse_index", "<u8"), ("omega_a", "<f8"), ("omega_b", "<f8")])


class InputError(ValueError):
    """Tag stream violates the pipeline's preconditions."""


def _first_per_pulse(tags):
    if tags.size == 0:
        return tags, 0
    keep = np.ones(tags.size, dtype=bool)
    keep[1:] = tags["pulse_index"][1:] != tags["pulse_index"][:-1]
    return tags[keep], int(tags.size - keep.sum())


def match_pairs(tags: np.ndarray, fib_a: FiberSpectrometer, fib_b: FiberSpectrometer,
                band: tuple[float, float]):
    """Pair channel-A and channel-B tags that share a pulse index.

    Arrivals are converted with :func:`arrival_to_omega`; a pair whose A or B
    tag falls beyond the guard interval is dropped and counted in
    ``pairs_lost``. Extra tags on the same pulse and channel are ignored
    (counted in ``extra_a``/``extra_b``).

    Returns
    -------
    pairs : ndarray of PAIR_DTYPE
    counters : dict of str -> int
    """
    idx = tags["pulse_index"]
    if idx.size > 1 and np.any(idx[1:] < idx[:-1]):
        raise InputError("tag stream is not sorted by pulse index")
    a, extra_a = _first_per_pulse(tags[tags["channel"] == CHANNEL_A])
    b, extra_b = _first_per_pulse(tags[tags["channel"] == CHANNEL_B])
    common, ia, ib = np.intersect1d(a["pulse_index"], b["pulse_index"], assume_unique=True, return_indices=True)
    wa, sa = arrival_to_omega(fib_a, a["arrival"][ia] * 1e-15, band)
    wb, sb = arrival_to_omega(fib_b, b["arrival"][ib] * 1e-15, band)
    ok = (sa != DISCARDED) & (sb != DISCARDED)
    pairs = np.empty(int(ok.sum()), dtype=PAIR_DTYPE)
    pairs["pulse_index"] = common[ok]
    pairs["omega_a"] = wa[ok]
    pairs["omega_b"] = wb[ok]
    counters = {
        "tags_a": int(a.size + extra_a),
        "tags_b": int(b.size + extra_b),
        "extra_a": extra_a,
        "extra_b": extra_b,
        "coincident_pulses": int(common.size),
        "pairs": int(pairs.size),
        "pairs_lost": int(common.size - pairs.size),
        "clamped_a": int(np.sum(sa == CLAMPED)),
        "clamped_b": int(np.sum(sb == CLAMPED)),
        "discarded_a": int(np.sum(sa == DISCARDED)),
        "discarded_b": int(np.sum(sb == DISCARDED)),
        "unpaired_a": int(a.size - common.size),
        "unpaired_b": int(b.size - common.size),
    }
    return pairs, counters


def match_by_window(times_a, times_b, window: float, offset: float = 0.0):
    """Pair sorted absolute timestamps without pulse indices.

    Each A tag takes the nearest unused B tag with
    ``|t_b - t_a - offset| <= window``. Returns index arrays ``(ia, ib)``.
    """
    ta = np.asarray(times_a, dtype=float)
    tb = np.asarray(times_b, dtype=float)
    if tb.size == 0 or ta.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if np.any(np.diff(ta) < 0) or np.any(np.diff(tb) < 0):
        raise InputError("timestamps must be sorted")
    target = ta + offset
    j = np.searchsorted(tb, target)
    lo = np.clip(j - 1, 0, tb.size - 1)
    hi = np.clip(j, 0, tb.size - 1)
    pick = np.where(np.abs(tb[lo] - target) <= np.abs(tb[hi] - target), lo, hi)
    good = np.abs(tb[pick] - target) <= window
    ia = np.nonzero(good)[0]
    ib = pick[good]
    _, first = np.unique(ib, return_index=True)
    first.sort()
    return ia[first], ib[first]


def accumulate(pairs: np.ndarray, grid: SpectralGrid) -> JointSpectrum:
    """Nearest-bin 2-D histogram of pair frequencies (counts kind)."""
    n = grid.n_points
    ia = np.clip(grid.index_of(pairs["omega_a"]), 0, n - 1)
    ib = np.clip(grid.index_of(pairs["omega_b"]), 0, n - 1)
    counts = np.bincount(ia * n + ib, minlength=n * n).reshape(n, n)
    return JointSpectrum(grid, grid, counts, "counts", {"pairs": str(pairs.size)})


def normalize(js: JointSpectrum, n_pulses: int) -> JointSpectrum:
    if js.kind != "counts":
        raise ValueError("normalize expects a counts-kind joint spectrum")
    if n_pulses < 1:
        raise ValueError("n_pulses must be positive")
    md = dict(js.metadata)
    md["n_pulses"] = str(n_pulses)
    return JointSpectrum(js.grid_a, js.grid_b, js.values / n_pulses, "probability", md)


def tv_distance(p, q) -> float:
    """``0.5 * sum |p - q|`` over all cells."""
    pv = p.values if isinstance(p, JointSpectrum) else np.asarray(p)
    qv = q.values if isinstance(q, JointSpectrum) else np.asarray(q)
    return 0.5 * float(np.abs(pv - qv).sum())


def format_summary(counters: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in counters.items())
