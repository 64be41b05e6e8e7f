"""From joint spectra to A-scans, resolution, roll-off and B-scans.

Depths are optical path differences in metres. A spectrum sampled every
``step`` rad/s transforms to a depth axis with spacing
``2 pi c / (n_fft * step)``; a fringe ``exp(i z w / c)`` peaks at ``+z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .spectral import C_LIGHT, JointSpectrum

__all__ = [
    "LineSpectrum",
    "AScan",
    "PeakMetrics",
    "RolloffCurve",
    "BScan",
    "ReconstructionConfig",
    "row_mean",
    "column_mean",
    "diagonal_mean",
    "compensate_dispersion",
    "to_ascan",
    "peak_metrics",
    "rolloff",
    "extract_spectrum",
    "reconstruct_ascan",
    "bscan",
    "singular_value_ratio",
    "fringe_peak",
    "ascan_to_csv",
    "rolloff_to_csv",
    "bscan_to_csv",
    "bscan_to_pgm",
]


@dataclass(frozen=True)
class LineSpectrum:
    """1-D spectrum on a uniform axis.

    ``valid`` flags samples that were built from complete data; for
    diagonal spectra the edge samples are zero-padded and flagged False.
    """

    omega: np.ndarray
    values: np.ndarray
    center: float
    valid: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values)
        if w.shape != v.shape or w.ndim != 1 or w.size < 2:
            raise ValueError("omega and values must be 1-D arrays of equal length >= 2")
        valid = np.ones(w.size, dtype=bool) if self.valid is None else np.asarray(self.valid, dtype=bool)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "valid", valid)

    @property
    def step(self) -> float:
        return float(self.omega[1] - self.omega[0])


@dataclass(frozen=True)
class AScan:
    depth: np.ndarray  # OPD in metres, uniform and increasing
    magnitude: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.depth, dtype=float)
        m = np.asarray(self.magnitude, dtype=float)
        if d.shape != m.shape:
            raise ValueError("depth and magnitude lengths differ")
        if d.size > 1 and np.any(np.diff(d) <= 0):
            raise ValueError("depth axis must be increasing")
        object.__setattr__(self, "depth", d)
        object.__setattr__(self, "magnitude", m)

    @property
    def sample(self) -> float:
        return float(self.depth[1] - self.depth[0])


@dataclass(frozen=True)
class PeakMetrics:
    position: float
    height: float
    fwhm: float
    ambiguous: bool = False


@dataclass(frozen=True)
class RolloffCurve:
    depths: np.ndarray
    sensitivity_db: np.ndarray
    heights: np.ndarray
    six_db_range: float  # inf when the -6 dB level is never reached


@dataclass(frozen=True)
class BScan:
    depth: np.ndarray
    linear: np.ndarray  # (n_depth, n_lateral); one column per joint spectrum
    log_db: np.ndarray  # 10 log10 relative to the image maximum, clipped at the floor
    db_floor: float


@dataclass(frozen=True)
class ReconstructionConfig:
    mode: str = "row"  # row | column | diagonal
    n_diagonals: int = 20
    anti_diagonal: bool = False
    zero_pad: int = 4
    window: str | None = None  # None or "hann"
    phase_poly: tuple[float, ...] = ()
    db_floor: float = -60.0

    def __post_init__(self):
        if self.mode not in ("row", "column", "diagonal"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.window not in (None, "hann"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.zero_pad < 1:
            raise ValueError("zero_pad must be >= 1")
        object.__setattr__(self, "phase_poly", tuple(self.phase_poly))


def row_mean(js: JointSpectrum) -> LineSpectrum:
    """Mean across each row: the channel-A spectrum."""
    g = js.grid_a
    return LineSpectrum(g.omega, js.values.mean(axis=1), g.center_omega)


def column_mean(js: JointSpectrum) -> LineSpectrum:
    """Mean down each column: the channel-B spectrum."""
    g = js.grid_b
    return LineSpectrum(g.omega, js.values.mean(axis=0), g.center_omega)


def diagonal_mean(js: JointSpectrum, n_diagonals: int = 20, anti: bool = False) -> LineSpectrum:
    """Mean of the ``n_diagonals`` central diagonals.

    Offsets ``d`` run over ``[-n//2, ceil(n/2) - 1]`` (an even ``n`` has one
    more negative offset). The cell ``(k - d//2, k - d//2 + d)`` of offset
    ``d`` is assigned to diagonal coordinate ``k``, so every offset is
    centred on the same point of the main diagonal; cells that fall outside
    the matrix count as zero and flag ``k`` as invalid.

    ``anti=True`` uses the anti-diagonals instead (``w + w'`` constant,
    i.e. negatively correlated frequency pairs). The returned axis is then
    the difference frequency, ``w_c + (w - w')``, with twice the grid step,
    so a fringe in ``w - w'`` transforms to its OPD.
    """
    m = js.values
    n = m.shape[0]
    if m.shape[0] != m.shape[1] or not js.grid_a.is_compatible(js.grid_b):
        raise ValueError("diagonal extraction needs a square joint spectrum on one grid")
    if not 1 <= n_diagonals < n:
        raise ValueError(f"n_diagonals must lie in [1, {n - 1}]")
    if anti:
        m = m[:, ::-1]
    k = np.arange(n)
    total = np.zeros(n)
    valid = np.ones(n, dtype=bool)
    for d in range(-(n_diagonals // 2), -(-n_diagonals // 2)):
        i = k - d // 2
        j = i + d
        inside = (i >= 0) & (i < n) & (j >= 0) & (j < n)
        total[inside] += m[i[inside], j[inside]]
        valid &= inside
    g = js.grid_a
    omega = g.omega if not anti else g.center_omega + 2 * g.detuning
    return LineSpectrum(omega, total / n_diagonals, g.center_omega, valid)


def compensate_dispersion(spec: LineSpectrum, phase_poly) -> LineSpectrum:
    """Multiply by ``exp(-i sum_k c_k (w - w_c)^k)``; coefficients in ascending order."""
    coeffs = np.asarray(phase_poly, dtype=float)
    if coeffs.size == 0 or not np.any(coeffs):
        return spec
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("phase polynomial must be finite")
    phase = P.polyval(spec.omega - spec.center, coeffs)
    return LineSpectrum(spec.omega, spec.values * np.exp(-1j * phase), spec.center, spec.valid)


def to_ascan(spec: LineSpectrum, zero_pad: int = 4, window: str | None = None) -> AScan:
    """Two-sided ``|DFT| / N`` on an OPD axis.

    With ``n_fft = zero_pad * N`` the magnitudes satisfy
    ``sum(mag^2) = n_fft / N^2 * sum(|x|^2)`` (x windowed).
    """
    x = np.asarray(spec.values)
    n = x.size
    if window == "hann":
        x = x * np.hanning(n)
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")
    n_fft = int(zero_pad) * n
    mag = np.abs(np.fft.fftshift(np.fft.fft(x, n=n_fft))) / n
    m = np.arange(n_fft) - n_fft // 2
    depth = m * 2 * np.pi * C_LIGHT / (n_fft * spec.step)
    return AScan(depth, mag)


def _local_maxima(y):
    left = np.r_[-np.inf, y[:-1]]
    right = np.r_[y[1:], -np.inf]
    return np.nonzero((y >= left) & (y >= right) & ((y > left) | (y > right)))[0]


def peak_metrics(a: AScan, search_window: tuple[float, float] | None = None) -> PeakMetrics:
    """Tallest local maximum inside ``search_window`` with its FWHM.

    Position is refined by a parabola through the three top samples; FWHM
    comes from linear interpolation of the half-height crossings. Two
    maxima of equal height: the shallower wins and ``ambiguous`` is set.
    """
    y = a.magnitude
    lo, hi = (a.depth[0], a.depth[-1]) if search_window is None else search_window
    if not hi > lo:
        raise ValueError("search window must have hi > lo")
    inwin = (a.depth >= lo) & (a.depth <= hi)
    if not inwin.any():
        raise ValueError("search window contains no samples")
    cand = [i for i in _local_maxima(y) if inwin[i]]
    if not cand:
        raise ValueError("no local maximum inside the search window")
    heights = y[cand]
    top = heights.max()
    ties = np.nonzero(np.isclose(heights, top, rtol=1e-9, atol=0))[0]
    i = cand[ties[0]]
    ambiguous = len(ties) > 1

    pos, height = a.depth[i], y[i]
    if 0 < i < y.size - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        if den < 0:
            off = 0.5 * (y0 - y2) / den
            pos = a.depth[i] + off * a.sample
            height = y1 - 0.25 * (y0 - y2) * off

    half = y[i] / 2
    l = i
    while l > 0 and y[l] > half:
        l -= 1
    r = i
    while r < y.size - 1 and y[r] > half:
        r += 1
    xl = np.interp(half, [y[l], y[l + 1]], [a.depth[l], a.depth[l + 1]]) if y[l] <= half else a.depth[0]
    xr = np.interp(half, [y[r], y[r - 1]], [a.depth[r], a.depth[r - 1]]) if y[r] <= half else a.depth[-1]
    return PeakMetrics(float(pos), float(height), float(xr - xl), ambiguous)


def rolloff(scans, depths, halfwidth: float | None = None) -> RolloffCurve:
    """Peak height versus known depth, in dB relative to the shallowest scan.

    Heights are read within ``depth +/- halfwidth`` (default: half the
    smallest depth spacing). The -6 dB range is linearly interpolated
    between the bracketing depths.
    """
    depths = np.asarray(depths, dtype=float)
    scans = list(scans)
    if depths.size < 3 or len(scans) != depths.size:
        raise ValueError("rolloff needs at least three scans with matching depths")
    if np.any(np.diff(depths) <= 0):
        raise ValueError("depths must be increasing")
    if halfwidth is None:
        halfwidth = 0.5 * np.min(np.diff(depths))
    heights = np.array([peak_metrics(s, (d - halfwidth, d + halfwidth)).height for s, d in zip(scans, depths)])
    return rolloff_from_heights(depths, heights)


def rolloff_from_heights(depths, heights) -> RolloffCurve:
    depths = np.asarray(depths, dtype=float)
    heights = np.asarray(heights, dtype=float)
    sens = 10 * np.log10(heights / heights[0])
    below = np.nonzero(sens <= -6.0)[0]
    if below.size == 0:
        rng = np.inf
    else:
        i = below[0]
        s0, s1 = sens[i - 1], sens[i]
        rng = depths[i - 1] + (-6.0 - s0) / (s1 - s0) * (depths[i] - depths[i - 1])
    return RolloffCurve(depths, sens, heights, float(rng))


def extract_spectrum(js: JointSpectrum, cfg: ReconstructionConfig) -> LineSpectrum:
    if cfg.mode == "row":
        spec = row_mean(js)
    elif cfg.mode == "column":
        spec = column_mean(js)
    else:
        spec = diagonal_mean(js, cfg.n_diagonals, cfg.anti_diagonal)
    return compensate_dispersion(spec, cfg.phase_poly)


def reconstruct_ascan(js: JointSpectrum, cfg: ReconstructionConfig = ReconstructionConfig()) -> AScan:
    return to_ascan(extract_spectrum(js, cfg), cfg.zero_pad, cfg.window)


def bscan(jss, cfg: ReconstructionConfig = ReconstructionConfig()) -> BScan:
    """One non-negative-depth A-scan column per joint spectrum, left to right."""
    jss = list(jss)
    if not jss:
        raise ValueError("bscan needs at least one joint spectrum")
    cols = [reconstruct_ascan(js, cfg) for js in jss]
    keep = cols[0].depth >= 0
    depth = cols[0].depth[keep]
    for c in cols[1:]:
        if c.depth.shape != cols[0].depth.shape or not np.allclose(c.depth, cols[0].depth):
            raise ValueError("joint spectra give different depth axes")
    linear = np.stack([c.magnitude[keep] for c in cols], axis=1)
    peak = linear.max()
    if peak > 0:
        with np.errstate(divide="ignore"):
            log_db = np.maximum(10 * np.log10(linear / peak), cfg.db_floor)
    else:
        log_db = np.full(linear.shape, cfg.db_floor)
    return BScan(depth, linear, log_db, cfg.db_floor)


def singular_value_ratio(js: JointSpectrum) -> float:
    """Second over first singular value of the joint spectrum matrix."""
    s = np.linalg.svd(js.values, compute_uv=False)
    return float(s[1] / s[0]) if s[0] > 0 else 0.0


def fringe_peak(values, envelope=None, guard: int = 1):
    """Dominant 2-D fringe frequency ``(k_a, k_b)`` in FFT bins.

    The map is divided by ``envelope`` when given, mean-subtracted,
    Hann-windowed and transformed; bins with ``|k_a|, |k_b| <= guard`` are
    ignored. Axis-parallel fringes peak on a coordinate axis, fringes
    running at an angle peak off the axes.
    """
    v = np.asarray(values, dtype=float)
    if envelope is not None:
        env = np.asarray(envelope, dtype=float)
        v = np.divide(v, env, out=np.zeros_like(v), where=env > 0)
    v = v - v.mean()
    w = np.outer(np.hanning(v.shape[0]), np.hanning(v.shape[1]))
    spec = np.abs(np.fft.fftshift(np.fft.fft2(v * w)))
    ka = np.arange(v.shape[0]) - v.shape[0] // 2
    kb = np.arange(v.shape[1]) - v.shape[1] // 2
    mask = (np.abs(ka)[:, None] <= guard) & (np.abs(kb)[None, :] <= guard)
    spec[mask] = 0
    i, j = np.unravel_index(np.argmax(spec), spec.shape)
    return int(ka[i]), int(kb[j])


# --- output formats -----------------------------------------------------------


def _meta(metadata):
    return "".join(f"# {k}={v}\n" for k, v in sorted((metadata or {}).items()))


def ascan_to_csv(a: AScan, metadata=None) -> str:
    rows = [f"{d * 1e6!r},{m!r}" for d, m in zip(a.depth.tolist(), a.magnitude.tolist())]
    return _meta(metadata) + "depth_um,magnitude\n" + "\n".join(rows) + "\n"


def rolloff_to_csv(r: RolloffCurve, metadata=None) -> str:
    md = dict(metadata or {})
    md["six_db_range_um"] = "inf" if np.isinf(r.six_db_range) else repr(r.six_db_range * 1e6)
    rows = [
        f"{d * 1e6!r},{s!r},{h!r}"
        for d, s, h in zip(r.depths.tolist(), r.sensitivity_db.tolist(), r.heights.tolist())
    ]
    return _meta(md) + "depth_um,sensitivity_db,height\n" + "\n".join(rows) + "\n"


def bscan_to_csv(b: BScan, metadata=None) -> str:
    n_lat = b.linear.shape[1]
    head = "depth_um," + ",".join(f"col{i}" for i in range(n_lat))
    rows = [f"{d * 1e6!r}," + ",".join(repr(x) for x in row) for d, row in zip(b.depth.tolist(), b.linear.tolist())]
    return _meta(metadata) + head + "\n" + "\n".join(rows) + "\n"


def bscan_to_pgm(b: BScan, metadata=None) -> bytes:
    """Binary 16-bit PGM (big-endian): ``db_floor`` maps to 0, the image maximum to 65535.

    Rows are depths (shallow at the top), columns lateral positions.
    """
    scaled = (b.log_db - b.db_floor) / (-b.db_floor)
    pix = np.rint(np.clip(scaled, 0, 1) * 65535).astype(">u2")
    h, w = pix.shape
    comments = "".join(f"# {k}={v}\n" for k, v in sorted((metadata or {}).items()))
    header = f"P5\n# db_floor={b.db_floor!r}\n{comments}{w} {h}\n65535\n".encode("ascii")
    return header + pix.tobytes()
