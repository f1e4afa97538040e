"""Spectrum filtering, common-grid interpolation, and normalizations.

The filter removes spectra that are unphysical or unlikely to come from a
real cell: too few capacitive points, inductive range dominating, negative
real impedance, or real impedance that rises with frequency.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .circuit import Spectrum
from .datagen import Dataset

REASON_TOO_FEW_NEG_IMAG = "too_few_neg_imag"
REASON_NEG_IMAG_RANGE = "neg_imag_range"
REASON_NEGATIVE_REAL = "negative_real"
REASON_RISING_REAL = "rising_real"


class TooFewPoints(ValueError):
    pass


class NonPositiveMaxReal(ValueError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    min_neg_imag_points: int = 10
    range_ratio: float = 0.5
    real_increase_tol: float = 0.03   # on max-real-normalized values
    # "all": compare every higher-frequency point against every earlier one;
    # "consecutive": adjacent points only
    real_increase_pairs: str = "all"

    def __post_init__(self):
        if self.min_neg_imag_points <= 0 or self.range_ratio <= 0 or self.real_increase_tol <= 0:
            raise ValueError("filter thresholds must be positive")
        if self.real_increase_pairs not in ("all", "consecutive"):
            raise ValueError("real_increase_pairs must be 'all' or 'consecutive'")


def drop_positive_imag(s: Spectrum) -> Spectrum:
    """Remove points with Im(z) > 0; may return an empty spectrum."""
    keep = s.z.imag <= 0
    if keep.all():
        return s
    return Spectrum(freq=s.freq[keep], z=s.z[keep], label=s.label, id=s.id,
                    extrapolated=s.extrapolated)


def filter_spectrum(s: Spectrum, cfg: FilterConfig = FilterConfig()) -> str | None:
    """Return None to keep the spectrum, or a rejection reason code."""
    if np.count_nonzero(s.z.imag < 0) < cfg.min_neg_imag_points:
        return REASON_TOO_FEW_NEG_IMAG
    u = -s.z.imag
    if u.min() < 0 and u.max() < cfg.range_ratio * abs(u.min()):
        return REASON_NEG_IMAG_RANGE
    re = s.z.real
    if np.any(re < 0):
        return REASON_NEGATIVE_REAL
    max_re = re.max()
    if max_re > 0:
        scaled = re / max_re
        if cfg.real_increase_pairs == "all":
            # rise of point i over the minimum of all earlier (lower-frequency)
            # points covers every pair i > j
            rises = scaled[1:] - np.minimum.accumulate(scaled)[:-1]
        else:
            rises = np.diff(scaled)
        if rises.size and rises.max() > cfg.real_increase_tol:
            return REASON_RISING_REAL
    return None


@dataclass
class FilterReport:
    kept: Dataset
    rejected: list[tuple[str, str, str]]   # (id, class, reason)
    removed_per_class: dict[str, int]

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    def to_csv_rows(self):
        rows = [("id", "class", "decision", "reason")]
        for s in self.kept.spectra:
            rows.append((s.id or "", s.label or "", "keep", ""))
        for sid, label, reason in self.rejected:
            rows.append((sid, label, "reject", reason))
        return rows


def filter_dataset(d: Dataset, cfg: FilterConfig = FilterConfig()) -> FilterReport:
    """Drop positive-imaginary points, then reject spectra per the criteria."""
    kept: list[Spectrum] = []
    rejected: list[tuple[str, str, str]] = []
    removed: dict[str, int] = {}
    for s in d.spectra:
        dropped = drop_positive_imag(s)
        reason = filter_spectrum(dropped, cfg)
        if reason is None:
            kept.append(dropped)
        else:
            rejected.append((s.id or "", s.label or "", reason))
            removed[s.label or ""] = removed.get(s.label or "", 0) + 1
    return FilterReport(kept=Dataset(spectra=kept, provenance=d.provenance),
                        rejected=rejected, removed_per_class=removed)


@functools.lru_cache(maxsize=8)
def common_grid(points: int = 30, fmin: float = 1e1, fmax: float = 1e5) -> np.ndarray:
    grid = np.logspace(np.log10(fmin), np.log10(fmax), points)
    grid.setflags(write=False)
    return grid


def interpolate(s: Spectrum, points: int = 30, fmin: float = 1e1,
                fmax: float = 1e5) -> Spectrum:
    """Resample onto the shared log-spaced grid, linear in log10(frequency).

    Outside the source range the end values are held constant and the result
    is flagged extrapolated.
    """
    if len(s) < 2:
        raise TooFewPoints(f"need at least 2 points to interpolate, got {len(s)}")
    grid = common_grid(points, fmin, fmax)
    logx = np.log10(s.freq)
    logg = np.log10(grid)
    re = np.interp(logg, logx, s.z.real)
    im = np.interp(logg, logx, s.z.imag)
    extrapolated = bool(s.freq[0] > fmin * (1 + 1e-12) or s.freq[-1] < fmax * (1 - 1e-12))
    return Spectrum(freq=grid, z=re + 1j * im, label=s.label, id=s.id,
                    extrapolated=extrapolated)


@dataclass
class FeatureMatrix:
    """Row-per-spectrum matrix: raw interpolated impedances or engineered
    features, with one label per row."""

    X: np.ndarray
    labels: np.ndarray
    columns: tuple[str, ...]
    freq_grid: np.ndarray | None = None
    ids: tuple[str, ...] = ()
    degenerate_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.labels = np.asarray(self.labels)
        if self.X.ndim != 2 or self.X.shape[0] != self.labels.shape[0]:
            raise ValueError("X rows and labels must align")
        if len(self.columns) != self.X.shape[1]:
            raise ValueError("column names must match X columns")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


def to_feature_matrix(d: Dataset) -> FeatureMatrix:
    """Arrange interpolated spectra as [real block | imaginary block]."""
    if not d.spectra:
        raise ValueError("empty dataset")
    grid = d.spectra[0].freq
    n = grid.size
    for s in d.spectra:
        if len(s) != n or not np.array_equal(s.freq, grid):
            raise ValueError("all spectra must share the common grid")
    X = np.empty((len(d.spectra), 2 * n))
    for i, s in enumerate(d.spectra):
        X[i, :n] = s.z.real
        X[i, n:] = s.z.imag
    columns = tuple(f"zreal__p{j:02d}" for j in range(n)) + \
        tuple(f"zimag__p{j:02d}" for j in range(n))
    ids = tuple(s.id or "" for s in d.spectra)
    return FeatureMatrix(X=X, labels=np.array(d.labels()), columns=columns,
                         freq_grid=grid, ids=ids)


def normalize_max_real(m: FeatureMatrix) -> FeatureMatrix:
    """Divide each row by its maximum real-part entry, keeping the real and
    imaginary scales coupled."""
    if m.freq_grid is None:
        raise ValueError("normalize_max_real applies to raw impedance matrices")
    p = m.freq_grid.size
    max_real = m.X[:, :p].max(axis=1)
    if np.any(max_real <= 0):
        bad = int(np.argmax(max_real <= 0))
        raise NonPositiveMaxReal(f"row {bad} has max real {max_real[bad]}")
    X = m.X / max_real[:, None]
    return FeatureMatrix(X=X, labels=m.labels, columns=m.columns,
                         freq_grid=m.freq_grid, ids=m.ids)


@dataclass(frozen=True)
class MinMaxNormalized:
    """Per-axis min-max rescaling of one spectrum onto [0, 1]."""

    re: np.ndarray
    im: np.ndarray
    degenerate_real: bool
    degenerate_imag: bool

    @property
    def degenerate(self) -> bool:
        return self.degenerate_real or self.degenerate_imag


def _minmax(v: np.ndarray) -> tuple[np.ndarray, bool]:
    span = v.max() - v.min()
    if span == 0:
        return np.zeros_like(v), True
    return (v - v.min()) / span, False


def normalize_minmax(s: Spectrum) -> MinMaxNormalized:
    re, deg_re = _minmax(s.z.real)
    im, deg_im = _minmax(s.z.imag)
    return MinMaxNormalized(re=re, im=im, degenerate_real=deg_re, degenerate_imag=deg_im)
