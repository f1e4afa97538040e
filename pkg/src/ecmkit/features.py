"""Time-series features of interpolated spectra and relevance selection.

The real and imaginary channels of a spectrum on the common log-frequency
grid are treated as evenly spaced series (log-frequency standing in for
time).  The default bank covers the features that matter for circuit-class
discrimination plus standard summary statistics; selection keeps features
whose class-conditional distributions differ by a Mann-Whitney U test under
Benjamini-Yekutieli FDR control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .circuit import Spectrum
from .preprocess import FeatureMatrix


class TooShort(ValueError):
    pass


class Empty(ValueError):
    pass


class DegenerateLabels(ValueError):
    pass


# --- series calculators -------------------------------------------------

def minimum(series) -> float:
    series = np.asarray(series, float)
    if series.size == 0:
        raise Empty("empty series")
    return float(series.min())


def maximum(series) -> float:
    series = np.asarray(series, float)
    if series.size == 0:
        raise Empty("empty series")
    return float(series.max())


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    xd = x - x.mean()
    yd = y - y.mean()
    denom = np.sqrt((xd * xd).sum() * (yd * yd).sum())
    if denom == 0:
        return float("nan")
    return float((xd * yd).sum() / denom)


def linear_trend(series) -> tuple[float, float, float]:
    """Least-squares line against 0..n-1: (slope, intercept, r-value)."""
    y = np.asarray(series, float)
    if y.size < 2:
        raise TooShort("linear trend needs at least 2 points")
    x = np.arange(y.size, dtype=float)
    r = _pearson_r(x, y)
    sx = x.std()
    sy = y.std()
    slope = 0.0 if sy == 0 else (r * sy / sx if np.isfinite(r) else 0.0)
    intercept = float(y.mean() - slope * x.mean())
    return slope, intercept, r


def agg_linear_trend_rvalue(series, chunk_len: int = 10, agg: str = "max") -> float:
    """Pearson r of per-chunk aggregates against the chunk index.

    The series is cut into consecutive chunks of chunk_len (incomplete tail
    discarded) and each chunk reduced by agg before the regression.
    """
    y = np.asarray(series, float)
    if y.size < chunk_len:
        raise TooShort(f"need at least chunk_len={chunk_len} points")
    k = y.size // chunk_len
    chunks = y[:k * chunk_len].reshape(k, chunk_len)
    reduced = chunks.max(axis=1) if agg == "max" else chunks.min(axis=1)
    if k < 2:
        return float("nan")
    return _pearson_r(np.arange(k, dtype=float), reduced)


def number_peaks(series, n: int = 1) -> int:
    """Count values strictly greater than all n neighbors on both sides."""
    x = np.asarray(series, float)
    if x.size < 2 * n + 1:
        raise TooShort(f"need at least {2 * n + 1} points for support {n}")
    m = x.size
    inner = x[n:m - n]
    is_peak = np.ones(inner.size, dtype=bool)
    for k in range(1, n + 1):
        is_peak &= inner > x[n - k:m - n - k]
        is_peak &= inner > x[n + k:m - n + k]
    return int(np.count_nonzero(is_peak))


def energy_ratio_by_chunks(series, num_segments: int = 10, focus: int = 9) -> float:
    """Share of the total sum of squares held by one of num_segments chunks.

    Chunks are as even as possible with earlier chunks taking the remainder.
    A zero-energy series returns 0 (degenerate convention).
    """
    x = np.asarray(series, float)
    if not 0 <= focus < num_segments:
        raise ValueError(f"focus must be in [0, {num_segments})")
    total = float((x * x).sum())
    if total == 0:
        return 0.0
    chunk = np.array_split(x, num_segments)[focus]
    return float((chunk * chunk).sum() / total)


def ar_coefficients(series, k: int = 10) -> np.ndarray:
    """Conditional least-squares AR(k) fit with intercept.

    Returns (intercept, lag-1 coeff, ..., lag-k coeff); singular designs are
    solved by minimum-norm least squares.
    """
    x = np.asarray(series, float)
    if x.size < 2 * k:
        raise TooShort(f"AR({k}) needs at least {2 * k} points")
    rows = x.size - k
    design = np.empty((rows, k + 1))
    design[:, 0] = 1.0
    for lag in range(1, k + 1):
        design[:, lag] = x[k - lag:x.size - lag]
    coef, *_ = np.linalg.lstsq(design, x[k:], rcond=None)
    return coef


def mean_abs_change(series) -> float:
    x = np.asarray(series, float)
    return float(np.abs(np.diff(x)).mean()) if x.size > 1 else 0.0


def abs_energy(series) -> float:
    x = np.asarray(series, float)
    return float((x * x).sum())


def skewness(series) -> float:
    return float(stats.skew(np.asarray(series, float)))


# --- feature bank --------------------------------------------------------

@dataclass(frozen=True)
class FeatureDef:
    name: str
    channel: str  # "zreal" | "zimag"
    func: Callable[[np.ndarray], float]


def _channel_defs(ch: str) -> list[FeatureDef]:
    defs = [
        FeatureDef(f"{ch}__minimum", ch, minimum),
        FeatureDef(f"{ch}__maximum", ch, maximum),
        FeatureDef(f"{ch}__mean", ch, lambda x: float(np.mean(x))),
        FeatureDef(f"{ch}__variance", ch, lambda x: float(np.var(x))),
        FeatureDef(f"{ch}__skewness", ch, skewness),
        FeatureDef(f"{ch}__abs_energy", ch, abs_energy),
        FeatureDef(f"{ch}__mean_abs_change", ch, mean_abs_change),
        FeatureDef(f"{ch}__count_above_mean", ch,
                   lambda x: float(np.count_nonzero(x > np.mean(x)))),
        FeatureDef(f"{ch}__count_below_mean", ch,
                   lambda x: float(np.count_nonzero(x < np.mean(x)))),
        FeatureDef(f"{ch}__first_value", ch, lambda x: float(x[0])),
        FeatureDef(f"{ch}__last_value", ch, lambda x: float(x[-1])),
        FeatureDef(f'{ch}__linear_trend__attr_"slope"', ch, lambda x: linear_trend(x)[0]),
        FeatureDef(f'{ch}__linear_trend__attr_"intercept"', ch, lambda x: linear_trend(x)[1]),
        FeatureDef(f'{ch}__linear_trend__attr_"rvalue"', ch, lambda x: linear_trend(x)[2]),
        FeatureDef(f'{ch}__agg_linear_trend__attr_"rvalue"__chunk_len_10__f_agg_"max"', ch,
                   lambda x: agg_linear_trend_rvalue(x, 10, "max")),
        FeatureDef(f'{ch}__agg_linear_trend__attr_"rvalue"__chunk_len_10__f_agg_"min"', ch,
                   lambda x: agg_linear_trend_rvalue(x, 10, "min")),
    ]
    for n in (1, 2, 3):
        defs.append(FeatureDef(f"{ch}__number_peaks__n_{n}", ch,
                               lambda x, n=n: float(number_peaks(x, n))))
    for seg in range(10):
        defs.append(FeatureDef(
            f"{ch}__energy_ratio_by_chunks__num_segments_10__segment_focus_{seg}", ch,
            lambda x, seg=seg: energy_ratio_by_chunks(x, 10, seg)))
    for c in range(5):
        defs.append(FeatureDef(f"{ch}__ar_coefficient__coeff_{c}__k_10", ch,
                               lambda x, c=c: float(ar_coefficients(x, 10)[c])))
    return defs


def default_bank() -> tuple[FeatureDef, ...]:
    bank = tuple(_channel_defs("zreal") + _channel_defs("zimag"))
    names = [d.name for d in bank]
    assert len(names) == len(set(names))
    return bank


@dataclass
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray
    degenerate: dict[str, int] = field(default_factory=dict)


def extract_features(s: Spectrum, bank=None) -> FeatureVector:
    """Evaluate every bank feature on its channel; non-finite results map to
    0 and are recorded in the degenerate counter."""
    bank = default_bank() if bank is None else tuple(bank)
    channels = {"zreal": s.z.real, "zimag": s.z.imag}
    values = np.empty(len(bank))
    degenerate: dict[str, int] = {}
    for i, fd in enumerate(bank):
        v = fd.func(channels[fd.channel])
        if not np.isfinite(v):
            degenerate[fd.name] = degenerate.get(fd.name, 0) + 1
            v = 0.0
        values[i] = v
    return FeatureVector(names=tuple(fd.name for fd in bank), values=values,
                         degenerate=degenerate)


def featurize_dataset(spectra, bank=None, labels=None, ids=None) -> FeatureMatrix:
    """Row-per-spectrum engineered feature matrix."""
    spectra = list(spectra)
    bank = default_bank() if bank is None else tuple(bank)
    if not spectra:
        raise ValueError("no spectra to featurize")
    X = np.empty((len(spectra), len(bank)))
    degenerate: dict[str, int] = {}
    for i, s in enumerate(spectra):
        fv = extract_features(s, bank)
        X[i] = fv.values
        for name, cnt in fv.degenerate.items():
            degenerate[name] = degenerate.get(name, 0) + cnt
    labels = np.array([s.label or "" for s in spectra]) if labels is None else np.asarray(labels)
    ids = tuple(s.id or "" for s in spectra) if ids is None else tuple(ids)
    return FeatureMatrix(X=X, labels=labels, columns=tuple(fd.name for fd in bank),
                         ids=ids, degenerate_counts=degenerate)


# --- relevance selection --------------------------------------------------

@dataclass
class RelevanceTable:
    names: tuple[str, ...]
    p_values: np.ndarray           # per feature, class-adjusted
    per_class_p: np.ndarray        # n_features x n_classes
    selected: np.ndarray           # boolean mask
    fdr_level: float
    classes: tuple[str, ...]


def _benjamini_yekutieli(pvals: np.ndarray, q: float) -> np.ndarray:
    m = pvals.size
    c_m = np.sum(1.0 / np.arange(1, m + 1))
    order = np.argsort(pvals, kind="stable")
    thresholds = q * np.arange(1, m + 1) / (m * c_m)
    passed = pvals[order] <= thresholds
    selected = np.zeros(m, dtype=bool)
    if passed.any():
        k = int(np.max(np.nonzero(passed)[0]))
        selected[order[:k + 1]] = True
    return selected


def select_relevant(m: FeatureMatrix, fdr_level: float = 0.05) -> RelevanceTable:
    """Mann-Whitney one-vs-rest per class; the per-feature p-value is the
    smallest class p-value Bonferroni-adjusted for the number of classes,
    then Benjamini-Yekutieli controls the FDR across features.  Constant
    features are always rejected."""
    classes = tuple(sorted(set(m.labels.tolist())))
    if len(classes) < 2:
        raise DegenerateLabels("need at least 2 classes")
    for c in classes:
        if np.count_nonzero(m.labels == c) < 2:
            raise DegenerateLabels(f"class {c!r} has fewer than 2 rows")
    n_feat = m.X.shape[1]
    per_class = np.ones((n_feat, len(classes)))
    constant = np.array([np.all(m.X[:, j] == m.X[0, j]) for j in range(n_feat)])
    for j in range(n_feat):
        if constant[j]:
            continue
        col = m.X[:, j]
        for ci, c in enumerate(classes):
            mask = m.labels == c
            per_class[j, ci] = stats.mannwhitneyu(
                col[mask], col[~mask], alternative="two-sided").pvalue
    p = np.minimum(per_class.min(axis=1) * len(classes), 1.0)
    p[constant] = 1.0
    selected = _benjamini_yekutieli(p, fdr_level)
    selected[constant] = False
    return RelevanceTable(names=m.columns, p_values=p, per_class_p=per_class,
                          selected=selected, fdr_level=fdr_level, classes=classes)


def apply_selection(m: FeatureMatrix, table: RelevanceTable) -> FeatureMatrix:
    idx = np.nonzero(table.selected)[0]
    return FeatureMatrix(X=m.X[:, idx], labels=m.labels,
                         columns=tuple(m.columns[i] for i in idx),
                         ids=m.ids, degenerate_counts=m.degenerate_counts)
