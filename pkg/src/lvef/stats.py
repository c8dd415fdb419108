"""Evaluation statistics: correlation, R^2, paired t-test, ROC/AUC, confusion counts, bootstrap CIs.

Student-t tail probabilities go through a regularized incomplete beta
evaluated by continued fractions, so no stats package is needed at runtime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDifferences,
    FlatTarget,
    InsufficientData,
    LengthMismatch,
    SingleClass,
    SingleClassResample,
    TooFewSamples,
    ZeroVariance,
)
from .rng import XorShift64Star

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _CF_TINY else _CF_TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _CF_TINY else _CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _CF_TINY else _CF_TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def pearson(xs, ys):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    n = x.size
    if n < 3:
        raise TooFewSamples(f"pearson needs n >= 3, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("both inputs need non-zero variance")
    r = max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sxx * syy)))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, t_two_sided_p(t, n - 2)


def r2_score(y_true, y_pred):
    """1 - SS_res / SS_tot.

    With a flat target the score is 1.0 when every residual is zero and
    undefined otherwise (:class:`FlatTarget`).
    """
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape:
        raise LengthMismatch(f"{yt.size} vs {yp.size} values")
    if yt.size < 2:
        raise TooFewSamples("r2 needs at least 2 samples")
    ss_res = float(((yt - yp) ** 2).sum())
    ss_tot = float(((yt - yt.mean()) ** 2).sum())
    if ss_tot == 0:
        if ss_res == 0:
            return 1.0
        raise FlatTarget("target has zero variance")
    return 1.0 - ss_res / ss_tot


def paired_t_test(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.size} vs {b.size} values")
    n = a.size
    if n < 2:
        raise TooFewSamples("paired t-test needs n >= 2")
    d = a - b
    if np.all(d == 0):
        return 0.0, 1.0
    sd = float(d.std(ddof=1))
    if sd == 0:
        raise DegenerateDifferences("all paired differences are identical")
    t = float(d.mean()) / (sd / math.sqrt(n))
    return t, t_two_sided_p(t, n - 1)


def roc_auc(scores, labels):
    """ROC points over unique thresholds (descending) and the trapezoid AUC.

    Tied scores share one threshold, so the AUC equals the Mann-Whitney
    probability with ties counted half. The area is accumulated in integer
    counts and divided once.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise LengthMismatch(f"{s.size} scores vs {y.size} labels")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both positive and negative labels")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    tp = np.cumsum(y)[last].astype(np.int64)
    fp = (last + 1) - tp
    tp = np.r_[0, tp]
    fp = np.r_[0, fp]
    twice_area = int(((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])).sum())
    auc = twice_area / (2 * n_pos * n_neg)
    points = [(f / n_neg, t / n_pos) for f, t in zip(fp.tolist(), tp.tolist())]
    return points, auc


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self):
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self):
        return (self.tp + self.tn) / self.n if self.n else float("nan")

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn, "accuracy": self.accuracy}


def confusion_matrix(pred, truth):
    p = np.asarray(pred).astype(bool)
    t = np.asarray(truth).astype(bool)
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.size} predictions vs {t.size} labels")
    return Confusion(tp=int((p & t).sum()), fp=int((p & ~t).sum()),
                     tn=int((~p & ~t).sum()), fn=int((~p & t).sum()))


# --- bootstrap ---------------------------------------------------------------

def _stat_mean(d):
    return float(np.mean(d))


def _stat_auc(d):
    return roc_auc(d[:, 0], d[:, 1])[1]


def _stat_pearson(d):
    return pearson(d[:, 0], d[:, 1])[0]


def _stat_accuracy(d):
    return confusion_matrix(d[:, 0], d[:, 1]).accuracy


STATISTICS = {"mean": _stat_mean, "auc": _stat_auc, "pearson": _stat_pearson, "accuracy": _stat_accuracy}
_MAX_ATTEMPTS = 10


def bootstrap_distribution(data, statistic, n_resamples=100, seed=42):
    """Statistic evaluated on ``n_resamples`` with-replacement resamples.

    Resample ``i`` draws its indices from ``XorShift64Star.substream(seed, i)``.
    A resample on which the statistic is undefined (one class only for AUC,
    zero variance for r) is redrawn from the same substream, at most 10
    attempts in total.
    """
    fn = STATISTICS[statistic]
    d = np.asarray(data, dtype=np.float64)
    n = d.shape[0]
    if n < 2:
        raise InsufficientData("bootstrap needs at least 2 data points")
    out = np.empty(n_resamples)
    for i in range(n_resamples):
        rng = XorShift64Star.substream(seed, i)
        for _ in range(_MAX_ATTEMPTS):
            idx = [rng.below(n) for _ in range(n)]
            try:
                out[i] = fn(d[idx])
                break
            except (SingleClass, ZeroVariance):
                continue
        else:
            if statistic == "auc":
                raise SingleClassResample(f"resample {i} lacked both classes {_MAX_ATTEMPTS} times")
            raise InsufficientData(f"statistic {statistic!r} undefined on resample {i}")
    return out


def bootstrap_ci(data, statistic, n_resamples=100, seed=42, level=0.95):
    """Percentile interval (linear interpolation) of the bootstrap distribution."""
    dist = bootstrap_distribution(data, statistic, n_resamples, seed)
    tail = (1.0 - level) / 2.0 * 100.0
    lo, hi = np.percentile(dist, [tail, 100.0 - tail])
    return float(lo), float(hi)


def evaluation_report(predicted, labels, threshold=40.0, n_resamples=100, seed=42):
    """Full agreement report of predicted vs labelled EF, HFrEF defined as EF < ``threshold``."""
    pred = np.asarray(predicted, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.float64)
    if pred.shape != lab.shape:
        raise LengthMismatch(f"{pred.size} predictions vs {lab.size} labels")
    report = {"n": int(pred.size), "hfref_threshold": threshold, "notes": []}

    try:
        r, p = pearson(pred, lab)
        ci = bootstrap_ci(np.column_stack([pred, lab]), "pearson", n_resamples, seed)
        report["pearson"] = {"r": r, "p": p, "ci": list(ci)}
    except (TooFewSamples, ZeroVariance, InsufficientData) as exc:
        report["pearson"] = None
        report["notes"].append(f"pearson: {exc}")

    try:
        report["r2"] = r2_score(lab, pred)
    except (FlatTarget, TooFewSamples) as exc:
        report["r2"] = None
        report["notes"].append(f"r2: {exc}")

    try:
        t, p = paired_t_test(pred, lab)
        report["t_test"] = {"t": t, "p": p}
    except (DegenerateDifferences, TooFewSamples) as exc:
        report["t_test"] = None
        report["notes"].append(f"t_test: {exc}")

    pred_pos = pred < threshold
    true_pos = lab < threshold
    # lower predicted EF means more likely HFrEF
    try:
        points, auc = roc_auc(-pred, true_pos)
        ci = bootstrap_ci(np.column_stack([-pred, true_pos]), "auc", n_resamples, seed)
        report["auc"] = {"value": auc, "ci": list(ci)}
        report["roc_points"] = [list(pt) for pt in points]
    except (SingleClass, SingleClassResample) as exc:
        report["auc"] = None
        report["roc_points"] = []
        report["notes"].append(f"auc: {exc}")

    report["confusion"] = confusion_matrix(pred_pos, true_pos).as_dict()
    return report
