"""Monte Carlo studies: null quantiles, detection power and parameter sweeps.

Every replicate draws from its own random stream ``(base_seed, 0, r)``, so a
study gives bit-identical results for any thread count or execution order.
Historical calibration networks use streams ``(base_seed, 1, h)`` and the
fixed degree sequence of a Chung-Lu study uses ``(base_seed, 2, 0)``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from ._validation import check_int, check_nonnegative, check_probability, stream
from .chisq import ChiSquareDetector, resolve_rotation
from .exceptions import DegenerateError, ParameterError
from .l1norm import L1NormDetector
from .netgen import (AnomalySpec, ChungLuBinary, ChungLuCount, CliqueBinary, CountShift,
                     ErBinary, ErCount, Rmat, embed_anomaly, sample_pareto_degrees)
from .results import fmt

MODELS = ("er", "er-count", "rmat", "chunglu", "chunglu-count")
DETECTORS = ("chisq", "l1")
QUANTILE_LEVELS = (0.95, 0.96, 0.97, 0.98, 0.99)
_COUNT_MODELS = ("er-count", "chunglu-count")


@dataclass(frozen=True)
class StudyConfig:
    """One cell of a simulation study.

    Parameters
    ----------
    model : {"er", "er-count", "rmat", "chunglu", "chunglu-count"}
    n : int
    density : float
        ``p0`` for binary models, ``lambda0`` for ``er-count`` and the Pareto
        location ``eta`` for ``chunglu-count``. For ``chunglu`` it is the
        ``p0`` of the single R-MAT draw whose degrees fix the model.
    detector : {"chisq", "l1"}
    detector_params : dict
        Keyword arguments for :class:`ChiSquareDetector` or
        :class:`L1NormDetector`.
    replicates : int
    anomaly_size : int, optional
        Number of anomalous nodes; ``None`` or 0 means a null study.
    p1 : float
        Foreground probability for binary anomalies.
    delta : float
        Rate shift for count anomalies.
    alpha : float
    base_seed : int
    threads : int
    historical : int
        Number of anomaly-free networks for historical L1 calibration.
    threshold : float, optional
        Fixed decision threshold overriding the detector's own.
    known_background : bool, default=True
        Use the true ER parameter for ``E[A]`` rather than estimating it.
    rmat_probs : tuple
    pareto_shape : float
    chunglu_c : float, optional
        Count Chung-Lu scaling; defaults to ``1 / sum(k)``.
    """

    model: str = "er"
    n: int = 256
    density: float = 0.1
    detector: str = "chisq"
    detector_params: dict = field(default_factory=dict)
    replicates: int = 2000
    anomaly_size: int | None = None
    p1: float = 1.0
    delta: float = 1.0
    alpha: float = 0.05
    base_seed: int = 0
    threads: int = 1
    historical: int = 1000
    threshold: float | None = None
    known_background: bool = True
    rmat_probs: tuple = (0.5, 0.125, 0.125, 0.25)
    pareto_shape: float = 1.2
    chunglu_c: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.detector not in DETECTORS:
            raise ParameterError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        check_int(self.n, "n", 2)
        check_int(self.replicates, "replicates", 1)
        check_int(self.threads, "threads", 1)
        check_int(self.historical, "historical", 2)
        check_int(self.base_seed, "base_seed", 0)
        check_probability(self.alpha, "alpha", open_interval=True)
        if self.model in ("er", "rmat", "chunglu"):
            check_probability(self.density, "density")
        else:
            check_nonnegative(self.density, "density")
        if self.anomaly_size:
            size = check_int(self.anomaly_size, "anomaly_size", 2)
            if size > self.n:
                raise ParameterError(f"anomaly_size {size} exceeds n={self.n}")
        if not isinstance(self.detector_params, dict):
            raise ParameterError("detector_params must be a mapping")
        object.__setattr__(self, "rmat_probs", tuple(float(p) for p in self.rmat_probs))

    @property
    def kind(self):
        return "count" if self.model in _COUNT_MODELS else "binary"

    @property
    def has_anomaly(self):
        return bool(self.anomaly_size)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(eq=False)
class StudyReport:
    """Per-replicate outcomes of one study cell.

    ``samples`` holds NaN where the detector hit a degenerate case; those
    replicates are excluded from the quantiles and never signal.
    """

    config: StudyConfig
    samples: np.ndarray
    signals: np.ndarray
    anomalous: np.ndarray
    degenerate: np.ndarray
    threshold: float
    quantiles: dict = field(default_factory=dict)

    def __post_init__(self):
        valid = self.samples[~self.degenerate]
        self.quantiles = {p: (empirical_quantile(valid, p) if valid.size else math.nan)
                          for p in QUANTILE_LEVELS}

    @property
    def degenerate_count(self):
        return int(self.degenerate.sum())

    @property
    def confusion(self):
        s, a = self.signals, self.anomalous
        return {"TP": int((s & a).sum()), "FP": int((s & ~a).sum()),
                "FN": int((~s & a).sum()), "TN": int((~s & ~a).sum())}

    @property
    def dr(self):
        c = self.confusion
        pos = c["TP"] + c["FN"]
        return c["TP"] / pos if pos else math.nan

    @property
    def far(self):
        c = self.confusion
        neg = c["FP"] + c["TN"]
        return c["FP"] / neg if neg else math.nan


def empirical_quantile(samples, p):
    """Linear-interpolation quantile at rank ``h = (len - 1) p + 1``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ParameterError("empirical_quantile needs at least one sample")
    p = check_probability(p, "p", open_interval=True)
    h = (x.size - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


# ---------------------------------------------------------------------------
# Study machinery


def background_model(cfg):
    """The generating model of a study, with Chung-Lu degrees drawn once."""
    if cfg.model == "er":
        return ErBinary(cfg.density)
    if cfg.model == "er-count":
        return ErCount(cfg.density)
    a, b, c, d = cfg.rmat_probs
    if cfg.model == "rmat":
        return Rmat.from_density(cfg.n, cfg.density, a=a, b=b, c=c, d=d)
    rng = stream(cfg.base_seed, 2, 0)
    if cfg.model == "chunglu":
        seed_graph = Rmat.from_density(cfg.n, cfg.density, a=a, b=b, c=c, d=d).sample(cfg.n, rng)
        return ChungLuBinary(seed_graph.degrees)
    k = sample_pareto_degrees(cfg.n, cfg.density, cfg.pareto_shape, rng)
    return ChungLuCount(k, cfg.chunglu_c)


def _detector_background(cfg, model):
    if isinstance(model, (ErBinary, ErCount)):
        return model if cfg.known_background else "er"
    return "rank1"


def build_detector(cfg, model=None):
    """Fitted detector for a study cell (historical networks drawn if needed)."""
    model = model or background_model(cfg)
    params = dict(cfg.detector_params)
    params.setdefault("background", _detector_background(cfg, model))
    params["alpha"] = cfg.alpha
    if cfg.detector == "chisq":
        params.pop("threshold", None)
        det = ChiSquareDetector(**params)
        return det.fit()
    params.setdefault("calibration", "historical")
    det = L1NormDetector(**params)
    needs_history = params["calibration"] == "historical" or params.get("gumbel", "evt") == "mom"
    if needs_history:
        history = (model.sample(cfg.n, stream(cfg.base_seed, 1, h)) for h in range(cfg.historical))
        return det.fit(history)
    return det.fit(n_nodes=cfg.n)


def _anomaly_mode(cfg):
    return CountShift(cfg.delta) if cfg.kind == "count" else CliqueBinary(cfg.p1)


def _replicate(cfg, model, detector, r, anomalous):
    rng = stream(cfg.base_seed, 0, r)
    A = model.sample(cfg.n, rng)
    if anomalous:
        nodes = rng.choice(cfg.n, size=cfg.anomaly_size, replace=False)
        A = embed_anomaly(A, AnomalySpec(nodes, _anomaly_mode(cfg)), model, rng)
    try:
        res = detector.detect(A)
    except DegenerateError:
        return math.nan, False, True
    stat = res.statistic
    signal = res.signal if cfg.threshold is None else bool(stat > cfg.threshold)
    return stat, signal, False


def _run(cfg, anomalous_mask):
    model = background_model(cfg)
    with threadpool_limits(limits=1):
        detector = build_detector(cfg, model)
        if cfg.threshold is not None:
            threshold = float(cfg.threshold)
        else:
            threshold = detector.threshold_ if cfg.detector == "chisq" else _gumbel_threshold(cfg)

        def task(r):
            return _replicate(cfg, model, detector, r, bool(anomalous_mask[r]))

        if cfg.threads == 1:
            out = [task(r) for r in range(cfg.replicates)]
        else:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                out = list(pool.map(task, range(cfg.replicates)))
    samples = np.array([o[0] for o in out], dtype=float)
    signals = np.array([o[1] for o in out], dtype=bool)
    degenerate = np.array([o[2] for o in out], dtype=bool)
    return StudyReport(cfg, samples, signals, np.asarray(anomalous_mask, bool), degenerate,
                       threshold)


def _gumbel_threshold(cfg):
    from ._special import gumbel_quantile
    return gumbel_quantile(1.0 - cfg.alpha)


def run_null_study(cfg):
    """Detector statistics on ``cfg.replicates`` anomaly-free networks."""
    if cfg.has_anomaly:
        raise ParameterError("run_null_study expects a configuration without an anomaly")
    return _run(cfg, np.zeros(cfg.replicates, dtype=bool))


def run_power_study(cfg):
    """Detection and false-alarm rates; the first ``ceil(R / 2)`` replicates carry the anomaly."""
    if not cfg.has_anomaly:
        raise ParameterError("run_power_study needs anomaly_size >= 2")
    mask = np.arange(cfg.replicates) < math.ceil(cfg.replicates / 2)
    return _run(cfg, mask)


def run_study(cfg):
    """Power study when an anomaly is configured, null study otherwise."""
    return run_power_study(cfg) if cfg.has_anomaly else run_null_study(cfg)


@dataclass
class SweepCell:
    """Outcome of one grid point: a report, or the error that stopped it."""

    params: dict
    config: StudyConfig | None
    report: StudyReport | None = None
    error: str | None = None

    @property
    def ok(self):
        return self.report is not None


def _apply(cfg, key, value):
    if key.startswith("detector_params."):
        params = dict(cfg.detector_params)
        params[key.split(".", 1)[1]] = value
        return cfg.replace(detector_params=params)
    if key in {f.name for f in dataclasses.fields(StudyConfig)}:
        return cfg.replace(**{key: value})
    params = dict(cfg.detector_params)
    params[key] = value
    return cfg.replace(detector_params=params)


def expand_grid(grid):
    """Cartesian product of ``{key: [values]}`` as a list of dicts, keys in given order."""
    cells = [{}]
    for key, values in grid.items():
        if isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
            values = [values]
        values = list(values)
        if not values:
            raise ParameterError(f"grid axis {key!r} is empty")
        cells = [dict(c, **{key: v}) for c in cells for v in values]
    return cells


def sensitivity_sweep(base, grid):
    """Run a study per grid point; failures are recorded and the sweep continues.

    Parameters
    ----------
    base : StudyConfig
    grid : dict
        Maps a :class:`StudyConfig` field, ``detector_params.<name>`` or a
        bare detector parameter name to a list of values.

    Returns
    -------
    list of SweepCell
    """
    cells = expand_grid(grid)
    if not cells or not grid:
        raise ParameterError("sensitivity_sweep needs a nonempty grid")
    out = []
    for params in cells:
        try:
            cfg = base
            for key, value in params.items():
                cfg = _apply(cfg, key, value)
            out.append(SweepCell(params, cfg, report=run_study(cfg)))
        except (ParameterError, DegenerateError, ArithmeticError) as exc:
            out.append(SweepCell(params, None, error=f"{type(exc).__name__}: {exc}"))
    return out


# ---------------------------------------------------------------------------
# CSV output

QUANTILE_FIELDS = ("model", "n", "density_param", "detector", "variant", "q95", "q96", "q97",
                   "q98", "q99", "replicates", "degenerate_count", "status")
SAMPLE_FIELDS = ("cell", "replicate", "statistic")
POWER_FIELDS = ("model", "n", "anomaly_size", "detector", "DR", "FAR", "alpha", "status")


def variant_label(cfg):
    """Short description of the detector settings, free of commas."""
    p = cfg.detector_params
    if cfg.detector == "chisq":
        rotation = resolve_rotation(p.get("rotation", "auto"), cfg.kind)
        k = p.get("k", 0.35)
        label = f"improved;k={fmt(float(k)) if isinstance(k, (int, float)) else k}"
        parts = [label if p.get("improved", False) else "standard", f"rotation={rotation}"]
    else:
        parts = [f"m={p.get('n_components', 'auto')}",
                 f"calibration={p.get('calibration', 'historical')}",
                 f"gumbel={p.get('gumbel', 'evt')}"]
    if cfg.threshold is not None:
        parts.append(f"threshold={fmt(float(cfg.threshold))}")
    return ";".join(parts)


def quantile_row(cfg, report=None, status="ok"):
    q = report.quantiles if report is not None else {}
    return {"model": cfg.model, "n": cfg.n, "density_param": fmt(float(cfg.density)),
            "detector": cfg.detector, "variant": variant_label(cfg),
            **{f"q{int(round(p * 100))}": fmt(float(q.get(p, math.nan))) for p in QUANTILE_LEVELS},
            "replicates": cfg.replicates,
            "degenerate_count": report.degenerate_count if report is not None else "",
            "status": status}


def power_row(cfg, report=None, status="ok"):
    return {"model": cfg.model, "n": cfg.n, "anomaly_size": cfg.anomaly_size,
            "detector": cfg.detector,
            "DR": fmt(float(report.dr)) if report is not None else "",
            "FAR": fmt(float(report.far)) if report is not None else "",
            "alpha": fmt(float(cfg.alpha)), "status": status}


def sample_rows(cell, report):
    return [{"cell": cell, "replicate": r, "statistic": fmt(float(s))}
            for r, s in enumerate(report.samples)]


def write_csv(path, fields, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)

