import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.stats import chi2_contingency
from sklearn.base import clone

from spectral_anomaly.chisq import (ChiSqConfig, ChiSquareDetector, QuadrantTable,
                                    chi_square_max, chi_square_table_stat, quadrant_counts)
from spectral_anomaly.exceptions import DegenerateTableError, ParameterError
from spectral_anomaly.netgen import (AnomalySpec, CliqueBinary, ErBinary, embed_anomaly,
                                     sample_er_binary, sample_er_count)
from spectral_anomaly.spectral import ResidualSpectrum, residual_spectrum

counts = st.integers(0, 500)


def reference_quadrants(x, y, theta, improved=False, k=0.35):
    """Point-by-point reference for the quadrant rule."""
    n = len(x)
    q = [0, 0, 0, 0]
    near = 0
    for xi, yi in zip(x, y):
        if improved and math.hypot(xi, yi) < k / math.sqrt(n):
            near += 1
            continue
        xr = math.cos(theta) * xi - math.sin(theta) * yi
        yr = math.sin(theta) * xi + math.cos(theta) * yi
        if xr == 0 and yr == 0:
            q[0] += 1
        elif xr > 0 and yr >= 0:
            q[0] += 1
        elif xr <= 0 and yr > 0:
            q[1] += 1
        elif xr < 0 and yr <= 0:
            q[2] += 1
        else:
            q[3] += 1
    for i in range(4):
        q[i] += near // 4 + (1 if i < near % 4 else 0)
    return q


def spectrum_from(x, y):
    V = np.column_stack([x, y])
    return ResidualSpectrum(np.array([2.0, 1.0]), V)


def test_symmetric_points_fill_each_quadrant():
    t = quadrant_counts([1, -1, -1, 1], [1, 1, -1, -1], 0.0, ChiSqConfig(zero_tol=0))
    assert t.quadrants == (1, 1, 1, 1)


def test_table_layout():
    t = QuadrantTable.from_quadrants(1, 2, 3, 4)
    assert t.counts.tolist() == [[1, 2], [4, 3]]
    assert t.total == 10


def test_table_one_statistic():
    t = QuadrantTable.from_quadrants(258, 259, 251, 256)
    assert chi_square_table_stat(t) == pytest.approx(0.0356, abs=5e-4)
    b = QuadrantTable.from_quadrants(250, 247, 254, 273)
    assert chi_square_table_stat(b) > chi_square_table_stat(t)


def test_all_points_at_origin_are_shared_equally():
    cfg = ChiSqConfig(improved=True, k=0.35)
    t = quadrant_counts(np.zeros(128), np.zeros(128), 0.0, cfg)
    assert t.quadrants == (32, 32, 32, 32)


def test_origin_goes_to_q1_without_improvement():
    t = quadrant_counts([0.0, 1.0], [0.0, 1.0], 0.0)
    assert t.quadrants == (2, 0, 0, 0)


def test_zero_marginal_is_degenerate():
    with pytest.raises(DegenerateTableError):
        chi_square_table_stat(np.array([[5, 3], [0, 0]]))
    with pytest.raises(DegenerateTableError):
        chi_square_max(spectrum_from(np.ones(10), np.ones(10)), ChiSqConfig(rotation="none"))


def test_length_mismatch():
    with pytest.raises(ParameterError):
        quadrant_counts([1, 2], [1], 0.0)


@given(st.integers(1, 500))
def test_uniform_table_is_zero(c):
    assert chi_square_table_stat(np.full((2, 2), c)) == 0


@given(counts, counts, counts, counts)
def test_table_stat_matches_reference(a, b, c, d):
    O = np.array([[a, b], [c, d]])
    assume((O.sum(0) > 0).all() and (O.sum(1) > 0).all())
    ref = chi2_contingency(O, correction=False)[0]
    s = chi_square_table_stat(O)
    assert s >= 0
    assert s == pytest.approx(ref, rel=1e-9, abs=1e-9)
    # swapping rows or columns permutes quadrants without changing the statistic
    assert chi_square_table_stat(O[::-1]) == pytest.approx(s, rel=1e-12, abs=1e-12)
    assert chi_square_table_stat(O[:, ::-1]) == pytest.approx(s, rel=1e-12, abs=1e-12)
    if a * d == b * c:
        assert s == pytest.approx(0, abs=1e-9)


point_clouds = st.integers(4, 60).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 10_000)))


@given(point_clouds, st.floats(0, math.pi / 2, exclude_max=True), st.booleans(),
       st.sampled_from([0.1, 0.35, 1.0]))
def test_quadrant_counts_match_reference(cloud, theta, improved, k):
    n, seed = cloud
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n)) / math.sqrt(n)
    x[rng.random(n) < 0.2] = 0.0
    cfg = ChiSqConfig(improved=improved, k=k, zero_tol=0)
    t = quadrant_counts(x, y, theta, cfg)
    assert list(t.quadrants) == reference_quadrants(x, y, theta, improved, k)
    assert t.total == n


@given(point_clouds, st.sampled_from([0.35, 1.0, 3.0]))
def test_redistribution_is_rotation_independent(cloud, k):
    n, seed = cloud
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n)) / math.sqrt(n)
    cfg = ChiSqConfig(improved=True, k=k, zero_tol=0)
    near = np.hypot(x, y) < k / math.sqrt(n)
    c = int(near.sum())
    base = np.array([c // 4 + (i < c % 4) for i in range(4)])
    for theta in np.linspace(0, 1.5, 7):
        full = np.array(quadrant_counts(x, y, theta, cfg).quadrants)
        far = np.array(quadrant_counts(x[~near], y[~near], theta,
                                       ChiSqConfig(zero_tol=0)).quadrants) if (~near).any() else 0
        assert np.array_equal(full - far, base)


@given(point_clouds, st.booleans(), st.booleans(), st.sampled_from(["grid", "none"]))
def test_max_invariant_to_eigenvector_sign_flips(cloud, fx, fy, rotation):
    n, seed = cloud
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n))
    cfg = ChiSqConfig(rotation=rotation, rotation_steps=36, zero_tol=0)
    try:
        ref = chi_square_max(spectrum_from(x, y), cfg).statistic
    except DegenerateTableError:
        return
    flipped = chi_square_max(spectrum_from(-x if fx else x, -y if fy else y), cfg).statistic
    assert flipped == pytest.approx(ref, rel=1e-9, abs=1e-9)


def window_oscillation(x, y, width):
    """Largest max-min of the table statistic over any angular window of ``width``.

    The statistic is piecewise constant in theta, changing only where a point
    crosses an axis, so sampling breakpoints, their neighbours and piece
    midpoints over two periods sees every value.
    """
    period = math.pi / 2
    br = np.sort(np.mod(-np.arctan2(y, x), period))
    mids = (br + np.roll(br, -1) + period * (np.arange(br.size) == br.size - 1)) / 2
    pts = np.concatenate([br, br - 1e-9, br + 1e-9, mids]) % period
    pts = np.sort(np.concatenate([pts, pts + period]))
    cfg = ChiSqConfig(zero_tol=0)
    vals = []
    for t in pts:
        try:
            vals.append(chi_square_table_stat(quadrant_counts(x, y, t, cfg)))
        except DegenerateTableError:
            vals.append(np.nan)
    vals = np.array(vals)
    if np.isnan(vals).any():
        return None
    osc = 0.0
    for i, t in enumerate(pts[pts < period]):
        w = vals[(pts >= t) & (pts <= t + width)]
        osc = max(osc, w.max() - w.min())
    return osc


@given(st.integers(4, 40), st.integers(0, 10_000), st.floats(0, 2 * math.pi))
def test_grid_max_invariant_to_global_rotation(n, seed, phi):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, n))
    steps = 90
    tol = window_oscillation(x, y, math.pi / 2 / steps)
    assume(tol is not None)
    cfg = ChiSqConfig(rotation="grid", rotation_steps=steps, zero_tol=0)
    xr = math.cos(phi) * x - math.sin(phi) * y
    yr = math.sin(phi) * x + math.cos(phi) * y
    a = chi_square_max(spectrum_from(x, y), cfg).statistic
    b = chi_square_max(spectrum_from(xr, yr), cfg).statistic
    assert abs(a - b) <= tol + 1e-9


def test_four_fold_symmetric_cloud_is_flat():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(2, 50))
    x = np.concatenate([p[0], -p[1], -p[0], p[1]])
    y = np.concatenate([p[1], p[0], -p[1], -p[0]])
    cfg = ChiSqConfig(rotation="grid", zero_tol=0)
    for t in np.linspace(0.01, 1.5, 11):
        assert chi_square_table_stat(quadrant_counts(x, y, t, cfg)) == pytest.approx(0, abs=1e-12)


def test_dense_er_table_is_balanced():
    # a uniform 4-cell multinomial with 1024 points has median max/min near 1.11
    ratios = []
    for seed in range(15):
        s = residual_spectrum(sample_er_binary(1024, 0.1, seed), 2, ErBinary(0.1))
        q = np.array(quadrant_counts(s.eigenvectors[:, 0], s.eigenvectors[:, 1], 0.0).quadrants)
        ratios.append(q.max() / q.min())
    assert np.median(ratios) < 1.15


def test_embedded_clique_signals():
    A = sample_er_binary(1024, 0.1, 8)
    B = embed_anomaly(A, AnomalySpec(range(15), CliqueBinary(1.0)), seed=9)
    det = ChiSquareDetector(background=ErBinary(0.1), rotation="grid").fit()
    assert det.detect(B).signal
    assert det.predict(B) == 1


def test_theta_argmax_is_on_grid_and_threshold():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 200))
    cfg = ChiSqConfig(rotation="grid", rotation_steps=180, alpha=0.01)
    r = chi_square_max(spectrum_from(x, y), cfg)
    step = math.pi / 2 / 180
    assert r.theta_argmax / step == pytest.approx(round(r.theta_argmax / step))
    assert r.threshold == pytest.approx(6.634897, abs=1e-6)
    assert r.signal == (r.statistic > r.threshold)


def test_nelder_mead_never_worse_than_start():
    for seed in range(5):
        A = sample_er_count(128, 1.0, seed)
        s = residual_spectrum(A, 2)
        start = chi_square_max(s, ChiSqConfig(rotation="none")).statistic
        nm = chi_square_max(s, ChiSqConfig(rotation="nelder-mead")).statistic
        assert nm >= start
        assert chi_square_max(s, ChiSqConfig(), kind="count").statistic == nm


def test_needs_two_eigenvectors():
    with pytest.raises(ParameterError):
        chi_square_max(ResidualSpectrum(np.array([1.0]), np.ones((4, 1)) / 2))


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(rotation_steps=0), dict(alpha=1.0),
                                    dict(rotation="spin"), dict(zero_tol=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        ChiSqConfig(**kwargs)


def test_estimator_api():
    det = ChiSquareDetector(improved=True, k=0.5)
    assert det.get_params()["k"] == 0.5
    assert clone(det).set_params(k=0.2).k == 0.2
    nets = [sample_er_binary(64, 0.2, s) for s in range(4)]
    scores = det.fit().decision_function(nets)
    assert scores.shape == (4,)
    assert np.array_equal(det.predict(nets), (scores > det.threshold_).astype(int))
    with pytest.raises(ParameterError):
        ChiSquareDetector(threshold="magic").fit()


def test_empirical_threshold():
    null = [sample_er_binary(64, 0.2, s) for s in range(40)]
    det = ChiSquareDetector(threshold="empirical", alpha=0.1).fit(null)
    assert det.null_statistics_.shape == (40,)
    assert det.threshold_ == pytest.approx(np.quantile(det.null_statistics_, 0.9))
    assert np.mean(det.predict(null)) <= 0.1 + 1e-9
    with pytest.raises(ParameterError):
        ChiSquareDetector(threshold="empirical").fit()
