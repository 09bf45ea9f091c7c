"""Acceptance gate: one test per numbered criterion.

Each test prints one bracketed PASS/FAIL/SKIP line (visible with -s or
-rA) and pytest's own verbose output gives the same one-line-per-
criterion view. Criteria 1-3 reproduce reference scores on the public
citation datasets and therefore need the raw files; when neither a
cache nor the network can supply them the tests skip with the fetch
error instead of inventing a result. Everything else is self-contained
and runs on synthetic data.
"""

import time

import numpy as np
import pytest

from graphem import (EmaLogits, ExperimentManifest, FetchError, Mlp,
                     NormalizedAdjacency, TrainConfig, cmd_hop, cmd_rate,
                     default_config, eem_batch_loss_and_grads,
                     empirical_distribution, gem_loss_and_grads,
                     generate_sbm, normalize_adjacency,
                     okdeem_batch_loss_and_grads, resolve_dataset, run_cell,
                     total_variation, train, verify_bound)
from graphem.bench import _row_score
from graphem.data_io import DATASETS, dataset_urls
from graphem.sampling import EdgeSampler, measure_draw_rate

from conftest import fd_gradients, max_rel_err
from test_training import (_full_sweep_batch, _okdeem_setup,
                           _okdeem_targets, _tiny_instance)

SEEDS = tuple(range(10))

_DATASET_CACHE = {}
_RUN_CACHE = {}


def _line(num, status, detail=""):
    print(f"\n[criterion {num:02d}] {status}  {detail}".rstrip())


def _get_dataset(name):
    """Resolve from cache or network once; remember the failure too."""
    if name not in _DATASET_CACHE:
        try:
            _DATASET_CACHE[name] = resolve_dataset(name)
        except FetchError as exc:
            _DATASET_CACHE[name] = str(exc)
    return _DATASET_CACHE[name]


def _citation_scores(name, method):
    """Mean/std of test scores over SEEDS on the shipped public split."""
    resolved = _get_dataset(name)
    train_method = "okdeem" if method == "okdeem0" else method
    scores = []
    for seed in SEEDS:
        key = (name, train_method, seed)
        if key not in _RUN_CACHE:
            cfg = default_config(train_method, name, seed=seed)
            _RUN_CACHE[key] = run_cell(resolved, cfg,
                                       split=resolved.public_split)[0]
        scores.append(_row_score(_RUN_CACHE[key], method))
    return float(np.mean(scores)), float(np.std(scores))


def _require_dataset(num, name):
    resolved = _get_dataset(name)
    if isinstance(resolved, str):
        _line(num, "SKIP", f"{name} unavailable offline: {resolved}")
        pytest.skip(f"{name} unavailable: no cache and no network access "
                    f"({resolved})")
    return resolved


def test_criterion_01_cora_gem_mlp_gcn():
    _require_dataset(1, "cora")
    t0 = time.perf_counter()
    targets = {"gem": (83.05, 2.5), "mlp": (49.19, 4.0),
               "gcn": (81.81, 2.5)}
    got = {m: _citation_scores("cora", m) for m in targets}
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"{m}={got[m][0]:.2f} (want {t[0]}+-{t[1]})"
                       for m, t in targets.items())
    ok = all(abs(got[m][0] - t[0]) <= t[1] for m, t in targets.items())
    ok = ok and elapsed < 600.0
    _line(1, "PASS" if ok else "FAIL", f"{detail}; {elapsed:.0f}s")
    for m, (target, tol) in targets.items():
        assert abs(got[m][0] - target) <= tol, (m, got[m])
    assert elapsed < 600.0


def test_criterion_02_cora_edgewise_methods():
    _require_dataset(2, "cora")
    targets = {"eem": (81.57, 3.0), "okdeem": (82.94, 3.0),
               "okdeem0": (82.38, 3.0)}
    got = {m: _citation_scores("cora", m) for m in targets}
    gap = abs(got["okdeem"][0] - got["okdeem0"][0])
    detail = ", ".join(f"{m}={got[m][0]:.2f} (want {t[0]}+-{t[1]})"
                       for m, t in targets.items())
    ok = all(abs(got[m][0] - t[0]) <= t[1] for m, t in targets.items())
    ok = ok and gap <= 2.5
    _line(2, "PASS" if ok else "FAIL",
          f"{detail}; |okdeem - okdeem0| = {gap:.2f}")
    for m, (target, tol) in targets.items():
        assert abs(got[m][0] - target) <= tol, (m, got[m])
    assert gap <= 2.5


def test_criterion_03_citeseer_pubmed_gem():
    _require_dataset(3, "citeseer")
    _require_dataset(3, "pubmed")
    cite_mean, _ = _citation_scores("citeseer", "gem")
    t0 = time.perf_counter()
    pub_mean, _ = _citation_scores("pubmed", "gem")
    pub_elapsed = time.perf_counter() - t0
    ok = (abs(cite_mean - 74.20) <= 3.0 and abs(pub_mean - 78.48) <= 3.0
          and pub_elapsed < 1800.0)
    _line(3, "PASS" if ok else "FAIL",
          f"citeseer={cite_mean:.2f} (want 74.20+-3), "
          f"pubmed={pub_mean:.2f} (want 78.48+-3), pubmed {pub_elapsed:.0f}s")
    assert abs(cite_mean - 74.20) <= 3.0
    assert abs(pub_mean - 78.48) <= 3.0
    assert pub_elapsed < 1800.0


def _random_row_stochastic(rng, n):
    mask = rng.random((n, n)) < rng.uniform(0.15, 0.9)
    np.fill_diagonal(mask, True)
    w = rng.random((n, n)) * mask
    w /= w.sum(axis=1, keepdims=True)
    src, dst = np.nonzero(w)
    return NormalizedAdjacency.from_weighted_edges(n, src, dst, w[src, dst],
                                                   mode="row")


def test_criterion_04_aggregation_loss_bound():
    rng = np.random.default_rng(202)
    worst = -np.inf
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        c = int(rng.integers(2, 11))
        adj = _random_row_stochastic(rng, n)
        h = rng.normal(0, 3, size=(n, c))
        targets = rng.dirichlet(np.ones(c), size=n)
        lhs, rhs = verify_bound(adj, h, targets)
        worst = max(worst, lhs - rhs)
        assert lhs <= rhs + 1e-9

    # equality cases: identity aggregation, and constant-row logits
    n, c = 30, 5
    eye = NormalizedAdjacency.from_weighted_edges(
        n, np.arange(n), np.arange(n), np.ones(n), mode="row")
    h = rng.normal(0, 2, size=(n, c))
    targets = rng.dirichlet(np.ones(c), size=n)
    lhs, rhs = verify_bound(eye, h, targets)
    eq_gap = abs(lhs - rhs)
    adj = _random_row_stochastic(rng, n)
    h_const = np.tile(rng.normal(0, 2, size=(1, c)), (n, 1))
    lhs, rhs = verify_bound(adj, h_const, targets)
    eq_gap = max(eq_gap, abs(lhs - rhs))
    ok = worst <= 1e-9 and eq_gap <= 1e-9
    _line(4, "PASS" if ok else "FAIL",
          f"1000 instances, max lhs-rhs = {worst:.2e}, "
          f"equality gap = {eq_gap:.2e}")
    assert eq_gap <= 1e-9


def test_criterion_05_gradient_finite_differences():
    errs = {}

    graph, x, ls = _tiny_instance(seed=41)
    adj = normalize_adjacency(graph, "row")
    model = Mlp([x.shape[1], 6, 3], rng=np.random.default_rng(1))
    _, _, aux = gem_loss_and_grads(model, adj, x, ls, 0.5, 0.3)
    frozen = aux["pseudo"].copy()
    _, grads, _ = gem_loss_and_grads(model, adj, x, ls, 0.5, 0.3,
                                     pseudo_override=frozen)
    fd = fd_gradients(model.params(),
                      lambda: gem_loss_and_grads(
                          model, adj, x, ls, 0.5, 0.3,
                          pseudo_override=frozen)[0])
    errs["gem"] = max_rel_err(grads, fd)
    _, grads, _ = gem_loss_and_grads(model, adj, x, ls, 0.5, 0.3,
                                     detach_targets=False)
    fd = fd_gradients(model.params(),
                      lambda: gem_loss_and_grads(
                          model, adj, x, ls, 0.5, 0.3,
                          detach_targets=False)[0])
    errs["gem-coupled"] = max_rel_err(grads, fd)

    model = Mlp([x.shape[1], 6, 3], rng=np.random.default_rng(2))
    ema = EmaLogits(ls, adj.average_degree)
    batch = _full_sweep_batch(adj)
    _, grads, _ = eem_batch_loss_and_grads(model, x, batch, ls, ema, 0.3)
    fd = fd_gradients(model.params(),
                      lambda: eem_batch_loss_and_grads(
                          model, x, batch, ls, ema, 0.3)[0])
    errs["eem"] = max_rel_err(grads, fd)

    x2, ls2, model2, batch2 = _okdeem_setup(42)
    frozen = _okdeem_targets(model2, x2, ls2, batch2, tau=0.5)
    _, grads, _ = okdeem_batch_loss_and_grads(
        model2, x2, batch2, ls2, 0.5, lam=0.3, alpha=0.7,
        target_override=frozen)
    fd = fd_gradients(model2.params(),
                      lambda: okdeem_batch_loss_and_grads(
                          model2, x2, batch2, ls2, 0.5, lam=0.3, alpha=0.7,
                          target_override=frozen)[0])
    errs["okdeem"] = max_rel_err(grads, fd)
    _, grads, _ = okdeem_batch_loss_and_grads(
        model2, x2, batch2, ls2, 0.5, lam=0.3, alpha=0.7,
        detach_targets=False)
    fd = fd_gradients(model2.params(),
                      lambda: okdeem_batch_loss_and_grads(
                          model2, x2, batch2, ls2, 0.5, lam=0.3, alpha=0.7,
                          detach_targets=False)[0])
    errs["okdeem-coupled"] = max_rel_err(grads, fd)

    worst = max(errs.values())
    detail = ", ".join(f"{k}={v:.2e}" for k, v in errs.items())
    _line(5, "PASS" if worst < 1e-4 else "FAIL", detail)
    assert worst < 1e-4, errs


def test_criterion_06_ema_dense_recurrence():
    graph, x, ls = _tiny_instance(seed=43, n=18)
    cfg = TrainConfig(method="eem", lr=0.0, dropout=0.0, epochs=5,
                      patience=5, exact_sweep=True, batch_size=7,
                      hidden_dim=6, seed=2)
    snaps = []
    _, model = train(cfg, graph, x, ls,
                     on_epoch_end=lambda epoch, model, report, ema:
                     snaps.append(ema.z.copy()))
    assert len(snaps) == 5
    adj = normalize_adjacency(graph, "row")
    out, _ = model.forward(x)
    s = adj.t_matmul(out)
    zbar = EmaLogits(ls, adj.average_degree).z
    worst = 0.0
    for snap in snaps:
        zbar = (zbar + s) * (1.0 - cfg.tau)
        worst = max(worst, float(np.abs(snap - zbar).max()))
    _line(6, "PASS" if worst <= 1e-6 else "FAIL",
          f"5 epochs, max |buffer - recurrence| = {worst:.2e}")
    assert worst <= 1e-6


def _row_regular_sampler(rows, out_degree, seed):
    src = np.repeat(np.arange(rows), out_degree)
    dst = (src + np.tile(np.arange(1, out_degree + 1), rows)) % rows
    w = np.full(src.size, 1.0 / out_degree)
    adj = NormalizedAdjacency.from_weighted_edges(rows, src, dst, w,
                                                  mode="row")
    return EdgeSampler(adj, seed=seed)


def test_criterion_07_sampler_fidelity_and_cost():
    graph, _, _ = generate_sbm(10, 2, 0.4, 0.1, 2, 1.0, seed=0)
    adj = normalize_adjacency(graph, "row")
    sampler = EdgeSampler(adj, seed=1)
    emp = empirical_distribution(sampler, 1_000_000)
    tv = total_variation(emp, adj.edge_weight / adj.edge_weight.sum())

    small = _row_regular_sampler(100, 20, seed=2)     # 2000 edges
    big = _row_regular_sampler(1000, 20, seed=3)      # 20000 edges
    per_small = measure_draw_rate(small, num_draws=2_000_000, repeats=5)
    per_big = measure_draw_rate(big, num_draws=2_000_000, repeats=5)
    growth = per_big / per_small - 1.0
    ok = tv < 0.005 and growth < 0.20
    _line(7, "PASS" if ok else "FAIL",
          f"TV at 1e6 draws = {tv:.4f}, per-draw cost at 10x edges: "
          f"{per_small * 1e9:.1f} -> {per_big * 1e9:.1f} ns "
          f"({growth:+.1%})")
    assert tv < 0.005
    assert growth < 0.20


def test_criterion_08_residual_decreases():
    resolved = resolve_dataset("sbm-sanity", seed=0)
    cfg = default_config("gem", "sbm-sanity", seed=0, epochs=150,
                         patience=50)
    report, _, _ = run_cell(resolved, cfg)
    rc = report.residual_curve
    at_init, at_best = rc[0], rc[report.best_epoch]
    ok = at_best < at_init
    _line(8, "PASS" if ok else "FAIL",
          f"residual {at_init:.3f} at init -> {at_best:.3f} at best epoch "
          f"{report.best_epoch}")
    assert at_best < at_init


def test_criterion_09_hop_distance_shape(tmp_path):
    manifest = ExperimentManifest(
        kind="hop", datasets=("sbm",), methods=("gem", "gcn1"),
        repeats=10, seed_base=0, out_dir=str(tmp_path))
    _, diffs = cmd_hop(manifest, baseline="gcn1")
    # only distances present in all 10 runs have a /10 denominator
    far = {d: v for (m, d), v in diffs.items()
           if m == "gem" and d >= 2 and len(v) == manifest.repeats}
    assert far, "no BFS distance >= 2 materialized in every run"
    counts = {d: sum(1 for x in v if x > 0) for d, v in far.items()}
    ok = all(pos >= 7 for pos in counts.values())
    detail = ", ".join(
        f"d={d}: +{pos}/10 (mean {np.mean(far[d]):+.2f})"
        for d, pos in sorted(counts.items()))
    _line(9, "PASS" if ok else "FAIL", detail)
    for d, pos in counts.items():
        assert pos >= 7, f"distance {d}: positive in only {pos}/10 runs"


def test_criterion_10_label_rate_shape(tmp_path):
    manifest = ExperimentManifest(
        kind="rate", datasets=("sbm",), methods=("gem", "gcn1"),
        repeats=10, seed_base=0, out_dir=str(tmp_path),
        rates=(1.0, 2.0, 5.0, 10.0, 20.0))
    scores = cmd_rate(manifest)
    gaps = {}
    for rate in manifest.rates:
        gem = float(np.mean(scores[("gem", rate)]))
        gcn1 = float(np.mean(scores[("gcn1", rate)]))
        gaps[rate] = gem - gcn1
    ok = all(g >= 0.0 for g in gaps.values())
    detail = ", ".join(f"{r:g}%: {g:+.2f}" for r, g in sorted(gaps.items()))
    _line(10, "PASS" if ok else "FAIL", f"gem - gcn1 by rate: {detail}")
    for rate, gap in gaps.items():
        assert gap >= 0.0, f"gem below gcn1 at rate {rate}%: {gap:+.2f}"


def test_criterion_11_large_dataset_loaders_exist():
    large = ("amazon-photo", "amazon-computers", "coauthor-cs",
             "coauthor-physics", "ogbn-arxiv")
    for name in large:
        assert name in DATASETS
        urls = dataset_urls(name)
        assert urls and all(u.startswith("https://") for u in urls.values())
    from graphem.bench import INDUCTIVE_DATASETS
    assert set(large) <= INDUCTIVE_DATASETS
    _line(11, "PASS", "loaders and protocols registered for "
          + ", ".join(large) + " (runs not gated)")
