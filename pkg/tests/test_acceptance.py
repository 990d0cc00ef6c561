"""Acceptance gate: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  Tolerances are pinned here and nowhere else.
"""

import itertools
import struct
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import POOL, make_blobs, make_random_pair, write_manifest
from oracles import (
    hscore_oracle,
    logme_grid_oracle,
    pearson_oracle,
    transrate_eig_oracle,
    weighted_kendall_tau_oracle,
)
from sitebench.diagnostics import (
    DEFAULT_ABLATION_SEQUENCE,
    DEFAULT_STATIC_ORDER,
    AblationPlan,
    StaticOrder,
    ablation_sweep,
    audit_benchmark,
    delta_pairs,
    evaluate_metric,
    fidelity_correlation,
    rank_dispersion,
    static_scores,
)
from sitebench.errors import FormatError
from sitebench.feature_store import (
    AccuracyTable,
    FeatureMatrix,
    LabelVector,
    ScoreTable,
    load_manifest,
    read_features,
    write_features,
)
from sitebench.metrics import METRICS, MetricConfig, gbc, hscore, logme, nleep, transrate
from sitebench.rank_stats import RankedScores, weighted_kendall_tau
from sitebench.report import build_summary

MODELS_11 = [m for m, _, _ in POOL]


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def rs(g, t, ids=None):
    ids = ids or tuple(f"m{i}" for i in range(len(g)))
    return RankedScores(tuple(ids), tuple(map(float, g)), tuple(map(float, t)))


def test_table1_aggregation_reproduction():
    rows = {
        "gbc": [-0.12, -0.02, 0.09, 0.14, 0.10, -0.15],
        "transrate": [0.14, 0.51, 0.20, 0.20, -0.05, 0.17],
        "sfda": [-0.22, 0.85, 0.79, 0.63, 0.30, 0.34],
        "hscore": [0.60, 0.91, 0.80, 0.04, 0.59, 0.37],
        "nleep": [-0.51, 0.76, 0.84, 0.70, 0.69, 0.84],
        "logme": [0.41, 0.85, 0.72, 0.66, 0.39, 0.41],
        "static": [0.84, 0.91, 0.98, 0.99, 0.80, 0.94],
    }
    expected = {
        "gbc": 0.007,
        "transrate": 0.195,
        "sfda": 0.448,
        "hscore": 0.552,
        "nleep": 0.553,
        "logme": 0.573,
        "static": 0.910,
    }
    datasets = ["Aircraft", "CIFAR10", "CIFAR100", "DTD", "Food", "Pets"]
    with criterion("summary-table aggregation reproduces the published Average column"):
        table = build_summary(
            {m: dict(zip(datasets, vals)) for m, vals in rows.items()}, datasets
        )
        for row in table.rows:
            assert abs(row.average - expected[row.metric_id]) <= 0.0005, row.metric_id


def test_weighted_tau_correctness():
    with criterion("weighted tau: exact endpoints, all permutations M<=8, hand case"):
        g = [9.0, 7.0, 5.0, 3.0, 1.0]
        assert weighted_kendall_tau(rs(g, g)) == 1.0
        assert weighted_kendall_tau(rs(g, [-v for v in g])) == -1.0

        for m in range(2, 9):
            gm = [float(m - i) for i in range(m)]
            ids = [f"m{i}" for i in range(m)]
            for perm in itertools.permutations(range(m)):
                t = [float(p) for p in perm]
                ours = weighted_kendall_tau(rs(gm, t, ids))
                ref = weighted_kendall_tau_oracle(gm, t, ids)
                assert abs(ours - ref) <= 1e-12

        hand = weighted_kendall_tau(rs([0.9, 0.8, 0.7], [0.5, 0.7, 0.6]))
        assert abs(hand - (-0.5455)) <= 1e-4


def test_static_ranker_property():
    with criterion("static ranker: tau_w = 1.0 on matching datasets, 8/10 winner = 0.8"):
        order = StaticOrder(DEFAULT_STATIC_ORDER)
        datasets = ["d1", "d2", "d3"]
        entries = {}
        rng = np.random.default_rng(0)
        for ds in datasets:
            gaps = np.cumsum(rng.uniform(0.01, 0.03, size=11))[::-1]
            for m, v in zip(DEFAULT_STATIC_ORDER, gaps):
                entries[(m, ds)] = float(v)  # accuracy order equals static order
        acc = AccuracyTable(entries)
        table = ScoreTable()
        for ds in datasets:
            for m, v in static_scores(order, MODELS_11).items():
                table.put("static", m, ds, v)
        for ds in datasets:
            assert evaluate_metric(table, acc, "static", ds, MODELS_11) == 1.0

        ten = [f"ds{i}" for i in range(10)]
        entries = {}
        for i, ds in enumerate(ten):
            vals = rng.uniform(0.3, 0.8, size=11)
            for m, v in zip(MODELS_11, vals):
                entries[(m, ds)] = float(v * 0.9)
            winner = "ResNet-152" if i < 8 else "MNASNet"
            entries[(winner, ds)] = 0.99
        stats = rank_dispersion(AccuracyTable(entries), MODELS_11, ten)
        assert stats.top1_concentration == 0.8


def test_metric_oracles():
    with criterion("hscore: 1-D fixture = 1.0 and naive-oracle agreement"):
        f = FeatureMatrix("m", "ds", np.array([[1.0], [1.0], [-1.0], [-1.0]], dtype=np.float32))
        l = LabelVector("ds", np.array([0, 0, 1, 1]))
        assert abs(hscore(f, l).value - 1.0) <= 1e-9
        fr, lr = make_random_pair(200, 16, 4, seed=1)
        assert abs(hscore(fr, lr).value - hscore_oracle(fr.values, lr.labels.astype(int))) <= 1e-8

    with criterion("nleep: K = 1 with balanced binary labels = -0.693147"):
        fb, lb = make_random_pair(40, 6, 2, seed=2)
        value = nleep(fb, lb, MetricConfig("nleep", {"n_components": 1})).value
        assert abs(value - (-0.693147)) <= 1e-6

    with criterion("transrate: zero features = 0, logdet matches eigenvalue oracle"):
        fz = FeatureMatrix("m", "ds", np.zeros((8, 4), dtype=np.float32))
        lz = LabelVector("ds", np.array([0, 1] * 4))
        assert abs(transrate(fz, lz).value) <= 1e-12
        for seed in range(3):
            ft, lt = make_random_pair(60, 8, 3, seed=seed)
            ours = transrate(ft, lt).value
            ref = transrate_eig_oracle(ft.values, lt.labels.astype(int))
            assert abs(ours - ref) <= 1e-8

    with criterion("gbc: identical-class fixtures = -1 and -3, N(0,1)/N(4,1) = -exp(-2)"):
        l2 = LabelVector("ds", np.array([0, 0, 1, 1]))
        same = FeatureMatrix("m", "ds", np.array([[0.0], [2.0], [0.0], [2.0]], dtype=np.float32))
        assert abs(gbc(same, l2).value - (-1.0)) <= 1e-9
        block = np.array([[0.0], [2.0]], dtype=np.float32)
        three = FeatureMatrix("m", "ds", np.vstack([block] * 3))
        l3 = LabelVector("ds", np.array([0, 0, 1, 1, 2, 2]))
        assert abs(gbc(three, l3).value - (-3.0)) <= 1e-9
        apart = FeatureMatrix("m", "ds", np.array([[-1.0], [1.0], [3.0], [5.0]], dtype=np.float32))
        assert abs(gbc(apart, l2).value - (-np.exp(-2.0))) <= 1e-6

    with criterion("logme: fixed point reaches the 60x60 grid-search oracle on 20 instances"):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.normal(size=(100, 8)).astype(np.float32)
            y = (rng.random(100) < 0.5).astype(int)
            if y.min() == y.max():
                y[0] = 1 - y[0]
            score = logme(FeatureMatrix("m", "ds", x), LabelVector("ds", y))
            fixed_point = score.diagnostics["per_class_evidence"][1]
            target = (y == 1).astype(float)
            grid_best = logme_grid_oracle(x.astype(np.float64), target) / 100
            assert fixed_point >= grid_best - 1e-2

    with criterion("all metrics: label-shuffle, row-permutation, class-relabel invariants"):
        f, l = make_blobs(20, 3, 8, spread=0.2, separation=8.0, seed=4)
        rng = np.random.default_rng(5)
        margins = {}
        for metric_id in ("hscore", "nleep", "transrate", "sfda", "gbc"):
            base = METRICS[metric_id](f, l, None).value
            worst = np.inf
            for _ in range(20):
                shuffled = LabelVector("ds", rng.permutation(l.labels))
                value = METRICS[metric_id](f, shuffled, None).value
                assert value <= base + 1e-9, metric_id
                worst = min(worst, base - value)
            margins[metric_id] = round(worst, 4)
        assert all(m > 0 for m in margins.values())
        print(f"    label-shuffle margins: {margins}")

        fr, lr = make_random_pair(60, 6, 3, seed=6)
        perm = rng.permutation(fr.n)
        relabel = rng.permutation(3)
        for metric_id, fn in METRICS.items():
            base = fn(fr, lr, None).value
            permuted = fn(
                FeatureMatrix("m", "ds", fr.values[perm]),
                LabelVector("ds", lr.labels[perm]),
                None,
            ).value
            relabeled = fn(
                fr, LabelVector("ds", relabel[lr.labels.astype(int)]), None
            ).value
            assert abs(permuted - base) <= 1e-9, metric_id
            assert abs(relabeled - base) <= 1e-9, metric_id


def test_ablation_sweep_criterion():
    with criterion("ablation: 5 entries over 11->7 models, each equals direct recomputation"):
        rng = np.random.default_rng(7)
        acc = AccuracyTable(
            {(m, "d"): float(v) for m, v in zip(MODELS_11, rng.uniform(0.4, 0.95, 11))}
        )
        table = ScoreTable()
        for m, v in zip(MODELS_11, rng.normal(size=11)):
            table.put("hscore", m, "d", float(v))
        plan = AblationPlan(DEFAULT_ABLATION_SEQUENCE)
        sweep = ablation_sweep(table, acc, "hscore", "d", plan, MODELS_11)
        assert len(sweep) == 5
        assert [11 - len(removed) for removed, _ in sweep] == [11, 10, 9, 8, 7]
        for k, (removed, tau) in enumerate(sweep):
            subset = [m for m in MODELS_11 if m not in set(plan.removal_sequence[:k])]
            assert abs(tau - evaluate_metric(table, acc, "hscore", "d", subset)) <= 1e-12


def test_fidelity_criterion():
    with criterion("fidelity: affine = +-1, 55 deltas at M = 11, Pearson-oracle agreement"):
        rng = np.random.default_rng(8)
        acc_vals = {m: float(v) for m, v in zip(MODELS_11, rng.uniform(0.4, 0.95, 11))}
        acc = AccuracyTable({(m, "d"): v for m, v in acc_vals.items()})

        for a, expected in ((3.0, 1.0), (-2.0, -1.0)):
            table = ScoreTable()
            for m in MODELS_11:
                table.put("hscore", m, "d", a * acc_vals[m] + 0.7)
            rec = fidelity_correlation(table, acc, "hscore", "d", MODELS_11)
            assert abs(rec.pearson_r - expected) <= 1e-9
            assert rec.pair_count == 55

        assert len(delta_pairs(acc_vals, MODELS_11)) == 55

        for seed in range(5):
            rng2 = np.random.default_rng(100 + seed)
            score_vals = {m: float(v) for m, v in zip(MODELS_11, rng2.normal(size=11))}
            table = ScoreTable()
            for m, v in score_vals.items():
                table.put("hscore", m, "d", v)
            rec = fidelity_correlation(table, acc, "hscore", "d", MODELS_11)
            ids = sorted(MODELS_11)
            ref = pearson_oracle(
                [acc_vals[a] - acc_vals[b] for a, b in itertools.combinations(ids, 2)],
                [score_vals[a] - score_vals[b] for a, b in itertools.combinations(ids, 2)],
            )
            assert abs(rec.pearson_r - ref) <= 1e-10


def test_audit_criterion(tmp_path):
    with criterion("audit: pool flags family ladders, 0.995 flags headroom, clean pool passes"):
        datasets = [("d1", 2, "natural"), ("d2", 2, "texture")]
        rng = np.random.default_rng(9)
        acc = {
            (m, ds): round(float(rng.uniform(0.5, 0.9)), 4)
            for m, _, _ in POOL
            for ds, _, _ in datasets
        }
        pool_path = write_manifest(tmp_path / "pool", POOL, datasets, acc, n_per_class=2, d=2)
        manifest = load_manifest(pool_path)
        report = audit_benchmark(manifest, manifest.accuracies)
        assert report.family_hierarchy.verdict == "flag"
        assert "resnet" in report.family_hierarchy.evidence
        assert "densenet" in report.family_hierarchy.evidence

        clean_models = [
            ("convnext-ish", "convnext", 10.0),
            ("vit-ish", "vit", 11.0),
            ("mixer-ish", "mixer", 12.0),
            ("swin-ish", "swin", 11.5),
        ]
        sat_acc = {}
        for m, _, _ in clean_models:
            sat_acc[(m, "d1")] = 0.995
            sat_acc[(m, "d2")] = 0.7
        sat_path = write_manifest(
            tmp_path / "sat", clean_models, datasets, sat_acc, n_per_class=2, d=2
        )
        sat_manifest = load_manifest(sat_path)
        sat_report = audit_benchmark(sat_manifest, sat_manifest.accuracies)
        assert sat_report.headroom.verdict == "flag"

        ten = [
            (f"ds{i}", 2, dom)
            for i, dom in enumerate(
                ["natural", "texture", "fine-grained", "natural", "texture",
                 "fine-grained", "natural", "texture", "fine-grained", "natural"]
            )
        ]
        ids = [m for m, _, _ in clean_models]
        winners = [ids[0]] * 3 + [ids[1]] * 3 + [ids[2]] * 2 + [ids[3]] * 2
        clean_acc = {}
        for i, (ds, _, _) in enumerate(ten):
            for m, _, _ in clean_models:
                clean_acc[(m, ds)] = round(float(rng.uniform(0.4, 0.9)), 4)
            clean_acc[(winners[i], ds)] = 0.95
        clean_path = write_manifest(
            tmp_path / "clean", clean_models, ten, clean_acc, n_per_class=2, d=2
        )
        clean = load_manifest(clean_path)
        clean_report = audit_benchmark(clean, clean.accuracies)
        assert clean_report.all_pass(), {
            k: (v.verdict, v.evidence) for k, v in clean_report.checks().items()
        }


def test_format_criterion(tmp_path):
    with criterion("format: 10,000 randomized round-trips bit-exact"):
        rng = np.random.default_rng(10)
        path = tmp_path / "rt.sitb"
        for _ in range(10_000):
            n = int(rng.integers(2, 7))
            d = int(rng.integers(1, 5))
            values = rng.normal(size=(n, d)).astype(np.float32)
            labels = rng.integers(0, 5, size=n)
            write_features(
                FeatureMatrix("m", "ds", values), LabelVector("ds", labels), path
            )
            matrix, back = read_features(path)
            assert matrix.values.tobytes() == values.tobytes()
            assert back.labels.tobytes() == labels.astype("<u4").tobytes()

    with criterion("format: 12 mutation cases each raise the named error"):
        rng = np.random.default_rng(11)
        values = rng.normal(size=(4, 3)).astype(np.float32)
        base = (
            struct.pack("<4sBBHQQ", b"SITB", 1, 1, 0, 4, 3)
            + values.astype("<f4").tobytes()
            + struct.pack("<Q", 4)
            + np.array([0, 0, 1, 1], dtype="<u4").tobytes()
        )

        def splice(offset, new):
            return base[:offset] + new + base[offset + len(new):]

        payload_end = 24 + 4 * 3 * 4
        cases = [
            ("bad magic", splice(0, b"XXXX")),
            ("bad version", splice(4, bytes([9]))),
            ("bad dtype", splice(5, bytes([7]))),
            ("reserved nonzero", splice(6, b"\x01\x00")),
            ("truncated header", base[:10]),
            ("truncated payload", base[:30]),
            ("corrupt length", splice(payload_end, struct.pack("<Q", 9))),
            ("label-count mismatch", base[:-4]),
            ("label-count mismatch", base + b"\x00" * 4),
            ("non-finite value", splice(24, struct.pack("<f", float("nan")))),
            ("non-finite value", splice(24, struct.pack("<f", float("inf")))),
            ("bad sample count", splice(8, struct.pack("<Q", 1))),
            ("bad dimension", splice(16, struct.pack("<Q", 0))),
        ]
        assert len(cases) >= 12
        path = tmp_path / "mut.sitb"
        for expected_code, data in cases:
            path.write_bytes(data)
            with pytest.raises(FormatError) as exc:
                read_features(path)
            assert exc.value.code == expected_code, expected_code
