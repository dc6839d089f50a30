"""Exit criteria. Each test records a PASS/FAIL line shown in the terminal summary."""
import io
import json
import os
import random
import subprocess
import sys
import time
from datetime import date, timedelta
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_RESULTS, HIRSCH_DOI
from oracles import brute_h, brute_percentiles, decimal4
from tfactor.aggregation import (
    ReferenceSet,
    aggregate,
    mean_t_decimal,
    mean_t_factor,
    percentile_ranks,
    pooled_t_factor,
    second_order_t_factor,
)
from tfactor.cli import main
from tfactor.core import h_type_index, t_core
from tfactor.detection import cascade_counts, classify
from tfactor.ingestion import TweetRecord, load

SEED = 20150616


@pytest.fixture
def record(request):
    name = request.node.name
    outcome = {"ok": False, "detail": ""}
    yield outcome
    ACCEPTANCE_RESULTS.append((name, outcome["ok"], outcome["detail"]))


def corpus(n=10_000, seed=SEED):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        size = rng.randint(0, 200)
        hi = rng.choice([1, 5, 50, 500, 10**6])
        out.append([rng.randint(0, hi) for _ in range(size)])
    return out


def test_1_golden_classification(record, fixture_csv):
    start = time.perf_counter()
    out = io.StringIO()
    code = main(["detect", "--input", str(fixture_csv)], out=out)
    elapsed = time.perf_counter() - start
    summary = out.getvalue().splitlines()[-1]
    record["detail"] = f"{summary} in {elapsed:.3f}s"
    assert code == 0
    assert summary == "originals=28 retweets=41"
    assert elapsed < 1.0
    record["ok"] = True


def test_2_golden_cascade_vector(record, fixture_csv):
    table = cascade_counts(classify(load([fixture_csv])))
    counts = sorted(table[HIRSCH_DOI].values(), reverse=True)
    record["detail"] = f"top counts {counts[:8]}, zeros {counts.count(0)}"
    assert len(table) == 1
    assert counts == [25, 6, 4, 2, 1, 1, 1, 1] + [0] * 20
    record["ok"] = True


def test_3_golden_index(record, fixture_csv):
    out = io.StringIO()
    assert main(["compute", "--input", str(fixture_csv), "--output", "json"], out=out) == 0
    (unit,) = json.loads(out.getvalue())["units"]
    record["detail"] = f"t={unit['pooled']} core={unit['core_counts']}"
    assert unit["unit_id"] == HIRSCH_DOI
    assert unit["pooled"] == 3
    assert unit["core_ranks"] == [1, 2, 3]
    assert unit["core_counts"] == [25, 6, 4]
    record["ok"] = True


def test_4_oracle_equivalence(record):
    vectors = corpus()
    mismatches = [v for v in vectors if h_type_index(v) != brute_h(v)]
    record["detail"] = f"{len(vectors)} vectors, {len(mismatches)} mismatches"
    assert len(vectors) == 10_000
    assert all(len(v) <= 200 and max(v, default=0) <= 10**6 for v in vectors)
    assert not mismatches
    record["ok"] = True


def test_5_property_suite(record):
    rng = random.Random(SEED + 1)
    failures = []
    for v in corpus():
        t = h_type_index(v)
        n = len(v)
        w = list(v)
        rng.shuffle(w)
        if h_type_index(w) != t:
            failures.append(("permutation", v))
        if not 0 <= t <= min(n, max(v, default=0)):
            failures.append(("bounds", v))
        if h_type_index(v + [rng.randint(0, 300)]) < t:
            failures.append(("append", v))
        if v:
            i = rng.randrange(n)
            bumped = list(v)
            bumped[i] += rng.randint(1, 300)
            if h_type_index(bumped) < t:
                failures.append(("increment", v))
        big = [i for i, c in enumerate(v) if c >= n]
        if big:
            i = rng.choice(big)
            raised = list(v)
            raised[i] += rng.randint(1, 10**6)
            if h_type_index(raised) != t:
                failures.append(("skew", v))
        report = t_core(v)
        rows = report.rank_table
        if (report.value != t or len(report.core_ranks) != t
                or any(r.in_core != (r.rank <= t) for r in rows)
                or any(r.count < t for r in rows if r.in_core)
                or any(r.count > t for r in rows if not r.in_core)):
            failures.append(("core", v))
    record["detail"] = f"{len(failures)} violations"
    assert not failures, failures[:3]
    record["ok"] = True


def _unit_records(unit_no, pubs):
    recs = []
    day = date(2012, 1, 1)
    for p, counts in enumerate(pubs):
        pub = f"u{unit_no}-p{p}"
        for i, n in enumerate(counts):
            text = f"{pub} #{i}"
            recs.append(TweetRecord(f"{pub}-{i}", "a", day, text, pub, extra={"unit": f"u{unit_no}"}))
            recs += [TweetRecord(f"{pub}-{i}-{j}", "b", day + timedelta(days=1), f"RT @a: {text}", pub,
                                 extra={"unit": f"u{unit_no}"}) for j in range(n)]
    return sorted(recs, key=lambda r: r.timestamp)


def test_6_aggregation_oracles(record):
    rng = random.Random(SEED + 2)
    failures = 0
    for k in range(1000):
        pubs = [[rng.randint(0, 12) for _ in range(rng.randint(0, 10))] for _ in range(rng.randint(0, 6))]
        per_pub = [brute_h(c) for c in pubs]
        pooled = brute_h([c for counts in pubs for c in counts])
        classified = classify(_unit_records(k, pubs))
        aggs = aggregate(classified, group_by="unit")
        exact_mean = Fraction(sum(per_pub), len(per_pub)) if per_pub else Fraction(0)
        ok = (
            pooled_t_factor(classified) == pooled
            and second_order_t_factor(per_pub) == brute_h(per_pub)
            and str(mean_t_decimal(per_pub)) == decimal4(exact_mean)
            and decimal4(Fraction(mean_t_factor(per_pub))) == decimal4(exact_mean)
        )
        pubs_with_tweets = [c for c in pubs if c]
        if pubs_with_tweets:
            (a,) = aggs
            ok = ok and a.pooled_t == pooled and a.second_order_t == brute_h([brute_h(c) for c in pubs_with_tweets])
            ok = ok and a.pooled_t >= max(a.per_publication_t.values())
        failures += not ok
    record["detail"] = f"1000 units, {failures} mismatches"
    assert failures == 0
    record["ok"] = True


def test_7_percentile_exactness(record):
    rng = random.Random(SEED + 3)
    worst = 0.0
    failures = 0
    for k in range(1000):
        n = rng.randint(1, 60)
        # narrow value ranges force ties
        hi = rng.choice([0, 1, 3, 10, 100])
        members = {f"m{i}": rng.randint(0, hi) for i in range(n)}
        ranks = percentile_ranks(ReferenceSet(f"set{k}", members))
        exact = brute_percentiles(members)
        mean_err = abs(sum(ranks.values()) / n - 50)
        worst = max(worst, mean_err)
        bad = (
            any(not 0 <= p <= 100 for p in ranks.values())
            or mean_err > 1e-9
            or any(abs(ranks[u] - float(exact[u])) > 1e-9 for u in members)
            or any(members[u] > members[w] and ranks[u] < ranks[w] for u in members for w in members)
        )
        failures += bad
    record["detail"] = f"1000 sets, {failures} failures, worst mean error {worst:.2e}"
    assert failures == 0
    record["ok"] = True


def test_8_determinism(record, fixture_csv, tmp_path):
    outputs = []
    argv = ["report", "--input", str(fixture_csv), "--out-dir"]
    assert main(argv + [str(tmp_path / "a")], out=io.StringIO()) == 0
    # second run in a fresh interpreter with a different hash seed
    proc = subprocess.run([sys.executable, "-m", "tfactor", *argv, str(tmp_path / "b")],
                          env={**os.environ, "PYTHONHASHSEED": "12345"}, capture_output=True)
    assert proc.returncode == 0, proc.stderr
    for run in ("a", "b"):
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).iterdir())})
    record["detail"] = ", ".join(sorted(outputs[0]))
    assert {"report.json", "aggregates.csv", "classification.csv", "rank_tables.csv"} <= set(outputs[0])
    assert outputs[0] == outputs[1]
    record["ok"] = True
