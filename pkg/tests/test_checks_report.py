import json
import math

import numpy as np
import pytest

from relugp import checks
from relugp.report import derive_seed, dumps, write_csv


def test_oracle_agreement_small_run_passes():
    res = checks.oracle_agreement(n_cases=5, n_samples=200_000, seed=3)
    assert checks.summarize(res) == checks.PASS


def test_low_sample_count_is_inconclusive_not_failed():
    res = checks.oracle_agreement(n_cases=10, n_samples=100, seed=0)
    assert checks.summarize(res) == checks.INCONCLUSIVE
    assert all(r.status != checks.FAIL for r in res)


def test_oracle_agreement_deterministic():
    a = checks.oracle_agreement(n_cases=3, n_samples=10_000, seed=1)
    b = checks.oracle_agreement(n_cases=3, n_samples=10_000, seed=1)
    assert [r.as_dict() for r in a] == [r.as_dict() for r in b]


def test_wide_net_agreement_small_run():
    res = checks.wide_net_agreement(n_pairs=2, width=1000, draws=100, seed=5)
    assert checks.summarize(res) == checks.PASS


def test_summarize_precedence():
    mk = lambda s: checks.CaseResult(0, [], [], [], 0.0, 0.0, 0.0, s)  # noqa: E731
    assert checks.summarize([mk(checks.PASS), mk(checks.INCONCLUSIVE)]) == checks.INCONCLUSIVE
    assert checks.summarize([mk(checks.INCONCLUSIVE), mk(checks.FAIL)]) == checks.FAIL


def test_dumps_round_trips_and_uses_17_digits():
    obj = {"b": 0.1, "a": [1, 2.5, None], "nested": {"x": np.float64(1 / 3), "n": np.int64(4)}, "nan": math.nan}
    text = dumps(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "nested", "nan"]  # insertion order kept
    assert back["nested"]["x"] == 1 / 3
    assert back["nan"] is None
    assert "0.10000000000000001" in text


def test_write_csv_config_header(tmp_path):
    p = write_csv(tmp_path / "t.csv", ("a", "b"), [(1, 0.5)], {"seed": 3})
    lines = p.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):]) == {"seed": 3}
    assert lines[1:] == ["a,b", "1,0.5"]


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, "init", "he") == derive_seed(0, "init", "he")
    seeds = {derive_seed(s, st, t) for s in range(3) for st in ("init", "shuffle") for t in ("he", "pair:1,0")}
    assert len(seeds) == 12
    # pinned value guards against accidental changes to the derivation
    assert derive_seed(0, "simulate") == derive_seed(0, "simulate", 0)


@pytest.mark.parametrize("value", [0.0, -2.5, 1e-300, 123456789.123])
def test_float_formatting_round_trip(value):
    assert json.loads(dumps(value)) == value
