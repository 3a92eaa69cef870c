import json
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldfec.cli import _numbers, main
from ldfec.tables import (
    DIVERGES,
    SIMULATE_SCHEMA,
    ScenarioError,
    Table,
    read_csv,
    read_json,
    validate_document,
)

REPO = Path(__file__).resolve().parents[1]


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return read_csv(text).rows


def test_number_lists():
    assert _numbers("1..3,7", int) == [1, 2, 3, 7]
    assert _numbers("0.05,0.1") == [0.05, 0.1]


def test_analyze_busy(capsys):
    code, out, _ = _run(capsys, "analyze", "busy", "--l", "5", "--eps", "0.1")
    row = _rows(out)[0]
    assert code == 0
    assert row["E_S"] == pytest.approx(0.52488)
    assert row["delay_bound"] == pytest.approx(2.4889, abs=1e-4)


def test_analyze_cost(capsys):
    _, out, _ = _run(capsys, "analyze", "cost", "--l", "5", "--eps", "0.1")
    assert _rows(out)[0]["cost"] == pytest.approx(3.13, abs=0.01)


def test_analyze_group_monotone(capsys):
    _, out, _ = _run(capsys, "analyze", "group", "--rate", "0.8", "--eps", "0.1", "--c", "1..5")
    d = [r["delay_per_slot"] for r in _rows(out)]
    assert len(d) == 5 and d == sorted(d)


def test_divergent_row_marker(capsys):
    _, out, _ = _run(capsys, "analyze", "busy", "--l", "10", "--eps", "0.1")
    assert _rows(out)[0]["status"] == DIVERGES


@pytest.mark.parametrize("what", ["pmf", "failure", "rank", "throughput"])
def test_other_analyses(capsys, what):
    code, out, _ = _run(capsys, "analyze", what, "--l", "5", "--eps", "0.1", "--q", "4")
    assert code == 0 and _rows(out)


def test_csv_header_carries_build_and_seed(capsys):
    _, out, _ = _run(capsys, "analyze", "busy", "--l", "5", "--eps", "0.1", "--seed", "42")
    meta = read_csv(out).meta
    assert meta["seed"] == 42 and meta["build"]


def _scenario(tmp_path, **over):
    doc = {"code": {"variant": "stream", "l": 5}, "channel": {"model": "iid", "epsilon": 0.1},
           "N": 5000, "ideal_recovery": True, "seeds": [1]}
    doc.update(over)
    p = tmp_path / "sc.json"
    p.write_text(json.dumps(doc))
    return p


def test_simulate_writes_csv_and_json_mirror(tmp_path, capsys):
    sc = _scenario(tmp_path, sweep={"axis": "epsilon", "values": [0.05, 0.1]})
    out = tmp_path / "res" / "out.csv"
    code, _, _ = _run(capsys, "simulate", str(sc), "--out", str(out), "--reps", "2")
    assert code == 0
    csv_t = read_csv(out.read_text())
    json_t = read_json(out.with_suffix(".json").read_text())
    assert len(csv_t.rows) == 2
    assert csv_t.rows == json_t.rows
    assert csv_t.meta == json_t.meta
    assert csv_t.rows[0]["replications"] == 2


def test_simulate_ms_units(tmp_path, capsys):
    sc = _scenario(tmp_path)
    _, a, _ = _run(capsys, "simulate", str(sc))
    _, b, _ = _run(capsys, "simulate", str(sc), "--slot-ms", "2")
    ra, rb = _rows(a)[0], _rows(b)[0]
    assert rb["mean_delay"] == pytest.approx(2 * ra["mean_delay"])
    assert read_csv(b).meta["delay_unit"] == "ms"


def test_unknown_key_reported_with_path(tmp_path, capsys):
    sc = _scenario(tmp_path, code={"variant": "stream", "l": 5, "window": 3})
    code, _, err = _run(capsys, "simulate", str(sc))
    assert code == 2 and "$.code.window" in err


def test_bad_value_reported_with_path(tmp_path, capsys):
    sc = _scenario(tmp_path, channel={"model": "iid", "epsilon": 2})
    code, _, err = _run(capsys, "simulate", str(sc))
    assert code == 2 and "$.channel.epsilon" in err


def test_missing_code_field(tmp_path, capsys):
    sc = _scenario(tmp_path, code={"variant": "group", "lg": 10})
    code, _, err = _run(capsys, "simulate", str(sc))
    assert code == 2 and "$.code.c" in err


def test_compare(tmp_path, capsys):
    doc = {"rate": 0.8, "channel": {"model": "iid", "epsilon": 0.1}, "N": 4000, "seeds": [2],
           "block_sizes": [4, 8], "group_c": [2]}
    p = tmp_path / "cmp.json"
    p.write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "compare", str(p))
    assert code == 0
    assert [r["variant"] for r in _rows(out)] == ["stream", "group", "block", "block"]


def test_compare_rejects_mismatched_block(tmp_path, capsys):
    p = tmp_path / "cmp.json"
    p.write_text(json.dumps({"rate": 0.8, "channel": {"model": "iid", "epsilon": 0.1}, "N": 100,
                             "block_sizes": [5]}))
    code, _, err = _run(capsys, "compare", str(p))
    assert code == 2 and "$.block_sizes" in err


def test_validate_subset_exit_status(capsys):
    code, out, _ = _run(capsys, "validate", "--only", "4,5")
    assert code == 0 and "2/2 checks passed" in out


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "ldfec.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "ldfec" in r.stdout


@pytest.mark.parametrize("path", sorted((REPO / "scenarios").glob("*.json")))
def test_shipped_scenarios_validate(path):
    from ldfec.tables import COMPARE_SCHEMA

    doc = json.loads(path.read_text())
    validate_document(doc, COMPARE_SCHEMA if "rate" in doc else SIMULATE_SCHEMA)


values = st.one_of(st.integers(-10**6, 10**6), st.floats(allow_nan=False, allow_infinity=False),
                   st.sampled_from(["ok", DIVERGES, "a,b"]), st.booleans(), st.none())


@given(st.lists(st.fixed_dictionaries({"x": values, "y": values}), max_size=8))
def test_table_roundtrip(rows):
    t = Table(["x", "y"], rows, {"seed": 1})
    assert read_csv(t.to_csv()).rows == rows
    assert read_json(t.to_json()).rows == rows


def test_schema_error_type():
    with pytest.raises(ScenarioError) as exc:
        validate_document({"code": {"variant": "stream"}, "channel": {"model": "iid", "epsilon": 0.1}}, SIMULATE_SCHEMA)
    assert exc.value.path == "$"


@pytest.mark.parametrize("name", ["simulate", "compare"])
def test_published_schemas_current(name):
    from ldfec import tables

    published = json.loads((REPO / "docs" / "schemas" / f"{name}.schema.json").read_text())
    assert published == getattr(tables, f"{name.upper()}_SCHEMA")
