import pytest
from pydantic import ValidationError

import cyclesparse as cs
from cyclesparse import (
    BicliqueConfig,
    CycleConfig,
    GraphParseError,
    InvalidInputRange,
    InvalidInputValue,
    MissingItems,
    NotEulerianError,
    ReduceConfig,
    SparsifyConfig,
)
from cyclesparse.report import ApproxReport, read_report

TRIANGLE = "0 1 1\n1 2 1\n2 0 1\n"


def test_invalid_algo():
    with pytest.raises(InvalidInputValue) as ex:
        _ = CycleConfig(algo="greedy")
    assert "naive, short" in str(ex.value)


def test_invalid_levels():
    with pytest.raises(ValidationError) as ex:
        _ = CycleConfig(levels=-1)
    assert "non-negative" in str(ex.value)


def test_invalid_k():
    with pytest.raises(ValidationError) as ex:
        _ = CycleConfig(k=1)
    assert "at least 2" in str(ex.value)


def test_invalid_eps():
    with pytest.raises(ValidationError) as ex:
        _ = SparsifyConfig(eps=1.5)
    assert "(0, 1]" in str(ex.value)


def test_invalid_theta():
    with pytest.raises(ValidationError) as ex:
        _ = SparsifyConfig(theta=2.0)
    assert "theta" in str(ex.value)


def test_invalid_phi():
    with pytest.raises(ValidationError) as ex:
        _ = BicliqueConfig(phi=0.7)
    assert "phi" in str(ex.value)


def test_invalid_rule():
    with pytest.raises(InvalidInputValue) as ex:
        _ = BicliqueConfig(matching_rule="loose")
    assert "stated, tight" in str(ex.value)


def test_invalid_threshold():
    with pytest.raises(ValidationError) as ex:
        _ = ReduceConfig(move_threshold=0.5)
    assert "at least 1" in str(ex.value)


def test_parse_fields():
    with pytest.raises(GraphParseError) as ex:
        _ = cs.load_graph("0 1 1\n1 2\n")
    assert str(ex.value).startswith("Line 2:")
    assert ex.value.line == 2


def test_parse_integer():
    with pytest.raises(GraphParseError) as ex:
        _ = cs.load_graph("0 1 x\n")
    assert "non-integer" in str(ex.value)


def test_parse_loop():
    with pytest.raises(GraphParseError) as ex:
        _ = cs.load_graph(TRIANGLE + "3 3 1\n")
    assert "Line 4: self-loop" in str(ex.value)


def test_parse_header():
    with pytest.raises(GraphParseError) as ex:
        _ = cs.load_graph("# n=2 directed=0\n" + TRIANGLE)
    assert "smaller than the largest vertex id" in str(ex.value)


def test_not_eulerian_message():
    ex = NotEulerianError(list(range(12)))
    assert str(ex).endswith("0, 1, 2, 3, 4, 5, 6, 7, 8, 9 (and 2 more)")


def test_invalid_range_is_value_error():
    with pytest.raises(ValueError):
        raise InvalidInputRange("seed must be a non-negative integer.")


def test_missing_report_items(tmp_path):
    path = tmp_path / "report.json"
    path.write_text('{"command": "decompose", "seed": 0}')
    with pytest.raises(MissingItems) as ex:
        _ = read_report(path)
    assert "argv, input_sha256" in str(ex.value)


def test_report_schema():
    with pytest.raises(InvalidInputValue) as ex:
        _ = ApproxReport(
            schema_version="other/0", command="decompose", argv=[], seed=0, input_sha256=""
        )
    assert "schema_version" in str(ex.value)
