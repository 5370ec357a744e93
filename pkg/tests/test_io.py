import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from waylab.io import (
    SchemaError,
    dumps,
    loads,
    matrix_from_json,
    matrix_to_json,
    measurement_from_json,
    measurement_to_json,
    model_from_json,
    vector_from_json,
    verdict_to_json,
)
from waylab.measurement import ProjectiveMeasurement, theorem1_check

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5), st.just(2)), elements=finite))
def test_matrix_round_trip_bit_exact(parts):
    m = parts[..., 0] + 1j * parts[..., 1]
    back = matrix_from_json(loads(dumps(matrix_to_json(m))))
    assert back.shape == m.shape
    assert back.real.tobytes() == m.real.tobytes()
    assert back.imag.tobytes() == m.imag.tobytes()


def test_matrix_layout_is_row_major():
    doc = matrix_to_json(np.array([[1, 2j], [3, 4]]))
    assert doc == {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


@pytest.mark.parametrize("doc, fragment", [
    ({"rows": 2, "cols": 2, "data": [[1, 0]] * 3}, "expected 4 entries"),
    ({"rows": 0, "cols": 1, "data": []}, "rows"),
    ({"rows": 1, "cols": 1}, "missing field 'data'"),
    ({"rows": 1, "cols": 1, "data": [[1, 0, 0]]}, "data[0]"),
    ({"rows": 1, "cols": 1, "data": [["a", 0]]}, "data[0][0]"),
    ({"rows": 1, "cols": 1, "data": [[1e400, 0]]}, "non-finite"),
    ({"rows": True, "cols": 1, "data": [[1, 0]]}, "rows"),
    ([1, 2], "expected an object"),
])
def test_matrix_rejections(doc, fragment):
    with pytest.raises(SchemaError) as info:
        matrix_from_json(doc, "h")
    assert fragment in str(info.value)
    assert str(info.value).startswith("h")


def test_nan_literal_rejected():
    with pytest.raises(SchemaError, match="NaN"):
        loads('{"rows": 1, "cols": 1, "data": [[NaN, 0]]}')


def test_syntax_error_has_line_and_column():
    with pytest.raises(SchemaError, match=r"line 2 column \d+"):
        loads('{"rows": 1,\n "cols" 1}', "m.json")


def test_vector_forms():
    np.testing.assert_array_equal(vector_from_json([1, [0, 2]]), [1, 2j])
    np.testing.assert_array_equal(vector_from_json(matrix_to_json(np.array([[1.0, 2.0]]))), [1, 2])
    with pytest.raises(SchemaError):
        vector_from_json(matrix_to_json(np.eye(2)))


def test_measurement_round_trip():
    p = ProjectiveMeasurement([np.diag([1.0, 0]), np.diag([0, 1.0])])
    back = measurement_from_json(loads(dumps(measurement_to_json(p))))
    assert isinstance(back, ProjectiveMeasurement)
    for a, b in zip(p.operators, back.operators):
        np.testing.assert_array_equal(a, b)


def test_measurement_bad_kind():
    with pytest.raises(SchemaError, match="kind"):
        measurement_from_json({"kind": "povm", "operators": [matrix_to_json(np.eye(2))]})


def test_verdict_json_fields():
    sx = np.array([[0, 1], [1, 0]])
    p = ProjectiveMeasurement([(np.eye(2) + sx) / 2, (np.eye(2) - sx) / 2])
    doc = json.loads(dumps(verdict_to_json(theorem1_check(p, np.diag([1.0, -1.0])))))
    assert doc["pass"] is True
    assert doc["defects"] == {"biconditional": 0.0}
    assert doc["facts"]["conserves"] is False
    names = [w["name"] for w in doc["witnesses"]]
    assert names == ["conservation_defect", "worst_commutator"]
    np.testing.assert_allclose(matrix_from_json(doc["witnesses"][0]), np.diag([-1.0, 1.0]), atol=1e-15)


def test_model_from_blocks_and_operator():
    doc = {
        "system": {"eigenvalues": [5, 9], "basis_blocks": [[[1, 0, 0], [0, 1, 0]], [[0, 0, 1]]]},
        "form": "additive",
        "h1": matrix_to_json(np.eye(3)),
        "h2": matrix_to_json(np.zeros((3, 3))),
        "xi": [1, 0, 0],
    }
    spec = model_from_json(doc)
    assert spec.system.multiplicities == (2, 1)
    assert spec.hamiltonian.form == "additive"
    np.testing.assert_array_equal(spec.xi, [1, 0, 0])
    spec = model_from_json({"system": {"operator": matrix_to_json(np.diag([5.0, 5.0, 9.0]))}})
    assert spec.system.multiplicities == (2, 1)
    assert spec.hamiltonian is None


def test_model_field_paths():
    with pytest.raises(SchemaError, match=r"model\.system\.basis_blocks\[1\]\[0\]\[2\]"):
        model_from_json({"system": {"eigenvalues": [1, 2], "basis_blocks": [[[1, 0]], [[0, 1, "x"]]]}})
    with pytest.raises(SchemaError, match="missing field 'system'"):
        model_from_json({})
