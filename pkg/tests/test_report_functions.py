import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from functions.errors import InputError
from functions.report_functions import (
    parse_float_list,
    parse_int_list,
    parse_matrix,
    sweep_frame,
    to_json,
    write_report,
)


def test_parse_matrix_inline():
    M = parse_matrix('[[0, [1, 2]], [[1, -2], 3.5]]')
    assert_allclose(M, [[0, 1 + 2j], [1 - 2j, 3.5]])


def test_parse_matrix_from_file(tmp_path):
    path = tmp_path / 'flip.json'
    path.write_text('[[0, 1], [1, 0]]', encoding='utf-8')
    assert_allclose(parse_matrix(str(path)), [[0, 1], [1, 0]])


@pytest.mark.parametrize("text", ['[[0, 1], [1]', '[[1, 2, 3]]', '[[true]]', '[[[1, 2, 3]]]', '[]', '{"a": 1}'])
def test_parse_matrix_rejects(text):
    with pytest.raises(InputError):
        parse_matrix(text)


def test_parse_lists():
    assert parse_int_list('2, 1,0') == [2, 1, 0]
    assert parse_float_list('1e-2,0.5') == [0.01, 0.5]
    with pytest.raises(InputError):
        parse_int_list('2,x')
    with pytest.raises(InputError):
        parse_float_list(',')


def test_json_encoding():
    report = {
        'matrix': np.array([[1, 2j], [-2j, 3]]),
        'vector': np.array([1.0, 2.0]),
        'value': np.complex128(1 - 1j),
        'count': np.int64(3),
        'flag': np.bool_(True),
        'pair': (1, 2),
    }
    text = to_json(report)
    assert text.endswith('\n')
    decoded = json.loads(text)
    assert decoded['matrix'] == [[[1.0, 0.0], [0.0, 2.0]], [[0.0, -2.0], [3.0, 0.0]]]
    assert decoded['vector'] == [1.0, 2.0]
    assert decoded['value'] == [1.0, -1.0]
    assert decoded['count'] == 3 and decoded['flag'] is True and decoded['pair'] == [1, 2]


def test_sweep_frame_splits_complex():
    frame = sweep_frame([{'q': 0.1, 'value': 1 + 2j}, {'q': 0.01, 'value': 3 - 1j}])
    assert list(frame.columns) == ['q', 'value_re', 'value_im']
    assert frame['value_im'].tolist() == [2.0, -1.0]


def test_write_report(tmp_path):
    out = tmp_path / 'report.json'
    text = write_report({'passed': True}, str(out))
    assert out.read_text(encoding='utf-8') == text
    csv = write_report({'rows': [{'q': 0.1, 'error': 0.5}]}, fmt='csv')
    assert csv == 'q,error\n0.1,0.5\n'
    with pytest.raises(InputError):
        write_report({'passed': True}, fmt='csv')
    with pytest.raises(InputError):
        write_report({'passed': True}, fmt='xml')
