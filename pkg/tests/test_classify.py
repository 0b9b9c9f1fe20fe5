import csv
import io
import json
import warnings

import numpy as np
import pytest

from pfreal.classify import (
    check_symmetry,
    is_trivial,
    records,
    solutions_csv,
    solutions_json,
    split_real,
    split_trivial,
    verify,
)
from pfreal.errors import AmbiguousRealityWarning, StructuralError, VerificationError


def test_split_counts(table1_solutions):
    real, nonreal = split_real(table1_solutions)
    assert len(real) == 16 and len(nonreal) == 4
    trivial, other = split_trivial(table1_solutions)
    assert len(trivial) == 8 and len(other) == 12


def test_trivial_sign_patterns(table1_solutions):
    trivial, _ = split_trivial(table1_solutions)
    signs = {tuple(np.sign(x.real[0::2]).astype(int)) for x in trivial}
    assert len(signs) == 8


def test_ambiguous_reality_warns():
    x = np.array([0.5 + 5e-9j, 0.1])
    with pytest.warns(AmbiguousRealityWarning):
        real, nonreal = split_real([x], real_tol=1e-8)
    assert not real and len(nonreal) == 1


def test_clearly_real_no_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        real, _ = split_real([np.array([0.5 + 1e-14j, 0.2])])
    assert len(real) == 1 and real[0].imag.max() == 0


def test_is_trivial():
    assert is_trivial([1, 0, -1, 0])
    assert not is_trivial([1, 0.1, -1, 0])
    assert is_trivial([1.1, 0, -0.9, 0], vm=[1.1, 0.9])


def test_symmetry_pairs(table1_solutions):
    _, other = split_trivial(table1_solutions)
    pairs = check_symmetry(other)
    assert len(pairs) == 6
    flip = np.array([1, -1] * 3)
    for i, j in pairs:
        assert np.allclose(other[i] * flip, other[j], atol=1e-8)


def test_symmetry_violation():
    with pytest.raises(StructuralError):
        check_symmetry([np.array([0.3, 0.9, 0.1, 0.2]), np.array([0.3, -0.8, 0.1, -0.2])])
    with pytest.raises(StructuralError):
        check_symmetry([np.array([1.0, 0.0, 1.0, 0.0])])


def test_verify_real_solutions(table1, table1_solutions):
    for rec in records(table1_solutions, table1):
        if rec.is_real:
            rep = verify(rec, table1)
            assert rep.balance < 1e-9
            assert rep.magnitude_error < 1e-10
            assert abs(rep.slack_p + rep.p[1:].sum()) < 1e-9


def test_verify_rejects_bad_point(table1):
    with pytest.raises(VerificationError):
        verify(np.array([0.9, 0.1, 1, 0, 1, 0]), table1)


def test_csv_layout(table1, table1_solutions):
    text = solutions_csv(records(table1_solutions, table1), table1)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["sol_id", "vd2", "vq2", "vd3", "vq3", "vd4", "vq4", "is_real", "is_trivial", "residual"]
    assert len(rows) == 21
    assert sum(r[7] == "1" for r in rows[1:]) == 16
    assert sum(r[8] == "1" for r in rows[1:]) == 8


def test_json_layout(table1, table1_solutions):
    doc = json.loads(solutions_json(records(table1_solutions, table1), table1))
    assert len(doc["solutions"]) == 20
    real = [s for s in doc["solutions"] if s["is_real"]]
    assert all(isinstance(s["vd2"], float) for s in real)
