import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermalsim.pauli import (Operator, PauliString, error_shift_operator,
                              pauli_anticommutes)


def test_single_site_products():
    x = PauliString("X")
    y = PauliString("Y")
    z = PauliString("Z")
    assert (x * y).letters == "Z" and (x * y).coeff == 1j
    assert (y * x).coeff == -1j
    assert (y * z).letters == "X" and (y * z).coeff == 1j
    assert (z * x).letters == "Y" and (z * x).coeff == 1j
    assert (x * x).letters == "I" and (x * x).coeff == 1


def test_anticommutation_examples():
    assert pauli_anticommutes("XI", "ZI")
    assert not pauli_anticommutes("XX", "ZZ")
    assert pauli_anticommutes("YI", "XX")


def test_anticommutation_size_mismatch():
    with pytest.raises(ValueError):
        pauli_anticommutes("XI", "X")


letters_st = st.text(alphabet="IXYZ", min_size=1, max_size=5)


@given(st.integers(1, 4), st.data())
@settings(max_examples=60, deadline=None)
def test_product_matches_dense(n, data):
    a = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    b = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    pa, pb = PauliString(a), PauliString(b)
    prod = pa * pb
    assert np.allclose(prod.dense(), pa.dense() @ pb.dense(), atol=1e-12)
    # commutation parity agrees with the dense commutator
    comm = pa.dense() @ pb.dense() - pb.dense() @ pa.dense()
    assert pauli_anticommutes(a, b) == (np.abs(comm).max() > 1e-12)


def test_operator_merging_and_zero_drop():
    op = Operator(2, [("XI", 1.0), ("XI", -1.0), ("ZZ", 0.5), ("ZZ", 0.25)])
    assert op.num_terms == 1
    assert op.weight("ZZ") == 0.75


def test_operator_algebra_dense_oracle():
    rng = np.random.default_rng(1)
    words = ["XII", "IYI", "ZZI", "IXX", "YIZ"]
    a = Operator(3, [(w, rng.normal()) for w in words])
    b = Operator(3, [(w, rng.normal()) for w in reversed(words)])
    assert np.allclose((a + b).dense(), a.dense() + b.dense())
    assert np.allclose((a @ b).dense(), a.dense() @ b.dense())
    comm = a.commutator(b)
    assert np.allclose(comm.dense(), a.dense() @ b.dense() - b.dense() @ a.dense())


def test_hermitian_flag():
    assert Operator(1, [("X", 1.0)]).is_hermitian()
    assert not Operator(1, [("X", 1j)]).is_hermitian()


def test_json_round_trip():
    op = Operator(4, [("XXIZ", -1.25), ("IIII", 0.5)])
    back = Operator.from_json(op.to_json())
    assert back == op


def test_error_shift_is_conjugation_difference():
    rng = np.random.default_rng(7)
    n = 4
    words = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(6)]
    ham = Operator(n, [(w, rng.normal()) for w in words])
    p = PauliString("".join(rng.choice(list("IXYZ"), n)))
    shift = error_shift_operator(p, ham)
    pd = p.dense()
    expected = pd @ ham.dense() @ pd - ham.dense()
    assert np.allclose(shift.dense(), expected, atol=1e-12)


def test_error_shift_identity_is_zero():
    ham = Operator(2, [("XX", -1.0), ("ZI", -1.4)])
    shift = error_shift_operator(PauliString("II"), ham)
    assert shift.num_terms == 0
