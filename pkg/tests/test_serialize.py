import json
import subprocess
import sys

import numpy as np
from hypothesis import given, strategies as st

from bethe_asep.bethe import solve_general, solve_two_particle
from bethe_asep.forests import CountPolynomial, admissible_count
from bethe_asep.ramify import find_ramification, jordan_chain
from bethe_asep.serialize import (
    certificate_to_dict,
    decode_polynomial,
    dumps,
    encode_complex,
    encode_polynomial,
    event_to_dict,
    roundtrip,
    solution_set_to_dict,
    to_csv,
)
from bethe_asep.spectrum import certify


def test_encode_complex():
    assert encode_complex(1 - 2j) == {"re": 1.0, "im": -2.0}
    assert encode_complex(complex(float("inf"), float("nan"))) == {"re": "inf", "im": "nan"}


@given(st.lists(st.integers(-10 ** 30, 10 ** 30), max_size=8))
def test_polynomial_roundtrip(coeffs):
    poly = CountPolynomial(coeffs)
    data = json.loads(dumps(encode_polynomial(poly)))
    assert decode_polynomial(data) == poly


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_roundtrip_is_lossless(z):
    d = json.loads(dumps(encode_complex(z)))
    assert complex(d["re"], d["im"]) == z


def test_solution_set_roots_are_arrays_of_n():
    data = solution_set_to_dict(solve_two_particle(4, 0.7))
    assert data["raw_count"] == 16
    assert all(len(r["xi"]) == 2 for r in data["roots"])
    assert roundtrip(dumps(data)) == dumps(data)


def test_certificate_and_event_roundtrip():
    text = dumps(certificate_to_dict(certify(5, 3, 0.7)))
    assert roundtrip(text) == text
    event = find_ramification(4, 2, grid=21)[0]
    text = dumps(event_to_dict(event, jordan_chain(event)))
    assert roundtrip(text) == text
    assert json.loads(text)["jordan_chain"]["coupling"]["re"] != 0


def test_same_seed_same_bytes():
    a = dumps(solution_set_to_dict(solve_general(5, 3, 0.7, seed=3)))
    b = dumps(solution_set_to_dict(solve_general(5, 3, 0.7, seed=3)))
    assert a == b
    a = dumps(certificate_to_dict(certify(6, 3, 0.7, seed=3)))
    b = dumps(certificate_to_dict(certify(6, 3, 0.7, seed=3)))
    assert a == b


def test_bytes_do_not_depend_on_thread_count():
    code = ("from bethe_asep.bethe import solve_general;"
            "from bethe_asep.serialize import dumps, solution_set_to_dict;"
            "print(dumps(solution_set_to_dict(solve_general(6, 3, 0.7, seed=2))), end='')")
    outs = []
    for threads in ("1", "4"):
        env = {"BETHE_ASEP_THREADS": threads, "PATH": ""}
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   check=True).stdout)
    assert outs[0] == outs[1]


def test_csv_quoting_and_numbers():
    text = to_csv(["a", "b"], [["x,y", 0.1], [np.float64(1e-20), 1 + 2j]])
    lines = text.split("\r\n")
    assert lines[0] == "a,b"
    assert lines[1] == '"x,y",0.1'
    assert lines[2] == "1e-20,(1+2j)"


def test_encode_polynomial_uses_decimal_strings():
    enc = encode_polynomial(admissible_count(3))
    assert enc["coefficients"] == ["0", "2", "-3", "1"]
    assert enc["text"] == "L^3 - 3L^2 + 2L"
