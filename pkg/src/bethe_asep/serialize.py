"""JSON, CSV and text encodings of results.

Complex numbers become {"re": x, "im": y}; polynomial coefficients become
decimal strings. JSON is written with sorted keys so identical results give
identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .bethe import SolutionSet
from .forests import CountPolynomial
from .ramify import JordanChain, RamificationEvent
from .spectrum import Certificate


def encode_complex(z) -> dict:
    z = complex(z)
    return {"re": _real(z.real), "im": _real(z.imag)}


def _real(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def encode_polynomial(poly: CountPolynomial) -> dict:
    return {"coefficients": poly.to_strings(), "text": str(poly)}


def decode_polynomial(data: dict) -> CountPolynomial:
    return CountPolynomial(int(c) for c in data["coefficients"])


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "L": cert.L,
        "N": cert.N,
        "hopping": encode_complex(cert.hopping.p),
        "eigenstate_count": cert.eigenstate_count,
        "min_singular_proxy": _real(cert.min_singular_proxy),
        "max_residual": _real(cert.max_residual),
        "trace_check": {"sum_eigenvalues": encode_complex(cert.trace_check[0]),
                        "trace": encode_complex(cert.trace_check[1]),
                        "difference": _real(cert.trace_check[2])},
        "trace_sq_check": {"sum_eigenvalues_sq": encode_complex(cert.trace_sq_check[0]),
                           "trace_sq": encode_complex(cert.trace_sq_check[1]),
                           "difference": _real(cert.trace_sq_check[2])},
        "verdict": cert.verdict,
        "reason": cert.reason,
        "starts_used": cert.starts_used,
        "eigenvalues": [encode_complex(e) for e in cert.eigenvalues],
        "roots": [[encode_complex(z) for z in r.xi] for r in cert.roots],
    }


def solution_set_to_dict(sol: SolutionSet) -> dict:
    return {
        "L": sol.L,
        "N": sol.N,
        "hopping": encode_complex(sol.hopping.p),
        "dedup_mode": sol.dedup_mode,
        "target": sol.target,
        "starts_used": sol.starts_used,
        "raw_count": sol.raw_count,
        "admissible_count": sol.admissible_count,
        "inadmissible_count": sol.inadmissible_count,
        "roots": [{
            "xi": [encode_complex(z) for z in r.xi],
            "residual_norm": _real(r.residual_norm),
            "multiplicity": r.multiplicity,
            "admissibility": {"tag": a.tag, "indices": list(a.indices)},
        } for r, a in sol.roots],
    }


def event_to_dict(event: RamificationEvent, chain: JordanChain | None = None) -> dict:
    out = {
        "p_r": encode_complex(event.p_r),
        "colliding_indices": sorted(event.colliding_indices),
        "gap_at_detection": _real(event.gap_at_detection),
        "sector": event.sector,
        "xi": encode_complex(event.xi),
        "discriminant": _real(event.discriminant),
    }
    if chain is not None:
        out["jordan_chain"] = {
            "eigenvalue": encode_complex(chain.eigenvalue),
            "first_order_residual": _real(chain.first_order_residual),
            "second_order_residual": _real(chain.second_order_residual),
            "coupling": encode_complex(chain.coupling),
            "richardson_difference": _real(chain.richardson_difference),
        }
    return out


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def roundtrip(text: str) -> str:
    return dumps(json.loads(text))


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
