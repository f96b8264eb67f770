"""JSON round-trips for every wire format.

Real and imaginary parts serialize as decimal strings at the configured
working precision, so values survive tool boundaries beyond the 64-bit
float range; integers stay exact through decimal strings in the
integer-matrix format.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .config import decimal_digits, working_precision
from .errors import InputError
from .lattices import IntMatrix, Lattice
from .numberfields import FieldOrder, FractionalIdealRep

__all__ = [
    "real_to_json", "real_from_json", "complex_to_json", "complex_from_json",
    "phs_to_json", "phs_from_json", "classical_to_json",
    "torus_to_json", "torus_from_json", "rm_to_json", "rm_from_json",
    "datum_to_json", "datum_from_json", "cycle_to_json", "cycle_from_json",
    "flat_torus_to_json", "flat_torus_from_json", "certificate_to_json",
    "int_rows_to_json", "int_rows_from_json",
]


def real_to_json(x) -> str:
    with working_precision():
        return mp.nstr(mp.mpf(x) if not isinstance(x, mp.mpf) else x,
                       decimal_digits(), strip_zeros=False)


def real_from_json(s):
    with working_precision():
        try:
            return mp.mpf(s)
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad decimal string {s!r}") from exc


def complex_to_json(z) -> list:
    z = mp.mpmathify(z)
    return [real_to_json(mp.re(z)), real_to_json(mp.im(z))]


def complex_from_json(pair):
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise InputError("complex values serialize as [re, im]")
    with working_precision():
        return mp.mpc(real_from_json(pair[0]), real_from_json(pair[1]))


def matrix_to_json(m: mp.matrix) -> list:
    return [[complex_to_json(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def matrix_from_json(rows) -> mp.matrix:
    if not rows:
        raise InputError("empty complex matrix")
    out = mp.matrix(len(rows), len(rows[0]))
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = complex_from_json(v)
    return out


def int_rows_to_json(m: IntMatrix) -> list:
    return [[int(x) for x in r] for r in m.entries]


def int_rows_from_json(rows) -> IntMatrix:
    try:
        return IntMatrix.from_rows(rows)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad integer matrix: {exc}") from exc


def phs_to_json(h) -> dict:
    return {
        "n": h.n,
        "rank": h.rank,
        "pieces": [
            {
                "alpha": list(bd.alpha),
                "beta": list(bd.beta),
                "basis": matrix_to_json(basis),
            }
            for bd, basis in h.sorted_pieces()
        ],
    }


def phs_from_json(obj: dict):
    from .hodge import Bidegree, PlecticHodgeStructure

    try:
        n = int(obj["n"])
        rank = int(obj["rank"])
        pieces = {}
        for p in obj["pieces"]:
            bd = Bidegree(tuple(int(a) for a in p["alpha"]),
                          tuple(int(b) for b in p["beta"]))
            pieces[bd] = matrix_from_json(p["basis"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad plectic-structure JSON: {exc}") from exc
    return PlecticHodgeStructure(n, Lattice.standard(rank), pieces)


def classical_to_json(h) -> dict:
    return {
        "rank": h.rank,
        "pieces": [
            {"p": pq[0], "q": pq[1], "basis": matrix_to_json(basis)}
            for pq, basis in h.sorted_pieces()
        ],
    }


def torus_to_json(t) -> dict:
    out = {"g": t.g, "periods": matrix_to_json(t.periods)}
    if t.rm is not None:
        out["rm"] = rm_to_json(t.rm)
    return out


def torus_from_json(obj: dict):
    from .tori import ComplexTorus

    try:
        g = int(obj["g"])
        periods = matrix_from_json(obj["periods"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad torus JSON: {exc}") from exc
    rm = rm_from_json(obj["rm"]) if "rm" in obj else None
    return ComplexTorus(g, periods, rm=rm)


def rm_to_json(rm) -> dict:
    return {
        "field": rm.field.to_json(),
        "action": [a.to_json() for a in rm.action],
    }


def rm_from_json(obj: dict):
    from .tori import RMStructure

    try:
        field = FieldOrder.from_json(obj["field"])
        action = tuple(IntMatrix.from_json(a) for a in obj["action"])
    except KeyError as exc:
        raise InputError(f"bad rm JSON: missing {exc}") from exc
    return RMStructure(field, action)


def ideal_to_json(ideal: FractionalIdealRep) -> dict:
    return ideal.to_json()


def ideal_from_json(order: FieldOrder, obj: dict) -> FractionalIdealRep:
    return FractionalIdealRep.from_json(order, obj)


def certificate_to_json(cert) -> dict:
    return {
        "field": cert.field.to_json(),
        "z": [complex_to_json(c) for c in cert.z],
        "ideal": cert.ideal.to_json(),
        "iso": matrix_to_json(cert.iso),
        "residual": real_to_json(cert.residual),
    }


def datum_to_json(d) -> dict:
    out = {
        "r": d.r,
        "rank": d.rank,
        "frobenii": [int_rows_to_json(f) for f in d.frobenii],
        "holo": matrix_to_json(d.holo),
    }
    if d.hecke:
        out["hecke"] = [int_rows_to_json(t) for t in d.hecke]
    return out


def datum_from_json(obj: dict):
    from .shimura import StronglyPrimitiveDatum

    try:
        r = int(obj["r"])
        frobenii = tuple(int_rows_from_json(f) for f in obj["frobenii"])
        holo = matrix_from_json(obj["holo"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad datum JSON: {exc}") from exc
    hecke = tuple(int_rows_from_json(t) for t in obj.get("hecke", []))
    return StronglyPrimitiveDatum(r, frobenii, holo, hecke)


def cycle_to_json(c) -> dict:
    return {
        "terms": [
            {
                "coeff": int(coeff),
                "lifts": [[complex_to_json(x), complex_to_json(y)] for x, y in lifts],
            }
            for coeff, lifts in c.terms
        ]
    }


def cycle_from_json(obj: dict):
    from .abeljacobi import PlecticCycle

    try:
        terms = []
        for t in obj["terms"]:
            lifts = tuple(
                (complex_from_json(p[0]), complex_from_json(p[1])) for p in t["lifts"]
            )
            terms.append((int(t["coeff"]), lifts))
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"bad cycle JSON: {exc}") from exc
    return PlecticCycle(tuple(terms))


def flat_torus_to_json(t) -> dict:
    return {
        "factors": [[complex_to_json(w1), complex_to_json(w2)] for w1, w2 in t.factors],
        "weights": [repr(float(w)) for w in t.weights],
    }


def flat_torus_from_json(obj: dict):
    from .flat import FlatTorus

    try:
        factors = tuple(
            (complex(complex_from_json(w1)), complex(complex_from_json(w2)))
            for w1, w2 in obj["factors"]
        )
        weights = tuple(float(w) for w in obj["weights"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad flat-torus JSON: {exc}") from exc
    return FlatTorus(factors, weights)


def quotient_datum_to_json(d) -> dict:
    return {"factors": [[complex_to_json(a), complex_to_json(b)] for a, b in d.factors]}


def quotient_datum_from_json(obj: dict):
    from .abeljacobi import QuotientDatum

    try:
        factors = tuple(
            (complex_from_json(a), complex_from_json(b)) for a, b in obj["factors"]
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad quotient datum JSON: {exc}") from exc
    return QuotientDatum(factors)
