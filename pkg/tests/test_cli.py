import json

import jsonschema
import mpmath as mp
import pytest

import plectic.serialize as ser
from plectic import cxlinalg as cx
from plectic.cli import main
from plectic.config import set_precision
from plectic.hodge import elliptic_h1, tensor
from plectic.lattices import IntMatrix
from plectic.numberfields import FieldOrder
from plectic.schemas import known_commands, report_schema


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    """Input files for every subcommand."""
    set_precision(128)
    root = tmp_path_factory.mktemp("cli")
    paths = {}

    def dump(name, obj):
        p = root / name
        p.write_text(json.dumps(obj))
        paths[name] = str(p)

    tau = mp.mpc("0.3", "1.7")
    h = elliptic_h1(1, tau)
    dump("phs.json", ser.phs_to_json(h))
    t12 = tensor(h, elliptic_h1(1, mp.mpc("-0.2", "0.9")))
    dump("phs2.json", ser.phs_to_json(t12))
    dump("pair.json", {"a": ser.phs_to_json(h),
                       "b": ser.phs_to_json(elliptic_h1(1, mp.mpc("-0.2", "0.9")))})

    import plectic.hodge as hg

    bad = hg.PlecticHodgeStructure(1, hg.Lattice.standard(2), {
        hg.Bidegree((1,), (0,)): cx.mpm([[1], [tau]]),
        hg.Bidegree((0,), (1,)): cx.mpm([[1], [mp.mpc("0.5", "0.9")]]),
    })
    dump("phs_bad.json", ser.phs_to_json(bad))

    from plectic.tori import ComplexTorus, construct_rm_torus

    E = ComplexTorus(1, cx.mpm([[1, tau]]))
    dump("torus.json", ser.torus_to_json(E))
    O5 = FieldOrder.quadratic_maximal(5)
    T5 = construct_rm_torus(O5, [mp.mpc("0.13", "1.07"), mp.mpc("-0.4", "0.83")])
    dump("torus_rm.json", ser.torus_to_json(T5))
    dump("rm_construct.json", {
        "field": O5.to_json(),
        "z": [ser.complex_to_json(mp.mpc(0, 1)), ser.complex_to_json(mp.mpc(0, 2))],
    })

    from plectic.shimura import StronglyPrimitiveDatum

    flip = IntMatrix.from_rows([[1, 0], [0, -1]])
    i2 = IntMatrix.identity(2)
    W = cx.kron(cx.mpm([[1], [mp.mpc(0, 1)]]), cx.mpm([[1], [mp.mpc(0, 1)]]))
    d2 = StronglyPrimitiveDatum(2, (flip.kron(i2), i2.kron(flip)), W)
    dump("datum.json", ser.datum_to_json(d2))

    target = hg.PlecticHodgeStructure(2, hg.Lattice.standard(2), {
        hg.Bidegree((1, 0), (1, 0)): cx.mpm([[1, 0], [0, 1]]),
    })
    dump("sp.json", {
        "structure": ser.phs_to_json(t12),
        "cups": [{"nu": 1, "matrix": [[0, 0, 0, 0], [0, 0, 0, 0]],
                  "target": ser.phs_to_json(target)}],
    })

    from plectic.abeljacobi import PlecticCycle, QuotientDatum

    qd = QuotientDatum(((1, mp.mpc(0, 1)), (1, mp.mpc(0, 1))))
    cyc = PlecticCycle.elementary([(mp.mpc("0.3", "0.7"), mp.mpc("0.1", "0")),
                                   (mp.mpc(0, "0.2"), mp.mpc("0.5", "0"))])
    dump("aj.json", {"datum": ser.quotient_datum_to_json(qd),
                     "cycle": ser.cycle_to_json(cyc)})
    qd1 = QuotientDatum(((1, tau),))
    cyc1 = PlecticCycle.elementary([(mp.mpc("0.3", "0.7"), mp.mpc("0.1", "0"))])
    dump("aj1.json", {"datum": ser.quotient_datum_to_json(qd1),
                      "cycle": ser.cycle_to_json(cyc1)})

    (root / "malformed.json").write_text("{ not json")
    paths["malformed.json"] = str(root / "malformed.json")
    return paths


COMMANDS = [
    ("phs.validate", lambda f: ["phs", "validate", "--input", f["phs.json"]]),
    ("phs.refine", lambda f: ["phs", "refine", "--input", f["phs2.json"]]),
    ("phs.filtration", lambda f: ["phs", "filtration", "--input", f["phs2.json"],
                                  "--index", "1"]),
    ("phs.tensor", lambda f: ["phs", "tensor", "--input", f["pair.json"]]),
    ("phs.jacobian", lambda f: ["phs", "jacobian", "--input", f["phs2.json"],
                                "--index", "1"]),
    ("torus.dual", lambda f: ["torus", "dual", "--input", f["torus.json"]]),
    ("torus.endos", lambda f: ["torus", "endos", "--input", f["torus.json"],
                               "--height-bound", "3"]),
    ("torus.rm-detect", lambda f: ["torus", "rm-detect", "--input", f["torus_rm.json"],
                                   "--height-bound", "6"]),
    ("torus.rm-construct", lambda f: ["torus", "rm-construct", "--input",
                                      f["rm_construct.json"]]),
    ("torus.rm-algebraize", lambda f: ["torus", "rm-algebraize", "--input",
                                       f["torus_rm.json"]]),
    ("flat.verify-identities", lambda f: ["flat", "verify-identities", "--n", "2",
                                          "--truncation", "1"]),
    ("flat.verify-laplacian", lambda f: ["flat", "verify-laplacian", "--n", "2",
                                         "--truncation", "1"]),
    ("flat.harmonic", lambda f: ["flat", "harmonic", "--n", "2", "--truncation", "1",
                                 "--alpha", "1,0", "--beta", "0,1"]),
    ("flat.extract-phs", lambda f: ["flat", "extract-phs", "--n", "1",
                                    "--truncation", "1", "--degree", "1"]),
    ("flat.metric-independence", lambda f: ["flat", "metric-independence", "--n", "2",
                                            "--truncation", "1",
                                            "--weights-a", "1,1",
                                            "--weights-b", "0.5,2.0"]),
    ("qsv.build", lambda f: ["qsv", "build", "--input", f["datum.json"]]),
    ("qsv.strongly-primitive", lambda f: ["qsv", "strongly-primitive", "--input",
                                          f["sp.json"]]),
    ("qsv.nu-structure", lambda f: ["qsv", "nu-structure", "--input", f["datum.json"],
                                    "--nu", "1"]),
    ("qsv.characters", lambda f: ["qsv", "characters", "--input", f["datum.json"],
                                  "--nu", "1"]),
    ("qsv.jacobian", lambda f: ["qsv", "jacobian", "--input", f["datum.json"],
                                "--nu", "1"]),
    ("aj.compute", lambda f: ["aj", "compute", "--input", f["aj.json"], "--nu", "1"]),
    ("aj.periods", lambda f: ["aj", "periods", "--input", f["aj.json"], "--nu", "1"]),
    ("aj.theorem-b", lambda f: ["aj", "theorem-b", "--input", f["aj1.json"],
                                "--nu", "1", "--trials", "5", "--seed", "11"]),
]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


@pytest.mark.parametrize("command,argv_fn", COMMANDS, ids=[c for c, _ in COMMANDS])
def test_subcommand_passes_and_validates(command, argv_fn, fixtures, capsys):
    code, out = run(argv_fn(fixtures), capsys)
    assert code == 0
    report = json.loads(out)
    assert report["command"] == command
    assert report["config"]["precision"] == 128
    jsonschema.validate(report, report_schema(command))


def test_all_published_schemas_are_exercised():
    assert {c for c, _ in COMMANDS} == set(known_commands())


def test_reports_are_byte_identical(fixtures, capsys):
    argv = ["aj", "theorem-b", "--input", fixtures["aj.json"], "--nu", "1",
            "--trials", "6", "--seed", "3"]
    _, out1 = run(argv, capsys)
    _, out2 = run(argv, capsys)
    assert out1 == out2
    argv2 = ["flat", "verify-identities", "--n", "2", "--truncation", "1"]
    _, out3 = run(argv2, capsys)
    _, out4 = run(argv2, capsys)
    assert out3 == out4


def test_check_failure_exits_one(fixtures, capsys):
    code, out = run(["phs", "validate", "--input", fixtures["phs_bad.json"]], capsys)
    assert code == 1
    report = json.loads(out)
    assert report["pass"] is False
    assert float(report["payload"]["conjugation_residual"]) > 0.1


def test_malformed_json_exits_two(fixtures, capsys):
    code = main(["phs", "validate", "--input", fixtures["malformed.json"]])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 1" in err and "column" in err


def test_missing_input_exits_two(capsys):
    code = main(["phs", "validate"])
    assert code == 2


def test_env_precision_override(fixtures, capsys, monkeypatch):
    monkeypatch.setenv("PLECTIC_PRECISION", "160")
    code, out = run(["phs", "validate", "--input", fixtures["phs.json"]], capsys)
    assert code == 0
    assert json.loads(out)["config"]["precision"] == 160
    # an explicit flag wins over the environment
    code, out = run(["phs", "validate", "--input", fixtures["phs.json"],
                     "--precision", "96"], capsys)
    assert json.loads(out)["config"]["precision"] == 96
    monkeypatch.delenv("PLECTIC_PRECISION")
    set_precision(128)


def test_output_file(fixtures, tmp_path, capsys):
    dest = tmp_path / "report.json"
    code = main(["phs", "validate", "--input", fixtures["phs.json"],
                 "--output", str(dest)])
    assert code == 0
    report = json.loads(dest.read_text())
    assert report["pass"] is True
