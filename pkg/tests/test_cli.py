import json
import subprocess
import sys

import pytest

from genreedy.cli import run
from genreedy.diagram import DiagramMap, SetDiagram
from genreedy.sampling import orbit_quotient
from genreedy.serialize import diagram_to_json, dump_json, load_json, map_to_json, read_bundle

import oracles


@pytest.fixture
def bundle(tmp_path, capsys):
    def make(kind, *extra):
        path = tmp_path / f"{kind}{'_'.join(extra).replace('-', '')}.json"
        assert run(["gen", kind, *extra, "-o", str(path)]) == 0
        capsys.readouterr()
        return path
    return make


def json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_generated_simplex_bundle_checks_out(bundle, capsys):
    path = bundle("simplex", "--max-degree", "2")
    assert len(load_json(path)["category"]["morphisms"]) == 31
    for what in ("category", "reedy", "ez"):
        assert run(["check", what, str(path)]) == 0
    assert "ez ok" in capsys.readouterr().out


def test_swapped_structure_is_reported_with_the_first_coface(bundle, tmp_path, capsys):
    path = bundle("simplex", "--max-degree", "2")
    doc = load_json(path)
    s = doc["structure"]
    s["plus"], s["minus"] = s["minus"], s["plus"]
    bad = tmp_path / "swapped.json"
    dump_json(doc, bad)
    assert run(["check", "reedy", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "FAILED" in out and "δ⁰" in out
    assert run(["check", "reedy", str(bad), "--json"]) == 1
    rep = json_out(capsys)
    assert rep["ok"] is False


def test_cyclic_category_is_reedy_but_not_ez(bundle, capsys):
    path = bundle("cyclic", "--max-degree", "2")
    assert run(["check", "reedy", str(path)]) == 0
    assert run(["check", "crossed", str(path)]) == 0
    assert run(["check", "ez", str(path)]) == 1
    assert "iii" in capsys.readouterr().out


def test_total_category_of_the_cyclic_crossed_group(bundle, tmp_path, capsys):
    cyc = bundle("cyclic", "--max-degree", "2")
    base = bundle("simplex", "--max-degree", "2")
    out = tmp_path / "total.json"
    assert run(["total", str(cyc), "--structure", str(base), "-o", str(out)]) == 0
    doc = load_json(out)
    assert len(doc["category"]["morphisms"]) == 71 and "structure" in doc
    assert run(["check", "reedy", str(out)]) == 0


def test_dot_export(tmp_path, capsys):
    assert run(["gen", "simplex", "--max-degree", "1", "--dot"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("digraph") and text.count("->") == oracles.simplex_morphism_count(1) - 2


def test_boundary_split_workflow(bundle, tmp_path, capsys):
    path = bundle("simplex", "--max-degree", "2")
    prefix = tmp_path / "out" / "d2"
    prefix.parent.mkdir()
    assert run(["boundary", "2", str(path), "--split", str(prefix)]) == 0
    assert "sizes [3, 6, 9] inside [3, 6, 10]" in capsys.readouterr().out
    files = [f"{prefix}.{k}.json" for k in ("boundary", "representable", "inclusion")]
    assert run(["normal", *files]) == 0
    assert "(i) True  (ii) True  (iii) True" in capsys.readouterr().out
    rep = str(prefix) + ".representable.json"
    assert run(["latch", rep, "--object", "2", "--json"]) == 0
    assert json_out(capsys)["objects"][0]["size"] == 9
    assert run(["match", rep, "--object", "1", "--json"]) == 0
    assert json_out(capsys)["objects"][0]["size"] == 9
    assert run(["skel", "0", rep, "--json"]) == 0
    assert json_out(capsys)["sizes"] == [3, 3, 3]
    assert run(["coskel", "2", rep, "--json"]) == 0
    assert json_out(capsys)["counit_iso"] is True
    assert run(["decompose", rep, "--object", "1"]) == 0


def test_non_normal_map_exits_with_one(bundle, tmp_path, capsys):
    # the swap quotient of the representable at <2> in finite sets, mapped from the empty presheaf
    path = bundle("fin", "--max-degree", "2")
    C, S, _ = read_bundle(load_json(path))
    swap = [int(a) for a in C.automorphisms(1) if not C.is_identity[a]][0]
    Q = orbit_quotient(C, 1, swap)
    empty = SetDiagram.empty(C.op)
    dump_json(diagram_to_json(Q, shape_ref=path.name), tmp_path / "q.json")
    dump_json(diagram_to_json(empty, shape_ref=path.name), tmp_path / "e.json")
    dump_json(map_to_json(DiagramMap.from_empty(Q)), tmp_path / "m.json")
    assert run(["normal", str(tmp_path / "e.json"), str(tmp_path / "q.json"), str(tmp_path / "m.json")]) == 1
    assert "(i) False" in capsys.readouterr().out


def test_pushout_product_sampling(capsys):
    assert run(["pp-axiom", "--corpus", "simplex2", "--sample", "4"]) == 0
    assert "4/4 pushout-products normal; quasi-monoidal: True" in capsys.readouterr().out


def test_suite_json_is_deterministic(tmp_path, capsys):
    argv = ["suite", "--corpus", "quick", "--only", "1,2,3", "--json"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["passed"] == 3


@pytest.mark.parametrize("argv", [["gen", "simplex", "--max-degree", "99"],
                                  ["gen", "product", "--factors", "nope"],
                                  ["check", "reedy", "/nonexistent/bundle.json"],
                                  ["frobnicate"],
                                  ["suite", "--corpus", "huge"]])
def test_bad_input_exits_with_two(argv, capsys):
    assert run(argv) == 2


def test_malformed_bundle_exits_with_two(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"category": {"objects": ["a"]}}))
    assert run(["check", "category", str(p)]) == 2
    assert "error:" in capsys.readouterr().err
    p.write_text("{oops")
    assert run(["check", "category", str(p)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "genreedy", "gen", "gamma", "--max-degree", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "objects" in res.stdout
