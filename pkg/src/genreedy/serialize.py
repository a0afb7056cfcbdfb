"""JSON and DOT formats for categories, structures, presheaves, maps and crossed groups.

A *bundle* is one JSON document with a ``"category"`` section and optional
``"structure"`` and ``"crossed"`` sections.  A crossed group carries its own
base category, since the bundle category is usually its total category.
Diagram and map files refer to their shape either inline or by a path
relative to the file itself.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .crossed import CrossedGroup
from .diagram import DiagramMap, SetDiagram
from .fincat import FinCategory, StructureError
from .groups import FiniteGroup
from .reedy import GeneralizedReedyStructure


class FormatError(ValueError):
    """A JSON document does not have the expected layout."""


def _keyable(x):
    """``x`` as JSON, or ``None`` if it does not survive a round trip."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, tuple):
        out = [_keyable(y) for y in x]
        return None if any(o is None and y is not None for o, y in zip(out, x)) else out
    return None


def _tupled(x):
    return tuple(_tupled(y) for y in x) if isinstance(x, list) else x


def _need(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    return doc[key]


# -- categories ---------------------------------------------------------------


def category_to_json(C: FinCategory) -> dict:
    g, f, gf = C.composable_pairs
    doc = {"name": C.name, "objects": list(C.objects),
           "morphisms": [{"id": m, "name": C.names[m], "dom": int(C.dom[m]), "cod": int(C.cod[m])}
                         for m in range(C.n_mor)],
           "identities": [int(i) for i in C.ident],
           "comp": [[int(a), int(b), int(c)] for a, b, c in zip(g, f, gf)]}
    if C.keys is not None:
        keys = [_keyable(k) for k in C.keys]
        if all(k is not None for k in keys):
            doc["keys"] = keys
    return doc


def category_from_json(doc: dict) -> FinCategory:
    objects = _need(doc, "objects", "category")
    mors = sorted(_need(doc, "morphisms", "category"), key=lambda m: _need(m, "id", "morphism"))
    if [m["id"] for m in mors] != list(range(len(mors))):
        raise FormatError("category: morphism ids must be 0..n-1")
    try:
        dom = [int(_need(m, "dom", f"morphism {m['id']}")) for m in mors]
        cod = [int(_need(m, "cod", f"morphism {m['id']}")) for m in mors]
        comp = [tuple(int(v) for v in e) for e in _need(doc, "comp", "category")]
    except (TypeError, ValueError) as e:
        raise FormatError(f"category: {e}") from None
    keys = doc.get("keys")
    return FinCategory(objects, dom, cod, _need(doc, "identities", "category"), comp,
                       names=[m.get("name", f"m{m['id']}") for m in mors],
                       keys=[_tupled(k) for k in keys] if keys is not None else None,
                       name=doc.get("name", ""))


def category_to_dot(C: FinCategory) -> str:
    lines = [f'digraph "{C.name or "C"}" {{']
    for o, name in enumerate(C.objects):
        lines.append(f'  o{o} [label="{name}"];')
    for m in range(C.n_mor):
        if not C.is_identity[m]:
            lines.append(f'  o{C.dom[m]} -> o{C.cod[m]} [label="{C.names[m]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- Reedy structures -----------------------------------------------------------


def _object_index(C: FinCategory, key) -> int:
    if isinstance(key, str) and key.lstrip("-").isdigit():
        key = int(key)
    if isinstance(key, int):
        if not 0 <= key < C.n_obj:
            raise FormatError(f"object {key} does not exist")
        return key
    try:
        return C.objects.index(key)
    except ValueError:
        raise FormatError(f"unknown object {key!r}") from None


def structure_to_json(S: GeneralizedReedyStructure) -> dict:
    return {"degree": {str(o): int(d) for o, d in enumerate(S.degree)},
            "plus": [int(m) for m in np.flatnonzero(S.plus)],
            "minus": [int(m) for m in np.flatnonzero(S.minus)],
            "dualizable": bool(S.dualizable)}


def structure_from_json(C: FinCategory, doc: dict, name: str = "") -> GeneralizedReedyStructure:
    deg = [None] * C.n_obj
    for k, v in _need(doc, "degree", "structure").items():
        deg[_object_index(C, k)] = int(v)
    for key in ("plus", "minus"):
        bad = [m for m in _need(doc, key, "structure") if not 0 <= int(m) < C.n_mor]
        if bad:
            raise FormatError(f"structure: {key} lists missing morphism {bad[0]}")
    return GeneralizedReedyStructure(C, deg, [int(m) for m in doc["plus"]], [int(m) for m in doc["minus"]],
                                     dualizable=bool(doc.get("dualizable", False)), name=name or C.name)


# -- crossed groups -------------------------------------------------------------


def _group_to_json(G: FiniteGroup) -> dict:
    return {"name": G.name, "elements": [str(l) for l in G.labels], "mult": G.mult.tolist(), "unit": G.unit}


def crossed_to_json(G: CrossedGroup) -> dict:
    C = G.base
    actions = {}
    for r in range(C.n_obj):
        into = [m for m in range(C.n_mor) if C.cod[m] == r]
        actions[str(r)] = {str(g): {str(m): int(G.act[m][g]) for m in into} for g in range(G.groups[r].order)}
    return {"name": G.name, "base": category_to_json(C),
            "groups": {str(r): _group_to_json(H) for r, H in enumerate(G.groups)},
            "restrictions": {str(m): [int(x) for x in G.restrict[m]] for m in range(C.n_mor)},
            "actions": actions}


def crossed_from_json(doc: dict, C: FinCategory | None = None) -> CrossedGroup:
    """Read a crossed group; its base category is inline unless ``C`` is given."""
    if C is None:
        C = category_from_json(_need(doc, "base", "crossed"))
    groups = []
    gdocs = _need(doc, "groups", "crossed")
    for r in range(C.n_obj):
        g = _need(gdocs, str(r), "crossed groups")
        groups.append(FiniteGroup(_need(g, "mult", f"group {r}"), g.get("unit", 0),
                                  labels=g.get("elements"), name=g.get("name", "")))
    rdoc = _need(doc, "restrictions", "crossed")
    restrict = [_need(rdoc, str(m), "crossed restrictions") for m in range(C.n_mor)]
    act = [np.zeros(groups[int(C.cod[m])].order, dtype=np.int64) for m in range(C.n_mor)]
    adoc = _need(doc, "actions", "crossed")
    for r in range(C.n_obj):
        per = _need(adoc, str(r), "crossed actions")
        for g in range(groups[r].order):
            row = _need(per, str(g), f"crossed actions at object {r}")
            for m in range(C.n_mor):
                if C.cod[m] == r:
                    act[m][g] = int(_need(row, str(m), f"action of element {g} at object {r}"))
    return CrossedGroup(C, groups, restrict, act, name=doc.get("name", ""))


# -- diagrams and maps ------------------------------------------------------------


def diagram_to_json(X: SetDiagram, shape_ref=None, presheaf: bool = True) -> dict:
    """``X`` as JSON.  With ``presheaf`` the recorded shape is ``X.shape.op``."""
    base = X.shape.op if presheaf else X.shape
    return {"shape": shape_ref if shape_ref is not None else category_to_json(base),
            "presheaf": presheaf,
            "values": {str(o): [str(l) for l in X.labels[o]] for o in range(base.n_obj)},
            "actions": {str(m): [int(v) for v in X.actions[m]] for m in range(base.n_mor)}}


def diagram_from_json(doc: dict, base: FinCategory) -> SetDiagram:
    """Read a diagram whose recorded shape is ``base`` (a presheaf becomes a diagram on ``base.op``)."""
    shape = base.op if doc.get("presheaf", True) else base
    values = _need(doc, "values", "diagram")
    acts = _need(doc, "actions", "diagram")
    labels = [list(values.get(str(o), [])) for o in range(shape.n_obj)]
    actions = [_need(acts, str(m), "diagram actions") for m in range(shape.n_mor)]
    return SetDiagram(shape, [len(l) for l in labels], actions, labels=labels)


def map_to_json(f: DiagramMap, source_ref=None, target_ref=None) -> dict:
    return {"source": source_ref, "target": target_ref,
            "components": {str(o): [int(v) for v in c] for o, c in enumerate(f.components)}}


def map_from_json(doc: dict, source: SetDiagram, target: SetDiagram) -> DiagramMap:
    comps = _need(doc, "components", "map")
    return DiagramMap(source, target, [comps.get(str(o), []) for o in range(source.shape.n_obj)])


# -- files --------------------------------------------------------------------------


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None


def dump_json(doc, path=None) -> str:
    text = json.dumps(doc, indent=1, sort_keys=False, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def bundle_to_json(S: GeneralizedReedyStructure | None = None, C: FinCategory | None = None,
                   crossed: CrossedGroup | None = None) -> dict:
    C = C if C is not None else S.category
    doc = {"category": category_to_json(C)}
    if S is not None:
        doc["structure"] = structure_to_json(S)
    if crossed is not None:
        doc["crossed"] = crossed_to_json(crossed)
    return doc


def read_bundle(doc: dict):
    """``(category, structure or None, crossed group or None)`` from a bundle document."""
    try:
        C = category_from_json(_need(doc, "category", "bundle"))
        S = structure_from_json(C, doc["structure"]) if "structure" in doc else None
        G = crossed_from_json(doc["crossed"]) if "crossed" in doc else None
    except StructureError as e:
        raise FormatError(str(e)) from None
    return C, S, G


def resolve_shape(doc: dict, here: Path) -> FinCategory:
    """The base category of a diagram document: inline, or a bundle file next to it."""
    ref = _need(doc, "shape", "diagram")
    if isinstance(ref, str):
        return read_bundle(load_json(here.parent / ref))[0]
    if isinstance(ref, dict) and "category" in ref:
        return read_bundle(ref)[0]
    return category_from_json(ref)
