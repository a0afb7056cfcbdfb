"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on malformed
input.  Each verb is a thin wrapper over the library.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import generators as gen
from .crossed import (check_compatibility, compatibility_and_induced, total_category, validate_crossed)
from .diagram import PreconditionError
from .ez import EZStructure, boundary, degenerate_mask, is_normal_mono, standard_decomposition, validate_ez
from .fincat import StructureError, validate_category
from .monoidal import CartesianProduct, pushout_product, quasi_monoidal_check
from .reedy import coskeleton, latching, matching, skeleton, validate_reedy
from .sampling import random_mono
from .serialize import (FormatError, bundle_to_json, category_to_dot, diagram_from_json, diagram_to_json, dump_json,
                        load_json, map_from_json, map_to_json, read_bundle, resolve_shape)
from .suite import SuiteConfig, run_suite


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# helpers


def _emit(args, doc, text: str | None = None):
    """Write ``doc`` to ``-o`` or stdout (as JSON with ``--json``, else ``text``)."""
    out = dump_json(doc)
    if args.output:
        Path(args.output).write_text(out)
    if args.json or text is None:
        if not args.output:
            sys.stdout.write(out)
    else:
        print(text)


def _bundle(path):
    C, S, G = read_bundle(load_json(path))
    return C, S, G


def _need_structure(path):
    C, S, G = _bundle(path)
    if S is None:
        raise InputError(f"{path}: the bundle has no structure section")
    return C, S, G


def _diagram(path, base=None):
    """``(diagram, is_presheaf, base category, bundle path)``; the shape comes from the file unless given."""
    path = Path(path)
    doc = load_json(path)
    ref = doc.get("shape")
    C = base if base is not None else resolve_shape(doc, path)
    X = diagram_from_json(doc, C)
    bundle = path.parent / ref if isinstance(ref, str) else None
    return X, bool(doc.get("presheaf", True)), C, bundle


def _structure_for(args, bundle_path):
    path = args.structure or bundle_path
    if path is None:
        raise InputError("no structure available: pass --structure BUNDLE")
    return _need_structure(path)


def _names(C, w):
    if isinstance(w, (list, tuple)):
        return [_names(C, v) for v in w]
    if isinstance(w, (int, np.integer)) and 0 <= int(w) < C.n_mor:
        return C.names[int(w)]
    return w


# ---------------------------------------------------------------------------
# gen


def _generate(args):
    kind, N = args.kind, args.max_degree
    limit = gen.MAX_TRUNCATION.get(kind)
    if limit is not None and N is not None and N > limit:
        raise InputError(f"--max-degree {N} exceeds the supported bound {limit} for {kind}")
    N = 2 if N is None else N
    crossed = None
    if kind == "simplex":
        C, S = gen.simplex_trunc(N)
    elif kind == "cyclic":
        C, S, crossed = gen.cyclic_trunc(N)
    elif kind == "symmetric":
        C, S = gen.sym_trunc(N)
        crossed = gen.symmetric_crossed_group(N)
    elif kind == "fin":
        C, S = gen.fin_trunc(N)
    elif kind == "gamma":
        C, S = gen.gamma_trunc(N)
    elif kind == "orbit":
        C, S = gen.orbit_category(gen.named_group(args.group), args.variant)
    elif kind == "group":
        C, S = gen.group_category(gen.named_group(args.group))
    elif kind == "groupoid":
        C, S = gen.groupoid(gen.named_group(args.group), args.objects)
    elif kind == "cog":
        C, S = gen.twisted_triangle() if args.shape == "triangle" else gen.edge_complex()
    elif kind in ("product", "coproduct"):
        corpus = gen.axiom_corpus()
        parts = [p for p in (args.factors or "").split(",") if p]
        unknown = [p for p in parts if p not in corpus]
        if not parts or unknown:
            raise InputError(f"--factors needs names from: {', '.join(corpus)}")
        C, S = gen.combine([corpus[p]() for p in parts], kind)
    else:
        raise InputError(f"unknown generator {kind!r}")
    return C, S, crossed


def cmd_gen(args):
    C, S, G = _generate(args)
    if args.dot:
        text = category_to_dot(C)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    doc = bundle_to_json(S, C, G)
    _emit(args, doc, f"{C.name}: {C.n_obj} objects, {C.n_mor} morphisms" +
          (f" -> {args.output}" if args.output else ""))
    return 0


# ---------------------------------------------------------------------------
# check


def cmd_check(args):
    status, docs, lines = 0, [], []
    for path in args.files:
        C, S, G = _bundle(path)
        what = args.what
        if what == "category":
            rep = validate_category(C)
            doc, ok = rep.to_json(), rep.ok
            first = None if ok else str(rep.violations[0])
        elif what == "reedy":
            if S is None:
                raise InputError(f"{path}: the bundle has no structure section")
            rep = validate_reedy(S)
            doc, ok = rep.to_json(C), rep.ok
            first = None if ok else {k: _names(C, v[:1]) for k, v in rep.failures().items()}
        elif what == "ez":
            degree = S.degree if S is not None else None
            if degree is None:
                raise InputError(f"{path}: the bundle has no structure section (degrees are needed)")
            rep = validate_ez(C, degree)
            doc, ok = rep.to_json(C), rep.ok
            first = None if ok else _names(C, rep.first_failure())
        elif what == "crossed":
            if G is None:
                raise InputError(f"{path}: the bundle has no crossed section")
            rep = validate_crossed(G)
            doc, ok = {"identities": rep.to_json()}, rep.ok
            first = None if ok else str(rep.violations[0])
        else:
            raise InputError(f"unknown check {what!r}")
        doc = {"file": str(path), "check": what, "ok": ok, **({"report": doc})}
        docs.append(doc)
        lines.append(f"{path}: {what} {'ok' if ok else 'FAILED'}" + ("" if ok else f"  witness: {first}"))
        status = max(status, 0 if ok else 1)
    _emit(args, docs if len(docs) > 1 else docs[0], "\n".join(lines))
    return status


# ---------------------------------------------------------------------------
# total category of a crossed group


def cmd_total(args):
    C, S, G = _bundle(args.file)
    if G is None:
        raise InputError(f"{args.file}: the bundle has no crossed section")
    rep = validate_crossed(G)
    if not rep.ok:
        _emit(args, {"ok": False, "identities": rep.to_json()}, f"crossed group fails: {rep.violations[0]}")
        return 1
    if args.structure:
        _, base_S, _ = _need_structure(args.structure)
        compat = check_compatibility(G, base_S)
        if not compat.ok:
            _emit(args, {"ok": False, "compatibility": compat.to_json()}, f"not compatible: {compat.violations[0]}")
            return 1
        res = compatibility_and_induced(G, base_S)
        T, TS = res.total.category, res.structure
    else:
        T, TS = total_category(G).category, None
    _emit(args, bundle_to_json(TS, T, G), f"total category: {T.n_obj} objects, {T.n_mor} morphisms")
    return 0


# ---------------------------------------------------------------------------
# latching, matching, skeleta


def _reedy_for_diagram(args):
    X, presheaf, C, bundle = _diagram(args.diagram)
    _, S, _ = _structure_for(args, bundle)
    return X, (S.opposite() if presheaf else S), presheaf, C


def _object(C, spec):
    if spec is None:
        return None
    if spec.lstrip("-").isdigit():
        o = int(spec)
        if 0 <= o < C.n_obj:
            return o
    elif spec in C.objects:
        return C.objects.index(spec)
    raise InputError(f"unknown object {spec!r}")


def cmd_latch_match(args):
    X, S, presheaf, C = _reedy_for_diagram(args)
    objs = [_object(C, args.object)] if args.object is not None else range(C.n_obj)
    docs, lines = [], []
    for r in objs:
        if args.verb == "latch":
            L = latching(S, X, r)
            eq, extra = L.equivariant, {"latching_map": L.to_value.tolist()}
        else:
            M = matching(S, X, r)
            eq, extra = M.equivariant, {"matching_map": M.from_value.tolist()}
        doc = {"object": C.objects[r], "size": eq.size, "orbits": len(eq.orbits()),
               "action": {S.category.names[g]: a.tolist() for g, a in eq.action.items()}, **extra}
        docs.append(doc)
        lines.append(f"{C.objects[r]}: {eq.size} element(s), {doc['orbits']} orbit(s)")
    _emit(args, {"verb": args.verb, "objects": docs}, "\n".join(lines))
    return 0


def cmd_skel(args):
    X, S, presheaf, C = _reedy_for_diagram(args)
    sk = (skeleton if args.verb == "skel" else coskeleton)(S, X, args.n)
    counit = sk.counit
    doc = {"verb": args.verb, "n": args.n, "sizes": list(sk.diagram.sizes),
           "diagram": diagram_to_json(sk.diagram, shape_ref=args.shape_ref, presheaf=presheaf),
           "counit_iso": counit.is_iso(),
           "counit": map_to_json(counit)}
    _emit(args, doc, f"{args.verb}_{args.n}: sizes {list(sk.diagram.sizes)}; counit iso: {counit.is_iso()}")
    return 0


# ---------------------------------------------------------------------------
# EZ verbs


def _ez(path):
    C, S, _ = _need_structure(path)
    return C, S, EZStructure.from_reedy(S)


def _relative_ref(bundle, out_path) -> str:
    return os.path.relpath(Path(bundle).resolve(), Path(out_path).resolve().parent)


def cmd_boundary(args):
    C, S, E = _ez(args.file)
    r = _object(C, args.r)
    B, inc = boundary(E, r, check=True)
    text = f"boundary of C{C.objects[r]}: sizes {list(B.sizes)} inside {list(inc.target.sizes)}"
    if args.split:
        # PREFIX.boundary.json, PREFIX.representable.json, PREFIX.inclusion.json
        prefix = args.split
        names = {k: f"{prefix}.{k}.json" for k in ("boundary", "representable", "inclusion")}
        ref = _relative_ref(args.file, names["boundary"])
        dump_json(diagram_to_json(B, shape_ref=ref), names["boundary"])
        dump_json(diagram_to_json(inc.target, shape_ref=ref), names["representable"])
        dump_json(map_to_json(inc, Path(names["boundary"]).name, Path(names["representable"]).name),
                  names["inclusion"])
        text += "\nwrote " + ", ".join(names.values())
    ref = args.shape_ref or (_relative_ref(args.file, args.output) if args.output else str(args.file))
    doc = {"object": C.objects[r], "sizes": list(B.sizes),
           "boundary": diagram_to_json(B, shape_ref=ref),
           "representable": diagram_to_json(inc.target, shape_ref=ref),
           "inclusion": map_to_json(inc)}
    _emit(args, doc, text)
    return 0


def cmd_decompose(args):
    X, presheaf, C, bundle = _diagram(args.presheaf)
    if not presheaf:
        raise InputError("decompose expects a presheaf")
    _, S, _ = _structure_for(args, bundle)
    E = EZStructure.from_reedy(S)
    deg = degenerate_mask(E, X)
    objs = [_object(C, args.object)] if args.object is not None else range(C.n_obj)
    rows, lines, ok = [], [], True
    for r in objs:
        elems = [args.element] if args.element is not None else range(X.sizes[r])
        for x in elems:
            if not 0 <= x < X.sizes[r]:
                raise InputError(f"element {x} does not exist at {C.objects[r]}")
            d = standard_decomposition(E, X, r, x, deg)
            ok &= d.essentially_unique
            rows.append({"object": C.objects[r], "element": x, "degeneracy": C.names[d.degeneracy],
                         "base": C.objects[d.base], "nondegenerate": d.nondegenerate,
                         "essentially_unique": d.essentially_unique,
                         "all": [[C.names[u], y] for u, y in d.all_decompositions]})
            lines.append(f"{C.objects[r]}#{x} = {C.names[d.degeneracy]}^*({C.objects[d.base]}#{d.nondegenerate})"
                         + ("" if d.essentially_unique else "  [not essentially unique]"))
    _emit(args, {"ok": bool(ok), "decompositions": rows}, "\n".join(lines))
    return 0 if ok else 1


def cmd_normal(args):
    X, _, C, bundle = _diagram(args.source)
    Y, _, _, _ = _diagram(args.target, base=C)
    f = map_from_json(load_json(args.map), X, Y)
    rep = f.validate()
    if not rep.ok:
        raise InputError(f"{args.map}: not a natural transformation ({rep.violations[0]})")
    _, S, _ = _structure_for(args, bundle)
    E = EZStructure.from_reedy(S)
    v = is_normal_mono(E, f)
    doc = v.to_json()
    if args.filtration and v.filtration is not None:
        doc["filtration"] = [{"n": st.n, "cells": len(st.cells), "is_pushout": st.is_pushout,
                              "sizes": list(st.diagram.sizes)} for st in v.filtration.stages]
    ok = v.agreement and v.via_i
    _emit(args, doc, f"(i) {v.via_i}  (ii) {v.via_ii}  (iii) {v.via_iii}" +
          ("" if v.agreement else "  [characterizations disagree]"))
    return 0 if ok else 1


def cmd_pp(args):
    corpora = {"simplex2": lambda: gen.simplex_trunc(2), "simplex3": lambda: gen.simplex_trunc(3)}
    if args.corpus not in corpora:
        raise InputError(f"pp-axiom corpus must be one of {', '.join(corpora)}")
    C, S = corpora[args.corpus]()
    E = EZStructure.from_reedy(S)
    P = CartesianProduct()
    top = int(S.degree.max())
    rng = np.random.default_rng(args.seed)
    results, ok = [], True
    for i in range(args.sample):
        a = int(rng.integers(0, top + 1))
        b = int(rng.integers(0, top + 1 - a))
        u = random_mono(C, rng, max_degree_obj=a, degree=S.degree)
        v = random_mono(C, rng, max_degree_obj=b, degree=S.degree)
        pp = pushout_product(P, E, u, v)
        good = pp.verdict.agreement and pp.verdict.via_i and pp.monic
        ok &= good
        results.append({"pair": i, "degrees": [a, b], "source_sizes": [list(u.source.sizes), list(v.source.sizes)],
                        "target_sizes": [list(u.target.sizes), list(v.target.sizes)], "monic": pp.monic,
                        **pp.verdict.to_json()})
    pairs = [(r, s) for r in range(C.n_obj) for s in range(C.n_obj) if S.degree[r] + S.degree[s] <= top]
    qm = quasi_monoidal_check(E, P, pairs)
    ok &= qm.ok
    doc = {"seed": args.seed, "corpus": args.corpus, "oracle": P.name, "ok": bool(ok), "pairs": results,
           "quasi_monoidal": qm.to_json()}
    _emit(args, doc, f"{sum(r['via_i'] for r in results)}/{len(results)} pushout-products normal; "
                     f"quasi-monoidal: {qm.ok}")
    return 0 if ok else 1


def cmd_suite(args):
    if args.corpus == "quick":
        cfg = SuiteConfig.quick(seed=args.seed)
    elif args.corpus == "default":
        cfg = SuiteConfig(seed=args.seed)
    else:
        raise InputError("suite corpus must be 'default' or 'quick'")
    if args.sample is not None:
        cfg.mono_samples = max(args.sample, 1)
    only = {int(x) for x in args.only.split(",")} if args.only else None

    def progress(res):
        if not args.json:
            print(res.line(), flush=True)

    rep = run_suite(cfg, only=only, progress=progress)
    out = dump_json(rep.to_json())
    if args.output:
        Path(args.output).write_text(out)
    if args.json:
        sys.stdout.write(out)
    else:
        print(f"{sum(r.passed for r in rep.results)}/{len(rep.results)} criteria passed")
    return 0 if rep.ok else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--dot", action="store_true", help="DOT export where supported")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--max-degree", type=int, default=None)
    common.add_argument("--sample", type=int, default=None)
    common.add_argument("-o", "--output", default=None)

    p = argparse.ArgumentParser(prog="genreedy", description="Finite generalized Reedy categories and presheaves.")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a category and its structure")
    g.add_argument("kind", choices=["simplex", "cyclic", "symmetric", "fin", "gamma", "orbit", "cog", "group",
                                    "groupoid", "product", "coproduct"])
    g.add_argument("--group", default="Z/2", help="group for orbit/group/groupoid: Z/n, Sn or 1")
    g.add_argument("--variant", choices=["minus", "plus"], default="minus")
    g.add_argument("--objects", type=int, default=2, help="objects of a groupoid")
    g.add_argument("--shape", choices=["edge", "triangle"], default="edge", help="complex of groups")
    g.add_argument("--factors", default=None, help="comma-separated corpus names for product/coproduct")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", parents=[common], help="validate bundle files")
    c.add_argument("what", choices=["reedy", "ez", "crossed", "category"])
    c.add_argument("files", nargs="+")
    c.set_defaults(func=cmd_check)

    t = sub.add_parser("total", parents=[common], help="total category of a crossed group")
    t.add_argument("file")
    t.add_argument("--structure", default=None, help="bundle with a structure on the base category")
    t.set_defaults(func=cmd_total)

    for verb in ("latch", "match"):
        s = sub.add_parser(verb, parents=[common], help=f"{'latching' if verb == 'latch' else 'matching'} objects")
        s.add_argument("diagram")
        s.add_argument("--object", default=None)
        s.add_argument("--structure", default=None)
        s.set_defaults(func=cmd_latch_match)

    for verb in ("skel", "coskel"):
        s = sub.add_parser(verb, parents=[common], help=f"{verb}eton of a diagram")
        s.add_argument("n", type=int)
        s.add_argument("diagram")
        s.add_argument("--structure", default=None)
        s.add_argument("--shape-ref", default=None, help="shape reference to record in the output")
        s.set_defaults(func=cmd_skel)

    b = sub.add_parser("boundary", parents=[common], help="formal boundary of a representable")
    b.add_argument("r", help="object index or name")
    b.add_argument("file", help="bundle with the category and structure")
    b.add_argument("--shape-ref", default=None)
    b.add_argument("--split", default=None, metavar="PREFIX",
                   help="also write PREFIX.boundary.json, PREFIX.representable.json, PREFIX.inclusion.json")
    b.set_defaults(func=cmd_boundary)

    d = sub.add_parser("decompose", parents=[common], help="standard decompositions of presheaf elements")
    d.add_argument("presheaf")
    d.add_argument("--object", default=None)
    d.add_argument("--element", type=int, default=None)
    d.add_argument("--structure", default=None)
    d.set_defaults(func=cmd_decompose)

    n = sub.add_parser("normal", parents=[common], help="is a presheaf map a normal monomorphism?")
    n.add_argument("source")
    n.add_argument("target")
    n.add_argument("map")
    n.add_argument("--structure", default=None)
    n.add_argument("--filtration", action="store_true", help="include the cellular filtration")
    n.set_defaults(func=cmd_normal)

    pp = sub.add_parser("pp-axiom", parents=[common], help="sampled pushout-product check")
    pp.add_argument("--corpus", default="simplex3")
    pp.set_defaults(func=cmd_pp)

    st = sub.add_parser("suite", parents=[common], help="run the acceptance criteria")
    st.add_argument("--corpus", default="default")
    st.add_argument("--only", default=None, help="comma-separated criterion numbers")
    st.set_defaults(func=cmd_suite)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if args.verb == "pp-axiom" and args.sample is None:
        args.sample = 100
    try:
        return args.func(args)
    except (InputError, FormatError, StructureError, PreconditionError, FileNotFoundError,
            IsADirectoryError, ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
