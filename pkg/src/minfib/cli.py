"""Command-line front end emitting deterministic JSON certificates.

Exit codes: 0 verdict true or object constructed, 1 verdict false (with a
witness), 2 search budget exhausted, 3 invalid input.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .bundles import (Atlas, GroupAction, SimplicialGroup, TwistingFunction, build_tcp, classify,
                      enumerate_twisting, is_normal, is_regular, normalize_atlas, regularize,
                      transformation_elements, twisting_equivalent, validate_atlas, validate_twisting, wbar,
                      left_translation)
from .diagrams import (CDiagram, compute_basis, find_basis, is_fibration_upto, projection_to_constant,
                       to_point, verify_basis)
from .errors import BudgetExhausted, MinfibError, TruncationError, UnsupportedError, ValidationError
from .minimal import extract_minimal, is_minimal
from .simplicial import SimplicialSet, components

EXIT_TRUE, EXIT_FALSE, EXIT_BUDGET, EXIT_INVALID = 0, 1, 2, 3


class InputError(MinfibError):
    pass


@dataclass
class Certificate:
    command: str
    params: dict
    inputs: dict = field(default_factory=dict)
    verdict: str = ""
    exit_code: int = EXIT_TRUE
    checks: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    budget_events: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    def to_json(self, timestamp: str | None = None) -> dict:
        return {
            "command": self.command,
            "tool": {"name": "minfib", "version": __version__},
            "inputs": self.inputs,
            "params": self.params,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "checks": self.checks,
            "witnesses": self.witnesses,
            "budget_events": self.budget_events,
            "artifacts": self.artifacts,
            "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }


def canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def strip_timestamp(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamp"}


# -- input loading -----------------------------------------------------------

def _read(path: str, cert: Certificate, role: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"{role} file {path}: {exc.strerror}") from exc
    cert.inputs[role] = {"path": os.path.basename(path), "sha256": hashlib.sha256(raw).hexdigest()}
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{role} file {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parsed(path, role, fn):
    try:
        return fn()
    except (ValidationError, TruncationError) as exc:
        raise InputError(f"{role} file {path}: {exc}") from exc
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{role} file {path}: malformed entry {exc!r}") from exc


def load_diagram_arg(path, cert) -> CDiagram:
    data = _read(path, cert, "diagram")
    return _parsed(path, "diagram", lambda: CDiagram.from_json(data, os.path.dirname(os.path.abspath(path))))


def load_fibration(args, cert):
    X = load_diagram_arg(args.diagram, cert)
    if not args.fibration:
        return to_point(X)
    data = _read(args.fibration, cert, "fibration")

    def build():
        B = SimplicialSet.from_json(data["base"])
        assign = {c: {g: B.ref(t) for g, t in per.items()} for c, per in data["assignment"].items()}
        return projection_to_constant(X, B, assign)

    return _parsed(args.fibration, "fibration", build)


def load_base(path, cert) -> SimplicialSet:
    data = _read(path, cert, "base")
    return _parsed(path, "base", lambda: SimplicialSet.from_json(data))


def load_group(path, cert, truncation) -> SimplicialGroup:
    data = _read(path, cert, "group")
    return _parsed(path, "group", lambda: SimplicialGroup.from_json(data, truncation))


def load_action(path, cert) -> GroupAction:
    data = _read(path, cert, "action")
    return _parsed(path, "action", lambda: GroupAction.from_json(data))


def load_twisting(path, cert, B, G) -> TwistingFunction:
    data = _read(path, cert, "twisting")
    return _parsed(path, "twisting", lambda: TwistingFunction.from_json(B, G, data))


def _bundle_inputs(args, cert, need_action=True):
    B = load_base(args.base, cert)
    if getattr(args, "action", None):
        action = load_action(args.action, cert)
        G = action.group
    elif getattr(args, "group", None):
        G = load_group(args.group, cert, B.truncation)
        action = left_translation(G, B.truncation) if need_action else None
    else:
        raise InputError("either --action or --group is required")
    return B, G, action


# -- commands --------------------------------------------------------------

def cmd_validate_diagram(args, cert):
    X = load_diagram_arg(args.diagram, cert)
    bad = X.naturality_violations() + X.identity_violations()
    cert.checks.append("simplicial identities and naturality, exhaustive up to the truncation")
    if bad:
        cert.witnesses["violations"] = bad
        return False, f"invalid diagram: {bad[0]}"
    return True, f"valid diagram over {X.cat.name or 'C'} up to dimension {X.truncation}"


def cmd_basis(args, cert):
    X = load_diagram_arg(args.diagram, cert)
    basis, reason = find_basis(X)
    cert.checks.append("free-basis axioms verified by exhaustive witness checking")
    if basis is None:
        cert.witnesses["refutation"] = reason
        return False, f"not free: {reason}"
    check = verify_basis(X, basis.gens)
    cert.witnesses["basis"] = [[b.obj, str(b.simplex)] for b in basis.gens]
    cert.witnesses["witness"] = sorted([[x.obj, str(x.simplex), b.obj, str(b.simplex), h]
                                        for x, (b, h) in check.witness.items()])
    return check.ok, f"free with {len(basis.gens)} basis simplices" if check.ok else check.reason


def cmd_fibration_check(args, cert):
    p = load_fibration(args, cert)
    rep = is_fibration_upto(p, args.dim, args.budget)
    cert.checks.append(f"horn lifting, exhaustive in dimensions 1..{args.dim}")
    fails = []
    for c, r in rep.per_object.items():
        for n, k, faces, b in r.failures:
            fails.append({"object": c, "n": n, "k": k,
                          "horn": ["-" if x is None else str(x) for x in faces], "base": str(b)})
    if fails:
        cert.witnesses["failing_horns"] = fails
    return rep.ok, rep.summary()


def cmd_minimal_model(args, cert):
    p = load_fibration(args, cert)
    model = extract_minimal(p, args.dim, args.budget)
    bad = model.verify()
    rep = is_minimal(model.projection(), args.dim, args.budget)
    cert.checks += ["deformation retraction identities, exhaustive", f"minimality: {rep.verdict}"]
    cert.artifacts["model"] = model.to_json()
    cert.witnesses["notes"] = model.notes
    cert.witnesses["model_counts"] = {c: list(model.sub.at[c].counts()) for c in model.sub.cat.objects}
    if rep.unknown:
        cert.budget_events.append({"where": "minimality check", "unknown_pairs": len(rep.unknown)})
    if bad:
        cert.witnesses["violations"] = bad
        return False, f"model fails verification: {bad[0]}"
    if not rep.ok:
        return False, rep.verdict
    shape = "one-point model" if model.is_point() else "minimal model"
    return True, f"{shape}; {rep.verdict}"


def cmd_tcp_build(args, cert):
    B, G, action = _bundle_inputs(args, cert)
    t = load_twisting(args.twisting, cert, B, G)
    bundle = build_tcp(B, t, action)
    X = bundle.total
    bad = X.naturality_violations() + X.identity_violations()
    cert.checks.append("simplicial identities and naturality of the total diagram")
    cert.artifacts["total"] = X.to_json()
    cert.artifacts["projection"] = bundle.projection.to_json()
    cert.witnesses["components"] = {c: len(components(X.at[c])) for c in X.cat.objects}
    if args.dim is not None:
        rep = is_fibration_upto(bundle.projection, args.dim, args.budget)
        cert.checks.append(rep.summary())
        if not rep.ok:
            return False, rep.summary()
    if bad:
        cert.witnesses["violations"] = bad
        return False, bad[0]
    return True, "twisted cartesian product built: " + ", ".join(
        f"{c}: {n} component(s)" for c, n in cert.witnesses["components"].items())


def cmd_twisting_verify(args, cert):
    B, G, _ = _bundle_inputs(args, cert, need_action=False)
    t = load_twisting(args.twisting, cert, B, G)
    bad = validate_twisting(t)
    cert.checks.append("all twisting identities on every simplex")
    if bad:
        cert.witnesses["violations"] = bad
        return False, bad[0]
    return True, "valid twisting function"


def cmd_twisting_classify(args, cert):
    B, G, _ = _bundle_inputs(args, cert, need_action=False)
    ts = enumerate_twisting(B, G, args.dim, args.budget)
    classes: list[list[int]] = []
    for i, t in enumerate(ts):
        for cl in classes:
            if twisting_equivalent(ts[cl[0]], t, None, args.budget) is not None:
                cl.append(i)
                break
        else:
            classes.append([i])
    cert.witnesses["twisting_functions"] = [t.to_json() if t.values else {} for t in ts]
    cert.witnesses["classes"] = classes
    return True, f"{len(ts)} twisting functions in {len(classes)} equivalence classes up to dimension {args.dim}"


def cmd_classify_bundles(args, cert):
    B, G, action = _bundle_inputs(args, cert, need_action=False)
    rep = classify(B, G, action, args.dim, args.budget)
    cert.witnesses.update({"twisting_classes": rep.twisting_classes, "map_classes": rep.map_classes,
                           "class_map": {str(k): v for k, v in rep.class_map.items()}})
    cert.checks.append("exhaustive enumeration of twisting functions and of maps into the classifying complex")
    return rep.bijection, rep.summary()


def cmd_wbar(args, cert):
    G = load_group(args.group, cert, args.dim)
    W = wbar(G, args.dim)
    bad = W.identity_violations()
    cert.artifacts["wbar"] = W.to_json()
    cert.witnesses["nondegenerate_counts"] = list(W.counts())
    cert.checks.append("simplicial identities, exhaustive")
    if bad:
        cert.witnesses["violations"] = bad
        return False, bad[0]
    return True, f"classifying complex up to dimension {args.dim}: non-degenerate counts {list(W.counts())}"


def _atlas_inputs(args, cert):
    B, G, action = _bundle_inputs(args, cert)
    t = load_twisting(args.twisting, cert, B, G)
    bundle = build_tcp(B, t, action)
    if args.atlas:
        data = _read(args.atlas, cert, "atlas")
        atlas = _parsed(args.atlas, "atlas", lambda: Atlas.from_json(bundle, data))
    else:
        atlas = Atlas.tautological(bundle)
    bad = validate_atlas(atlas)
    if bad:
        raise InputError(f"atlas: {bad[0]}")
    return G, atlas


def _xi_json(xi):
    return sorted([str(v), i, str(g)] for (v, i), g in xi.items())


def cmd_atlas_normalize(args, cert):
    G, atlas = _atlas_inputs(args, cert)
    new = normalize_atlas(atlas)
    ok = is_normal(new) and not validate_atlas(new)
    cert.artifacts["atlas"] = new.to_json()
    cert.checks.append("normality checked on every degenerate simplex")
    return ok, "normal atlas" if ok else "normalization failed"


def cmd_atlas_regularize(args, cert):
    G, atlas = _atlas_inputs(args, cert)
    new = regularize(normalize_atlas(atlas), args.budget)
    xi = transformation_elements(new)
    t0 = TwistingFunction(new.bundle.base, G, {v: g for (v, i), g in xi.items() if i == 0})
    bad = validate_twisting(t0)
    cert.artifacts["atlas"] = new.to_json()
    cert.witnesses["transformation_elements"] = _xi_json(xi)
    cert.checks += ["regularity of the transformation elements", "twisting identities for xi^0"]
    ok = is_regular(xi, G) and not bad
    return ok, "regular atlas; xi^0 is a twisting function" if ok else "regularization failed"


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minfib", description="Finite diagrams of simplicial sets: "
                                 "bases, fibrations, minimal models and twisted products.")
    ap.add_argument("--version", action="version", version=f"minfib {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, dim=False, budget=False, dim_required=True):
        p.add_argument("--out", help="write the certificate to this path")
        p.add_argument("--format", choices=["json", "text"], default="text")
        if dim:
            p.add_argument("--dim", type=int, required=dim_required, help="dimension cap")
        if budget:
            p.add_argument("--budget", type=int, required=dim_required, help="search node cap")
        return p

    for name, fn, help_ in [("validate-diagram", cmd_validate_diagram, "check identities and naturality"),
                            ("basis", cmd_basis, "find and verify a free basis")]:
        p = common(sub.add_parser(name, help=help_))
        p.add_argument("--diagram", required=True)
        p.set_defaults(fn=fn)
    for name, fn, help_ in [("fibration-check", cmd_fibration_check, "exhaustive horn-lifting check"),
                            ("minimal-model", cmd_minimal_model, "extract a minimal model")]:
        p = common(sub.add_parser(name, help=help_), dim=True, budget=True)
        p.add_argument("--diagram", required=True)
        p.add_argument("--fibration", help="base and projection; defaults to the map to a point")
        p.set_defaults(fn=fn)

    def bundle_args(p, twisting=True, atlas=False):
        p.add_argument("--base", required=True, help="base presentation")
        p.add_argument("--action", help="group, fibre and action table")
        p.add_argument("--group", help="simplicial group (acting on itself)")
        if twisting:
            p.add_argument("--twisting", required=True)
        if atlas:
            p.add_argument("--atlas", help="gauge values; defaults to the tautological atlas")
        return p

    p = bundle_args(common(sub.add_parser("tcp-build", help="build a twisted cartesian product"),
                           dim=True, budget=True, dim_required=False))
    p.set_defaults(fn=cmd_tcp_build)
    p = bundle_args(common(sub.add_parser("twisting-verify", help="check the twisting identities")))
    p.set_defaults(fn=cmd_twisting_verify)
    p = bundle_args(common(sub.add_parser("twisting-classify", help="twisting functions up to equivalence"),
                           dim=True, budget=True), twisting=False)
    p.set_defaults(fn=cmd_twisting_classify)
    p = bundle_args(common(sub.add_parser("classify-bundles", help="twisting classes against maps into WG"),
                           dim=True, budget=True), twisting=False)
    p.set_defaults(fn=cmd_classify_bundles)
    p = common(sub.add_parser("wbar", help="the classifying complex of a simplicial group"), dim=True)
    p.add_argument("--group", required=True)
    p.set_defaults(fn=cmd_wbar)
    p = bundle_args(common(sub.add_parser("atlas-normalize", help="normalize an atlas")), atlas=True)
    p.set_defaults(fn=cmd_atlas_normalize)
    p = bundle_args(common(sub.add_parser("atlas-regularize", help="regularize an atlas"),
                           budget=True, dim_required=True), atlas=True)
    p.set_defaults(fn=cmd_atlas_regularize)
    return ap


def _params(args) -> dict:
    keep = {}
    for k, v in sorted(vars(args).items()):
        if k in ("fn", "out", "format", "command") or v is None:
            continue
        keep[k] = os.path.basename(v) if isinstance(v, str) else v
    return keep


def run(argv=None, timestamp: str | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    cert = Certificate(args.command, _params(args))
    try:
        ok, verdict = args.fn(args, cert)
        cert.exit_code = EXIT_TRUE if ok else EXIT_FALSE
        cert.verdict = verdict
    except BudgetExhausted as exc:
        cert.exit_code = EXIT_BUDGET
        cert.verdict = str(exc)
        cert.budget_events.append({"where": exc.where, "limit": exc.limit})
    except (InputError, ValidationError, TruncationError, UnsupportedError) as exc:
        cert.exit_code = EXIT_INVALID
        cert.verdict = f"invalid input: {exc}"
    doc = cert.to_json(timestamp)
    text = canonical(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        print(f"[{args.command}] exit {cert.exit_code}: {cert.verdict}")
    return cert.exit_code, doc


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
