"""Command line entry point: one JSON document per invocation on stdout.

Exit codes: 0 success, 1 invalid proof or model, 2 syntax error,
3 search exhausted, 4 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import algebra, kripke
from .calculus import Proof, check_proof, internalize, parse_logic
from .errors import BoundExceeded, FormulaSyntaxError, InvalidCertificate, JustlabError, ModelError
from .realization import realize
from .syntax import (
    Var,
    formula_from_any,
    language_of,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
    to_json,
)

OK, INVALID, SYNTAX, EXHAUSTED, USAGE = 0, 1, 2, 3, 4
_ALG_MODELS = (algebra.AlgMkrtychevModel, algebra.AlgFittingModel, algebra.AlgSubsetModel)


class Usage(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise Usage(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise Usage(f"{path} is not JSON: {e.msg} at line {e.lineno}") from None


def _logic(text: str):
    try:
        return parse_logic(text)
    except (ValueError, OSError) as e:
        raise Usage(str(e)) from None


# --------------------------------------------------------------------------
# Subcommands; each returns (exit code, JSON document)


def cmd_parse(a) -> tuple:
    phi = parse_formula(a.formula, a.lang)
    return OK, {"formula": print_formula(phi), "ast": to_json(phi), "language": sorted(language_of(phi))}


def cmd_check(a) -> tuple:
    rep = check_proof(Proof.from_json(_load_json(a.proof)), _logic(a.logic))
    return (OK if rep.valid else INVALID), rep.to_json()


def cmd_internalize(a) -> tuple:
    logic = _logic(a.logic)
    proof = Proof.from_json(_load_json(a.proof))
    rep = check_proof(proof, logic)
    if not rep.valid:
        return INVALID, {"error": "invalid proof", "report": rep.to_json()}
    if a.terms:
        terms = [parse_term(t) for t in a.terms.split(",")]
    else:
        terms = [Var(i + 1) for i in range(len(proof.premises))]
    t, lifted = internalize(proof, terms, logic)
    return OK, {"term": print_term(t), "conclusion": print_formula(lifted.conclusion), "proof": lifted.to_json()}


def _assignment(items) -> dict:
    out = {}
    for item in items or ():
        name, _, value = item.partition("=")
        name = name.strip()
        if not (name.startswith("p") and name[1:].isdigit()) or not value.strip().lstrip("-").isdigit():
            raise Usage(f"bad assignment {item!r}; expected pN=VALUE")
        out[int(name[1:])] = int(value)
    return out


def _load_model(path: str, logic):
    d = _load_json(path)
    kind = d.get("kind", "") if isinstance(d, dict) else ""
    if kind.startswith("alg-"):
        return algebra.model_from_json(d, logic)
    if kind.startswith("int-"):
        return kripke.model_from_json(d, logic)
    raise Usage(f"unknown model kind {kind!r}")


def cmd_eval(a) -> tuple:
    phi = parse_formula(a.formula)
    if a.model:
        m = _load_model(a.model, _logic(a.logic) if a.logic else None)
        if isinstance(m, _ALG_MODELS):
            v = algebra.evaluate(m, a.world, phi)
        else:
            v = kripke.eval_int(m, a.world, phi)
        return OK, {"formula": print_formula(phi), "world": a.world, "value": v}
    if not a.algebra:
        raise Usage("eval needs --algebra or --model")
    try:
        A = algebra.parse_algebra(a.algebra)
    except (ValueError, JustlabError) as e:
        raise Usage(str(e)) from None
    asg = _assignment(a.assign)
    if any(not 0 <= v < A.size for v in asg.values()):
        raise Usage(f"assigned values must lie in 0..{A.size - 1}")
    v = algebra.eval_prop(A, asg, phi)
    return OK, {"formula": print_formula(phi), "algebra": A.name, "value": v, "top": v == A.top}


def cmd_validate_model(a) -> tuple:
    m = _load_model(a.model, _logic(a.logic) if a.logic else None)
    if isinstance(m, _ALG_MODELS):
        rep = algebra.validate_alg_model(m)
    else:
        rep = kripke.validate_int_model(m)
    return (OK if rep.valid else INVALID), rep.to_json()


def cmd_countermodel(a) -> tuple:
    phi = parse_formula(a.formula)
    try:
        found = kripke.countermodel_search(phi, _logic(a.logic), max_worlds=a.max_worlds, family=a.family)
    except BoundExceeded as e:
        raise Usage(str(e)) from None
    if found is None:
        return EXHAUSTED, "NONE"
    m, w = found
    return OK, {"formula": print_formula(phi), "world": w, "model": kripke.model_to_json(m)}


def cmd_realize(a) -> tuple:
    logic = _logic(a.logic)
    phi = parse_formula(a.formula)
    cert = disjuncts = None
    if a.quasi:
        d = _load_json(a.quasi)
        try:
            cert = Proof.from_json(d["proof"])
            disjuncts = [formula_from_any(x) for x in d["disjuncts"]]
        except (KeyError, TypeError) as e:
            raise Usage(f"quasi file needs 'disjuncts' and 'proof': {e}") from None
    try:
        r = realize(phi, logic, max_disjuncts=a.max_disjuncts, certificate=cert, disjuncts=disjuncts)
    except InvalidCertificate as e:
        return INVALID, {"error": "invalid certificate", "detail": str(e)}
    if r is None:
        return EXHAUSTED, {"formula": print_formula(phi), "realization": None}
    rep = check_proof(r.proof, logic)
    return OK, {
        "formula": print_formula(phi),
        "annotated": print_formula(r.annotated),
        "realization": print_formula(r.psi),
        "substitution": r.sigma.to_json(),
        "quasi": [print_formula(d) for d in r.quasi.disjuncts],
        "proof_valid": rep.valid,
        "proof": r.proof.to_json(),
    }


# --------------------------------------------------------------------------
# Argument parsing and output


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="justlab", description="Workbench for intermediate justification logics.")
    p.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse and normalise a formula")
    s.add_argument("--lang", default="any", choices=("j", "modal", "star", "any"))
    s.add_argument("formula")
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("check", help="check a proof file")
    s.add_argument("--logic", required=True)
    s.add_argument("proof")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("internalize", help="lift a proof to a justified conclusion")
    s.add_argument("--logic", required=True)
    s.add_argument("--terms", help="comma-separated premise terms (default x1,x2,...)")
    s.add_argument("proof")
    s.set_defaults(run=cmd_internalize)

    s = sub.add_parser("eval", help="evaluate in a Heyting algebra or a model file")
    s.add_argument("--algebra", help="goedel:N or diamond")
    s.add_argument("--assign", action="append", metavar="pN=V")
    s.add_argument("--model")
    s.add_argument("--world", type=int, default=0)
    s.add_argument("--logic")
    s.add_argument("formula")
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("validate-model", help="validate an algebraic or Kripke model file")
    s.add_argument("--logic")
    s.add_argument("model")
    s.set_defaults(run=cmd_validate_model)

    s = sub.add_parser("countermodel", help="bounded countermodel search")
    s.add_argument("--logic", required=True)
    s.add_argument("--max-worlds", type=int, default=3)
    s.add_argument("--family", default="fitting", choices=("fitting", "mkrtychev"))
    s.add_argument("formula")
    s.set_defaults(run=cmd_countermodel)

    s = sub.add_parser("realize", help="realize a modal theorem")
    s.add_argument("--logic", required=True)
    s.add_argument("--quasi", help="JSON file with 'disjuncts' and 'proof'")
    s.add_argument("--max-disjuncts", type=int, default=2)
    s.add_argument("formula")
    s.set_defaults(run=cmd_realize)
    return p


def _render(doc, indent: str = "") -> str:
    if isinstance(doc, dict):
        lines = []
        for k, v in doc.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines.append(_render(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
        return "\n".join(lines)
    if isinstance(doc, list):
        return "\n".join(
            _render(v, indent + "  ") if isinstance(v, dict) else f"{indent}- {v if isinstance(v, str) else json.dumps(v)}"
            for v in doc
        )
    return f"{indent}{doc}"


def emit(doc, pretty: bool, out=None) -> None:
    out = out or sys.stdout
    if pretty:
        out.write(_render(doc) + "\n")
    else:
        out.write(json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")


def run(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else USAGE
    try:
        code, doc = args.run(args)
    except FormulaSyntaxError as e:
        code, doc = SYNTAX, {"error": "syntax", "message": f"{e.msg} at byte {e.offset}"}
    except Usage as e:
        code, doc = USAGE, {"error": "usage", "message": str(e)}
    except ModelError as e:
        code, doc = INVALID, {"error": "model", "message": str(e)}
    except JustlabError as e:
        code, doc = INVALID, {"error": type(e).__name__, "message": str(e)}
    except (KeyError, ValueError, TypeError) as e:
        code, doc = USAGE, {"error": "usage", "message": str(e)}
    emit(doc, args.pretty, out)
    return code


def main(argv: Optional[list] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
