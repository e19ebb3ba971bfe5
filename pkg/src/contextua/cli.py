"""Command-line driver.

Exit status: 0 on success, 1 on input errors, 2 when a verdict violates the
property a command needs (signalling input, no section, no witness).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ContextuaError, FormulaSyntaxError, NotAWitness, SignallingInput
from .hidden import STAGE, build_hv_model, build_weak_hv_model, empirical_to_model
from .logic.characterization import CONTEXTUAL, STRONG, check_characterization
from .logic.parser import parse_formula, print_formula
from .logic.semantics import Evaluator, validates
from .logic.sentences import delta_hardy, delta_pr, det_sentence
from .logic.syntax import Box, Diamond, Not, Prob, Sequent, subformulas
from .scenarios import (
    EmpiricalModel,
    GlobalSection,
    Infeasible,
    canonical_hardy,
    canonical_pr_box,
    check_no_signalling,
    compose_models,
    empirical_from_json,
    find_global_section,
    load_data,
    strong_witness,
    support_model,
)
from .semiring import BOOL, NONNEG, format_rational, get_semiring

OK, INPUT_ERROR, VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    models: list
    semiring: str | None = None
    formula: str | None = None
    fmt: str = "human"
    state: str = "root"
    demo: str | None = None
    witness: str | None = None


# ----------------------------------------------------------------------------
# rendering


def emit_table(E: EmpiricalModel) -> str:
    """Contexts as rows, joint outcomes as columns, exact weights in cells."""
    sc = E.scenario
    columns: list = []
    for e in sc.contexts:
        for g in sc.joint_outcomes(e):
            if g not in columns:
                columns.append(g)
    compact = all(len(o) == 1 for g in columns for o in g)
    heads = ["".join(g) if compact else ",".join(g) for g in columns]
    rows = []
    for e in sc.contexts:
        outs = set(sc.joint_outcomes(e))
        cells = []
        for g in columns:
            if g not in outs:
                cells.append("")
            elif E.semiring is BOOL:
                cells.append("1" if E.tables[e][g] else "0")
            else:
                cells.append(E.semiring.format(E.tables[e][g]))
        rows.append([sc.label(e)] + cells)
    table = [[""] + heads] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    return "\n".join(
        "  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in table
    )


def _fmt(E: EmpiricalModel, value) -> str:
    return E.semiring.format(value)


def _witness_json(E: EmpiricalModel, verdict) -> dict | None:
    w = verdict.witness
    return None if w is None else w.to_json(E.semiring)


def _assignment_json(E: EmpiricalModel, f: tuple) -> dict:
    return dict(zip(E.scenario.order, f))


def _section_json(E: EmpiricalModel, res) -> dict:
    if isinstance(res, GlobalSection):
        d = res.distribution
        return {
            "kind": "global_section",
            "distribution": [
                {"assignment": _assignment_json(E, f), "weight": _fmt(E, d[f])}
                for f in sorted(d.support)
            ],
        }
    if E.semiring is BOOL:
        return {
            "kind": "uncovered_support",
            "entries": [{"context": list(e), "outcome": list(g)} for e, g in res.certificate],
        }
    coeffs, bound = res.bell_inequality(E)
    return {
        "kind": "farkas_certificate",
        "inequality": {
            "coefficients": [
                {"context": list(e), "outcome": list(g), "coefficient": format_rational(c)}
                for (e, g), c in coeffs.items() if c != 0
            ],
            "bound": format_rational(bound),
            "violation": format_rational(res.gap),
        },
    }


def verdict(E: EmpiricalModel, *, contextual=None, strong=None, witness=None, nosig=None) -> dict:
    nosig = nosig if nosig is not None else check_no_signalling(E)
    return {
        "no_signalling": nosig.holds,
        "contextual": contextual,
        "strongly_contextual": strong,
        "witness": witness,
    }


# ----------------------------------------------------------------------------
# loading


def load_model(path: str, semiring: str | None) -> EmpiricalModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        E = empirical_from_json(data)
        if semiring is not None and semiring != E.semiring.name:
            target = get_semiring(semiring)
            if target is BOOL:
                E = support_model(E)
            else:
                E = empirical_from_json(data, target)
    except ContextuaError as exc:
        raise InputError(f"{path}: {exc}") from None
    return E


def _one_model(cfg: RunConfig) -> EmpiricalModel:
    if len(cfg.models) != 1:
        raise InputError(f"{cfg.command} needs exactly one --model")
    return load_model(cfg.models[0], cfg.semiring)


# ----------------------------------------------------------------------------
# commands


def _signalling(E: EmpiricalModel, nosig) -> tuple[int, dict, str]:
    w = nosig.witness
    text = (
        f"no-signalling: false\nwitness: marginals on {E.scenario.label(w.subcontext)} "
        f"at {','.join(w.outcome)} differ: {E.scenario.label(w.context0)} gives "
        f"{_fmt(E, w.value0)}, {E.scenario.label(w.context1)} gives {_fmt(E, w.value1)}"
    )
    return VIOLATION, verdict(E, nosig=nosig, witness=_witness_json(E, nosig)), text


def cmd_check_nosig(cfg):
    E = _one_model(cfg)
    nosig = check_no_signalling(E)
    if not nosig.holds:
        return _signalling(E, nosig)
    return OK, verdict(E, nosig=nosig), "no-signalling: true"


def cmd_check_contextual(cfg):
    E = _one_model(cfg)
    nosig = check_no_signalling(E)
    if not nosig.holds:
        return _signalling(E, nosig)
    res = find_global_section(E)
    ctx = isinstance(res, Infeasible)
    wit = _section_json(E, res)
    lines = ["no-signalling: true", f"contextual: {str(ctx).lower()}"]
    lines += _section_lines(E, wit)
    return OK, verdict(E, nosig=nosig, contextual=ctx, witness=wit), "\n".join(lines)


def _section_lines(E, wit) -> list[str]:
    if wit["kind"] == "global_section":
        return ["global section:"] + [
            f"  {' '.join(f'{a}={k}' for a, k in row['assignment'].items())}: {row['weight']}"
            for row in wit["distribution"]
        ]
    if wit["kind"] == "uncovered_support":
        return ["support entries no consistent assignment covers:"] + [
            f"  {E.scenario.label(r['context'])} -> {','.join(r['outcome'])}" for r in wit["entries"]
        ]
    ineq = wit["inequality"]
    terms = ""
    for c in ineq["coefficients"]:
        q = Fraction(c["coefficient"])
        sign = "-" if q < 0 else "+"
        mag = "" if abs(q) == 1 else f"{format_rational(abs(q))} "
        terms += f" {sign} {mag}P({','.join(c['outcome'])}|{E.scenario.label(c['context'])})"
    terms = terms.lstrip(" +")
    return [
        "Bell-type inequality satisfied by every noncontextual model:",
        f"  {terms} <= {ineq['bound']}",
        f"  this model exceeds the bound by {ineq['violation']}",
    ]


def cmd_check_strong(cfg):
    E = _one_model(cfg)
    nosig = check_no_signalling(E)
    if not nosig.holds:
        return _signalling(E, nosig)
    f = strong_witness(E)
    wit = None if f is None else {"kind": "assignment", "assignment": _assignment_json(E, f)}
    lines = ["no-signalling: true", f"strongly contextual: {str(f is None).lower()}"]
    if f is not None:
        lines.append("consistent assignment: " + " ".join(f"{a}={k}" for a, k in zip(E.scenario.order, f)))
    return OK, verdict(E, nosig=nosig, strong=f is None, witness=wit), "\n".join(lines)


def cmd_global_section(cfg):
    code, data, text = cmd_check_contextual(cfg)
    if code == OK and data["contextual"]:
        code = VIOLATION
    return code, data, text


def cmd_build_hv(cfg):
    E = _one_model(cfg)
    nosig = check_no_signalling(E)
    if not nosig.holds:
        return _signalling(E, nosig)
    res = find_global_section(E)
    if isinstance(res, Infeasible):
        wit = _section_json(E, res)
        text = "\n".join(["contextual: true (no global section, no hidden-variable model)"] + _section_lines(E, wit))
        return VIOLATION, verdict(E, nosig=nosig, contextual=True, witness=wit), text
    H = build_hv_model(E, res)
    ev = Evaluator(H)
    root = (H.base.root, "s")
    det_i = ev.holds(Box((STAGE,), det_sentence(E.scenario)), root)
    wit = _section_json(E, res)
    wit["root_satisfies_box_i_det"] = det_i
    lines = [
        "contextual: false",
        f"hidden-variable model: {len(H.system.fiber['y'])} latent instruction sets",
        "forgetting stage i reproduces every table: true",
        f"root satisfies [i]Det: {str(det_i).lower()}",
    ] + _section_lines(E, wit)
    return OK, verdict(E, nosig=nosig, contextual=False, witness=wit), "\n".join(lines)


def cmd_build_weak_hv(cfg):
    E = _one_model(cfg)
    nosig = check_no_signalling(E)
    if not nosig.holds:
        return _signalling(E, nosig)
    if cfg.witness:
        f = tuple(s.strip() for s in cfg.witness.split(","))
    else:
        f = strong_witness(E)
        if f is None:
            return VIOLATION, verdict(E, nosig=nosig, strong=True), "strongly contextual: true (no witness assignment)"
    try:
        H = build_weak_hv_model(E, f)
    except NotAWitness as exc:
        return VIOLATION, verdict(E, nosig=nosig, witness={"kind": "rejected", "reason": str(exc)}), f"not a witness: {exc}"
    latent = H.system.edges["y"].weights["s"]
    ev = Evaluator(H)
    root = (H.base.root, "s")
    det = det_sentence(E.scenario)
    pos, nec = ev.holds(Diamond((STAGE,), det), root), ev.holds(Box((STAGE,), det), root)
    wit = {
        "kind": "weak_hidden_variable_model",
        "assignment": _assignment_json(E, f),
        "assignment_weight": _fmt(E, latent[f]),
        "leftover_weight": _fmt(E, latent["t"]),
        "root_satisfies_diamond_i_det": pos,
        "root_satisfies_box_i_det": nec,
    }
    text = "\n".join([
        "strongly contextual: false",
        "assignment: " + " ".join(f"{a}={k}" for a, k in zip(E.scenario.order, f)),
        f"latent weights: assignment {wit['assignment_weight']}, leftover {wit['leftover_weight']}",
        f"root satisfies <i>Det: {str(pos).lower()}",
        f"root satisfies [i]Det: {str(nec).lower()}",
    ])
    return OK, verdict(E, nosig=nosig, strong=False, witness=wit), text


def _state_label(st) -> str:
    stage, s = st
    s = ",".join(s) if isinstance(s, tuple) else str(s)
    return f"{stage}:{s}"


def cmd_model_check(cfg):
    E = _one_model(cfg)
    if not cfg.formula:
        raise InputError("model-check needs --formula")
    try:
        f = parse_formula(cfg.formula)
    except FormulaSyntaxError as exc:
        raise InputError(f"formula: {exc}") from None
    labels = {step for g in subformulas(f) if isinstance(g, (Box, Diamond, Prob)) for step in g.label}
    M = empirical_to_model(E, with_stage=STAGE in labels)
    ev = Evaluator(M)
    try:
        ext = ev.extension(f)
    except ContextuaError as exc:
        raise InputError(f"formula: {exc}") from None
    if cfg.state == "root":
        states = M.root_states()
    elif cfg.state == "all":
        states = sorted(M.states(), key=repr)
    else:
        states = [st for st in M.states() if _state_label(st) == cfg.state]
        if not states:
            raise InputError(f"unknown state {cfg.state!r}; use root, all, or stage:state")
    vac = sorted({_state_label(st) for g, st in ev.vacuous if st in states})
    results = {_state_label(st): st in ext for st in states}
    data = {
        "formula": print_formula(f),
        "with_stage": STAGE in labels,
        "results": results,
        "vacuous_states": vac,
    }
    lines = [f"formula: {print_formula(f)}"]
    lines += [f"{'root' if cfg.state == 'root' else k}: {str(v).lower()}" for k, v in results.items()]
    if vac:
        lines.append("note: some modal clause held vacuously (no matching edge) at " + ", ".join(vac))
    return OK, data, "\n".join(lines)


def cmd_compose(cfg):
    if len(cfg.models) != 2:
        raise InputError("compose needs exactly two --model files")
    A, B = (load_model(p, cfg.semiring) for p in cfg.models)
    try:
        C = compose_models(A, B)
    except ContextuaError as exc:
        raise InputError(str(exc)) from None
    data = C.to_json()
    return OK, data, emit_table(C)


def _yes(b: bool) -> str:
    return "true" if b else "false"


def _demo_rows(E: EmpiricalModel) -> tuple[list, dict]:
    nosig = check_no_signalling(E)
    res = find_global_section(E)
    f = strong_witness(E)
    rows = [
        ("no-signalling", _yes(nosig.holds)),
        ("contextual", _yes(isinstance(res, Infeasible))),
        ("strongly contextual", _yes(f is None)),
    ]
    summary = {
        "no_signalling": nosig.holds,
        "contextual": isinstance(res, Infeasible),
        "strongly_contextual": f is None,
        "witness": {"section": _section_json(E, res)},
    }
    if f is not None:
        rows.append(("witness assignment", " ".join(f"{a}={k}" for a, k in zip(E.scenario.order, f))))
        summary["witness"]["assignment"] = _assignment_json(E, f)
    return rows, summary


def cmd_demo(cfg):
    name = cfg.demo
    sc_root = ("x", "s")
    if name == "pr":
        E = canonical_pr_box()
        rows, summary = _demo_rows(E)
        sc = E.scenario
        det = det_sentence(sc)
        plain = validates(empirical_to_model(E), Sequent(delta_pr(), Not(det)))
        M1 = empirical_to_model(E, with_stage=True)
        staged = validates(M1, Sequent(delta_pr(True), Box((STAGE,), Not(det))))
        rep = check_characterization(delta_pr(True), [E], STRONG, [("pr", M1)])
        rows += [
            ("hidden-variable model", "none (no global section)"),
            ("weak models", f"{rep.rejected_witnesses} of {len(sc.global_assignments())} assignments rejected"),
            ("Delta_PR |- !Det", _yes(plain)),
            ("Delta_PR' |- [i]!Det", _yes(staged)),
            ("characterization cross-check", _yes(rep.consistent)),
        ]
        summary["delta_entails_not_det"] = plain
        summary["delta_entails_box_i_not_det"] = staged
        summary["characterization_consistent"] = rep.consistent
    elif name == "hardy":
        E = canonical_hardy(NONNEG)
        rows, summary = _demo_rows(E)
        sc = E.scenario
        bool_ctx = isinstance(find_global_section(support_model(E)), Infeasible)
        rows.insert(2, ("contextual (supports only)", _yes(bool_ctx)))
        f = strong_witness(E)
        H = build_weak_hv_model(E, f)
        ev = Evaluator(H)
        det = det_sentence(sc)
        sat = all(ev.holds(g, sc_root) for g in delta_hardy())
        pos = ev.holds(Diamond((STAGE,), det), sc_root)
        nec = ev.holds(Box((STAGE,), det), sc_root)
        latent = H.system.edges["y"].weights["s"]
        rep_c = check_characterization(delta_hardy(), [E, support_model(E)], CONTEXTUAL)
        rep_s = check_characterization(delta_hardy(), [E, support_model(E)], STRONG)
        rows += [
            ("weak model latent weights", f"{_fmt(E, latent[f])} / {_fmt(E, latent['t'])}"),
            ("root satisfies Delta_Hardy", _yes(sat)),
            ("root satisfies <i>Det & ![i]Det", _yes(pos and not nec)),
            ("characterization cross-check", _yes(rep_c.consistent and rep_s.consistent)),
        ]
        summary.update(contextual_supports=bool_ctx, weak_model_satisfies_delta=sat,
                       diamond_i_det=pos, box_i_det=nec,
                       characterization_consistent=rep_c.consistent and rep_s.consistent)
    elif name == "product":
        E = empirical_from_json(load_data("product.json"))
        rows, summary = _demo_rows(E)
        res = find_global_section(E)
        H = build_hv_model(E, res)
        nec = Evaluator(H).holds(Box((STAGE,), det_sentence(E.scenario)), sc_root)
        rows += [
            ("hidden-variable model", f"{len(H.system.fiber['y'])} latent instruction sets"),
            ("root satisfies [i]Det", _yes(nec)),
        ]
        summary["box_i_det"] = nec
    else:
        raise InputError(f"unknown demo {name!r}")
    width = max(len(k) for k, _ in rows)
    text = emit_table(E) + "\n\n" + "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
    return OK, summary, text


COMMANDS = {
    "check-nosig": cmd_check_nosig,
    "check-contextual": cmd_check_contextual,
    "check-strong": cmd_check_strong,
    "global-section": cmd_global_section,
    "build-hv": cmd_build_hv,
    "build-weak-hv": cmd_build_weak_hv,
    "model-check": cmd_model_check,
    "compose": cmd_compose,
    "demo": cmd_demo,
}


def run(cfg: RunConfig) -> tuple[int, dict | None, str]:
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        return INPUT_ERROR, {"error": str(exc)}, f"error: {exc}"
    except SignallingInput as exc:
        return VIOLATION, {"error": str(exc)}, f"error: {exc}"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contextua", description="Contextuality analysis of empirical models.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("demo", nargs="?", choices=["pr", "hardy", "product"], help="demo name")
    ap.add_argument("--model", action="append", default=[], help="empirical model JSON (repeat for compose)")
    ap.add_argument("--scenario", help="alias for --model")
    ap.add_argument("--semiring", choices=["bool", "nonneg-rational", "rational"])
    ap.add_argument("--formula")
    ap.add_argument("--format", dest="fmt", choices=["human", "json"], default="human")
    ap.add_argument("--state", default="root", help="root (default), all, or stage:state")
    ap.add_argument("--witness", help="comma-separated global assignment for build-weak-hv")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    models = list(args.model) + ([args.scenario] if args.scenario else [])
    if args.command == "demo" and args.demo is None:
        print("error: demo needs a name (pr, hardy, product)", file=sys.stderr)
        return INPUT_ERROR
    cfg = RunConfig(args.command, models, args.semiring, args.formula, args.fmt, args.state,
                    args.demo, args.witness)
    code, data, text = run(cfg)
    if cfg.fmt == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text, file=sys.stderr if code == INPUT_ERROR else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
