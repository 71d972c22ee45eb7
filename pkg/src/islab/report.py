"""Run scenarios into analysis reports, emit them deterministically, and
re-check every witness a report carries.

Reports are plain nested dicts.  Floats are written with 17 significant
digits, keys are sorted, Fractions become ``"p/q"`` strings and complex
numbers ``{"re": .., "im": ..}``.  Wall-clock runtimes are kept out of the
report itself so repeated runs are byte-identical; they are written to a
separate ``.timings.json`` sidecar.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cyclic, growth, hankel, shift_rep
from .errors import HorizonError, HypothesisWarning, PreconditionError, ScenarioError
from .operators import (
    OperatorSpec,
    WeightSequence,
    as_float_vector,
    build_truncation,
    contract as contract_op,
    parse_number,
)
from .scenario import (
    SCHEMA_VERSION,
    Scenario,
    build_operator,
    from_dict as scenario_from_dict,
    materialize_sequence,
    materialize_vector,
)

# relative agreement required between stored and recomputed residuals
RESIDUAL_MATCH = 1e-6
UNIT_TOL = 1e-12


# value encoding

def encode(obj):
    """Convert to JSON-compatible plain data (see module docstring)."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return {"re": z.real, "im": z.imag}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def decode_number(v):
    if isinstance(v, dict):
        return complex(float(v["re"]), float(v["im"]))
    if isinstance(v, str):
        if v in ("inf", "-inf", "nan"):
            return float(v)
        return parse_number(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return Fraction(v)
    return float(v)


def decode_vector(vals) -> np.ndarray:
    out = [decode_number(v) for v in vals]
    if all(isinstance(v, Fraction) for v in out):
        return np.array(out, dtype=object)
    if any(isinstance(v, complex) for v in out):
        return np.array([complex(v) for v in out])
    return np.array([float(v) for v in out])


def _float_token(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Deterministic JSON text: sorted keys, 17-significant-digit floats."""
    obj = encode(obj) if _level == 0 else obj
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(obj[k], indent, _level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _float_token(obj)
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


# running

@dataclass
class RunContext:
    scenario: Scenario
    contract: bool = False
    exact: bool = False
    timings: dict = field(default_factory=dict)


def _tol(exp, key, default):
    return float(exp.tolerances.get(key, default))


def _n_list(spec, default=(1, 512)):
    if spec is None:
        spec = {"dyadic": list(default)}
    if isinstance(spec, dict) and "dyadic" in spec:
        lo, hi = (int(v) for v in spec["dyadic"])
        out, n = [], 1
        while n <= hi:
            if n >= lo:
                out.append(n)
            n *= 2
        return out
    return [int(v) for v in spec]


def _operator(ctx, exp):
    ref = exp.params.get("operator")
    A = build_operator(ctx.scenario, ref)
    spec = ctx.scenario.operator_spec(ref)
    return A, spec


def _vector(ctx, name, N):
    try:
        return materialize_vector(ctx.scenario.vectors[name], N)
    except KeyError as exc:
        raise ScenarioError(f"vector rule incomplete: {exc}") from exc


def _sequence(ctx, name):
    return materialize_sequence(ctx.scenario.sequences[name])


def _verdict_dict(v: hankel.RationalityVerdict):
    if v is None:
        return None
    d = {"verdict": v.verdict, "stabilized_rank": v.stabilized_rank,
         "orders_tested": v.orders_tested, "arithmetic": v.arithmetic, "tol": v.tol}
    if v.certificate is not None:
        d["numerator"] = list(v.certificate[0])
        d["denominator"] = list(v.certificate[1])
    if v.recurrence is not None:
        d["recurrence"] = list(v.recurrence)
    ev = dict(v.evidence)
    ev.pop("sigma_ratios", None)
    if "ranks" in ev and isinstance(ev["ranks"], dict):
        ev["ranks"] = [[int(k), int(r)] for k, r in sorted(ev["ranks"].items())]
    if "scales" in ev and isinstance(ev["scales"], dict):
        ev["scales"] = [[int(k), float(s)] for k, s in sorted(ev["scales"].items())]
    if "float_ranks" in ev and isinstance(ev["float_ranks"], dict):
        ev["float_ranks"] = [[int(k), int(r)] for k, r in sorted(ev["float_ranks"].items())]
    d["evidence"] = ev
    return d


def _witness_dict(w: shift_rep.SubspaceWitness, provenance: dict):
    return {"kind": w.kind, "claim": w.claim, "tol": w.tol,
            "vectors": [np.asarray(v) for v in w.vectors],
            "residuals": list(w.residuals), "data": dict(w.data),
            "provenance": provenance}


def _run_intertwining(ctx, exp):
    A, spec = _operator(ctx, exp)
    f = _vector(ctx, exp.params["f"], A.N)
    M = exp.params.get("M")
    beta = exp.params.get("beta")
    if beta is not None:
        beta = WeightSequence(tuple(parse_number(b) for b in beta))
    K = shift_rep.build_K(A, f, beta, M, check_summability=bool(exp.params.get(
        "check_summability", True)))
    res = shift_rep.intertwining_residual(K)
    tol = _tol(exp, "tol", 1e-10)
    return {"verdict": "pass" if res <= tol else "fail",
            "evidence": {"residual": res, "N": A.N, "M": K.M, "tail_bound": K.tail_bound}}


def _run_kernel_range(ctx, exp):
    A, spec = _operator(ctx, exp)
    f = _vector(ctx, exp.params["f"], A.N)
    M = exp.params.get("M")
    chk = bool(exp.params.get("check_summability", True))
    K = shift_rep.build_K(A, f, None, M, check_summability=chk)
    tol = _tol(exp, "tol", 1e-8)
    ker = shift_rep.kernel_vectors(K, tol)
    dim, w = shift_rep.range_defect(K, tol)
    sig = shift_rep.singular_profile(K)
    rec = {"verdict": "range_defect" if dim else ("kernel" if ker else "injective_dense"),
           "evidence": {"kernel_dim": len(ker), "range_defect_dim": dim, "M": K.M,
                        "tail_bound": K.tail_bound},
           "tables": {"singular_values": [[i, float(s)] for i, s in enumerate(sig)]}}
    if w is not None:
        rec["witnesses"] = [_witness_dict(w, {"operator": spec.to_dict(), "f": f, "M": K.M,
                                              "contract": False})]
    return rec


def _run_dependence(ctx, exp):
    A, spec = _operator(ctx, exp)
    f = _vector(ctx, exp.params["f"], A.N)
    n_max = int(exp.params.get("n_max", min(A.N, A.max_power(f))))
    tol = _tol(exp, "tol", 1e-10)
    c = shift_rep.dependence_detect(A, f, n_max, tol)
    if c is None:
        return {"verdict": "independent", "evidence": {"n_max": n_max}}
    rec = {"verdict": "dependent",
           "evidence": {"n_max": n_max, "relation": c.as_array(),
                        "relation_residual": shift_rep.relation_residual(A, f, c)}}
    w = shift_rep.eigenvalue_witness(A, f, c, _tol(exp, "witness_tol", 1e-8))
    if w is not None:
        rec["evidence"]["eigenvalue"] = w.data["eigenvalue"]
        rec["witnesses"] = [_witness_dict(w, {"operator": spec.to_dict(), "f": f,
                                              "contract": False})]
    return rec


def _run_injectivity(ctx, exp):
    A, spec = _operator(ctx, exp)
    f = _vector(ctx, exp.params["f"], A.N)
    g = _vector(ctx, exp.params["g"], A.N)
    p = exp.params
    use_contract = bool(p.get("contract", False) or ctx.contract)
    res = hankel.injectivity_decision(
        A, f, g, L=p.get("L"), N_max=p.get("N_max"), d_max=p.get("d_max"),
        tol=_tol(exp, "tol", 1e-10), witness_tol=_tol(exp, "witness_tol", 1e-8),
        contract=use_contract)
    c = res.coefficients
    ev = dict(res.evidence)
    ev["psi_identically_zero"] = c.is_zero()
    ev["coefficient_arithmetic"] = c.arithmetic
    rec = {"verdict": res.verdict, "evidence": ev,
           "rationality": _verdict_dict(res.rationality),
           "tables": {"coefficients": [[n, v] for n, v in enumerate(c.values)]}}
    if res.witness is not None:
        prov = {"operator": spec.to_dict(), "f": f, "g": g, "L": res.evidence["L"],
                "contract": use_contract}
        rec["witnesses"] = [_witness_dict(res.witness, prov)]
    return rec


def _run_rationality(ctx, exp):
    c = _sequence(ctx, exp.params["sequence"])
    mode = exp.params.get("mode", "auto")
    tol = _tol(exp, "tol", 1e-10)
    if mode == "auto":
        mode = "exact" if c.exact else "float"
    if ctx.exact and c.exact:
        mode = "exact"
    if mode == "exact":
        if not c.exact:
            raise PreconditionError("exact mode needs exact_rational coefficients")
        d_max = int(exp.params.get("d_max", (len(c) - 2) // 2))
        v = hankel.rationality_oracle_exact(c, d_max)
    else:
        N_max = int(exp.params.get("N_max", min(12, (len(c) + 1) // 2)))
        v = hankel.rank_profile(c.to_float() if c.exact else c, N_max, tol)
    rec = {"verdict": v.verdict, "rationality": _verdict_dict(v), "evidence": {"mode": mode}}
    if v.recurrence is not None:
        rr = hankel.recurrence_residuals(v.recurrence, c)
        rec["evidence"]["recurrence_max_residual"] = float(np.max(rr)) if rr.size else 0.0
    return rec


def _run_hs_norm(ctx, exp):
    c = _sequence(ctx, exp.params["sequence"])
    N_H = int(exp.params.get("N_H", (len(c) + 1) // 2))
    frob, weighted = hankel.hs_norm_check(c, N_H)
    partial = []
    acc = 0.0
    vals = c.as_array()
    for n in range(len(c)):
        acc += (n + 1) * abs(vals[n]) ** 2
        partial.append([n, acc])
    return {"verdict": "agree" if frob == weighted else "disagree",
            "evidence": {"frobenius_sq": frob, "weighted_sum": weighted, "N_H": N_H,
                         "max_partial_weighted_sum": partial[-1][1] if partial else 0.0},
            "tables": {"partial_weighted_sums": partial}}


def _run_growth(ctx, exp):
    A, spec = _operator(ctx, exp)
    p = exp.params
    lam = parse_number(p.get("lambda", 1))
    ns = _n_list(p.get("n"))
    rep = growth.asymmetric_growth(A, complex(lam) if isinstance(lam, complex) else float(lam),
                                   ns)
    ev = {"lambda": lam, "condition_flags": rep.condition_flags}
    try:
        growth.growth_exponent_fit(rep)
        ev["fitted_r"] = rep.fitted_r
        ev["r_interval"] = list(rep.r_interval)
    except ValueError as exc:
        ev["fit_skipped"] = str(exc)
    r = p.get("r")
    if r is None and rep.fitted_r is not None:
        r = max(0, int(round(rep.fitted_r)))
    if r is not None:
        r = int(r)
        ev["r_used"] = r
        dm = _n_list(p.get("difference_n"), (1, 256))
        M, ok = growth.difference_bound_check(A, r, dm + [-n for n in dm])
        ev["bound_constant_M"] = M
        ev["difference_bound_pass"] = ok
        ev["nilpotency_order"] = growth.nilpotency_check(A, r, _tol(exp, "nilpotency_tol",
                                                                       1e-10))
    idents = p.get("identity_lambdas")
    if idents:
        rows = []
        for lv in idents:
            lv = parse_number(lv)
            lv = complex(lv) if isinstance(lv, complex) else float(lv)
            rows.append({"lambda": lv,
                         "scaling": growth.lambda_scaling_residual(A, lv, ns),
                         "adjoint": growth.adjoint_residual(A, lv, ns)})
        ev["identities"] = rows
    verdict = "nilpotent" if ev.get("nilpotency_order") is not None else (
        "measured" if r is None else "no_nilpotency")
    return {"verdict": verdict, "evidence": ev,
            "tables": {"growth": [[int(n), float(v)] for n, v in rep.table()]}}


def _run_local_growth(ctx, exp):
    A, spec = _operator(ctx, exp)
    p = exp.params
    x = _vector(ctx, p["x"], A.N)
    lam = parse_number(p.get("lambda", 1))
    ns = _n_list(p.get("n"))
    adj = None
    if p.get("y") is not None:
        adj = (_vector(ctx, p["y"], A.N), parse_number(p.get("mu", 1)))
    out = growth.local_growth(A, x, lam, ns, adjoint=adj)
    tables = {}
    if adj is None:
        tables["local_growth"] = [[n, float(v)] for n, v in zip(ns, out)]
    else:
        tables["local_growth"] = [[n, float(v)] for n, v in zip(ns, out[0])]
        tables["local_growth_adjoint"] = [[n, float(v)] for n, v in zip(ns, out[1])]
    return {"verdict": "measured", "evidence": {"lambda": lam}, "tables": tables}


def _run_krylov(ctx, exp):
    A, spec = _operator(ctx, exp)
    x = _vector(ctx, exp.params["x"], A.N)
    m = int(exp.params.get("m", A.N))
    panel = cyclic.krylov_panel(A, x, m, _tol(exp, "tol", 1e-10))
    return {"verdict": cyclic.panel_verdict(panel, A.N),
            "evidence": {"rank": panel.rank, "N": A.N, "m": m, "exact": panel.exact,
                         "tol": panel.tol, "horizon_limited": panel.horizon_limited},
            "tables": {"krylov_norms": [[n, float(v)] for n, v in enumerate(panel.log_norms)]}}


def _run_combination(ctx, exp):
    A, spec = _operator(ctx, exp)
    p = exp.params
    x = _vector(ctx, p["x"], A.N)
    alpha = _sequence(ctx, p["alpha"])
    radius = p.get("radius")
    if radius == "midpoint_companion":
        comp = build_truncation(OperatorSpec("volterra", {"scheme": "midpoint"}, A.N))
        from .operators import spectral_radius_estimate
        radius = spectral_radius_estimate(comp, 32)
    elif radius is not None:
        radius = float(radius)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        res = cyclic.combination_cyclicity(A, x, alpha, p.get("m"), _tol(exp, "tol", 1e-10),
                                           radius)
    hyp = dict(res.hypotheses)
    return {"verdict": res.verdict,
            "evidence": {"rank": res.rank, "N": A.N, "identity_residual": res.identity_residual,
                         "hypothesis_proxy": list(res.warnings) or "passed",
                         "hypotheses": hyp}}


def _run_dss(ctx, exp):
    c = _sequence(ctx, exp.params["sequence"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        v = cyclic.dss_noncyclicity(c, exp.params.get("d_max"), exp.params.get("N_max"),
                                    _tol(exp, "tol", 1e-10))
    rec = {"verdict": v.verdict, "rationality": _verdict_dict(v.rationality),
           "evidence": {"decay_hint": c.decay_hint,
                        "warnings": [str(w.message) for w in caught]}}
    if v.rationality.recurrence is not None:
        rr = hankel.recurrence_residuals(v.rationality.recurrence, c)
        rec["evidence"]["recurrence_max_residual"] = float(np.max(rr)) if rr.size else 0.0
    return rec


def _run_volterra(ctx, exp):
    p = exp.params
    out = cyclic.volterra_scenario(int(p.get("N", 16)), p.get("mode", "exact_basis"),
                                   int(p.get("samples", 3)), int(p.get("seed", ctx.scenario.seed)),
                                   _tol(exp, "tol", 1e-10))
    norms = out.pop("krylov_log10_norms")
    full = out["krylov_rank"] == out["N"]
    verdict = "cyclic_at_truncation" if full else (
        "not_cyclic_at_truncation" if out["exact"] else "float_rank_deficient")
    rec = {"verdict": verdict, "evidence": out,
           "tables": {"krylov_norms": [[n, v] for n, v in enumerate(norms)]}}
    return rec


def _run_square_lattice(ctx, exp):
    p = exp.params
    lambdas = [parse_number(v) for v in p["lambdas"]]
    T, x, y = cyclic.square_lattice_operator(lambdas)
    L = int(p.get("L", 40))
    v = cyclic.square_lattice_probe(T, x, y, L, p.get("d_max"), p.get("N_max"),
                                    _tol(exp, "tol", 1e-10))
    return {"verdict": v.verdict, "rationality": _verdict_dict(v),
            "evidence": {"lambdas": lambdas, "L": L}}


RUNNERS = {
    "intertwining": _run_intertwining,
    "kernel_range": _run_kernel_range,
    "dependence": _run_dependence,
    "injectivity_decision": _run_injectivity,
    "rationality": _run_rationality,
    "hs_norm": _run_hs_norm,
    "growth": _run_growth,
    "local_growth": _run_local_growth,
    "krylov_rank": _run_krylov,
    "combination_cyclicity": _run_combination,
    "dss_noncyclicity": _run_dss,
    "volterra": _run_volterra,
    "square_lattice": _run_square_lattice,
}


def run_scenario(scn: Scenario, contract: bool = False, exact: bool = False,
                 timings: dict | None = None) -> dict:
    """Execute experiments in declaration order.

    Numerical precondition failures are recorded per experiment with
    verdict ``precondition_failed``; the report's ``status`` is then
    ``precondition_failed`` as well.
    """
    ctx = RunContext(scn, contract, exact)
    records = []
    status = "ok"
    for exp in scn.experiments:
        t0 = time.perf_counter()
        try:
            rec = RUNNERS[exp.kind](ctx, exp)
        except (PreconditionError, HorizonError) as exc:
            rec = {"verdict": "precondition_failed", "evidence": {"error": str(exc)}}
            status = "precondition_failed"
        except KeyError as exc:
            raise ScenarioError(f"{exp.name}: missing parameter {exc}") from exc
        if timings is not None:
            timings[exp.name] = time.perf_counter() - t0
        rec.setdefault("evidence", {})
        rec.setdefault("witnesses", [])
        rec.setdefault("tables", {})
        rec.update({"name": exp.name, "kind": exp.kind, "tolerances": dict(exp.tolerances)})
        records.append(rec)
    return encode({"schema_version": SCHEMA_VERSION, "scenario": scn.name, "seed": scn.seed,
                   "status": status, "flags": {"contract": contract, "exact": exact},
                   "scenario_definition": scn.to_dict(), "experiments": records})


# emission

def emit(report: dict, out_dir, fmt: str = "json", timings: dict | None = None) -> list:
    """Write the report; returns the written paths.

    ``fmt`` is ``json`` (structured), ``csv`` (one table per file) or ``both``.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    name = report["scenario"]
    paths = []
    if fmt in ("json", "both"):
        p = out / f"{name}.json"
        p.write_text(dumps(report) + "\n")
        paths.append(p)
    if fmt in ("csv", "both"):
        for rec in report["experiments"]:
            for tname, rows in sorted(rec.get("tables", {}).items()):
                p = out / f"{name}__{rec['name']}__{tname}.csv"
                p.write_text(table_csv(tname, rows))
                paths.append(p)
    if timings is not None:
        p = out / f"{name}.timings.json"
        p.write_text(dumps(timings) + "\n")
        paths.append(p)
    return paths


_COLUMNS = {"growth": ("n", "norm"), "local_growth": ("n", "norm"),
            "local_growth_adjoint": ("n", "norm"), "krylov_norms": ("k", "log10_norm"),
            "singular_values": ("i", "sigma"), "coefficients": ("n", "c_n"),
            "partial_weighted_sums": ("n", "partial_sum")}


def table_csv(tname: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS.get(tname, ("x", "y")))
    for row in sorted(rows, key=lambda r: r[0]):
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, dict):
        return f"{format(v['re'], '.17g')}+{format(v['im'], '.17g')}j"
    return v


# verification

def _rebuild_operator(prov):
    A = build_truncation(OperatorSpec.from_dict(prov["operator"]))
    return contract_op(A) if prov.get("contract") else A


def _check_witness(w: dict) -> list:
    """Problems found re-checking one serialized witness (empty = sound)."""
    problems = []
    prov = w.get("provenance") or {}
    try:
        A = _rebuild_operator(prov)
    except Exception as exc:  # noqa: BLE001 - any failure means unverifiable
        return [f"cannot rebuild operator: {exc}"]
    tol = float(w["tol"])
    vecs = [decode_vector(v) for v in w["vectors"]]
    fv = [as_float_vector(v) for v in vecs]
    stored = np.array([float(r) for r in w["residuals"]])
    kind = w["kind"]
    if kind in ("orthogonality", "range_defect", "eigenvalue"):
        for i, v in enumerate(fv):
            if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
                problems.append(f"vector {i} is not unit norm")
        if len(fv) > 1:
            G = np.array(fv).conj() @ np.array(fv).T
            if np.max(np.abs(G - np.eye(len(fv)))) > 1e-10:
                problems.append("vectors are not orthonormal")
    f = decode_vector(prov["f"]) if "f" in prov else None
    if kind == "orthogonality" or (kind == "range_defect" and "g" in prov):
        g = as_float_vector(decode_vector(prov["g"]))
        if np.linalg.norm(fv[0] - g / np.linalg.norm(g)) > UNIT_TOL:
            problems.append("witness vector does not match g / ||g||")
        L = int(prov["L"])
        if kind == "orthogonality":
            res = hankel.orthogonality_residuals(A, f, fv[0], L)
        else:
            b = [decode_number(v) for v in w["data"]["b"]]
            r = len(b) - 1
            bf = np.array([complex(v) for v in b])
            bf = bf.real if np.all(bf.imag == 0) else bf
            from .operators import krylov_vectors
            h = sum(bf[j] * as_float_vector(v)
                    for j, v in enumerate(krylov_vectors(A, f, r + 1, exact=False)))
            res = hankel.orthogonality_residuals(A, h, fv[0], L - r)
    elif kind == "range_defect":
        K = shift_rep.build_K(A, f, None, int(prov["M"]), check_summability=False)
        s = np.linalg.svd(K.columns, compute_uv=False)
        scale = s[0] if s.size and s[0] > 0 else 1.0
        res = np.array([np.linalg.norm(K.columns.conj().T @ v) / scale for v in fv])
    elif kind == "kernel_vector":
        b = np.array([complex(decode_number(v)) for v in w["data"]["b"]])
        if np.linalg.norm(fv[0] - b / np.linalg.norm(b)) > UNIT_TOL:
            problems.append("witness vector does not match b / ||b||")
        from .operators import krylov_vectors
        vk = [as_float_vector(v) for v in krylov_vectors(A, f, len(b), exact=False)]
        acc = np.linalg.norm(sum(fv[0][j] * vk[j] for j in range(len(b))))
        den = sum(abs(fv[0][j]) * np.linalg.norm(vk[j]) for j in range(len(b)))
        res = np.array([acc / den if den > 0 else 0.0])
    elif kind == "eigenvalue":
        lam = decode_number(w["data"]["eigenvalue"])
        lam = complex(lam) if isinstance(lam, complex) else float(lam)
        scale = max(1.0, A.norm)
        res = np.array([np.linalg.norm(A.entries @ v - lam * v) / scale for v in fv])
    else:
        return [f"unknown witness kind {kind!r}"]
    res = np.asarray(res, dtype=float)
    if res.shape != stored.shape:
        problems.append("residual count does not match")
        return problems
    if np.any(res > tol):
        problems.append(f"recomputed residual {res.max():.3g} exceeds tolerance {tol:.3g}")
    if np.any(np.abs(res - stored) > RESIDUAL_MATCH * np.maximum(stored, 1e-9)):
        problems.append("stored residuals do not match recomputed ones")
    return problems


def verify(report: dict) -> list:
    """(experiment, witness index, problems) for every witness; a report is
    sound when every problems list is empty."""
    out = []
    for rec in report.get("experiments", []):
        for i, w in enumerate(rec.get("witnesses", [])):
            out.append((rec["name"], i, _check_witness(w)))
    return out


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def scenario_of(report: dict) -> Scenario:
    return scenario_from_dict(report["scenario_definition"])
