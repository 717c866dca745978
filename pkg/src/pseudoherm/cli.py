"""Command-line front end.

Every output starts with a metadata block (version, configuration echo,
tolerances). JSON outputs carry it under ``"metadata"``; CSV outputs carry it
as ``#``-prefixed lines before the header row. Complex numbers are written
as ``{"re": .., "im": ..}`` in JSON and as separate ``re``/``im`` columns in
CSV.

Exit status: 0 on success, 1 on usage or input errors, 2 on numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import dynamics as dy
from . import intertwiner as itw
from . import krein as kr
from . import linalg as la
from . import models
from . import sweep as sw
from .errors import NumericalFailure, PseudoHermError

COMMANDS = ("classify", "intertwiners", "sweep1d", "sweep2d", "evolve",
            "locate", "probe", "chern")
CONFIG_KEYS = {"command", "model", "parameters", "output", "format", "seed",
               "tolerances", "options"}
TOLERANCES = {"real_tol": kr.REAL_TOL, "cluster_tol": la.CLUSTER_TOL,
              "zero_tol": kr.ZERO_TOL, "rank_tol": la.RANK_TOL}
OPTION_DEFAULTS = {
    "intertwiner": None, "times": "0:10:101", "v0": None, "param": None,
    "bracket": None, "what": "transition", "tol": 1e-8, "a": None, "b": None,
    "theta": 0.0, "eta1": 1.0, "eta2": 1.0, "epsilon": 1e-3, "samples": 400,
}
RANGE_RE = re.compile(r"^\s*(-?[\d.eE+-]+)\s*:\s*(-?[\d.eE+-]+)\s*:\s*(\d+)\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pseudoherm",
                description="Krein-kind analysis of pseudo-Hermitian matrices.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--model", choices=sorted(models.MODELS))
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--version", action="version", version=f"pseudoherm {__version__}")
    mp = p.add_argument_group("model parameters (a sweep axis is given as min:max:count)")
    for name in ("g", "kappa", "x", "y", "M", "h", "k", "gamma", "tau"):
        mp.add_argument(f"--{name}")
    mp.add_argument("--V", help="comma-separated onsite potentials")
    mp.add_argument("--K", help="stiffness rows separated by ';', entries by ','")
    tp = p.add_argument_group("tolerances")
    for name in TOLERANCES:
        tp.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    op = p.add_argument_group("command options")
    op.add_argument("--intertwiner", help="name of the model intertwiner to use")
    op.add_argument("--times", help="evolve: min:max:count")
    op.add_argument("--v0", help="evolve: comma-separated complex initial state")
    op.add_argument("--param", help="locate: parameter to vary")
    op.add_argument("--bracket", help="locate: lo:hi")
    op.add_argument("--what", choices=("transition", "degeneracy"))
    op.add_argument("--tol", type=float)
    op.add_argument("--a", dest="a", type=float, help="probe/chern: gain-loss parameter")
    op.add_argument("--b", dest="b", type=float, help="chern: coupling parameter")
    op.add_argument("--theta", type=float)
    op.add_argument("--eta1", type=float)
    op.add_argument("--eta2", type=float)
    op.add_argument("--epsilon", type=float)
    op.add_argument("--samples", type=int)
    return p


def _join_negative_values(argv: Sequence[str]) -> List[str]:
    # "--x -6:6:121" would otherwise be read as an unknown option
    out: List[str] = []
    for tok in argv:
        if (out and re.match(r"^-[\d.]", tok) and out[-1].startswith("--")
                and "=" not in out[-1]):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def load_config(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
    else:
        import yaml
        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise UsageError("config must be a mapping")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _parse_value(name: str, text: Any) -> Any:
    if not isinstance(text, str):
        return text
    m = RANGE_RE.match(text)
    if m:
        return ("range", float(m.group(1)), float(m.group(2)), int(m.group(3)))
    if name == "V":
        return [float(v) for v in text.split(",")]
    if name == "K":
        return [[float(v) for v in row.split(",")] for row in text.split(";")]
    if name == "M":
        return int(text)
    return float(text)


def resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge config file and flags; flags win."""
    cfg = load_config(args.config) if args.config else {}
    run: Dict[str, Any] = {
        "command": cfg.get("command"),
        "model": cfg.get("model"),
        "parameters": dict(cfg.get("parameters") or {}),
        "output": cfg.get("output"),
        "format": cfg.get("format"),
        "seed": cfg.get("seed", 0),
        "tolerances": dict(TOLERANCES),
        "options": dict(OPTION_DEFAULTS),
    }
    tol_cfg = cfg.get("tolerances") or {}
    bad = set(tol_cfg) - set(TOLERANCES)
    if bad:
        raise UsageError(f"unknown tolerances: {sorted(bad)}")
    run["tolerances"].update(tol_cfg)
    opt_cfg = cfg.get("options") or {}
    bad = set(opt_cfg) - set(OPTION_DEFAULTS)
    if bad:
        raise UsageError(f"unknown options: {sorted(bad)}")
    run["options"].update(opt_cfg)

    for key in ("command", "model", "output", "format", "seed"):
        val = getattr(args, key)
        if val is not None:
            run[key] = val
    for name in ("g", "kappa", "x", "y", "M", "h", "k", "gamma", "tau", "V", "K"):
        val = getattr(args, name)
        if val is not None:
            run["parameters"][name] = val
    for name in TOLERANCES:
        val = getattr(args, name)
        if val is not None:
            run["tolerances"][name] = val
    for name in OPTION_DEFAULTS:
        val = getattr(args, name)
        if val is not None:
            run["options"][name] = val
    if run["command"] is None:
        raise UsageError("no command given")
    run["parameters"] = {k: _parse_value(k, v) for k, v in run["parameters"].items()}
    if run["command"] not in ("probe", "chern"):
        if run["model"] is None:
            raise UsageError(f"{run['command']} needs --model")
        allowed = set(models.PARAMETERS[run["model"]])
        bad = set(run["parameters"]) - allowed
        if bad:
            raise UsageError(f"model {run['model']} takes {sorted(allowed)}, not {sorted(bad)}")
    if run["format"] is None:
        run["format"] = "csv" if run["command"] in ("sweep1d", "sweep2d", "evolve") else "json"
    return run


# ---------------------------------------------------------------------------
# serialization


def cplx(z) -> Dict[str, float]:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def matrix_json(A: np.ndarray) -> List[List[Dict[str, float]]]:
    return [[cplx(v) for v in row] for row in np.asarray(A)]


def _echo(run: Dict[str, Any]) -> Dict[str, Any]:
    params = {}
    for k, v in run["parameters"].items():
        params[k] = f"{v[1]}:{v[2]}:{v[3]}" if isinstance(v, tuple) else v
    return {"command": run["command"], "model": run["model"], "parameters": params,
            "format": run["format"], "seed": run["seed"], "options": run["options"]}


def metadata(run: Dict[str, Any]) -> Dict[str, Any]:
    return {"version": __version__, "config": _echo(run), "tolerances": run["tolerances"]}


def render_json(run: Dict[str, Any], payload: Dict[str, Any]) -> str:
    doc = {"metadata": metadata(run)}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_csv(run: Dict[str, Any], header: List[str], rows: List[List[Any]]) -> str:
    buf = io.StringIO()
    meta = json.dumps(metadata(run), sort_keys=True)
    buf.write(f"# pseudoherm {__version__}\n")
    buf.write(f"# metadata: {meta}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_atomic(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pseudoherm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands


def _fixed_and_axes(run) -> Tuple[Dict[str, Any], List[sw.Axis]]:
    fixed, axes = {}, []
    order = models.PARAMETERS[run["model"]]
    for name in order:
        if name not in run["parameters"]:
            continue
        v = run["parameters"][name]
        if isinstance(v, tuple):
            axes.append(sw.Axis(name, v[1], v[2], v[3]))
        else:
            fixed[name] = v
    return fixed, axes


def _instance(run) -> models.ModelInstance:
    fixed, axes = _fixed_and_axes(run)
    if axes:
        raise UsageError(f"{run['command']} takes fixed parameters, not ranges")
    return models.build(run["model"], **fixed)


def _classification(cls: kr.SpectralClassification) -> Dict[str, Any]:
    return {
        "eigenvalues": [cplx(z) for z in cls.eigenvalues],
        "kinds": [k.value for k in cls.kinds()],
        "all_real": cls.all_real,
        "protected": cls.kgl_protected,
        "signature": cls.signature,
        "positive_kind_count": cls.positive_kind_count,
        "negative_kind_count": cls.negative_kind_count,
        "clusters": [{
            "representative": cplx(c.representative),
            "members": list(c.member_indices),
            "algebraic": c.algebraic,
            "geometric": c.geometric,
            "kind": c.kind.value,
            "exceptional": c.is_exceptional,
            "inertia": list(c.inertia.as_tuple()),
        } for c in cls.clusters],
    }


def cmd_classify(run) -> str:
    inst = _instance(run)
    H, G = inst.classification_pair(run["options"]["intertwiner"])
    cls = kr.classify_spectrum(H, G, **run["tolerances"])
    entry = inst.intertwiner(run["options"]["intertwiner"])
    return render_json(run, {"intertwiner": entry.name, "relation": entry.relation,
                             **_classification(cls)})


def cmd_intertwiners(run) -> str:
    inst = _instance(run)
    name = run["options"]["intertwiner"]
    H = inst.H
    if name is not None:
        H = inst.classification_pair(name)[0]
    basis = itw.intertwiner_basis(H, run["tolerances"]["rank_tol"])
    payload: Dict[str, Any] = {
        "dimension": basis.dimension,
        "source_dimension": basis.source_dimension,
        "residuals": basis.residuals,
        "basis": [matrix_json(G) for G in basis.basis],
        "known": [{"name": e.name, "relation": e.relation, "target": e.target,
                   "residual": e.residual(inst.matrices)} for e in inst.intertwiners],
    }
    if basis.basis:
        G, cond = itw.select_invertible(basis, run["seed"])
        payload["invertible"] = {"G": matrix_json(G), "condition_number": cond}
    return render_json(run, payload)


def _point_row(p: sw.PhasePoint, names: List[str], n: int) -> List[Any]:
    row = [float(p.parameters[k]) for k in names]
    row += [p.status.value, p.signature or "", int(p.ep_flag)]
    lam = list(p.eigenvalues) + [np.nan] * (n - p.eigenvalues.size)
    for z in lam:
        z = complex(z)
        row += [float(z.real), float(z.imag)]
    return row


def _sweep_header(names: List[str], n: int) -> List[str]:
    head = names + ["status", "signature", "ep"]
    for i in range(n):
        head += [f"re{i}", f"im{i}"]
    return head


def cmd_sweep1d(run) -> str:
    fixed, axes = _fixed_and_axes(run)
    if len(axes) != 1:
        raise UsageError("sweep1d needs exactly one range parameter")
    ax = axes[0]
    res = sw.sweep1d(run["model"], ax.name, ax.values, fixed,
                     run["options"]["intertwiner"], run["tolerances"])
    n = res.branches.shape[1]
    if run["format"] == "json":
        return render_json(run, {
            "parameter": ax.name, "values": res.values.tolist(),
            "points": [{"status": p.status.value, "signature": p.signature,
                        "ep": p.ep_flag, "message": p.message} for p in res.points],
            "branches": [[cplx(z) for z in row] for row in res.branches],
            "branch_kinds": res.branch_kinds.tolist(),
        })
    head = [ax.name, "status", "signature", "ep"]
    for i in range(n):
        head += [f"re{i}", f"im{i}", f"kind{i}"]
    rows = []
    for i, p in enumerate(res.points):
        row = [float(res.values[i]), p.status.value, p.signature or "", int(p.ep_flag)]
        for b in range(n):
            z = complex(res.branches[i, b])
            row += [float(z.real), float(z.imag), res.branch_kinds[i, b]]
        rows.append(row)
    return render_csv(run, head, rows)


def cmd_sweep2d(run) -> str:
    fixed, axes = _fixed_and_axes(run)
    if len(axes) != 2:
        raise UsageError("sweep2d needs exactly two range parameters")
    pm = sw.sweep2d(run["model"], axes[0], axes[1], fixed,
                    run["options"]["intertwiner"], run["tolerances"])
    names = [axes[0].name, axes[1].name]
    n = max(p.eigenvalues.size for p in pm.grid)
    if run["format"] == "json":
        regions = []
        for lab, key in enumerate(pm.region_keys):
            cells = np.argwhere(pm.labels == lab)
            regions.append({"label": lab, "status": key, "cells": int(cells.shape[0])})
        return render_json(run, {
            "axes": [{"name": a.name, "min": a.lo, "max": a.hi, "count": a.count}
                     for a in pm.axes],
            "regions": regions,
            "boundaries": [{"location": b.location, "type": b.type} for b in pm.boundaries],
            "critical_points": [{"location": {k: float(p.parameters[k]) for k in names},
                                 "ep": p.ep_flag}
                                for p in pm.grid if p.status is sw.Status.DEGENERATE],
        })
    rows = [_point_row(p, names, n) for p in pm.grid]
    return render_csv(run, _sweep_header(names, n), rows)


def _parse_complex_list(text: str) -> np.ndarray:
    return np.array([complex(t.replace(" ", "")) for t in str(text).split(",")])


def cmd_evolve(run) -> str:
    inst = _instance(run)
    opts = run["options"]
    entry = inst.intertwiner(opts["intertwiner"])
    H = inst.matrices.get(entry.target, inst.H)
    if entry.relation != models.DAGGER:
        raise UsageError(f"{entry.name} is not a dagger intertwiner; no conserved quantity")
    m = RANGE_RE.match(str(opts["times"]))
    if not m:
        raise UsageError("--times must be min:max:count")
    times = np.linspace(float(m.group(1)), float(m.group(2)), int(m.group(3)))
    n = H.shape[0]
    if opts["v0"] is None:
        v0 = np.zeros(n, dtype=complex)
        v0[0] = 1.0
    else:
        v0 = _parse_complex_list(opts["v0"])
    tr = dy.evolve(H, v0, times, entry.G)
    if run["format"] == "json":
        return render_json(run, {
            "intertwiner": entry.name, "times": tr.times.tolist(),
            "states": [[cplx(z) for z in s] for s in tr.states],
            "conserved": tr.conserved.tolist(), "drift": tr.drift,
        })
    head = ["t"]
    for i in range(n):
        head += [f"re{i}", f"im{i}"]
    head.append("C")
    rows = []
    for t, s, c in zip(tr.times, tr.states, tr.conserved):
        row = [float(t)]
        for z in s:
            row += [float(z.real), float(z.imag)]
        row.append(float(c))
        rows.append(row)
    return render_csv(run, head, rows)


def cmd_locate(run) -> str:
    opts = run["options"]
    if opts["param"] is None or opts["bracket"] is None:
        raise UsageError("locate needs --param and --bracket lo:hi")
    parts = str(opts["bracket"]).split(":")
    if len(parts) != 2:
        raise UsageError("--bracket must be lo:hi")
    lo, hi = float(parts[0]), float(parts[1])
    fixed, axes = _fixed_and_axes(run)
    if axes:
        raise UsageError("locate takes fixed parameters, not ranges")
    fixed.pop(opts["param"], None)
    if opts["what"] == "transition":
        v = sw.locate_transition(run["model"], opts["param"], (lo, hi), fixed,
                                 opts["tol"], opts["intertwiner"])
        return render_json(run, {"what": "transition", "parameter": opts["param"],
                                 "value": v})
    d = sw.locate_degeneracy(run["model"], opts["param"], (lo, hi), fixed,
                             min(opts["tol"], 1e-12), intertwiner=opts["intertwiner"])
    return render_json(run, {"what": "degeneracy", "parameter": opts["param"],
                             "value": d.location, "kind": d.kind.value, "ep": d.ep_flag,
                             "gap": d.gap, "representative": cplx(d.representative),
                             "multiplicities": list(d.multiplicities)})


def cmd_probe(run) -> str:
    opts = run["options"]
    if opts["a"] is None:
        raise UsageError("probe needs --a")
    H0, G0 = kr.boundary_normal_form(opts["a"], opts["eta1"], opts["eta2"])
    cl = kr.cluster_eigenvalues(la.eigvals(H0))
    if len(cl) != 1:
        raise UsageError("normal form is not degenerate")
    sigs = kr.boundary_probe(H0, G0, cl[0], opts["epsilon"], int(opts["samples"]),
                             run["seed"])
    return render_json(run, {"a": opts["a"], "signatures": sorted(sigs)})


def cmd_chern(run) -> str:
    opts = run["options"]
    if opts["a"] is None or opts["b"] is None:
        raise UsageError("chern needs --a and --b")
    c = kr.chern_zero(opts["a"], opts["b"], opts["theta"])
    if run["format"] == "csv":
        return render_csv(run, ["a", "b", "chern"], [[opts["a"], opts["b"], c]])
    return render_json(run, {"a": opts["a"], "b": opts["b"], "chern": c})


HANDLERS = {
    "classify": cmd_classify, "intertwiners": cmd_intertwiners,
    "sweep1d": cmd_sweep1d, "sweep2d": cmd_sweep2d, "evolve": cmd_evolve,
    "locate": cmd_locate, "probe": cmd_probe, "chern": cmd_chern,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        run = resolve(args)
        text = HANDLERS[run["command"]](run)
        write_atomic(run["output"], text)
    except UsageError as exc:
        print(f"pseudoherm: error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"pseudoherm: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (PseudoHermError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"pseudoherm: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
