"""Scenario files: parsing, validation and execution into reports.

Scenarios are YAML documents.  Complex numbers may be written as plain
numbers or as strings such as ``"0.5-2i"``; matrices are row-major nested
lists.  Every number in a report comes from a library call; this module only
wires inputs to operations and results to JSON/CSV.
"""

from __future__ import annotations

import ast
import cmath
import csv
import datetime as _dt
import hashlib
import json
import math
import operator
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .algebra import (
    CLUSTER_RTOL,
    TOL_HERM,
    TOL_NORM,
    TOL_PROB,
    TOL_PROJ,
    TOL_PSD,
    StarAlgebra,
    State,
    density_state,
    make_algebra,
    trace_state,
    vector_state,
)
from .classical import FiniteMeasureSystem, embed, embedding_data, indicator
from .dynamics import (
    DEFAULT_HORIZON,
    TOL_DYN,
    TOL_FIX,
    DynamicalMap,
    DynamicalSystem,
    cesaro_correlation,
    cesaro_mean,
    classical_map,
    hamiltonian_step_map,
    is_ergodic,
    make_system,
)
from .errors import AlgebraError, ErgodicError, HypothesisError, StateError
from .gns import TOL_GNS, TOL_NULL, seminorm
from .physics import (
    BoundedQuantumSystem,
    ClassicalMechanicalSystem,
    classical_two_cycle,
    damped_swap_map,
    energy_profile,
    non_ergodicity_certificate,
    spin_half_hamiltonian,
)
from .recurrence import (
    additive_recurrence_search,
    khintchine_pair_set,
    khintchine_set,
    return_probability_scan,
)

SCHEMA_VERSION = "1.0"
OUT_DIR_ENV = "CSTAR_ERGODIC_OUT"
ANALYSES = ("ergodicity", "cesaro", "correlation", "khintchine", "recurrence_search",
            "energy_analysis", "return_scan", "property_checks")
NAMED_SYSTEMS = ("example_2_5_7", "damped_swap", "spin_half", "classical_two_cycle", "cyclic")


class ScenarioError(ErgodicError, ValueError):
    """The scenario file does not match the schema."""


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval(node.operand))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("sqrt", "exp") \
            and len(node.args) == 1 and not node.keywords:
        fn = {"sqrt": cmath.sqrt, "exp": cmath.exp}[node.func.id]
        return fn(_eval(node.args[0]))
    raise ValueError("unsupported expression")


def parse_complex(value) -> complex:
    """Number or arithmetic string such as ``"0.5-2i"``, ``"1/8"``, ``"pi/2"`` or ``"exp(i*pi/4)"``."""
    if isinstance(value, bool):
        raise ScenarioError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        s = value.replace(" ", "")
        s = re.sub(r"(\d|\.)i\b", r"\1j", s)
        s = re.sub(r"\bi\b", "1j", s)
        try:
            return complex(_eval(ast.parse(s, mode="eval")))
        except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
            raise ScenarioError(f"cannot parse number {value!r}") from exc
    raise ScenarioError(f"expected a number, got {value!r}")


def parse_real(value) -> float:
    z = parse_complex(value)
    if z.imag != 0:
        raise ScenarioError(f"expected a real number, got {value!r}")
    return z.real


def parse_weight(value):
    if isinstance(value, str) and "/" in value:
        return Fraction(value.replace(" ", ""))
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return parse_real(value)


def parse_matrix(value, n: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ScenarioError("matrix must be a non-empty list of rows")
    M = np.array([[parse_complex(x) for x in row] for row in value], dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ScenarioError(f"matrix must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ScenarioError(f"matrix must be {n}x{n}, got {M.shape[0]}x{M.shape[1]}")
    return M


def parse_vector(value) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ScenarioError("vector must be a non-empty list")
    return np.array([parse_complex(x) for x in value], dtype=complex)


@dataclass
class Scenario:
    name: str
    raw: dict
    digest: str
    system: DynamicalSystem | None = None
    hamiltonian: np.ndarray | None = None
    classical: FiniteMeasureSystem | None = None
    energy: tuple | None = None
    analyses: list = field(default_factory=list)

    @property
    def alg(self) -> StarAlgebra:
        return self.system.alg


def load_raw(path: str | Path) -> tuple[dict, str]:
    data = Path(path).read_bytes()
    try:
        raw = yaml.safe_load(data)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"unparseable scenario file: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a mapping")
    return raw, hashlib.sha256(data).hexdigest()


def element(scn: Scenario, spec, what: str = "element") -> np.ndarray:
    """Build an algebra element from a matrix or one of the shorthand forms."""
    alg = scn.alg
    if isinstance(spec, dict):
        if "indicator" in spec:
            atoms = [int(a) for a in spec["indicator"]]
            if not alg.is_commutative or any(not 0 <= a < alg.ambient for a in atoms):
                raise ScenarioError(f"{what}: indicator needs atoms of a commutative algebra")
            return indicator(alg.ambient, atoms)
        if "unit" in spec:
            i, j = (int(x) for x in spec["unit"])
            M = alg.zero()
            M[i - 1, j - 1] = 1.0
            return alg.check(M, what)
        if "projector" in spec:
            x = parse_vector(spec["projector"])
            if x.shape != (alg.ambient,) or np.linalg.norm(x) == 0:
                raise ScenarioError(f"{what}: projector vector must have length {alg.ambient}")
            x = x / np.linalg.norm(x)
            return alg.check(np.outer(x, x.conj()), what)
        if "identity" in spec:
            return parse_complex(spec["identity"]) * alg.identity()
        raise ScenarioError(f"{what}: unknown element form {sorted(spec)}")
    try:
        return alg.check(parse_matrix(spec, alg.ambient), what)
    except AlgebraError as exc:
        raise ScenarioError(f"{what}: {exc}") from exc


def _build_state(alg: StarAlgebra, spec) -> State:
    if spec is None:
        return trace_state(alg)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError("state must be a mapping with a 'kind'")
    kind = spec["kind"]
    if kind == "trace":
        return trace_state(alg)
    if kind == "vector":
        return vector_state(alg, parse_vector(spec.get("x")))
    if kind == "density":
        return density_state(alg, parse_matrix(spec.get("rho"), alg.ambient))
    if kind == "weights":
        mu = [parse_real(w) for w in spec.get("mu", [])]
        if len(mu) != alg.ambient or not alg.is_commutative:
            raise ScenarioError("weights state needs one weight per atom of a commutative algebra")
        if any(w < 0 for w in mu):
            raise StateError("state not positive: negative weight")
        return density_state(alg, np.diag(mu))
    raise ScenarioError(f"unknown state kind {kind!r}")


def _build_named(scn: Scenario, spec: dict) -> None:
    name = spec.get("named")
    params = spec.get("params") or {}
    if name in ("example_2_5_7", "damped_swap"):
        c1 = parse_complex(params.get("c1", 0))
        c2 = parse_complex(params.get("c2", 0))
        tau = damped_swap_map(c1, c2)
        scn.system = make_system(tau.alg, trace_state(tau.alg), tau, label="damped-swap")
    elif name == "spin_half":
        E = parse_real(params.get("E", 1.0))
        t = parse_real(params.get("t", 1.0))
        H = spin_half_hamiltonian(E)
        alg = make_algebra([2])
        which = params.get("state", "vector")
        state = vector_state(alg, [1.0, 0.0]) if which == "vector" else _build_state(alg, {"kind": which})
        scn.hamiltonian = H
        scn.system = make_system(alg, state, hamiltonian_step_map(alg, H, t), label="spin-half")
    elif name == "classical_two_cycle":
        cms = classical_two_cycle()
        scn.classical, scn.energy = cms.measure_system, cms.energy
        scn.hamiltonian = cms.H
        scn.system = embed(cms.measure_system)
    elif name == "cyclic":
        m = int(params.get("m", 8))
        scn.classical = FiniteMeasureSystem(tuple(Fraction(1, m) for _ in range(m)),
                                            tuple((a + 1) % m for a in range(m)))
        scn.system = embed(scn.classical)
    else:
        raise ScenarioError(f"unknown named system {name!r}; expected one of {NAMED_SYSTEMS}")


def _build_classical(scn: Scenario, spec: dict) -> None:
    try:
        weights = tuple(parse_weight(w) for w in spec["weights"])
        table = tuple(int(x) for x in spec["map"])
    except (KeyError, TypeError) as exc:
        raise ScenarioError("classical system needs 'weights' and 'map' lists") from exc
    fms = FiniteMeasureSystem(weights, table)
    scn.classical = fms
    if "energy" in spec:
        scn.energy = tuple(parse_real(e) for e in spec["energy"])
        scn.hamiltonian = ClassicalMechanicalSystem(fms, scn.energy).H
    alg, state, tau = embedding_data(fms)
    if not fms.is_non_increasing():
        raise HypothesisError("not-contractive", "measure-increasing map: mu(T^-1(S)) > mu(S) for some S")
    scn.system = make_system(alg, state, tau, label="classical")


def _build_generic(scn: Scenario, raw: dict) -> None:
    alg_spec = raw.get("algebra")
    if not isinstance(alg_spec, dict) or "blocks" not in alg_spec:
        raise ScenarioError("missing 'algebra: {blocks: [...]}' (or 'system' / 'classical')")
    try:
        alg = make_algebra(int(b) for b in alg_spec["blocks"])
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad block list: {exc}") from exc
    state = _build_state(alg, raw.get("state"))
    dyn = raw.get("dynamics")
    if not isinstance(dyn, dict) or "kind" not in dyn:
        raise ScenarioError("dynamics must be a mapping with a 'kind'")
    kind = dyn["kind"]
    if kind == "hamiltonian":
        H = alg.check(parse_matrix(dyn.get("H"), alg.ambient), "Hamiltonian")
        scn.hamiltonian = H
        tau = hamiltonian_step_map(alg, H, parse_real(dyn.get("t", 1.0)))
    elif kind == "superoperator":
        S = parse_matrix(dyn.get("S"), alg.total_dim)
        tau = DynamicalMap(alg, S, "custom")
    elif kind == "classical_map":
        if not alg.is_commutative:
            raise ScenarioError("classical_map dynamics needs a commutative algebra")
        tau = classical_map(dyn.get("T", []))
        if tau.alg != alg:
            raise ScenarioError("map table length must equal the number of atoms")
    elif kind == "identity":
        tau = DynamicalMap.identity(alg)
    else:
        raise ScenarioError(f"malformed dynamics section: unknown kind {kind!r}")
    scn.system = make_system(alg, state, tau, label="custom")


def build(path: str | Path) -> Scenario:
    """Parse and construct a scenario.

    Raises :class:`ScenarioError` / :class:`StateError` / :class:`AlgebraError`
    for validation problems and :class:`HypothesisError` when the dynamics is
    not a *-dynamical system.
    """
    raw, digest = load_raw(path)
    name = str(raw.get("name") or Path(path).stem)
    scn = Scenario(name, raw, digest)
    if "system" in raw:
        if not isinstance(raw["system"], dict):
            raise ScenarioError("'system' must be a mapping")
        _build_named(scn, raw["system"])
    elif "classical" in raw:
        _build_classical(scn, raw["classical"])
    else:
        _build_generic(scn, raw)
    analyses = raw.get("analyses", [])
    if not isinstance(analyses, list):
        raise ScenarioError("'analyses' must be a list")
    for item in analyses:
        if isinstance(item, str):
            item = {"type": item}
        if not isinstance(item, dict) or item.get("type") not in ANALYSES:
            raise ScenarioError(f"unknown analysis {item!r}; expected one of {ANALYSES}")
        scn.analyses.append(item)
    _precheck(scn)
    return scn


def _precheck(scn: Scenario) -> None:
    for i, item in enumerate(scn.analyses):
        for key in ("A", "B", "P"):
            if key in item:
                element(scn, item[key], f"analysis {i} ({item['type']}) {key}")
        if item["type"] in ("energy_analysis", "return_scan") and scn.hamiltonian is None:
            raise ScenarioError(f"analysis {i} ({item['type']}) needs a Hamiltonian")
        if item["type"] in ("cesaro", "correlation", "khintchine") and "A" not in item:
            raise ScenarioError(f"analysis {i} ({item['type']}) needs an element 'A'")
        if item["type"] == "correlation" and "B" not in item:
            raise ScenarioError(f"analysis {i} (correlation) needs an element 'B'")
        if item["type"] in ("recurrence_search", "return_scan") and "P" not in item:
            raise ScenarioError(f"analysis {i} ({item['type']}) needs a projection 'P'")


def _diagnostic(exc: Exception) -> str:
    if isinstance(exc, HypothesisError):
        return f"{exc.code.replace('-', ' ')}: {exc.detail}"
    return str(exc)


def validate(path: str | Path) -> list[str]:
    """Schema and invariant diagnostics; empty when the scenario is valid."""
    try:
        build(path)
    except (ErgodicError, OSError) as exc:
        return [_diagnostic(exc)]
    return []


def _cval(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])


@dataclass
class RunOptions:
    out: Path | None = None
    horizon: int = DEFAULT_HORIZON
    epsilon: float = 0.1
    seed: int = 0
    timestamp: bool = True


def _tolerances() -> dict:
    return {"tol_herm": TOL_HERM, "tol_proj": TOL_PROJ, "tol_psd": TOL_PSD, "tol_norm": TOL_NORM,
            "tol_prob": TOL_PROB, "cluster_rtol": CLUSTER_RTOL, "tol_gns": TOL_GNS, "tol_null": TOL_NULL,
            "tol_dyn": TOL_DYN, "tol_fix": TOL_FIX}


def _run_analysis(scn: Scenario, item: dict, opts: RunOptions, tables: dict, tag: str) -> dict:
    sys = scn.system
    kind = item["type"]
    horizon = int(item.get("n", item.get("K", opts.horizon)))
    eps = parse_real(item.get("epsilon", opts.epsilon))
    out: dict[str, Any] = {"type": kind}
    if kind == "ergodicity":
        out.update(is_ergodic(sys, n_check=horizon).to_dict())
        out["n_check"] = horizon
    elif kind == "cesaro":
        A = element(scn, item["A"], "A")
        if "B" in item:
            B = element(scn, item["B"], "B")
            seq = cesaro_correlation(sys, A, B, horizon)
            target = sys.state(A) * sys.state(B)
            out.update({"kind": "correlation", "n": horizon, "final": _cval(seq[-1]), "product_of_means": _cval(target)})
            tables[tag] = (("n", "value_re", "value_im"), [(k + 1, float(z.real), float(z.imag)) for k, z in enumerate(seq)])
        else:
            traj = cesaro_mean(sys, A, horizon)
            out.update({"kind": "residual", "n": horizon, "state_mean": _cval(traj.state_mean),
                        "final_residual": float(traj.residuals[-1]), "rate_constant": traj.rate_constant})
            tables[tag] = (("n", "residual"), traj.rows())
    elif kind == "correlation":
        A = element(scn, item["A"], "A")
        B = element(scn, item["B"], "B")
        seq = cesaro_correlation(sys, A, B, horizon)
        out.update({"n": horizon, "final": _cval(seq[-1]), "product_of_means": _cval(sys.state(A) * sys.state(B))})
        tables[tag] = (("n", "value_re", "value_im"), [(k + 1, float(z.real), float(z.imag)) for k, z in enumerate(seq)])
    elif kind == "khintchine":
        A = element(scn, item["A"], "A")
        if "B" in item:
            rs = khintchine_pair_set(sys, A, element(scn, item["B"], "B"), eps, horizon, check_ergodic=False)
            out["pair"] = True
            out["system_ergodic"] = is_ergodic(sys).is_ergodic
        else:
            rs = khintchine_set(sys, A, eps, horizon)
            out["pair"] = False
        out.update(rs.summary())
        out["head"] = list(rs.indices[:16])
        tables[tag] = (("k", "value", "admitted"), [(k, v, int(a)) for k, v, a in rs.rows()])
    elif kind == "recurrence_search":
        P = element(scn, item["P"], "P")
        out.update(additive_recurrence_search(sys, P, horizon).to_dict())
    elif kind == "energy_analysis":
        profile = energy_profile(scn.hamiltonian, sys.state, sys.alg)
        out["profile"] = profile.to_dict()
        if scn.classical is not None:
            target = ClassicalMechanicalSystem(scn.classical, scn.energy)
            state = None
        else:
            target = BoundedQuantumSystem(sys.alg, scn.hamiltonian, float(sys.tau.params.get("t", 1.0)))
            state = sys.state
        ns = [n for n in (10, 100, 1000, 10_000) if n <= horizon] or [horizon]
        cert = non_ergodicity_certificate(target, state, ns=ns)
        out["certificate"] = cert.to_dict() if cert is not None else "not applicable"
    elif kind == "return_scan":
        P = element(scn, item["P"], "P")
        grid = item.get("t_grid", {})
        ts = np.linspace(parse_real(grid.get("start", 0.0)), parse_real(grid.get("stop", math.pi)),
                         int(grid.get("num", 101)))
        n_rule = item.get("n", "first")
        scan = return_probability_scan(scn.hamiltonian, P, ts, eps, n_rule=n_rule,
                                       K=int(item.get("K", 1000)), alg=sys.alg)
        out.update(scan.to_dict())
        tables[tag] = (("t", "n", "p"), [(t, "" if n is None else n, p) for t, n, p in scan.rows])
    elif kind == "property_checks":
        rng = np.random.default_rng(opts.seed)
        pairs = int(item.get("pairs", 1000))
        gns = sys.gns
        worst_gns = worst_cs = 0.0
        for _ in range(pairs):
            A = sys.alg.random_element(rng)
            B = sys.alg.random_element(rng)
            lhs = gns.inner(gns.iota(A), gns.iota(B))
            rhs = sys.state(A.conj().T @ B)
            scale = 1 + np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
            worst_gns = max(worst_gns, abs(lhs - rhs) / scale)
            cs = abs(rhs) ** 2 - seminorm(sys.state, A) ** 2 * seminorm(sys.state, B) ** 2
            worst_cs = max(worst_cs, cs / scale ** 2)
        out.update({"pairs": pairs, "seed": opts.seed, "gns_reconstruction_max": float(worst_gns),
                    "cauchy_schwarz_max_excess": float(worst_cs),
                    "passed": bool(worst_gns <= TOL_GNS and worst_cs <= TOL_GNS)})
    return out


def run_scenario(path: str | Path, opts: RunOptions) -> tuple[dict, dict]:
    """Execute every analysis; returns ``(report, tables)``.

    HypothesisError raised by an analysis propagates after being recorded in
    the partially built report, available as ``exc.report``.
    """
    scn = build(path)
    report: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "scenario": {"name": scn.name, "sha256": scn.digest},
        "provenance": {
            "package_version": __version__,
            "tolerances": _tolerances(),
            "horizon": opts.horizon,
            "epsilon": opts.epsilon,
            "seed": opts.seed,
        },
        "system": {
            "label": scn.system.label,
            "blocks": list(scn.system.alg.blocks),
            "gns_dim": scn.system.gns.dim,
            "map_kind": scn.system.tau.kind,
        },
        "results": [],
    }
    if opts.timestamp:
        report["provenance"]["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    tables: dict = {}
    for i, item in enumerate(scn.analyses):
        tag = f"{i:02d}-{item['type']}"
        try:
            result = _run_analysis(scn, item, opts, tables, tag)
        except HypothesisError as exc:
            report["results"].append({"type": item["type"], "error": exc.code, "detail": exc.detail})
            exc.report = report
            exc.tables = tables
            raise
        if tag in tables:
            result["table"] = f"{scn.name}.{tag}.csv"
        report["results"].append(result)
    return report, tables


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "reports"))


def write_outputs(report: dict, tables: dict, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    name = report["scenario"]["name"]
    for tag, (header, rows) in tables.items():
        _write_csv(out / f"{name}.{tag}.csv", header, rows)
    path = out / f"{name}.report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def shipped_scenarios() -> dict[str, Path]:
    root = resources.files("cstar_ergodic") / "scenarios"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith((".yaml", ".yml")):
            out[entry.name.rsplit(".", 1)[0]] = Path(str(entry))
    return out


def resolve(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    shipped = shipped_scenarios()
    if path_or_name in shipped:
        return shipped[path_or_name]
    return p
