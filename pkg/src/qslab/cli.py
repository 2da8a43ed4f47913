"""Batch front door: build models, run experiments, emit artifacts.

Every experiment loads a model, runs deterministically under an explicit
seed, writes JSON (plus DOT or CSV where meaningful) and exits 0 when the
verdict matches the experiment's expectation, 2 on a verdict mismatch and 1
on errors.  Outputs are byte-stable across reruns apart from the timestamp
field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import decoherence, espace, kstruct, models, relevance
from .commutant import commutant_basis, ergodicity_report, sample_commutant_unitary
from .errors import CapacityError
from .hilbert import HermitianOp, Ket, Tps, UnitaryOp, evolve, random_ket
from .relevance import WitnessClass

EXPERIMENTS = (
    "model",
    "certify",
    "timetravel",
    "altreality",
    "altlaws",
    "ergodicity",
    "spacegraph",
    "decohere",
    "coherent",
    "factorfamily",
)
FORMATS = ("json", "dot", "csv")

DEFAULT_EXPECTATIONS = {
    "model": "ok",
    "certify": "DistinctStructures",
    "timetravel": "residual-ok",
    "altreality": "DistinctStructures",
    "altlaws": "degree-increased",
    "ergodicity": None,
    "spacegraph": "monotone",
    "decohere": "oracle-match",
    "coherent": "rival-distinct",
    "factorfamily": "family-distinct",
}

TIMETRAVEL_RESIDUAL = 1e-11
PROFILE_GAP = 1e-3


@dataclass(frozen=True)
class RunConfig:
    """One experiment invocation: model, seed, overrides and output routing."""

    experiment: str
    model: dict | str | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    formats: tuple[str, ...] = ("json",)
    expect: str | None = None
    name: str | None = None
    full: bool = False

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "model": self.model,
            "seed": self.seed,
            "params": self.params,
            "tolerances": self.tolerances,
            "output": self.output,
            "formats": list(self.formats),
            "expect": self.expect,
            "name": self.name,
            "full": self.full,
        }


def load_schema(name: str) -> dict:
    with resources.files("qslab.schemas").joinpath(f"{name}.schema.json").open("rb") as fh:
        return json.load(fh)


_MODEL_REQUIRED = ("model", "certify", "timetravel", "altreality", "altlaws", "ergodicity", "spacegraph")


def validate_config(config: RunConfig) -> None:
    """Schema-check the configuration before anything executes."""
    jsonschema.validate(config.to_json_dict(), load_schema("run_config"))
    if config.experiment in _MODEL_REQUIRED and config.model is None:
        raise ValueError(f"experiment {config.experiment!r} requires a model")


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _state_from_params(params: dict, dim: int, seed: int, h: HermitianOp) -> Ket:
    """Resolve the experiment's state: seeded random or a model eigenstate."""
    spec = params.get("state", "random")
    if spec == "random":
        return random_ket(dim, np.random.default_rng(int(params.get("state_seed", seed))))
    if isinstance(spec, str) and spec.startswith("eigenstate:"):
        k = int(spec.split(":", 1)[1])
        _, v = np.linalg.eigh(h.entries)
        return Ket(v[:, k])
    if spec == "bell" and dim == 4:
        return Ket(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
    raise ValueError(f"unsupported state spec {spec!r}")


def parse_witness(text: str, h: HermitianOp) -> tuple[UnitaryOp, WitnessClass]:
    """Witness syntax: time:<t>, commutant:<seed>, commutant-offorbit:<seed>, phase:<theta>."""
    kind, _, arg = text.partition(":")
    if kind == "time":
        t = float(arg)
        return evolve(h, t), WitnessClass("time", t)
    if kind == "commutant":
        seed = int(arg)
        return sample_commutant_unitary(commutant_basis(h), seed), WitnessClass("commutant", seed)
    if kind == "commutant-offorbit":
        seed = int(arg)
        witness = sample_commutant_unitary(commutant_basis(h), seed, exclude_time_orbit=True)
        return witness, WitnessClass("commutant-offorbit", seed)
    if kind == "phase":
        theta = float(arg)
        return UnitaryOp(np.exp(1j * theta) * np.eye(h.dim)), WitnessClass("phase", theta)
    raise ValueError(f"unrecognized witness syntax {text!r}")


# ---------------------------------------------------------------------------
# experiment handlers: each returns (payload dict with "verdict", extra files)


def _run_model(config: RunConfig) -> tuple[dict, dict]:
    h, tps, model_id = models.load_model(config.model)
    vals = np.linalg.eigvalsh(h.entries)
    payload = {
        "model": model_id,
        "dim": h.dim,
        "factor_dims": list(tps.factor_dims),
        "eigenvalue_min": float(vals[0]),
        "eigenvalue_max": float(vals[-1]),
        "verdict": "ok",
    }
    return payload, {}


def _run_certify(config: RunConfig) -> tuple[dict, dict]:
    h, _, model_id = models.load_model(config.model)
    witness_text = config.params.get("witness", "time:1.0")
    witness, wc = parse_witness(witness_text, h)
    basis = kstruct.computational_basis_structure(h.dim)
    psi = _state_from_params(config.params, h.dim, config.seed, h)
    cert = relevance.certify_nonuniqueness(h, basis, psi, witness, model_id, wc)
    return cert.to_json_dict(full=config.full), {}


def _run_timetravel(config: RunConfig) -> tuple[dict, dict]:
    h, _, model_id = models.load_model(config.model)
    t = float(config.params.get("t", 1.0))
    basis = kstruct.computational_basis_structure(h.dim)
    psi = _state_from_params(config.params, h.dim, config.seed, h)
    residual = relevance.passive_time_travel(h, basis, psi, t)
    bound = float(config.tolerances.get("timetravel_residual", TIMETRAVEL_RESIDUAL))
    payload = {
        "model": model_id,
        "t": t,
        "residual": residual,
        "bound": bound,
        "verdict": "residual-ok" if residual < bound else "residual-exceeded",
    }
    return payload, {}


def _run_altreality(config: RunConfig) -> tuple[dict, dict]:
    h, _, model_id = models.load_model(config.model)
    basis = kstruct.computational_basis_structure(h.dim)
    psi = _state_from_params(config.params, h.dim, config.seed, h)
    cert = relevance.alternative_reality(h, basis, psi, config.seed, model_id)
    return cert.to_json_dict(full=config.full), {}


def _run_altlaws(config: RunConfig) -> tuple[dict, dict]:
    h, tps, model_id = models.load_model(config.model)
    d0, d1 = relevance.alternative_laws(h, tps, config.seed)
    if d1 > d0:
        verdict = "degree-increased"
    elif d1 == d0:
        verdict = "degree-unchanged"
    else:
        verdict = "degree-decreased"
    payload = {
        "model": model_id,
        "degree_original": d0,
        "degree_conjugated": d1,
        "verdict": verdict,
    }
    return payload, {}


def _run_ergodicity(config: RunConfig) -> tuple[dict, dict]:
    h, _, model_id = models.load_model(config.model)
    bound = int(config.params.get("bound", 10))
    tol = float(config.tolerances.get("relation_tol", config.params.get("tol", 1e-9)))
    report = ergodicity_report(h, bound, tol)
    payload = {"model": model_id, **report.to_json_dict()}
    return payload, {}


def _run_spacegraph(config: RunConfig) -> tuple[dict, dict]:
    h, tps, model_id = models.load_model(config.model)
    psi = _state_from_params(config.params, h.dim, config.seed, h)
    graph = espace.space_graph(h, tps, psi)
    monotone = _graph_is_monotone(graph)
    payload = {
        "model": model_id,
        **graph.to_json_dict(),
        "verdict": "monotone" if monotone else "monotone-violated",
    }
    return payload, {"dot": graph.to_dot()}


def _graph_is_monotone(graph: espace.SpaceGraph) -> bool:
    n = len(graph.vertices)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for i, (a, b) in enumerate(pairs):
        for c, d in pairs[i + 1 :]:
            if graph.mi_matrix[a, b] > graph.mi_matrix[c, d] and not (
                graph.dist_matrix[a, b] <= graph.dist_matrix[c, d]
            ):
                return False
    return True


def _run_decohere(config: RunConfig) -> tuple[dict, dict]:
    source = config.model if config.model is not None else "zurek4"
    doc = models.load_model_document(source)
    if doc.get("model") != "zurek":
        raise ValueError("decohere requires a zurek model")
    _, _, model_id = models.load_model(doc)
    spec = models.ZurekSpec(tuple(doc["params"]["couplings"]), float(doc["params"].get("hbar", 1.0)))

    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    vec = plus
    for _ in range(spec.env_count):
        vec = np.kron(vec, plus)
    psi0 = Ket(vec)

    n_times = int(config.params.get("points", 200))
    t_max = float(config.params.get("t_max", 2.0 * decoherence.decohered_time(spec)))
    times = np.linspace(0.0, t_max, n_times)
    trace = decoherence.decoherence_trace(spec, psi0, times)
    bound = float(config.tolerances.get("oracle_dev", 1e-10))
    payload = {
        "model": model_id,
        "points": n_times,
        "t_max": t_max,
        "max_dev": trace.max_dev,
        "bound": bound,
        "verdict": "oracle-match" if trace.max_dev < bound else "oracle-mismatch",
    }
    return payload, {"csv": trace.to_csv()}


def _run_coherent(config: RunConfig) -> tuple[dict, dict]:
    source = config.model if config.model is not None else "ising4"
    h, tps, model_id = models.load_model(source)
    if any(d != 2 for d in tps.factor_dims):
        raise ValueError("coherent requires a qubit-factor model for occupation observables")
    family = espace.coherent_family(h.dim, float(config.params.get("hbar", 1.0)))
    c, frame_residual = espace.frame_check(family)

    witness = sample_commutant_unitary(commutant_basis(h), config.seed)
    rival = espace.rival_coherent_family(family, witness)
    occupation = kstruct.occupation_structure(tps)
    profile = espace.expectation_profile(family, occupation.ops)
    rival_profile = espace.expectation_profile(rival, occupation.ops)
    gap = float(np.max(np.abs(profile - rival_profile)))

    overlap_gap = _overlap_gap(family, rival)
    payload = {
        "model": model_id,
        "sites": h.dim,
        "family_size": len(family),
        "frame_constant": c,
        "frame_residual": frame_residual,
        "profile_gap": gap,
        "overlap_gram_gap": overlap_gap,
        "verdict": "rival-distinct" if gap > PROFILE_GAP else "rival-equivalent",
    }
    return payload, {}


def _overlap_gap(a: list[Ket], b: list[Ket]) -> float:
    ga = np.abs(np.array([[x.overlap(y) for y in a] for x in a]))
    gb = np.abs(np.array([[x.overlap(y) for y in b] for x in b]))
    return float(np.max(np.abs(ga - gb)))


def _run_factorfamily(config: RunConfig) -> tuple[dict, dict]:
    source = config.model if config.model is not None else "ising2"
    h, _, model_id = models.load_model(source)
    if h.dim != 4:
        raise ValueError("factorfamily requires a four-dimensional model")
    psi = _state_from_params(config.params, 4, config.seed, h)
    count = int(config.params.get("count", 10))
    family = decoherence.separable_factorization_family(psi, config.seed, count)

    bell = Ket(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
    invariants = [kstruct.canonical_tps_invariants(tps, [bell], h) for tps in family]
    gaps = []
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            gaps.append(kstruct.tps_invariant_gap(invariants[i], invariants[j]))
    distinct_fraction = float(np.mean([g > PROFILE_GAP for g in gaps])) if gaps else 0.0

    schmidt = []
    for tps in family:
        prod = tps.iso.entries.conj().T @ psi.amplitudes
        s = np.linalg.svd(prod.reshape(2, 2), compute_uv=False)
        schmidt.append(float(s[0]))
    payload = {
        "model": model_id,
        "count": count,
        "min_largest_schmidt": min(schmidt),
        "distinct_pair_fraction": distinct_fraction,
        "verdict": "family-distinct" if distinct_fraction >= 0.9 else "family-overlapping",
    }
    return payload, {}


_HANDLERS = {
    "model": _run_model,
    "certify": _run_certify,
    "timetravel": _run_timetravel,
    "altreality": _run_altreality,
    "altlaws": _run_altlaws,
    "ergodicity": _run_ergodicity,
    "spacegraph": _run_spacegraph,
    "decohere": _run_decohere,
    "coherent": _run_coherent,
    "factorfamily": _run_factorfamily,
}


def run(config: RunConfig, stamp: bool = True) -> tuple[int, dict]:
    """Execute one experiment; returns (exit_code, artifact document)."""
    validate_config(config)
    payload, extras = _HANDLERS[config.experiment](config)
    expected = config.expect if config.expect is not None else DEFAULT_EXPECTATIONS[config.experiment]
    verdict = payload.get("verdict")
    ok = expected is None or verdict == expected
    doc = {
        **payload,
        "experiment": config.experiment,
        "seed": config.seed,
        "expected": expected,
        "ok": ok,
    }
    if stamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    if config.output:
        base = config.output + (config.name or config.experiment)
        if "json" in config.formats:
            _atomic_write(Path(base + ".json"), _dump(doc))
        if "dot" in config.formats and "dot" in extras:
            _atomic_write(Path(base + ".dot"), extras["dot"])
        if "csv" in config.formats and "csv" in extras:
            _atomic_write(Path(base + ".csv"), extras["csv"])
    return (0 if ok else 2), doc


def paper_demos(seed: int = 7, output: str | None = None) -> list[RunConfig]:
    """The shipped demonstration bundle: four certificate controls plus the
    transport, alternative-history, alternative-laws, spectrum-relation and
    monitoring experiments."""

    def mk(name, experiment, model, expect=None, params=None):
        return RunConfig(
            experiment=experiment,
            model=model,
            seed=seed,
            params=params or {},
            output=output,
            expect=expect,
            name=name,
            formats=("json", "dot", "csv"),
        )

    return [
        mk("certify-time", "certify", "ising3", "DistinctStructures", {"witness": "time:1.0"}),
        mk("certify-offorbit", "certify", "ising3", "DistinctStructures",
           {"witness": f"commutant-offorbit:{seed + 4}"}),
        mk("certify-phase", "certify", "ising3", "EquivalentUnderGP", {"witness": "phase:0.3"}),
        mk("certify-eigenstate", "certify", "ising3", "EquivalentUnderGP",
           {"witness": "time:1.0", "state": "eigenstate:0"}),
        mk("timetravel", "timetravel", "nrqm23", "residual-ok", {"t": 1.3}),
        mk("altreality", "altreality", "ising3", "DistinctStructures"),
        mk("altlaws", "altlaws", "ising3", "degree-increased"),
        mk("ergodicity", "ergodicity", "diag012", "NotErgodicRationalRelation",
           {"bound": 3, "tol": 1e-9}),
        mk("decohere", "decohere", "zurek4", "oracle-match"),
    ]


def report_bundle(
    configs: list[RunConfig],
    output: str | None = None,
    jobs: int = 1,
    stamp: bool = True,
) -> tuple[int, dict]:
    """Run every config, aggregate verdicts; bundle exit is the worst child."""
    results: list[dict] = [None] * len(configs)

    def child(i: int) -> None:
        cfg = configs[i]
        try:
            code, doc = run(cfg, stamp=stamp)
        except Exception as exc:  # recorded per-run, bundle keeps going
            code, doc = 1, {"experiment": cfg.experiment, "error": str(exc), "ok": False}
        results[i] = {"name": cfg.name or f"run{i}", "exit": code, **doc}

    if jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(child, range(len(configs))))
    else:
        for i in range(len(configs)):
            child(i)

    worst = max((r["exit"] for r in results), default=0)
    summary = {
        "runs": [
            {k: r.get(k) for k in ("name", "experiment", "verdict", "expected", "ok", "exit",
                                   "gap", "residual", "max_dev", "error") if k in r}
            for r in results
        ],
        "total": len(results),
        "passed": sum(1 for r in results if r.get("ok")),
        "ok": worst == 0,
    }
    if stamp:
        summary["timestamp"] = datetime.now(timezone.utc).isoformat()
    if output:
        _atomic_write(Path(output + "summary.json"), _dump(summary))
    return worst, summary


# ---------------------------------------------------------------------------
# argparse front end


def _add_common(p: argparse.ArgumentParser, model_default: str | None = None) -> None:
    p.add_argument("--model", default=model_default, help="builtin model name or JSON spec path")
    p.add_argument("--seed", type=int, default=None, help="seed (default: QSLAB_SEED or 0)")
    p.add_argument("--out", default=None, help="output path prefix for artifacts")
    p.add_argument("--formats", default="json,dot,csv", help="comma subset of json,dot,csv")
    p.add_argument("--expect", default=None, help="override the expected verdict")
    p.add_argument("--full", action="store_true", help="include matrices in certificate JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qslab",
        description="Demonstrations that preferred quantum structures admit physically "
                    "distinct rivals of the same kind.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "model": "inspect and validate a model spec",
        "certify": "rival-structure certificate for a chosen witness",
        "timetravel": "passive time-transport residual check",
        "altreality": "off-orbit commutant witness certificate",
        "altlaws": "locality of a spectral twin of the Hamiltonian",
        "ergodicity": "degeneracy and integer-relation verdict for the spectrum",
        "spacegraph": "interaction topology and mutual-information distances",
        "decohere": "monitored-qubit coherence trace against the closed form",
        "coherent": "coherent frame on the ring and its rival under a witness",
        "factorfamily": "separability-preserving factorization family",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "certify":
            p.add_argument("--witness", default="time:1.0", help="time:<t> | commutant:<seed> | "
                           "commutant-offorbit:<seed> | phase:<theta>")
            p.add_argument("--state", default="random", help="random | eigenstate:<k> | bell")
        if name == "timetravel":
            p.add_argument("--t", type=float, default=1.0)
        if name in ("spacegraph", "factorfamily"):
            p.add_argument("--state", default="random", help="random | eigenstate:<k> | bell")
        if name == "ergodicity":
            p.add_argument("--bound", type=int, default=10)
            p.add_argument("--tol", type=float, default=1e-9)
        if name == "decohere":
            p.add_argument("--points", type=int, default=200)
            p.add_argument("--t-max", type=float, default=None)
        if name == "factorfamily":
            p.add_argument("--count", type=int, default=10)

    b = sub.add_parser("bundle", help="run a list of experiments and aggregate verdicts")
    b.add_argument("--file", default=None, help="JSON list of run configs")
    b.add_argument("--demo", action="store_true", help="run the shipped demonstration bundle")
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", default=None, help="output path prefix")
    b.add_argument("--jobs", type=int, default=1)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = args.seed if args.seed is not None else int(os.environ.get("QSLAB_SEED", "0"))
    params: dict = {}
    for key in ("witness", "state", "t", "bound", "tol", "points", "count"):
        if hasattr(args, key) and getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if getattr(args, "t_max", None) is not None:
        params["t_max"] = args.t_max
    formats = tuple(f for f in args.formats.split(",") if f)
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown formats {bad}; choose from {FORMATS}")
    return RunConfig(
        experiment=args.command,
        model=args.model,
        seed=seed,
        params=params,
        output=args.out,
        formats=formats,
        expect=args.expect,
        full=args.full,
    )


def _bundle_from_file(path: str, output: str | None) -> list[RunConfig]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError("bundle file must hold a JSON list of run configs")
    configs = []
    for i, item in enumerate(raw):
        jsonschema.validate(item, load_schema("run_config"))
        configs.append(
            RunConfig(
                experiment=item["experiment"],
                model=item.get("model"),
                seed=int(item.get("seed", 0)),
                params=item.get("params", {}),
                tolerances=item.get("tolerances", {}),
                output=output if output is not None else item.get("output"),
                formats=tuple(item.get("formats", ["json", "dot", "csv"])),
                expect=item.get("expect"),
                name=item.get("name", f"run{i}"),
                full=bool(item.get("full", False)),
            )
        )
    return configs


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bundle":
            seed = args.seed if args.seed is not None else int(os.environ.get("QSLAB_SEED", "7"))
            if args.demo or not args.file:
                configs = paper_demos(seed=seed, output=args.out)
            else:
                configs = _bundle_from_file(args.file, args.out)
            code, summary = report_bundle(configs, output=args.out, jobs=args.jobs)
            print(_dump(summary), end="")
            return code
        config = _config_from_args(args)
        code, doc = run(config)
        print(_dump(doc), end="")
        return code
    except jsonschema.ValidationError as exc:
        print(f"config error: {exc.message}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
