"""Command-line surface: synth | split | fit | predict | eval.

Every run directory gets a manifest.json written before any long
computation starts (status "incomplete") and finalized afterwards with
wall-clock time and sha256 checksums of the artifacts, so a finished
manifest is sufficient to re-execute the run bit-identically.

Exit codes: 0 ok, 2 usage, 3 data/I-O, 4 infeasible or unsupported.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import cvb_betadir, gibbs_betadir, gibbs_dirdir, matio, synth
from .binmat import CsvFormat, load_csv, split_holdout, write_csv
from .config import (HyperParams, ModelKind, RunConfig, load_config_file)
from .errors import (BinmfError, DimensionError, InfeasibleModelError,
                     ParseError, UnsupportedModelError)
from .estimators import (active_components, estimate_betadir, estimate_cvb,
                         estimate_dirdir, merge_traces)
from .metrics import metric_report, neg_log_likelihood
from .seeds import chain_seeds

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InfeasibleModelError, UnsupportedModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, BinmfError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binmf",
        description="Bayesian mean-parameterized factorization of binary matrices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic matrix with ground truth")
    p.add_argument("--kind", required=True, help="beta-dir | dir-beta | dir-dir")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(synth.PRESET_REGIMES), default="flat")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="hold out a random subset of observed cells")
    p.add_argument("--input", required=True)
    p.add_argument("--fraction", type=float, default=0.25,
                   help="held-out fraction of observed cells")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="input csv has a header row")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("fit", help="fit a model and write factor estimates")
    p.add_argument("--input", required=True)
    p.add_argument("--config", help="key = value file; explicit flags override it")
    p.add_argument("--model", help="beta-dir | dir-beta | dir-dir")
    p.add_argument("--engine", choices=["gibbs", "cvb"])
    p.add_argument("--k", type=int)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--nonparametric", dest="nonparametric", action="store_true",
                       default=None,
                       help="flat Dirichlet total split over K components")
    group.add_argument("--parametric", dest="nonparametric", action="store_false",
                       default=None)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float,
                   help="Dirichlet total in nonparametric mode, else per component")
    p.add_argument("--eta", type=float)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--samples", type=int, dest="kept_samples")
    p.add_argument("--vb-iterations", type=int, dest="vb_iterations")
    p.add_argument("--thin", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chains", type=int,
                   help="independent chains (gibbs) or restarts (cvb)")
    p.add_argument("--predictive", choices=["mean", "sample"])
    p.add_argument("--header", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predictive means from factor estimates")
    p.add_argument("--ew", required=True)
    p.add_argument("--eh", required=True)
    p.add_argument("--cells", help="optional triples csv restricting the output")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="fit / held-out metrics as one-line JSON")
    p.add_argument("--ev", required=True)
    p.add_argument("--matrix", help="binary csv; metrics over its observed cells")
    p.add_argument("--test", help="held-out triples csv")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


# -- subcommands ---------------------------------------------------------

def cmd_synth(args) -> int:
    kind = ModelKind.parse(args.kind)
    hyper = _synth_hyper(kind, args)
    outdir = _ensure_outdir(args.out)
    manifest = _manifest_start(outdir, "synth", {
        "kind": kind.value, "rows": args.rows, "cols": args.cols,
        "hyper": _hyper_dict(hyper), "seed": args.seed,
    })
    t0 = time.perf_counter()
    result = synth.generate(kind, args.rows, args.cols, hyper, args.seed)
    write_csv(result.V, outdir / "V.csv")
    matio.write_matrix(outdir / "W.csv", result.W)
    matio.write_matrix(outdir / "H.csv", result.H)
    _manifest_finish(outdir, manifest, t0, ["V.csv", "W.csv", "H.csv"])
    return EXIT_OK


def cmd_split(args) -> int:
    V = load_csv(args.input, CsvFormat(header=args.header))
    outdir = _ensure_outdir(args.out)
    manifest = _manifest_start(outdir, "split", {
        "input": str(args.input), "fraction": args.fraction, "seed": args.seed,
    })
    t0 = time.perf_counter()
    split = split_holdout(V, args.fraction, args.seed)
    write_csv(split.train, outdir / "train.csv")
    matio.write_triples(outdir / "test.csv", split.test)
    _manifest_finish(outdir, manifest, t0, ["train.csv", "test.csv"])
    return EXIT_OK


_FIT_DEFAULTS = {
    "model": "beta-dir", "engine": "gibbs", "k": 100, "nonparametric": False,
    "alpha": 1.0, "beta": 1.0, "gamma": 1.0, "eta": 1.0,
    "burn_in": 4000, "kept_samples": 1000, "vb_iterations": 500,
    "thin": 1, "seed": 0, "chains": 1, "predictive": "mean",
}


def cmd_fit(args) -> int:
    opt = dict(_FIT_DEFAULTS)
    if args.config:
        file_values = load_config_file(args.config)
        unknown = set(file_values) - set(opt)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        opt.update(file_values)
    for key in opt:
        flag = getattr(args, key, None)
        if flag is not None:
            opt[key] = flag

    kind = ModelKind.parse(str(opt["model"]))
    engine = opt["engine"]
    if engine == "cvb" and kind is ModelKind.DIR_DIR:
        raise UnsupportedModelError(
            "collapsed variational inference is not available for dir-dir; "
            "use the gibbs engine")

    V = load_csv(args.input, CsvFormat(header=args.header))
    transpose = kind is ModelKind.DIR_BETA
    V_fit = _transpose(V) if transpose else V
    hyper = _fit_hyper(kind, opt)
    cfg = RunConfig(burn_in=int(opt["burn_in"]),
                    kept_samples=int(opt["kept_samples"]),
                    vb_iterations=int(opt["vb_iterations"]),
                    seed=int(opt["seed"]), thin=int(opt["thin"]))
    n_chains = int(opt["chains"])
    seeds = chain_seeds(cfg.seed, n_chains)

    outdir = _ensure_outdir(args.out)
    manifest = _manifest_start(outdir, "fit", {
        "input": str(args.input), "model": kind.value, "engine": engine,
        "hyper": _hyper_dict(hyper), "run": {
            "burn_in": cfg.burn_in, "kept_samples": cfg.kept_samples,
            "vb_iterations": cfg.vb_iterations, "seed": cfg.seed,
            "thin": cfg.thin},
        "chains": n_chains, "chain_seeds": seeds,
        "predictive": opt["predictive"],
    })
    t0 = time.perf_counter()

    if engine == "gibbs":
        run = gibbs_dirdir.run if kind is ModelKind.DIR_DIR else gibbs_betadir.run
        estimate = estimate_dirdir if kind is ModelKind.DIR_DIR else estimate_betadir
        traces = []
        for chain_seed in seeds:
            chain_cfg = RunConfig(burn_in=cfg.burn_in, kept_samples=cfg.kept_samples,
                                  vb_iterations=cfg.vb_iterations,
                                  seed=chain_seed, thin=cfg.thin)
            traces.append(run(V_fit, hyper, chain_cfg,
                              predictive=str(opt["predictive"])))
        _write_gibbs_diagnostics(outdir / "diagnostics.csv", traces, cfg)
        est = estimate(merge_traces(traces), V_fit, hyper)
    else:
        best = None
        restarts = []
        for chain_seed in seeds:
            chain_cfg = RunConfig(burn_in=cfg.burn_in, kept_samples=cfg.kept_samples,
                                  vb_iterations=cfg.vb_iterations,
                                  seed=chain_seed, thin=cfg.thin)
            resp = cvb_betadir.run_cvb(V_fit, hyper, chain_cfg)
            cand = estimate_cvb(resp, V_fit, hyper)
            score = neg_log_likelihood(V_fit, cand.EV)
            restarts.append(resp)
            if best is None or score < best[0]:
                best = (score, cand)
        _write_cvb_diagnostics(outdir / "diagnostics.csv", restarts)
        est = best[1]

    EW, EH, EV = est.EW, est.EH, est.EV
    if transpose:
        EW, EH, EV = EH.T, EW.T, EV.T
    matio.write_matrix(outdir / "EW.csv", EW)
    matio.write_matrix(outdir / "EH.csv", EH)
    matio.write_matrix(outdir / "EV.csv", EV)
    manifest["active_components"] = active_components(est.EW)
    _manifest_finish(outdir, manifest, t0,
                     ["EW.csv", "EH.csv", "EV.csv", "diagnostics.csv"])
    return EXIT_OK


def cmd_predict(args) -> int:
    EW = matio.read_matrix(args.ew)
    EH = matio.read_matrix(args.eh)
    if EW.shape[1] != EH.shape[0]:
        raise DimensionError(f"factor shapes {EW.shape} x {EH.shape} do not align")
    EV = EW @ EH
    if EV.min() < -1e-9 or EV.max() > 1 + 1e-9:
        raise ParseError("factor product leaves [0,1]; inputs are not valid "
                         "probability factors")
    EV = np.clip(EV, 0.0, 1.0)
    outdir = _ensure_outdir(args.out)
    manifest = _manifest_start(outdir, "predict",
                               {"ew": str(args.ew), "eh": str(args.eh)})
    t0 = time.perf_counter()
    matio.write_matrix(outdir / "EV.csv", EV)
    outputs = ["EV.csv"]
    if args.cells:
        cells = matio.read_triples(args.cells)
        with open(outdir / "predictions.csv", "w") as fh:
            fh.write("row,col,prob\n")
            for f, n, _ in cells:
                fh.write(f"{int(f)},{int(n)},{EV[int(f), int(n)]!r}\n")
        outputs.append("predictions.csv")
    _manifest_finish(outdir, manifest, t0, outputs)
    return EXIT_OK


def cmd_eval(args) -> int:
    EV = matio.read_matrix(args.ev)
    if EV.min() < 0.0 or EV.max() > 1.0:
        raise ParseError("predicted means must lie in [0,1]")
    V = load_csv(args.matrix, CsvFormat(header=args.header)) if args.matrix else None
    test = matio.read_triples(args.test) if args.test else None
    if V is None and test is None:
        raise ValueError("provide --matrix and/or --test")
    report = metric_report(EV, V=V, test=test)
    print(report.to_json())
    return EXIT_OK


# -- helpers -------------------------------------------------------------

def _transpose(V):
    from .binmat import BinaryMatrix
    return BinaryMatrix(V.cells.T)


def _synth_hyper(kind: ModelKind, args) -> HyperParams:
    overrides = {name: getattr(args, name)
                 for name in ("alpha", "beta", "gamma", "eta")
                 if getattr(args, name) is not None}
    base = synth.preset_hyper(kind, args.k, args.preset)
    if not overrides:
        return base
    fields = {"k_max": args.k}
    for name in ("alpha", "beta", "gamma", "eta"):
        current = getattr(base, name)
        if name in overrides:
            fields[name] = overrides[name]
        elif current is not None:
            fields[name] = current
    return HyperParams(**fields)


def _fit_hyper(kind: ModelKind, opt) -> HyperParams:
    k = int(opt["k"])
    nonparametric = bool(opt["nonparametric"])
    alpha, beta = float(opt["alpha"]), float(opt["beta"])
    gamma, eta = float(opt["gamma"]), float(opt["eta"])
    if kind is ModelKind.BETA_DIR:
        return HyperParams(k_max=k, alpha=alpha, beta=beta,
                           gamma=gamma / k if nonparametric else gamma,
                           nonparametric=nonparametric)
    if kind is ModelKind.DIR_DIR:
        return HyperParams(k_max=k, gamma=gamma / k if nonparametric else gamma,
                           eta=eta, nonparametric=nonparametric)
    # dir-beta fits as beta-dir on the transpose: eta takes the simplex role
    return HyperParams(k_max=k, alpha=alpha, beta=beta,
                       gamma=eta / k if nonparametric else eta,
                       nonparametric=nonparametric)


def _hyper_dict(hyper: HyperParams) -> dict:
    out = {"k_max": hyper.k_max, "nonparametric": hyper.nonparametric}
    for name in ("alpha", "beta", "gamma", "eta"):
        vec = getattr(hyper, name)
        out[name] = None if vec is None else float(vec[0])
    return out


def _ensure_outdir(path) -> Path:
    outdir = Path(path)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _manifest_start(outdir: Path, command: str, params: dict) -> dict:
    manifest = {"command": command, "status": "incomplete", "params": params}
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def _manifest_finish(outdir: Path, manifest: dict, t0: float,
                     outputs: list[str]) -> None:
    manifest["status"] = "complete"
    manifest["wall_clock_s"] = time.perf_counter() - t0
    manifest["outputs"] = {
        name: _sha256(outdir / name) for name in outputs if (outdir / name).exists()}
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2))


def _sha256(path: Path) -> str:
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return f"sha256:{digest}"


def _write_gibbs_diagnostics(path, traces, cfg) -> None:
    with open(path, "w") as fh:
        fh.write("chain,sweep,log_joint,active_components\n")
        for chain, trace in enumerate(traces):
            for sweep_no, (lj, act) in enumerate(
                    zip(trace.log_joint, trace.active_history)):
                fh.write(f"{chain},{sweep_no},{lj!r},{int(act)}\n")


def _write_cvb_diagnostics(path, restarts) -> None:
    with open(path, "w") as fh:
        fh.write("restart,pass,max_q_change,active_components\n")
        for restart, resp in enumerate(restarts):
            for pass_no, (chg, act) in enumerate(
                    zip(resp.max_change_history, resp.active_history)):
                fh.write(f"{restart},{pass_no},{chg!r},{int(act)}\n")


if __name__ == "__main__":
    sys.exit(main())
