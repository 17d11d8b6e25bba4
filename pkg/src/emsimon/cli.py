"""Command-line front end.

Every subcommand writes its artifacts plus ``manifest.json`` into ``--out``
(default ``emsimon-out/<command>``).  Errors are reported as one JSON line on
stderr.  Exit codes: 0 ok, 1 bad input or failed check, 2 key recovery
failed.

Seeds: each invocation takes one ``--seed``.  Attack trial i runs with the
integer seed drawn from ``SeedSequence(seed).spawn(trials)[i]``; inside a
run :mod:`emsimon.attack` splits that seed again.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .attack import (AttackConfig, InsufficientRank, ShotBudgetExhausted, run_attack,
                     top_half_recover_k1)
from .cipher import EmInstance, EmKey, collision_counts, epsilon, f_table, success_probability
from .f2linalg import BitWord
from .galois import (AffineMap, FieldSpec, PermTable, build_sbox, find_sbox_parameters,
                     format_lut, invert_perm, parse_lut)
from .noise import DepolModel, effective_p, fit_p, noisy_sample, sigma_p, tv_distance
from .qsim import Distribution, sample, simon_output_distribution, simulate_circuit_unitary
from .synth import (CostTable, fixture_path, format_circuit, load_circuit, metrics, synthesize,
                    truth_table)

FIXTURE_LUTS = {"fig4": ("52367401", 3), "fig6": ("E4B238091A7F6C5D", 4)}


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = 1):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("UsageError", message)


# -- io helpers -------------------------------------------------------------

def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects outputs and input digests for the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out or os.path.join("emsimon-out", args.command))
        self.outputs: Dict[str, str] = {}
        self.inputs: Dict[str, str] = {}

    def input(self, path: Path) -> Path:
        self.inputs[str(path)] = _digest(path)
        return path

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        _write_atomic(path, text)
        self.outputs[name] = str(path)
        return path

    def finish(self) -> None:
        flags = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func",)}
        manifest = {
            "command": self.args.command,
            "flags": flags,
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        _write_atomic(self.out / "manifest.json", _dump(manifest))


def _resolve(run: Run, name: str) -> Path:
    """A path, or the bare name of a packaged fixture."""
    p = Path(name)
    if p.is_file():
        return run.input(p)
    for candidate in (fixture_path(p.name), fixture_path(p.name + ".csv"), fixture_path(p.name + ".circ")):
        if candidate.is_file():
            return run.input(candidate)
    raise CliError("FileNotFound", f"no such file or fixture: {name}")


def _bitword(text: str, n: int, what: str) -> BitWord:
    try:
        w = BitWord.parse(text)
    except ValueError as exc:
        raise CliError("BadBitWord", f"{what}: {exc}") from None
    if w.width != n:
        raise CliError("WidthMismatch", f"{what} {text!r} is not {n} bits wide")
    return w


def _lut(args, run: Run) -> PermTable:
    text = args.lut
    if getattr(args, "lut_file", None):
        text = _resolve(run, args.lut_file).read_text().strip()
    if text is None:
        raise CliError("UsageError", "a LUT is required (--lut, --lut-file or --config)")
    if args.n is None:
        raise CliError("UsageError", "--n is required with a LUT")
    return _parse_lut(text, args.n)


def _parse_lut(text: str, n: int) -> PermTable:
    try:
        return parse_lut(text, n)
    except ValueError as exc:
        raise CliError(type(exc).__name__, str(exc)) from None


def _apply_config(args, run: Run) -> None:
    if not getattr(args, "config", None):
        return
    cfg = json.loads(_resolve(run, args.config).read_text())
    for key in ("n", "lut", "k1", "k2"):
        if key in cfg and getattr(args, key, None) is None:
            setattr(args, key, cfg[key])


def _instance(args, run: Run) -> EmInstance:
    _apply_config(args, run)
    perm = _lut(args, run)
    if args.k1 is None:
        raise CliError("UsageError", "--k1 is required")
    k1 = _bitword(args.k1, perm.n, "k1")
    k2 = _bitword(args.k2 if args.k2 is not None else "0" * perm.n, perm.n, "k2")
    return EmInstance(perm, EmKey(k1, k2))


# -- subcommands ------------------------------------------------------------

def cmd_sbox(args, run: Run) -> dict:
    report: dict = {}
    if args.lut is not None or args.lut_file:
        perm = _lut(args, run)
        report["source"] = "lut"
    else:
        if not (args.poly and args.matrix):
            raise CliError("UsageError", "give --lut, or --poly with --matrix (and --constant)")
        try:
            spec = FieldSpec.parse(args.poly)
            rows = args.matrix.split(",")
            aff = AffineMap.parse(rows, args.constant or "0" * len(rows))
            perm = build_sbox(spec, aff)
        except ValueError as exc:
            raise CliError(type(exc).__name__, str(exc)) from None
        if args.n is not None and args.n != perm.n:
            raise CliError("WidthMismatch", f"--n {args.n} does not match field degree {perm.n}")
        report.update(source="field", poly=str(spec), affine=aff.to_dict())
    lut = format_lut(perm)
    report.update(n=perm.n, lut=lut, bijective=True, inverse_lut=format_lut(invert_perm(perm)))
    if args.search:
        report["parameters"] = [{"poly": str(s), "affine": a.to_dict()}
                                for s, a in find_sbox_parameters(perm)]
    run.write("lut.txt", lut + "\n")
    run.write("sbox.json", _dump(report))
    print(f"OK n={perm.n} lut={lut} bijective" + (" (verified)" if args.verify else ""))
    return report


def _costs(args, run: Run) -> CostTable:
    if not getattr(args, "costs", None):
        return CostTable()
    try:
        return CostTable.from_dict(json.loads(_resolve(run, args.costs).read_text()))
    except (ValueError, TypeError) as exc:
        raise CliError("BadCostTable", str(exc)) from None


def cmd_synth(args, run: Run) -> dict:
    perm = _lut(args, run)
    costs = _costs(args, run)
    circ = synthesize(perm)
    ok = truth_table(circ) == perm
    if not ok:
        raise CliError("SynthesisFailed", "synthesized circuit does not reproduce the LUT")
    report = {"lut": format_lut(perm), "verified": ok, **metrics(circ, costs)}
    run.write("circuit.circ", format_circuit(circ))
    run.write("metrics.json", _dump(report))
    print(f"OK gates={report['gates']} depth={report['depth']} t_depth={report['t_depth']}")
    return report


def cmd_verify(args, run: Run) -> dict:
    path = _resolve(run, args.circuit)
    circ = load_circuit(path)
    lut = args.lut
    if lut is None and Path(args.circuit).stem in FIXTURE_LUTS:
        lut = FIXTURE_LUTS[Path(args.circuit).stem][0]
    costs = _costs(args, run)
    table = truth_table(circ)
    report = {"circuit": str(path), "truth_table": format_lut(table), **metrics(circ, costs)}
    if circ.width <= 12:
        report["statevector_agrees"] = simulate_circuit_unitary(circ) == table
    if lut is not None:
        expected = _parse_lut(lut, circ.width)
        report["expected_lut"] = format_lut(expected)
        report["matches"] = table == expected
    run.write("verify.json", _dump(report))
    status = "OK" if report.get("matches", True) and report.get("statevector_agrees", True) else "MISMATCH"
    print(f"{status} truth_table={report['truth_table']} depth={report['depth']} t_depth={report['t_depth']}")
    if status != "OK":
        run.finish()
        raise CliError("TruthTableMismatch",
                       f"truth table {report['truth_table']} != expected {report.get('expected_lut')}")
    return report


def cmd_simulate(args, run: Run) -> dict:
    inst = _instance(args, run)
    n = inst.n
    exact = simon_output_distribution(f_table(inst), n)
    meta = {"seed": args.seed, "noise_p": args.noise_p, "shots": None}
    run.write("exact.csv", exact.to_csv())
    run.write("exact.json", exact.to_json(**meta))
    report = {"exact": {k: v for k, v in exact.items()}}
    if args.shots:
        if args.noise_p:
            counts = noisy_sample(exact, args.noise_p, args.shots, args.seed)
        else:
            counts = sample(exact, args.shots, args.seed)
        meta["shots"] = args.shots
        run.write("counts.csv", counts.to_csv())
        run.write("counts.json", counts.to_json(**meta))
        report["counts"] = {k: int(v) for k, v in counts.items()}
    print(exact.to_csv(), end="")
    return report


def _attack_trial(cfg: AttackConfig) -> dict:
    try:
        res = run_attack(cfg)
    except (ShotBudgetExhausted, InsufficientRank) as exc:
        return {"config": cfg.to_dict(), "success": False, "error": type(exc).__name__,
                "message": str(exc), "seed": cfg.seed}
    body = res.to_dict()
    body["_csv"] = res.distribution.to_csv()
    return body


def cmd_attack(args, run: Run) -> dict:
    inst = _instance(args, run)
    shots = args.shots if args.shots is not None else (inst.n + args.r if args.strategy == "streaming" else 100_000)
    base = dict(perm=inst.perm, key=inst.key, shots=shots, strategy=args.strategy,
                noise_p=args.noise_p, r=args.r, m=_bitword(args.m, inst.n, "m").value if args.m else 0,
                k2_mode=args.k2_mode, k2_shots=args.k2_shots)
    try:
        if args.trials == 1:
            cfgs = [AttackConfig(seed=args.seed, **base)]
        else:
            seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(args.seed).spawn(args.trials)]
            cfgs = [AttackConfig(seed=s, **base) for s in seeds]
    except ValueError as exc:
        raise CliError("BadConfig", str(exc)) from None

    if args.jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_attack_trial, cfgs))
    else:
        results = [_attack_trial(c) for c in cfgs]

    for i, body in enumerate(results):
        suffix = "" if len(results) == 1 else f"_{i:04d}"
        csv_text = body.pop("_csv", None)
        if csv_text is not None:
            body["distribution_path"] = str(run.write(f"distribution{suffix}.csv", csv_text))
        run.write(f"result{suffix}.json", _dump(body))
    wins = sum(1 for b in results if b["success"])
    summary = {"trials": len(results), "successes": wins}
    if len(results) > 1:
        run.write("summary.json", _dump(summary))
    if len(results) == 1:
        body = results[0]
        if "error" in body:
            run.finish()
            raise CliError(body["error"], body["message"], code=2)
        print(f"{'OK' if body['success'] else 'FAIL'} k1={body['recovered_k1']} "
              f"k2={body['recovered_k2']} shots={body['shots_used']}")
        if not body["success"]:
            run.finish()
            raise CliError("KeyMismatch", "recovered key differs from the configured key", code=2)
    else:
        print(f"{wins}/{len(results)} trials recovered the key")
        if wins < len(results):
            run.finish()
            raise CliError("KeyMismatch", f"{len(results) - wins} trials failed", code=2)
    return summary


def cmd_epsilon(args, run: Run) -> dict:
    inst = _instance(args, run)
    eps = epsilon(inst)
    report = {"n": inst.n, "lut": format_lut(inst.perm), "k1": str(inst.key.k1),
              "epsilon": f"{eps.numerator}/{eps.denominator}", "value": float(eps),
              "collision_counts": collision_counts(f_table(inst))}
    run.write("epsilon.json", _dump(report))
    print(f"{float(eps)} ({eps.numerator}/{eps.denominator})")
    return report


def cmd_psucc(args, run: Run) -> dict:
    try:
        value = success_probability(args.eps, args.c, args.n)
    except ValueError as exc:
        raise CliError(type(exc).__name__, str(exc)) from None
    report = {"eps": args.eps, "c": args.c, "n": args.n, "p_succ": value}
    run.write("psucc.json", _dump(report))
    print(repr(value))
    return report


def cmd_noise_fit(args, run: Run) -> dict:
    path = _resolve(run, args.table)
    try:
        observed = Distribution.from_csv(path.read_text())
    except ValueError as exc:
        raise CliError("BadTable", str(exc)) from None
    n = observed.width
    if args.p is not None:
        p = args.p
    elif args.m_pulses is not None:
        p = effective_p(args.m_pulses, args.p_gate)
    else:
        raise CliError("UsageError", "give --p or --m-pulses")
    if args.k1:
        model = DepolModel.from_period(p, _bitword(args.k1, n, "k1").value, n)
    else:
        k1 = top_half_recover_k1(observed)
        model = DepolModel.from_period(p, k1.value, n)
    sigma = sigma_p(model)
    tv = tv_distance(sigma, observed)
    report = {"table": str(path), "n": n, "p": p, "support": sorted(format(s, f"0{n}b") for s in model.support),
              "tv_distance": tv, "best_fit_p": fit_p(observed, model.support),
              "sigma_p": {k: v for k, v in sigma.items()}}
    run.write("noise_fit.json", _dump(report))
    print(f"TV={tv:.6f} p={p} best_fit_p={report['best_fit_p']:.4f}")
    return report


# -- parser -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default emsimon-out/<command>)")
    p.add_argument("--seed", type=int, default=0)


def _add_lut(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lut", help="hex LUT, e.g. 52367401")
    p.add_argument("--lut-file", help="file holding a hex LUT")
    p.add_argument("--n", type=int, help="bit width")


def _add_instance(p: argparse.ArgumentParser) -> None:
    _add_lut(p)
    p.add_argument("--k1", help="prewhitening key as a binary string")
    p.add_argument("--k2", help="postwhitening key as a binary string (default all zero)")
    p.add_argument("--config", help="JSON file with n, lut, k1, k2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="emsimon", description="Simon's attack on Even-Mansour, simulated.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sbox", help="build or validate an S-box")
    _add_common(p)
    _add_lut(p)
    p.add_argument("--poly", help="irreducible polynomial as bits, e.g. 1011")
    p.add_argument("--matrix", help="affine matrix rows, comma separated, e.g. 100,010,001")
    p.add_argument("--constant", help="affine constant as bits")
    p.add_argument("--verify", action="store_true", help="check bijectivity (always done)")
    p.add_argument("--search", action="store_true", help="look for (poly, affine) parameters")
    p.set_defaults(func=cmd_sbox)

    p = sub.add_parser("synth", help="synthesize a reversible circuit from a LUT")
    _add_common(p)
    _add_lut(p)
    p.add_argument("--costs", help="JSON cost table")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="check a circuit file against a LUT")
    _add_common(p)
    p.add_argument("--circuit", required=True, help="circuit file or fixture name (fig4, fig6)")
    p.add_argument("--lut", help="expected hex LUT (fixtures default to the published one)")
    p.add_argument("--costs", help="JSON cost table")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="exact and sampled Simon output distribution")
    _add_common(p)
    _add_instance(p)
    p.add_argument("--shots", type=int)
    p.add_argument("--noise-p", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack", help="run the simulated key-recovery attack")
    _add_common(p)
    _add_instance(p)
    p.add_argument("--shots", type=int, help="top-half: sample count; streaming: cap (default n+r)")
    p.add_argument("--strategy", choices=["streaming", "top-half"], default="streaming")
    p.add_argument("--noise-p", type=float, default=0.0)
    p.add_argument("--r", type=int, default=8, help="extra queries beyond n")
    p.add_argument("--m", help="message used for k2 recovery (default all zero)")
    p.add_argument("--k2-mode", choices=["classical", "noisy"], default="classical")
    p.add_argument("--k2-shots", type=int)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("epsilon", help="imperfect-promise collision metric")
    _add_common(p)
    _add_instance(p)
    p.set_defaults(func=cmd_epsilon)

    p = sub.add_parser("psucc", help="success probability after c*n queries")
    _add_common(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_psucc)

    p = sub.add_parser("noise-fit", help="compare the depolarization model with counts")
    _add_common(p)
    p.add_argument("--table", required=True, help="CSV outcome,count or fixture name")
    p.add_argument("--p", type=float)
    p.add_argument("--m-pulses", type=float)
    p.add_argument("--p-gate", type=float, default=1e-3)
    p.add_argument("--k1", help="period defining the support (default: top half of the table)")
    p.set_defaults(func=cmd_noise_fit)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        run = Run(args)
        args.func(args, run)
        run.finish()
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
