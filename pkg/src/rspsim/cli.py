"""Command-line front end: run protocols and sweeps, verify identities, emit records.

Output contract (schema_version "1"):

* JSON goes to stdout with keys in sorted order and every float printed
  with 17 significant digits, so parsing an emission and re-emitting it is
  byte-identical.
* CSV uses a fixed, versioned column order. Preparation/teleport records:
  theta, phi, family, bell, trials, seed, exact_delivery_rate,
  mean_fidelity, cbits_per_run, verdict. Remote-measurement records:
  theta, phi, bell, trials, seed, bx, by, bz, p_plus_empirical,
  p_plus_analytic, three_sigma, verdict.
* Exit codes: 0 = pass, 1 = usage or precondition error, 2 = failed
  verification.

Angles are radians. Nothing is written to disk unless --out is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .basis import BELL_ROTATIONS, ReconstructionError, decompose_bell, qubit_basis, reconstruction_error
from .protocol import (
    FamilyMismatchError,
    StateFamily,
    correction_for,
    _EQUATORIAL_FIX,
    _POLAR_FIX,
)
from .qstate import (
    ATOL,
    BellLabel,
    BlochVector,
    PAULI_X,
    PAULI_Y,
    apply_pauli,
    complement,
    fidelity,
    make_qubit,
)
from .stats import TrialConfig, analytic_run, run_trials

SCHEMA_VERSION = "1"

# A direction flag is accepted when its Euclidean norm is this close to 1,
# then normalized exactly; anything farther off is rejected as a typo.
_B_NORM_TOL = 1e-6

_PREP_CSV_COLUMNS = (
    "theta", "phi", "family", "bell", "trials", "seed",
    "exact_delivery_rate", "mean_fidelity", "cbits_per_run", "verdict",
)
_MEASURE_CSV_COLUMNS = (
    "theta", "phi", "bell", "trials", "seed", "bx", "by", "bz",
    "p_plus_empirical", "p_plus_analytic", "three_sigma", "verdict",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as exit code 1."""

    def error(self, message):
        raise UsageError(message)


def canonical_json(obj) -> str:
    """Serialize with sorted keys and fixed float formatting (17 sig. digits)."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(repr(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("cannot emit non-finite float")
        out.append(format(obj, ".17e"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                         for v in row])
    return buf.getvalue()


def _deliver(text: str, out_path: str | None) -> None:
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _checks_payload(aggregate) -> list[dict]:
    return [
        {
            "name": c.name,
            "analytic": c.analytic,
            "empirical": c.empirical,
            "tolerance": c.tolerance,
            "passed": c.passed,
        }
        for c in aggregate.checks
    ]


def _runs_in(aggregate) -> int:
    if aggregate.trials:
        return aggregate.trials
    return len(aggregate.detail) if aggregate.detail else 1


def _base_record(command: str, config_echo: dict, aggregate) -> dict:
    results = {
        "counts": aggregate.counts,
        "frequencies": aggregate.frequencies,
        "analytic": aggregate.analytic,
        "mean_fidelity": aggregate.mean_fidelity,
        "exact_delivery_rate": aggregate.exact_delivery_rate,
        "cbits_total": aggregate.cbits_total,
        "cbits_per_run": aggregate.cbits_total / _runs_in(aggregate),
        "three_sigma": aggregate.three_sigma,
    }
    if aggregate.detail is not None:
        results["detail"] = list(aggregate.detail)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config_echo,
        "results": results,
        "checks": _checks_payload(aggregate),
        "verdict": aggregate.verdict,
    }


def _run_config(config: TrialConfig, analytic: bool, workers: int):
    return analytic_run(config) if analytic else run_trials(config, workers=workers)


def _add_common_run_flags(p: argparse.ArgumentParser, with_family: bool) -> None:
    p.add_argument("--theta", type=float, required=True, help="polar angle, radians")
    p.add_argument("--phi", type=float, required=True, help="azimuthal angle, radians")
    if with_family:
        p.add_argument("--family", choices=[f.value for f in StateFamily],
                       default=StateFamily.ARBITRARY.value)
    p.add_argument("--bell", choices=[b.value for b in BellLabel],
                   default=BellLabel.PSI_MINUS.value, help="shared entangled state")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--analytic", action="store_true",
                   help="evaluate every branch exactly; consumes no randomness")
    p.add_argument("--workers", type=int, default=1, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help="also write the record to this path")


def build_parser() -> _Parser:
    parser = _Parser(prog="rspsim", description=__doc__.splitlines()[0])
    parser.add_argument("--quote-check", action="store_true", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command")

    p_rsp = sub.add_parser("rsp", help="remote preparation of a known qubit (one cbit)")
    _add_common_run_flags(p_rsp, with_family=True)

    p_ms = sub.add_parser("measure-sim",
                          help="remote simulation of a spin measurement (one cbit)")
    _add_common_run_flags(p_ms, with_family=False)
    p_ms.add_argument("--bx", type=float, required=True)
    p_ms.add_argument("--by", type=float, required=True)
    p_ms.add_argument("--bz", type=float, required=True)

    p_tp = sub.add_parser("teleport", help="standard teleportation baseline (two cbits)")
    _add_common_run_flags(p_tp, with_family=False)

    p_bc = sub.add_parser("bell-check",
                          help="verify the qubit-basis form of all four shared states")
    p_bc.add_argument("--samples", type=int, default=1000)
    p_bc.add_argument("--seed", type=int, default=0)

    p_sw = sub.add_parser("sweep", help="grid of runs over the sphere, one row per point")
    p_sw.add_argument("--mode", choices=["rsp", "teleport"], default="rsp")
    p_sw.add_argument("--grid-theta", type=int, required=True, metavar="K")
    p_sw.add_argument("--grid-phi", type=int, required=True, metavar="L")
    p_sw.add_argument("--family", choices=[f.value for f in StateFamily],
                      default=StateFamily.ARBITRARY.value)
    p_sw.add_argument("--bell", choices=[b.value for b in BellLabel],
                      default=BellLabel.PSI_MINUS.value)
    p_sw.add_argument("--trials", type=int, default=1000)
    p_sw.add_argument("--seed", type=int, default=0)
    p_sw.add_argument("--format", choices=["json", "csv"], default="csv")
    p_sw.add_argument("--workers", type=int, default=1, help=argparse.SUPPRESS)
    p_sw.add_argument("--out", default=None)
    return parser


def _prep_csv_row(args, aggregate, family: str | None, seed) -> tuple:
    return (
        args.theta,
        args.phi,
        family or "",
        args.bell,
        aggregate.trials,
        seed,
        aggregate.exact_delivery_rate,
        aggregate.mean_fidelity,
        aggregate.cbits_total / _runs_in(aggregate),
        aggregate.verdict,
    )


def cmd_rsp(args) -> int:
    config = TrialConfig(
        mode="rsp",
        theta=args.theta,
        phi=args.phi,
        bell=BellLabel(args.bell),
        family=StateFamily(args.family),
        trials=args.trials,
        seed=args.seed,
    )
    aggregate = _run_config(config, args.analytic, args.workers)
    seed = None if args.analytic else args.seed
    if args.format == "json":
        echo = {
            "theta": args.theta,
            "phi": args.phi,
            "family": args.family,
            "bell": args.bell,
            "trials": aggregate.trials,
            "seed": seed,
            "analytic": args.analytic,
        }
        text = canonical_json(_base_record("rsp", echo, aggregate))
    else:
        text = _csv_text(_PREP_CSV_COLUMNS,
                         [_prep_csv_row(args, aggregate, args.family, seed)])
    _deliver(text, args.out)
    return 0 if aggregate.verdict == "pass" else 2


def cmd_teleport(args) -> int:
    config = TrialConfig(
        mode="teleport",
        theta=args.theta,
        phi=args.phi,
        bell=BellLabel(args.bell),
        trials=args.trials,
        seed=args.seed,
    )
    aggregate = _run_config(config, args.analytic, args.workers)
    seed = None if args.analytic else args.seed
    if args.format == "json":
        echo = {
            "theta": args.theta,
            "phi": args.phi,
            "bell": args.bell,
            "trials": aggregate.trials,
            "seed": seed,
            "analytic": args.analytic,
        }
        text = canonical_json(_base_record("teleport", echo, aggregate))
    else:
        text = _csv_text(_PREP_CSV_COLUMNS,
                         [_prep_csv_row(args, aggregate, None, seed)])
    _deliver(text, args.out)
    return 0 if aggregate.verdict == "pass" else 2


def _normalized_b(bx: float, by: float, bz: float) -> BlochVector:
    norm = math.sqrt(bx * bx + by * by + bz * bz)
    if abs(norm - 1.0) > _B_NORM_TOL:
        raise UsageError(
            f"measurement direction must be a unit vector (|b| - 1 within "
            f"{_B_NORM_TOL}); got |b| = {norm}"
        )
    return BlochVector(bx / norm, by / norm, bz / norm)


def cmd_measure_sim(args) -> int:
    b = _normalized_b(args.bx, args.by, args.bz)
    config = TrialConfig(
        mode="measure_sim",
        theta=args.theta,
        phi=args.phi,
        bell=BellLabel(args.bell),
        b=b,
        trials=args.trials,
        seed=args.seed,
    )
    aggregate = _run_config(config, args.analytic, args.workers)
    seed = None if args.analytic else args.seed
    p_plus_emp = aggregate.frequencies["outcome_plus"]
    p_plus_ref = aggregate.analytic["outcome_plus"]
    if args.format == "json":
        echo = {
            "theta": args.theta,
            "phi": args.phi,
            "bell": args.bell,
            "b": {"bx": b.nx, "by": b.ny, "bz": b.nz},
            "trials": aggregate.trials,
            "seed": seed,
            "analytic": args.analytic,
        }
        record = _base_record("measure-sim", echo, aggregate)
        record["results"]["p_plus_empirical"] = p_plus_emp
        record["results"]["p_plus_analytic"] = p_plus_ref
        text = canonical_json(record)
    else:
        row = (args.theta, args.phi, args.bell, aggregate.trials, seed,
               b.nx, b.ny, b.nz, p_plus_emp, p_plus_ref,
               aggregate.three_sigma, aggregate.verdict)
        text = _csv_text(_MEASURE_CSV_COLUMNS, [row])
    _deliver(text, args.out)
    return 0 if aggregate.verdict == "pass" else 2


def cmd_bell_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    max_dev = 0.0
    try:
        for _ in range(args.samples):
            theta = math.acos(1.0 - 2.0 * rng.random())  # uniform on the sphere
            phi = 2.0 * math.pi * rng.random()
            psi = make_qubit(theta, phi)
            basis = qubit_basis(psi)
            for label in BellLabel:
                decomp = decompose_bell(label, psi)
                max_dev = max(max_dev, reconstruction_error(decomp, basis))
    except ReconstructionError as exc:
        print(f"reconstruction failed: {exc}")
        print("bell-check: FAIL")
        return 2
    ok = max_dev < ATOL
    print(f"max reconstruction deviation over {args.samples} states x 4 shared "
          f"states: {max_dev:.3e} (bound {ATOL:.1e})")
    print(f"bell-check: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 2


def _sweep_grid(mode: str, family: StateFamily, k: int, length: int):
    if k < 1 or length < 1:
        raise UsageError("--grid-theta and --grid-phi must be >= 1")
    thetas = [(i + 0.5) * math.pi / k for i in range(k)]
    phis = [(j + 0.5) * 2.0 * math.pi / length for j in range(length)]
    if mode == "rsp":
        if family is StateFamily.EQUATORIAL:
            if k != 1:
                raise UsageError("family 'equatorial' fixes theta = pi/2; use --grid-theta 1")
            thetas = [math.pi / 2.0]
        elif family is StateFamily.POLAR:
            if length != 1:
                raise UsageError("family 'polar' fixes phi = 0; use --grid-phi 1")
            phis = [0.0]
    return thetas, phis


def cmd_sweep(args) -> int:
    family = StateFamily(args.family)
    thetas, phis = _sweep_grid(args.mode, family, args.grid_theta, args.grid_phi)
    rows = []
    json_rows = []
    all_pass = True
    for i, theta in enumerate(thetas):
        for j, phi in enumerate(phis):
            cell_seed = int(np.random.SeedSequence([args.seed, i, j])
                            .generate_state(1, np.uint64)[0])
            if args.mode == "rsp":
                config = TrialConfig(mode="rsp", theta=theta, phi=phi,
                                     bell=BellLabel(args.bell), family=family,
                                     trials=args.trials, seed=cell_seed)
            else:
                config = TrialConfig(mode="teleport", theta=theta, phi=phi,
                                     bell=BellLabel(args.bell),
                                     trials=args.trials, seed=cell_seed)
            aggregate = run_trials(config, workers=args.workers)
            all_pass = all_pass and aggregate.verdict == "pass"
            rows.append((
                theta, phi,
                family.value if args.mode == "rsp" else "",
                args.bell, args.trials, cell_seed,
                aggregate.exact_delivery_rate, aggregate.mean_fidelity,
                aggregate.cbits_total / aggregate.trials, aggregate.verdict,
            ))
            json_rows.append({
                "theta": theta,
                "phi": phi,
                "family": family.value if args.mode == "rsp" else None,
                "bell": args.bell,
                "trials": args.trials,
                "seed": cell_seed,
                "exact_delivery_rate": aggregate.exact_delivery_rate,
                "mean_fidelity": aggregate.mean_fidelity,
                "cbits_per_run": aggregate.cbits_total / aggregate.trials,
                "verdict": aggregate.verdict,
            })
    if args.format == "csv":
        text = _csv_text(_PREP_CSV_COLUMNS, rows)
    else:
        text = canonical_json({
            "schema_version": SCHEMA_VERSION,
            "command": "sweep",
            "config": {
                "mode": args.mode,
                "grid_theta": len(thetas),
                "grid_phi": len(phis),
                "family": family.value if args.mode == "rsp" else None,
                "bell": args.bell,
                "trials": args.trials,
                "seed": args.seed,
            },
            "rows": json_rows,
            "verdict": "pass" if all_pass else "fail",
        })
    _deliver(text, args.out)
    return 0 if all_pass else 2


def _quote_check() -> int:
    """Print the correction table with how each entry was established."""
    print("undo rotation per shared state (applied on every branch):")
    for label in BellLabel:
        rot = BELL_ROTATIONS[label]
        status = ("identity; the shared state keeps its two-term form in every basis"
                  if rot.label == "I"
                  else "derived: solved from the reconstruction of the shared state")
        print(f"  shared={label.value:<10} undo={rot.label:<3} [{status}]")
    print("family fix on the complement branch (classical bit = 1):")
    print(f"  equatorial: {_EQUATORIAL_FIX.label}   "
          "[verified: restores the relative phase on the equator]")
    print(f"  polar:      {_POLAR_FIX.label}  "
          "[derived: required fidelity 1 across the whole polar circle]")
    print("  arbitrary:  impossible  [complementing an unknown state is anti-unitary]")

    # The often-suggested polar fix X.Y fails; show the worst case explicitly.
    candidate = PAULI_X.matrix @ PAULI_Y.matrix
    worst = 1.0
    worst_theta = 0.0
    for k in range(1, 360):
        theta = k * math.pi / 360.0
        target = make_qubit(theta, 0.0)
        fixed = np.asarray(candidate @ complement(target).vector)
        fid = abs(np.vdot(target.vector, fixed / np.linalg.norm(fixed))) ** 2
        if fid < worst:
            worst, worst_theta = fid, theta
    print(f"  rejected candidate for polar fix: X.Y "
          f"(min fidelity {worst:.6f} at theta={worst_theta:.4f} rad)")
    for which, fix in (("equatorial", _EQUATORIAL_FIX), ("polar", _POLAR_FIX)):
        family = StateFamily(which)
        rule = correction_for(BellLabel.PSI_MINUS, 1, family)
        assert rule.family_fix is fix
        sample = make_qubit(math.pi / 2 if which == "equatorial" else math.pi / 3,
                            1.1 if which == "equatorial" else 0.0)
        fixed = apply_pauli(fix, complement(sample))
        print(f"  check {which}: fidelity after fix = {fidelity(fixed, sample):.15f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.quote_check:
            return _quote_check()
        if args.command is None:
            raise UsageError("a command is required (rsp, measure-sim, teleport, "
                             "bell-check, sweep)")
        if getattr(args, "trials", 1) < 1:
            raise UsageError("--trials must be >= 1")
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        handler = {
            "rsp": cmd_rsp,
            "measure-sim": cmd_measure_sim,
            "teleport": cmd_teleport,
            "bell-check": cmd_bell_check,
            "sweep": cmd_sweep,
        }[args.command]
        return handler(args)
    except (UsageError, FamilyMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
