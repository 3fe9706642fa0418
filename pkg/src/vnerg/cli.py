"""Batch experiment runner: `vnerg <kind> --config PATH --out PATH`.

Parses a problem description, dispatches on the experiment kind and writes
one CSV table per run (temp file plus atomic rename, so a crash never
leaves a partial artifact).  Exit codes: 0 success, 2 when a mathematical
hypothesis fails (NotFaithful / NotInvariant / NotInPHalf, with a
machine-readable reason line), 1 on I/O, parse or validation errors.
The environment variable VNERG_MAX_SETSIZE caps Folner set enumeration.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from .amenable import (
    Heisenberg3,
    ZGroup,
    CyclicGroup,
    average_map,
    build_action,
    folner_boxes,
    folner_defect,
    invariant_expectation,
    tempered_constant,
)
from .config import ExperimentConfig, parse_problem, validate
from .cpmaps import QuantumMap, classify, gns_operator
from .ergodic import (
    cesaro_map,
    conditional_expectation,
    functional_battery,
    predual_distance,
    theorem11_certificate,
)
from .errors import NotFaithful, NotInPHalf, NotInvariant, ParseError, ValidationError
from .linalg import DEFAULT_TOL, Tolerances
from .semigroup import LindbladGenerator, abel_average, semigroup_expectation
from .standard_form import Functional, StandardForm, State

_FLOAT_FMT = "%.12e"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


def _write_csv(path: str, theorem: str, columns, rows):
    lines = [f"theorem,{theorem}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".vnerg-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tolerances(config: ExperimentConfig) -> Tolerances:
    return Tolerances(
        psd_floor=config.tol_psd if config.tol_psd is not None else DEFAULT_TOL.psd_floor,
        eq_rtol=config.tol_eq if config.tol_eq is not None else DEFAULT_TOL.eq_rtol,
        nullspace_rel=DEFAULT_TOL.nullspace_rel)


def _state(config: ExperimentConfig, tol: Tolerances) -> State:
    if "state" in config.matrices:
        return State(config.matrices["state"], tol)
    return State.tracial(config.dim, tol)


def _problem_map(config: ExperimentConfig) -> QuantumMap:
    kraus = config.matrix_group("kraus")
    if kraus:
        return QuantumMap.from_kraus(kraus)
    return QuantumMap(config.matrices["superop"])


def _psi_battery(config: ExperimentConfig):
    psis = config.matrix_group("psi")
    if psis:
        return [Functional(m) for m in psis]
    return functional_battery(config.dim)


def _group(config: ExperimentConfig):
    if config.group == "Z":
        return ZGroup(config.group_param)
    if config.group == "heisenberg":
        return Heisenberg3()
    return CyclicGroup(config.group_param)


def _gns_distance(qmap: QuantumMap, p: np.ndarray, sf: StandardForm,
                  psi: Functional) -> float:
    """||(T - P) f|| for the GNS vector f of the functional's representer."""
    t = gns_operator(qmap, sf)
    f = sf.gns_embed(psi.sigma).reshape(-1)
    return float(np.linalg.norm((t - p) @ f))


def _run_classify(config: ExperimentConfig, out: str, tol: Tolerances):
    state = _state(config, tol)
    report = classify(_problem_map(config), state, trials=config.trials,
                      seed=config.seed, tol=tol)
    columns = ("cp", "unital", "subunital", "invariant", "subinvariant",
               "l2_contraction", "in_P_half", "positivity_samples_passed",
               "ks_samples_passed", "trials", "gns_norm", "choi_min_eig",
               "ks_max_residual")
    _write_csv(out, "Thm2.3", columns, [[getattr(report, c) for c in columns]])


def _run_ergodic(config: ExperimentConfig, out: str, tol: Tolerances):
    state = _state(config, tol)
    qmap = _problem_map(config)
    decomp = conditional_expectation(qmap, state, trials=config.trials,
                                     seed=config.seed, tol=tol)
    sf = StandardForm(state)
    battery = _psi_battery(config)
    rows = []
    for n in config.n_list:
        s_n = cesaro_map(qmap, int(n))
        for idx, psi in enumerate(battery):
            rows.append((int(n), idx, predual_distance(s_n, decomp.E, psi),
                         _gns_distance(s_n, decomp.P, sf, psi)))
    _write_csv(out, "Thm2.3", ("n_or_lambda", "psi_id", "predual_distance",
                               "gns_distance"), rows)


def _run_semigroup(config: ExperimentConfig, out: str, tol: Tolerances):
    state = _state(config, tol)
    gen = LindbladGenerator(config.matrices["hamiltonian"],
                            config.matrix_group("jump"), tol)
    decomp, _ = semigroup_expectation(gen, state, [], tol=tol)
    sf = StandardForm(state)
    battery = _psi_battery(config)
    rows = []
    for lam in config.lambda_list:
        s_lam = abel_average(gen, float(lam))
        for idx, psi in enumerate(battery):
            rows.append((float(lam), idx, predual_distance(s_lam, decomp.E, psi),
                         _gns_distance(s_lam, decomp.P, sf, psi)))
    _write_csv(out, "Thm2.7", ("n_or_lambda", "psi_id", "predual_distance",
                               "gns_distance"), rows)


def _run_group(config: ExperimentConfig, out: str, tol: Tolerances):
    state = _state(config, tol)
    group = _group(config)
    unitaries = {name[len("unitary_"):]: mat for name, mat in config.matrices.items()
                 if name.startswith("unitary_")}
    action = build_action(group, unitaries, state, tol)
    decomp = invariant_expectation(action, state, tol)
    sf = StandardForm(state)
    battery = _psi_battery(config)
    rows = []
    for n in config.n_list:
        avg = average_map(action, folner_boxes(group, int(n)))
        for idx, psi in enumerate(battery):
            rows.append((int(n), idx, predual_distance(avg, decomp.E, psi),
                         _gns_distance(avg, decomp.P, sf, psi)))
    _write_csv(out, "Thm3.2", ("n_or_lambda", "psi_id", "predual_distance",
                               "gns_distance"), rows)


def _run_folner_audit(config: ExperimentConfig, out: str, tol: Tolerances):
    group = _group(config)
    gens = list(group.generators().values())
    rows = []
    sets = [folner_boxes(group, int(n)) for n in config.n_list]
    for i, (n, f) in enumerate(zip(config.n_list, sets)):
        defect = max(float(folner_defect(f, [g])) for g in gens)
        if i == 0:
            ratio = 0.0
        else:
            ratio = float(tempered_constant(sets[: i + 1], i + 1))
        rows.append((int(n), len(f), defect, ratio))
    _write_csv(out, "Thm3.2", ("n", "setsize", "defect_per_generator",
                               "cumulative_tempered_ratio"), rows)


def _run_duality(config: ExperimentConfig, out: str, tol: Tolerances):
    state = _state(config, tol)
    sf = StandardForm(state)
    maps = []
    k = 1
    while config.matrix_group(f"map{k}_kraus"):
        maps.append(QuantumMap.from_kraus(config.matrix_group(f"map{k}_kraus")))
        k += 1
    report = theorem11_certificate(maps, sf, _psi_battery(config),
                                   check_converse=config.check_converse, tol=tol)
    rows = []
    converse = report.converse_max_violation
    for a, b, d_pre, d_strong in report.forward_gap_pairs:
        rows.append((a, b, d_pre, d_strong, report.eq8_max_violation,
                     converse if converse is not None else float("nan")))
    _write_csv(out, "Thm1.1", ("map_i", "map_j", "predual_gap", "strong_gap",
                               "eq8_max_violation", "converse_max_violation"), rows)


_RUNNERS = {
    "classify": _run_classify,
    "ergodic": _run_ergodic,
    "semigroup": _run_semigroup,
    "group": _run_group,
    "folner-audit": _run_folner_audit,
    "duality": _run_duality,
}


def run(config: ExperimentConfig, out: str) -> int:
    tol = _tolerances(config)
    try:
        _RUNNERS[config.kind](config, out, tol)
    except (NotFaithful, NotInvariant, NotInPHalf) as exc:
        print(f"reason={type(exc).__name__} detail={exc}")
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vnerg",
        description="Mean ergodic experiments on matrix algebras; CSV output.")
    parser.add_argument("kind", choices=sorted(_RUNNERS),
                        help="experiment kind (must match the config)")
    parser.add_argument("--config", required=True, help="problem description file")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--tol-psd", type=float, default=None, help="override psd floor")
    parser.add_argument("--tol-eq", type=float, default=None, help="override eq tolerance")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = parse_problem(fh.read())
        if config.kind != args.kind:
            raise ValidationError(
                f"config kind {config.kind!r} does not match command {args.kind!r}")
        if args.seed is not None:
            config.seed = args.seed
        if args.tol_psd is not None:
            config.tol_psd = args.tol_psd
        if args.tol_eq is not None:
            config.tol_eq = args.tol_eq
        validate(config)
    except (OSError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    return run(config, args.out)


if __name__ == "__main__":
    sys.exit(main())
