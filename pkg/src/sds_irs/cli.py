"""Command-line entry point: ``sds-irs <subcommand> [flags]``.

Exit codes: 0 on success, 2 when a precondition is violated, 1 on any other
error.  Cycle types are written ``"2^1 1^2"``.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import shlex
import sys
from fractions import Fraction
from pathlib import Path

from . import harness, sds
from .cycletype import CycleType, class_size, diagonal_embed, sign
from .errors import ValidationError
from .permutation import Permutation, uniform_random_permutation
from .reports import Report, RunManifest, render_report
from .subgroups import normalized_char_montecarlo, parse_subgroup

SEED_ENV = "SDS_IRS_SEED"


def _type(text: str) -> CycleType:
    try:
        return CycleType.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV}, else a random value)")
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="sds-irs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("class-size", parents=[common], help="exact conjugacy class size")
    p.add_argument("--type", type=_type, required=True)

    p = sub.add_parser("embed", parents=[common], help="diagonal embedding of a cycle type")
    p.add_argument("--type", type=_type, required=True)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--spec", type=Path, default=None)
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--to-level", type=int, default=None)

    p = sub.add_parser("char", parents=[common], help="exact IRS character values")
    p.add_argument("--irs", required=True, help="comma list of trivial|alt|full|sigma:r|sigmatilde:r")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--type", type=_type, required=True)
    p.add_argument("--level", type=int, required=True)

    p = sub.add_parser("mc-char", parents=[common], help="Monte Carlo normalized character")
    p.add_argument("--subgroup", required=True,
                   help="sym|alt|pointwise+:r|pointwise-:r|intransitive:u|wreath:d")
    p.add_argument("--type", type=_type, required=True)

    p = sub.add_parser("pet", parents=[common], help="finite-level orbit averages")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--type", type=_type, required=True)
    p.add_argument("--level", type=int, required=True, help="level of g")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also enumerate tuples when |X_n| <= 12")

    p = sub.add_parser("sample-irs", parents=[common], help="draw subgroups from sigma_r / sigmatilde_r")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--irs", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--draws", type=int, default=1)

    for name, param in (("verify-block", "--d"), ("verify-int", "--r")):
        p = sub.add_parser(name, parents=[common], help=f"moments and trend for {name[7:]} experiments")
        p.add_argument("--experiment", type=Path, default=None, help="JSON experiment definition")
        p.add_argument("--m", type=int, default=None)
        p.add_argument(param, type=_int_list, default=None,
                       help="one value, or several for a trend table")
        p.add_argument("--c", default=None, help="fraction of nontrivial-cycle representatives")
        p.add_argument("--type", type=_type, default=None, help="base type, embedded to degree m")
        p.add_argument("--enumerate", action="store_true", help="exact enumeration (m <= 8)")
        if name == "verify-block":
            p.add_argument("--r", type=int, default=0)

    p = sub.add_parser("crossover", parents=[common], help="vanishing-bound crossover ell*")
    p.add_argument("--type", type=_type, required=True)
    p.add_argument("--case", default="primitive", help="primitive | wreath:d")
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("psd-check", parents=[common], help="positive-definiteness of characters")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--irs", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--sets", type=int, default=100)
    p.add_argument("--size", type=int, default=6)

    p = sub.add_parser("probe-unique", parents=[common], help="unique-ergodicity probe")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--m-small", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--parity", choices=("+", "-"), default="+")
    return parser


# --------------------------------------------------------------------------
# subcommands; each returns (Report, spec or None)


def _cmd_class_size(a, seed):
    t = a.type
    data = {"cycle_type": str(t), "degree": t.degree, "class_size": class_size(t),
            "sign": sign(t)}
    return Report("class-size", data, [data]), None


def _cmd_embed(a, seed):
    t = a.type
    spec = None
    if a.spec is not None:
        spec = sds.SdsSpec.load(a.spec)
        if a.level is None or a.to_level is None:
            raise ValidationError("--spec needs --level and --to-level")
        el = sds.embed_level(spec, sds.element(spec, a.level, t), a.to_level)
        image, ell = el.ctype, spec.ratio(a.level, a.to_level)
    else:
        if a.ell is None:
            raise ValidationError("give --ell or --spec/--level/--to-level")
        ell, image = a.ell, diagonal_embed(t, a.ell)
    data = {"cycle_type": str(t), "ell": ell, "image": str(image),
            "fixed_fraction": t.fixed_fraction(), "image_fixed_fraction": image.fixed_fraction()}
    return Report("embed", data, [data]), spec


def _cmd_char(a, seed):
    spec = sds.SdsSpec.load(a.spec)
    g = sds.element(spec, a.level, a.type)
    rows = []
    for text in a.irs.split(","):
        label = sds.IrsLabel.parse(text)
        value = sds.irs_character(spec, label, g)
        rows.append({"cycle_type": str(a.type), "level": a.level, "irs_label": str(label),
                     "exact_value": value, "float_value": float(value)})
    return Report("char", {"rows": rows}, rows), spec


def _cmd_mc_char(a, seed):
    H = parse_subgroup(a.subgroup, a.type.degree)
    rep = normalized_char_montecarlo(H, Permutation.canonical(a.type), a.trials, seed, a.workers)
    data = rep.to_dict()
    return Report("mc-char", data, [data]), None


def _cmd_pet(a, seed):
    spec = sds.SdsSpec.load(a.spec)
    g = sds.element(spec, a.level, a.type)
    limit = sds.irs_character(spec, sds.IrsLabel("sigma", a.r), g)
    rows = []
    for n in range(a.level, spec.top + 1):
        if spec.level_size(n) < a.r:
            continue
        value = sds.pet_orbit_average(spec, g, a.r, n)
        row = {"level": n, "size": spec.level_size(n), "r": a.r, "exact_value": value,
               "float_value": float(value), "limit": limit, "gap": float(limit - value)}
        if a.oracle:
            row["oracle"] = (sds.pet_orbit_enumeration(spec, g, a.r, n)
                             if spec.level_size(n) <= 12 else None)
        rows.append(row)
    return Report("pet", {"cycle_type": str(a.type), "rows": rows}, rows), spec


def _cmd_sample_irs(a, seed):
    spec = sds.SdsSpec.load(a.spec)
    label = sds.IrsLabel.parse(a.irs)
    rows = []
    for i in range(a.draws):
        H = sds.sample_irs_subgroup(spec, label, a.level, seed, draw=i)
        pts = sorted(H.fixed)
        rows.append({"draw": i, "level": a.level, "irs_label": str(label), "parity": H.parity,
                     "fixed": " ".join(map(str, pts)),
                     "fixed_coords": " ".join(
                         ".".join(map(str, spec.point_coords(p, a.level))) for p in pts)})
    return Report("sample-irs", {"rows": rows}, rows), spec


def _experiments(a, block: bool):
    if a.experiment is not None:
        try:
            defs = json.loads(a.experiment.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read experiment file: {exc}") from None
        defs = defs if isinstance(defs, list) else [defs]
        return [harness.experiment_from_dict(d) for d in defs]
    params = a.d if block else a.r
    if a.m is None or params is None:
        raise ValidationError(f"give --experiment or --m and {'--d' if block else '--r'}")
    if a.type is not None:
        if a.m % a.type.degree:
            raise ValidationError(f"m = {a.m} is not a multiple of the type degree {a.type.degree}")
        g = diagonal_embed(a.type, a.m // a.type.degree)
    elif a.c is not None:
        try:
            c = Fraction(a.c)
        except ValueError:
            raise ValidationError(f"bad --c {a.c!r}") from None
        g = harness.type_for_fraction(c, a.m)
    else:
        raise ValidationError("give --c or --type")
    if block:
        return [harness.BlockExperiment(a.m, d, a.r, g) for d in params]
    return [harness.IntransitiveExperiment(a.m, r, g) for r in params]


def _verify(a, seed, block: bool):
    exps = _experiments(a, block)
    name = "verify-block" if block else "verify-int"
    if len(exps) > 1:
        trend = harness.probability_trend(exps, a.trials, seed, a.workers)
        data = trend.to_dict()
        return Report(name + ":trend", data, data["rows"]), None
    exp = exps[0]
    rep = harness.run_moments(exp, a.trials, seed, a.workers)
    data = rep.to_dict()
    if a.enumerate:
        en = harness.enumerate_moments(exp)
        data["enumeration"] = {"mean": en.mean, "second_moment": en.second,
                               "P_positive": en.p_positive}
    return Report(name, data, [data]), None


def _cmd_crossover(a, seed):
    case_text = a.case.strip().lower()
    if case_text == "primitive":
        case = harness.PrimitiveCase()
    elif case_text.startswith("wreath:") and case_text[7:].isdigit():
        case = harness.WreathCase(int(case_text[7:]))
    else:
        raise ValidationError(f"unknown case {a.case!r}")
    res = harness.vanishing_crossover(a.type, case, a.epsilon)
    data = {"cycle_type": str(a.type), "case": case_text, "epsilon": a.epsilon, **res.to_dict()}
    return Report("crossover", data, [data]), None


def _cmd_psd(a, seed):
    spec = sds.SdsSpec.load(a.spec)
    label = sds.IrsLabel.parse(a.irs)
    label.validate(spec)
    mins = sds.psd_min_eigenvalues(spec, label, a.level, a.sets, a.size, seed)
    rows = [{"set": i, "min_eigenvalue": float(v)} for i, v in enumerate(mins)]
    data = {"irs_label": str(label), "level": a.level, "sets": a.sets, "size": a.size,
            "min_eigenvalue": float(mins.min()), "tolerance": 1e-9,
            "passed": bool(mins.min() >= -1e-9), "per_set": rows}
    return Report("psd-check", data, rows), spec


def _cmd_probe(a, seed):
    spec = sds.SdsSpec.load(a.spec)
    size = spec.level_size(a.level)
    H = sds.PointwiseStabilizer(size, frozenset(range(a.r)), a.parity)
    w = uniform_random_permutation(size, seed)
    H2 = H.conjugate(w)
    small = spec.level_size(a.m_small)
    rows = []
    for i, grp in enumerate(sds.all_subgroups(small)):
        L = sds.level_subgroup(spec, a.m_small, grp)
        vals = []
        for K in (H, H2):
            v = sds.unique_ergodicity_probe(spec, K, a.level, a.m_small, L, a.mode,
                                            a.trials, seed)
            vals.append(v if isinstance(v, Fraction) else v.freq)
        rows.append({"L_index": i, "L_order": len(L), "fraction_H": vals[0],
                     "fraction_conjugate": vals[1], "equal": vals[0] == vals[1]})
    data = {"H": H.describe(), "conjugate": H2.describe(), "m_small": a.m_small,
            "mode": a.mode, "rows": rows}
    return Report("probe-unique", data, rows), spec


COMMANDS = {
    "class-size": _cmd_class_size,
    "embed": _cmd_embed,
    "char": _cmd_char,
    "mc-char": _cmd_mc_char,
    "pet": _cmd_pet,
    "sample-irs": _cmd_sample_irs,
    "verify-block": lambda a, s: _verify(a, s, True),
    "verify-int": lambda a, s: _verify(a, s, False),
    "crossover": _cmd_crossover,
    "psd-check": _cmd_psd,
    "probe-unique": _cmd_probe,
}

DEFAULT_FORMAT = {"char": "csv"}


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    return secrets.randbits(32)


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.trials < 1:
            raise ValidationError("--trials must be >= 1")
        seed = resolve_seed(args.seed)
        report, spec = COMMANDS[args.command](args, seed)
        report.manifest = RunManifest(shlex.join(["sds-irs", *argv]), seed,
                                      None if spec is None else spec.digest())
        blob = render_report(report, args.format or DEFAULT_FORMAT.get(args.command, "json"))
        if args.out is None:
            sys.stdout.write(blob.decode())
        else:
            args.out.write_bytes(blob)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as an internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
