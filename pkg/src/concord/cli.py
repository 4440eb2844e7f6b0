"""Command-line interface.

    concord measure --copula gaussian:-0.5 --spec gini
    concord measure --data obs.csv --columns x,y --spec spearman
    concord matrix --data obs.csv --spec beta:0.3 --out kappa.csv
    concord compat --matrix kappa.csv
    concord check-transform --g1 a.csv --g2 b.csv
    concord thresholds --d 4

Exit status is 0 on success, 2 for invalid input (bad flags, malformed
files, violated invariants, capacity limits) and 3 for numerical failures.
``--format json`` prints every number with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from .compatibility import (
    KappaMatrix,
    Status,
    classify_gamma_matrix,
    equicorrelation_thresholds,
    estimate_matrix,
)
from .copulas import (
    Comonotone,
    ConvexMixture,
    Copula,
    Countermonotone,
    Gaussian,
    Independence,
    pseudo_observations,
)
from .distributions import (
    StandardGaussian,
    Tabulated,
    ThreePoint,
    TransformPair,
    Uniform01,
    check_transform_pair,
    load_table,
)
from .errors import CapacityError, DomainError, NumericalError
from .measures import (
    GINI_DENSITY,
    Atoms,
    BetaP,
    Blomqvist,
    Density,
    Estimate,
    GeneralizedGini,
    Gini,
    GTransformed,
    MeasureSpec,
    Method,
    Spearman,
    estimate,
    g_transformed_rho,
    kappa,
)
from .numerics import RandomSource

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
SEED_ENV = "CONCORD_SEED"


# ---------------------------------------------------------------------------
# Parsing of option values
# ---------------------------------------------------------------------------


def _number(text: str, what: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise DomainError(f"{what}: {text!r} is not a number") from None
    if not math.isfinite(x):
        raise DomainError(f"{what}: {text!r} is not finite")
    return x


_BASE_COPULAS = {
    "independence": Independence,
    "pi": Independence,
    "comonotone": Comonotone,
    "m": Comonotone,
    "countermonotone": Countermonotone,
    "w": Countermonotone,
}


def _single_copula(text: str) -> Copula:
    name, _, arg = text.strip().lower().partition(":")
    if name in _BASE_COPULAS and not arg:
        return _BASE_COPULAS[name]()
    if name == "gaussian" and arg:
        return Gaussian(_number(arg, "gaussian rho"))
    raise DomainError(
        f"unknown copula {text!r}; expected independence, comonotone, countermonotone or gaussian:RHO"
    )


# split "0.3*gaussian:0.5+0.7*m" at '+' signs that start a new term, not exponents
_TERM_SPLIT = re.compile(r"\+(?=\s*(?:[0-9.]+\s*\*|[a-zA-Z]))")


def parse_copula(text: str) -> Copula:
    """``NAME``, ``gaussian:RHO`` or a mixture ``w1*C1+w2*C2+...``."""
    terms = [t for t in _TERM_SPLIT.split(text) if t.strip()]
    if len(terms) == 1 and "*" not in terms[0]:
        return _single_copula(terms[0])
    comps = []
    for term in terms:
        weight, star, body = term.partition("*")
        if not star:
            raise DomainError(f"mixture term {term!r} needs the form WEIGHT*COPULA")
        comps.append((_number(weight, "mixture weight"), _single_copula(body)))
    return ConvexMixture(tuple(comps))


def parse_nu(text: str):
    """Mixing measure from JSON: ``{"atoms": [[p, w], ...]}``, ``{"density": "gini"}``
    or ``{"density_table": PATH}``. A leading ``@`` reads the JSON from a file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"--nu is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None
    if not isinstance(obj, dict) or len(obj) != 1:
        raise DomainError('--nu must be an object with exactly one of "atoms", "density", "density_table"')
    (key, value), = obj.items()
    if key == "atoms":
        try:
            atoms = tuple((float(p), float(w)) for p, w in value)
        except (TypeError, ValueError):
            raise DomainError('"atoms" must be a list of [p, w] pairs') from None
        return Atoms(atoms)
    if key == "density":
        if value != "gini":
            raise DomainError(f"unknown builtin density {value!r}; the builtin is \"gini\"")
        return GINI_DENSITY
    if key == "density_table":
        nodes, vals = load_table(value)
        return Density.from_table(nodes, vals, name=str(value))
    raise DomainError(f"unknown --nu key {key!r}")


def parse_spec(text: str, nu: str | None = None) -> MeasureSpec:
    """``spearman``, ``blomqvist``, ``beta:P``, ``gini``, ``ggini`` (with ``--nu``)
    or ``g:uniform``, ``g:gaussian``, ``g:threepoint:P``, ``g:table:PATH``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    if head == "spearman" and not rest:
        return Spearman()
    if head == "blomqvist" and not rest:
        return Blomqvist()
    if head == "beta" and rest:
        return BetaP(_number(rest, "beta p"))
    if head == "gini" and not rest:
        return Gini()
    if head == "ggini" and not rest:
        if nu is None:
            raise DomainError("spec ggini needs --nu")
        return GeneralizedGini(parse_nu(nu))
    if head == "g" and rest:
        kind, _, arg = rest.partition(":")
        kind = kind.lower()
        if kind == "uniform" and not arg:
            return GTransformed(Uniform01())
        if kind == "gaussian" and not arg:
            return GTransformed(StandardGaussian())
        if kind == "threepoint" and arg:
            return GTransformed(ThreePoint(_number(arg, "three-point p")))
        if kind == "table" and arg:
            nodes, vals = load_table(arg)
            return GTransformed(Tabulated(nodes, vals))
    raise DomainError(
        f"unknown measure spec {text!r}; expected spearman, blomqvist, beta:P, gini, ggini, "
        "g:uniform, g:gaussian, g:threepoint:P or g:table:PATH"
    )


def _seed(args) -> int | None:
    raw = args.seed if args.seed is not None else os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise DomainError(f"seed {raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed {seed} is not a 64-bit unsigned integer")
    return seed


# ---------------------------------------------------------------------------
# File readers
# ---------------------------------------------------------------------------


def read_data_csv(path, columns: list[str] | None = None) -> tuple[list[str], np.ndarray]:
    """Numeric CSV with a header row; returns the selected column names and values."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path}: empty file, a header row is required")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DomainError(f"{path}:1: duplicate column names in header")
    if all(_is_number(h) for h in header):
        raise DomainError(f"{path}:1: expected a header row of column names, got numbers")
    names = columns or header
    missing = [c for c in names if c not in header]
    if missing:
        raise DomainError(f"{path}:1: no column named {', '.join(map(repr, missing))}; header is {header}")
    idx = [header.index(c) for c in names]
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DomainError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            data.append([float(row[i]) for i in idx])
        except ValueError:
            raise DomainError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
        if not all(math.isfinite(x) for x in data[-1]):
            raise DomainError(f"{path}:{lineno}: non-finite value in {row!r}")
    if not data:
        raise DomainError(f"{path}: no data rows after the header")
    return names, np.array(data)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_matrix_csv(path) -> np.ndarray:
    """Square numeric CSV without a header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DomainError(f"{path}:{lineno}: non-numeric entry in {row!r} (matrix files have no header)") from None
            if rows and len(rows[-1]) != len(rows[0]):
                raise DomainError(f"{path}:{lineno}: expected {len(rows[0])} entries, got {len(rows[-1])}")
    if not rows:
        raise DomainError(f"{path}: empty matrix file")
    M = np.array(rows)
    if M.shape[0] != M.shape[1]:
        raise DomainError(f"{path}: matrix must be square, got {M.shape[0]} rows of {M.shape[1]}")
    return M


def write_matrix_csv(path, M) -> None:
    with open(path, "w", newline="") as fh:
        for row in np.asarray(M):
            fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


# ---------------------------------------------------------------------------
# Commands; each returns a report dict
# ---------------------------------------------------------------------------


def _spec_report(spec: MeasureSpec) -> dict:
    out = {"name": spec.label}
    if isinstance(spec, BetaP):
        out["p"] = spec.p
    elif isinstance(spec, GTransformed):
        out["distribution"] = _distribution_report(spec.G)
    elif isinstance(spec, GeneralizedGini):
        nu = spec.nu
        out["nu"] = {"atoms": [list(a) for a in nu.atoms]} if isinstance(nu, Atoms) else {"density": nu.name}
    return out


def _distribution_report(G) -> dict:
    out = {"name": G.name}
    if isinstance(G, ThreePoint):
        out["p"] = G.p
    elif isinstance(G, Tabulated):
        out["nodes"] = int(len(G.nodes))
    return out


_EXACT_METHODS = {
    Spearman: Method.QUADRATURE,
    Blomqvist: Method.CLOSED_FORM,
    BetaP: Method.CLOSED_FORM,
    Gini: Method.QUADRATURE,
}


def _single_distribution(spec: MeasureSpec):
    if isinstance(spec, Spearman):
        return Uniform01()
    if isinstance(spec, Blomqvist):
        return ThreePoint(0.5)
    if isinstance(spec, BetaP):
        return ThreePoint(spec.p)
    if isinstance(spec, GTransformed):
        return spec.G
    raise DomainError(f"Monte Carlo evaluation is only available for G-transformed rank correlations, not {spec.label}")


def cmd_measure(args) -> dict:
    spec = parse_spec(args.spec, args.nu)
    report = {"command": "measure", "spec": _spec_report(spec)}
    if (args.copula is None) == (args.data is None):
        raise DomainError("measure needs exactly one of --copula or --data")
    if args.data is not None:
        cols = _columns(args.columns)
        names, X = read_data_csv(args.data, cols)
        if X.shape[1] != 2:
            raise DomainError(f"measure needs exactly two data columns, got {len(names)}; use --columns A,B")
        report["source"] = {"data": str(args.data), "columns": names}
        est = estimate(pseudo_observations(X), spec)
    else:
        C = parse_copula(args.copula)
        report["source"] = {"copula": args.copula}
        if args.method == "monte-carlo":
            seed = _seed(args)
            if seed is None:
                raise DomainError(f"Monte Carlo evaluation samples and needs --seed or {SEED_ENV}")
            report["seed"] = seed
            est = g_transformed_rho(
                C, _single_distribution(spec), args.n_mc, RandomSource(seed), method="monte_carlo"
            )
        elif isinstance(spec, GTransformed):
            est = g_transformed_rho(C, spec.G)
        else:
            method = _EXACT_METHODS.get(type(spec))
            if method is None:
                method = Method.CLOSED_FORM if isinstance(spec.nu, Atoms) else Method.QUADRATURE
            est = Estimate(kappa(C, spec), method=method)
    report.update(value=est.value, std_error=est.std_error, n=est.n, method=est.method.value)
    return report


def _columns(text: str | None) -> list[str] | None:
    if text is None:
        return None
    cols = [c.strip() for c in text.split(",") if c.strip()]
    if not cols:
        raise DomainError("--columns is empty")
    return cols


def cmd_matrix(args) -> dict:
    spec = parse_spec(args.spec, args.nu)
    names, X = read_data_csv(args.data, _columns(args.columns))
    if X.shape[1] < 2:
        raise DomainError("matrix needs at least two data columns")
    est = estimate_matrix(X, spec)
    if args.out:
        write_matrix_csv(args.out, est.matrix.entries)
    return {
        "command": "matrix",
        "spec": _spec_report(spec),
        "columns": names,
        "n": est.n,
        "matrix": est.matrix.entries.tolist(),
        "std_error": est.std_error.tolist(),
    }


def cmd_compat(args) -> dict:
    P = KappaMatrix(read_matrix_csv(args.matrix))
    v = classify_gamma_matrix(P, args.tol)
    cut = {"status": v.cut_polytope.status.value, "residual": v.cut_polytope.residual}
    if v.cut_polytope.status is Status.MEMBER:
        cut["certificate"] = [
            {"b": str(b), "weight": w} for b, w in sorted(v.cut_polytope.certificate.items(), key=lambda kv: str(kv[0]), reverse=True)
        ]
    return {
        "command": "compat",
        "d": P.d,
        "elliptope": {"status": v.elliptope.status.value, "min_eigenvalue": v.elliptope.min_eigenvalue},
        "cut_polytope": cut,
        "gamma_class": v.gamma_class.value,
        "note": v.note,
    }


def cmd_check_transform(args) -> dict:
    pair = TransformPair.from_csv(args.g1, args.g2)
    v = check_transform_pair(pair, args.tol)
    return {
        "command": "check-transform",
        "verdict": v.verdict.value,
        "distribution": None if v.distribution is None else _distribution_report(v.distribution),
        "flipped": v.flipped,
        "detail": v.detail,
    }


def cmd_thresholds(args) -> dict:
    ell, cut = equicorrelation_thresholds(args.d, args.tol)
    return {"command": "thresholds", "d": args.d, "elliptope_min": ell, "cut_polytope_min": cut}


COMMANDS = {
    "measure": cmd_measure,
    "matrix": cmd_matrix,
    "compat": cmd_compat,
    "check-transform": cmd_check_transform,
    "thresholds": cmd_thresholds,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def to_json(obj) -> str:
    """JSON text with floats written to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def fmt(x: float | None) -> str:
    if x is None:
        return "-"
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _spec_text(spec: dict) -> str:
    if "p" in spec:
        return f"{spec['name']}(p={spec['p']:g})"
    if "distribution" in spec:
        d = spec["distribution"]
        return f"{spec['name']}[{d['name']}" + (f", p={d['p']:g}" if "p" in d else "") + "]"
    return spec["name"]


def _matrix_lines(M, labels) -> list[str]:
    width = max(8, max(len(c) for c in labels) + 1)
    lines = [" " * width + "".join(f"{c:>{width}}" for c in labels)]
    for name, row in zip(labels, M):
        lines.append(f"{name:<{width}}" + "".join(f"{fmt(x):>{width}}" for x in row))
    return lines


def render_human(report: dict) -> str:
    cmd = report["command"]
    if cmd == "measure":
        line = f"{_spec_text(report['spec'])} = {fmt(report['value'])}"
        if report["std_error"] is not None:
            line += f" (std error {fmt(report['std_error'])}, n = {report['n']})"
        return line + f"  [{report['method']}]"
    if cmd == "matrix":
        lines = [f"{_spec_text(report['spec'])} matrix, n = {report['n']}"]
        lines += _matrix_lines(report["matrix"], report["columns"])
        lines.append("std errors")
        lines += _matrix_lines(report["std_error"], report["columns"])
        return "\n".join(lines)
    if cmd == "compat":
        ell, cut = report["elliptope"], report["cut_polytope"]
        lines = [
            f"elliptope: {ell['status']} (min eigenvalue {fmt(ell['min_eigenvalue'])})",
            f"cut polytope: {cut['status']}",
        ]
        for item in cut.get("certificate", []):
            lines.append(f"  b = {item['b']}  weight {fmt(item['weight'])}")
        lines.append(f"gamma class: {report['gamma_class']}")
        if report["note"]:
            lines.append(f"note: {report['note']}")
        return "\n".join(lines)
    if cmd == "check-transform":
        line = report["verdict"]
        dist = report["distribution"]
        if dist is not None:
            line += f" ({dist['name']}" + (f", p={fmt(dist['p'])}" if "p" in dist else "") + ")"
        if report["flipped"]:
            line += ", after flipping both signs"
        if report["detail"]:
            line += f"\n{report['detail']}"
        return line
    if cmd == "thresholds":
        return (
            f"d = {report['d']}\n"
            f"elliptope minimum: {report['elliptope_min']:.6f}\n"
            f"cut polytope minimum: {report['cut_polytope_min']:.6f}"
        )
    raise ValueError(f"no renderer for {cmd!r}")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concord", description="Degree-one concordance measures and matrix compatibility.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default="human", help="output format (default: human)")
    sub = parser.add_subparsers(dest="command", required=True)

    def spec_args(p):
        p.add_argument("--spec", required=True, help="spearman, blomqvist, beta:P, gini, ggini, g:uniform, g:gaussian, g:threepoint:P, g:table:PATH")
        p.add_argument("--nu", help='mixing measure for ggini as JSON, e.g. \'{"atoms": [[0.25, 1]]}\' or @file.json')

    m = sub.add_parser("measure", parents=[common], help="compute a measure for a copula or a bivariate data file")
    m.add_argument("--copula", help="independence, comonotone, countermonotone, gaussian:RHO or w1*C1+w2*C2")
    m.add_argument("--data", type=Path, help="CSV with a header row")
    m.add_argument("--columns", help="comma-separated column names (two for measure)")
    spec_args(m)
    m.add_argument("--method", choices=("exact", "monte-carlo"), default="exact")
    m.add_argument("--n-mc", type=int, default=100_000, help="Monte Carlo sample size")
    m.add_argument("--seed", help=f"64-bit seed for Monte Carlo (default: ${SEED_ENV})")

    x = sub.add_parser("matrix", parents=[common], help="estimate the pairwise matrix of a measure from a data file")
    x.add_argument("--data", type=Path, required=True, help="CSV with a header row")
    x.add_argument("--columns", help="comma-separated column names (default: all)")
    spec_args(x)
    x.add_argument("--out", type=Path, help="also write the matrix as a header-less CSV")

    c = sub.add_parser("compat", parents=[common], help="classify a candidate matrix")
    c.add_argument("--matrix", type=Path, required=True, help="square CSV without header")
    c.add_argument("--tol", type=float, default=1e-9)

    t = sub.add_parser("check-transform", parents=[common], help="decide whether a transform pair induces a measure of concordance")
    t.add_argument("--g1", type=Path, required=True, help="two-column CSV: probability, value")
    t.add_argument("--g2", type=Path, required=True, help="two-column CSV on the same grid")
    t.add_argument("--tol", type=float, default=1e-6)

    h = sub.add_parser("thresholds", parents=[common], help="smallest equicorrelation inside the elliptope and the cut polytope")
    h.add_argument("--d", type=int, required=True)
    h.add_argument("--tol", type=float, default=1e-7)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(to_json(report) if args.format == "json" else render_human(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
