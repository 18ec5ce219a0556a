"""``conewise`` command line.

Exit codes: 0 pass, 1 falsified, 2 input error, 3 undecided.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from .cover import CoverInvariantError, canonicalize, certify_order_density, cover_report
from .norms import SUP, NormInputError, NormSpec
from .operators import (
    LinOp,
    OperatorInputError,
    center_bound_check,
    cross_validated_dp,
    is_bipositive,
    is_disjointness_preserving,
    is_local,
    is_positive,
    positive_off_diagonal_pair,
)
from .semigroups import _plain
from .spaces import ConeError, SpaceFormatError, Tri, load_space
from .suites import SUITES, ConfigError, SuiteConfig, UnknownSuite, run_suite

EXIT_PASS, EXIT_FALSE, EXIT_INPUT, EXIT_UNDECIDED = 0, 1, 2, 3
FORMATS = ("json", "csv", "table")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    space: str | None = None
    op: str | None = None
    norm: str | None = None
    suite: str | None = None
    config: str | None = None
    seed: int = 0
    tol: float | None = None
    exact_rational: bool = False
    format: str = "json"
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise InputError(f"unknown run-config fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        # paths are recorded by file name so reports do not depend on the working directory
        d = asdict(self)
        for k in ("space", "op", "norm", "config", "out"):
            if d[k] is not None:
                d[k] = Path(d[k]).name
        return d


def _threads() -> int:
    raw = os.environ.get("CONEWISE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"CONEWISE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InputError("CONEWISE_THREADS must be >= 1")
    return n


def _read_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_operator(path: str, space) -> LinOp:
    data = _read_json(path, "operator")
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    unknown = set(data) - {"matrix", "space", "domain_basis"}
    if unknown:
        raise InputError(f"{path}: unknown fields {sorted(unknown)}")
    if "matrix" not in data:
        raise InputError(f"{path}: missing field 'matrix'")
    if data.get("space") not in (None, space.name):
        raise InputError(f"{path}: operator is for space {data['space']!r}, got {space.name!r}")
    try:
        A = np.array(data["matrix"], dtype=float)
        D = data.get("domain_basis")
        D = None if D is None else np.array(D, dtype=float).T
        return LinOp(A, space, D)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_space(path: str):
    if path is None:
        raise InputError("--space is required")
    if not Path(path).exists():
        raise InputError(f"space file not found: {path}")
    return load_space(path)


def _emit(report: dict, rows: list, fmt: str, out: str | None):
    if fmt == "json":
        text = json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        cols = sorted({k for r in rows for k in r})
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(_plain(v)) if isinstance(v, (dict, list)) else _plain(v)
                        for k, v in r.items()})
        text = buf.getvalue()
    else:
        cols = sorted({k for r in rows for k in r if not isinstance(r[k], (dict, list))})
        widths = {c: max(len(c), *(len(str(_plain(r.get(c, "")))) for r in rows)) for c in cols} if rows else {}
        lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
        for r in rows:
            lines.append("  ".join(str(_plain(r.get(c, ""))).ljust(widths[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _guard(fn):
    # map domain errors onto the exit-code contract
    def run(*args, **kw):
        try:
            return fn(*args, **kw)
        except (InputError, SpaceFormatError, OperatorInputError, NormInputError, ConfigError) as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except UnknownSuite as exc:
            click.echo(f"input error: {exc.args[0]}", err=True)
            sys.exit(EXIT_INPUT)

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


_common = [
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--tol", type=float, default=None, help="override the zero tolerance"),
    click.option("--exact-rational", is_flag=True, help="adjudicate undecided oracle calls in rational arithmetic"),
    click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True),
    click.option("--out", type=click.Path(dir_okay=False), default=None),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main():
    """Order-theoretic checks on polyhedral ordered spaces."""


@main.command("check-space")
@click.option("--space", "space_path", required=True, type=click.Path(dir_okay=False))
@click.option("--samples", type=int, default=256, show_default=True)
@common
@_guard
def check_space(space_path, samples, seed, tol, exact_rational, fmt, out):
    """Validate a space file and certify its lattice cover."""
    _threads()
    cfg = RunConfig("check-space", space=space_path, seed=seed, tol=tol, exact_rational=exact_rational,
                    format=fmt, out=out)
    report = {"config": cfg.to_dict()}
    try:
        space = _load_space(space_path)
    except ConeError as exc:
        report.update(status="fail", reason=str(exc))
        _emit(report, [{"check": "cone", "verdict": "false", "reason": str(exc)}], fmt, out)
        sys.exit(EXIT_FALSE)
    try:
        cov = canonicalize(space)
    except CoverInvariantError as exc:
        report.update(status="fail", reason=str(exc))
        _emit(report, [{"check": "cover", "verdict": "false"}], fmt, out)
        sys.exit(EXIT_FALSE)
    dens = certify_order_density(cov, samples=samples, seed=seed)
    cov = type(cov)(cov.space, cov.source, cov.kept, cov.removed, dens)
    report.update(cover_report(cov), dim=space.n, pointed=True, generating=True,
                  status="pass" if dens.passed else "fail")
    rows = [{"check": "pointed", "verdict": "true"}, {"check": "generating", "verdict": "true"},
            {"check": "order_density", "verdict": "true" if dens.passed else "false",
             "samples": dens.samples}]
    _emit(report, rows, fmt, out)
    sys.exit(EXIT_PASS if dens.passed else EXIT_FALSE)


PREDICATES = ("positive", "bipositive", "local", "dp", "pod", "center")


@main.command("operator")
@click.option("--space", "space_path", required=True, type=click.Path(dir_okay=False))
@click.option("--op", "op_path", required=True, type=click.Path(dir_okay=False))
@click.option("--norm", "norm_path", default=None, type=click.Path(dir_okay=False))
@click.option("--positive", is_flag=True)
@click.option("--bipositive", is_flag=True)
@click.option("--local", is_flag=True)
@click.option("--dp", is_flag=True, help="disjointness preserving")
@click.option("--pod", is_flag=True, help="positive-off-diagonal condition")
@click.option("--center", is_flag=True, help="center bound (lattices only)")
@click.option("--method", type=click.Choice(("exact", "sampled", "cross")), default="exact", show_default=True)
@click.option("--pairs", type=int, default=1000, show_default=True)
@common
@_guard
def operator_cmd(space_path, op_path, norm_path, positive, bipositive, local, dp, pod, center, method, pairs,
                 seed, tol, exact_rational, fmt, out):
    """Run operator predicates; all flags off means all predicates."""
    _threads()
    cfg = RunConfig("operator", space=space_path, op=op_path, norm=norm_path, seed=seed, tol=tol,
                    exact_rational=exact_rational, format=fmt, out=out)
    try:
        space = _load_space(space_path)
    except ConeError as exc:
        raise InputError(str(exc)) from None
    space = canonicalize(space).space
    op = load_operator(op_path, space)
    norm = SUP if norm_path is None else NormSpec.from_dict(_read_json(norm_path, "norm"))
    chosen = [p for p, on in zip(PREDICATES, (positive, bipositive, local, dp, pod, center)) if on] or list(PREDICATES)
    kw = {} if tol is None else {"tol": tol}
    rows, verdicts = [], []
    for p in chosen:
        if p == "positive":
            v = is_positive(op, exact=exact_rational)
        elif p == "bipositive":
            v = is_bipositive(op)
        elif p == "local":
            if method == "cross":
                ex, sa = is_local(op, exact=exact_rational, **kw), is_local(op, "sampled", pairs=pairs, seed=seed,
                                                                           exact=exact_rational, **kw)
                v = ex if ex.value is sa.value or ex.value is Tri.FALSE else sa
            else:
                v = is_local(op, method, pairs=pairs, seed=seed, exact=exact_rational, **kw)
        elif p == "dp":
            if method == "cross":
                v = cross_validated_dp(op, pairs=pairs, seed=seed, exact=exact_rational)
            else:
                v = is_disjointness_preserving(op, method, pairs=pairs, seed=seed, exact=exact_rational, **kw)
        elif p == "pod":
            v = positive_off_diagonal_pair(op, **kw)
        else:
            rep = center_bound_check(op, norm)
            if rep["status"] == "not applicable":
                rows.append({"predicate": p, "verdict": "not applicable", "certificate": rep})
                continue
            val = Tri.of(bool(rep.get("passed"))) if "passed" in rep else Tri.of(False)
            rows.append({"predicate": p, "verdict": val.value, "certificate": rep})
            verdicts.append(val)
            continue
        rows.append({"predicate": p, "verdict": v.value.value, "method": v.method, "certificate": v.certificate})
        verdicts.append(v.value)
    status = "undecided" if Tri.UNDECIDED in verdicts else "fail" if Tri.FALSE in verdicts else "pass"
    _emit({"config": cfg.to_dict(), "space": space.name, "status": status, "results": rows}, rows, fmt, out)
    sys.exit({"pass": EXIT_PASS, "fail": EXIT_FALSE, "undecided": EXIT_UNDECIDED}[status])


@main.command("suite")
@click.argument("name")
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False),
              help="JSON with seed, lambdas, t_grid, spaces, operators, pairs")
@click.option("--space", "space_path", default=None, type=click.Path(dir_okay=False))
@click.option("--op", "op_path", default=None, type=click.Path(dir_okay=False))
@click.option("--lambdas", default=None, help="comma-separated lambda ladder")
@common
@_guard
def suite_cmd(name, config_path, space_path, op_path, lambdas, seed, tol, exact_rational, fmt, out):
    """Run a named theorem suite (see ``conewise.suites.SUITES``)."""
    _threads()
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    data = {} if config_path is None else _read_json(config_path, "config")
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    data.setdefault("seed", seed)
    if lambdas:
        try:
            data["lambdas"] = [float(v) for v in lambdas.split(",")]
        except ValueError:
            raise InputError(f"bad --lambdas value {lambdas!r}") from None
    scfg = SuiteConfig.from_dict(data)
    op = None
    if op_path is not None:
        try:
            space = canonicalize(_load_space(space_path)).space
        except ConeError as exc:
            raise InputError(str(exc)) from None
        op = load_operator(op_path, space)
    rep = run_suite(name, scfg, op)
    cfg = RunConfig("suite", space=space_path, op=op_path, suite=name, config=config_path, seed=scfg.seed,
                    tol=tol, exact_rational=exact_rational, format=fmt, out=out)
    report = {"config": cfg.to_dict(), "suite_config": scfg.to_dict(), **rep.to_dict()}
    if fmt == "csv":
        text = rep.to_csv()
        Path(out).write_text(text) if out else click.echo(text, nl=False)
    else:
        _emit(report, rep.rows, fmt, out)
    sys.exit(EXIT_PASS if rep.status in ("pass", "hypothesis unmet", "not applicable") else EXIT_FALSE)


if __name__ == "__main__":
    main()
