"""Named theorem suites: fixed case lists that wrap the scans in ``semigroups`` and ``demos``."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from . import demos
from .cover import canonicalize
from .generators import four_ray, random_cover_diagonal, random_local, random_space, standard
from .operators import LinOp
from .semigroups import (
    LAMBDAS,
    T_GRID,
    T_GRID_SIGNED,
    ScanReport,
    Semigroup,
    YosidaParams,
    cor_positive_resolvents,
    thm_bounded_local,
    thm_generator_local,
    thm_local_resolvents,
)

SUITES = ("thm-generator-local", "thm-bounded-local", "thm-yosida", "cor-positive", "demos-all")


class UnknownSuite(KeyError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    lambdas: tuple = LAMBDAS
    t_grid: tuple | None = None
    spaces: int = 3
    operators: int = 3
    pairs: int = 10

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        data = dict(data)
        for key in ("lambdas", "t_grid"):
            if data.get(key) is not None:
                data[key] = tuple(float(v) for v in data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def _certified(space):
    return canonicalize(space).space


def _case_spaces(cfg: SuiteConfig):
    out = [_certified(standard(3)), _certified(four_ray())]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.spaces):
        out.append(random_space(rng)[1].space)
    return out


def _merge(name: str, parts: list[tuple[str, ScanReport]], informative=("hypothesis unmet",)) -> ScanReport:
    rep = ScanReport(name)
    for label, r in parts:
        rep.rows.append({"case": label, "verdict": r.status})
        rep.rows.extend({"case": label, **row} for row in r.rows)
        rep.info[label] = {"status": r.status, "witnesses": r.witnesses, "info": r.info}
    statuses = {r.status for _, r in parts}
    if "fail" in statuses:
        rep.status = "fail"
    elif statuses - {"pass"} - set(informative):
        rep.status = "fail"
    return rep


def suite_bounded_local(cfg: SuiteConfig, op: LinOp | None = None) -> ScanReport:
    grid = cfg.t_grid or T_GRID_SIGNED
    if op is not None:
        return thm_bounded_local(op, grid)
    rng = np.random.default_rng(cfg.seed)
    parts = []
    for s, space in enumerate(_case_spaces(cfg)):
        for k in range(cfg.operators):
            A = LinOp(random_local(space, rng), space)
            parts.append((f"{space.name}#{s}/{k}", thm_bounded_local(A, grid)))
    return _merge("thm-bounded-local", parts)


def suite_yosida(cfg: SuiteConfig, op: LinOp | None = None) -> ScanReport:
    params = YosidaParams(cfg.lambdas, cfg.t_grid or YosidaParams().t_grid)
    if op is not None:
        return thm_local_resolvents(op, params, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    parts = []
    for s, space in enumerate(_case_spaces(cfg)):
        A, _ = random_cover_diagonal(space, rng, -2.0, 1.0)
        parts.append((f"{space.name}#{s}", thm_local_resolvents(LinOp(A, space), params, seed=cfg.seed)))
    return _merge("thm-yosida", parts)


def suite_generator_local(cfg: SuiteConfig, op: LinOp | None = None) -> ScanReport:
    grid = cfg.t_grid or T_GRID
    if op is not None:
        return thm_generator_local(Semigroup(op), t_grid=grid, n_pairs=cfg.pairs, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    parts = []
    for s, space in enumerate(_case_spaces(cfg)):
        A, _ = random_cover_diagonal(space, rng, -1.0, 1.0)
        parts.append((f"{space.name}#{s}", thm_generator_local(Semigroup(LinOp(A, space)), t_grid=grid,
                                                                n_pairs=cfg.pairs, seed=cfg.seed)))
    std2 = _certified(standard(2))
    rot = Semigroup(LinOp([[0.0, -1.0], [1.0, 0.0]], std2))
    parts.append(("rotation", thm_generator_local(rot, t_grid=grid, n_pairs=cfg.pairs, seed=cfg.seed)))
    return _merge("thm-generator-local", parts)


def suite_cor_positive(cfg: SuiteConfig, op: LinOp | None = None) -> ScanReport:
    grid = cfg.t_grid or YosidaParams().t_grid
    if op is not None:
        lam0 = float(np.max(np.linalg.eigvals(op.matrix).real)) + 1
        return cor_positive_resolvents(op, lam0, cfg.lambdas, grid, seed=cfg.seed)
    std2 = _certified(standard(2))
    parts = [("diag12", cor_positive_resolvents(LinOp(np.diag([1.0, 2.0]), std2), 3.0, cfg.lambdas, grid,
                                                seed=cfg.seed)),
             ("pol2", demos.pol2_pipeline(seed=cfg.seed))]
    rot = cor_positive_resolvents(LinOp([[0.0, -1.0], [1.0, 0.0]], std2), 3.0, cfg.lambdas, grid, seed=cfg.seed)
    parts.append(("rotation-guard", rot))
    return _merge("cor-positive", parts, informative=("not applicable",))


def suite_demos(cfg: SuiteConfig, op: LinOp | None = None) -> ScanReport:
    return demos.demos_all(seed=cfg.seed)


RUNNERS = {
    "thm-generator-local": suite_generator_local,
    "thm-bounded-local": suite_bounded_local,
    "thm-yosida": suite_yosida,
    "cor-positive": suite_cor_positive,
    "demos-all": suite_demos,
}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig(), op: LinOp | None = None) -> ScanReport:
    if name not in RUNNERS:
        raise UnknownSuite(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    return RUNNERS[name](cfg, op)
