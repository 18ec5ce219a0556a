"""Matrix semigroups ``t -> e^{tA}``, resolvents, Yosida approximants, and theorem scans."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .cover import canonicalize
from .norms import SUP, NormSpec, rho_meet
from .operators import (
    LinOp,
    band_residual,
    inverse_local_check,
    is_disjointness_preserving,
    is_local,
    is_positive,
    locality_algebra_check,
    sample_disjoint_pairs,
)
from .spaces import TAU_ZERO, Tri, is_disjoint_oracle, preservation_bands

T_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)
T_GRID_SIGNED = tuple(sorted(T_GRID + tuple(-t for t in T_GRID)))
LAMBDAS = (10.0, 1e2, 1e3, 1e4)
SPECTRAL_MARGIN = 1.0
RESIDUAL_MAX = 1e-10
EPS = np.finfo(float).eps


class ExpmOverflow(ArithmeticError):
    pass


class ResolventError(ValueError):
    pass


def _mat(A) -> np.ndarray:
    return A.matrix if isinstance(A, LinOp) else np.asarray(A, dtype=float)


# -- exponential ----------------------------------------------------------------------


@dataclass(frozen=True)
class ExpmResult:
    matrix: np.ndarray
    estimate: float  # a-priori relative error estimate
    squarings: int
    order: int
    method: str


def _pade_coeffs(q):
    return [math.factorial(2 * q - k) * math.factorial(q)
            / (math.factorial(2 * q) * math.factorial(k) * math.factorial(q - k)) for k in range(q + 1)]


def expm_info(A, t: float = 1.0, method: str = "taylor_scaled", order: int | None = None,
              scaling_budget: int = 64, theta: float = 0.5) -> ExpmResult:
    """Scaling and squaring around a Taylor (default) or diagonal Padé core."""
    A = _mat(A)
    if not np.all(np.isfinite(A)) or not math.isfinite(t):
        raise ValueError("expm needs finite input")
    n = A.shape[0]
    B = t * A
    nrm = float(np.max(np.sum(np.abs(B), axis=0))) if n else 0.0
    s = 0 if nrm <= theta else int(math.ceil(math.log2(nrm / theta)))
    if s > scaling_budget:
        raise ExpmOverflow(f"||tA||_1 = {nrm:.3g} needs {s} squarings (budget {scaling_budget}); "
                           "reduce |t| or rescale A")
    C = B / 2.0 ** s
    c = nrm / 2.0 ** s
    I = np.eye(n)
    if method == "taylor_scaled":
        S, term = I.copy(), I.copy()
        k, delta = 0, 1.0
        limit = order if order is not None else 40
        while k < limit:
            k += 1
            term = term @ C / k
            S = S + term
            # tail of the exponential series beyond degree k
            delta = c ** (k + 1) / math.factorial(k + 1) / max(1e-300, 1 - c / (k + 2))
            if order is None and delta <= EPS / 8:
                break
        F, used = S, k
    elif method == "pade_scaled":
        q = order if order is not None else 8
        cs = _pade_coeffs(q)
        N, D, P = np.zeros_like(I), np.zeros_like(I), I.copy()
        for k, ck in enumerate(cs):
            N += ck * P
            D += (-1) ** k * ck * P
            P = P @ C
        F = np.linalg.solve(D, N)
        delta = (math.factorial(q) ** 2 / (math.factorial(2 * q) * math.factorial(2 * q + 1))) * c ** (2 * q + 1)
        used = q
    else:
        raise ValueError(f"unknown method {method!r}")
    for _ in range(s):
        F = F @ F
    if not np.all(np.isfinite(F)):
        raise ExpmOverflow(f"e^(tA) overflowed at t={t}; use a smaller |t|")
    est = 2.0 ** s * (delta + n * EPS)
    return ExpmResult(F, est, s, used, method)


def expm(A, t: float = 1.0, method: str = "taylor_scaled", **kw) -> np.ndarray:
    return expm_info(A, t, method, **kw).matrix


# -- resolvent / Yosida -------------------------------------------------------------------


def spectral_bound(A) -> float:
    A = _mat(A)
    return float(np.max(np.linalg.eigvals(A).real)) if A.size else -math.inf


def resolvent(A, lam: float, margin: float = SPECTRAL_MARGIN) -> np.ndarray:
    """``(lam I - A)^{-1}`` with a spectral guard and iterative refinement."""
    A = _mat(A)
    s = spectral_bound(A)
    if lam < s + margin - 1e-9 * (1 + abs(s)):
        raise ResolventError(f"lambda={lam} is below spectral bound {s:.6g} plus margin {margin}")
    M = lam * np.eye(A.shape[0]) - A
    if np.linalg.cond(M) > 1e12:
        raise ResolventError(f"lambda={lam}: lambda I - A is ill-conditioned")
    I = np.eye(A.shape[0])
    R = np.linalg.solve(M, I)
    for _ in range(6):
        E = I - M @ R
        if np.max(np.abs(E)) <= RESIDUAL_MAX:
            return R
        R = R + np.linalg.solve(M, E)
    raise ResolventError(f"lambda={lam}: residual {np.max(np.abs(I - M @ R)):.2e} exceeds {RESIDUAL_MAX}")


def yosida(A, lam: float, margin: float = SPECTRAL_MARGIN):
    """``A_lam = lam A (lam I - A)^{-1}``, checked against ``lam^2 R - lam I``.

    The factor ``lam`` is what makes ``e^{t A_lam} -> e^{tA}``; it does not
    affect locality.
    """
    M = _mat(A)
    R = resolvent(M, lam, margin)
    Y = lam * (M @ R)
    alt = lam * lam * R - lam * np.eye(M.shape[0])
    scale = max(1.0, float(np.max(np.abs(alt))), lam)
    if np.max(np.abs(Y - alt)) > RESIDUAL_MAX * scale:
        raise ResolventError(f"lambda={lam}: Yosida identity violated")
    return A.with_matrix(Y) if isinstance(A, LinOp) else Y


# -- reports ------------------------------------------------------------------------------


def _plain(v):
    if isinstance(v, Tri):
        return v.value
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


CSV_COLUMNS = ("case", "t", "lambda", "pair", "verdict", "rho", "error")


@dataclass
class ScanReport:
    suite: str
    status: str = "pass"  # pass | fail | hypothesis unmet | not applicable
    rows: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail(self, witness=None):
        self.status = "fail"
        if witness is not None:
            self.witnesses.append(witness)

    def to_dict(self) -> dict:
        return _plain({"suite": self.suite, "status": self.status, "rows": self.rows,
                       "witnesses": self.witnesses, "info": self.info})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("suite",) + CSV_COLUMNS)
        for r in self.rows:
            w.writerow([self.suite] + [_plain(r.get(c, "")) for c in CSV_COLUMNS])
        return buf.getvalue()


@dataclass
class Semigroup:
    generator: LinOp
    method: str = "taylor_scaled"
    scaling_budget: int = 64
    order: int | None = None
    log: list = field(default_factory=list)

    def info(self, t: float) -> ExpmResult:
        res = expm_info(self.generator.matrix, t, self.method, self.order, self.scaling_budget)
        self.log.append({"t": t, "estimate": res.estimate, "squarings": res.squarings})
        return res

    def __call__(self, t: float) -> np.ndarray:
        return self.info(t).matrix

    def op(self, t: float) -> LinOp:
        return self.generator.with_matrix(self(t))


@dataclass(frozen=True)
class YosidaParams:
    lambdas: tuple = LAMBDAS
    t_grid: tuple = (1e-3, 1e-2, 1e-1, 1.0)

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ValueError("lambda ladder must be increasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))


def max_band_residual(op: LinOp) -> float:
    return max((band_residual(op, b)[0] for b in preservation_bands(op.space)), default=0.0)


def _sup_opnorm(M):
    return float(np.max(np.sum(np.abs(M), axis=1)))


# -- theorem scans ------------------------------------------------------------------------


def thm_bounded_local(A: LinOp, t_grid=T_GRID_SIGNED, method: str = "taylor_scaled",
                      rel_tol: float = 1e-8) -> ScanReport:
    """A local ``A`` has local ``e^{tA}`` for every real ``t``."""
    rep = ScanReport("thm-bounded-local")
    pre = is_local(A)
    rep.info["generator_local"] = pre.value
    sg = Semigroup(A, method)
    for t in t_grid:
        res = sg.info(t)
        E = A.with_matrix(res.matrix)
        r = max_band_residual(E)
        nrm = _sup_opnorm(res.matrix)
        ok = r <= rel_tol * nrm
        row = {"t": t, "verdict": "true" if ok else "false", "error": r, "norm": nrm,
               "expm_estimate": res.estimate}
        if abs(A.matrix).max(initial=0) * abs(t) <= 1:
            row["partial_sum_residual"] = _partial_sum_residual(A, t)
        rep.rows.append(row)
        if not ok and pre.value is Tri.TRUE:
            v = is_local(E)
            rep.fail({"t": t, **v.certificate})
    if pre.value is not Tri.TRUE:
        rep.status = "hypothesis unmet"
        rep.witnesses.append({"generator": pre.certificate})
    return rep


def _partial_sum_residual(A: LinOp, t: float, terms: int = 20) -> float:
    # every Taylor partial sum stays in the band; the band is closed so the limit does too
    n = A.space.n
    S, P, worst = np.eye(n), np.eye(n), 0.0
    for k in range(1, terms + 1):
        P = P @ (t * A.matrix) / k
        S = S + P
        worst = max(worst, max_band_residual(A.with_matrix(S)))
    return worst


def _decreasing(vals, floor):
    return all(b <= a or b <= floor for a, b in zip(vals, vals[1:]))


def thm_local_resolvents(A: LinOp, params: YosidaParams = YosidaParams(), xs=None, n_x: int = 3,
                         seed: int = 0) -> ScanReport:
    """Local resolvents give local Yosida approximants, whose semigroups converge to ``e^{tA}``."""
    rep = ScanReport("thm-yosida")
    rng = np.random.default_rng(seed)
    xs = [np.asarray(x, float) for x in xs] if xs is not None else list(rng.standard_normal((n_x, A.space.n)))
    hyp_ok = is_local(A).value is Tri.TRUE
    rep.info["generator_local"] = hyp_ok
    yos = {}
    for lam in params.lambdas:
        try:
            R = resolvent(A, lam)
        except ResolventError as e:
            rep.status = "hypothesis unmet"
            rep.rows.append({"lambda": lam, "verdict": "error", "message": str(e)})
            return rep
        rl = is_local(A.with_matrix(R))
        hyp_ok &= rl.value is Tri.TRUE
        Y = yosida(A, lam)
        yl = is_local(Y)
        rep.rows.append({"lambda": lam, "verdict": yl.value, "resolvent_local": rl.value,
                         "error": float(np.max(np.abs(Y.matrix - A.matrix)))})
        if yl.value is not Tri.TRUE:
            rep.fail({"lambda": lam, "yosida": yl.certificate})
        yos[lam] = Y
    gaps = [r["error"] for r in rep.rows]
    rep.info["yosida_gap_decreasing"] = _decreasing(gaps, 1e-12)
    conclusion = True
    for t in params.t_grid:
        E = expm(A, t)
        el = is_local(A.with_matrix(E))
        conclusion &= el.value is Tri.TRUE
        rep.rows.append({"t": t, "verdict": el.value, "limit_band_residual": max_band_residual(A.with_matrix(E))})
        for p, x in enumerate(xs):
            xn = float(np.max(np.abs(x)))
            errs = []
            for lam in params.lambdas:
                El = expm(yos[lam], t)
                v = is_local(A.with_matrix(El))
                conclusion &= v.value is Tri.TRUE
                err = float(np.max(np.abs(El @ x - E @ x)))
                errs.append(err)
                rep.rows.append({"t": t, "lambda": lam, "pair": p, "verdict": v.value, "error": err,
                                 "relative_error": err / xn})
            if not _decreasing(errs, 1e-13 * xn):
                conclusion = False
                rep.witnesses.append({"t": t, "x": p, "errors": errs, "reason": "not decreasing in lambda"})
    rep.info["conclusion_holds"] = conclusion
    if not hyp_ok:
        rep.status = "hypothesis unmet"
    elif not conclusion:
        rep.fail()
    return rep


def thm_generator_local(sg: Semigroup, pairs=None, t_grid=T_GRID, n_pairs: int = 10, seed: int = 0,
                        norm: NormSpec = SUP, quotient_ts=(1e-1, 1e-2, 1e-3)) -> ScanReport:
    """Disjointness preserving ``T(t)`` force ``rho(|i(Ax)| ∧ |i(y)|) = 0`` on disjoint pairs."""
    rep = ScanReport("thm-generator-local")
    A = sg.generator
    space = A.space
    for t in t_grid:
        v = is_disjointness_preserving(sg.op(t))
        rep.rows.append({"t": t, "verdict": v.value})
        if v.value is not Tri.TRUE:
            gl = is_local(A)
            rep.status = "hypothesis unmet"
            rep.witnesses.append({"t": t, **v.certificate})
            rep.info["generator_local"] = gl.value
            rep.info["generator_witness"] = gl.certificate
            rep.info["note"] = "T(t) is not disjointness preserving; the conclusion is not asserted"
            return rep
    cover = canonicalize(space)
    if pairs is None:
        pairs = sample_disjoint_pairs(space, n_pairs, seed, A.domain)
    for p, (x, y) in enumerate(pairs):
        x = np.asarray(x, float) / max(1e-300, np.max(np.abs(x)))
        y = np.asarray(y, float) / max(1e-300, np.max(np.abs(y)))
        quot = []
        for t in quotient_ts:
            q = (sg(t) @ x - x) / t
            r = rho_meet(cover, norm, q, y)
            quot.append(r)
            rep.rows.append({"t": t, "pair": p, "verdict": "quotient", "rho": r})
        Ax = A.matrix @ x
        r = rho_meet(cover, norm, Ax, y)
        oracle = is_disjoint_oracle(space, Ax, y)
        ok = r <= TAU_ZERO and oracle is Tri.TRUE and quot[-1] <= 1e-6 and _decreasing(quot, 1e-9)
        rep.rows.append({"t": 0.0, "pair": p, "verdict": oracle, "rho": r})
        if not ok:
            rep.fail({"pair": p, "x": x, "y": y, "rho": r, "quotients": quot, "oracle": oracle})
    rep.info["pairs"] = len(pairs)
    return rep


def cor_positive_resolvents(A: LinOp, lam0: float, lambdas=None, t_grid=(1e-3, 1e-2, 1e-1, 1.0),
                            xs=None, seed: int = 0, which: str = "auto") -> ScanReport:
    """Check corollary hypotheses, derive resolvent locality, then run the Yosida scan."""
    rep = ScanReport("cor-positive")
    n = A.space.n
    I = np.eye(n)
    lams = [float(lam0)] + [float(v) for v in (lambdas or LAMBDAS) if v > lam0]
    shifted = A.with_matrix(lam0 * I - A.matrix)
    base = {"lam0_minus_A_positive": is_positive(shifted).value,
            "lam0_minus_A_local": is_local(shifted).value}
    res_pos = {}
    for lam in lams:
        try:
            res_pos[lam] = is_positive(A.with_matrix(resolvent(A, lam))).value
        except ResolventError as e:
            rep.status = "not applicable"
            rep.info["failing"] = [f"resolvent at {lam}: {e}"]
            return rep
    hyp1 = dict(base, resolvents_positive=all(v is Tri.TRUE for v in res_pos.values()))
    hyp2 = {"A_positive": is_positive(A).value, "A_local": is_local(A).value,
            "A_le_lam0": base["lam0_minus_A_positive"]}
    sets = {"positive-resolvents": hyp1, "positive-generator": hyp2}
    order = list(sets) if which == "auto" else [which]
    chosen = None
    for name in order:
        if all(v is Tri.TRUE or v is True for v in sets[name].values()):
            chosen = name
            break
    rep.info["hypotheses"] = sets
    if chosen is None:
        rep.status = "not applicable"
        rep.info["failing"] = sorted(k for name in order for k, v in sets[name].items()
                                     if not (v is Tri.TRUE or v is True))
        return rep
    if chosen == "positive-generator" and not all(v is Tri.TRUE for v in res_pos.values()):
        # positivity of resolvents for large lambda is a cited fact; on this ladder it failed
        rep.status = "not applicable"
        rep.info["failing"] = ["resolvents_positive"]
        return rep
    rep.info["corollary"] = chosen
    for lam in lams:
        T = A.with_matrix(lam * I - A.matrix)
        alg = locality_algebra_check(shifted, A.with_matrix(I), 1.0, lam - lam0)
        inv = inverse_local_check(T)
        ok = bool(alg["passed"]) and bool(inv["passed"])
        rep.rows.append({"lambda": lam, "verdict": "true" if ok else "false",
                         "shift_local": alg["passed"], "inverse_local": inv.get("inverse_local"),
                         "inverse_status": inv["status"]})
        if not ok:
            rep.fail({"lambda": lam, "inverse": inv})
    rep.info["domain_inclusion"] = "vacuous (full domain)"
    yo = thm_local_resolvents(A, YosidaParams(tuple(lams), t_grid), xs=xs, seed=seed)
    rep.info["yosida_status"] = yo.status
    rep.rows.extend(yo.rows)
    rep.witnesses.extend(yo.witnesses)
    if yo.status != "pass" and rep.status == "pass":
        rep.status = "fail"
    return rep
