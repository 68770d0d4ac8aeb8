"""Exact boundedness criteria and Schur-test certificates.

All arithmetic is on :class:`fractions.Fraction`. The conjugate exponent is
carried as ``1/p' = 1 - 1/p`` so that ``p = 1`` needs no infinity.

Certificate scheme (operator kernel ``(1-|z|^2)^{b1} (1-|w|^2)^{b2-s} |1 - z.conj(w)|^{-c}``,
test functions ``h1 = (1-|w|^2)^{-u}``, ``h2 = (1-|z|^2)^{-v}``, split ``t``):
with ``tau = (n+1+s)/p' + (n+1+r)/q``, ``beta = b2 - s`` and c at its critical
value ``b1 + b2 - s + tau``, the two Schur integrals reduce to J-integrals
whose exponents are positive multiples of

    c2 > 0  :  tau u + beta (u - v) > -beta (n+1+r)/q
    s1 > -1 :  tau u + beta (u - v) < (1+s) tau/p' + beta (n+1+s)/p'
    c1 > 0  :  tau v + b1 (v - u)   > -b1 (n+1+s)/p'
    s2 > -1 :  tau v + b1 (v - u)   < b1 (n+1+r)/q + tau (1+r)/q

i.e. two slabs in the (u, v) plane. For ``p = 1`` the same system with
``1/p' = 0`` encodes the sup-test conditions ``beta t > u`` and ``b1 t + v > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

Rat = Fraction


class HypothesisError(ValueError):
    """Parameters fall outside the standing hypotheses of a theorem."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite parameter {x}")
        return Fraction(repr(x))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class ConditionInput:
    n: int
    p: Fraction
    q: Fraction
    b1: Fraction | None = None
    b2: Fraction | None = None
    c: Fraction | None = None
    r: Fraction | None = None
    s: Fraction | None = None
    lam: Fraction | None = None
    lam_t: Fraction | None = None

    def __post_init__(self):
        for name in ("p", "q", "b1", "b2", "c", "r", "s", "lam", "lam_t"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, as_fraction(val))

    @property
    def inv_pconj(self) -> Fraction:
        """``1/p'``; zero at p = 1."""
        return 1 - 1 / self.p

    def to_json(self) -> dict:
        out = {"n": self.n}
        for name in ("p", "q", "b1", "b2", "c", "r", "s", "lam", "lam_t"):
            val = getattr(self, name)
            if val is not None:
                out[name] = str(val)
        return out


def _need(inp: ConditionInput, *names: str) -> None:
    missing = [k for k in names if getattr(inp, k) is None]
    if missing:
        raise HypothesisError(f"missing parameters: {', '.join(missing)}")


def _operator_hypotheses(inp: ConditionInput) -> None:
    _need(inp, "b1", "b2", "c", "r", "s")
    if inp.n < 2:
        raise HypothesisError("n must be >= 2")
    if not 1 <= inp.p <= inp.q:
        raise HypothesisError("need 1 <= p <= q")
    if inp.s <= -1:
        raise HypothesisError("need s > -1")
    if not inp.r > max(Fraction(-1), -1 - inp.q * inp.b1):
        raise HypothesisError("need r > max(-1, -1 - q b1)")


def critical_c(inp: ConditionInput) -> Fraction:
    """``b1 + b2 - s + (n+1+r)/q + (n+1+s)/p'``."""
    _need(inp, "b1", "b2", "r", "s")
    return inp.b1 + inp.b2 - inp.s + (inp.n + 1 + inp.r) / inp.q + (inp.n + 1 + inp.s) * inp.inv_pconj


def tau(inp: ConditionInput) -> Fraction:
    return (inp.n + 1 + inp.s) * inp.inv_pconj + (inp.n + 1 + inp.r) / inp.q


def check_theorem_A(inp: ConditionInput) -> bool:
    """1 < p <= q: ``s+1 < p(b2+1)`` and ``c <= critical_c``."""
    _operator_hypotheses(inp)
    if inp.p == 1:
        raise HypothesisError("Theorem A needs p > 1")
    return inp.s + 1 < inp.p * (inp.b2 + 1) and inp.c <= critical_c(inp)


def check_theorem_B(inp: ConditionInput) -> bool:
    """p = 1: ``(s < b2 and c = bound)`` or ``(s <= b2 and c < bound)``."""
    _operator_hypotheses(inp)
    if inp.p != 1:
        raise HypothesisError("Theorem B needs p = 1")
    bound = critical_c(inp)
    return (inp.s < inp.b2 and inp.c == bound) or (inp.s <= inp.b2 and inp.c < bound)


def check_operator(inp: ConditionInput) -> bool:
    return check_theorem_B(inp) if inp.p == 1 else check_theorem_A(inp)


def check_theorem_C(inp: ConditionInput) -> bool:
    """Boundedness of P_s from L^p_lam(B*) to A^q_lam_t(B*) as stated (exact disjunction)."""
    _need(inp, "s", "lam", "lam_t")
    if inp.n < 2:
        raise HypothesisError("n must be >= 2")
    if not 1 <= inp.p <= inp.q:
        raise HypothesisError("need 1 <= p <= q")
    if inp.lam <= -1 or inp.lam_t <= -1:
        raise HypothesisError("need lam, lam_t > -1")
    if inp.s <= -1:
        raise HypothesisError("need s > -1")
    n1 = inp.n + 1
    if inp.p > 1:
        return (inp.lam + 1 < inp.p * (inp.s + 1)
                and inp.s >= (n1 + inp.lam) / inp.p - (n1 + inp.lam_t) / inp.q)
    lhs = (n1 + inp.lam_t) / inp.q
    return (inp.lam < inp.s and lhs >= n1 + inp.lam) or (inp.lam <= inp.s and lhs > n1 + inp.lam)


def reduce_C_to_A(inp: ConditionInput, substitution: str = "shifted") -> ConditionInput:
    """Operator parameters for P_s on M: b1 = 0, b2 = s, source weight lam, target lam_t.

    ``"shifted"`` takes c = n+1+lam. ``"matched"`` takes the exponent for which
    the Theorem A/B conditions coincide with the Theorem C conditions
    (c = n+1 for p > 1, c = n+1+s for p = 1).
    """
    _need(inp, "s", "lam", "lam_t")
    if substitution == "shifted":
        c = inp.n + 1 + inp.lam
    elif substitution == "matched":
        c = Fraction(inp.n + 1) if inp.p > 1 else inp.n + 1 + inp.s
    else:
        raise ValueError(f"unknown substitution {substitution!r}")
    return ConditionInput(inp.n, inp.p, inp.q, b1=Fraction(0), b2=inp.s, c=c, r=inp.lam_t, s=inp.lam)


def boundary_case(inp: ConditionInput) -> bool:
    """True when c sits exactly on the critical value (strictness matters there)."""
    return inp.c == critical_c(inp)


# ------------------------------------------------------------- certificates


@dataclass
class Certificate:
    kind: str
    t: Fraction
    u: Fraction
    v: Fraction
    c_eff: Fraction
    tau: Fraction
    exponents: dict[str, Fraction]
    margins: dict[str, Fraction]
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> Fraction:
        return min(self.margins.values())

    @property
    def gamma_delta(self) -> tuple[Fraction, Fraction]:
        return self.t, 1 - self.t

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "t": str(self.t), "u": str(self.u), "v": str(self.v),
            "gamma_delta": [str(self.t), str(1 - self.t)],
            "c_eff": str(self.c_eff), "tau": str(self.tau),
            "h1_exponent": str(-self.u), "h2_exponent": str(-self.v),
            "exponents": {k: str(v) for k, v in self.exponents.items()},
            "margins": {k: str(v) for k, v in self.margins.items()},
            "margin": str(self.margin),
            "notes": self.notes,
        }


@dataclass
class Infeasible:
    violated: str
    reason: str

    def to_json(self) -> dict:
        return {"violated": self.violated, "reason": self.reason}


@dataclass(frozen=True)
class Slab:
    """``lo < a_u u + a_v v < hi`` with names for the two sides."""

    a_u: Fraction
    a_v: Fraction
    lo: Fraction
    hi: Fraction
    lo_name: str
    hi_name: str

    def value(self, u: Fraction, v: Fraction) -> Fraction:
        return self.a_u * u + self.a_v * v

    def slacks(self, u: Fraction, v: Fraction) -> dict[str, Fraction]:
        x = self.value(u, v)
        return {self.lo_name: x - self.lo, self.hi_name: self.hi - x}


def schur_slabs(inp: ConditionInput, c_eff: Fraction | None = None) -> tuple[Slab, Slab]:
    """The two slabs of the certificate system at the critical exponent."""
    n1 = inp.n + 1
    ip = inp.inv_pconj
    ta = tau(inp)
    beta = inp.b2 - inp.s
    slab_u = Slab(ta + beta, -beta, -beta * (n1 + inp.r) / inp.q,
                  (1 + inp.s) * ta * ip + beta * (n1 + inp.s) * ip, "c2>0", "s1>-1")
    slab_v = Slab(-inp.b1, ta + inp.b1, -inp.b1 * (n1 + inp.s) * ip,
                  inp.b1 * (n1 + inp.r) / inp.q + ta * (1 + inp.r) / inp.q, "c1>0", "s2>-1")
    return slab_u, slab_v


def _solve_2x2(a, b, c, d, e, f) -> tuple[Fraction, Fraction]:
    det = a * d - b * c
    return (e * d - b * f) / det, (a * f - e * c) / det


def _chebyshev_point(s1: Slab, s2: Slab) -> tuple[Fraction, Fraction] | None:
    """Point maximizing the smallest slack; None if the slabs do not meet."""
    det = s1.a_u * s2.a_v - s1.a_v * s2.a_u
    if det != 0:
        x1, x2 = (s1.lo + s1.hi) / 2, (s2.lo + s2.hi) / 2
        return _solve_2x2(s1.a_u, s1.a_v, s2.a_u, s2.a_v, x1, x2)
    # parallel slabs: s1 row = lam * s2 row, search along x = s2 row value
    if s2.a_u == 0 and s2.a_v == 0:
        return None
    lam = s1.a_u / s2.a_u if s2.a_u != 0 else s1.a_v / s2.a_v
    lines = [(Fraction(1), -s2.lo), (Fraction(-1), s2.hi), (lam, -s1.lo), (-lam, s1.hi)]
    cands = set()
    for i, (a1, b1) in enumerate(lines):
        for a2, b2 in lines[i + 1:]:
            if a1 != a2:
                cands.add((b2 - b1) / (a1 - a2))
    best_x, best = None, None
    for x in cands:
        val = min(a * x + b for a, b in lines)
        if best is None or val > best:
            best_x, best = x, val
    if best is None or best <= 0:
        return None
    if s2.a_v != 0:
        return Fraction(0), best_x / s2.a_v
    return best_x / s2.a_u, Fraction(0)


def exponents_from_tuv(inp: ConditionInput, t: Fraction, u: Fraction, v: Fraction,
                       c_eff: Fraction) -> dict[str, Fraction]:
    """Exponents of the two Schur integrals, straight from their definitions.

    First integral (p > 1): ``(1-|z|^2)^{b1 t p'} J_{c1, s1}(z)``; second:
    ``(1-|w|^2)^{beta (1-t) q} J_{c2, s2}(w)``. For p = 1 the first test is a
    supremum and is described by ``sup_weight = beta t - u`` and ``sup_gap = b1 t + v``.
    """
    n1 = inp.n + 1
    beta = inp.b2 - inp.s
    q = inp.q
    out = {}
    if inp.p > 1:
        pc = inp.p / (inp.p - 1)
        s1 = -u * pc + beta * t * pc + inp.s
        out["s1"] = s1
        out["c1"] = c_eff * t * pc - n1 - s1
        out["first_power"] = inp.b1 * t * pc - out["c1"]
    else:
        out["sup_weight"] = beta * t - u
        out["sup_gap"] = inp.b1 * t + v
    s2 = -v * q + inp.b1 * (1 - t) * q + inp.r
    out["s2"] = s2
    out["c2"] = c_eff * (1 - t) * q - n1 - s2
    out["second_power"] = beta * (1 - t) * q - out["c2"]
    return out


def _h1_const_certificate(inp: ConditionInput) -> Certificate:
    """p = 1, s = b2, c below the bound: h1 = 1, t = v / (c' - b1)."""
    bound = critical_c(inp)
    base = max(inp.c, inp.b1, Fraction(0))
    c_eff = (base + bound) / 2
    gap = inp.b1 + (1 + inp.r) / inp.q
    v_hi = (c_eff - inp.b1) * gap / c_eff
    v = v_hi / 2
    t = v / (c_eff - inp.b1)
    q = inp.q
    s3 = -v * q + inp.b1 * (1 - t) * q + inp.r
    c3 = c_eff * (1 - t) * q - (inp.n + 1) - s3
    exps = {"s3": s3, "c3": c3, "sup_power": t * inp.b1 - t * c_eff + v}
    margins = {"v>0": v, "v<window": v_hi - v, "s3>-1": s3 + 1, "c3<0": -c3,
               "c_eff-b1>0": c_eff - inp.b1}
    notes = ["h1 = 1; second Schur integral is a bounded J (c3 < 0)"]
    if c_eff != inp.c:
        notes.append(f"kernel exponent raised from {inp.c} to {c_eff} (|1 - z.conj(w)| <= 2)")
    return Certificate("schur_1q_h1_const", t, Fraction(0), v, c_eff, tau(inp), exps, margins, notes)


def synthesize_certificate(inp: ConditionInput) -> Certificate | Infeasible:
    """Exact Schur-test witness (t, u, v) or the reason none of this form exists."""
    _operator_hypotheses(inp)
    bound = critical_c(inp)
    if inp.c > bound:
        return Infeasible("c<=critical", f"c = {inp.c} exceeds the critical exponent {bound}")
    if inp.p == 1 and inp.s == inp.b2:
        if inp.c == bound:
            return Infeasible("c<critical (s=b2)", "with s = b2 and p = 1 the exponent must be strictly below critical")
        return _h1_const_certificate(inp)
    slab_u, slab_v = schur_slabs(inp, bound)
    for slab, need in ((slab_u, "s+1 < p(b2+1)"), (slab_v, "b1 + (1+r)/q > 0")):
        if slab.lo >= slab.hi:
            return Infeasible(f"{slab.lo_name} & {slab.hi_name}",
                              f"slab is empty ({slab.lo} >= {slab.hi}); requires {need}")
    pt = _chebyshev_point(slab_u, slab_v)
    if pt is None:
        return Infeasible("slab intersection", "parallel slabs do not intersect")
    u, v = pt
    ta = tau(inp)
    t = ((inp.n + 1 + inp.s) * inp.inv_pconj + v - u) / ta
    margins = {**slab_u.slacks(u, v), **slab_v.slacks(u, v)}
    notes = []
    if inp.c < bound:
        notes.append(f"kernel exponent raised from {inp.c} to {bound} (|1 - z.conj(w)| <= 2)")
    kind = "schur_pq" if inp.p > 1 else "schur_1q"
    return Certificate(kind, t, u, v, bound, ta, exponents_from_tuv(inp, t, u, v, bound), margins, notes)


def derived_t(cert: Certificate, inp: ConditionInput) -> Fraction:
    """The split t implied by (u, v): ``v/(c-b1)`` for h1 = 1, else ``((n+1+s)/p' + v - u)/tau``."""
    if cert.kind == "schur_1q_h1_const":
        return cert.v / (cert.c_eff - inp.b1)
    return ((inp.n + 1 + inp.s) * inp.inv_pconj + cert.v - cert.u) / tau(inp)


def recheck_certificate(cert: Certificate, inp: ConditionInput) -> list[str]:
    """Independent exact re-check; returns the names of broken conditions in order.

    t is re-derived from (u, v); the inequalities come first and a stale
    stored t is reported last.
    """
    broken = []
    if not cert.c_eff >= inp.c:
        broken.append("c_eff>=c")
    if cert.kind == "schur_1q_h1_const":
        q, v, c = inp.q, cert.v, cert.c_eff
        if inp.s != inp.b2:
            broken.append("s=b2")
        if not c - inp.b1 > 0:
            return broken + ["c_eff-b1>0"]
        t = derived_t(cert, inp)
        if not v > 0:
            broken.append("v>0")
        s3 = -v * q + inp.b1 * (1 - t) * q + inp.r
        c3 = c * (1 - t) * q - (inp.n + 1) - s3
        if not s3 > -1:
            broken.append("s3>-1")
        if not c3 < 0:
            broken.append("c3<0")
    else:
        t = derived_t(cert, inp)
        e = exponents_from_tuv(inp, t, cert.u, cert.v, cert.c_eff)
        # order matches the slab listing: c2, s1 (or sup weight), c1 (or sup gap), s2
        if not e["c2"] > 0:
            broken.append("c2>0")
        if inp.p > 1:
            if not e["s1"] > -1:
                broken.append("s1>-1")
            if not e["c1"] > 0:
                broken.append("c1>0")
        else:
            if not e["sup_weight"] > 0:
                broken.append("s1>-1")
            if not e["sup_gap"] > 0:
                broken.append("c1>0")
        if not e["s2"] > -1:
            broken.append("s2>-1")
        if inp.p > 1 and e["first_power"] != -inp.p / (inp.p - 1) * cert.v:
            broken.append("first_power=-p'v")
        if e["second_power"] != -inp.q * cert.u:
            broken.append("second_power=-qu")
    if cert.t != t:
        broken.append("t consistent with (u, v)")
    return broken


def grid_feasible(inp: ConditionInput, half_width: int = 10, step_den: int = 64) -> bool:
    """Brute-force search of the certificate system on the grid ``(i, j)/step_den``.

    For each u on the grid the four inequalities cut out an open v-interval,
    which is then tested for a grid point. Exact arithmetic throughout.
    """
    bound = critical_c(inp)
    slabs = schur_slabs(replace(inp, c=bound), bound)
    if any(sl.lo >= sl.hi for sl in slabs):
        return False
    span = half_width * step_den
    for i in range(-span, span + 1):
        u = Fraction(i, step_den)
        lo, hi = Fraction(-half_width) - Fraction(1, 10 * step_den), Fraction(half_width) + Fraction(1, 10 * step_den)
        ok = True
        for sl in slabs:
            const = sl.a_u * u
            if sl.a_v == 0:
                if not sl.lo < const < sl.hi:
                    ok = False
                    break
                continue
            a = (sl.lo - const) / sl.a_v
            b = (sl.hi - const) / sl.a_v
            if a > b:
                a, b = b, a
            lo, hi = max(lo, a), min(hi, b)
            if lo >= hi:
                ok = False
                break
        if not ok:
            continue
        j_lo = math.floor(lo * step_den) + 1
        j_hi = math.ceil(hi * step_den) - 1
        if max(j_lo, -span) <= min(j_hi, span):
            return True
    return False


def verdict_report(inp: ConditionInput) -> dict:
    """JSON-ready report for the ``check`` command."""
    report: dict = {"input": inp.to_json()}
    if inp.lam is not None:
        report["theorem"] = "C"
        report["verdict"] = check_theorem_C(inp)
        red = reduce_C_to_A(inp)
        report["reduced"] = red.to_json()
        report["reduced_verdict"] = check_operator(red)
        return report
    report["theorem"] = "B" if inp.p == 1 else "A"
    report["verdict"] = check_operator(inp)
    if boundary_case(inp):
        report["caveat"] = "boundary case per printed statement"
    return report


def region_scan(base: ConditionInput, x_name: str, xs: Iterable, y_name: str, ys: Iterable) -> list[dict]:
    """Verdict over a grid of two parameters; hypothesis violations are reported, not raised."""
    rows = []
    for x in xs:
        for y in ys:
            inp = replace(base, **{x_name: as_fraction(x), y_name: as_fraction(y)})
            try:
                verdict = verdict_report(inp)["verdict"]
                status = "ok"
            except HypothesisError as exc:
                verdict, status = None, f"hypothesis: {exc}"
            rows.append({x_name: str(getattr(inp, x_name)), y_name: str(getattr(inp, y_name)),
                         "verdict": verdict, "status": status})
    return rows


def schur_integrals(cert: Certificate, inp: ConditionInput) -> list[tuple[str, Fraction, Fraction]]:
    """The J-integrals ``(name, c, s)`` the Schur test reduces to for this certificate."""
    e = cert.exponents
    if cert.kind == "schur_1q_h1_const":
        return [("second", e["c3"], e["s3"])]
    out = []
    if inp.p > 1:
        out.append(("first", e["c1"], e["s1"]))
    out.append(("second", e["c2"], e["s2"]))
    return out


def verify_certificate(cert: Certificate, inp: ConditionInput, radii=None, m_n: float = 1.0) -> dict:
    """Exact re-check, then classify each Schur integral's boundary growth.

    Each integral is ``J_{c_i, s_i}``; the certificate predicts
    ``PowerGrowth(c_i)`` for ``c_i > 0`` (so the Schur bound is the predicted
    power of ``1-|z|^2``) and ``Bounded`` for ``c_i < 0``.
    """
    from .fr_integrals import FRQuery, classify_asymptotics, expected_class, series_estimator

    broken = recheck_certificate(cert, inp)
    report: dict = {"exact_ok": not broken, "broken": broken,
                    "first_broken": broken[0] if broken else None, "integrals": []}
    if broken:
        report["ok"] = False
        return report
    ok = True
    for name, c, s in schur_integrals(cert, inp):
        kw = {"radii": tuple(radii)} if radii is not None else {}
        q = FRQuery(float(c), float(s), 0, n=inp.n, **kw)
        cls = classify_asymptotics(q, series_estimator(q, "J", m_n))
        expected = expected_class(float(c))
        ok &= cls.label == expected
        report["integrals"].append({"name": name, "c": str(c), "s": str(s), "class": cls.label,
                                    "expected": expected, "rows": cls.rows})
    report["ok"] = ok
    return report
