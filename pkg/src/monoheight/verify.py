"""Pass/fail checks of the height identities, bounds and zero-height criteria.

A verifier never applies an identity outside its hypotheses: when they fail
the report says so (``hypotheses_met=False``) and ``passed`` is False.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .canonical import (
    HeightEstimate,
    HeightOptions,
    closed_form_orbit_height,
    fibration_height,
    forward_canonical_height,
    single_integer_eigenvalue,
    total_canonical_height,
)
from .errors import MonoheightError
from .linalg import IntMatrix, backward_matrix, det, mat_pow
from .spectral import analyze, ell_rank_chain
from .torus import TorusPoint, apply_map, is_root_of_unity_point, weil_height

__all__ = [
    "VerificationReport",
    "PreperiodicityResult",
    "verify_functional_equation",
    "verify_recurrence",
    "verify_lower_bound",
    "preperiodicity_test",
    "verify_dim2_zero_height",
    "verify_fibration_semiconjugacy",
    "VERIFIERS",
]


@dataclass(frozen=True)
class VerificationReport:
    identity_name: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    hypotheses_met: bool
    explanation: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _report(name, lhs, rhs, residual, tol, explanation="", **details) -> VerificationReport:
    return VerificationReport(name, lhs, rhs, residual, tol, residual <= tol, True, explanation, details)


def _not_met(name: str, why: str, tol: float = 0.0) -> VerificationReport:
    return VerificationReport(name, math.nan, math.nan, math.nan, tol, False, False, why)


def _tol(opts: HeightOptions, uncertainty: float) -> float:
    return max(opts.tolerance, 3 * uncertainty)


def _gate_dynamics(A: IntMatrix) -> str | None:
    if det(A) == 0:
        return "matrix is singular"
    an = analyze(A)
    if an.delta <= 1 + an.delta_radius:
        return f"rho(A) = {float(an.delta):.6g} is not > 1"
    return None


def verify_functional_equation(A: IntMatrix, P: TorusPoint, opts: HeightOptions | None = None) -> VerificationReport:
    """``H(AP)/|l1 lN| + H(A'P)/D = (1/|l1| + 1/|lN|) H(P)`` for the total height ``H``."""
    name = "functional-eq"
    opts = opts or HeightOptions()
    why = _gate_dynamics(A)
    if why:
        return _not_met(name, why)
    an = analyze(A)
    l1, lN = float(an.delta), float(an.min_modulus)
    D = abs(det(A))
    Ab = backward_matrix(A)
    h0 = total_canonical_height(A, P, opts)
    hf = total_canonical_height(A, apply_map(A, P), opts)
    hb = total_canonical_height(A, apply_map(Ab, P), opts)
    lhs = hf.value / (l1 * lN) + hb.value / D
    rhs = (1 / l1 + 1 / lN) * h0.value
    unc = hf.uncertainty / (l1 * lN) + hb.uncertainty / D + (1 / l1 + 1 / lN) * h0.uncertainty
    details = {"H(P)": h0.value, "H(AP)": hf.value, "H(A'P)": hb.value, "uncertainty": unc}
    if A.n == 2:
        simple_lhs = hf.value + hb.value
        simple_rhs = (l1 + lN) * h0.value
        details["simple_form_residual"] = abs(simple_lhs - simple_rhs)
    return _report(name, lhs, rhs, abs(lhs - rhs), _tol(opts, unc), "", **details)


def verify_recurrence(A: IntMatrix, P: TorusPoint, n_terms: int = 4, opts: HeightOptions | None = None) -> VerificationReport:
    """``H_{n+2} - (|l1|+|lN|) H_{n+1} + |l1 lN| H_n = 0`` for ``H_n = hhat(phi^n P)``, ``n < n_terms``.

    When ``|l1| != |lN|`` the closed-form solution is compared against the
    directly computed ``H_n`` as well.
    """
    name = "recurrence"
    opts = opts or HeightOptions()
    why = _gate_dynamics(A)
    if why:
        return _not_met(name, why)
    an = analyze(A)
    l1, lN = float(an.delta), float(an.min_modulus)
    H: list[HeightEstimate] = []
    Q = P
    for _ in range(n_terms + 2):
        H.append(total_canonical_height(A, Q, opts))
        Q = apply_map(A, Q)
    residual, unc = 0.0, 0.0
    worst = (0.0, 0.0)
    for n in range(n_terms):
        lhs = H[n + 2].value - (l1 + lN) * H[n + 1].value + l1 * lN * H[n].value
        u = H[n + 2].uncertainty + (l1 + lN) * H[n + 1].uncertainty + l1 * lN * H[n].uncertainty
        unc = max(unc, u)
        if abs(lhs) >= residual:
            residual, worst = abs(lhs), (lhs, 0.0)
    details = {"H": [h.value for h in H], "uncertainty": unc}
    closed_residual = None
    if l1 - lN > 2 * float(an.delta_radius) + 1e-12:
        closed_residual = max(
            abs(closed_form_orbit_height(A, P, n, opts) - H[n].value) for n in range(n_terms + 2)
        )
        details["closed_form_residual"] = closed_residual
    tol = _tol(opts, unc)
    rep = _report(name, worst[0], worst[1], residual, tol, "", **details)
    if closed_residual is not None and closed_residual > tol:
        return VerificationReport(name, rep.lhs, rep.rhs, max(residual, closed_residual), tol, False, True,
                                  "closed-form solution disagrees with direct values", details)
    return rep


def verify_lower_bound(A: IntMatrix, P: TorusPoint, opts: HeightOptions | None = None) -> VerificationReport:
    """``hhat^+ >= h`` (one eigenvalue modulus) or ``hhat >= h`` (two moduli), for diagonalizable ``A``."""
    name = "lower-bound"
    opts = opts or HeightOptions()
    why = _gate_dynamics(A)
    if why:
        return _not_met(name, why)
    an = analyze(A)
    if not an.diagonalizable:
        return _not_met(name, "A is not diagonalizable (minimal polynomial has a repeated factor)")
    groups = an.modulus_groups()
    h = weil_height(P).value
    if len(groups) == 1:
        est = forward_canonical_height(A, P, opts)
        case = "one modulus: forward height >= h"
    elif len(groups) == 2:
        est = total_canonical_height(A, P, opts)
        case = "two moduli: total height >= h"
    else:
        return _not_met(name, f"eigenvalue moduli form {len(groups)} groups; need 1 or 2")
    slack = est.uncertainty + 1e-9
    deficit = max(0.0, h - est.value)
    if est.exact_zero:
        positivity = "zero"
    elif est.value > est.uncertainty + opts.tolerance:
        positivity = "witnessed"
    else:
        positivity = "positivity unresolved"
    return _report(name, est.value, h, deficit, slack, case, ratio=(est.value / h if h else math.nan),
                   method=est.method, positivity=positivity)


@dataclass(frozen=True)
class PreperiodicityResult:
    preperiodic: bool | None
    certificate: str
    preperiod: int | None = None
    period: int | None = None

    def __bool__(self) -> bool:
        return bool(self.preperiodic)

    def to_json(self) -> dict:
        return asdict(self)


def preperiodicity_test(A: IntMatrix, P: TorusPoint, orbit_bound: int = 10_000) -> PreperiodicityResult:
    """Decide whether ``P`` has a finite forward orbit under ``phi_A``.

    Since ``det A != 0`` the exponent action is injective, so ``P`` is
    preperiodic iff each exponent vector is periodic, i.e. killed by the
    product of the distinct cyclotomic factors of the minimal polynomial.
    That test is exact; a preperiodic orbit is then walked to report its
    preperiod and period (signs included).
    """
    if det(A) == 0:
        raise MonoheightError("preperiodicity test needs det(A) != 0")
    C = analyze(A).periodic_test
    for p, v in P.exponents:
        if any(C.apply(v)):
            return PreperiodicityResult(False, f"exponent vector at p={p} is not killed by the cyclotomic part of the minimal polynomial")
    seen: dict[TorusPoint, int] = {}
    Q = P
    for k in range(orbit_bound + 1):
        if Q in seen:
            j = seen[Q]
            kind = "all coordinates are +-1" if is_root_of_unity_point(P) else "exponents lie in the periodic part"
            return PreperiodicityResult(True, kind, j, k - j)
        seen[Q] = k
        Q = apply_map(A, Q)
    return PreperiodicityResult(True, "exponent vectors are periodic (orbit walk exceeded bound)")


def verify_dim2_zero_height(A: IntMatrix, P: TorusPoint) -> VerificationReport:
    """Two zero-height criteria for non-diagonalizable 2x2 ``A`` with eigenvalue ``lambda`` agree.

    Left: the fibration height vanishes.  Right: ``P`` is preperiodic, or the
    monomial ``x^c y^(d-lambda)`` (``c != 0``) / ``x^(a-lambda) y^b`` (``c = 0``)
    is a root of unity.  Both sides are decided symbolically.
    """
    name = "dim2-zero-height"
    if A.n != 2:
        return _not_met(name, "matrix is not 2x2")
    lam = single_integer_eigenvalue(A)
    if lam is None or A == IntMatrix.scalar(2, lam):
        return _not_met(name, "matrix must be non-diagonalizable with an integer eigenvalue")
    if abs(lam) <= 1:
        return _not_met(name, "rho(A) is not > 1")
    (a, b), (c, d) = A.rows
    row = (c, d - lam) if c != 0 else (a - lam, b)
    mono_zero = all(row[0] * v[0] + row[1] * v[1] == 0 for _, v in P.exponents)
    pre = preperiodicity_test(A, P).preperiodic
    fwd, _ = fibration_height(A, P)
    lhs_zero = fwd.exact_zero
    rhs_zero = bool(pre) or mono_zero
    agree = lhs_zero == rhs_zero
    return VerificationReport(
        name,
        fwd.value,
        0.0 if rhs_zero else 1.0,
        0.0 if agree else 1.0,
        0.0,
        agree,
        True,
        ("zero" if lhs_zero else "positive") + (" (monomial is a root of unity)" if mono_zero else ""),
        {"monomial_exponents": list(row), "preperiodic": bool(pre), "forward_zero": lhs_zero},
    )


def verify_fibration_semiconjugacy(A: IntMatrix, P: TorusPoint) -> VerificationReport:
    """``pi(phi_A P) = phi_A(pi P)`` exactly, with ``pi = phi_{(A - lambda)^ell}``."""
    name = "fibration-semiconjugacy"
    lam = single_integer_eigenvalue(A)
    if lam is None or A == IntMatrix.scalar(A.n, lam):
        return _not_met(name, "matrix must be non-diagonalizable with a single integer eigenvalue")
    ell = ell_rank_chain(A)
    pi = mat_pow(A - IntMatrix.scalar(A.n, lam), ell)
    down_then_across = apply_map(A, apply_map(pi, P))
    across_then_down = apply_map(pi, apply_map(A, P))
    same = down_then_across == across_then_down
    return VerificationReport(
        name,
        weil_height(across_then_down).value,
        weil_height(down_then_across).value,
        0.0 if same else 1.0,
        0.0,
        same,
        True,
        f"lambda={lam}, ell={ell}",
        {"pi_of_image": across_then_down.to_json(), "image_of_pi": down_then_across.to_json()},
    )


VERIFIERS = {
    "functional-eq": verify_functional_equation,
    "recurrence": verify_recurrence,
    "lower-bound": verify_lower_bound,
    "dim2-zero-height": verify_dim2_zero_height,
    "fibration-semiconjugacy": verify_fibration_semiconjugacy,
}
