"""Exact law of the exit time of a biased nearest-neighbour walk from (-k, k).

The walk starts at 0, steps +1 with probability p and -1 with probability
q = 1 - p, and is absorbed at +-k.  Everything here is computed by dynamic
programming on the interior states {-k+1, ..., k-1}, either in exact rational
arithmetic (``fractions.Fraction``) or in 64-bit floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MODE_RATIONAL = "rational"
MODE_FLOAT = "float"
_MODES = (MODE_RATIONAL, MODE_FLOAT)


def exact_fraction(x) -> Fraction:
    """Convert a bias/probability to an exact Fraction, or raise ValueError.

    Floats are read through their shortest decimal representation, so 0.55
    means 11/20.  Floats whose shortest form needs more than 12 significant
    digits (e.g. accumulated round-off like 0.1 + 0.2) are rejected as not
    exactly representable.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r} has no exact representation")
        s = repr(x)
        mantissa = s.split("e")[0].split("E")[0]
        digits = mantissa.replace("-", "").replace(".", "").lstrip("0")
        if len(digits) > 12:
            raise ValueError(
                f"float {x!r} is not exactly representable in rational mode; "
                "pass a Fraction or a string like '11/20'"
            )
        return Fraction(s)
    raise ValueError(f"cannot interpret {x!r} as an exact rational")


def _check_mode(mode: str) -> None:
    if mode not in _MODES:
        raise ValueError(f"unknown arithmetic mode {mode!r}; expected one of {_MODES}")


@dataclass(frozen=True)
class WalkSpec:
    """Biased-walk exit problem: bias p, barrier half-width k."""

    p: object  # float, Fraction or "num/den" string
    k: int

    def __post_init__(self):
        pf = float(Fraction(self.p) if isinstance(self.p, str) else self.p)
        if not 0.0 < pf < 1.0:
            raise ValueError(f"bias p must lie strictly inside (0, 1), got {self.p!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"half-width k must be an integer >= 1, got {self.k!r}")

    def p_float(self) -> float:
        return float(Fraction(self.p) if isinstance(self.p, str) else self.p)

    def p_exact(self) -> Fraction:
        return exact_fraction(self.p)

    def q_float(self) -> float:
        return 1.0 - self.p_float()

    def q_exact(self) -> Fraction:
        return 1 - self.p_exact()


@dataclass
class SurvivalCurve:
    """P(sigma > n) for n = 0..horizon, tagged with its arithmetic mode."""

    values: list  # floats or Fractions, index n
    mode: str

    def __post_init__(self):
        _check_mode(self.mode)
        if not self.values or self.values[0] != 1:
            raise ValueError("survival curve must start at 1")

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def to_csv(self, fh) -> None:
        fh.write("n,value\n")
        for n, v in enumerate(self.values):
            fh.write(f"{n},{format_value(v, self.mode)}\n")

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode,
            "values": [format_value(v, self.mode) for v in self.values],
        }


@dataclass
class JointExitTable:
    """Per-step exit mass P(sigma = n, S_sigma = +-k) plus interior residual.

    ``up[n]`` and ``down[n]`` are the masses absorbed at +k and -k at step n;
    ``residual[n]`` is P(sigma > n).  Row 0 is (0, 0, 1).
    """

    spec: WalkSpec
    up: list
    down: list
    residual: list
    mode: str

    @property
    def horizon(self) -> int:
        return len(self.residual) - 1

    def exit_pmf(self, n: int):
        return self.up[n] + self.down[n]

    def survival(self, n: int):
        return self.residual[n]

    def survival_curve(self) -> SurvivalCurve:
        return SurvivalCurve(list(self.residual), self.mode)

    def to_csv(self, fh) -> None:
        fh.write("n,value,side\n")
        for n in range(len(self.up)):
            fh.write(f"{n},{format_value(self.up[n], self.mode)},+\n")
            fh.write(f"{n},{format_value(self.down[n], self.mode)},-\n")
            fh.write(f"{n},{format_value(self.residual[n], self.mode)},interior\n")

    def to_json_obj(self) -> dict:
        fmt = lambda seq: [format_value(v, self.mode) for v in seq]
        return {
            "mode": self.mode,
            "p": format_value(self.spec.p_exact() if self.mode == MODE_RATIONAL
                              else self.spec.p_float(), self.mode),
            "k": self.spec.k,
            "up": fmt(self.up),
            "down": fmt(self.down),
            "residual": fmt(self.residual),
        }


def format_value(v, mode: str) -> str:
    if mode == MODE_RATIONAL:
        f = v if isinstance(v, Fraction) else exact_fraction(v)
        return f"{f.numerator}/{f.denominator}"
    x = float(v)
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _dp_rational(spec: WalkSpec, horizon: int):
    p = spec.p_exact()
    q = 1 - p
    k = spec.k
    m = 2 * k - 1
    zero = Fraction(0)
    u = [zero] * m
    u[k - 1] = Fraction(1)
    up = [zero]
    down = [zero]
    residual = [Fraction(1)]
    for _ in range(horizon):
        a_up = p * u[m - 1]
        a_dn = q * u[0]
        new = [zero] * m
        for i in range(m):
            acc = zero
            if i - 1 >= 0:
                acc += p * u[i - 1]
            if i + 1 < m:
                acc += q * u[i + 1]
            new[i] = acc
        u = new
        up.append(a_up)
        down.append(a_dn)
        residual.append(sum(u))
    return up, down, residual


def _dp_float(spec: WalkSpec, horizon: int):
    p = spec.p_float()
    q = 1.0 - p
    k = spec.k
    m = 2 * k - 1
    u = np.zeros(m)
    u[k - 1] = 1.0
    up = np.zeros(horizon + 1)
    down = np.zeros(horizon + 1)
    residual = np.zeros(horizon + 1)
    residual[0] = 1.0
    new = np.zeros(m)
    for n in range(1, horizon + 1):
        up[n] = p * u[m - 1]
        down[n] = q * u[0]
        new[:] = 0.0
        new[1:] += p * u[:-1]
        new[:-1] += q * u[1:]
        u, new = new, u
        residual[n] = u.sum()
    return list(up), list(down), list(residual)


def exit_joint(spec: WalkSpec, horizon: int, mode: str = MODE_FLOAT) -> JointExitTable:
    """Joint law of (sigma, S_sigma) up to ``horizon`` steps.

    Requires horizon >= k so that at least one exit row is nonzero.
    """
    _check_mode(mode)
    if horizon < spec.k:
        raise ValueError(f"horizon {horizon} is below the half-width k={spec.k}")
    if mode == MODE_RATIONAL:
        up, down, residual = _dp_rational(spec, horizon)
    else:
        up, down, residual = _dp_float(spec, horizon)
    return JointExitTable(spec, up, down, residual, mode)


def survival_pmf(spec: WalkSpec, horizon: int, mode: str = MODE_FLOAT) -> SurvivalCurve:
    """Survival probabilities P(sigma > n) for n = 0..horizon."""
    _check_mode(mode)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if mode == MODE_RATIONAL:
        _, _, residual = _dp_rational(spec, horizon)
    else:
        _, _, residual = _dp_float(spec, horizon)
    return SurvivalCurve(residual, mode)


def mean_exit(spec: WalkSpec, mode: str = MODE_FLOAT):
    """E[sigma] from state 0, by solving the absorbing-chain linear system.

    The expected times h(j) over interior states satisfy
    h(j) = 1 + p*h(j+1) + q*h(j-1) with h(+-k) = 0.
    """
    _check_mode(mode)
    k = spec.k
    m = 2 * k - 1
    if mode == MODE_FLOAT:
        p = spec.p_float()
        q = 1.0 - p
        A = np.eye(m)
        for i in range(m):
            if i + 1 < m:
                A[i, i + 1] -= p
            if i - 1 >= 0:
                A[i, i - 1] -= q
        h = np.linalg.solve(A, np.ones(m))
        return float(h[k - 1])
    p = spec.p_exact()
    q = 1 - p
    # Thomas algorithm on the tridiagonal system, exact rationals
    one = Fraction(1)
    diag = [one] * m
    upper = [-p] * (m - 1)
    lower = [-q] * (m - 1)
    rhs = [one] * m
    for i in range(1, m):
        w = lower[i - 1] / diag[i - 1]
        diag[i] -= w * upper[i - 1]
        rhs[i] -= w * rhs[i - 1]
    h = [Fraction(0)] * m
    h[m - 1] = rhs[m - 1] / diag[m - 1]
    for i in range(m - 2, -1, -1):
        h[i] = (rhs[i] - upper[i] * h[i + 1]) / diag[i]
    return h[k - 1]


def upper_exit_prob(spec: WalkSpec, mode: str = MODE_FLOAT):
    """P(S_sigma = +k): the classical gambler's-ruin split p^k / (p^k + q^k)."""
    _check_mode(mode)
    if mode == MODE_RATIONAL:
        p = spec.p_exact()
        q = 1 - p
        return p**spec.k / (p**spec.k + q**spec.k)
    p = spec.p_float()
    q = 1.0 - p
    return p**spec.k / (p**spec.k + q**spec.k)


def modulus_chain_up_prob(spec: WalkSpec, r: int, mode: str = MODE_FLOAT):
    """Up-step probability of the modulus chain |S_n| at level r.

    Equals 1 at r = 0 and (p^(r+1) + q^(r+1)) / (p^r + q^r) for r >= 1; this
    is the discrete counterpart of the tanh drift of |B_t + lambda t|.
    """
    _check_mode(mode)
    if not isinstance(r, int) or r < 0 or r >= spec.k:
        raise ValueError(f"level r must be an integer in [0, k), got {r!r}")
    if r == 0:
        return Fraction(1) if mode == MODE_RATIONAL else 1.0
    if mode == MODE_RATIONAL:
        p = spec.p_exact()
        q = 1 - p
        return (p ** (r + 1) + q ** (r + 1)) / (p**r + q**r)
    p = spec.p_float()
    q = 1.0 - p
    return (p ** (r + 1) + q ** (r + 1)) / (p**r + q**r)


def interior_decay_envelope(spec: WalkSpec):
    """(A, rho) with P(sigma > n) <= A * rho^n for all n.

    rho = 2*sqrt(pq)*cos(pi/(2k)) is the Perron value of the substochastic
    interior transition matrix; A comes from symmetrising the matrix with the
    diagonal weights (q/p)^(j/2).
    """
    p = spec.p_float()
    q = 1.0 - p
    k = spec.k
    rho = 2.0 * np.sqrt(p * q) * np.cos(np.pi / (2 * k))
    j = np.arange(-(k - 1), k)
    A = float(np.sqrt(np.sum((p / q) ** j)))
    return A, rho
