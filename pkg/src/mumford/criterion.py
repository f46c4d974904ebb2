"""The splitting decision for cyclic degree-p covers of the line.

The cover y^p - y = sum_i lambda_i/(x - a_i) degenerates completely
exactly when every pair of branch points keeps the product of its
lambda-sizes strictly below the squared distance:

    val(lambda_i) + val(lambda_j) > 2 val(a_i - a_j)    (i != j).

This module decides that inequality over exact Laurent data, exposes
the per-pair slack as a rational margin matrix, and transports branch
data along Moebius changes of the coordinate x (the verdict is
invariant; the change of variable also spins off an additive constant
to be absorbed into y).
"""

from .errors import (
    MumfordError,
    SchemaError,
    InsufficientPrecision,
    GenusTooSmall,
    DuplicateBranchPoints,
    InfinityBranchPoint,
    BranchPointSentToInfinity,
    PreconditionViolated,
)
from .valfield import FieldParams, LaurentElem, Valu
from .bt_tree import Moebius, is_infty


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def genus(p: int, r: int) -> int:
    """(p-1)(r-1): one Artin-Schreier sheet per branch point beyond
    the first, (p-1) cycles each."""
    if not _is_prime(p):
        raise PreconditionViolated(f"{p} is not prime")
    if r < 2:
        raise PreconditionViolated("need at least two branch points")
    return (p - 1) * (r - 1)


class BranchData:
    """Branch points a_i (finite, pairwise distinct) with nonzero
    residues lambda_i."""

    def __init__(self, params: FieldParams, a, lam):
        self.params = params
        self.a = list(a)
        self.lam = list(lam)
        if len(self.a) != len(self.lam):
            raise SchemaError("branch points and residues must pair up")
        if not self.a:
            raise SchemaError("empty branch data")
        for x in self.a:
            if is_infty(x):
                raise InfinityBranchPoint("branch points must be finite")
            if x.params != params:
                raise SchemaError("branch point parameter mismatch")
        for y in self.lam:
            if y.params != params:
                raise SchemaError("residue parameter mismatch")
            if y.is_zero():
                if y.is_exact():
                    raise SchemaError("residues must be nonzero")
                raise InsufficientPrecision(
                    "residue is zero to working precision")
        for i in range(len(self.a)):
            for j in range(i + 1, len(self.a)):
                diff = self.a[i] - self.a[j]
                if diff.is_zero():
                    if diff.is_exact():
                        raise DuplicateBranchPoints(f"a_{i+1} = a_{j+1}")
                    raise InsufficientPrecision(
                        f"a_{i+1} - a_{j+1} is zero to working precision")

    @property
    def r(self) -> int:
        return len(self.a)

    def __repr__(self):
        return f"BranchData(p={self.params.p}, r={self.r})"


class Verdict:
    """Outcome of the pairwise inequality test.

    margins[i][j] = val(lambda_i) + val(lambda_j) - 2 val(a_i - a_j)
    as an exact rational (None on the diagonal); the curve splits iff
    every off-diagonal margin is positive.  witness is the first
    violating pair in lexicographic order, 1-based.
    """

    def __init__(self, is_mumford, witness, margins):
        self.is_mumford = is_mumford
        self.witness = witness
        self.margins = margins

    def margin(self, i: int, j: int) -> Valu:
        return self.margins[i - 1][j - 1]

    def __repr__(self):
        tag = "mumford" if self.is_mumford else f"witness={self.witness}"
        return f"Verdict({tag})"


def is_mumford(bd: BranchData) -> Verdict:
    p, r = bd.params.p, bd.r
    if (p - 1) * (r - 1) < 2:
        raise GenusTooSmall(f"(p-1)(r-1) = {(p - 1) * (r - 1)} < 2")
    margins = [[None] * r for _ in range(r)]
    witness = None
    ok = True
    for i in range(r):
        for j in range(i + 1, r):
            m = (bd.lam[i].valuation() + bd.lam[j].valuation()
                 - (bd.a[i] - bd.a[j]).valuation() * 2)
            margins[i][j] = margins[j][i] = m
            if not (m > Valu(0)) and ok:
                ok = False
                witness = (i + 1, j + 1)
    return Verdict(ok, witness, margins)


def moebius_transform(bd: BranchData, g: Moebius, prec=None):
    """Transport branch data along x -> g(x).

    Writing the inverse as [[b, c], [d, e]], the new points are
    a_i' = -(c - a_i e)/(b - a_i d) = g(a_i) and the residues pick up
    the Jacobian factor lambda_i' = lambda_i (be - cd)(b - a_i d)^{-2}.
    The substitution also produces the additive constant
    sum_i lambda_i d/(b - a_i d), returned for the caller to absorb
    into the sheet coordinate.  Verdicts are invariant under this
    operation.
    """
    ginv = g.inverse()
    b, c, d, e = ginv.a, ginv.b, ginv.c, ginv.d
    det = b * e - c * d
    if det.is_zero():
        raise MumfordError("transformation is singular (to precision)")
    new_a, new_lam = [], []
    constant = LaurentElem.zero(bd.params)
    for i in range(bd.r):
        den = b - bd.a[i] * d
        if den.is_zero():
            if den.is_exact():
                raise BranchPointSentToInfinity(
                    f"g sends a_{i+1} to infinity")
            raise InsufficientPrecision(
                f"b - a_{i+1} d is zero to working precision")
        new_a.append(-(c - bd.a[i] * e).div(den, prec))
        new_lam.append((bd.lam[i] * det).div(den * den, prec))
        if not d.is_zero():
            constant = constant + (bd.lam[i] * d).div(den, prec)
    return BranchData(bd.params, new_a, new_lam), constant
