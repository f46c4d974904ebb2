"""Adapted affinoid coverings of the projective line.

Given branch data (a_i, lambda_i) satisfying the strict product-gap
criterion, this module builds the ladder of separating radii around
each branch point, enumerates the nonempty pieces the ladders cut out
of P^1, verifies exactly that the pieces cover, and classifies the
canonical reduction of the degree-p cover restricted to each piece.

Radii are carried as t-valuation exponents throughout: the closed ball
of radius exponent s around c is {x : val(x - c) >= s}, so radius order
is the *reverse* of exponent order.  Exponent +inf is the degenerate
radius-0 ball and -inf is all of P^1.  Branch points are numbered
1..r in every report, witness and label, matching the criterion
module's convention.
"""

from fractions import Fraction
from itertools import product
from math import inf

from .bt_tree import INFTY, hull_tree, is_infty
from .criterion import BranchData
from .errors import (
    AssertionFailed,
    BranchPointInsidePiece,
    CriterionViolated,
    ExtensionRequired,
    MultipleMinimizers,
    NotCovering,
    PreconditionViolated,
    RadiusNotInValueGroup,
)
from .valfield import LaurentElem, Valu, artin_schreier_solve, extend_field

__all__ = [
    "CONVENTIONS",
    "ThresholdTable",
    "build_thresholds",
    "Piece",
    "enumerate_pieces",
    "verify_cover",
    "dist_to_piece",
    "sup_norm_zi",
    "ReductionReport",
    "classify_reduction",
]


# provenance tags for ladder entries
TAG_EPS = "eps"
TAG_LAMBDA = "lambda"
TAG_PAIR = "pair-dist"
TAG_QUOTIENT = "quotient"
TAG_MIDPOINT = "midpoint"
TAG_ZETA = "zeta"

# reduction cases and shapes
CASE_LAMBDA_EMPTY = "LAMBDA_EMPTY"
CASE_SMALL_B2 = "SMALL_B2"
CASE_BIG_B1 = "BIG_B1"

SHAPE_SPLIT_SHEETS = "SPLIT_SHEETS"
SHAPE_NODAL_SPLIT = "NODAL_SPLIT"
SHAPE_RATIONAL_GRAPH = "RATIONAL_GRAPH"
SHAPE_NODE_PAIR = "NODE_PAIR"
SHAPE_SMOOTH_GM = "SMOOTH_GM"
SHAPE_LINE = "LINE"

CONVENTIONS = (
    "all radii are t-valuation exponents; radius order is the reverse of "
    "exponent order",
    "the separating radius between |lambda_i| and |a_i-a_j|^2/|lambda_j| "
    "sits at the geometric-mean exponent "
    "(val(lambda_i) + 2 val(a_i-a_j) - val(lambda_j))/2, so every threshold "
    "is a pure power of t with exponent denominator dividing 2e and the "
    "working ramification is e' = 2e",
    "the fitting radius eps_i sits one full t-exponent below the smallest "
    "remaining radius of its row",
    "index vectors cutting out the same point set collapse to one piece; "
    "the lexicographically smallest vector represents the class",
)


def _require_exponent(q, eprime, what="radius"):
    """Radius exponents must live in (1/e')Z; infinities are the
    degenerate sentinels and always pass."""
    q = q.value if isinstance(q, Valu) else q
    if q in (inf, -inf):
        return
    q = Fraction(q)
    if eprime % q.denominator:
        raise RadiusNotInValueGroup(
            f"{what} exponent {q} is not in the value group (1/{eprime})Z")


def _pair_vals(bd):
    """Matrix of val(a_i - a_j) as raw Fractions, +inf on the diagonal."""
    r = bd.r
    m = [[inf] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1, r):
            q = (bd.a[i] - bd.a[j]).valuation().value
            m[i][j] = m[j][i] = q
    return m


# ----------------------------------------------------------------------
# threshold ladders
# ----------------------------------------------------------------------

class ThresholdTable:
    """Ladders of separating radii, one per branch point.

    rows[i-1] lists (exponent, tags) pairs in ascending radius order,
    i.e. strictly decreasing exponents; entry n of the row is the n-th
    finite rung.  The virtual rungs n = 0 (radius zero) and n = M(i)
    (all of P^1) are reported by alpha_exp as +inf / -inf exponents.
    """

    __slots__ = ("params", "rows", "eprime", "conventions")

    def __init__(self, params, rows, eprime):
        for row in rows:
            for q, _tags in row:
                _require_exponent(q, eprime, "ladder")
        self.params = params
        self.rows = tuple(tuple(row) for row in rows)
        self.eprime = eprime
        self.conventions = CONVENTIONS

    @property
    def r(self) -> int:
        return len(self.rows)

    def M(self, i: int) -> int:
        """Band count for branch point i (1-based); indices n_i run over
        0 .. M(i) - 1."""
        return len(self.rows[i - 1]) + 1

    def alpha_exp(self, i: int, n: int) -> Valu:
        """Exponent of the n-th rung of row i (both 1-based, with the
        two virtual end rungs included)."""
        row = self.rows[i - 1]
        if n == 0:
            return Valu.infinite()
        if n == len(row) + 1:
            return Valu.neg_infinite()
        return row[n - 1][0]

    def tags(self, i: int, n: int):
        return self.rows[i - 1][n - 1][1]

    def to_json(self):
        return {
            "field": self.params.to_json(),
            "eprime": self.eprime,
            "conventions": list(self.conventions),
            "rows": [
                [{"exp": q.to_json(), "tags": list(tags)} for (q, tags) in row]
                for row in self.rows
            ],
        }

    def __repr__(self):
        sizes = ",".join(str(len(row)) for row in self.rows)
        return f"ThresholdTable(r={self.r}, rungs=[{sizes}], e'={self.eprime})"


def build_thresholds(bd: BranchData):
    """Separating-radius ladders for the branch data; returns
    (table, e') where e' = 2e is the ramification the ladder needs.

    Row i collects, as t-valuation exponents: |lambda_i|, every pairwise
    distance |a_i - a_j|, every quotient |a_i - a_j|^2/|lambda_j|, the
    geometric-mean separator between those two, the geometric means of
    strictly nested pairwise distances, and a fitting radius eps_i
    strictly below everything else in the row.

    Raises CriterionViolated (with the first offending pair, 1-based)
    when the strict product gap fails; the construction is meaningless
    without it.
    """
    params = bd.params
    r = bd.r
    lam_v = [x.valuation().value for x in bd.lam]
    dist = _pair_vals(bd)
    for i in range(r):
        for j in range(i + 1, r):
            if not lam_v[i] + lam_v[j] > 2 * dist[i][j]:
                raise CriterionViolated((i + 1, j + 1))

    rows = []
    for i in range(r):
        marks = {}

        def put(q, tag, marks=marks):
            marks.setdefault(q, set()).add(tag)

        put(lam_v[i], TAG_LAMBDA)
        for j in range(r):
            if j == i:
                continue
            put(dist[i][j], TAG_PAIR)
            quot = 2 * dist[i][j] - lam_v[j]
            put(quot, TAG_QUOTIENT)
            # criterion guarantees lam_v[i] > quot, so the mean separates
            put((lam_v[i] + quot) / 2, TAG_MIDPOINT)
        for j in range(r):
            for k in range(r):
                if i in (j, k) or j == k:
                    continue
                if dist[i][j] > dist[i][k]:  # |a_i-a_j| < |a_i-a_k|
                    put((dist[i][j] + dist[i][k]) / 2, TAG_ZETA)
        put(max(marks) + 1, TAG_EPS)
        rows.append(tuple(
            (Valu(q), tuple(sorted(marks[q])))
            for q in sorted(marks, reverse=True)))

    table = ThresholdTable(params, tuple(rows), 2 * params.e)
    return table, table.eprime


# ----------------------------------------------------------------------
# pieces
# ----------------------------------------------------------------------

class Piece:
    """One member of the covering, in ball normal form:

        { |x - d0| <= beta }  minus the open holes,

    where every hole is an open ball around a branch point; the hole
    around d0 itself has radius b1 (absent when b1 = 0) and is listed
    first, and each satellite hole has radius exactly its distance to
    d0, which equals b1 or beta.  beta_exp = -inf means the outer ball
    is all of P^1 and the piece contains infinity, in which case its
    function theory lives in the chart 1/(x - d0).

    ann_lo/ann_hi are the defining valuation bands out of the ladder
    (membership <=> ann_lo[i] <= val(x - a_i) <= ann_hi[i] for all i);
    hand-built pieces may omit them.  Pieces are immutable and every
    operation on them is pure, so distinct indices can be processed in
    parallel.
    """

    __slots__ = ("index", "params", "l0", "d0", "beta_exp", "b1_exp",
                 "holes", "ann_lo", "ann_hi", "aliases", "in_J")

    def __init__(self, index, params, l0, d0, beta_exp, b1_exp, holes,
                 ann_lo=None, ann_hi=None, aliases=(), in_J=True):
        self.index = tuple(index)
        self.params = params
        self.l0 = l0                      # 1-based label of d0
        self.d0 = d0
        self.beta_exp = beta_exp
        self.b1_exp = b1_exp
        self.holes = tuple(holes)         # (1-based label, center, rho_exp)
        self.ann_lo = None if ann_lo is None else tuple(ann_lo)
        self.ann_hi = None if ann_hi is None else tuple(ann_hi)
        self.aliases = tuple(aliases)
        self.in_J = in_J

    @classmethod
    def from_radii(cls, bd, l0, beta_exp, b1_exp=None, satellites=(), index=()):
        """Hand-build a piece in normal form from branch data.

        l0 and the satellite labels are 1-based; radii are Valu (or raw)
        exponents and must lie in the working value group (1/2e)Z.
        """
        eprime = 2 * bd.params.e
        beta_exp = Valu(beta_exp)
        b1_exp = Valu.infinite() if b1_exp is None else Valu(b1_exp)
        _require_exponent(beta_exp, eprime, "outer")
        _require_exponent(b1_exp, eprime, "central hole")
        d0 = bd.a[l0 - 1]
        holes = []
        if not b1_exp == Valu.infinite():
            holes.append((l0, d0, b1_exp))
        for (k, rho) in satellites:
            rho = Valu(rho)
            _require_exponent(rho, eprime, "hole")
            holes.append((k, bd.a[k - 1], rho))
        return cls(index, bd.params, l0, d0, beta_exp, b1_exp, holes)

    @property
    def contains_infinity(self) -> bool:
        return self.beta_exp == Valu.neg_infinite()

    @property
    def chart(self) -> str:
        return "1/(x-d0)" if self.contains_infinity else "x"

    def contains(self, x) -> bool:
        """Exact membership of a field element (or the infinite end)."""
        if is_infty(x):
            return self.contains_infinity
        if (x - self.d0).valuation() < self.beta_exp:
            return False
        return all((x - c).valuation() <= rho for (_k, c, rho) in self.holes)

    def to_json(self):
        return {
            "index": list(self.index),
            "aliases": [list(n) for n in self.aliases],
            "l0": self.l0,
            "d0": str(self.d0),
            "beta_exp": self.beta_exp.to_json(),
            "b1_exp": self.b1_exp.to_json(),
            "holes": [{"at": k, "rho_exp": rho.to_json()}
                      for (k, _c, rho) in self.holes],
            "chart": self.chart,
            "in_J": self.in_J,
        }

    def __repr__(self):
        return (f"Piece{self.index}(d0=a_{self.l0}, beta={self.beta_exp!r}, "
                f"b1={self.b1_exp!r}, holes={len(self.holes)})")


def _normal_form(n, padded, dist, r):
    """Ball normal form of the piece at index n, or None when empty.

    Works over the algebraic closure: the value group is all of Q and
    the residue field is infinite, so a closed ball is never exhausted
    by finitely many strictly smaller open holes.  Returns
    (l0 0-based, beta, b1, satellites, out, inn) with raw exponents.
    """
    out = [padded[i][n[i] + 1] for i in range(r)]
    inn = [padded[i][n[i]] for i in range(r)]

    # the smallest outer ball must sit inside every other one
    lstar = max(range(r), key=lambda i: (out[i], -i))
    beta = out[lstar]
    for j in range(r):
        if j != lstar and dist[lstar][j] < out[j]:
            return None

    # inner constraints: a started ladder removes an open ball, a hole
    # bigger than the outer ball (or holding it at a distance) kills n
    holes = []
    for i in range(r):
        if n[i] == 0:
            continue
        rho, s = inn[i], dist[lstar][i]
        if s >= beta:
            if rho < beta:
                return None
            holes.append((i, rho))
        elif s > rho:
            return None

    # canonical label: an open ball is named after the smallest branch
    # index strictly inside it; equal balls then collide and nested
    # holes are dropped
    canon = {(min(j for j in range(r) if dist[i][j] > rho), rho)
             for (i, rho) in holes}
    kept = [
        (k, rho) for (k, rho) in canon
        if not any((k2, rho2) != (k, rho) and rho2 <= rho and dist[k][k2] > rho2
                   for (k2, rho2) in canon)
    ]
    for ix, (k, rho) in enumerate(kept):
        for (k2, rho2) in kept[ix + 1:]:
            if dist[k][k2] > min(rho, rho2):
                raise AssertionFailed("holes overlap without nesting",
                                      witness=(n, k + 1, k2 + 1))

    if kept:
        b1 = max(rho for (_k, rho) in kept)
        l0 = min(k for (k, rho) in kept if rho == b1)
        sats = sorted((k, rho) for (k, rho) in kept if k != l0)
    else:
        b1 = inf
        l0 = min(j for j in range(r) if dist[lstar][j] >= beta)
        sats = []

    # rigidity of the normal form: satellites sit at distance exactly
    # their radius from d0, and that distance is b1 or beta
    for (k, rho) in sats:
        if dist[l0][k] != rho or (rho != b1 and rho != beta):
            raise AssertionFailed(
                "satellite hole breaks the two-radius normal form",
                witness=(n, l0 + 1, k + 1))
    return l0, beta, b1, sats, out, inn


def enumerate_pieces(table: ThresholdTable, bd: BranchData):
    """All nonempty pieces cut out by the ladders, deduplicated.

    Walks the full index box, drops indices where a pairwise distance
    hits the outer rung on both sides at once (the boundary-clash
    exclusion), drops empty intersections by ultrametric ball calculus,
    and normalizes the survivors.  Index vectors with the same point
    set collapse to one Piece carrying the others as aliases.
    """
    if table.params != bd.params:
        raise PreconditionViolated("ladder and branch data fields differ")
    r = bd.r
    if table.r != r:
        raise PreconditionViolated("ladder row count != branch point count")

    padded = [[inf] + [q.value for (q, _t) in table.rows[i]] + [-inf]
              for i in range(r)]
    dist = _pair_vals(bd)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]

    found = {}
    for n in product(*[range(len(row) - 1) for row in padded]):
        if any(dist[i][j] == padded[i][n[i] + 1] == padded[j][n[j] + 1]
               for (i, j) in pairs):
            continue  # boundary clash: both outer rungs sit on the distance
        nf = _normal_form(n, padded, dist, r)
        if nf is None:
            continue
        l0, beta, b1, sats, out, inn = nf
        key = (l0, beta, b1, tuple(sats))
        if key in found:
            found[key].aliases += (n,)
            continue
        holes = []
        if b1 != inf:
            holes.append((l0 + 1, bd.a[l0], Valu(b1)))
        holes.extend((k + 1, bd.a[k], Valu(rho)) for (k, rho) in sats)
        found[key] = Piece(
            n, bd.params, l0 + 1, bd.a[l0], Valu(beta), Valu(b1), holes,
            ann_lo=[Valu(q) for q in out], ann_hi=[Valu(q) for q in inn])
    return list(found.values())


# ----------------------------------------------------------------------
# covering verification
# ----------------------------------------------------------------------

def _hull_segments(bd):
    """Branches of the hull tree of {a_1..a_r, infinity} as one-parameter
    families: (profile h, s_lo, s_hi, label) with h_i = val(c - a_i) for
    the branch's deep center c; along the branch the point at height s
    has valuation profile (min(s, h_i))_i."""
    hull = hull_tree(list(bd.a) + [INFTY])
    e = bd.params.e

    def lift(v):
        return LaurentElem(bd.params, v.center.terms)

    def profile(c):
        out = []
        for a in bd.a:
            d = c - a
            out.append(inf if d.is_zero() else Fraction(d.min_exp(), e))
        return tuple(out)

    segs = []
    for (i, j, _len) in hull.edges:
        u, v = hull.nodes[i], hull.nodes[j]
        deep = u if u.level >= v.level else v
        segs.append((profile(lift(deep)),
                     Fraction(min(u.level, v.level), e),
                     Fraction(max(u.level, v.level), e),
                     f"edge {u.label()} -- {v.label()}"))
    for k in range(bd.r):
        lo = hull.nodes[hull.attach[k]].level
        segs.append((profile(bd.a[k]), Fraction(lo, e), inf,
                     f"ray to a_{k + 1}"))
    top = hull.nodes[hull.attach[bd.r]]
    segs.append((profile(lift(top)), -inf, Fraction(top.level, e),
                 "ray to infinity"))
    return segs


def _branch_interval(lo_band, hi_band, h, s_lo, s_hi):
    """The s-interval of a branch on which min(s, h_i) stays within
    [lo_band_i, hi_band_i] for every i, or None."""
    lo, hi = s_lo, s_hi
    for i, hcap in enumerate(h):
        if hcap < lo_band[i]:
            return None             # this coordinate can never get large enough
        if lo_band[i] > lo:
            lo = lo_band[i]
        if hcap > hi_band[i] and hi_band[i] < hi:
            hi = hi_band[i]         # the cap only binds where h_i overshoots
    return (lo, hi) if lo <= hi else None


def _sweep(ivals, s_lo, s_hi):
    """Greedy exact covering of [s_lo, s_hi] by closed intervals.

    Returns (True, used) or (False, gap_point) with a finite rational
    gap point that no interval contains.
    """
    cur = s_lo
    used = []
    while True:
        best = None
        for (lo, hi, idx) in ivals:
            if lo <= cur <= hi and (best is None or hi > best[0]):
                best = (hi, idx)
        if best is None:
            if cur != -inf:
                return False, cur
            nxt = min((lo for (lo, _hi, _i) in ivals if lo != -inf),
                      default=s_hi)
            return False, nxt - 1
        used.append((best[1], cur, best[0]))
        if best[0] >= s_hi:
            return True, used
        if best[0] <= cur:
            # covered through cur but nothing extends past it
            nxt = min((lo for (lo, _hi, _i) in ivals if lo > cur), default=inf)
            bound = min(nxt, s_hi)
            gap = cur + 1 if bound == inf else (cur + bound) / 2
            return False, gap
        cur = best[0]


def verify_cover(pieces, bd: BranchData, raise_on_gap=False):
    """Exact verification that the pieces cover P^1.

    Membership in a piece depends on x only through the valuation
    profile (val(x - a_i))_i, and along each branch of the hull tree of
    the branch points and infinity that profile is the one-parameter
    family min(s, h_i).  Each piece meets a branch in a closed
    s-interval, so the check reduces to exact 1-D interval covering
    per branch.

    Returns (ok, certificate); the certificate lists per branch the
    pieces used in sweep order, or carries the uncovered profile on
    failure (raised as NotCovering when raise_on_gap is set).
    """
    for pc in pieces:
        if pc.ann_lo is None or pc.ann_hi is None:
            raise PreconditionViolated(
                f"piece {pc.index} lacks its defining valuation bands")
    bands = [(tuple(v.value for v in pc.ann_lo),
              tuple(v.value for v in pc.ann_hi),
              pc.index) for pc in pieces]

    def enc(q):
        return Valu(q).to_json()

    branches = []
    for (h, s_lo, s_hi, label) in _hull_segments(bd):
        ivals = []
        for (lo_band, hi_band, idx) in bands:
            iv = _branch_interval(lo_band, hi_band, h, s_lo, s_hi)
            if iv is not None:
                ivals.append((iv[0], iv[1], idx))
        ok, res = _sweep(ivals, s_lo, s_hi)
        if not ok:
            witness = tuple(Valu(min(res, hc)) for hc in h)
            if raise_on_gap:
                raise NotCovering(witness, f"gap on branch '{label}'")
            return False, {
                "covers": False,
                "branch": label,
                "gap_height": enc(res),
                "witness": [w.to_json() for w in witness],
            }
        branches.append({
            "branch": label,
            "range": [enc(s_lo), enc(s_hi)],
            "pieces": [{"index": list(idx), "from": enc(lo), "to": enc(hi)}
                       for (idx, lo, hi) in res],
        })
    return True, {
        "covers": True,
        "piece_count": len(pieces),
        "branches": branches,
        "conventions": list(CONVENTIONS),
    }


# ----------------------------------------------------------------------
# distances, norms, reduction types
# ----------------------------------------------------------------------

def dist_to_piece(a, piece: Piece) -> Valu:
    """Distance from a point to the piece as a radius exponent; +inf
    means the point lies on the piece.  The infimum is attained: on the
    sphere of the hole holding a, or at constant distance |a - d0|
    outside the outer ball."""
    if is_infty(a):
        return Valu.infinite() if piece.contains_infinity \
            else Valu.neg_infinite()
    v = (a - piece.d0).valuation()
    if v < piece.beta_exp:
        return v
    for (_k, c, rho) in piece.holes:
        if (a - c).valuation() > rho:
            return rho
    return Valu.infinite()


def sup_norm_zi(piece: Piece, bd: BranchData, i: int) -> Valu:
    """Exponent of the supremum norm of lambda_i/(x - a_i) on the piece
    (i is 1-based).  Raises BranchPointInsidePiece when the pole a_i
    lies on the piece and the supremum is +inf."""
    if not 1 <= i <= bd.r:
        raise PreconditionViolated(f"branch index {i} out of range 1..{bd.r}")
    d = dist_to_piece(bd.a[i - 1], piece)
    if d == Valu.infinite():
        raise BranchPointInsidePiece(
            f"a_{i} lies on piece {piece.index}: sup |lambda_{i}/(x-a_{i})| "
            "= +inf")
    return bd.lam[i - 1].valuation() - d


def _graph_is_smooth(p: int, c_res: int) -> bool:
    """Jacobian criterion for F = t(y^p - y) - c over the residue field.

    dF/dy = -t in characteristic p and dF/dt = y^p - y, so a singular
    point forces t = 0 and then F = -c: the curve is smooth iff the
    residue c is nonzero.
    """
    return c_res != 0


class ReductionReport:
    """Classification of the canonical reduction of the cover over one
    piece.  All branch indices are 1-based; b1p/b2p are concrete
    elements over the e' = 2e extension (b2p is the infinite end when
    the inner hole is a point), and exponents are carried separately
    for the valuation tests."""

    __slots__ = ("piece_index", "Lambda", "m", "case", "ring_shape",
                 "passes_condition", "b1p_exp", "b2p_exp", "b1p", "b2p",
                 "Cp", "C", "residue_params", "dist_exps", "f_margins",
                 "c2_extension", "eprime")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw.pop(name))
        if kw:
            raise TypeError(f"unknown report fields {sorted(kw)}")

    def _enc_elem(self, x):
        if x is None:
            return None
        if is_infty(x):
            return "inf"
        return str(x)

    def to_json(self):
        return {
            "piece": list(self.piece_index),
            "Lambda": list(self.Lambda),
            "m": self.m,
            "case": self.case,
            "ring_shape": self.ring_shape,
            "passes_condition": self.passes_condition,
            "b1p_exp": None if self.b1p_exp is None else self.b1p_exp.to_json(),
            "b2p_exp": None if self.b2p_exp is None else self.b2p_exp.to_json(),
            "b1p": self._enc_elem(self.b1p),
            "b2p": self._enc_elem(self.b2p),
            "Cp": self._enc_elem(self.Cp),
            "C": self._enc_elem(self.C),
            "residue_params": self.residue_params,
            "dist_exps": [d.to_json() for d in self.dist_exps],
            "f_margins": {str(i): m.to_json() for i, m in self.f_margins.items()},
            "c2_extension": list(self.c2_extension),
            "eprime": self.eprime,
            "conventions": list(CONVENTIONS),
        }

    def __repr__(self):
        return (f"ReductionReport({self.piece_index}, case={self.case}, "
                f"shape={self.ring_shape}, Lambda={self.Lambda}, m={self.m})")


def classify_reduction(piece: Piece, bd: BranchData) -> ReductionReport:
    """Identify the canonical reduction of the degree-p cover over one
    piece and verify it is a union of rational curves meeting in
    ordinary double points.

    The polar set Lambda collects the i whose partial fraction reaches
    absolute value >= 1 on the piece; off Lambda the terms reduce to
    zero.  For nonempty Lambda the unique distance minimizer m carries
    the whole reduction: the image of lambda_m/(x - a_m) (plus the
    constant Cp) is a closed annulus with radii |b1p| <= |b2p| that
    never straddles the unit circle, and the shape follows from which
    side it sits on and the residues of the endpoints.
    """
    params = bd.params
    p = params.p
    eprime = 2 * params.e
    _require_exponent(piece.beta_exp, eprime, "outer")
    _require_exponent(piece.b1_exp, eprime, "central hole")
    for (_k, _c, rho) in piece.holes:
        _require_exponent(rho, eprime, "hole")

    dists = tuple(dist_to_piece(a, piece) for a in bd.a)
    lam_v = [x.valuation() for x in bd.lam]
    Lam = tuple(i + 1 for i in range(bd.r) if dists[i] >= lam_v[i])

    if not Lam:
        # all partial fractions die in reduction and the p sheets split
        return ReductionReport(
            piece_index=piece.index, Lambda=Lam, m=None,
            case=CASE_LAMBDA_EMPTY, ring_shape=SHAPE_SPLIT_SHEETS,
            passes_condition=True, b1p_exp=None, b2p_exp=None,
            b1p=None, b2p=None, Cp=None, C=None,
            residue_params={"sheets": p, "holes": len(piece.holes),
                            "presentation": f"{p} disjoint sheets over the "
                                            "piece reduction"},
            dist_exps=dists, f_margins={}, c2_extension=(1, 1),
            eprime=eprime)

    if piece.contains_infinity:
        raise AssertionFailed("unbounded piece with nonempty polar set",
                              witness=piece.index)

    best = max(dists[i - 1] for i in Lam)
    mins = [i for i in Lam if dists[i - 1] == best]
    if len(mins) > 1:
        raise MultipleMinimizers(
            f"branch points {mins} are equidistant from piece {piece.index}; "
            "the strict product gap must fail")
    m = mins[0]
    am = bd.a[m - 1]
    if dists[m - 1] == Valu.infinite() and not piece.b1_exp == Valu.infinite():
        raise PreconditionViolated(
            f"a_{m} lies on piece {piece.index} which has a central hole")

    # smallness of the tail f: every other polar term stays < 1 because
    # |x - a_i| is pinned to |a_m - a_i| and |x - a_m| is capped
    sup_xm = min(piece.beta_exp, (am - piece.d0).valuation())
    f_margins = {}
    for i in Lam:
        if i == m:
            continue
        marg = lam_v[i - 1] + sup_xm - (bd.a[i - 1] - am).valuation() * 2
        if not marg > 0:
            raise AssertionFailed(
                "partial-fraction tail reaches absolute value 1 on the piece",
                witness=(i, m))
        f_margins[i] = marg

    C = LaurentElem.zero(params)
    for i in Lam:
        if i != m:
            C = C - bd.lam[i - 1].div(bd.a[i - 1] - am)

    extp = params.extension(2)
    lam_ext = extend_field(bd.lam[m - 1], 2)

    def t_pow(q):
        k = Fraction(q) * extp.e
        return LaurentElem(extp, {int(k): 1})

    case_a = dists[m - 1] == piece.b1_exp
    if case_a:
        # the annulus |b1| <= |x - a_m| <= beta maps to radii
        # |lam_m|/beta .. |lam_m|/|b1|, with the outer end open to
        # infinity when b1 = 0
        b1p_exp = lam_v[m - 1] - piece.beta_exp
        b2p_exp = lam_v[m - 1] - piece.b1_exp
        b1p = lam_ext * t_pow(-piece.beta_exp.value)
        b2p = INFTY if piece.b1_exp == Valu.infinite() \
            else lam_ext * t_pow(-piece.b1_exp.value)
        Cp = LaurentElem.zero(params)
    else:
        if not dists[m - 1] <= piece.beta_exp:
            raise AssertionFailed(
                "distance to the nearest branch point is neither the "
                "central radius nor at least the outer radius",
                witness=(piece.index, m))
        if piece.b1_exp == Valu.infinite():
            raise AssertionFailed(
                "ball piece classified away from its interior branch point",
                witness=(piece.index, m))
        # |x - a_m| is constant, so recentering by Cp = lam_m/(a_m - d0)
        # turns the image into the annulus scaled by |a_m - d0|^-2
        dd = am - piece.d0
        vds = dd.valuation()
        b1p_exp = lam_v[m - 1] + piece.b1_exp - vds * 2
        b2p_exp = lam_v[m - 1] + piece.beta_exp - vds * 2
        dd_inv = extend_field(dd, 2).inverse()
        b1p = lam_ext * t_pow(piece.b1_exp.value) * dd_inv * dd_inv
        b2p = lam_ext * t_pow(piece.beta_exp.value) * dd_inv * dd_inv
        Cp = bd.lam[m - 1].div(dd)

    # the vertical shift y -> y - C'' absorbing C - Cp only moves the
    # presentation by a constant; record the extension it would need
    try:
        artin_schreier_solve(C - Cp)
        c2_ext = (1, 1)
    except ExtensionRequired as exc:
        c2_ext = (exc.e2, exc.f2)

    ff = extp.ff
    if b2p_exp >= 0:
        # |b1p| <= |b2p| <= 1 (bounded side; preferred when both apply)
        case = CASE_SMALL_B2
        b2_res = b2p.residue() if b2p_exp == 0 else 0
        if b2_res == 0:
            node = (b1p.div(b2p)).residue() if b1p_exp == b2p_exp else 0
            shape = SHAPE_NODAL_SPLIT
            passes = True
            residue_params = {
                "sheets": p, "node_parameter": node,
                "presentation": f"k[s,t,y]/(st - {node}, y^{p} - y)"}
        else:
            b1_res = b1p.residue() if b1p_exp == 0 else 0
            if b1_res == 0:
                shape = SHAPE_NODAL_SPLIT
                passes = True
                residue_params = {
                    "sheets": p, "b1p_residue": 0, "b2p_residue": b2_res,
                    "presentation": f"k[t,y]/(t(y^{p} - y))"}
            else:
                shape = SHAPE_RATIONAL_GRAPH
                passes = _graph_is_smooth(p, b1_res)
                residue_params = {
                    "b1p_residue": b1_res, "b2p_residue": b2_res,
                    "presentation": f"k[t,y]/(t(y^{p} - y) - {b1_res})"}
    elif b1p_exp <= 0:
        case = CASE_BIG_B1
        if is_infty(b2p):
            xi_prime = ff.pth_root(b1p.inverse().residue()) \
                if b1p_exp == 0 else 0
            shape = SHAPE_LINE
            passes = True
            residue_params = {"xi_prime_residue": xi_prime,
                              "presentation": "k[w]"}
        else:
            ratio = b1p.div(b2p)  # valuation b1p_exp - b2p_exp >= 0
            xi_ratio = ff.pth_root(ratio.residue()) \
                if b1p_exp == b2p_exp else 0
            shape = SHAPE_SMOOTH_GM if xi_ratio else SHAPE_NODE_PAIR
            passes = True
            residue_params = {"xi_ratio_residue": xi_ratio,
                              "presentation": f"k[u,w]/(uw - {xi_ratio})"}
    else:
        raise AssertionFailed("reduced annulus straddles the unit circle",
                              witness=(piece.index, b1p_exp, b2p_exp))

    return ReductionReport(
        piece_index=piece.index, Lambda=Lam, m=m, case=case,
        ring_shape=shape, passes_condition=passes,
        b1p_exp=b1p_exp, b2p_exp=b2p_exp, b1p=b1p, b2p=b2p, Cp=Cp, C=C,
        residue_params=residue_params, dist_exps=dists,
        f_margins=f_margins, c2_extension=c2_ext, eprime=eprime)
