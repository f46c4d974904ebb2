"""The Bruhat-Tits tree of PGL_2 over K = F_{p^f}((pi)).

Vertices are kept in ball form (center, level): the vertex (a, n) is
the closed ball of radius |pi|^n around a, equivalently the lattice
class spanned by (pi^n, 0) and (a, 1).  Levels are pi-unit integers.
Two pairs name the same vertex iff the centers agree mod pi^level, so
canonical reduction of the center makes equality representational.

Ends of the tree are points of P^1(K): a LaurentElem or the INFTY
sentinel.  Mirrors of parabolic elements are handled through the
fixed-vertex predicate only; they are infinite subtrees (horoball
neighborhoods of the fixed end) and are never materialized.
"""

from __future__ import annotations

from math import inf

from .errors import (
    AssertionFailed,
    CoincidentEnds,
    DuplicatePoints,
    InsufficientPrecision,
    MirrorsIntersect,
    MumfordError,
    NotParabolic,
)
from .valfield import DEFAULT_PREC, FieldParams, LaurentElem, Valu


class _Infinity:
    """The end at infinity of P^1."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFTY"


INFTY = _Infinity()


def is_infty(x) -> bool:
    return x is INFTY


def val_pi(x: LaurentElem):
    """Valuation in pi-units as an int, or +inf for (apparent) zero."""
    m = x.min_exp()
    if m is not None:
        return m
    return inf if x.prec is None else x.prec


def _ends_equal(a, b) -> bool:
    if is_infty(a) or is_infty(b):
        return is_infty(a) and is_infty(b)
    return (a - b).is_zero()


def _sep_val(a, b):
    """val_pi(a - b) for two ends that must be distinct; raises when the
    data cannot tell them apart."""
    if is_infty(a) or is_infty(b):
        if is_infty(a) and is_infty(b):
            raise CoincidentEnds("both ends are infinity")
        return None  # separation against infinity is not a valuation
    d = a - b
    if d.is_zero():
        raise CoincidentEnds("ends agree to working precision")
    return d.min_exp()


# ----------------------------------------------------------------------
# vertices
# ----------------------------------------------------------------------

class TreeVertex:
    """Canonical ball form (center mod pi^level, level)."""

    __slots__ = ("center", "level")

    def __init__(self, center: LaurentElem, level: int, _canonical=False):
        if _canonical:
            self.center = center
            self.level = level
            return
        v = vertex_canonical(center, level)
        self.center = v.center
        self.level = v.level

    @property
    def params(self) -> FieldParams:
        return self.center.params

    def __eq__(self, other):
        if not isinstance(other, TreeVertex):
            return NotImplemented
        return self.level == other.level and self.center.terms == other.center.terms

    def __hash__(self):
        return hash((self.level, tuple(sorted(self.center.terms.items()))))

    def __repr__(self):
        return self.label()

    def label(self) -> str:
        # the precision tail of the center is implied by the level
        bare = LaurentElem(self.params, self.center.terms)
        return f"({bare}, {self.level})"

    def sort_key(self):
        return (self.level, sorted(self.center.terms.items()))

    def contains_end(self, a) -> bool:
        """Whether the end a lies in the ball (is reachable through the
        upward subtree)."""
        if is_infty(a):
            return False
        return val_pi(self.center - a) >= self.level


def vertex_canonical(a: LaurentElem, n: int) -> TreeVertex:
    if a.prec is not None and a.prec < n:
        raise InsufficientPrecision(
            f"center known to pi-precision {a.prec} < level {n}")
    center = LaurentElem(a.params, {k: c for k, c in a.terms.items() if k < n}, n)
    return TreeVertex(center, n, _canonical=True)


def base_vertex(params: FieldParams) -> TreeVertex:
    """v_1 = (0, 0), the lattice class of the standard basis."""
    return vertex_canonical(LaurentElem.zero(params), 0)


def distance(v: TreeVertex, w: TreeVertex) -> int:
    m, n = v.level, w.level
    sep = val_pi(v.center - w.center)
    return m + n - 2 * min(m, n, sep)


# ----------------------------------------------------------------------
# meets: medians of ends and projections of vertices
# ----------------------------------------------------------------------

def meet_vertex(a, b, c) -> TreeVertex:
    """The median vertex of three ends, or the projection of a vertex
    onto the geodesic between two ends.

    With three pairwise distinct ends the geodesics between them meet
    in a single vertex.  With (a, b, w: TreeVertex) the result is the
    vertex of the line ]a,b[ closest to w.
    """
    if isinstance(c, TreeVertex):
        return _project(a, b, c)
    return _median(a, b, c)


def _median(a, b, c) -> TreeVertex:
    ends = [a, b, c]
    n_inf = sum(1 for x in ends if is_infty(x))
    if n_inf > 1:
        raise CoincidentEnds("more than one end at infinity")
    if n_inf == 1:
        fin = [x for x in ends if not is_infty(x)]
        v = _sep_val(fin[0], fin[1])
        return vertex_canonical(fin[0], v)
    # all finite: the median is the smallest ball containing the closest pair
    v_ab = _sep_val(a, b)
    v_ac = _sep_val(a, c)
    v_bc = _sep_val(b, c)
    best = max(v_ab, v_ac, v_bc)
    if v_ab == best:
        return vertex_canonical(a, best)
    if v_ac == best:
        return vertex_canonical(a, best)
    return vertex_canonical(b, best)


def _project(a, b, w: TreeVertex) -> TreeVertex:
    if _ends_equal(a, b):
        raise CoincidentEnds("geodesic needs two distinct ends")
    x, n = w.center, w.level
    if is_infty(a) or is_infty(b):
        fin = b if is_infty(a) else a
        lev = min(n, val_pi(x - fin))
        return vertex_canonical(fin, lev)
    A = min(n, val_pi(x - a))
    B = min(n, val_pi(x - b))
    V = _sep_val(a, b)
    if A == n and B == n:
        return vertex_canonical(a, V)      # both ends inside the ball
    if A == n or B == n:
        return w                            # w itself sits on the line
    if A != B:
        return vertex_canonical(x, max(A, B))
    return vertex_canonical(a, max(V, A))   # V >= A here by the ultrametric


def geodesic_vertex(a, b, s: int) -> TreeVertex:
    """Parametrized line through two ends.

    Finite pair: s = 0 is the turning point (a, val(a-b)); s > 0 walks
    toward a, s < 0 toward b.  With b = INFTY: returns (a, s).
    """
    if is_infty(b):
        return vertex_canonical(a, s)
    if is_infty(a):
        return vertex_canonical(b, -s)
    V = _sep_val(a, b)
    if s >= 0:
        return vertex_canonical(a, V + s)
    return vertex_canonical(b, V - s)


def step_toward(v: TreeVertex, w: TreeVertex) -> TreeVertex:
    """The neighbor of v on the geodesic to w (v != w)."""
    if v == w:
        raise MumfordError("no step between equal vertices")
    a = LaurentElem(v.params, v.center.terms)
    b = LaurentElem(w.params, w.center.terms)
    peak = min(v.level, w.level, val_pi(a - b))
    if v.level > peak:
        return vertex_canonical(a, v.level - 1)
    return vertex_canonical(b, v.level + 1)


def vertex_neighbors(v: TreeVertex):
    """The q + 1 neighbors: the parent ball and the q children."""
    params = v.params
    a = LaurentElem(params, v.center.terms)
    out = [vertex_canonical(a, v.level - 1)]
    for c in range(params.ff.q):
        child = a + LaurentElem(params, {v.level: c}) if c else a
        out.append(vertex_canonical(child, v.level + 1))
    return out


def geodesic_param(a, b, v: TreeVertex) -> int:
    """Inverse of geodesic_vertex for a vertex lying on the line."""
    if is_infty(b):
        return v.level
    if is_infty(a):
        return -v.level
    V = _sep_val(a, b)
    if v.contains_end(a) or v.level <= V:
        return v.level - V
    return V - v.level


# ----------------------------------------------------------------------
# Moebius transformations
# ----------------------------------------------------------------------

class Moebius:
    """An element of PGL_2(K): a 2x2 matrix up to scaling."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d
        if a.params != b.params or a.params != c.params or a.params != d.params:
            raise MumfordError("matrix entries over different fields")

    @classmethod
    def from_ints(cls, params: FieldParams, rows) -> "Moebius":
        (a, b), (c, d) = rows
        mk = lambda n: LaurentElem.from_int(params, n)
        return cls(mk(a), mk(b), mk(c), mk(d))

    @classmethod
    def identity(cls, params: FieldParams) -> "Moebius":
        return cls.from_ints(params, [[1, 0], [0, 1]])

    @property
    def params(self) -> FieldParams:
        return self.a.params

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def det(self) -> LaurentElem:
        return self.a * self.d - self.b * self.c

    def __mul__(self, other: "Moebius") -> "Moebius":
        return Moebius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Moebius":
        # adjugate: in PGL the 1/det scaling is immaterial
        return Moebius(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "Moebius":
        if n < 0:
            return self.inverse() ** (-n)
        acc = Moebius.identity(self.params)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base if n > 1 else base
            n >>= 1
        return acc

    def is_scalar(self) -> bool:
        return self.b.is_zero() and self.c.is_zero() and (self.a - self.d).is_zero()

    def __eq__(self, other):
        """Projective equality: cross products agree to precision."""
        if not isinstance(other, Moebius):
            return NotImplemented
        xs, ys = self.entries(), other.entries()
        for i in range(4):
            for j in range(i + 1, 4):
                if not (xs[i] * ys[j] - xs[j] * ys[i]).is_zero():
                    return False
        return True

    def __hash__(self):  # canonical form is the hashable surrogate
        return hash(tuple(str(x) for x in self.canonical().entries()))

    def min_entry_val(self):
        return min(val_pi(x) for x in self.entries())

    def canonical(self) -> "Moebius":
        """Scale so the minimum entry valuation is 0 and the first
        minimal entry has leading coefficient 1."""
        m = self.min_entry_val()
        if m == inf:
            raise MumfordError("zero matrix")
        pivot = next(x for x in self.entries() if val_pi(x) == m)
        ff = self.params.ff
        scalar = LaurentElem(self.params, {-m: ff.inv(pivot.leading_coeff())})
        return Moebius(*(x * scalar for x in self.entries()))

    def apply_end(self, z):
        """Action on P^1(K)."""
        if is_infty(z):
            if self.c.is_zero():
                if self.c.is_exact():
                    return INFTY
                raise InsufficientPrecision("c ~ 0 to precision at z = infinity")
            return self.a.div(self.c)
        num = self.a * z + self.b
        den = self.c * z + self.d
        if den.is_zero():
            if den.is_exact() or den.prec >= _pole_prec_bar(num):
                return INFTY
            raise InsufficientPrecision("denominator vanishes to precision")
        return num.div(den)

    def __repr__(self):
        return f"Moebius[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def _pole_prec_bar(num: LaurentElem):
    # a denominator that vanishes to very deep precision relative to the
    # numerator is accepted as an exact pole
    v = num.min_exp()
    return (v if v is not None else 0) + 4 * DEFAULT_PREC


def apply_moebius(g: Moebius, v: TreeVertex) -> TreeVertex:
    """Action on vertices through lattice bases.

    (a, n) is the class of the column lattice [[pi^n, a], [0, 1]]; the
    image lattice g * M is reduced back to that shape by column
    operations over the valuation ring and a global scaling.
    """
    params = g.params
    pin = LaurentElem(params, {v.level: 1})
    # the stored center is capped at prec = level; any exact representative
    # of the ball gives the same image vertex
    a = LaurentElem(params, v.center.terms)
    # columns of g * M_v
    top1, bot1 = g.a * pin, g.c * pin
    top2, bot2 = g.a * a + g.b, g.c * a + g.d
    vb1, vb2 = val_pi(bot1), val_pi(bot2)
    if vb1 == inf and vb2 == inf:
        raise MumfordError("matrix kills the lattice: not invertible")
    if vb1 < vb2:
        top1, top2 = top2, top1
        bot1, bot2 = bot2, bot1
    # clear the first bottom entry: col1 -= (bot1/bot2) col2
    ratio = bot1.div(bot2)
    top1 = top1 - ratio * top2
    # scale by 1/bot2: matrix [[top1/bot2, top2/bot2], [0, 1]]
    lead = top1.div(bot2)
    center = top2.div(bot2)
    m = lead.min_exp()
    if m is None:
        raise InsufficientPrecision("lattice pivot vanishes to precision")
    return vertex_canonical(center, m)


def is_fixed(g: Moebius, v: TreeVertex) -> bool:
    """Whether g fixes the vertex: h^{-1} g h is a unit matrix up to
    scaling, where h carries v_1 to v."""
    params = g.params
    n = v.level
    a = LaurentElem(params, v.center.terms)  # exact ball representative
    # h = [[pi^n, a], [0, 1]],  h^{-1} ~ [[1, -a], [0, pi^n]] / pi^n
    # conj = h^{-1} g h (projective, pi^n scaling dropped)
    A = g.a * LaurentElem(params, {n: 1})
    B = g.a * a + g.b
    C = g.c * LaurentElem(params, {n: 1})
    D = g.c * a + g.d
    conj_a = A - a * C
    conj_b = B - a * D
    conj_c = C * LaurentElem(params, {n: 1})
    conj_d = D * LaurentElem(params, {n: 1})
    mval = min(val_pi(conj_a), val_pi(conj_b), val_pi(conj_c), val_pi(conj_d))
    detval = val_pi(conj_a * conj_d - conj_b * conj_c)
    return detval == 2 * mval


# ----------------------------------------------------------------------
# parabolic elements and mirrors
# ----------------------------------------------------------------------

def is_parabolic(g: Moebius) -> bool:
    """Order exactly p in PGL_2."""
    if g.is_scalar():
        return False
    return (g ** g.params.p).is_scalar()


def _sqrt_same_field(x: LaurentElem) -> LaurentElem:
    """Square root in characteristic 2 without extending the field."""
    from .errors import ExtensionRequired
    ff = x.params.ff
    terms = {}
    for k, c in x.terms.items():
        if k % 2:
            raise ExtensionRequired(2, 1, f"odd exponent {k} under square root")
        terms[k // 2] = ff.pth_root(c)
    prec = None if x.prec is None else (x.prec + 1) // 2
    return LaurentElem(x.params, terms, prec)


def fixed_point(g: Moebius):
    """The unique fixed point of a parabolic element, as an end."""
    if not is_parabolic(g):
        raise NotParabolic("element does not have order p")
    p = g.params.p
    if g.c.is_zero():
        # fixes infinity; uniqueness forces a = d
        if not (g.a - g.d).is_zero():
            raise NotParabolic("two distinct fixed points (not order p)")
        return INFTY
    if p == 2:
        # char 2: trace vanishes, fixed point solves c z^2 = b
        return _sqrt_same_field(g.b.div(g.c))
    return (g.a - g.d).div(2 * g.c)


def mirror_contains(g: Moebius, v: TreeVertex) -> bool:
    """Membership in M(g), through the fixed-vertex predicate."""
    return is_fixed(g, v)


def _normalize_pair(g1: Moebius, g2: Moebius):
    """Conjugate (g1, g2) to ([[1,0],[1,1]], [[1, eta],[0,1]]).

    Returns (eta, h) where h is the full conjugation: h g_i h^{-1} is
    the normal form.  The fixed point of g1 goes to 0, that of g2 to
    infinity, then a diagonal conjugation scales the lower-left entry
    of the first matrix to 1.
    """
    params = g1.params
    q1, q2 = fixed_point(g1), fixed_point(g2)
    if _ends_equal(q1, q2):
        raise MirrorsIntersect("generators share a fixed point")
    one = LaurentElem.one(params)
    zero = LaurentElem.zero(params)
    if is_infty(q2):
        h0 = Moebius(one, -q1, zero, one)
    elif is_infty(q1):
        h0 = Moebius(zero, one, one, -q2)
    else:
        h0 = Moebius(one, -q1, one, -q2)
    k1 = h0 * g1 * h0.inverse()
    # k1 fixes 0 and is parabolic: [[a, ~0], [c, a]]; normalize c/a to 1
    if not k1.b.is_zero():
        raise AssertionFailed("conjugated generator is not lower-triangular",
                              witness=str(k1))
    delta = k1.c.div(k1.a)
    h = Moebius(delta, zero, zero, one) * h0
    k2 = h * g2 * h.inverse()
    if not k2.c.is_zero():
        raise AssertionFailed("second generator does not fix infinity",
                              witness=str(k2))
    eta = k2.b.div(k2.a)
    return eta, h


def mirror_distance(g1: Moebius, g2: Moebius):
    """Distance between the mirrors of two parabolic elements, with the
    unique facing vertices (xi_1 on M(g1), xi_2 on M(g2)).

    Computed from the conjugated normal form (d = -val(eta)) and cross-
    checked by scanning fixed vertices along the geodesic between the
    two fixed points; the bridge between the mirrors lies on that line.
    """
    eta, h = _normalize_pair(g1, g2)
    d = val_pi(eta)
    if d >= 0 or d == inf:
        raise MirrorsIntersect(f"mirror distance would be {-d if d != inf else 0}")
    dist_val = -d
    hinv = h.inverse()
    xi1 = apply_moebius(hinv, base_vertex(g1.params))
    xi2 = apply_moebius(hinv, vertex_canonical(LaurentElem.zero(g1.params), d))
    _scan_check(g1, g2, xi1, xi2, dist_val)
    return dist_val, xi1, xi2


def _scan_check(g1, g2, xi1: TreeVertex, xi2: TreeVertex, d: int):
    """Walk the geodesic between the fixed points and verify that the
    fixed-vertex rays end exactly at xi1 and xi2, d apart."""
    q1, q2 = fixed_point(g1), fixed_point(g2)
    s1 = geodesic_param(q1, q2, xi1)
    s2 = geodesic_param(q1, q2, xi2)
    if s1 - s2 != d:
        raise AssertionFailed("bridge endpoints disagree with normal-form distance",
                              witness=(str(xi1), str(xi2), d))
    for s in range(s2 - 2, s1 + 3):
        v = geodesic_vertex(q1, q2, s)
        in1, in2 = is_fixed(g1, v), is_fixed(g2, v)
        if in1 != (s >= s1) or in2 != (s <= s2):
            raise AssertionFailed("fixed-vertex scan disagrees with normal form",
                                  witness=(s, in1, in2))


def mirror_scan_report(g1: Moebius, g2: Moebius, margin: int = 2):
    """Vertex-by-vertex fixed-set data along the geodesic between the
    fixed points; feeds the DOT export."""
    d, xi1, xi2 = mirror_distance(g1, g2)
    q1, q2 = fixed_point(g1), fixed_point(g2)
    s1 = geodesic_param(q1, q2, xi1)
    s2 = geodesic_param(q1, q2, xi2)
    rows = []
    for s in range(s2 - margin, s1 + margin + 1):
        v = geodesic_vertex(q1, q2, s)
        rows.append({"s": s, "vertex": v, "fixed1": is_fixed(g1, v),
                     "fixed2": is_fixed(g2, v)})
    return {"distance": d, "xi1": xi1, "xi2": xi2, "rows": rows}


def scan_dot(report) -> str:
    lines = ["graph mirror_scan {", "  rankdir=LR;", "  node [shape=box];"]
    prev = None
    for row in report["rows"]:
        name = f"s{row['s']}".replace("-", "m")
        marks = []
        if row["fixed1"]:
            marks.append("M1")
        if row["fixed2"]:
            marks.append("M2")
        tag = (" [" + ",".join(marks) + "]") if marks else ""
        lines.append(f'  {name} [label="{row["vertex"].label()}{tag}"];')
        if prev is not None:
            lines.append(f"  {prev} -- {name};")
        prev = name
    lines.append("}")
    return "\n".join(lines)


# ----------------------------------------------------------------------
# finite hulls of marked points
# ----------------------------------------------------------------------

class HullTree:
    """The finite combinatorial core of the convex hull of a marked set
    of ends: all pairwise-meet vertices, the hull edges between them,
    and the attachment node of the ray toward each marked end."""

    def __init__(self, points, nodes, edges, attach):
        self.points = points
        self.nodes = nodes            # sorted list of TreeVertex
        self.edges = edges            # list of (i, j, length) node indices
        self.attach = attach          # per point index: node index

    def __repr__(self):
        return f"HullTree({len(self.points)} points, {len(self.nodes)} nodes)"

    def ray_levels(self, point_index: int):
        """The levels (pi-units) at which the ray toward the marked end
        leaves its attachment node; the open parameter interval of the
        branch."""
        node = self.nodes[self.attach[point_index]]
        a = self.points[point_index]
        if is_infty(a):
            return (-inf, node.level)
        return (node.level, inf)

    def to_dot(self) -> str:
        lines = ["graph hull {", "  node [shape=box];"]
        for i, v in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{v.label()}"];')
        for (i, j, length) in self.edges:
            lines.append(f'  n{i} -- n{j} [label="{length}"];')
        for k, a in enumerate(self.points):
            label = "inf" if is_infty(a) else str(a)
            lines.append(f'  p{k} [label="{label}", shape=ellipse];')
            lines.append(f"  p{k} -- n{self.attach[k]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines)


def hull_tree(points) -> HullTree:
    """Finite hull of >= 2 pairwise distinct ends.

    Node set: all medians of triples, plus the projection of v_1 onto
    the hull (the base convention keeps two-point hulls nonempty and
    pins the picture to the standard lattice).
    """
    pts = list(points)
    if len(pts) < 2:
        raise DuplicatePoints("need at least two marked points")
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if _ends_equal(pts[i], pts[j]):
                raise DuplicatePoints(f"marked points {i + 1} and {j + 1} coincide")
    params = next(x.params for x in pts if not is_infty(x))
    v1 = base_vertex(params)
    nodes = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for k in range(j + 1, len(pts)):
                nodes.add(_median(pts[i], pts[j], pts[k]))
    # base: nearest point of the hull to v_1 (projection onto some pair line)
    best = None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            proj = _project(pts[i], pts[j], v1)
            dd = distance(v1, proj)
            if best is None or dd < best[0]:
                best = (dd, proj)
    nodes.add(best[1])
    nodes = sorted(nodes, key=lambda v: v.sort_key())
    index = {v: i for i, v in enumerate(nodes)}
    # attachment node of the ray toward each end: the node nearest to
    # (a, k) for k large, i.e. minimizing level - 2 min(level, val(a - c))
    attach = []
    for a in pts:
        if is_infty(a):
            cand = min(nodes, key=lambda v: v.level)
        else:
            cand = min(nodes,
                       key=lambda v: v.level - 2 * min(v.level, val_pi(v.center - a)))
        attach.append(index[cand])
    # hull edges: adjacent iff no third node strictly between
    edges = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            dij = distance(nodes[i], nodes[j])
            between = any(
                k != i and k != j
                and distance(nodes[i], nodes[k]) + distance(nodes[k], nodes[j]) == dij
                for k in range(len(nodes)))
            if not between:
                edges.append((i, j, dij))
    return HullTree(pts, nodes, edges, attach)
