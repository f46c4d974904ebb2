"""Order-p generator families and free-product words.

A family s_1, ..., s_r of parabolic elements with pairwise disjoint
mirrors generates a group isomorphic to the free product of r copies
of Z/p; words in normal form (adjacent letters from distinct factors,
exponents in 1..p-1) index its elements bijectively.  On top of that
word plumbing the module carries two geometric routines: a folding-
driven renormalization that conjugates subfamilies until no generator
power maps an edge of the mirror-and-bridge subtree onto another, and
a verification suite for the valuation identities satisfied by word
orbits of the base points u, P_1, ..., P_r.
"""

from .errors import (
    MumfordError,
    NotParabolic,
    PreconditionViolated,
    AssertionFailed,
    SearchRadiusExceeded,
)
from .valfield import LaurentElem, FieldParams
from .bt_tree import (
    INFTY,
    is_infty,
    val_pi,
    Moebius,
    TreeVertex,
    base_vertex,
    apply_moebius,
    is_fixed,
    is_parabolic,
    fixed_point,
    mirror_distance,
    step_toward,
    vertex_neighbors,
)

from math import inf


# ---------------------------------------------------------------------------
# words


class WordNF:
    """Normal-form word: ((i_1, n_1), ..., (i_m, n_m)) with 1-based
    generator indices, adjacent indices distinct, 1 <= n_k <= p-1.

    The exponent range is not validated against p here (a word is a
    purely combinatorial object); eval_word checks it on use.
    """

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        letters = tuple((int(i), int(n)) for i, n in letters)
        for k, (i, n) in enumerate(letters):
            if i < 1 or n < 1:
                raise MumfordError(f"bad letter ({i}, {n})")
            if k and letters[k - 1][0] == i:
                raise MumfordError("adjacent letters share a generator")
        self.letters = letters

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, WordNF) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def inverse(self, p: int) -> "WordNF":
        return WordNF(tuple((i, p - n) for i, n in reversed(self.letters)))

    def __repr__(self):
        if not self.letters:
            return "1"
        return "*".join(f"s{i}" + (f"^{n}" if n > 1 else "")
                        for i, n in self.letters)

    def to_json(self):
        return [[i, n] for i, n in self.letters]


# ---------------------------------------------------------------------------
# generators


class ParabolicGen:
    """A Moebius element of order exactly p with its unique fixed end.

    P and eta are retained when the generator was produced in the
    two-parameter shape below; conjugation drops them.
    """

    __slots__ = ("matrix", "fixed_point", "P", "eta")

    def __init__(self, matrix: Moebius, fp=None, P=None, eta=None):
        if not is_parabolic(matrix):
            raise NotParabolic("generator must have order p")
        self.matrix = matrix
        self.fixed_point = fixed_point(matrix) if fp is None else fp
        self.P = P
        self.eta = eta

    @property
    def params(self) -> FieldParams:
        return self.matrix.params

    def conjugate(self, h: Moebius) -> "ParabolicGen":
        mat = (h * self.matrix * h.inverse()).canonical()
        return ParabolicGen(mat, fp=h.apply_end(self.fixed_point))

    def __repr__(self):
        fp = "infty" if is_infty(self.fixed_point) else str(self.fixed_point)
        return f"ParabolicGen(fixed={fp})"


def make_parabolic(P, eta: LaurentElem) -> ParabolicGen:
    """Order-p element fixing exactly P.

    For P = 0 the lower-triangular shape [[1,0],[c,1]] with c = eta;
    otherwise [[P(P-eta), eta P^2], [-eta, P(P+eta)]].  Both have
    trace^2 = 4 det, hence a single fixed point, and unipotent image
    in PGL_2 forces order p in characteristic p.
    """
    if is_infty(P):
        raise PreconditionViolated("the two-parameter shape excludes infinity")
    if eta.is_zero():
        raise NotParabolic("eta = 0 degenerates to the identity")
    params = eta.params
    one = LaurentElem.one(params)
    if P.is_zero():
        mat = Moebius(one, LaurentElem.zero(params), eta, one)
        return ParabolicGen(mat, fp=LaurentElem.zero(params),
                            P=LaurentElem.zero(params), eta=eta)
    mat = Moebius(P * (P - eta), eta * P * P, -eta, P * (P + eta))
    return ParabolicGen(mat, fp=P, P=P, eta=eta)


class GroupData:
    """A generator family plus the base-point conventions.

    u is the auxiliary end used by the orbit identities; it may be
    None for purely combinatorial work.
    """

    def __init__(self, params: FieldParams, generators, u=None):
        self.params = params
        self.generators = tuple(generators)
        if not self.generators:
            raise MumfordError("empty generator family")
        for g in self.generators:
            if g.params != params:
                raise MumfordError("generator parameter mismatch")
        self.u = u
        self.p1_is_zero = (not is_infty(self.generators[0].fixed_point)
                           and self.generators[0].fixed_point.is_zero())

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def r(self) -> int:
        return len(self.generators)

    def validate_mirrors(self):
        """Pairwise disjointness: every unordered pair must be at
        mirror distance >= 1 (mirror_distance raises otherwise)."""
        for i in range(self.r):
            for j in range(i + 1, self.r):
                mirror_distance(self.generators[i].matrix,
                                self.generators[j].matrix)

    def __repr__(self):
        return f"GroupData(p={self.p}, r={self.r})"


def enumerate_words(g: GroupData, L: int):
    """All normal forms of length <= L, shortest first, in a fixed
    deterministic order.  Count at length m >= 1: r(r-1)^(m-1)(p-1)^m."""
    if L < 0:
        raise PreconditionViolated("word length bound must be >= 0")
    r, p = g.r, g.p
    words = [WordNF()]
    layer = [()]
    for _ in range(L):
        nxt = []
        for w in layer:
            last = w[-1][0] if w else 0
            for i in range(1, r + 1):
                if i == last:
                    continue
                for n in range(1, p):
                    nxt.append(w + ((i, n),))
        layer = nxt
        words.extend(WordNF(t) for t in layer)
    return words


def eval_word(g: GroupData, w: WordNF) -> Moebius:
    """Canonical-scaled product of generator powers."""
    acc = Moebius.identity(g.params)
    for i, n in w:
        if not (1 <= i <= g.r) or not (1 <= n <= g.p - 1):
            raise MumfordError(f"letter ({i}, {n}) outside family range")
        acc = acc * (g.generators[i - 1].matrix ** n)
    return acc.canonical()


def schottky_gens(g: GroupData):
    """The (r-1)(p-1) words s_i^n s_{i+1}^(-n); together they generate
    the kernel of the exponent-sum map onto Z/p."""
    if g.r < 2:
        raise PreconditionViolated("need at least two generators")
    p = g.p
    return [WordNF(((i, n), (i + 1, p - n)))
            for i in range(1, g.r)
            for n in range(1, p)]


# ---------------------------------------------------------------------------
# folding-driven renormalization

_SWEEP_NODE_CAP = 20000


def _edge(v: TreeVertex, w: TreeVertex):
    return tuple(sorted((v, w), key=lambda x: x.sort_key()))


def _apply_edge(h: Moebius, e):
    return _edge(apply_moebius(h, e[0]), apply_moebius(h, e[1]))


def _facing_vertices(gens):
    """facing[(i, j)] = closest vertex of M(s_i) to M(s_j); also the
    ordered-pair distance sum used as the termination metric."""
    facing = {}
    metric = 0
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            d, xi_i, xi_j = mirror_distance(gens[i].matrix, gens[j].matrix)
            facing[(i, j)] = xi_i
            facing[(j, i)] = xi_j
            metric += 2 * d
    return facing, metric


def _bridge_edges(v: TreeVertex, w: TreeVertex):
    out = []
    cur = v
    while cur != w:
        nxt = step_toward(cur, w)
        out.append(_edge(cur, nxt))
        cur = nxt
    return out


def _find_trigger(gens, facing):
    """A folding among the first bridge edges: e_m(k) = s_m^n(e_m(l)).

    e_m(j) is the edge of the bridge toward M(s_j) at the facing
    vertex; since it leaves the mirror, no power of s_m fixes it, so
    any coincidence of images is a genuine folding.  Returns
    (m, n, I_l) with I_l = indices whose bridge leaves through e_m(l).
    """
    r = len(gens)
    p = gens[0].params.p
    for m in range(r):
        em = {}
        for j in range(r):
            if j == m:
                continue
            xi_mj = facing[(m, j)]
            em[j] = _edge(xi_mj, step_toward(xi_mj, facing[(j, m)]))
        sm = gens[m].matrix
        for l in em:
            for n in range(1, p):
                img = _apply_edge(sm ** n, em[l])
                if any(em[k] == img and em[k] != em[l] for k in em):
                    I_l = [j for j in em if em[j] == em[l]]
                    return m, n, I_l
    return None


def _mirror_edge_sweep(gen, seeds, radius):
    """Edges of M(s) within walk distance <= radius of the seed
    vertices.  The mirror is an infinite horoball; the radius keeps
    the enumeration finite."""
    mat = gen.matrix
    seen = {v: 0 for v in seeds if is_fixed(mat, v)}
    frontier = list(seen)
    edges = set()
    while frontier:
        nxt = []
        for v in frontier:
            if seen[v] >= radius:
                continue
            for w in vertex_neighbors(v):
                if not is_fixed(mat, w):
                    continue
                edges.add(_edge(v, w))
                if w not in seen:
                    seen[w] = seen[v] + 1
                    nxt.append(w)
                    if len(seen) > _SWEEP_NODE_CAP:
                        raise SearchRadiusExceeded(
                            f"mirror sweep exceeds {_SWEEP_NODE_CAP} vertices")
        frontier = nxt
    return edges


def _radius_sweep(gens, facing, radius):
    """Certify no folding among the collected edges: bridges between
    all facing pairs plus mirror edges within the radius.  Membership
    of an image edge in the mirror-and-bridge subtree is decided
    exactly (both endpoints fixed by some generator, or a bridge
    edge), so a hit here is a folding the trigger scan cannot rewrite.
    """
    r = len(gens)
    p = gens[0].params.p
    bridge = set()
    for i in range(r):
        for j in range(i + 1, r):
            bridge.update(_bridge_edges(facing[(i, j)], facing[(j, i)]))
    edges = set(bridge)
    for i in range(r):
        seeds = [facing[(i, j)] for j in range(r) if j != i]
        edges.update(_mirror_edge_sweep(gens[i], seeds, radius))

    def in_subtree(e):
        if e in bridge:
            return True
        return any(is_fixed(g.matrix, e[0]) and is_fixed(g.matrix, e[1])
                   for g in gens)

    for m in range(r):
        sm = gens[m].matrix
        for n in range(1, p):
            h = sm ** n
            for e in edges:
                img = _apply_edge(h, e)
                if img != e and in_subtree(img):
                    raise SearchRadiusExceeded(
                        "folding outside the bridge-edge rewrite pattern "
                        f"at radius {radius}")


def normalize_generators(g: GroupData, R=None, trace=None) -> GroupData:
    """Rewrite the family until no generator power folds one edge of
    the mirror-and-bridge subtree onto another.

    Each detected folding e_m(k) = s_m^n(e_m(l)) conjugates the
    subfamily I_l (everything whose bridge leaves M(s_m) through
    e_m(l)) by s_m^n; the sum of pairwise mirror distances drops by at
    least one per rewrite, so the loop terminates.  A final sweep over
    all edges within radius R (default: twice the largest pairwise
    distance) certifies the result; foldings that the bridge-edge
    pattern cannot express raise SearchRadiusExceeded.
    """
    gens = list(g.generators)
    if len(gens) == 1:
        return g
    facing, metric = _facing_vertices(gens)
    prev = None
    while True:
        if prev is not None and metric >= prev:
            raise AssertionFailed("rewrite did not decrease the distance sum",
                                  witness=(prev, metric))
        hit = _find_trigger(gens, facing)
        if hit is None:
            break
        m, n, I_l = hit
        h = gens[m].matrix ** n
        for i in I_l:
            gens[i] = gens[i].conjugate(h)
        if trace is not None:
            trace.append({"m": m + 1, "n": n,
                          "conjugated": [i + 1 for i in I_l],
                          "metric_before": metric})
        prev = metric
        facing, metric = _facing_vertices(gens)
    if R is None:
        dists = [mirror_distance(gens[i].matrix, gens[j].matrix)[0]
                 for i in range(len(gens)) for j in range(i + 1, len(gens))]
        R = 2 * max(dists)
    _radius_sweep(gens, facing, R)
    return GroupData(g.params, gens, u=g.u)


# ---------------------------------------------------------------------------
# orbit valuation identities


def _val_end(x):
    return -inf if is_infty(x) else val_pi(x)


def huti_check(g: GroupData, u, L: int):
    """Verify the six orbit valuation identities over all normal-form
    words of length <= L.

    Conventions checked first (violations raise PreconditionViolated):
    the first fixed point is 0, the second is finite nonzero and
    valuation-minimal among the fixed points, and u sits on the same
    sphere as P_2 and as u - P_2.  The identities, with gamma ranging
    over the words and n over 1..p-1:

      (1) val(s_2^n(0))     = val(eta)
      (2) val(s_2^n(u))     = val(P_2)
      (3) val(s_1^n(u))     = 0
      (4) val(gamma(P_i))   > val(P_2)   for i != 2
      (5) val(gamma(u)-P_2) = val(P_2)
      (6) val(gamma(0))    >= val(gamma(u))

    The first failing word raises AssertionFailed with the word as
    witness; otherwise a report with per-item check counts is
    returned, including a sampled-stabilizer count (words of length
    <= min(L, 3) fixing a couple of vertices) as a cheap discontinuity
    sanity signal.
    """
    if g.r < 2:
        raise PreconditionViolated("need at least two generators")
    gens = g.generators
    fps = [gen.fixed_point for gen in gens]
    if is_infty(fps[0]) or not fps[0].is_zero():
        raise PreconditionViolated("first fixed point must be 0")
    if is_infty(fps[1]) or fps[1].is_zero():
        raise PreconditionViolated("second fixed point must be finite nonzero")
    P2 = fps[1]
    val_P2 = val_pi(P2)
    for i, fp in enumerate(fps):
        if i == 1:
            continue
        if _val_end(fp) <= val_P2:
            raise PreconditionViolated(
                f"fixed point {i + 1} not inside the sphere of P_2")
    if is_infty(u):
        raise PreconditionViolated("u must be finite")
    if val_pi(u) != val_P2:
        raise PreconditionViolated("val(u) must equal val(P_2)")
    if val_pi(u - P2) != val_P2:
        raise PreconditionViolated("val(u - P_2) must equal val(P_2)")

    if gens[1].eta is not None:
        val_eta = val_pi(gens[1].eta)
    else:
        val_eta = -mirror_distance(gens[0].matrix, gens[1].matrix)[0]

    p = g.p
    zero = LaurentElem.zero(g.params)
    counts = {k: 0 for k in ("1", "2", "3", "4", "5", "6")}

    def fail(item, word, detail):
        raise AssertionFailed(f"item ({item}): {detail}", witness=repr(word))

    if L >= 1:
        s1, s2 = gens[0].matrix, gens[1].matrix
        for n in range(1, p):
            w2 = WordNF(((2, n),))
            if _val_end((s2 ** n).apply_end(zero)) != val_eta:
                fail(1, w2, "val(s_2^n(0)) != val(eta)")
            counts["1"] += 1
            if _val_end((s2 ** n).apply_end(u)) != val_P2:
                fail(2, w2, "val(s_2^n(u)) != val(P_2)")
            counts["2"] += 1
            if _val_end((s1 ** n).apply_end(u)) != 0:
                fail(3, WordNF(((1, n),)), "val(s_1^n(u)) != 0")
            counts["3"] += 1

    words = enumerate_words(g, L)
    for w in words:
        gamma = eval_word(g, w)
        gu = gamma.apply_end(u)
        for i, fp in enumerate(fps):
            if i == 1:
                continue
            if not (_val_end(gamma.apply_end(fp)) > val_P2):
                fail(4, w, f"val(gamma(P_{i + 1})) <= val(P_2)")
            counts["4"] += 1
        if is_infty(gu) or val_pi(gu - P2) != val_P2:
            fail(5, w, "val(gamma(u) - P_2) != val(P_2)")
        counts["5"] += 1
        if not (_val_end(gamma.apply_end(zero)) >= _val_end(gu)):
            fail(6, w, "val(gamma(0)) < val(gamma(u))")
        counts["6"] += 1

    sample = {}
    short = [w for w in words if len(w) <= min(L, 3)]
    probes = [("v1", base_vertex(g.params))]
    if g.r >= 2:
        probes.append(("xi12", mirror_distance(gens[0].matrix,
                                               gens[1].matrix)[1]))
    for name, v in probes:
        sample[name] = sum(1 for w in short if is_fixed(eval_word(g, w), v))

    return {
        "L": L,
        "words": len(words),
        "val_eta": val_eta,
        "val_P2": val_P2,
        "items": counts,
        "stabilizer_sample": sample,
        "passed": True,
    }
