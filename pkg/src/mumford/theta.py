"""Truncated orbit products for normalized parabolic function fields.

Given group data with the first generator fixing 0 and the second
fixing the outermost finite point P2, plus a base end u on the sphere
|u| = |u - P2| = |P2|, the infinite products attached to the orbit of
the pair (0, u) are replaced here by finite products over reduced
words of bounded syllable length.  Three design rules keep the
truncation honest:

* the normalizing constant and the quotient map always share one word
  set, so the value 1 of the quotient map at P2 is an exact identity
  of rational functions rather than a limit statement;
* series extraction around a fixed point saturates its word set on
  the left by the cyclic stabilizer, which pins the low-order
  coefficients exactly: every coefficient below degree p dies at the
  first fixed point, and the linear coefficient dies at the second;
* convergence is monitored, never assumed — reports carry the
  valuation gain between successive cutoffs instead of error bars.

Per-word factor evaluation is pure; the product order is fixed by the
word enumeration, so results are reproducible run to run.
"""

from .errors import (
    AssertionFailed,
    DivisionByZeroToPrecision,
    InsufficientPrecision,
    NonNegativeEtaValuation,
    NotNormalForm,
    ParamsMismatch,
    PoleAtOrbitPoint,
    PrecisionExhausted,
    PreconditionViolated,
    RadiusViolation,
)
from .valfield import DEFAULT_PREC, LaurentElem, Valu
from .bt_tree import is_infty
from .groups import GroupData, WordNF, enumerate_words, eval_word

# extra pi-digits carried through the accumulating products so that the
# final division still meets the requested window after valuation drift
_GUARD = 16


class ThetaConfig:
    """Frozen inputs for the truncated products.

    L caps the syllable length of every word set drawn from the
    configuration; prec is the absolute-precision target in pi-digits.
    The base end u must be equidistant from the two marked fixed
    points, and every other fixed point must lie strictly inside the
    sphere through the second one.
    """

    __slots__ = ("group", "u", "L", "prec")

    def __init__(self, group: GroupData, u: LaurentElem, L: int,
                 prec: int = DEFAULT_PREC):
        if group.r < 2:
            raise PreconditionViolated("need at least two generators")
        if not group.p1_is_zero:
            raise PreconditionViolated("first generator must fix 0")
        p2 = group.generators[1].fixed_point
        if is_infty(p2) or p2.is_zero():
            raise PreconditionViolated("second fixed point must be finite and nonzero")
        v2 = p2.valuation()
        for k in range(2, group.r):
            fp = group.generators[k].fixed_point
            if is_infty(fp) or not fp.valuation() > v2:
                raise PreconditionViolated(
                    f"fixed point {k + 1} must lie strictly inside |P_2|")
        if u.params != group.params:
            raise ParamsMismatch("u lives over different field parameters")
        if not (u.valuation() == v2 and (u - p2).valuation() == v2):
            raise PreconditionViolated("u must satisfy |u| = |u - P_2| = |P_2|")
        if L < 0:
            raise PreconditionViolated("negative word-length cutoff")
        if prec < 1:
            raise PreconditionViolated("precision window must be positive")
        self.group = group
        self.u = u
        self.L = L
        self.prec = prec

    @property
    def params(self):
        return self.group.params

    @property
    def p2(self) -> LaurentElem:
        return self.group.generators[1].fixed_point

    def with_cutoff(self, L: int) -> "ThetaConfig":
        return ThetaConfig(self.group, self.u, L, self.prec)

    def __repr__(self):
        return f"ThetaConfig(r={self.group.r}, L={self.L}, prec={self.prec})"


# ---- word sets ----

def word_set(group: GroupData, L: int):
    """All reduced words of syllable length <= L, shortest first."""
    return enumerate_words(group, L)


def saturated_word_set(group: GroupData, i: int, L: int):
    """Left translates of the no-leading-s_i words by the cyclic group <s_i>.

    The output is closed under left multiplication by s_i.  That
    closure is what makes the series coefficient pinning exact: the
    product over such a set transforms under s_i by a constant, and
    the constant is 1 because the second fixed point is fixed with
    nonzero value.
    """
    if not 1 <= i <= group.r:
        raise PreconditionViolated(f"generator index {i} out of range")
    base = [w for w in enumerate_words(group, L)
            if not w.letters or w.letters[0][0] != i]
    out = list(base)
    for k in range(1, group.p):
        out.extend(WordNF(((i, k),) + w.letters) for w in base)
    return out


def _orbit_table(group: GroupData, u: LaurentElem, words):
    """Per-word fraction data: numerators/denominators of gamma(0), gamma(u).

    Keeping plain fractions instead of applying the end map postpones
    every division to the outermost step, where one precision window
    covers the whole product.
    """
    rows = []
    for w in words:
        m = eval_word(group, w)
        du = m.c * u + m.d
        if du.is_zero():
            raise AssertionFailed("truncated orbit of u meets infinity",
                                  witness=repr(w))
        if m.d.is_zero():
            raise AssertionFailed("truncated orbit of 0 meets infinity",
                                  witness=repr(w))
        rows.append((w, m.b, m.d, m.a * u + m.b, du))
    return rows


def _clip(x: LaurentElem, window: int) -> LaurentElem:
    if x.is_zero():
        return x
    return x.truncate(x.min_exp() + window)


def _div_window(num: LaurentElem, den: LaurentElem, window: int) -> LaurentElem:
    try:
        return num.div(den, prec=num.min_exp() - den.min_exp() + window)
    except (DivisionByZeroToPrecision, InsufficientPrecision) as exc:
        raise PrecisionExhausted(str(exc)) from None


# ---- the two truncated products ----

def theta_alpha(cfg: ThetaConfig, words=None) -> LaurentElem:
    """Truncated normalizing constant.

    Product over the word set of (P2 - gamma(u)) / (P2 - gamma(0)).
    The default set is the symmetric one of cutoff cfg.L; series
    routines pass their own saturated sets so that the constant and
    the coefficients always refer to the same truncation.
    """
    if words is None:
        words = word_set(cfg.group, cfg.L)
    p2 = cfg.p2
    window = cfg.prec + _GUARD
    num = den = LaurentElem.one(cfg.params)
    for w, np_, dp, nu, du in _orbit_table(cfg.group, cfg.u, words):
        fn = (p2 * du - nu) * dp
        fd = (p2 * dp - np_) * du
        if fn.is_zero():
            raise PoleAtOrbitPoint(f"orbit of u meets P_2 at {w!r}")
        if fd.is_zero():
            raise AssertionFailed("orbit of 0 meets P_2", witness=repr(w))
        num = _clip(num * fn, window)
        den = _clip(den * fd, window)
    return _div_window(num, den, window)


def theta_x(cfg: ThetaConfig, z, words=None) -> LaurentElem:
    """Truncated quotient map at a point of the projective line.

    Equals the normalizing constant times the product over the word
    set of (z - gamma(0)) / (z - gamma(u)); both factors use the same
    set, so the value at P2 is identically 1 at every cutoff.  At
    infinity the orbit factors drop out and the constant remains.
    """
    if words is None:
        words = word_set(cfg.group, cfg.L)
    if is_infty(z):
        return theta_alpha(cfg, words)
    if z.params != cfg.params:
        raise ParamsMismatch("z lives over different field parameters")
    p2 = cfg.p2
    window = cfg.prec + _GUARD
    num = den = LaurentElem.one(cfg.params)
    hit_zero = False
    for w, np_, dp, nu, du in _orbit_table(cfg.group, cfg.u, words):
        pole = z * du - nu
        if pole.is_zero():
            raise PoleAtOrbitPoint(f"z meets the orbit of u at {w!r}")
        zero = z * dp - np_
        if zero.is_zero():
            if not zero.is_exact():
                raise PrecisionExhausted(
                    f"cannot separate z from the orbit of 0 at {w!r}")
            hit_zero = True
            continue
        num = _clip(num * (p2 * du - nu) * zero, window)
        den = _clip(den * (p2 * dp - np_) * pole, window)
    if hit_zero:
        return LaurentElem.zero(cfg.params)
    return _div_window(num, den, window)


# ---- series extraction ----

class SeriesExpansion:
    """Initial segment of the bare orbit product around a marked point.

    coeffs[n] is the degree-n coefficient in (z - P_i); the quotient
    map itself is the normalizing constant times this series, both
    taken over the same saturated word set.  radius_exp is the largest
    valuation of P_i - gamma(u) over the set: the segment is certified
    only for val(z - P_i) strictly above it (exponent convention —
    larger exponent means smaller radius).
    """

    __slots__ = ("index", "coeffs", "radius_exp", "cutoff", "word_count")

    def __init__(self, index, coeffs, radius_exp, cutoff, word_count):
        self.index = index
        self.coeffs = tuple(coeffs)
        self.radius_exp = radius_exp
        self.cutoff = cutoff
        self.word_count = word_count

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def to_json(self):
        return {
            "index": self.index,
            "coeffs": [str(c) for c in self.coeffs],
            "radius_exp": self.radius_exp.to_json(),
            "cutoff": self.cutoff,
            "word_count": self.word_count,
        }

    def __repr__(self):
        return (f"SeriesExpansion(index={self.index}, order={self.order}, "
                f"cutoff={self.cutoff})")


def expand_at(cfg: ThetaConfig, i: int, order: int,
              radius_exp=None) -> SeriesExpansion:
    """Power-series segment of the bare product around the i-th fixed point.

    Per word the factor (z - gamma(0))/(z - gamma(u)) expands as
    u_0 + sum_{n>=1} (-1)^(n-1) (1 - u_0) B^(-n) w^n with
    u_0 = (P_i - gamma(0))/(P_i - gamma(u)) and B = P_i - gamma(u);
    the segments are multiplied out to the requested order.  The word
    set is the left-saturated family for s_i, so around the first
    fixed point every coefficient below degree p is exactly zero and
    around the second the linear coefficient is zero to the working
    window.

    An explicit radius_exp (t-valuation exponent) is checked against
    the pole distances; omitted, the certified bound is computed and
    recorded.
    """
    if i not in (1, 2):
        raise PreconditionViolated("expansion center must be index 1 or 2")
    p = cfg.group.p
    if order < p:
        raise PreconditionViolated(f"order {order} below the sheet count {p}")
    center = cfg.group.generators[i - 1].fixed_point
    words = saturated_word_set(cfg.group, i, cfg.L)
    window = cfg.prec + _GUARD
    one = LaurentElem.one(cfg.params)
    worst = None  # largest val(P_i - gamma(u)) = closest pole
    factors = []
    for w, np_, dp, nu, du in _orbit_table(cfg.group, cfg.u, words):
        bn = center * du - nu  # B = bn/du
        if bn.is_zero():
            raise RadiusViolation(
                f"expansion center meets the orbit of u at {w!r}")
        bval = bn.valuation() - du.valuation()
        worst = bval if worst is None or bval > worst else worst
        an = center * dp - np_
        binv = _div_window(du, bn, window)
        if an.is_zero():
            if not an.is_exact():
                raise PrecisionExhausted(
                    f"cannot separate the center from the orbit of 0 at {w!r}")
            u0 = LaurentElem.zero(cfg.params)
            lead = binv
        else:
            u0 = _div_window(an * du, dp * bn, window)
            lead = (one - u0) * binv
        fac = [u0, lead]
        for _ in range(2, order + 1):
            fac.append(_clip(-(fac[-1] * binv), window))
        factors.append(fac)
    if radius_exp is not None:
        given = radius_exp if isinstance(radius_exp, Valu) else Valu(radius_exp)
        if not given > worst:
            raise RadiusViolation(
                f"requested radius exponent {given!r} reaches a pole "
                f"at distance exponent {worst!r}")
        worst = given
    acc = [one] + [LaurentElem.zero(cfg.params)] * order
    for fac in factors:
        nxt = [LaurentElem.zero(cfg.params)] * (order + 1)
        for ia, a in enumerate(acc):
            if a.is_zero() and a.is_exact():
                continue
            for ib in range(order + 1 - ia):
                b = fac[ib]
                if b.is_zero() and b.is_exact():
                    continue
                nxt[ia + ib] = nxt[ia + ib] + a * b
        acc = [_clip(x, window) for x in nxt]
    return SeriesExpansion(i, acc, worst, cfg.L, len(words))


# ---- parameter recovery ----

def _check_normal_form(cfg: ThetaConfig):
    g = cfg.group
    if g.r != 2:
        raise NotNormalForm("recovery needs exactly two generators")
    s1, s2 = g.generators
    if s1.eta is None or s2.eta is None or s2.P is None:
        raise NotNormalForm("generators lack their two-parameter shape")
    if not (s1.eta - LaurentElem.one(cfg.params)).is_zero():
        raise NotNormalForm(
            "first generator must be the unit translation in the 1/z chart")
    if not s2.eta.valuation() < 0:
        raise NotNormalForm("second translation parameter must blow up")
    return s2


def recover_lambda(cfg: ThetaConfig):
    """Polar coefficients of the two marked sheets, at truncation cfg.L.

    Returns (lambda_1, lambda_2) with lambda_1 the leading series
    coefficient of the quotient map at the first fixed point and
    lambda_2 the one at the second, rescaled by the p-th power of
    -P_2^2/eta (the chart that turns the second generator into a unit
    translation).  Each index uses its own saturated word set for both
    the constant and the series, so the degree-p coefficient is the
    first uncontaminated one.
    """
    _check_normal_form(cfg)
    lam1, lam2, _, _ = _recover_parts(cfg)
    return lam1, lam2


def _recover_parts(cfg: ThetaConfig):
    g = cfg.group
    p = g.p
    s2 = g.generators[1]
    window = cfg.prec + _GUARD
    a1 = theta_alpha(cfg, words=saturated_word_set(g, 1, cfg.L))
    e1 = expand_at(cfg, 1, p)
    lam1 = a1 * e1.coeffs[p]
    a2 = theta_alpha(cfg, words=saturated_word_set(g, 2, cfg.L))
    e2 = expand_at(cfg, 2, p)
    q = cfg.p2 * cfg.p2
    scale = (-_div_window(q, s2.eta, window)) ** p
    lam2 = scale * a2 * e2.coeffs[p]
    # the valuation floors are theorems only under the separation
    # hypothesis |eta| < |P_2|; outside it they are demonstrably false
    # (and the floors are sharp where they hold), so enforce exactly
    # when the hypothesis does
    if s2.eta.valuation() > cfg.p2.valuation():
        lb1, lb2 = lambda_bounds(s2.eta, cfg.p2, p)
        if not lam1.valuation() >= lb1:
            raise AssertionFailed("first polar coefficient violates its floor",
                                  witness=(str(lam1), lb1.to_json()))
        if not lam2.valuation() >= lb2:
            raise AssertionFailed("second polar coefficient violates its floor",
                                  witness=(str(lam2), lb2.to_json()))
        if not (lam1.valuation() + lam2.valuation()) >= -s2.eta.valuation():
            raise AssertionFailed("polar product beats the mirror distance",
                                  witness=(str(lam1), str(lam2)))
    return lam1, lam2, a1, a2


def recovery_report(cfg: ThetaConfig) -> dict:
    """recover_lambda plus the empirical stability data used by reports.

    Margins compare against the cutoff two below; None when the cutoff
    is too small for the comparison.
    """
    _check_normal_form(cfg)
    lam1, lam2, a1, a2 = _recover_parts(cfg)
    lb1, lb2 = lambda_bounds(cfg.group.generators[1].eta, cfg.p2, cfg.group.p)
    margins = {"lambda1": None, "lambda2": None}
    if cfg.L >= 2:
        p1, p2_, _, _ = _recover_parts(cfg.with_cutoff(cfg.L - 2))
        margins["lambda1"] = (lam1 - p1).valuation()
        margins["lambda2"] = (lam2 - p2_).valuation()
    return {
        "lambda1": lam1,
        "lambda2": lam2,
        "alpha1": a1,
        "alpha2": a2,
        "bounds": (lb1, lb2),
        "margins": margins,
        "cutoff": cfg.L,
        "prec": cfg.prec,
    }


def lambda_bounds(eta: LaurentElem, p2: LaurentElem, p: int):
    """Valuation floors for the two recovered polar coefficients.

    Only the valuations of the inputs matter: the first floor is
    (p-1) val(eta) - p val(P_2), the second -p val(eta) + p val(P_2).
    Their sum is -val(eta), which is the mirror distance of the two
    generators — the strict-inequality side of the main criterion for
    the normalized pair (0, 1).
    """
    ve = eta.valuation()
    v2 = p2.valuation()
    if not ve < 0:
        raise NonNegativeEtaValuation(
            f"val(eta) = {ve!r} but the mirrors must be separated")
    return (ve * (p - 1) - v2 * p, -(ve * p) + v2 * p)
