"""JSON schemas and the Laurent literal grammar for the front end.

Literal grammar (version 1, frozen):

    element := [sign] term { sign term }
    sign    := '+' | '-'
    term    := coeff [ '*' ] tpow | coeff | tpow
    tpow    := 't' [ '^' exp ]
    exp     := [ '-' ] digits [ '/' digits ]
    coeff   := digits

Coefficients are prime-subfield integers (reduced mod p); general
residue coefficients need the list form, one entry per term:
[exp_numerator, exp_denominator, digit_0, ..., digit_{f-1}] with the
digits in the fixed power basis of the residue field.  Exponents are
t-normalized; an exponent whose denominator does not divide the
ramification index is rejected.
"""

from fractions import Fraction

from .bt_tree import INFTY, TreeVertex, is_infty, vertex_canonical
from .criterion import BranchData
from .errors import MumfordError, SchemaError
from .groups import GroupData, make_parabolic
from .theta import ThetaConfig, _orbit_table, word_set
from .valfield import FieldParams, LaurentElem, Valu

GRAMMAR_VERSION = 1


# ---- field parameters ----

def params_from_json(obj) -> FieldParams:
    src = obj.get("params", obj) if isinstance(obj, dict) else None
    if not isinstance(src, dict) or "p" not in src:
        raise SchemaError("missing field parameters (need at least p)")
    try:
        return FieldParams(int(src["p"]), int(src.get("f", 1)), int(src.get("e", 1)))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad field parameters: {exc}") from None
    except MumfordError as exc:
        raise SchemaError(str(exc)) from None


# ---- Laurent literals ----

def laurent_from_string(params: FieldParams, s: str) -> LaurentElem:
    ff = params.ff
    text = s.strip()
    if not text:
        raise SchemaError("empty Laurent literal")
    terms = {}
    i, n = 0, len(text)
    first = True
    while i < n:
        sign = 1
        if text[i] in "+-":
            sign = -1 if text[i] == "-" else 1
            i += 1
        elif not first:
            raise SchemaError(f"expected '+' or '-' at position {i} in {s!r}")
        first = False
        while i < n and text[i] == " ":
            i += 1
        j = i
        while j < n and text[j].isdigit():
            j += 1
        coeff = None
        if j > i:
            coeff = int(text[i:j])
            i = j
        while i < n and text[i] in " *":
            i += 1
        exp = Fraction(0)
        if i < n and text[i] == "t":
            i += 1
            exp = Fraction(1)
            if i < n and text[i] == "^":
                i += 1
                j = i + 1 if i < n and text[i] == "-" else i
                while j < n and (text[j].isdigit() or text[j] == "/"):
                    j += 1
                try:
                    exp = Fraction(text[i:j])
                except (ValueError, ZeroDivisionError):
                    raise SchemaError(f"bad exponent at position {i} in {s!r}") from None
                i = j
            if coeff is None:
                coeff = 1
        elif coeff is None:
            raise SchemaError(f"expected a term at position {i} in {s!r}")
        while i < n and text[i] == " ":
            i += 1
        pi_exp = exp * params.e
        if pi_exp.denominator != 1:
            raise SchemaError(
                f"exponent {exp} not in the value group (1/{params.e})Z")
        k = int(pi_exp)
        c = ff.from_int(sign * coeff)
        acc = ff.add(terms.get(k, 0), c)
        if acc:
            terms[k] = acc
        else:
            terms.pop(k, None)
    return LaurentElem(params, terms)


def laurent_from_json(params: FieldParams, spec) -> LaurentElem:
    """int, grammar string, or list of [exp_num, exp_den, digits...]."""
    if isinstance(spec, bool):
        raise SchemaError("boolean is not a Laurent literal")
    if isinstance(spec, int):
        return LaurentElem.from_int(params, spec)
    if isinstance(spec, str):
        return laurent_from_string(params, spec)
    if isinstance(spec, list):
        ff = params.ff
        terms = {}
        for entry in spec:
            if not (isinstance(entry, list) and len(entry) == 2 + params.f):
                raise SchemaError(
                    f"term must be [exp_num, exp_den, {params.f} digit(s)]: {entry!r}")
            num, den, *digits = entry
            try:
                exp = Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError, TypeError) as exc:
                raise SchemaError(f"bad exponent in {entry!r}: {exc}") from None
            pi_exp = exp * params.e
            if pi_exp.denominator != 1:
                raise SchemaError(
                    f"exponent {exp} not in the value group (1/{params.e})Z")
            if not all(isinstance(d, int) and 0 <= d < params.p for d in digits):
                raise SchemaError(f"digits must be integers in [0, p): {entry!r}")
            c = ff.from_coeff_vector(digits)
            acc = ff.add(terms.get(int(pi_exp), 0), c)
            if acc:
                terms[int(pi_exp)] = acc
            else:
                terms.pop(int(pi_exp), None)
        return LaurentElem(params, terms)
    raise SchemaError(f"cannot read a Laurent element from {spec!r}")


def laurent_to_json(x: LaurentElem):
    ff = x.params.ff
    e = x.params.e
    terms = []
    for k in sorted(x.terms):
        exp = Fraction(k, e)
        terms.append([exp.numerator, exp.denominator, *ff.coeff_vector(x.terms[k])])
    return {"terms": terms, "prec": x.prec, "display": str(x)}


def valu_scalar(v: Valu):
    """Exact rational as plain JSON: int, [num, den], or signed 'inf'."""
    out = v.to_json()
    if isinstance(out, list) and out[1] == 1:
        return out[0]
    return out


def end_from_json(params: FieldParams, spec):
    if spec == "inf":
        return INFTY
    return laurent_from_json(params, spec)


def end_to_json(x):
    return "inf" if is_infty(x) else laurent_to_json(x)


# ---- composite inputs ----

def branch_data_from_json(obj) -> BranchData:
    if not isinstance(obj, dict):
        raise SchemaError("branch data must be a JSON object")
    params = params_from_json(obj)
    if "a" not in obj or "lambda" not in obj:
        raise SchemaError("branch data needs 'a' and 'lambda' lists")
    a = [laurent_from_json(params, s) for s in _as_list(obj["a"], "a")]
    lam = [laurent_from_json(params, s) for s in _as_list(obj["lambda"], "lambda")]
    try:
        return BranchData(params, a, lam)
    except SchemaError:
        raise
    except MumfordError as exc:
        raise SchemaError(str(exc)) from None


def _as_list(x, name):
    if not isinstance(x, list) or not x:
        raise SchemaError(f"'{name}' must be a nonempty list")
    return x


def vertex_from_json(params: FieldParams, obj) -> TreeVertex:
    if not isinstance(obj, dict) or "center" not in obj or "level" not in obj:
        raise SchemaError("a vertex is {center: literal, level: integer}")
    if not isinstance(obj["level"], int):
        raise SchemaError("vertex level must be an integer (pi-units)")
    return vertex_canonical(laurent_from_json(params, obj["center"]), obj["level"])


def generator_from_json(params: FieldParams, obj):
    if not isinstance(obj, dict) or "P" not in obj or "eta" not in obj:
        raise SchemaError("a generator is {P: literal, eta: literal}")
    try:
        return make_parabolic(laurent_from_json(params, obj["P"]),
                              laurent_from_json(params, obj["eta"]))
    except MumfordError as exc:
        raise SchemaError(f"bad generator: {exc}") from None


def default_base_end(group: GroupData, L: int) -> LaurentElem:
    """Deterministic admissible base end for configs that omit u.

    Scans P_2 * (c_0 + c_1 t + c_2 t^2) with residue digits in code
    order, keeping the sphere conditions |u| = |u - P_2| = |P_2| and
    rejecting candidates whose orbit under words of length <= L + 1
    meets infinity.  The scan is part of the report, so runs stay
    reproducible.
    """
    params = group.params
    p2 = group.generators[1].fixed_point
    q = params.p ** params.f
    if q <= 2:
        raise SchemaError(
            "no admissible base end exists over the two-element residue "
            "field; supply u explicitly or raise f")
    words = word_set(group, L + 1)
    lead = [c0 for c0 in range(2, q)]
    tails = [()] + [(c1,) for c1 in range(1, q)] + [
        (c1, c2) for c1 in range(q) for c2 in range(1, q)]
    for c0 in lead:
        for tail in tails:
            unit = LaurentElem(params, {params.e * k: c
                                        for k, c in enumerate((c0,) + tail) if c})
            u = p2 * unit
            try:
                _orbit_table(group, u, words)
            except MumfordError:
                continue
            return u
    raise SchemaError("base-end scan exhausted; supply u explicitly")


def theta_config_from_json(obj, L=None, prec=None):
    """Build a ThetaConfig; returns (cfg, u_was_defaulted).

    Accepts either the two-parameter shape {P2, eta} (the first
    generator is then the unit translation fixing 0) or an explicit
    {gens: [{P, eta}, ...]} list.
    """
    if not isinstance(obj, dict):
        raise SchemaError("theta config must be a JSON object")
    params = params_from_json(obj)
    if "gens" in obj:
        gens = [generator_from_json(params, g) for g in _as_list(obj["gens"], "gens")]
    elif "P2" in obj and "eta" in obj:
        gens = [
            make_parabolic(LaurentElem.zero(params), LaurentElem.one(params)),
            generator_from_json(params, {"P": obj["P2"], "eta": obj["eta"]}),
        ]
    else:
        raise SchemaError("theta config needs P2 and eta (or a gens list)")
    try:
        group = GroupData(params, gens)
    except MumfordError as exc:
        raise SchemaError(str(exc)) from None
    cutoff = obj.get("L", 4) if L is None else L
    if not isinstance(cutoff, int):
        raise SchemaError("cutoff L must be an integer")
    window = obj.get("prec") if prec is None else prec
    defaulted = "u" not in obj
    u = (default_base_end(group, cutoff) if defaulted
         else laurent_from_json(params, obj["u"]))
    kw = {} if window is None else {"prec": int(window)}
    return ThetaConfig(group, u, cutoff, **kw), defaulted
