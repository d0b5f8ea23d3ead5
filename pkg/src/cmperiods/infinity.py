"""Arithmetic in ramified constant-extended Laurent-series fields.

An InfElem models an element of F_{q^m}((u)) with u = theta^(-1/e): a
sparse map exponent -> coefficient together with an absolute precision
bound (all exponents >= prec are unknown, all unrecorded exponents below
it are zero).  Valuations are normalized so val(theta) = -1, hence
val(u) = 1/e and val = exponent/e.  This is the computable stand-in for
the completion of the algebraic closure of F_q((1/theta)).

Precision is absolute, never relative: telescoping-sum arguments for
quasi-periods need hard tail bounds.  Dense multiplications go through a
Kronecker-style integer packing so that big products cost one Python
long multiplication instead of a quadratic dict loop.

The same machinery, re-tagged with the variable "t", performs
factorization over F_q((1/t)) for CM-field validation.
"""

from __future__ import annotations

from fractions import Fraction

from .arith import Fq
from .errors import (
    DivisionByApparentZero,
    NotAPower,
    PrecisionExhausted,
)

try:  # GMP multiplication is 40x faster on the megabit integers the
    # packed series products produce; plain ints remain a correct fallback
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int

_PACK_BITS = 32
_PACK_THRESHOLD = 3000  # len(a)*len(b) above which packing wins


def _lcm(x, y):
    g = x
    a, b = x, y
    while b:
        a, b = b, a % b
    g = a
    return x // g * y


class InfElem:
    """Truncated Puiseux series over a finite field with tracked precision."""

    __slots__ = ("field", "e", "coeffs", "prec", "var")

    def __init__(self, field: Fq, e: int, coeffs: dict, prec: int, var="theta"):
        self.field = field
        self.e = e
        self.prec = prec
        self.var = var
        self.coeffs = {k: c for k, c in coeffs.items() if c and k < prec}

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero(field, prec, e=1, var="theta"):
        return InfElem(field, e, {}, prec * e, var)

    @staticmethod
    def const(field, c, prec, e=1, var="theta"):
        return InfElem(field, e, {0: c} if c else {}, prec * e, var)

    @staticmethod
    def theta(field, prec, e=1, var="theta"):
        return InfElem(field, e, {-e: 1}, prec * e, var)

    @staticmethod
    def from_poly(field, coeffs, prec, var="theta"):
        """Polynomial in theta: coeffs[j] is the coefficient of theta^j."""
        data = {}
        for j, c in enumerate(coeffs):
            if c:
                data[-j] = c
        return InfElem(field, 1, data, prec, var)

    @staticmethod
    def monomial(field, c, k, prec_units, e=1, var="theta"):
        """c * u^k with absolute precision given directly in exponent units."""
        return InfElem(field, e, {k: c} if c else {}, prec_units, var)

    # -- inspection -----------------------------------------------------

    def is_zero(self):
        """Zero at the recorded precision."""
        return not self.coeffs

    @property
    def lead_exp(self):
        return min(self.coeffs) if self.coeffs else self.prec

    def val(self):
        """Valuation as an exact Fraction, or None for (0 mod u^prec)."""
        if not self.coeffs:
            return None
        return Fraction(min(self.coeffs), self.e)

    @property
    def prec_val(self):
        return Fraction(self.prec, self.e)

    def lead_coeff(self):
        if not self.coeffs:
            raise DivisionByApparentZero("element is zero at its precision")
        return self.coeffs[min(self.coeffs)]

    def residual_val(self):
        """val(self) when nonzero, else the precision bound (lower bound)."""
        v = self.val()
        return v if v is not None else self.prec_val

    def __repr__(self):
        if not self.coeffs:
            return f"O({self.var}^{-self.prec_val})"
        ks = sorted(self.coeffs)
        parts = []
        for k in ks[:6]:
            expo = Fraction(-k, self.e)
            c = self.coeffs[k]
            if expo == 0:
                parts.append(f"{c}")
            else:
                parts.append(f"{c}*{self.var}^({expo})")
        if len(ks) > 6:
            parts.append("...")
        return " + ".join(parts) + f" + O({self.var}^{-self.prec_val})"

    # -- field/ramification alignment ------------------------------------

    def lift(self, field: Fq, e: int):
        """Re-express in a larger constant field and/or finer ramification."""
        if field is self.field and e == self.e:
            return self
        if e % self.e:
            raise ValueError("ramification index must refine the current one")
        s = e // self.e
        phi = self.field.embed_into(field) if field is not self.field else (lambda x: x)
        return InfElem(field, e, {k * s: phi(c) for k, c in self.coeffs.items()}, self.prec * s, self.var)

    @staticmethod
    def align(a: "InfElem", b: "InfElem"):
        if a.var != b.var:
            raise ValueError("mixed series variables")
        field = a.field.compositum(b.field)
        e = _lcm(a.e, b.e)
        return a.lift(field, e), b.lift(field, e)

    def truncate(self, prec_units):
        if prec_units >= self.prec:
            return self
        return InfElem(self.field, self.e, {k: c for k, c in self.coeffs.items() if k < prec_units}, prec_units, self.var)

    def with_prec_val(self, prec_val):
        return self.truncate(int(prec_val * self.e))

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        a, b = InfElem.align(self, other)
        f = a.field
        prec = min(a.prec, b.prec)
        out = dict(a.coeffs)
        for k, c in b.coeffs.items():
            s = f.add(out.get(k, 0), c)
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return InfElem(f, a.e, out, prec, a.var)

    def __neg__(self):
        f = self.field
        return InfElem(f, self.e, {k: f.neg(c) for k, c in self.coeffs.items()}, self.prec, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a, b = InfElem.align(self, other)
        f = a.field
        la = a.lead_exp
        lb = b.lead_exp
        prec = min(a.prec + lb, b.prec + la)
        if not a.coeffs or not b.coeffs:
            return InfElem(f, a.e, {}, prec, a.var)
        if len(a.coeffs) * len(b.coeffs) > _PACK_THRESHOLD and f.size <= (1 << 12):
            out = _mul_packed(a, b, prec)
        else:
            out = {}
            for k1, c1 in a.coeffs.items():
                for k2, c2 in b.coeffs.items():
                    k = k1 + k2
                    if k >= prec:
                        continue
                    s = f.add(out.get(k, 0), f.mul(c1, c2))
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
        return InfElem(f, a.e, out, prec, a.var)

    def scale(self, c):
        """Multiply by a constant of the same field."""
        f = self.field
        if not c:
            return InfElem(f, self.e, {}, self.prec, self.var)
        return InfElem(f, self.e, {k: f.mul(c, v) for k, v in self.coeffs.items()}, self.prec, self.var)

    def mono_mul(self, c, k):
        """Multiply by the exact monomial c*u^k (no precision loss beyond shift)."""
        f = self.field
        if not c:
            return InfElem(f, self.e, {}, self.prec + k, self.var)
        return InfElem(f, self.e, {kk + k: f.mul(c, v) for kk, v in self.coeffs.items()}, self.prec + k, self.var)

    def inverse(self):
        if not self.coeffs:
            raise DivisionByApparentZero("division by zero at precision")
        f = self.field
        L = self.lead_exp
        c = self.coeffs[L]
        relprec = self.prec - L
        if relprec <= 0:
            raise PrecisionExhausted("no significant digits left for inversion")
        # self = c*u^L * (1 + x), val(x) > 0
        unit = self.mono_mul(f.inv(c), -L)
        x = InfElem(f, self.e, {k: v for k, v in unit.coeffs.items() if k != 0}, relprec, self.var)
        one = InfElem(f, self.e, {0: 1}, relprec, self.var)
        # 1/(1+x) = prod (1 + (-x)^(2^j))  via geometric doubling,
        # truncated to the relative precision that survives division
        acc = one
        term = (-x).truncate(relprec)
        while term.coeffs:
            acc = (acc * (one + term)).truncate(relprec)
            term = (term * term).truncate(relprec)
        return acc.mono_mul(f.inv(c), -L).truncate(self.prec - 2 * L)

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return InfElem(self.field, self.e, {0: 1}, max(self.prec - self.lead_exp, 1), self.var)
        acc = None
        base = self
        while n:
            if n & 1:
                acc = base if acc is None else acc * base
            n >>= 1
            if n:
                base = base * base
        return acc

    # -- Frobenius and roots ----------------------------------------------

    def frobenius(self, n):
        """Full q^n-power map; n may be negative (then exponents must divide)."""
        if n == 0:
            return self
        f = self.field
        q = f.q
        if n > 0:
            s = q**n
            return InfElem(f, self.e, {k * s: f.frob_q(c, n) for k, c in self.coeffs.items()}, self.prec * s, self.var)
        s = q ** (-n)
        out = {}
        for k, c in self.coeffs.items():
            if k % s:
                raise NotAPower(f"exponent {k} not divisible by q^{-n}")
            out[k // s] = f.frob_q(c, n)
        return InfElem(f, self.e, out, -(-self.prec // s), self.var)

    def nth_root(self, n):
        """Canonical n-th root, extending ramification/constants as needed.

        Among the n-th roots in the constructed field, the one whose
        leading coefficient has the smallest discrete-log index with
        respect to the recorded field generator is returned.
        """
        if n <= 0:
            raise ValueError("root index must be positive")
        if not self.coeffs:
            raise DivisionByApparentZero("n-th root of zero at precision")
        if n == 1:
            return self
        p = self.field.p
        v = 0
        m = n
        while m % p == 0:
            m //= p
            v += 1
        elem = self
        if v:
            elem = elem._p_power_root(p, v)
        if m > 1:
            elem = elem._prime_to_p_root(m)
        return elem

    def _p_power_root(self, p, v):
        # exponents divide by p^v after refining ramification; coefficients
        # take inverse Frobenius (fields are perfect)
        s = p**v
        f = self.field
        g = 0
        for k in self.coeffs:
            g = _gcd2(g, abs(k))
        scale = s // _gcd2(s, g)
        elem = self.lift(f, self.e * scale) if scale > 1 else self
        out = {}
        for k, c in elem.coeffs.items():
            out[k // s] = elem.field.frob(c, -v)
        return InfElem(elem.field, elem.e, out, -(-elem.prec // s), self.var)

    def _prime_to_p_root(self, n):
        f = self.field
        L = self.lead_exp
        g = _gcd2(n, abs(L)) if L else n
        scale = n // g
        elem = self.lift(f, self.e * scale) if scale > 1 else self
        L = elem.lead_exp
        c = elem.coeffs[L]
        fld, croot = _const_nth_root(elem.field, c, n)
        elem = elem.lift(fld, elem.e)
        L = elem.lead_exp
        # strip the leading monomial: elem = c u^L (1 + x)
        unit = elem.mono_mul(fld.inv(elem.coeffs[L]), -L)
        relprec = unit.prec
        one = InfElem(fld, elem.e, {0: 1}, relprec, self.var)
        # Hensel for y^n = unit, y0 = 1; derivative n*y^(n-1) is a unit
        y = one
        n_inv = fld.inv(fld.scalar(n % fld.p))
        for _ in range(80):
            err = y**n - unit
            if err.is_zero():
                break
            step = err * (y ** (n - 1)).inverse()
            y = y - step.scale(n_inv)
        else:
            raise PrecisionExhausted("root refinement did not stabilize")
        root = y.mono_mul(croot, L // n)
        # absolute precision: d(a^(1/n)) = da / (n a^((n-1)/n))
        lead_val = Fraction(L, elem.e)
        prec_v = Fraction(elem.prec, elem.e) - Fraction(n - 1, n) * lead_val
        return root.truncate(int(prec_v * root.e))

    # -- serialization -----------------------------------------------------

    def to_json(self):
        f = self.field
        return {
            "q": f.q,
            "m": f.m,
            "p": f.p,
            "a": f.a,
            "modulus": list(f.modulus),
            "var": self.var,
            "e": self.e,
            "leading_exponent": self.lead_exp if self.coeffs else None,
            "coeffs": [[k, list(f.digits(c))] for k, c in sorted(self.coeffs.items())],
            "prec_N": self.prec,
        }

    @staticmethod
    def from_json(obj):
        f = Fq.get(obj["p"], obj["a"], obj["m"], tuple(obj["modulus"]))
        coeffs = {int(k): f.from_digits(d) for k, d in obj["coeffs"]}
        return InfElem(f, obj["e"], coeffs, obj["prec_N"], obj.get("var", "theta"))


def _gcd2(x, y):
    while y:
        x, y = y, x % y
    return x


def _const_nth_root(field: Fq, c: int, n: int):
    """Smallest canonical constant-field extension containing an n-th root
    of c, together with the canonical (least dlog) root."""
    for mult in range(1, 64 * n + 1):
        mm = field.m * mult
        big = Fq.get(field.p, field.a, mm) if mult > 1 else field
        cc = field.embed_into(big)(c) if big is not field else c
        order = big.size - 1
        g = _gcd2(n, order)
        if big.pow(cc, order // g) != 1:
            continue
        k = big.dlog(cc)
        # solve s*n = k mod order; solutions s0 + j*(order/g)
        if k % g:
            continue
        sub = order // g
        s0 = (k // g) * pow(n // g, -1, sub) % sub
        return big, big.pow(big.gen, s0)
    raise RuntimeError("constant-field root search exceeded bounds")


# ---------------------------------------------------------------------------
# packed dense multiplication


def _pack_coeffs(field, items, lead, stride, span):
    """Little-endian 32-bit-slot packing of {exponent: element} data."""
    step = _PACK_BITS // 8
    buf = bytearray(span * stride * step + step)
    digits = field.digits
    for k, c in items:
        base = (k - lead) * stride * step
        for i, d in enumerate(digits(c)):
            if d:
                buf[base + i * step] = d
    return int.from_bytes(buf, "little")


def _unpack_product(field, prod, stride, nslots):
    import struct

    step = _PACK_BITS // 8
    need = nslots * stride
    size = max(need * step, (prod.bit_length() + 7) // 8) + step * 8
    buf = prod.to_bytes(size, "little")
    return struct.unpack_from(f"<{need}I", buf)


def _mul_packed(a: InfElem, b: InfElem, prec: int):
    f = a.field
    n = f.n
    stride = 2 * n - 1
    la, lb = a.lead_exp, b.lead_exp
    span_a = max(a.coeffs) - la + 1
    span_b = max(b.coeffs) - lb + 1
    pa = _pack_coeffs(f, a.coeffs.items(), la, stride, span_a)
    pb = _pack_coeffs(f, b.coeffs.items(), lb, stride, span_b)
    prod = int(_mpz(pa) * _mpz(pb))
    span = min(prec - (la + lb), span_a + span_b - 1)
    slots = _unpack_product(f, prod, stride, span)
    out = {}
    reduce_digits = f.reduce_digits
    for j in range(span):
        vec = slots[j * stride: (j + 1) * stride]
        if any(vec):
            c = reduce_digits(vec)
            if c:
                out[j + la + lb] = c
    return out


# ---------------------------------------------------------------------------
# spec-surface operations


def inf_arith(a: InfElem, b: InfElem, op: str) -> InfElem:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def inf_frobenius(a: InfElem, n: int) -> InfElem:
    return a.frobenius(n)


def inf_nth_root(a: InfElem, n: int) -> InfElem:
    return a.nth_root(n)


def residual_valuation(x: InfElem):
    """val(x) if x is visibly nonzero, else its precision bound."""
    return x.residual_val()


# ---------------------------------------------------------------------------
# polynomials with InfElem coefficients and Newton-polygon root finding


def _poly_norm(f):
    f = list(f)
    while f and f[-1].is_zero():
        f.pop()
    return f


def _poly_align(f):
    field = f[0].field
    e = f[0].e
    for c in f[1:]:
        field = field.compositum(c.field)
        e = _lcm(e, c.e)
    return [c.lift(field, e) for c in f]


def _poly_eval(f, x):
    acc = None
    for c in reversed(f):
        acc = c if acc is None else acc * x + c
    return acc


def _poly_deriv(f):
    out = []
    for k in range(1, len(f)):
        c = f[k]
        fld = c.field
        out.append(c.scale(fld.scalar(k % fld.p)))
    return out


def _poly_divmod(f, g):
    f = _poly_norm(list(f))
    g = _poly_norm(list(g))
    if not g:
        raise ZeroDivisionError
    quot = []
    rem = list(f)
    glead_inv = g[-1].inverse()
    while len(rem) >= len(g) and rem:
        c = rem[-1] * glead_inv
        quot.append(c)
        for i in range(len(g)):
            rem[len(rem) - len(g) + i] = rem[len(rem) - len(g) + i] - c * g[i]
        rem.pop()
        rem = rem[: _len_norm(rem)]
    return list(reversed(quot)), rem


def _len_norm(f):
    n = len(f)
    while n and f[n - 1].is_zero():
        n -= 1
    return n


def _poly_gcd(f, g):
    a = _poly_norm(list(f))
    b = _poly_norm(list(g))
    while b:
        a, b = b, _poly_divmod(a, b)[1]
        b = _poly_norm(b)
    return a


def _newton_polygon(f):
    """Lower hull segments of {(i, lead_exp(a_i))}; returns
    [(i1, i2, slope_fraction)] with slope = (v2-v1)/(i2-i1)."""
    pts = [(i, c.lead_exp) for i, c in enumerate(f) if not c.is_zero()]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    segs = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segs.append((x1, x2, Fraction(y2 - y1, x2 - x1)))
    return segs


def newton_roots(f, max_depth=8):
    """All roots (with multiplicity) of a polynomial with InfElem coefficients.

    Newton-polygon slope segmentation followed by Hensel lifting; each root
    is returned in a freshly constructed (e, m) extension.  Near-roots that
    cannot be separated at working precision raise PrecisionExhausted
    rather than silently merging.
    """
    f = _poly_norm(_poly_align(list(f)))
    if not f:
        raise ValueError("zero polynomial")
    deg = len(f) - 1
    if deg == 0:
        return []
    roots = []
    # roots at zero
    nzero = 0
    while f[nzero].is_zero():
        nzero += 1
    if nzero:
        z = InfElem.zero(f[0].field, f[0].prec // f[0].e, f[0].e, f[0].var)
        roots.append((z, nzero))
        f = f[nzero:]
    simple = _squarefree_roots(f, max_depth)
    # assign multiplicities by trial division
    for r in simple:
        mult = 0
        work = [c for c in f]
        while True:
            quot, rem = _divide_linear(work, r)
            if rem is None or not _negligible(rem, work):
                break
            mult += 1
            work = quot
            if len(work) <= 1:
                break
        if mult == 0:
            raise PrecisionExhausted("root does not divide at working precision")
        roots.append((r, mult))
    total = sum(m for _, m in roots)
    if total != deg:
        raise PrecisionExhausted(f"found {total} of {deg} roots")
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if (roots[i][0] - roots[j][0]).is_zero():
                raise PrecisionExhausted("two roots are indistinguishable at precision")
    return roots


def _negligible(rem, context):
    # A remainder counts as zero when its valuation sits within the last
    # quarter of the available precision window (measured relative to the
    # size of the polynomial's own coefficients).  Genuine non-roots miss
    # this by a margin comparable to the full window.
    if not rem:
        return True
    scale = min((c.val() for c in context if not c.is_zero()), default=Fraction(0))
    for c in rem:
        if c.is_zero():
            continue
        if (c.val() - scale) < Fraction(3, 4) * (c.prec_val - scale):
            return False
    return True


def _divide_linear(f, r):
    """Divide f by (y - r); returns (quotient, [remainder])"""
    field = f[0].field.compositum(r.field)
    e = _lcm(f[0].e, r.e)
    f = [c.lift(field, e) for c in f]
    r = r.lift(field, e)
    quot = []
    acc = None
    for c in reversed(f):
        acc = c if acc is None else acc * r + c
        quot.append(acc)
    rem = quot.pop()
    return list(reversed(quot)), [rem]


def _squarefree_roots(f, max_depth):
    """Distinct roots of f (InfElem coefficients, constant term nonzero)."""
    fld = f[0].field
    p = fld.p
    deriv = _poly_norm(_poly_deriv(f))
    if not deriv:
        # f(y) = g(y^p): take p-th roots of the roots of g
        g = [f[i] for i in range(0, len(f), p)]
        return [r.nth_root(p) for r in _squarefree_roots(g, max_depth)]
    g = _poly_gcd(f, deriv)
    if len(g) > 1:
        f = _poly_norm(_poly_divmod(f, g)[0])
    return _polygon_roots(f, max_depth)


def _polygon_roots(f, depth, min_val=None):
    """Distinct roots of f with valuation strictly above min_val."""
    if depth <= 0:
        raise PrecisionExhausted("Puiseux recursion depth exhausted")
    f = _poly_norm(_poly_align(list(f)))
    out = []
    if len(f) <= 1:
        return out
    if f[0].is_zero():
        # an earlier shift hit the root exactly
        out.append(InfElem(f[0].field, f[0].e, {}, f[0].prec, f[0].var))
        nz = 0
        while f[nz].is_zero():
            nz += 1
        f = f[nz:]
        if len(f) <= 1:
            return out
    if len(f) == 2:
        r = -(f[0] / f[1])
        if min_val is None or r.is_zero() or r.val() > min_val:
            out.append(r)
        return out
    for i1, i2, slope in _newton_polygon(f):
        mu = -slope  # u-exponent of the roots on this segment
        root_val = Fraction(mu, f[0].e)
        if min_val is not None and root_val <= min_val:
            continue
        den = mu.denominator
        fld = f[0].field
        e2 = f[0].e * den
        lifted = [c.lift(fld, e2) for c in f]
        mup = int(mu * den)  # root exponent in the refined e2-units
        # residual polynomial: coefficients of minimal valuation along the segment
        vmin = min(lifted[i].lead_exp + mup * i for i in range(i1, i2 + 1) if not lifted[i].is_zero())
        res = [0] * (i2 - i1 + 1)
        const = lifted[0].field
        for i in range(i1, i2 + 1):
            c = lifted[i]
            if not c.is_zero() and c.lead_exp + mup * i == vmin:
                res[i - i1] = c.lead_coeff()
        rroots = _const_poly_roots(res, const)
        for cbar, rmult, cfield in rroots:
            if rmult == 1:
                out.append(_hensel_lift(lifted, cbar, cfield, mup, e2))
            else:
                # shift by the first Puiseux term and recurse on the cluster
                big = const.compositum(cfield)
                phi = cfield.embed_into(big) if cfield is not big else (lambda x: x)
                shifted = [c.lift(big, e2) for c in lifted]
                approx = InfElem(big, e2, {mup: phi(cbar)}, max(c.prec for c in shifted), f[0].var)
                g = _taylor_shift(shifted, approx)
                for r2 in _polygon_roots(g, depth - 1, min_val=root_val):
                    out.append(approx + r2)
    return out


def _taylor_shift(f, a):
    """f(a + z) coefficient list via repeated synthetic division."""
    work = [c for c in f]
    out = []
    for _ in range(len(f)):
        if not work:
            break
        quot = []
        acc = None
        for c in reversed(work):
            acc = c if acc is None else acc * a + c
            quot.append(acc)
        rem = quot.pop()
        out.append(rem)
        work = list(reversed(quot))
    return out


def _hensel_lift(f, cbar, cfield, mup, e2):
    base = f[0].field
    fld = base.compositum(cfield) if cfield is not base else base
    lifted = [c.lift(fld, e2) for c in f]
    phi = cfield.embed_into(fld) if cfield is not fld else (lambda x: x)
    prec = max(c.prec for c in lifted)
    y = InfElem(fld, e2, {mup: phi(cbar)}, prec, f[0].var)
    deriv = _poly_deriv(lifted)
    stall = 0
    last_val = None
    for _ in range(200):
        fy = _poly_eval(lifted, y)
        if fy.is_zero():
            return y
        dy = _poly_eval(deriv, y)
        step = fy / dy
        if step.is_zero():
            return y
        y = y - step
        v = fy.val()
        if last_val is not None and v <= last_val:
            stall += 1
            if stall >= 3:
                raise PrecisionExhausted("Hensel iteration stalled; raise the precision")
        else:
            stall = 0
        last_val = v
    raise PrecisionExhausted("Hensel iteration did not terminate")


def _const_poly_roots(coeffs, field: Fq):
    """Roots of a constant-field polynomial in minimal canonical extensions.

    Returns [(root, multiplicity, field_containing_root)]."""
    from .arith import poly_roots_in_ext

    deg = 0
    for i, c in enumerate(coeffs):
        if c:
            deg = i
    found = []
    seen = 0
    mult_total = deg
    mm = 1
    while seen < mult_total and mm <= max(1, deg) * 4:
        big = Fq.get(field.p, field.a, field.m * mm) if mm > 1 else field
        roots = poly_roots_in_ext(coeffs, field, big)
        prev_fields = [Fq.get(field.p, field.a, field.m * k) if k > 1 else field for k in range(1, mm)]
        for r, mult in roots:
            is_new = True
            for small in prev_fields:
                if big.n % small.n == 0 and big.frob(r, small.n) == r:
                    is_new = False
                    break
            if is_new:
                found.append((r, mult, big))
                seen += mult
        mm += 1
    if seen < mult_total:
        raise PrecisionExhausted("residual roots not found in bounded extensions")
    return found
