"""Upper half-space isometries: displacements, axes, and trace bounds.

Matrices act on H^3 = C x (0, inf) through the quaternion extension of
the boundary Moebius action.  The boundary point at infinity is an
explicit sentinel, never a float.  All matrices are kept at determinant
one with a canonical sign representative, and every derived invariant
(translation length, rotation angle, trace expressions) is stable under
the sign quotient and under conjugation.
"""

from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .quartic import DEFAULT_TOL, alpha
from .words import Word, gamma_star, word_str

CLASSIFY_BAND = 1e-9
_MATCH_TOL = 1e-9


class _Infinity:
    """The boundary point at infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"


INF = _Infinity()
BoundaryPoint = Union[complex, _Infinity]


def _is_inf(z) -> bool:
    return z is INF


@dataclass(frozen=True)
class H3Point:
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"height must be positive, got {self.t}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class GeodesicLine:
    """Unordered pair of distinct boundary endpoints."""

    e1: BoundaryPoint
    e2: BoundaryPoint

    def __post_init__(self):
        if _boundary_eq(self.e1, self.e2):
            raise ValueError("geodesic endpoints must be distinct")


def _boundary_eq(p, q, tol: float = 0.0) -> bool:
    if _is_inf(p) or _is_inf(q):
        return _is_inf(p) and _is_inf(q)
    return abs(p - q) <= tol


class MoebiusClass(enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Moebius:
    """Determinant-one matrix.

    Products and inverses are plain matrix operations, never re-signed:
    trace data of words in several matrices (commutators in particular)
    is then independent of the sign representatives of the inputs.  The
    canonical representative (first significant entry with argument in
    [0, pi)) is available through :meth:`canonical` and is produced by
    the :meth:`normalized` constructor.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def normalized(cls, a, b, c, d) -> "Moebius":
        det = a * d - b * c
        if det == 0:
            raise ValueError("matrix is singular")
        s = cmath.sqrt(det)
        return cls(a / s, b / s, c / s, d / s).canonical()

    def canonical(self) -> "Moebius":
        return Moebius(*_canonical_sign(self.a, self.b, self.c, self.d))

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def trace(self) -> complex:
        return self.a + self.d

    def tr2(self) -> complex:
        return self.trace() ** 2

    def __mul__(self, other: "Moebius") -> "Moebius":
        return Moebius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a)

    def conjugated_by(self, h: "Moebius") -> "Moebius":
        return h * self * h.inv()

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)


def _canonical_sign(a, b, c, d):
    scale = max(abs(a), abs(b), abs(c), abs(d))
    for e in (a, b, c, d):
        if abs(e) > 1e-12 * scale:
            ph = cmath.phase(e)
            if not (0 <= ph < math.pi):
                return (-a, -b, -c, -d)
            return (a, b, c, d)
    raise ValueError("zero matrix")


def moebius(a, b, c, d) -> Moebius:
    return Moebius.normalized(complex(a), complex(b), complex(c), complex(d))


def classify(m: Moebius) -> MoebiusClass:
    """Fixed-point type from the squared trace.

    Loxodromic iff the squared trace lies off the real segment [0, 4];
    a point within 1e-9 of the segment but not on it is reported
    indeterminate rather than guessed.
    """
    t2 = m.tr2()
    re = min(max(t2.real, 0.0), 4.0)
    dist = abs(t2 - re)
    if dist > CLASSIFY_BAND:
        return MoebiusClass.LOXODROMIC
    if dist > 0.0:
        return MoebiusClass.INDETERMINATE
    if t2.real == 4.0:
        off = max(abs(m.b), abs(m.c), abs(m.a - m.d))
        if off <= 1e-12:
            return MoebiusClass.IDENTITY
        return MoebiusClass.PARABOLIC
    return MoebiusClass.ELLIPTIC


def translation_invariants(m: Moebius) -> tuple[float, float]:
    """(T, theta): translation length and rotation angle of a loxodromic.

    Computed from the multiplier (the squared dominant eigenvalue), so
    the result is exactly invariant under the sign quotient and under
    conjugation; theta lands in (-pi/2, pi/2].
    """
    kind = classify(m)
    if kind is not MoebiusClass.LOXODROMIC:
        raise ValueError(f"translation invariants need a loxodromic, got {kind.value}")
    tr = m.trace()
    disc = cmath.sqrt(tr * tr - 4)
    u1 = (tr + disc) / 2
    u2 = (tr - disc) / 2
    u = u1 if abs(u1) > abs(u2) else u2
    mult = u * u
    return math.log(abs(mult)), cmath.phase(mult) / 2.0


def fixed_points(m: Moebius) -> GeodesicLine:
    """Axis endpoints on the boundary; needs two distinct fixed points."""
    kind = classify(m)
    if kind in (MoebiusClass.PARABOLIC, MoebiusClass.IDENTITY):
        raise ValueError(f"a {kind.value} element has no axis")
    if m.c == 0:
        if m.a == m.d:
            raise ValueError("no second fixed point")
        return GeodesicLine(INF, m.b / (m.d - m.a))
    disc = cmath.sqrt(m.tr2() - 4)
    p1 = (m.a - m.d + disc) / (2 * m.c)
    p2 = (m.a - m.d - disc) / (2 * m.c)
    return GeodesicLine(p1, p2)


axis = fixed_points


def apply_boundary(m: Moebius, z: BoundaryPoint) -> BoundaryPoint:
    if _is_inf(z):
        return INF if m.c == 0 else m.a / m.c
    den = m.c * z + m.d
    if den == 0:
        return INF
    return (m.a * z + m.b) / den


def apply(m: Moebius, p: H3Point) -> H3Point:
    """Quaternion extension of the boundary action to the half-space."""
    z, t = p.z, p.t
    cz_d = m.c * z + m.d
    den = abs(cz_d) ** 2 + abs(m.c) ** 2 * t * t
    w = ((m.a * z + m.b) * cz_d.conjugate() + m.a * m.c.conjugate() * t * t) / den
    return H3Point(w.real, w.imag, t / den)


def dist(p: H3Point, q: H3Point) -> float:
    """Hyperbolic distance via the standard cosh relation."""
    num = abs(p.z - q.z) ** 2 + (p.t - q.t) ** 2
    return math.acosh(1.0 + num / (2.0 * p.t * q.t))


def displacement(m: Moebius, p: H3Point) -> float:
    return dist(p, apply(m, p))


def _to_vertical(line: GeodesicLine) -> Moebius:
    """A matrix sending the line's endpoints to 0 and infinity."""
    e1, e2 = line.e1, line.e2
    if _is_inf(e1):
        return moebius(0, 1, 1, -e2)
    if _is_inf(e2):
        return moebius(1, -e1, 0, 1)
    return moebius(1, -e1, 1, -e2)


def dist_point_geodesic(p: H3Point, line: GeodesicLine) -> float:
    """Distance from a point to a geodesic, exact on the vertical axis."""
    g = _to_vertical(line)
    q = apply(g, p)
    r = math.hypot(q.x, q.y, q.t)
    return math.acosh(max(r / q.t, 1.0))


def _mobius_to_01inf(z1, z2, z3) -> Moebius:
    """The unique map with z1 -> 0, z2 -> 1, z3 -> inf."""
    if _is_inf(z1):
        return moebius(0, z2 - z3, 1, -z3)
    if _is_inf(z2):
        return moebius(1, -z1, 1, -z3)
    if _is_inf(z3):
        return moebius(1, -z1, 0, z2 - z1)
    return moebius(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def mobius_three_points(src, dst) -> Moebius:
    """The unique map carrying one boundary triple onto another."""
    return _mobius_to_01inf(*dst).inv() * _mobius_to_01inf(*src)


def w_from_bc(bc: complex) -> complex:
    """The solution of bc = (1-w)^2 / (4w) with modulus >= 1."""
    # w^2 - 2(1 + 2bc) w + 1 = 0; roots are mutual inverses
    s = 1 + 2 * bc
    disc = cmath.sqrt(s * s - 1)
    w1, w2 = s + disc, s - disc
    return w1 if abs(w1) >= abs(w2) else w2


def common_perpendicular(l1: GeodesicLine, l2: GeodesicLine) -> tuple[H3Point, float]:
    """Midpoint and length of the shortest segment between two geodesics.

    Normalizes the endpoint quadruple to (1, -1) and (w, -w) with
    |w| >= 1; the common perpendicular then runs along the vertical
    axis from height 1 to height |w|, so the separation is log |w| and
    the midpoint pulls back from height sqrt(|w|).
    """
    pts = [l1.e1, l1.e2, l2.e1, l2.e2]
    for i in range(4):
        for j in range(i + 1, 4):
            if _boundary_eq(pts[i], pts[j]):
                raise ValueError("geodesics share an endpoint")
    g0 = _to_vertical(l1)
    r = apply_boundary(g0, l2.e1)
    s = apply_boundary(g0, l2.e2)
    q = cmath.sqrt(r / s)
    scale = max(abs(r), abs(s), 1.0)
    for w in ((1 - q) / (1 + q), (1 + q) / (1 - q)):
        g = mobius_three_points((l1.e1, l1.e2, l2.e1), (1.0, -1.0, w))
        img = apply_boundary(g, l2.e2)
        if not _is_inf(img) and abs(img - (-w)) <= 1e-6 * max(abs(w), 1.0):
            break
    else:
        raise RuntimeError("cross-ratio normalization failed")
    if abs(w) < 1.0:
        g = moebius(0, 1, 1, 0) * g  # swap w with 1/w
        w = 1 / w
    mid = apply(g.inv(), H3Point(0.0, 0.0, math.sqrt(abs(w))))
    return mid, math.log(abs(w))


def commutator(g: Moebius, h: Moebius) -> Moebius:
    return g * h * g.inv() * h.inv()


def jorgensen_lhs(g: Moebius, h: Moebius) -> float:
    """|tr^2(g) - 4| + |tr(g h g^-1 h^-1) - 2|; sign-quotient safe."""
    return abs(g.tr2() - 4) + abs(commutator(g, h).trace() - 2)


def bound_rhs(n: int, tol=DEFAULT_TOL) -> float:
    """The certified trace bound 2 sinh^2(log(alpha_n)/4)."""
    return 2.0 * math.sinh(0.25 * math.log(alpha(n, tol).value)) ** 2


def disp_lower_bound(a: float, b: float) -> float:
    """log(b(1-a) / (a(1-b))) / 2 for mass parameters a, b in [0, 1]."""
    if not (0 <= a <= 1 and 0 <= b <= 1):
        raise ValueError("parameters must lie in [0, 1]")
    if a == 0 and b == 0:
        raise ValueError("parameters must not both be 0")
    if a == 1 and b == 1:
        raise ValueError("parameters must not both be 1")
    if a == 0 or b == 1:
        raise ValueError("bound undefined at a = 0 or b = 1")
    if b == 0:
        return -math.inf
    return 0.5 * math.log(b * (1 - a) / (a * (1 - b)))


def midpoint_inequality(g: Moebius, h: Moebius) -> tuple[float, float]:
    """Displacements of g and of h g h^-1 at the common-perpendicular
    midpoint of the axes of g and h^-1 g h; the first is the smaller."""
    conj_in = (h.inv() * g) * h
    mid, _ = common_perpendicular(fixed_points(g), fixed_points(conj_in))
    conj_out = (h * g) * h.inv()
    return displacement(g, mid), displacement(conj_out, mid)


# -- freeness certificate and the displacement scan --------------------------

@dataclass(frozen=True)
class IsometricCircle:
    center: complex
    radius: float


def isometric_circles(m: Moebius) -> tuple[IsometricCircle, IsometricCircle]:
    """Circles of m and m^-1; undefined when infinity is fixed."""
    if m.c == 0:
        raise ValueError("isometric circle undefined: the map fixes infinity")
    r = 1.0 / abs(m.c)
    return (
        IsometricCircle(-m.d / m.c, r),
        IsometricCircle(m.a / m.c, r),
    )


@dataclass
class SchottkyCertificate:
    passed: bool
    reason: str
    min_gap: float
    circles: list


def schottky_certificate(gens: Sequence[Moebius]) -> SchottkyCertificate:
    """Sufficient freeness test: pairwise disjoint isometric circles.

    A pass certifies a free, discrete, purely loxodromic group (classical
    ping-pong on the circle exteriors).  A failure certifies nothing.
    """
    circles: list[IsometricCircle] = []
    for i, g in enumerate(gens):
        if classify(g) is not MoebiusClass.LOXODROMIC:
            return SchottkyCertificate(
                False, f"generator {i} is not loxodromic", math.nan, []
            )
        try:
            circles.extend(isometric_circles(g))
        except ValueError as exc:
            return SchottkyCertificate(False, f"generator {i}: {exc}", math.nan, [])
    min_gap = math.inf
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            gap = abs(circles[i].center - circles[j].center) - (
                circles[i].radius + circles[j].radius
            )
            min_gap = min(min_gap, gap)
    if min_gap <= 0:
        return SchottkyCertificate(
            False, "isometric circles overlap", min_gap, circles
        )
    return SchottkyCertificate(True, "pairwise disjoint isometric circles", min_gap, circles)


def evaluate_word(gens: Sequence[Moebius], w: Word) -> Moebius:
    m = moebius(1, 0, 0, 1)
    for g in w.letters:
        m = m * (gens[abs(g) - 1] if g > 0 else gens[abs(g) - 1].inv())
    return m


@dataclass
class DisplacementReport:
    certificate: SchottkyCertificate
    hypothesis_verified: bool
    displacements: list
    max_displacement: float
    bound: float
    margin: float
    satisfied: Optional[bool]


def check_displacement_theorem(
    gens: Sequence[Moebius],
    z: H3Point,
    n: Optional[int] = None,
    tol=DEFAULT_TOL,
) -> DisplacementReport:
    """Scan generators and their short conjugates against the bound.

    Computes the displacement at z of every generator, inverse, and
    three-letter conjugate, and compares the maximum with the certified
    bound log(alpha_n)/2.  The comparison is asserted only when the
    freeness certificate passes; otherwise the report is labelled
    unverified and never asserts the theorem.
    """
    if n is None:
        n = len(gens)
    elif n != len(gens):
        raise ValueError(f"rank {n} does not match {len(gens)} generators")
    if n < 2:
        raise ValueError("need at least two generators")
    cert = schottky_certificate(gens)
    verified = cert.passed
    disps = []
    for w in gamma_star(n):
        if w.is_identity():
            continue
        m = evaluate_word(gens, w)
        if verified and classify(m) is not MoebiusClass.LOXODROMIC:
            cert = SchottkyCertificate(
                False, f"element {word_str(w)} is not loxodromic", cert.min_gap,
                cert.circles,
            )
            verified = False
        disps.append((word_str(w), displacement(m, z)))
    max_disp = max(d for _, d in disps)
    bound = 0.5 * math.log(alpha(n, tol).value)
    margin = max_disp - bound
    satisfied = (margin >= -1e-9) if verified else None
    if verified and not satisfied:
        raise RuntimeError(
            f"certified configuration violates the bound by {-margin:.3e}; "
            "this indicates a defect, not a counterexample"
        )
    return DisplacementReport(
        certificate=cert,
        hypothesis_verified=verified,
        displacements=disps,
        max_displacement=max_disp,
        bound=bound,
        margin=margin,
        satisfied=satisfied,
    )


def loxodromic_with_axis(p: complex, q: complex, multiplier: complex) -> Moebius:
    """Loxodromic with fixed points p, q and the given multiplier."""
    if abs(multiplier) <= 1:
        raise ValueError("multiplier must have modulus > 1")
    s = cmath.sqrt(multiplier)
    v = moebius(p, q, 1, 1)
    return v * moebius(s, 0, 0, 1 / s) * v.inv()


def sample_schottky_generators(n: int = 2, multiplier: float = 16.0) -> list[Moebius]:
    """Generators with well separated axes and small isometric circles."""
    if n < 2:
        raise ValueError("need rank >= 2")
    return [
        loxodromic_with_axis(complex(4 * i, 0), complex(4 * i + 1, 0), multiplier)
        for i in range(n)
    ]


# -- matrix file format -------------------------------------------------------

def matrix_to_json(m: Moebius) -> list:
    return [[e.real, e.imag] for e in m.entries()]


def load_matrices(path) -> list[Moebius]:
    """Read a JSON array of matrices given as four [re, im] pairs.

    Raises ValueError on malformed entries or determinants away from one.
    """
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise ValueError("matrix file must hold a non-empty JSON array")
    out = []
    for k, quad in enumerate(data):
        if (
            not isinstance(quad, list)
            or len(quad) != 4
            or any(not isinstance(p, list) or len(p) != 2 for p in quad)
        ):
            raise ValueError(f"matrix {k}: expected four [re, im] pairs")
        a, b, c, d = (complex(p[0], p[1]) for p in quad)
        det = a * d - b * c
        if abs(det - 1) > 1e-9:
            raise ValueError(f"matrix {k}: determinant {det} is not 1")
        out.append(moebius(a, b, c, d))
    return out
