"""Parameter-region predicates, threshold scalars and a raster atlas.

Every predicate is available in two forms:

* a scalar form taking :class:`~abcd_lab.params_core.PhysParams`, written with
  plain arithmetic so that exact rationals give exact answers on boundaries;
* a vectorized *margin* ``g(a, b, c)`` evaluated on numpy arrays, where the
  predicate reads ``g > 0`` (strict) or ``g >= 0`` (non-strict).  The rasterizer
  works with margins so that boundary cells can be flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .errors import BadRange, BTooSmall, KappaOutOfRange, V0OutOfRange
from .params_core import ONE_SIXTH, PhysParams

__all__ = [
    "REFINED_BREAKPOINT",
    "CRITICAL_B_AC",
    "KAPPA_S_LIMIT",
    "KappaScales",
    "Thresholds",
    "BarBounds",
    "AlphaWindow",
    "ExteriorConditions",
    "DecayScenario",
    "RegionMap",
    "is_dispersion_like",
    "is_refined_dispersion_like",
    "kappa_scales",
    "thresholds",
    "bar_bounds",
    "alpha_window",
    "uniform_margins",
    "in_R_sharp",
    "exterior_conditions",
    "sigma_min_nu_b",
    "sigma_ac",
    "hyperbola_nu_b",
    "ellipse_nu_b",
    "obstruction_holds",
    "classify",
    "predicate_margin",
    "near_boundary",
    "PREDICATES",
    "rasterize",
    "boundary_on_ac_line",
    "r1_margin_literal",
    "bar_bounds_raw",
    "LABELS",
]

#: Breakpoint ``-(19 + sqrt(181))/90`` separating the first two refined branches.
REFINED_BREAKPOINT = -(19.0 + math.sqrt(181.0)) / 90.0
#: ``(3 + sqrt 3)/12``: above it the exterior speed on the ``a = c`` line exceeds 1.
CRITICAL_B_AC = (3.0 + math.sqrt(3.0)) / 12.0
#: ``(2 - sqrt 3)/3``: the s-thresholds exist only for smaller kappa0.
KAPPA_S_LIMIT = (2.0 - math.sqrt(3.0)) / 3.0

_THREE_SIXTEENTHS = Fraction(3, 16)
_TWO_NINTHS = Fraction(2, 9)
_NEG_THIRD = Fraction(-1, 3)
_NEG_NINTH = Fraction(-1, 9)


def _sqrt(x):
    if isinstance(x, np.ndarray):
        return np.sqrt(x)
    return math.sqrt(float(x))


# --- dispersion-like families ---------------------------------------------


def is_dispersion_like(p: PhysParams) -> bool:
    """Strict condition ``3b(a + c) + 2b^2 < 8ac``."""
    a, b, c = p.a, p.b, p.c
    return 3 * b * (a + c) + 2 * b * b < 8 * a * c


def _refined_branch(lo, hi) -> bool:
    """Branch test with ``lo <= hi < 0``; ``lo`` selects the sub-range.

    ``lo`` is the smaller normalized coefficient.  The mirrored case is the
    same table with the roles of the two coefficients swapped.
    """
    if lo < REFINED_BREAKPOINT:
        return 45 * hi * lo > 1 - hi
    if lo < _NEG_THIRD:
        return 18 * hi * lo + hi + lo > 0
    if lo < _NEG_NINTH:
        return 27 * hi * lo > 6 * hi + 1
    return False


def is_refined_dispersion_like(p: PhysParams) -> bool:
    """Dispersion-like, or one of the piecewise refined branch conditions.

    For ``c/b <= a/b`` the sub-range is chosen by ``c/b`` and the tests are
    ``45 a~c~ > 1 - a~``, ``18 a~c~ + a~ + c~ > 0`` and ``27 a~c~ > 6a~ + 1``;
    the case ``a/b <= c/b`` swaps the two coefficients.
    """
    if is_dispersion_like(p):
        return True
    at, ct = p.a / p.b, p.c / p.b
    if ct <= at and _refined_branch(ct, at):
        return True
    if at <= ct and _refined_branch(at, ct):
        return True
    return False


# --- kappa scales and thresholds ------------------------------------------


@dataclass(frozen=True)
class KappaScales:
    v0: float
    v0_plus: float
    kappa0: float
    b0: float
    b1: float
    b2: float | None


def kappa_scales(v0: Real) -> KappaScales:
    """Scales attached to a speed bound ``0 < v0 < 1``."""
    if not 0 < v0 < 1:
        raise V0OutOfRange(f"v0 = {v0} must lie in (0, 1)")
    v0_plus = (1 + v0) / 2
    kappa0 = (1 - v0) / 4
    b0 = 1 / (9 * kappa0)
    b1 = 1 / (2 * (2 * kappa0 + 1))
    b2 = None
    if kappa0 < KAPPA_S_LIMIT:
        d_r = (2 * kappa0 + 1) ** 2 - 6 * kappa0
        d_s = (3 * kappa0 + 1) ** 2 - 18 * kappa0
        b2 = 1 / (5 * kappa0 + 2 - _sqrt(d_r) - _sqrt(d_s))
    return KappaScales(v0=v0, v0_plus=v0_plus, kappa0=kappa0, b0=b0, b1=b1, b2=b2)


@dataclass(frozen=True)
class Thresholds:
    r_minus: float
    r_plus: float
    rt_minus: float
    rt_plus: float
    s_minus: float | None = None
    s_plus: float | None = None
    st_minus: float | None = None
    st_plus: float | None = None

    @property
    def has_s(self) -> bool:
        return self.s_minus is not None


def _check_kappa(kappa0: Real) -> None:
    if not 0 < kappa0 < 0.25:
        raise KappaOutOfRange(f"kappa0 = {kappa0} must lie in (0, 1/4)")


def thresholds(kappa0: Real, b: Real) -> Thresholds:
    """The r, r~, s, s~ breakpoints of the branch tables for the bar bounds."""
    _check_kappa(kappa0)
    if not b > ONE_SIXTH:
        raise BTooSmall(f"b = {b} must exceed 1/6")
    k, b = float(kappa0), float(b)
    root_r = math.sqrt((2 * k + 1) ** 2 - 6 * k)
    out = dict(
        r_minus=2 / 3 + (2 / 3) * b * (-(2 * k + 1) - root_r),
        r_plus=2 / 3 + (2 / 3) * b * (-(2 * k + 1) + root_r),
        rt_minus=(2 / 3) * b * ((2 * k + 1) - root_r),
        rt_plus=(2 / 3) * b * ((2 * k + 1) + root_r),
    )
    if k < KAPPA_S_LIMIT:
        root_s = math.sqrt((3 * k + 1) ** 2 - 18 * k)
        out.update(
            s_minus=2 / 3 + (2 / 3) * b * (-(3 * k + 1) - root_s),
            s_plus=2 / 3 + (2 / 3) * b * (-(3 * k + 1) + root_s),
            st_minus=(2 / 3) * b * ((3 * k + 1) - root_s),
            st_plus=(2 / 3) * b * ((3 * k + 1) + root_s),
        )
    return Thresholds(**out)


# --- bar bounds and the alpha window ---------------------------------------


@dataclass(frozen=True)
class BarBounds:
    """Upper bounds ``A2..A4`` and lower bounds ``B2..B4`` on alpha.

    ``min_a`` and ``max_b`` are read off the branch tables; ``min_branch`` and
    ``max_branch`` name the realizing bound (``"A2"``, ``"B4"``, ...).
    """

    a2: float
    a3: float
    a4: float
    b2: float
    b3: float
    b4: float
    min_a: float
    max_b: float
    min_branch: str
    max_branch: str


def bar_bounds_raw(kappa0, nu, b):
    """The six closed forms, scalar or array."""
    m = 3 * nu - 2
    a2 = 3 * kappa0 + m / (4 * b)
    a3 = (18 * kappa0 * b + 2 * m) / (12 * b + m)
    a4 = (12 * kappa0 * b + m) / (12 * b + 2 * m)
    b2 = 3 * nu / (4 * b) - 3 * kappa0
    b3 = (2 * nu - 6 * kappa0 * b) / (4 * b - nu)
    b4 = (nu - 4 * kappa0 * b) / (4 * b - 2 * nu)
    return a2, a3, a4, b2, b3, b4


def _select_branch(nu: float, outer_lo, outer_hi, inner_lo, inner_hi) -> int:
    """Return 4, 2 or 3 following the shared shape of both branch tables."""
    if nu <= outer_lo or nu >= outer_hi:
        return 4
    if inner_lo is not None and inner_lo <= nu <= inner_hi:
        return 2
    return 3


def bar_bounds(kappa0: Real, nu: Real, b: Real) -> BarBounds:
    """Evaluate the bar bounds and pick the extremal ones by the branch tables."""
    th = thresholds(kappa0, b)
    k, nu_f, b_f = float(kappa0), float(nu), float(b)
    a2, a3, a4, b2, b3, b4 = bar_bounds_raw(k, nu_f, b_f)
    ia = _select_branch(nu_f, th.r_minus, th.r_plus, th.s_minus, th.s_plus)
    ib = _select_branch(nu_f, th.rt_minus, th.rt_plus, th.st_minus, th.st_plus)
    a_vals = {2: a2, 3: a3, 4: a4}
    b_vals = {2: b2, 3: b3, 4: b4}
    return BarBounds(
        a2=a2, a3=a3, a4=a4, b2=b2, b3=b3, b4=b4,
        min_a=a_vals[ia], max_b=b_vals[ib],
        min_branch=f"A{ia}", max_branch=f"B{ib}",
    )


@dataclass(frozen=True)
class AlphaWindow:
    lo: float
    hi: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, alpha: float) -> bool:
        return self.lo <= alpha <= self.hi


def alpha_window(v0: Real, p: PhysParams) -> AlphaWindow | None:
    """The closed interval ``[max_B, min_A]``; ``None`` when it is empty."""
    ks = kappa_scales(v0)
    bb = bar_bounds(ks.kappa0, p.nu, p.b)
    if bb.max_b <= bb.min_a:
        return AlphaWindow(bb.max_b, bb.min_a)
    return None


# --- uniform dispersion-like set -------------------------------------------


def uniform_margins(nu, b, b0):
    """Margins of the three quadratic conditions, each read as ``>= 0``.

    The first condition is used in the form
    ``3 b0 nu (3 nu - 2) <= (12 (b - b0) - 1) b``.
    """
    quad = nu * (3 * nu - 2)
    r1 = (12 * (b - b0) - 1) * b - 3 * b0 * quad
    r2 = 4 * (10 * b - 2 * (3 * b0 + 1) - (9 * b0 - 2) * nu) * b - 15 * b0 * quad
    r3 = 4 * (30 * b - 2 * (18 * b0 + 1) + 3 * (9 * b0 - 2) * nu) * b - 45 * b0 * quad
    return r1, r2, r3


def r1_margin_literal(nu, b, b0):
    """The first condition with the factor ``3 b0 nu - 2`` in place of ``3 nu - 2``.

    Kept for comparison only; this reading admits points whose alpha window is
    empty.
    """
    return (12 * (b - b0) - 1) * b - 3 * b0 * nu * (3 * b0 * nu - 2)


def in_R_sharp(v0: Real, p: PhysParams) -> bool:
    """``b >= b0`` together with the three quadratic conditions."""
    b0 = kappa_scales(v0).b0
    if not p.b >= b0:
        return False
    return all(m >= 0 for m in uniform_margins(p.nu, p.b, b0))


# --- exterior conditions -------------------------------------------------


@dataclass(frozen=True)
class ExteriorConditions:
    ellipse: bool
    hyperbola: bool
    sigma_min: float
    sigma_terms: tuple[float, float, float, float]


def _sigma_terms(a, b, c):
    t2 = (15 * b - 2) / (3 * _sqrt((2 * b - a) * (2 * b - c)))
    t3 = (12 * b * b - 2 * b + 9 * a * c) / (3 * b * _sqrt((b - 2 * a) * (b - 2 * c)))
    t4 = 3 * _sqrt(a * c) / b
    return t2, t3, t4


def _ellipse_margin(a, b, c):
    return 9 * a * c - (153 * b * b - 54 * b + 4)


def _hyperbola_margin(a, b, c):
    # boundary of 3 sqrt(ac)/b >= third coercivity term, after squaring
    root = _sqrt(48 * (6 * b - 1) ** 2 + (21 * b - 2) ** 2)
    return 54 * a * c - b * (root - 21 * b + 2)


def exterior_conditions(p: PhysParams) -> ExteriorConditions:
    """Ellipse and hyperbola tests plus the minimal coercivity speed."""
    a, b, c = p.a, p.b, p.c
    t2, t3, t4 = (float(t) for t in _sigma_terms(a, b, c))
    return ExteriorConditions(
        ellipse=bool(_ellipse_margin(a, b, c) >= 0),
        hyperbola=bool(_hyperbola_margin(a, b, c) >= 0),
        sigma_min=max(1.0, t2, t3, t4),
        sigma_terms=(1.0, t2, t3, t4),
    )


def sigma_min_nu_b(nu: float, b: float) -> tuple[float, float, float, float]:
    """The four coercivity terms written in the ``(nu, b)`` chart."""
    q = -3 * nu * nu + 2 * nu
    t2 = 2 * (15 * b - 2) / (math.sqrt(3) * math.sqrt(q + 108 * b * b - 12 * b))
    t3 = (-9 * nu * nu + 6 * nu + 84 * b * b - 20 * b) / (
        4 * math.sqrt(3) * b * math.sqrt(q + 27 * b * b - 6 * b)
    )
    t4 = math.sqrt(3) * math.sqrt(q + 12 * b * b - 4 * b) / (2 * b)
    return 1.0, t2, t3, t4


def ellipse_nu_b(nu: float, b: float) -> float:
    """Left side of the ellipse in standard form; points inside give ``<= 1``."""
    return (144 / 49) * (nu - 1 / 3) ** 2 + (9216 / 49) * (b - 17 / 96) ** 2


def hyperbola_nu_b(nu: float, b: float) -> bool:
    """Hyperbola-type condition in the ``(nu, b)`` chart (stated for ``b >= 1/4``)."""
    rhs = (2 * b / 9) * (20 - 75 * b + math.sqrt(2169 * b * b - 660 * b + 52))
    return -3 * nu * nu + 2 * nu >= rhs


def sigma_ac(b: Real) -> float:
    """Minimal exterior speed on the symmetric line ``a = c = 1/6 - b``."""
    if not b > ONE_SIXTH:
        raise BTooSmall(f"b = {b} must exceed 1/6")
    b = float(b)
    if b <= CRITICAL_B_AC:
        return 1.0
    return 2 * (b - 1 / 6) * (b - 1 / 8) / (b * (b - 1 / 12))


def obstruction_holds(p: PhysParams) -> bool:
    """Both ``2ab + 3ac >= b^2`` and ``2bc + 3ac >= b^2`` (never true on valid params)."""
    a, b, c = p.a, p.b, p.c
    return 2 * a * b + 3 * a * c >= b * b and 2 * b * c + 3 * a * c >= b * b


# --- classification -------------------------------------------------------

LABELS = (
    "ExteriorOnly_b_le_3_16",
    "ExteriorPlusOrigin_b_le_2_9",
    "ConeBand_b_le_crit",
    "ConeBand_sigma_b",
    "NotClassified",
)


@dataclass(frozen=True)
class DecayScenario:
    """Predicted decay regions for one parameter set.

    ``v_max`` bounds the window speeds ``|v|`` with interior decay and
    ``sigma`` is the exterior frame speed (admissible speeds are strictly
    larger).  The boolean fields record the individual predicates.
    """

    label: str
    v_max: float | None
    sigma: float | None
    dispersion_like: bool
    refined: bool
    uniform: bool | None = None
    exterior: ExteriorConditions | None = None

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "v_max": self.v_max,
            "sigma": self.sigma,
            "dispersion_like": self.dispersion_like,
            "refined": self.refined,
            "uniform": self.uniform,
        }
        if self.exterior is not None:
            out["exterior"] = {
                "ellipse": self.exterior.ellipse,
                "hyperbola": self.exterior.hyperbola,
                "sigma_min": self.exterior.sigma_min,
            }
        return out


def classify(p: PhysParams, v0: Real | None = None) -> DecayScenario:
    """Label the decay scenario; the symmetric line gets the four-way split."""
    disp = is_dispersion_like(p)
    refined = is_refined_dispersion_like(p)
    uniform = in_R_sharp(v0, p) if v0 is not None else None
    ext = exterior_conditions(p)
    if p.a == p.c:
        b = p.b
        if b <= _THREE_SIXTEENTHS:
            label, v_max = LABELS[0], None
        elif b <= _TWO_NINTHS:
            label, v_max = LABELS[1], None
        else:
            label = LABELS[2] if b <= CRITICAL_B_AC else LABELS[3]
            v_max = 1 - 2 / (9 * float(b))
        return DecayScenario(label, v_max, sigma_ac(b), disp, refined, uniform, ext)
    return DecayScenario(LABELS[4], None, ext.sigma_min, disp, refined, uniform, ext)


# --- vectorized margins and the raster ----------------------------------------


def _dispersion_margin(a, b, c):
    at, ct = a / b, c / b
    return 8 * at * ct - 3 * (at + ct) - 2


def _refined_branch_margin(lo, hi):
    return np.select(
        [lo < REFINED_BREAKPOINT, lo < -1 / 3, lo < -1 / 9],
        [45 * hi * lo - (1 - hi), 18 * hi * lo + hi + lo, 27 * hi * lo - 6 * hi - 1],
        default=-1.0,
    )


def _refined_margin(a, b, c):
    at, ct = np.broadcast_arrays(np.asarray(a / b, float), np.asarray(c / b, float))
    lower = np.where(ct <= at, _refined_branch_margin(ct, at), -np.inf)
    upper = np.where(at <= ct, _refined_branch_margin(at, ct), -np.inf)
    return np.maximum(_dispersion_margin(a, b, c), np.maximum(lower, upper))


def _obstruction_margin(a, b, c):
    return np.minimum(2 * a * b + 3 * a * c - b * b, 2 * b * c + 3 * a * c - b * b)


def _admissible_margin(a, b, c):
    nu = 2 * (c + b)
    return np.minimum.reduce(
        [np.broadcast_to(np.asarray(m, float), np.broadcast(a, b, c).shape)
         for m in (b - 1 / 6, -a, -c, nu, 1 - nu)]
    )


def _uniform_margin_factory(v0: float) -> Callable:
    b0 = kappa_scales(v0).b0

    def margin(a, b, c):
        nu = 2 * (c + b)
        r1, r2, r3 = uniform_margins(nu, b, b0)
        return np.minimum.reduce([b - b0 + 0 * nu, r1, r2, r3])

    return margin


#: name -> (margin function of (a, b, c), strict?)
PREDICATES: dict[str, tuple[Callable, bool]] = {
    "admissible": (_admissible_margin, True),
    "dispersion_like": (_dispersion_margin, True),
    "refined": (_refined_margin, True),
    "ellipse": (_ellipse_margin, False),
    "hyperbola": (_hyperbola_margin, False),
    "obstruction": (_obstruction_margin, False),
    "uniform": (None, False),  # needs v0
}


def predicate_margin(name: str, a, b, c, v0: float | None = None):
    """Vectorized margin of a named predicate."""
    if name not in PREDICATES:
        raise BadRange(f"unknown predicate {name!r}; choose from {sorted(PREDICATES)}")
    if name == "uniform":
        if v0 is None:
            raise BadRange("predicate 'uniform' needs v0")
        fn = _uniform_margin_factory(v0)
    else:
        fn = PREDICATES[name][0]
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    return np.asarray(fn(a, b, c), dtype=float)


def near_boundary(name: str, p: PhysParams, tol: float = 1e-9, v0: float | None = None) -> bool:
    """Whether ``p`` lies within ``tol`` of the zero set of the predicate's margin."""
    g = predicate_margin(name, float(p.a), float(p.b), float(p.c), v0=v0)
    return bool(abs(float(g)) <= tol)


_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3")


@dataclass
class RegionMap:
    """Labeled raster over a rectangle of one of two parameter planes.

    ``values[name]`` and ``boundary[name]`` are boolean arrays of shape
    ``(ny, nx)``; row ``j`` corresponds to ``y[j]`` and column ``i`` to ``x[i]``.
    """

    axes: str
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    x: np.ndarray
    y: np.ndarray
    values: dict[str, np.ndarray] = field(default_factory=dict)
    boundary: dict[str, np.ndarray] = field(default_factory=dict)
    b_fixed: float | None = None
    v0: float | None = None

    @property
    def predicates(self) -> list[str]:
        return list(self.values)

    @property
    def axis_names(self) -> tuple[str, str]:
        return ("nu", "b") if self.axes == "nu-b" else ("a", "c")

    def write_csv(self, fh: TextIO) -> None:
        fh.write("x,y,predicate,value,boundary\n")
        for name in self.values:
            vals, bnd = self.values[name], self.boundary[name]
            for j, yv in enumerate(self.y):
                ys = f"{yv:.12g}"
                for i, xv in enumerate(self.x):
                    fh.write(f"{xv:.12g},{ys},{name},{int(vals[j, i])},{int(bnd[j, i])}\n")

    def to_svg(self, cell: int = 2) -> str:
        ny, nx = len(self.y), len(self.x)
        w, h = nx * cell, ny * cell
        xn, yn = self.axis_names
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 60}" height="{h + 40}" '
            f'viewBox="-50 -10 {w + 60} {h + 40}">',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#000000"/>',
        ]
        for k, name in enumerate(self.values):
            colour = _PALETTE[k % len(_PALETTE)]
            parts.append(f'<g id="{name}" fill="{colour}" fill-opacity="0.45">')
            parts.extend(_row_runs(self.values[name], cell, h))
            parts.append("</g>")
            parts.append(f'<g id="{name}-boundary" fill="#000000">')
            parts.extend(_row_runs(self.boundary[name], cell, h))
            parts.append("</g>")
        parts.append(
            f'<text x="{w / 2}" y="{h + 25}" font-size="12" text-anchor="middle">'
            f"{xn} [{self.x_range[0]:.6g}, {self.x_range[1]:.6g}]</text>"
        )
        parts.append(
            f'<text x="-40" y="{h / 2}" font-size="12">{yn}</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _row_runs(mask: np.ndarray, cell: int, height: int) -> Iterable[str]:
    """Run-length encode each row of ``mask`` into rectangles (y axis up)."""
    ny, nx = mask.shape
    for j in range(ny):
        row = mask[j]
        if not row.any():
            continue
        padded = np.concatenate(([False], row, [False]))
        edges = np.flatnonzero(padded[1:] != padded[:-1])
        y = height - (j + 1) * cell
        for start, stop in zip(edges[::2], edges[1::2]):
            yield (
                f'<rect x="{start * cell}" y="{y}" width="{(stop - start) * cell}" '
                f'height="{cell}"/>'
            )


def _cell_centres(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _neighbour_change(mask: np.ndarray) -> np.ndarray:
    """Cells with a 4-neighbour carrying the opposite label."""
    out = np.zeros_like(mask)
    dx = mask[:, 1:] != mask[:, :-1]
    dy = mask[1:, :] != mask[:-1, :]
    out[:, 1:] |= dx
    out[:, :-1] |= dx
    out[1:, :] |= dy
    out[:-1, :] |= dy
    return out


def rasterize(
    predicates: Sequence[str],
    axes: str = "nu-b",
    x_range: tuple[float, float] | None = None,
    y_range: tuple[float, float] | None = None,
    resolution: tuple[int, int] = (400, 400),
    b_fixed: float | None = None,
    v0: float | None = None,
) -> RegionMap:
    """Evaluate predicates on a grid of cell centres.

    ``axes="nu-b"`` spans the ``(nu, b)`` chart and intersects every predicate
    with the admissible region.  ``axes="a-c"`` spans the ``(a, c)`` plane at
    ``b = b_fixed``; there the admissible set is the segment
    ``a + c = 1/3 - 2b``, drawn by the ``admissible`` predicate with a
    half-cell tolerance, and the other predicates are evaluated off it as
    plain inequalities in ``(a, b, c)``.

    Cells whose label differs from a neighbour are flagged as boundary cells
    and labeled by the non-strict version of the inequality.
    """
    predicates = list(predicates)
    if not predicates:
        raise BadRange("predicate set is empty")
    for name in predicates:
        if name not in PREDICATES:
            raise BadRange(f"unknown predicate {name!r}")
    if "uniform" in predicates and v0 is None:
        raise BadRange("predicate 'uniform' needs v0")
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise BadRange(f"resolution must be at least 2 per axis, got {resolution}")

    if axes == "nu-b":
        x_range = x_range or (0.0, 1.0)
        y_range = y_range or (1 / 6, 0.5)
    elif axes == "a-c":
        if b_fixed is None or not b_fixed > 1 / 6:
            raise BadRange("a-c axes need a fixed b > 1/6")
        x_range = x_range or (-1.5 * b_fixed, 0.0)
        y_range = y_range or (-1.5 * b_fixed, 0.0)
    else:
        raise BadRange(f"axes must be 'nu-b' or 'a-c', got {axes!r}")
    for lo, hi in (x_range, y_range):
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise BadRange(f"degenerate range ({lo}, {hi})")

    x = _cell_centres(*x_range, nx)
    y = _cell_centres(*y_range, ny)
    X, Y = np.meshgrid(x, y)
    if axes == "nu-b":
        nu, b = X, Y
        a = -nu / 2 + 1 / 3 - b
        c = nu / 2 - b
        with np.errstate(invalid="ignore", divide="ignore"):
            admissible = _admissible_margin(a, b, c)
    else:
        a, c = X, Y
        b = np.full_like(a, float(b_fixed))
        half_diag = 0.5 * math.hypot((x_range[1] - x_range[0]) / nx, (y_range[1] - y_range[0]) / ny)
        with np.errstate(invalid="ignore"):
            on_line = half_diag - np.abs(a + c - (1 / 3 - 2 * b))
            admissible = np.minimum(on_line, _admissible_margin(a, b, c))

    rmap = RegionMap(axes, tuple(x_range), tuple(y_range), x, y, b_fixed=b_fixed, v0=v0)
    for name in predicates:
        strict = PREDICATES[name][1]
        if name == "admissible":
            g = admissible
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                g = predicate_margin(name, a, b, c, v0=v0)
            g = np.where(np.isnan(g), -np.inf, g)
            if axes == "nu-b":
                g = np.where(admissible > 0, g, np.minimum(g, admissible))
            else:
                g = np.where((a < 0) & (c < 0), g, -np.inf)
        nonstrict = g >= 0
        value = (g > 0) if strict else nonstrict
        boundary = _neighbour_change(nonstrict) | _neighbour_change(value)
        rmap.values[name] = np.where(boundary, nonstrict, value)
        rmap.boundary[name] = boundary
    return rmap


def boundary_on_ac_line(
    predicate: Callable[[PhysParams], bool], lo: float, hi: float, tol: float = 1e-10
) -> float:
    """Bisection for the flip of a predicate along ``a = c = 1/6 - b``.

    ``predicate`` must be false at ``lo`` and true at ``hi``.
    """
    from .params_core import a_equals_c_line

    if predicate(a_equals_c_line(lo)) or not predicate(a_equals_c_line(hi)):
        raise BadRange("predicate must be false at lo and true at hi")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(a_equals_c_line(mid)):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
