"""Parametric open arcs, arc families, and the pairwise parameter lift.

An arc is parametrized over t in [-1, 1] as

    r(y, t) = c + rho (cos(phi), sin(phi)) t + sum_n y_n r_n(t)

with a segment part (center c, half-length rho, orientation phi) and a
perturbation expansion in a fixed basis of vector-valued functions r_n.
The module also provides the generalized single-arc parametrization used
for snapshot generation (position and segment shape folded into the
parameter vector) and the 2s+6-dimensional lifted parameter describing a
pair of arcs up to translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PerturbationBasis",
    "trig_basis",
    "cheb_table_basis",
    "SegmentMeta",
    "GlobalGeometry",
    "ArcFamily",
    "ArcInstance",
    "ArcEvaluator",
    "bound_arc",
    "generalized_arc",
    "LiftedParam",
    "lift_pair",
    "lift_self",
    "eval_arc",
    "eval_arc_derivative",
    "eval_h1",
    "eval_h2",
    "rotation",
    "validate_family",
    "ValidationReport",
    "ring_segments",
    "grid_segments",
    "sample_arcs",
]


# ---------------------------------------------------------------------------
# Perturbation bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationBasis:
    """Basis of vector-valued perturbation functions r_n : [-1,1] -> R^2.

    Each entry of `functions` maps an array of t-values (shape (...,)) to
    an array of shape (..., 2).  `derivatives` are the exact t-derivatives.
    `decay_norms` holds the sup-norm bounds b_n used by family validation.
    """

    functions: tuple
    derivatives: tuple
    decay_norms: np.ndarray
    label: str = "custom"
    tail_index: int | None = None

    def __post_init__(self):
        if len(self.functions) != len(self.derivatives):
            raise ValueError("functions and derivatives must have equal length")
        if len(self.decay_norms) != len(self.functions):
            raise ValueError("one decay norm per basis function required")
        if np.any(np.asarray(self.decay_norms) <= 0):
            raise ValueError("decay norms must be positive")

    @property
    def size(self) -> int:
        return len(self.functions)

    def eval_sum(self, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Perturbation sum_n y_n r_n(t) at points t (shape t.shape + (2,))."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (2,))
        for yn, fn in zip(y, self.functions):
            if yn != 0.0:
                out += yn * fn(t)
        return out

    def eval_sum_derivative(self, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (2,))
        for yn, fn in zip(y, self.derivatives):
            if yn != 0.0:
                out += yn * fn(t)
        return out


def _unit_component(vals: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros(vals.shape + (2,))
    out[..., p] = vals
    return out


def trig_basis(n_modes: int = 3, decay_exponent: float = 2.5,
                  amplitude: float = 1.0) -> PerturbationBasis:
    """Trigonometric perturbation basis of the 16-arc benchmark family.

    For p in {1, 2} (component) and n in 1..n_modes, with
    c_n = amplitude * n**(-decay_exponent), the basis contains
    c_n sin(n t) e_p  (index 6(p-1)+2n-1, 1-based) and
    c_n cos((n-1) t) e_p  (index 6(p-1)+2n).  Size s = 4 * n_modes.
    """
    funcs: list = []
    derivs: list = []
    norms: list = []
    block = 2 * n_modes
    for p in range(2):
        for n in range(1, n_modes + 1):
            c_n = amplitude * float(n) ** (-decay_exponent)

            def f_sin(t, n=n, c=c_n, p=p):
                return _unit_component(c * np.sin(n * np.asarray(t, dtype=float)), p)

            def df_sin(t, n=n, c=c_n, p=p):
                return _unit_component(c * n * np.cos(n * np.asarray(t, dtype=float)), p)

            def f_cos(t, n=n, c=c_n, p=p):
                return _unit_component(c * np.cos((n - 1) * np.asarray(t, dtype=float)), p)

            def df_cos(t, n=n, c=c_n, p=p):
                return _unit_component(-c * (n - 1) * np.sin((n - 1) * np.asarray(t, dtype=float)), p)

            funcs.extend([f_sin, f_cos])
            derivs.extend([df_sin, df_cos])
            sup_sin = c_n * (1.0 if n >= 2 else np.sin(1.0))
            norms.extend([sup_sin, c_n])
    del block
    return PerturbationBasis(
        functions=tuple(funcs),
        derivatives=tuple(derivs),
        decay_norms=np.array(norms),
        label="trig",
        tail_index=2 * n_modes + 2,
    )


def _cheb_derivative_coeffs(a: np.ndarray) -> np.ndarray:
    """Coefficients of the derivative of a classical Chebyshev series."""
    n = len(a) - 1
    if n == 0:
        return np.zeros(1)
    b = np.zeros(n)
    b_full = np.zeros(n + 2)
    for k in range(n - 1, -1, -1):
        b_full[k] = b_full[k + 2] + 2.0 * (k + 1) * a[k + 1]
    b[:] = b_full[:n]
    b[0] *= 0.5
    return b


def cheb_table_basis(tables) -> PerturbationBasis:
    """Perturbation basis from tabulated Chebyshev coefficient pairs.

    `tables` is a sequence of (deg+1, 2) arrays: per function, the
    classical Chebyshev coefficients of the two components.  Derivatives
    use the exact Chebyshev recurrence.
    """
    from .spectral import cheb_eval

    funcs: list = []
    derivs: list = []
    norms: list = []
    grid = np.linspace(-1.0, 1.0, 2048)
    for tab in tables:
        tab = np.asarray(tab, dtype=float)
        if tab.ndim != 2 or tab.shape[1] != 2:
            raise ValueError("each table must have shape (deg+1, 2)")
        dtab = np.stack(
            [_cheb_derivative_coeffs(tab[:, 0]), _cheb_derivative_coeffs(tab[:, 1])],
            axis=1,
        )

        def f(t, tab=tab):
            t = np.asarray(t, dtype=float)
            return np.stack([cheb_eval(tab[:, 0], t), cheb_eval(tab[:, 1], t)], axis=-1)

        def df(t, dtab=dtab):
            t = np.asarray(t, dtype=float)
            return np.stack([cheb_eval(dtab[:, 0], t), cheb_eval(dtab[:, 1], t)], axis=-1)

        funcs.append(f)
        derivs.append(df)
        norms.append(float(np.linalg.norm(f(grid), axis=-1).max()))
    return PerturbationBasis(
        functions=tuple(funcs),
        derivatives=tuple(derivs),
        decay_norms=np.array(norms),
        label="cheb_table",
    )


# ---------------------------------------------------------------------------
# Core geometric types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentMeta:
    """Unperturbed segment data: center, half-length, orientation in [0, pi)."""

    center: np.ndarray
    half_length: float
    orientation: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.center.shape != (2,):
            raise ValueError("center must be a 2-vector")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if not (0.0 <= self.orientation < np.pi):
            raise ValueError("orientation must lie in [0, pi)")


@dataclass(frozen=True)
class GlobalGeometry:
    """Family-level geometry bounds."""

    box_half_width: float
    r_min: float
    r_max: float
    d_min: float
    d_max: float
    s: int

    def __post_init__(self):
        if self.box_half_width <= 0:
            raise ValueError("box_half_width must be positive")
        if not (0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if not (0 < self.d_min < self.d_max):
            raise ValueError("need 0 < d_min < d_max")
        if self.s < 0:
            raise ValueError("s must be non-negative")


@dataclass(frozen=True)
class ArcFamily:
    """A parametric arc family: geometry bounds plus perturbation basis."""

    geom: GlobalGeometry
    basis: PerturbationBasis

    def __post_init__(self):
        if self.basis.size != self.geom.s:
            raise ValueError("basis size must equal the truncation dimension s")


@dataclass(frozen=True)
class ArcInstance:
    """One arc of a family: segment data plus perturbation parameters."""

    segment: SegmentMeta
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if np.any(np.abs(self.y) > 0.5 + 1e-12):
            raise ValueError("perturbation parameters must lie in [-1/2, 1/2]")


# ---------------------------------------------------------------------------
# Affine parameter maps
# ---------------------------------------------------------------------------


def rho_map(z, geom: GlobalGeometry):
    return (geom.r_max - geom.r_min) * (np.asarray(z) + 0.5) + geom.r_min


def rho_inv(rho, geom: GlobalGeometry):
    return (np.asarray(rho) - geom.r_min) / (geom.r_max - geom.r_min) - 0.5


def phi_map(z):
    return np.pi * (np.asarray(z) + 0.5)


def phi_inv(phi):
    return np.asarray(phi) / np.pi - 0.5


def d_map(z, geom: GlobalGeometry):
    return (geom.d_max - geom.d_min) * (np.asarray(z) + 0.5) + geom.d_min


def d_inv(d, geom: GlobalGeometry):
    return (np.asarray(d) - geom.d_min) / (geom.d_max - geom.d_min) - 0.5


def rotation(theta: float) -> np.ndarray:
    """Counterclockwise rotation matrix for angle theta."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# Arc evaluation
# ---------------------------------------------------------------------------


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < -1.0 - 1e-14) or np.any(t > 1.0 + 1e-14):
        raise ValueError("parameter t must lie in [-1, 1]")
    return t


def eval_arc(arc: ArcInstance, basis: PerturbationBasis, t) -> np.ndarray:
    """Arc point r(y, t); vectorized over t, returns shape t.shape + (2,)."""
    t = _check_t(t)
    seg = arc.segment
    direction = np.array([np.cos(seg.orientation), np.sin(seg.orientation)])
    return (
        seg.center
        + seg.half_length * np.multiply.outer(t, direction)
        + basis.eval_sum(arc.y, t)
    )


def eval_arc_derivative(arc: ArcInstance, basis: PerturbationBasis, t) -> np.ndarray:
    """Arc tangent r'(y, t); vectorized over t."""
    t = _check_t(t)
    seg = arc.segment
    direction = np.array([np.cos(seg.orientation), np.sin(seg.orientation)])
    return (
        seg.half_length * np.multiply.outer(np.ones_like(t), direction)
        + basis.eval_sum_derivative(arc.y, t)
    )


@dataclass(frozen=True)
class ArcEvaluator:
    """A concrete arc as point/tangent callables plus its center."""

    point: object
    tangent: object
    center: np.ndarray


def bound_arc(arc: ArcInstance, basis: PerturbationBasis) -> ArcEvaluator:
    """Bind an ArcInstance to its basis as an evaluator."""
    return ArcEvaluator(
        point=lambda t: eval_arc(arc, basis, t),
        tangent=lambda t: eval_arc_derivative(arc, basis, t),
        center=np.asarray(arc.segment.center, dtype=float),
    )


def generalized_arc(y: np.ndarray, geom: GlobalGeometry,
                    basis: PerturbationBasis) -> ArcEvaluator:
    """Generalized single-arc parametrization used for snapshots.

    p(y, t) = 2B (y_1, y_2) + rho(y_3) (cos phi(y_4), sin phi(y_4)) t
              + sum_n y_{n+4} r_n(t),  y in [-1/2, 1/2]^(s+4).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (geom.s + 4,):
        raise ValueError(f"expected parameter vector of length {geom.s + 4}")
    center = 2.0 * geom.box_half_width * y[:2]
    seg = SegmentMeta(
        center=center,
        half_length=float(rho_map(y[2], geom)),
        orientation=float(phi_map(y[3])) % np.pi,
    )
    arc = ArcInstance(segment=seg, y=y[4:])
    return bound_arc(arc, basis)


# ---------------------------------------------------------------------------
# Lifted pair parametrization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftedParam:
    """Translation-reduced parameters of an arc pair, in [-1/2,1/2]^(2s+6)."""

    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        if np.any(np.abs(self.z) > 0.5 + 1e-9):
            raise ValueError("lifted components must lie in [-1/2, 1/2]")


def lift_pair(arc_k: ArcInstance, arc_j: ArcInstance,
              geom: GlobalGeometry) -> LiftedParam:
    """Lifted parameter z^{k,j} of an ordered arc pair.

    Components (1-based): 1-2 rho/phi of arc k; 3..s+2 its y; s+3 the
    center distance through the d-map; s+4 the center-offset angle reduced
    modulo pi through the phi-map; s+5, s+6 rho/phi of arc j; the rest its
    y.  The modulo-pi reduction means the lift reconstructs the pair up to
    a possible reflection of the offset; assembly code must orient pairs
    so that arg(c_j - c_k) lies in [0, pi) (see `canonical_pair_order`).
    """
    s = geom.s
    offset = arc_j.segment.center - arc_k.segment.center
    dist = float(np.linalg.norm(offset))
    if not (geom.d_min - 1e-9 <= dist <= geom.d_max + 1e-9):
        raise ValueError(
            f"center distance {dist:.6g} outside family range "
            f"[{geom.d_min}, {geom.d_max}]"
        )
    theta = float(np.arctan2(offset[1], offset[0]))
    if theta < 0.0:
        theta += np.pi
    if theta >= np.pi:  # arctan2 just below pi can round up to pi exactly
        theta = np.nextafter(np.pi, 0.0)
    z = np.empty(2 * s + 6)
    z[0] = rho_inv(arc_k.segment.half_length, geom)
    z[1] = phi_inv(arc_k.segment.orientation)
    z[2:s + 2] = arc_k.y
    z[s + 2] = d_inv(dist, geom)
    z[s + 3] = phi_inv(theta)
    z[s + 4] = rho_inv(arc_j.segment.half_length, geom)
    z[s + 5] = phi_inv(arc_j.segment.orientation)
    z[s + 6:] = arc_j.y
    return LiftedParam(z=z)


def canonical_pair_order(arc_k: ArcInstance, arc_j: ArcInstance) -> bool:
    """True when arg(c_j - c_k) in [0, pi), i.e. lift_pair(k, j) reproduces
    the true offset direction."""
    off = arc_j.segment.center - arc_k.segment.center
    return off[1] > 0 or (off[1] == 0 and off[0] > 0)


def lift_self(arc: ArcInstance, geom: GlobalGeometry) -> np.ndarray:
    """Translation-reduced parameters of a single arc, length s+2."""
    z = np.empty(geom.s + 2)
    z[0] = rho_inv(arc.segment.half_length, geom)
    z[1] = phi_inv(arc.segment.orientation)
    z[2:] = arc.y
    return z


def _h_arc(rho_z, phi_z, y, basis, offset=None) -> ArcEvaluator:
    direction = np.array([np.cos(phi_z), np.sin(phi_z)])
    shift = np.zeros(2) if offset is None else offset

    def point(t, rho_z=rho_z, direction=direction, y=y, shift=shift):
        t = _check_t(t)
        return shift + rho_z * np.multiply.outer(t, direction) + basis.eval_sum(y, t)

    def tangent(t, rho_z=rho_z, direction=direction, y=y):
        t = _check_t(t)
        return rho_z * np.multiply.outer(np.ones_like(t), direction) + \
            basis.eval_sum_derivative(y, t)

    return ArcEvaluator(point=point, tangent=tangent, center=shift)


def eval_h1(z: LiftedParam, geom: GlobalGeometry,
            basis: PerturbationBasis) -> ArcEvaluator:
    """First arc of a lifted pair, centered at the origin."""
    s = geom.s
    zz = z.z
    return _h_arc(float(rho_map(zz[0], geom)), float(phi_map(zz[1])),
                  zz[2:s + 2], basis)


def eval_h2(z: LiftedParam, geom: GlobalGeometry,
            basis: PerturbationBasis) -> ArcEvaluator:
    """Second arc of a lifted pair, translated by d(z) e_phi(z)."""
    s = geom.s
    zz = z.z
    dist = float(d_map(zz[s + 2], geom))
    ang = float(phi_map(zz[s + 3]))
    offset = dist * np.array([np.cos(ang), np.sin(ang)])
    return _h_arc(float(rho_map(zz[s + 4], geom)), float(phi_map(zz[s + 5])),
                  zz[s + 6:], basis, offset=offset)


def self_arc_from_params(z_self: np.ndarray, geom: GlobalGeometry,
                         basis: PerturbationBasis) -> ArcEvaluator:
    """Arc evaluator from translation-reduced single-arc parameters."""
    z_self = np.asarray(z_self, dtype=float)
    if z_self.shape != (geom.s + 2,):
        raise ValueError(f"expected {geom.s + 2} self parameters")
    return _h_arc(float(rho_map(z_self[0], geom)), float(phi_map(z_self[1])),
                  z_self[2:], basis)


# ---------------------------------------------------------------------------
# Family validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    """Per-constraint results of family validation."""

    checks: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, detail: str):
        self.checks[name] = (bool(ok), detail)

    @property
    def passed(self) -> bool:
        required = ["summability", "derivative_bound", "center_distances"]
        ok = all(self.checks[k][0] for k in required if k in self.checks)
        dis = self.checks.get("disjointness_inequality", (True, ""))[0] or \
            self.checks.get("disjointness_sampled", (False, ""))[0]
        return ok and dis

    def __str__(self) -> str:
        lines = []
        for name, (ok, detail) in self.checks.items():
            lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _arc_reach(segment: SegmentMeta, basis: PerturbationBasis,
               y_draws: np.ndarray, grid: np.ndarray) -> float:
    """Max distance from the segment center over t-grid and y draws."""
    reach = 0.0
    for y in y_draws:
        arc = ArcInstance(segment=segment, y=y)
        pts = eval_arc(arc, basis, grid)
        reach = max(reach, float(np.linalg.norm(pts - segment.center, axis=-1).max()))
    return reach


def validate_family(geom: GlobalGeometry, basis: PerturbationBasis,
                    segments, n_grid: int = 2048, n_draws: int = 32,
                    tail_start: int | None = None, seed: int = 0) -> ValidationReport:
    """Check family constraints; returns a report, never raises.

    Checks: summability of the decay norms (finite, non-increasing tail),
    the derivative lower bound of the arcs on a dense t-grid over sampled
    parameter draws, pairwise center distances within [d_min, d_max], and
    arc disjointness.  Disjointness is certified either by the sufficient
    worst-case inequality d_min > 2 (r_max + sum_n sup|y_n| sup_t ||r_n||)
    or, failing that, by a direct sampled separation bound
    (center distance minus the two sampled arc reaches stays positive).
    """
    report = ValidationReport()
    grid = np.linspace(-1.0, 1.0, n_grid)
    b = np.asarray(basis.decay_norms, dtype=float)

    if tail_start is None:
        tail_start = basis.tail_index if basis.tail_index else len(b) // 2 + 2
    tail = b[tail_start - 1:]
    ok = np.all(np.isfinite(b)) and bool(np.all(np.diff(tail) <= 1e-12))
    report.record("summability", ok,
                  f"sum b_n = {b.sum():.4g}, tail non-increasing from index {tail_start}")

    rng = np.random.default_rng(seed)
    y_draws = rng.uniform(-0.5, 0.5, size=(n_draws, basis.size))
    y_draws[0] = 0.0

    segments = list(segments)
    min_tan = np.inf
    for seg in segments or [SegmentMeta(np.zeros(2), geom.r_min, 0.0)]:
        for y in y_draws:
            arc = ArcInstance(segment=seg, y=y)
            tan = eval_arc_derivative(arc, basis, grid)
            min_tan = min(min_tan, float(np.linalg.norm(tan, axis=-1).min()))
    report.record("derivative_bound", min_tan > 1e-10,
                  f"min ||r'(t)|| over grid/draws = {min_tan:.4g}")

    dist_ok = True
    detail = "fewer than two segments"
    if len(segments) >= 2:
        centers = np.array([s.center for s in segments])
        diff = centers[:, None, :] - centers[None, :, :]
        dists = np.linalg.norm(diff, axis=-1)
        iu = np.triu_indices(len(segments), k=1)
        dmin, dmax = dists[iu].min(), dists[iu].max()
        dist_ok = (dmin >= geom.d_min - 1e-9) and (dmax <= geom.d_max + 1e-9)
        detail = f"pairwise distances in [{dmin:.4g}, {dmax:.4g}] vs [{geom.d_min}, {geom.d_max}]"
    report.record("center_distances", dist_ok, detail)

    worst_pert = 0.5 * b.sum()
    margin = geom.d_min - 2.0 * (geom.r_max + worst_pert)
    report.record("disjointness_inequality", margin > 0,
                  f"d_min - 2(r_max + sum 0.5 b_n) = {margin:.4g}")

    if margin <= 0 and len(segments) >= 2:
        # Sufficient inequality is conservative; fall back to a direct
        # sampled separation bound.
        reaches = [_arc_reach(s, basis, y_draws, grid) for s in segments]
        sep = np.inf
        for i in range(len(segments)):
            for j in range(i + 1, len(segments)):
                gap = float(np.linalg.norm(segments[i].center - segments[j].center))
                sep = min(sep, gap - reaches[i] - reaches[j])
        report.record("disjointness_sampled", sep > 0,
                      f"min sampled separation = {sep:.4g}")
    return report


# ---------------------------------------------------------------------------
# Segment layouts and configuration sampling
# ---------------------------------------------------------------------------


def ring_segments(geom: GlobalGeometry, count: int = 16,
                  rng: np.random.Generator | None = None) -> list[SegmentMeta]:
    """Segment centers on two concentric rings (8 + 8 for count=16).

    The two-ring layout keeps all pairwise center distances inside
    [d_min, d_max] for the benchmark family bounds; segment half-lengths
    and orientations are sampled when an rng is given, else midpoints.
    """
    if count != 16:
        raise ValueError("ring layout is defined for 16 arcs")
    r1 = 1.32 * geom.d_min
    r2 = 0.4995 * geom.d_max
    centers = []
    for k in range(8):
        a = 2 * np.pi * k / 8
        centers.append(r1 * np.array([np.cos(a), np.sin(a)]))
    for k in range(8):
        a = 2 * np.pi * k / 8 + np.pi / 8
        centers.append(r2 * np.array([np.cos(a), np.sin(a)]))
    return _segments_from_centers(centers, geom, rng)


def grid_segments(geom: GlobalGeometry, side: int,
                  rng: np.random.Generator | None = None) -> list[SegmentMeta]:
    """side x side segment centers on a regular grid of spacing d_min."""
    span = geom.d_min * (side - 1)
    xs = -span / 2 + geom.d_min * np.arange(side)
    centers = [np.array([x, y]) for y in xs for x in xs]
    return _segments_from_centers(centers, geom, rng)


def _segments_from_centers(centers, geom, rng) -> list[SegmentMeta]:
    segs = []
    for c in centers:
        if rng is None:
            rho = 0.5 * (geom.r_min + geom.r_max)
            phi = np.pi / 2
        else:
            rho = float(rng.uniform(geom.r_min, geom.r_max))
            phi = float(rng.uniform(0.0, np.pi))
        segs.append(SegmentMeta(center=c, half_length=rho, orientation=phi))
    return segs


def sample_arcs(segments, family: ArcFamily,
                rng: np.random.Generator) -> list[ArcInstance]:
    """Draw perturbation parameters for each segment."""
    return [
        ArcInstance(segment=seg, y=rng.uniform(-0.5, 0.5, size=family.geom.s))
        for seg in segments
    ]
