//! Pre-symmetry sets, symmetry sets and medial axes of closed plane curves.
//!
//! Bitangent pairs `(u₁, u₂)` are the zeros of `(γ₁ − γ₂)·(T₁ − T₂)`. The
//! function vanishes to fourth order on the diagonal, so it is divided by
//! `(2 − 2cos(u₁ − u₂))²`. After that the diagonal is crossed by genuine
//! contours at vertices and by the parallel-tangent locus at inflexions.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::curve::{find_inflexions, find_vertices, CurveFeature, FeatureKind, SampledCurve, DEFAULT_PLATEAU_TOL};
use crate::error::{Error, Result};
use crate::geom::{point_set_diameter, segment_intersection, BBox, Vec2};
use crate::marching::{zero_contours, NodeGrid};

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_PARALLEL_TAU: f64 = 1e-3;
/// Width of the diagonal band, in grid cells.
pub const DEFAULT_DIAGONAL_BAND: f64 = 2.0;
/// Triple-crossing cluster radius as a fraction of the feature scale.
pub const DEFAULT_TRIPLE_RADIUS: f64 = 1e-3;
/// Centres farther than this many diameters are treated as at infinity.
pub const DEFAULT_UNBOUNDED_FACTOR: f64 = 50.0;
/// Relative slack in the medial test `radius ≤ distance to curve`.
pub const DEFAULT_MEDIAL_TOL: f64 = 1e-3;

pub const MIN_CURVE_SAMPLES: usize = 128;
pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentFlag {
    Genuine,
    ParallelTangent,
    NearDiagonal,
}

impl SegmentFlag {
    pub fn name(self) -> &'static str {
        match self {
            SegmentFlag::Genuine => "genuine",
            SegmentFlag::ParallelTangent => "parallel-tangent",
            SegmentFlag::NearDiagonal => "near-diagonal",
        }
    }
}

/// One zero contour on the parameter torus. `u` holds unwrapped parameter
/// pairs; segment `i` joins `u[i]` and `u[i + 1]` (and the last point to the
/// first when closed).
#[derive(Debug, Clone)]
pub struct PssContour {
    pub u: Vec<(f64, f64)>,
    pub flags: Vec<SegmentFlag>,
    pub closed: bool,
    pub period: f64,
}

impl PssContour {
    pub fn segment_count(&self) -> usize {
        self.flags.len()
    }

    pub fn segment(&self, i: usize) -> ((f64, f64), (f64, f64)) {
        let n = self.u.len();
        let a = self.u[i];
        let mut b = self.u[(i + 1) % n];
        if i + 1 == n {
            // closing segment of a loop that winds around the torus
            b = (a.0 + wrap_signed(b.0 - a.0, self.period), a.1 + wrap_signed(b.1 - a.1, self.period));
        }
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PssOptions {
    pub grid: usize,
    pub tau: f64,
    pub band_cells: f64,
}

impl Default for PssOptions {
    fn default() -> Self {
        PssOptions {
            grid: DEFAULT_GRID,
            tau: DEFAULT_PARALLEL_TAU,
            band_cells: DEFAULT_DIAGONAL_BAND,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreSymmetrySet {
    pub contours: Vec<PssContour>,
    pub grid_resolution: usize,
    /// Parameter period of the curve.
    pub period: f64,
    pub tau: f64,
    /// Half-width of the diagonal band in parameter units.
    pub band: f64,
}

/// `x` reduced to `(−p/2, p/2]`.
pub fn wrap_signed(x: f64, p: f64) -> f64 {
    let r = x.rem_euclid(p);
    if r > 0.5 * p {
        r - p
    } else {
        r
    }
}

/// Point and unit tangent at parameter `u`.
fn frame(c: &SampledCurve, u: f64) -> (Vec2, Vec2) {
    let x = c.index_of_param(u);
    (c.point_at_index(x), c.velocity_at_index(x).normalized())
}

fn scaled_presym(g1: Vec2, t1: Vec2, g2: Vec2, t2: Vec2, delta: f64) -> f64 {
    let d = 2.0 - 2.0 * delta.cos();
    (g1 - g2).dot(t1 - t2) / (d * d)
}

/// `(γ₁ − γ₂)·(T₁ − T₂) / (2 − 2cos(u₁ − u₂))²`, with the parameter
/// difference scaled to a `2π` period.
///
/// On the diagonal both numerator and denominator vanish; pairs closer than
/// [`MIN_DELTA`] are pushed apart symmetrically, which approximates the
/// limit `−κκ′/12` (arc length).
pub fn presym_function(c: &SampledCurve, u1: f64, u2: f64) -> f64 {
    let scale = std::f64::consts::TAU / c.period();
    let mut delta = scale * (u1 - u2);
    let (mut u1, mut u2) = (u1, u2);
    if delta.abs() < MIN_DELTA {
        let m = 0.5 * (u1 + u2);
        u1 = m + 0.5 * MIN_DELTA / scale;
        u2 = m - 0.5 * MIN_DELTA / scale;
        delta = MIN_DELTA;
    }
    let (g1, t1) = frame(c, u1);
    let (g2, t2) = frame(c, u2);
    scaled_presym(g1, t1, g2, t2, delta)
}

/// Smallest parameter gap (in a `2π` period) at which the scaled function
/// is evaluated directly.
pub const MIN_DELTA: f64 = 1e-4;

pub fn pre_symmetry_set(c: &SampledCurve, g: usize) -> Result<PreSymmetrySet> {
    pre_symmetry_set_with(c, &PssOptions { grid: g, ..PssOptions::default() })
}

/// Zero set of the scaled pre-symmetry function on a `G × G` torus grid.
///
/// Nodes sit at `u₁ = iP/G`, `u₂ = (j + ½)P/G`, so no node is on the
/// diagonal. Edge crossings are located by regula falsi on the interpolated
/// curve, not by linear interpolation of node values.
pub fn pre_symmetry_set_with(c: &SampledCurve, opts: &PssOptions) -> Result<PreSymmetrySet> {
    if !c.closed {
        return Err(Error::Config("pre-symmetry set needs a closed curve".into()));
    }
    if c.len() < MIN_CURVE_SAMPLES {
        return Err(Error::Config(format!(
            "pre-symmetry set needs at least {MIN_CURVE_SAMPLES} curve samples, got {}",
            c.len()
        )));
    }
    let n = opts.grid;
    if n < MIN_GRID {
        return Err(Error::Config(format!("grid resolution must be at least {MIN_GRID}, got {n}")));
    }
    let period = c.period();
    let p0 = c.params[0];
    let step = period / n as f64;
    let to_u = move |gx: f64, gy: f64| (p0 + gx * step, p0 + (gy + 0.5) * step);
    let rows: Vec<(Vec2, Vec2)> = (0..n).map(|i| frame(c, to_u(i as f64, 0.0).0)).collect();
    let cols: Vec<(Vec2, Vec2)> = (0..n).map(|j| frame(c, to_u(0.0, j as f64).1)).collect();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (g1, t1) = rows[i];
            let cols = &cols;
            (0..n).map(move |j| {
                let (g2, t2) = cols[j];
                let delta = std::f64::consts::TAU * (i as f64 - j as f64 - 0.5) / n as f64;
                scaled_presym(g1, t1, g2, t2, delta)
            })
        })
        .collect();
    let diam = c.diameter();
    let peak = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak <= 1e-8 * diam {
        return Err(Error::Degenerate(format!(
            "pre-symmetry function vanishes on the whole grid (max {peak:e}); the curve is a circle"
        )));
    }
    let grid = NodeGrid {
        nx: n,
        ny: n,
        wrap_x: true,
        wrap_y: true,
        values,
    };
    let eval = |gx: f64, gy: f64| {
        let (u1, u2) = to_u(gx, gy);
        presym_function(c, u1, u2)
    };
    let solver = |a: (f64, f64), b: (f64, f64), va: f64, vb: f64| -> f64 {
        regula_falsi(|f| eval(a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1)), va, vb)
    };
    let raw = zero_contours(&grid, &solver);
    let band = opts.band_cells * step;
    let contours = raw
        .into_iter()
        .filter(|g| g.points.len() >= 2)
        .map(|g| {
            let u: Vec<(f64, f64)> = g.points.iter().map(|&(x, y)| to_u(x, y)).collect();
            let tdiff: Vec<f64> = u
                .iter()
                .map(|&(u1, u2)| (frame(c, u1).1 - frame(c, u2).1).norm())
                .collect();
            let mut contour = PssContour {
                u,
                flags: Vec::new(),
                closed: g.closed,
                period,
            };
            let segs = if g.closed { contour.u.len() } else { contour.u.len() - 1 };
            contour.flags = (0..segs)
                .map(|s| {
                    let (a, b) = contour.segment(s);
                    let mid = wrap_signed(0.5 * ((a.1 - a.0) + (b.1 - b.0)), period);
                    if mid.abs() < band {
                        SegmentFlag::NearDiagonal
                    } else if tdiff[s].min(tdiff[(s + 1) % contour.u.len()]) < opts.tau {
                        SegmentFlag::ParallelTangent
                    } else {
                        SegmentFlag::Genuine
                    }
                })
                .collect();
            contour
        })
        .collect();
    Ok(PreSymmetrySet {
        contours,
        grid_resolution: n,
        period,
        tau: opts.tau,
        band,
    })
}

/// Root of `f` on `[0, 1]` given `f(0) = fa`, `f(1) = fb` of opposite signs
/// (Illinois variant of regula falsi).
fn regula_falsi(f: impl Fn(f64) -> f64, fa: f64, fb: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (0.0, 1.0, fa, fb);
    let mut side = 0;
    for _ in 0..60 {
        let x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() {
            break;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return x;
        }
        if fx == 0.0 || (b - a) < 1e-14 {
            return x;
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    (a * fb - b * fa) / (fb - fa)
}

/// Centre of the circle tangent to the curve at two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    Finite(Vec2),
    /// Parallel tangents at distinct points: the circle degenerates to a line.
    AtInfinity,
}

/// `c = (γ₂T₁ − γ₁T₂) / (T₁ − T₂)` in complex arithmetic.
pub fn bitangent_center(g1: Vec2, t1: Vec2, g2: Vec2, t2: Vec2, tau: f64) -> Center {
    let d = t1 - t2;
    if d.norm() < tau {
        return Center::AtInfinity;
    }
    Center::Finite((g2.cmul(t1) - g1.cmul(t2)).cdiv(d))
}


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// At a vertex of the curve: an endpoint of the symmetry set.
    Vertex,
    /// At an inflexion, where the parallel-tangent locus meets the diagonal.
    Inflexion,
    /// No curve feature was found.
    Mixed,
}

impl CrossingKind {
    pub fn name(self) -> &'static str {
        match self {
            CrossingKind::Vertex => "vertex",
            CrossingKind::Inflexion => "inflexion",
            CrossingKind::Mixed => "mixed",
        }
    }
}

/// Transversal crossing of a contour with the diagonal `u₁ = u₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalCrossing {
    pub param: f64,
    pub kind: CrossingKind,
    /// Centre of curvature at `param`.
    pub center: Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Bounded,
    /// Passes through a bitangent line, or has centres beyond the
    /// truncation radius.
    Unbounded,
}

impl BranchKind {
    pub fn name(self) -> &'static str {
        match self {
            BranchKind::Bounded => "bounded",
            BranchKind::Unbounded => "unbounded",
        }
    }
}

/// Run of genuine contour segments, kept in one copy of each swapped pair.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Unwrapped parameter pairs; consecutive pairs are joined by a segment.
    pub pairs: Vec<(f64, f64)>,
    /// `None` where the centre is at infinity or beyond the truncation radius.
    pub centers: Vec<Option<Vec2>>,
    /// Index into [`SymmetrySet::points`].
    pub point_index: Vec<Option<usize>>,
    /// The last pair joins back to the first.
    pub closed: bool,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub id: usize,
    pub kind: BranchKind,
    pub traces: Vec<Trace>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsPoint {
    pub center: Vec2,
    pub radius: f64,
    pub pair: (f64, f64),
    pub branch: usize,
    pub medial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsFeatureKind {
    Endpoint,
    Cusp,
    TripleCrossing,
}

impl SsFeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            SsFeatureKind::Endpoint => "endpoint",
            SsFeatureKind::Cusp => "cusp",
            SsFeatureKind::TripleCrossing => "triple-crossing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsFeature {
    pub kind: SsFeatureKind,
    pub center: Center,
    /// Parameter pair; for triple crossings the pair of one participating vertex.
    pub pair: (f64, f64),
}

#[derive(Debug, Clone, Default)]
pub struct SsFeatures {
    pub endpoints: Vec<SsFeature>,
    pub cusps: Vec<SsFeature>,
    pub triple_crossings: Vec<SsFeature>,
    /// Axis-parallel tangencies hidden inside parallel-tangent stretches.
    /// Reported, not counted as cusps.
    pub collisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsOptions {
    pub unbounded_factor: f64,
    pub medial_tol: f64,
    pub triple_radius: f64,
}

impl Default for SsOptions {
    fn default() -> Self {
        SsOptions {
            unbounded_factor: DEFAULT_UNBOUNDED_FACTOR,
            medial_tol: DEFAULT_MEDIAL_TOL,
            triple_radius: DEFAULT_TRIPLE_RADIUS,
        }
    }
}

/// Link across a parallel-tangent stretch, as (trace end, trace end) with
/// ends given as `(branch, trace, at_start)`.
type EndRef = (usize, usize, bool);

#[derive(Debug, Clone)]
pub struct SymmetrySet {
    pub points: Vec<SsPoint>,
    pub branches: Vec<Branch>,
    pub crossings: Vec<DiagonalCrossing>,
    /// Trace ends joined through a bitangent line.
    pub links: Vec<(EndRef, EndRef)>,
    /// Sign changes of `du₁` or `du₂` across links.
    pub hidden_tangencies: usize,
    pub features: SsFeatures,
    pub diameter: f64,
    /// Length scale of the set itself: the diameter of the endpoint centres,
    /// or the curve diameter when there are fewer than two.
    pub feature_scale: f64,
    pub centroid: Vec2,
    pub period: f64,
}

impl SymmetrySet {
    pub fn medial_mask(&self) -> Vec<bool> {
        self.points.iter().map(|p| p.medial).collect()
    }

    pub fn medial_points(&self) -> impl Iterator<Item = &SsPoint> {
        self.points.iter().filter(|p| p.medial)
    }

    pub fn unbounded_branches(&self) -> usize {
        self.branches.iter().filter(|b| b.kind == BranchKind::Unbounded).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    Diagonal(Option<usize>),
    Parallel,
    Open,
}

/// Maximal run of genuine segments on one contour.
#[derive(Debug, Clone)]
struct Piece {
    u: Vec<(f64, f64)>,
    ends: [End; 2],
    closed: bool,
}

fn curvature_center(c: &SampledCurve, u: f64) -> Center {
    let x = c.index_of_param(u);
    let k = c.curvature_at_index(x);
    if k.abs() < 1e-12 {
        return Center::AtInfinity;
    }
    let t = c.velocity_at_index(x).normalized();
    Center::Finite(c.point_at_index(x) + Vec2::new(-t.y, t.x) / k)
}

/// Cuts a contour into runs of equal flag; near-diagonal runs become
/// diagonal crossings, genuine runs become pieces.
fn split_contour(
    c: &SampledCurve,
    ct: &PssContour,
    features: &[CurveFeature],
    crossings: &mut Vec<DiagonalCrossing>,
) -> Vec<Piece> {
    let n = ct.segment_count();
    if n == 0 {
        return Vec::new();
    }
    let f = &ct.flags;
    let start = if ct.closed { (0..n).find(|&s| f[s] != f[(s + n - 1) % n]) } else { Some(0) };
    let Some(start) = start else {
        // closed contour with a single flag throughout
        if f[0] != SegmentFlag::Genuine {
            return Vec::new();
        }
        let mut u = ct.u.clone();
        let (a, b) = ct.segment(n - 1);
        u.push((u[n - 1].0 + b.0 - a.0, u[n - 1].1 + b.1 - a.1));
        return vec![Piece { u, ends: [End::Open, End::Open], closed: true }];
    };
    let mut runs: Vec<(SegmentFlag, Vec<(f64, f64)>)> = Vec::new();
    let mut cur = ct.u[start];
    for k in 0..n {
        let s = (start + k) % n;
        let (a, b) = ct.segment(s);
        let next = (cur.0 + b.0 - a.0, cur.1 + b.1 - a.1);
        match runs.last_mut() {
            Some((flag, v)) if *flag == f[s] => v.push(next),
            _ => runs.push((f[s], vec![cur, next])),
        }
        cur = next;
    }
    let m = runs.len();
    let mut diag_ids = vec![None; m];
    for (i, (flag, v)) in runs.iter().enumerate() {
        if *flag == SegmentFlag::NearDiagonal {
            diag_ids[i] = diagonal_crossing(c, v, ct.period, features).map(|x| {
                crossings.push(x);
                crossings.len() - 1
            });
        }
    }
    let end_of = |i: usize, d: isize| -> End {
        let j = i as isize + d;
        let j = if ct.closed {
            j.rem_euclid(m as isize) as usize
        } else if j < 0 || j >= m as isize {
            return End::Open;
        } else {
            j as usize
        };
        match runs[j].0 {
            SegmentFlag::NearDiagonal => End::Diagonal(diag_ids[j]),
            _ => End::Parallel,
        }
    };
    runs.iter()
        .enumerate()
        .filter(|(_, (flag, _))| *flag == SegmentFlag::Genuine)
        .map(|(i, (_, v))| Piece {
            u: v.clone(),
            ends: [end_of(i, -1), end_of(i, 1)],
            closed: false,
        })
        .collect()
}

/// Locates the sign change of `u₂ − u₁` inside a near-diagonal run. The
/// crossing takes the kind of the nearest curve feature.
fn diagonal_crossing(c: &SampledCurve, run: &[(f64, f64)], p: f64, features: &[CurveFeature]) -> Option<DiagonalCrossing> {
    let s = |q: (f64, f64)| wrap_signed(q.1 - q.0, p);
    let w = run.windows(2).find(|w| (s(w[0]) > 0.0) != (s(w[1]) > 0.0))?;
    let (sa, sb) = (s(w[0]), s(w[1]));
    let f = sa / (sa - sb);
    let u1 = w[0].0 + f * (w[1].0 - w[0].0);
    let mid = u1 + 0.5 * wrap_signed(w[0].1 + f * (w[1].1 - w[0].1) - u1, p);
    let param = wrap_param(mid, c.params[0], p);
    let kind = features
        .iter()
        .min_by(|a, b| wrap_signed(a.param - param, p).abs().total_cmp(&wrap_signed(b.param - param, p).abs()))
        .map_or(CrossingKind::Mixed, |x| match x.kind {
            FeatureKind::Vertex(_) => CrossingKind::Vertex,
            FeatureKind::Inflexion => CrossingKind::Inflexion,
        });
    Some(DiagonalCrossing { param, kind, center: curvature_center(c, param) })
}

fn wrap_param(u: f64, p0: f64, period: f64) -> f64 {
    p0 + (u - p0).rem_euclid(period)
}

/// Spatial index of piece vertices on the parameter torus.
struct TorusIndex<'a> {
    pieces: &'a [Piece],
    cells: HashMap<(i64, i64), Vec<(usize, usize)>>,
    p0: f64,
    period: f64,
    step: f64,
    g: i64,
}

impl<'a> TorusIndex<'a> {
    fn new(pieces: &'a [Piece], p0: f64, period: f64, g: usize) -> Self {
        let mut ix = TorusIndex {
            pieces,
            cells: HashMap::new(),
            p0,
            period,
            step: period / g as f64,
            g: g as i64,
        };
        for (a, pc) in pieces.iter().enumerate() {
            for (v, &q) in pc.u.iter().enumerate() {
                let key = ix.cell(q);
                ix.cells.entry(key).or_default().push((a, v));
            }
        }
        ix
    }

    fn cell(&self, q: (f64, f64)) -> (i64, i64) {
        let w = |x: f64| ((((x - self.p0).rem_euclid(self.period)) / self.step).floor() as i64).min(self.g - 1);
        (w(q.0), w(q.1))
    }

    fn dist(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        wrap_signed(a.0 - b.0, self.period).hypot(wrap_signed(a.1 - b.1, self.period))
    }

    /// Nearest vertex within `radius` cells, optionally restricted to one piece.
    fn nearest(&self, q: (f64, f64), radius: i64, only: Option<usize>) -> Option<(usize, usize)> {
        let (ci, cj) = self.cell(q);
        let mut best: Option<(f64, (usize, usize))> = None;
        for di in -radius..=radius {
            for dj in -radius..=radius {
                let key = ((ci + di).rem_euclid(self.g), (cj + dj).rem_euclid(self.g));
                for &(a, v) in self.cells.get(&key).into_iter().flatten() {
                    if only.is_some_and(|o| o != a) {
                        continue;
                    }
                    let d = self.dist(self.pieces[a].u[v], q);
                    if d <= (radius as f64 + 0.5) * self.step && best.is_none_or(|b| d < b.0) {
                        best = Some((d, (a, v)));
                    }
                }
            }
        }
        best.map(|b| b.1)
    }
}

const MIRROR_PROBES: usize = 9;
/// Search radius, in grid cells, for joining piece ends across a
/// parallel-tangent stretch.
const LINK_CELLS: f64 = 8.0;

/// Mirror piece of each piece under `(u₁, u₂) ↦ (u₂, u₁)`, by a vote over
/// probe vertices (contours may cross, so one probe is not enough).
fn mirror_pieces(ix: &TorusIndex<'_>) -> Vec<Option<usize>> {
    ix.pieces
        .iter()
        .map(|pc| {
            let n = pc.u.len();
            let mut votes: HashMap<usize, usize> = HashMap::new();
            for k in 0..MIRROR_PROBES {
                let q = pc.u[((2 * k + 1) * n / (2 * MIRROR_PROBES)).min(n - 1)];
                if let Some((b, _)) = ix.nearest((q.1, q.0), 1, None) {
                    *votes.entry(b).or_default() += 1;
                }
            }
            votes.into_iter().max_by_key(|&(b, v)| (v, std::cmp::Reverse(b))).map(|x| x.0)
        })
        .collect()
}

/// Mutually nearest pairs of piece ends that stop at a parallel-tangent
/// stretch: the genuine locus continues through the bitangent line there.
fn parallel_links(pieces: &[Piece], period: f64, step: f64) -> Vec<((usize, bool), (usize, bool))> {
    let ends: Vec<(usize, bool, (f64, f64))> = pieces
        .iter()
        .enumerate()
        .flat_map(|(i, pc)| {
            let mut v = Vec::new();
            if pc.ends[0] == End::Parallel {
                v.push((i, true, pc.u[0]));
            }
            if pc.ends[1] == End::Parallel {
                v.push((i, false, pc.u[pc.u.len() - 1]));
            }
            v
        })
        .collect();
    let d = |a: (f64, f64), b: (f64, f64)| wrap_signed(a.0 - b.0, period).hypot(wrap_signed(a.1 - b.1, period));
    let nearest: Vec<Option<usize>> = (0..ends.len())
        .map(|i| {
            (0..ends.len())
                .filter(|&j| j != i)
                .map(|j| (d(ends[i].2, ends[j].2), j))
                .filter(|&(x, _)| x <= LINK_CELLS * step)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|x| x.1)
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..ends.len() {
        if let Some(j) = nearest[i] {
            if j > i && nearest[j] == Some(i) {
                out.push(((ends[i].0, ends[i].1), (ends[j].0, ends[j].1)));
            }
        }
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

pub fn symmetry_set(c: &SampledCurve, pss: &PreSymmetrySet) -> Result<SymmetrySet> {
    symmetry_set_with(c, pss, &SsOptions::default())
}

/// Maps genuine pre-symmetry segments to bitangent centres.
///
/// Pieces of the zero set come in swapped pairs `(u₁, u₂) ↔ (u₂, u₁)` with
/// identical centres; one piece of each pair is kept. Pieces joined across a
/// parallel-tangent stretch (a bitangent line) belong to one branch.
pub fn symmetry_set_with(c: &SampledCurve, pss: &PreSymmetrySet, opts: &SsOptions) -> Result<SymmetrySet> {
    if !c.closed {
        return Err(Error::Config("symmetry set needs a closed curve".into()));
    }
    let period = pss.period;
    if (period - c.period()).abs() > 1e-9 * period {
        return Err(Error::Config("pre-symmetry set was computed for a different curve".into()));
    }
    let diameter = c.diameter();
    let centroid = c.points.iter().fold(Vec2::ZERO, |a, &p| a + p) / c.len() as f64;
    let cutoff = opts.unbounded_factor * diameter;
    let p0 = c.params[0];
    let step = period / pss.grid_resolution as f64;

    let mut features = find_vertices(c, DEFAULT_PLATEAU_TOL);
    features.extend(find_inflexions(c, DEFAULT_PLATEAU_TOL));
    let mut crossings = Vec::new();
    let pieces: Vec<Piece> = pss
        .contours
        .iter()
        .flat_map(|ct| split_contour(c, ct, &features, &mut crossings))
        .collect();
    let ix = TorusIndex::new(&pieces, p0, period, pss.grid_resolution);
    let mirror = mirror_pieces(&ix);

    // class = smaller index of each mirror pair; traces are built for classes only
    let class: Vec<usize> = (0..pieces.len()).map(|i| mirror[i].map_or(i, |m| m.min(i))).collect();
    let raw_links = parallel_links(&pieces, period, step);
    let mut uf = UnionFind::new(pieces.len());
    for &((a, _), (b, _)) in &raw_links {
        uf.union(class[a], class[b]);
    }
    let mut branch_of: HashMap<usize, usize> = HashMap::new();
    let mut branch_pieces: Vec<Vec<usize>> = Vec::new();
    for i in 0..pieces.len() {
        if class[i] != i {
            continue;
        }
        let root = uf.find(i);
        let b = *branch_of.entry(root).or_insert_with(|| {
            branch_pieces.push(Vec::new());
            branch_pieces.len() - 1
        });
        branch_pieces[b].push(i);
    }

    let mut points = Vec::new();
    let mut branches = Vec::new();
    let mut trace_of: HashMap<usize, (usize, usize)> = HashMap::new();
    for (id, members) in branch_pieces.iter().enumerate() {
        let mut unbounded = false;
        let mut traces = Vec::new();
        for &i in members {
            let pc = &pieces[i];
            let self_mirror = mirror[i] == Some(i) && pc.closed;
            let u: Vec<(f64, f64)> = if self_mirror {
                let mid = pc.u.len() / 2;
                let q = pc.u[mid];
                let v = ix.nearest((q.1, q.0), 1, Some(i)).map_or(mid, |x| x.1);
                pc.u[mid.min(v)..=mid.max(v)].to_vec()
            } else {
                pc.u.clone()
            };
            unbounded |= pc.ends.contains(&End::Parallel);
            let mut centers = Vec::with_capacity(u.len());
            let mut point_index = Vec::with_capacity(u.len());
            for &(u1, u2) in &u {
                let (g1, t1) = frame(c, u1);
                let (g2, t2) = frame(c, u2);
                let center = match bitangent_center(g1, t1, g2, t2, pss.tau) {
                    Center::Finite(x) if x.dist(centroid) <= cutoff => Some(x),
                    _ => None,
                };
                centers.push(center);
                point_index.push(center.map(|x| {
                    points.push(SsPoint {
                        center: x,
                        radius: 0.5 * (g1.dist(x) + g2.dist(x)),
                        pair: (wrap_param(u1, p0, period), wrap_param(u2, p0, period)),
                        branch: id,
                        medial: false,
                    });
                    points.len() - 1
                }));
            }
            unbounded |= centers.iter().any(|x| x.is_none());
            trace_of.insert(i, (id, traces.len()));
            traces.push(Trace {
                pairs: u,
                centers,
                point_index,
                closed: pc.closed && !self_mirror,
            });
        }
        branches.push(Branch {
            id,
            kind: if unbounded { BranchKind::Unbounded } else { BranchKind::Bounded },
            traces,
        });
    }

    // a link end on a dropped piece is moved to the matching end of its mirror
    let end_ref = |i: usize, start: bool| -> Option<EndRef> {
        if let Some(&(b, t)) = trace_of.get(&i) {
            return Some((b, t, start));
        }
        let m = mirror[i]?;
        let &(b, t) = trace_of.get(&m)?;
        let u = &pieces[i].u;
        let q = if start { u[0] } else { u[u.len() - 1] };
        let mu = &pieces[m].u;
        let to_start = ix.dist(mu[0], (q.1, q.0)) <= ix.dist(mu[mu.len() - 1], (q.1, q.0));
        Some((b, t, to_start))
    };
    let mut links: Vec<(EndRef, EndRef)> = Vec::new();
    for &((a, sa), (b, sb)) in &raw_links {
        if let (Some(x), Some(y)) = (end_ref(a, sa), end_ref(b, sb)) {
            let l = if x <= y { (x, y) } else { (y, x) };
            if !links.contains(&l) {
                links.push(l);
            }
        }
    }
    // every hidden tangency shows up once per mirror copy of its link
    let eps = 1e-9 * period;
    let hidden: usize = raw_links
        .iter()
        .map(|&((a, sa), (b, sb))| link_flips(&pieces[a].u, sa, &pieces[b].u, sb, eps))
        .sum::<usize>()
        / 2;

    let segs: Vec<(Vec2, Vec2)> = (0..c.segment_count()).map(|i| c.segment(i)).collect();
    points.par_iter_mut().for_each(|p| {
        let d = segs
            .iter()
            .map(|&(a, b)| crate::geom::point_segment_distance(p.center, a, b))
            .fold(f64::INFINITY, f64::min);
        p.medial = p.radius <= d * (1.0 + opts.medial_tol);
    });

    let ends: Vec<Vec2> = crossings
        .iter()
        .filter(|x| x.kind == CrossingKind::Vertex)
        .filter_map(|x| match x.center {
            Center::Finite(p) if p.dist(centroid) <= cutoff => Some(p),
            _ => None,
        })
        .collect();
    let feature_scale = match point_set_diameter(&ends) {
        d if d > 0.0 => d,
        _ => diameter,
    };
    let mut ss = SymmetrySet {
        points,
        branches,
        crossings,
        links,
        hidden_tangencies: hidden,
        features: SsFeatures::default(),
        diameter,
        feature_scale,
        centroid,
        period,
    };
    ss.features = classify_ss_features(pss, &ss, opts.triple_radius);
    Ok(ss)
}

fn step_sign(a: (f64, f64), b: (f64, f64), coord: usize, eps: f64) -> i32 {
    let v = if coord == 0 { b.0 - a.0 } else { b.1 - a.1 };
    if v.abs() <= eps {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Number of coordinates whose direction flips between the step leaving
/// one linked end and the step entering the other.
fn link_flips(a: &[(f64, f64)], a_start: bool, b: &[(f64, f64)], b_start: bool, eps: f64) -> usize {
    let outward = |p: &[(f64, f64)], start: bool| {
        if start {
            (p[1], p[0])
        } else {
            (p[p.len() - 2], p[p.len() - 1])
        }
    };
    let (a0, a1) = outward(a, a_start);
    let (b0, b1) = outward(b, b_start);
    (0..2)
        .filter(|&coord| {
            // continuing into b runs against b's outward direction
            let (sa, sb) = (step_sign(a0, a1, coord, eps), -step_sign(b0, b1, coord, eps));
            sa != 0 && sb != 0 && sa != sb
        })
        .count()
}

/// Endpoints, cusps and triple crossings.
///
/// Endpoints are the diagonal crossings at vertices of the curve. Cusps
/// are sign changes of `du₁` or `du₂` along each trace; since each trace is
/// one copy of a swapped pair, every cusp is seen once. Triple crossings are
/// clusters (radius `tol` × feature scale) of pairwise segment intersections
/// involving at least three separate strands.
pub fn classify_ss_features(pss: &PreSymmetrySet, ss: &SymmetrySet, tol: f64) -> SsFeatures {
    let mut out = SsFeatures::default();
    for x in &ss.crossings {
        if x.kind == CrossingKind::Vertex {
            out.endpoints.push(SsFeature {
                kind: SsFeatureKind::Endpoint,
                center: x.center,
                pair: (x.param, x.param),
            });
        }
    }
    let eps = 1e-9 * pss.period;
    for b in &ss.branches {
        for tr in &b.traces {
            let n = tr.pairs.len();
            for coord in 0..2 {
                let mut last = 0;
                let mut first = 0;
                for i in 0..n - 1 {
                    let sg = step_sign(tr.pairs[i], tr.pairs[i + 1], coord, eps);
                    if sg == 0 {
                        continue;
                    }
                    if last != 0 && sg != last {
                        out.cusps.push(SsFeature {
                            kind: SsFeatureKind::Cusp,
                            center: tr.centers[i].map_or(Center::AtInfinity, Center::Finite),
                            pair: tr.pairs[i],
                        });
                    }
                    if first == 0 {
                        first = sg;
                    }
                    last = sg;
                }
                if tr.closed && first != 0 && last != 0 && first != last {
                    out.cusps.push(SsFeature {
                        kind: SsFeatureKind::Cusp,
                        center: tr.centers[0].map_or(Center::AtInfinity, Center::Finite),
                        pair: tr.pairs[0],
                    });
                }
            }
        }
    }
    out.collisions = ss.hidden_tangencies;
    out.triple_crossings = triple_crossings(ss, tol * ss.feature_scale);
    out
}

/// Polylines of finite centres along the traces.
fn center_polylines(ss: &SymmetrySet) -> Vec<Vec<(Vec2, (f64, f64))>> {
    let mut lines = Vec::new();
    for b in &ss.branches {
        for tr in &b.traces {
            let mut cur: Vec<(Vec2, (f64, f64))> = Vec::new();
            let n = tr.pairs.len();
            let m = if tr.closed { n + 1 } else { n };
            for k in 0..m {
                let i = k % n;
                match tr.centers[i] {
                    Some(x) => cur.push((x, tr.pairs[i])),
                    None => {
                        if cur.len() >= 2 {
                            lines.push(std::mem::take(&mut cur));
                        }
                        cur.clear();
                    }
                }
            }
            if cur.len() >= 2 {
                lines.push(cur);
            }
        }
    }
    lines
}

fn triple_crossings(ss: &SymmetrySet, radius: f64) -> Vec<SsFeature> {
    let lines = center_polylines(ss);
    let segs: Vec<(usize, usize, Vec2, Vec2)> = lines
        .iter()
        .enumerate()
        .flat_map(|(l, line)| line.windows(2).enumerate().map(move |(i, w)| (l, i, w[0].0, w[1].0)))
        .collect();
    let boxes: Vec<BBox> = segs
        .iter()
        .map(|s| BBox::new(Vec2::new(s.2.x.min(s.3.x), s.2.y.min(s.3.y)), Vec2::new(s.2.x.max(s.3.x), s.2.y.max(s.3.y))))
        .collect();
    let hits: Vec<(Vec2, usize, usize)> = (0..segs.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let segs = &segs;
            let boxes = &boxes;
            (i + 1..segs.len()).filter_map(move |j| {
                let (a, b) = (&segs[i], &segs[j]);
                if a.0 == b.0 && a.1.abs_diff(b.1) <= 2 {
                    return None;
                }
                let (p, q) = (&boxes[i], &boxes[j]);
                if p.max.x < q.min.x || q.max.x < p.min.x || p.max.y < q.min.y || q.max.y < p.min.y {
                    return None;
                }
                segment_intersection(a.2, a.3, b.2, b.3).map(|(t, _)| (a.2.lerp(a.3, t), i, j))
            })
        })
        .collect();
    let clusters = cluster_points(&hits.iter().map(|h| h.0).collect::<Vec<_>>(), radius);
    let mut out = Vec::new();
    for members in clusters {
        let mut ids: Vec<(usize, usize)> = members
            .iter()
            .flat_map(|&m| [hits[m].1, hits[m].2])
            .map(|s| (segs[s].0, segs[s].1))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        // neighbouring segments of one polyline form a single strand
        let strands = ids
            .windows(2)
            .filter(|w| w[0].0 != w[1].0 || w[1].1 - w[0].1 > 2)
            .count()
            + 1;
        if strands >= 3 {
            let at = members.iter().fold(Vec2::ZERO, |a, &m| a + hits[m].0) / members.len() as f64;
            let s = segs[hits[members[0]].1];
            out.push(SsFeature {
                kind: SsFeatureKind::TripleCrossing,
                center: Center::Finite(at),
                pair: lines[s.0][s.1].1,
            });
        }
    }
    out
}

/// Single-linkage clusters of points within `radius`, as index lists in
/// order of first member.
fn cluster_points(pts: &[Vec2], radius: f64) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(pts.len());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].dist(pts[j]) <= radius {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..pts.len() {
        let r = uf.find(i);
        let k = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[k].push(i);
    }
    groups
}

/// Run ends closer than this fraction of the feature scale are joined when
/// building the medial graph.
pub const DEFAULT_JUNCTION_RADIUS: f64 = 2e-2;

/// Maximal runs of consecutive medial points along each trace.
pub fn medial_runs(ss: &SymmetrySet) -> Vec<Vec<Vec2>> {
    let mut runs = Vec::new();
    for b in &ss.branches {
        for tr in &b.traces {
            let mut cur: Vec<Vec2> = Vec::new();
            for pi in &tr.point_index {
                match pi.map(|k| ss.points[k]).filter(|p| p.medial) {
                    Some(p) => cur.push(p.center),
                    None => {
                        if cur.len() >= 2 {
                            runs.push(std::mem::take(&mut cur));
                        }
                        cur.clear();
                    }
                }
            }
            if cur.len() >= 2 {
                runs.push(cur);
            }
        }
    }
    runs
}

/// Node of the medial graph: a cluster of run ends and the number of run
/// ends meeting there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedialNode {
    pub location: Vec2,
    pub degree: usize,
}

/// Run ends clustered within `radius` × feature scale. A Y-shaped medial axis
/// has one node of degree 3 and three of degree 1.
pub fn medial_graph(ss: &SymmetrySet, radius: f64) -> Vec<MedialNode> {
    let ends: Vec<Vec2> = medial_runs(ss)
        .iter()
        .flat_map(|r| [r[0], r[r.len() - 1]])
        .collect();
    cluster_points(&ends, radius * ss.feature_scale)
        .into_iter()
        .map(|m| MedialNode {
            location: m.iter().fold(Vec2::ZERO, |a, &i| a + ends[i]) / m.len() as f64,
            degree: m.len(),
        })
        .collect()
}

/// Largest distance, in grid cells, from the swap `(u₂, u₁)` of a genuine
/// contour vertex to the nearest contour segment.
pub fn swap_symmetry_defect(pss: &PreSymmetrySet) -> f64 {
    let p = pss.period;
    let step = p / pss.grid_resolution as f64;
    let g = pss.grid_resolution as i64;
    let cell = |x: f64| (x.rem_euclid(p) / step).floor() as i64 % g;
    let mut index: HashMap<(i64, i64), Vec<((f64, f64), (f64, f64))>> = HashMap::new();
    for ct in &pss.contours {
        for s in 0..ct.segment_count() {
            let (a, b) = ct.segment(s);
            index.entry((cell(a.0), cell(a.1))).or_default().push((a, b));
        }
    }
    let dist = |q: (f64, f64), seg: ((f64, f64), (f64, f64))| {
        // move the segment next to q before projecting
        let (a, b) = seg;
        let sh = (q.0 + wrap_signed(a.0 - q.0, p) - a.0, q.1 + wrap_signed(a.1 - q.1, p) - a.1);
        let a = Vec2::new(a.0 + sh.0, a.1 + sh.1);
        let b = Vec2::new(b.0 + sh.0, b.1 + sh.1);
        crate::geom::point_segment_distance(Vec2::new(q.0, q.1), a, b)
    };
    let mut worst = 0.0f64;
    for ct in &pss.contours {
        for (s, &flag) in ct.flags.iter().enumerate() {
            if flag != SegmentFlag::Genuine {
                continue;
            }
            let q = ct.segment(s).0;
            let sw = (q.1, q.0);
            let (ci, cj) = (cell(sw.0), cell(sw.1));
            let mut best = f64::INFINITY;
            for di in -2..=2 {
                for dj in -2..=2 {
                    let key = ((ci + di).rem_euclid(g), (cj + dj).rem_euclid(g));
                    for &seg in index.get(&key).into_iter().flatten() {
                        best = best.min(dist(sw, seg));
                    }
                }
            }
            worst = worst.max(best / step);
        }
    }
    worst
}

#[cfg(test)]
mod tests;
