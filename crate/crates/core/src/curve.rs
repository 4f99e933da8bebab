//! Sampled plane curves, signed curvature, vertices and inflexions.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::monge::MongeSurface;
use crate::scalar::Jet;
use crate::series::{curve_point, radial_coefficients, radial_sum, LevelSign, SeriesParametrization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Series,
    OracleTrace,
    Explicit,
}

/// Ordered samples of one curve.
///
/// Closed curves hold `M` distinct samples over one period; the closing
/// segment runs from the last sample back to the first.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    /// `dγ/du`.
    pub velocity: Vec<Vec2>,
    pub tangents: Vec<Vec2>,
    /// Signed curvature with respect to the parametrization direction.
    pub curvature: Vec<f64>,
    pub closed: bool,
    pub k_level: f64,
    pub source: CurveSource,
}

pub const MIN_SAMPLES: usize = 16;

impl SampledCurve {
    /// Builds a curve from positions and the first two parameter derivatives.
    pub fn from_derivatives(
        params: Vec<f64>,
        points: Vec<Vec2>,
        d1: Vec<Vec2>,
        d2: Vec<Vec2>,
        closed: bool,
        k_level: f64,
        source: CurveSource,
    ) -> Result<Self> {
        let m = points.len();
        if m < MIN_SAMPLES {
            return Err(Error::Config(format!("curve needs at least {MIN_SAMPLES} samples, got {m}")));
        }
        let mut tangents = Vec::with_capacity(m);
        let mut curvature = Vec::with_capacity(m);
        for (j, (v, a)) in d1.iter().zip(&d2).enumerate() {
            let speed = v.norm();
            if !(speed > 0.0) || !v.is_finite() {
                return Err(Error::Degenerate(format!("zero speed at sample {j} (repeated points)")));
            }
            tangents.push(*v / speed);
            curvature.push(v.cross(*a) / speed.powi(3));
        }
        Ok(SampledCurve {
            params,
            points,
            velocity: d1,
            tangents,
            curvature,
            closed,
            k_level,
            source,
        })
    }

    /// Closed curve from a periodic map `u ↦ (γ, γ', γ'')` on `[0, 2π)`.
    pub fn closed_from_fn(m: usize, k_level: f64, source: CurveSource, f: impl Fn(f64) -> (Vec2, Vec2, Vec2)) -> Result<Self> {
        let params: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
        let (mut p, mut d1, mut d2) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
        for &u in &params {
            let (a, b, c) = f(u);
            p.push(a);
            d1.push(b);
            d2.push(c);
        }
        SampledCurve::from_derivatives(params, p, d1, d2, true, k_level, source)
    }

    /// `(a cos u, b sin u)`.
    pub fn ellipse(a: f64, b: f64, m: usize) -> Result<Self> {
        SampledCurve::closed_from_fn(m, 0.0, CurveSource::Explicit, |u| {
            let (s, c) = u.sin_cos();
            (
                Vec2::new(a * c, b * s),
                Vec2::new(-a * s, b * c),
                Vec2::new(-a * c, -b * s),
            )
        })
    }

    /// Closed curve through ordered points, derivatives by centered
    /// differences in a uniform parameter on `[0, 2π)`.
    pub fn closed_from_points(points: Vec<Vec2>, k_level: f64, source: CurveSource) -> Result<Self> {
        let m = points.len();
        if m < MIN_SAMPLES {
            return Err(Error::Config(format!("curve needs at least {MIN_SAMPLES} samples, got {m}")));
        }
        let h = TAU / m as f64;
        let d1 = (0..m)
            .map(|j| (points[(j + 1) % m] - points[(j + m - 1) % m]) / (2.0 * h))
            .collect();
        let d2 = (0..m)
            .map(|j| (points[(j + 1) % m] - points[j] * 2.0 + points[(j + m - 1) % m]) / (h * h))
            .collect();
        let params = (0..m).map(|j| h * j as f64).collect();
        SampledCurve::from_derivatives(params, points, d1, d2, true, k_level, source)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameter period of a closed curve.
    pub fn period(&self) -> f64 {
        let m = self.len();
        let h = self.params[1] - self.params[0];
        h * m as f64
    }

    /// Number of segments (`M` when closed, `M − 1` otherwise).
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.len()
        } else {
            self.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.points[i], self.points[(i + 1) % self.len()])
    }

    /// Twice the signed area enclosed (positive for counterclockwise).
    pub fn signed_area(&self) -> f64 {
        let m = self.len();
        0.5 * (0..m)
            .map(|i| self.points[i].cross(self.points[(i + 1) % m]))
            .sum::<f64>()
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        crate::geom::point_set_diameter(&self.points)
    }

    /// Position at a fractional sample index, cubic Hermite on the stored
    /// velocities.
    pub fn point_at_index(&self, x: f64) -> Vec2 {
        let (j0, j1, u, h) = self.locate(x);
        let u2 = u * u;
        let u3 = u2 * u;
        self.points[j0] * (2.0 * u3 - 3.0 * u2 + 1.0)
            + self.velocity[j0] * ((u3 - 2.0 * u2 + u) * h)
            + self.points[j1] * (-2.0 * u3 + 3.0 * u2)
            + self.velocity[j1] * ((u3 - u2) * h)
    }

    // (left sample, right sample, local coordinate in [0, 1], parameter step)
    fn locate(&self, x: f64) -> (usize, usize, f64, f64) {
        let m = self.len();
        let (j0, u) = if self.closed {
            let x = x.rem_euclid(m as f64);
            let j = (x.floor() as usize).min(m - 1);
            (j, x - j as f64)
        } else {
            let x = x.clamp(0.0, (m - 1) as f64);
            let j = (x.floor() as usize).min(m - 2);
            (j, x - j as f64)
        };
        let j1 = (j0 + 1) % m;
        let h = if self.closed && j1 == 0 {
            self.params[1] - self.params[0]
        } else {
            self.params[j1] - self.params[j0]
        };
        (j0, j1, u, h)
    }

    /// `dγ/du` at a fractional sample index (derivative of the Hermite
    /// interpolant).
    pub fn velocity_at_index(&self, x: f64) -> Vec2 {
        let (j0, j1, u, h) = self.locate(x);
        let u2 = u * u;
        (self.points[j0] * (6.0 * u2 - 6.0 * u) + self.points[j1] * (6.0 * u - 6.0 * u2)) / h
            + self.velocity[j0] * (3.0 * u2 - 4.0 * u + 1.0)
            + self.velocity[j1] * (3.0 * u2 - 2.0 * u)
    }

    /// Curvature at a fractional sample index, linear between samples.
    pub fn curvature_at_index(&self, x: f64) -> f64 {
        let (j0, j1, u, _) = self.locate(x);
        self.curvature[j0] * (1.0 - u) + self.curvature[j1] * u
    }

    /// Fractional sample index of a parameter value.
    pub fn index_of_param(&self, u: f64) -> f64 {
        (u - self.params[0]) / (self.params[1] - self.params[0])
    }

    /// Parameter value at a fractional sample index.
    pub fn param_at_index(&self, x: f64) -> f64 {
        let h = self.params[1] - self.params[0];
        let v = self.params[0] + h * x;
        if self.closed {
            self.params[0] + (v - self.params[0]).rem_euclid(self.period())
        } else {
            v
        }
    }
}

/// Samples the level curve `f = k` from a series parametrization, with
/// tangents and curvature from exact θ-derivatives of the truncated series.
pub fn sample_level_curve(s: &MongeSurface, p: &SeriesParametrization, k: f64, m: usize) -> Result<SampledCurve> {
    let t = p.level_to_t(k)?;
    sample_at_t(s, p, t, k, m)
}

/// As [`sample_level_curve`] without the validity-radius check, for
/// comparing truncation orders at a common level.
pub fn sample_level_curve_unchecked(s: &MongeSurface, p: &SeriesParametrization, k: f64, m: usize) -> Result<SampledCurve> {
    let t = match p.level_to_t(k) {
        Ok(t) => t,
        Err(_) if k != 0.0 && LevelSign::of(k) == p.domain.sign => k.abs().powf(1.0 / p.mode.leading_degree() as f64),
        Err(e) => return Err(e),
    };
    sample_at_t(s, p, t, k, m)
}

fn sample_at_t(s: &MongeSurface, p: &SeriesParametrization, t: f64, k: f64, m: usize) -> Result<SampledCurve> {
    let theta = p.domain.sample_angles(m);
    let rows: Vec<(Vec2, Vec2, Vec2)> = theta
        .par_iter()
        .map(|&th| {
            let var = Jet::variable(th);
            let coeffs = radial_coefficients(s, p.mode, &var, p.order)?;
            let tj = Jet::constant(t);
            let r = radial_sum(&coeffs, &tj);
            let (x, y) = curve_point(p.mode, &tj, &var, &r);
            Ok((Vec2::new(x.v, y.v), Vec2::new(x.d1, y.d1), Vec2::new(x.d2, y.d2)))
        })
        .collect::<Result<_>>()?;
    let (mut pts, mut d1, mut d2) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    for (a, b, c) in rows {
        pts.push(a);
        d1.push(b);
        d2.push(c);
    }
    SampledCurve::from_derivatives(theta, pts, d1, d2, p.domain.is_closed(), k, CurveSource::Series)
}

/// Signed curvature, oriented so a counterclockwise convex closed curve has
/// positive curvature.
pub fn curvature_profile(c: &SampledCurve) -> Vec<f64> {
    let flip = c.closed && c.signed_area() < 0.0;
    c.curvature.iter().map(|&k| if flip { -k } else { k }).collect()
}

/// Curvature from centered differences of the sample points alone.
pub fn finite_difference_curvature(c: &SampledCurve) -> Result<Vec<f64>> {
    if !c.closed {
        return Err(Error::Config("finite-difference curvature needs a closed curve".into()));
    }
    let m = c.len();
    let h = c.params[1] - c.params[0];
    (0..m)
        .map(|j| {
            let (a, b, d) = (c.points[(j + m - 1) % m], c.points[j], c.points[(j + 1) % m]);
            let v = (d - a) / (2.0 * h);
            let acc = (d - b * 2.0 + a) / (h * h);
            let speed = v.norm();
            if speed == 0.0 {
                return Err(Error::Degenerate(format!("repeated points at sample {j}")));
            }
            Ok(v.cross(acc) / speed.powi(3))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Vertex(Extremum),
    Inflexion,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Vertex(Extremum::Max) => "vertex-max",
            FeatureKind::Vertex(Extremum::Min) => "vertex-min",
            FeatureKind::Inflexion => "inflexion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFeature {
    pub kind: FeatureKind,
    pub param: f64,
    /// Fractional sample index of `param`.
    pub index: f64,
    pub point: Vec2,
}

/// Default relative plateau tolerance for curvature extrema.
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-7;

/// True when curvature varies by less than `tol` relative to its size.
pub fn curvature_is_constant(c: &SampledCurve, tol: f64) -> bool {
    let k = &c.curvature;
    let (lo, hi) = k.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let scale = k.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    hi - lo <= tol * scale.max(f64::MIN_POSITIVE)
}

fn feature_at(c: &SampledCurve, kind: FeatureKind, index: f64) -> CurveFeature {
    CurveFeature {
        kind,
        param: c.param_at_index(index),
        index: if c.closed { index.rem_euclid(c.len() as f64) } else { index },
        point: c.point_at_index(index),
    }
}

/// Strict local extrema of the oriented curvature.
///
/// Differences below `tol · max|κ|` count as flat, so a plateau yields one
/// extremum at its middle. Each extremum is refined by a parabola through
/// the neighbouring samples.
pub fn find_vertices(c: &SampledCurve, tol: f64) -> Vec<CurveFeature> {
    let k = curvature_profile(c);
    if curvature_is_constant(c, tol) {
        return Vec::new();
    }
    let m = k.len();
    let scale = k.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let eps = tol * scale;
    let diffs = if c.closed { m } else { m - 1 };
    // (index of the step, sign) for every non-flat step
    let steps: Vec<(usize, i8)> = (0..diffs)
        .filter_map(|j| {
            let d = k[(j + 1) % m] - k[j];
            if d > eps {
                Some((j, 1))
            } else if d < -eps {
                Some((j, -1))
            } else {
                None
            }
        })
        .collect();
    let mut out = Vec::new();
    let n = steps.len();
    let pairs = if c.closed { n } else { n.saturating_sub(1) };
    for a in 0..pairs {
        let (ja, sa) = steps[a];
        let (jb, sb) = steps[(a + 1) % n];
        if sa == sb {
            continue;
        }
        // extremum lies on samples ja+1 ..= jb
        let span = if jb > ja { jb - ja } else { jb + m - ja };
        let centre = ja + 1 + (span - 1) / 2;
        let kind = FeatureKind::Vertex(if sa > 0 { Extremum::Max } else { Extremum::Min });
        let idx = if span == 1 {
            let j = (ja + 1) % m;
            let (km, k0, kp) = (k[(j + m - 1) % m], k[j], k[(j + 1) % m]);
            let denom = km - 2.0 * k0 + kp;
            let off = if denom != 0.0 { 0.5 * (km - kp) / denom } else { 0.0 };
            (ja + 1) as f64 + off.clamp(-0.5, 0.5)
        } else {
            centre as f64 + if (span - 1) % 2 == 1 { 0.5 } else { 0.0 }
        };
        out.push(feature_at(c, kind, idx));
    }
    out.sort_by(|a, b| a.index.total_cmp(&b.index));
    out
}

/// Sign changes of the curvature, located by linear interpolation.
/// Runs of exact zeros are skipped over and reported once at their middle.
pub fn find_inflexions(c: &SampledCurve, tol: f64) -> Vec<CurveFeature> {
    let k = curvature_profile(c);
    let m = k.len();
    let scale = k.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let eps = tol * scale;
    let signed: Vec<(usize, f64)> = k
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > eps)
        .map(|(j, &v)| (j, v))
        .collect();
    let n = signed.len();
    let pairs = if c.closed { n } else { n.saturating_sub(1) };
    let mut out = Vec::new();
    for a in 0..pairs {
        let (ja, va) = signed[a];
        let (jb, vb) = signed[(a + 1) % n];
        if (va > 0.0) == (vb > 0.0) {
            continue;
        }
        let span = if jb > ja { jb - ja } else { jb + m - ja };
        let idx = if span == 1 {
            ja as f64 + va / (va - vb)
        } else {
            ja as f64 + 0.5 * span as f64
        };
        out.push(feature_at(c, FeatureKind::Inflexion, idx));
    }
    out.sort_by(|a, b| a.index.total_cmp(&b.index));
    out
}

/// One feature followed across a sweep of levels.
#[derive(Debug, Clone)]
pub struct FeatureChain {
    pub kind: FeatureKind,
    /// `(k, param, point)` in sweep order.
    pub samples: Vec<(f64, f64, Vec2)>,
}

#[derive(Debug, Clone, Default)]
pub struct FeatureLocus {
    pub chains: Vec<FeatureChain>,
    /// Number of times a feature could not be matched at the next level.
    pub breaks: usize,
}

/// Largest parameter jump accepted when matching features across levels.
pub const LOCUS_MATCH_THRESHOLD: f64 = 0.25;

fn param_gap(a: f64, b: f64, closed: bool) -> f64 {
    let d = (a - b).abs();
    if closed {
        d.min(TAU - d)
    } else {
        d
    }
}

/// Sweeps `k` and links vertices and inflexions of consecutive levels by
/// nearest parameter within the same kind.
pub fn feature_locus(s: &MongeSurface, p: &SeriesParametrization, k_list: &[f64], m: usize, tol: f64) -> Result<FeatureLocus> {
    let per_level: Vec<Vec<CurveFeature>> = k_list
        .par_iter()
        .map(|&k| {
            let c = sample_level_curve(s, p, k, m)?;
            let mut f = find_vertices(&c, tol);
            f.extend(find_inflexions(&c, tol));
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let closed = p.domain.is_closed();
    let mut locus = FeatureLocus::default();
    let mut open: Vec<usize> = Vec::new();
    for (level, feats) in per_level.iter().enumerate() {
        let k = k_list[level];
        let mut next_open = Vec::new();
        let mut taken = vec![false; open.len()];
        for f in feats {
            let best = open
                .iter()
                .enumerate()
                .filter(|(i, &ci)| !taken[*i] && locus.chains[ci].kind == f.kind)
                .map(|(i, &ci)| (i, ci, param_gap(locus.chains[ci].samples.last().unwrap().1, f.param, closed)))
                .filter(|&(_, _, g)| g < LOCUS_MATCH_THRESHOLD)
                .min_by(|a, b| a.2.total_cmp(&b.2));
            match best {
                Some((i, ci, _)) => {
                    taken[i] = true;
                    locus.chains[ci].samples.push((k, f.param, f.point));
                    next_open.push(ci);
                }
                None => {
                    if level > 0 {
                        locus.breaks += 1;
                    }
                    locus.chains.push(FeatureChain {
                        kind: f.kind,
                        samples: vec![(k, f.param, f.point)],
                    });
                    next_open.push(locus.chains.len() - 1);
                }
            }
        }
        locus.breaks += taken.iter().filter(|&&t| !t).count();
        open = next_open;
    }
    Ok(locus)
}
