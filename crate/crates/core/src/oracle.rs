//! Brute-force references: level sets traced straight from the polynomial,
//! Hausdorff distances between polylines, and a medial axis read off the
//! nearest-point map of a sampled curve.

use rayon::prelude::*;

use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, project_onto_segment, BBox, Vec2};
use crate::marching::{linear_fraction, zero_contours, NodeGrid};
use crate::monge::MongeSurface;

/// Grid step as a fraction of the curve diameter.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0 / 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>, closed: bool) -> Self {
        Polyline { points, closed }
    }

    pub fn segment_count(&self) -> usize {
        match (self.points.len(), self.closed) {
            (0 | 1, _) => 0,
            (n, true) => n,
            (n, false) => n - 1,
        }
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    /// Distance from `p` to the nearest point of the polyline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        if self.points.len() == 1 {
            return p.dist(self.points[0]);
        }
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Twice the signed area for closed polylines (zero when open).
    fn signed_area2(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        (0..self.points.len()).map(|i| {
            let (a, b) = self.segment(i);
            a.cross(b)
        }).sum()
    }

    /// Winding number of a closed polyline around `p`.
    pub fn winding_number(&self, p: Vec2) -> i32 {
        if !self.closed {
            return 0;
        }
        let mut w = 0;
        for i in 0..self.points.len() {
            let (a, b) = self.segment(i);
            if a.y <= p.y {
                if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                    w += 1;
                }
            } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
                w -= 1;
            }
        }
        w
    }
}

impl From<&SampledCurve> for Polyline {
    fn from(c: &SampledCurve) -> Self {
        Polyline::new(c.points.clone(), c.closed)
    }
}

#[derive(Debug, Clone)]
pub struct TracedLevelSet {
    pub polylines: Vec<Polyline>,
    pub bbox: BBox,
    pub h: f64,
    /// The component around the origin: the innermost closed polyline with
    /// nonzero winding about it, or else the polyline passing closest.
    pub local: usize,
}

impl TracedLevelSet {
    pub fn local_polyline(&self) -> &Polyline {
        &self.polylines[self.local]
    }
}

/// Marching squares on `f − k` with linear root interpolation on edges.
pub fn trace_level_set(s: &MongeSurface, k: f64, bbox: BBox, h: f64) -> Result<TracedLevelSet> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("grid step must be positive, got {h}")));
    }
    if !bbox.contains(Vec2::ZERO) {
        return Err(Error::Config("trace box must contain the origin".into()));
    }
    let nx = (bbox.width() / h).ceil() as usize + 1;
    let ny = (bbox.height() / h).ceil() as usize + 1;
    if nx.saturating_mul(ny) > 64_000_000 {
        return Err(Error::Config(format!("trace grid {nx}×{ny} is too large")));
    }
    let values: Vec<f64> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = bbox.min.x + i as f64 * h;
            (0..ny).map(move |j| s.eval(x, bbox.min.y + j as f64 * h) - k)
        })
        .collect();
    let grid = NodeGrid {
        nx,
        ny,
        wrap_x: false,
        wrap_y: false,
        values,
    };
    let polylines: Vec<Polyline> = zero_contours(&grid, &linear_fraction)
        .into_iter()
        .map(|g| {
            let pts = g
                .points
                .iter()
                .map(|&(i, j)| Vec2::new(bbox.min.x + i * h, bbox.min.y + j * h))
                .collect();
            Polyline::new(pts, g.closed)
        })
        .collect();
    if polylines.is_empty() {
        return Err(Error::Domain(format!("level {k} has no crossings in the trace box")));
    }
    let enclosing = polylines
        .iter()
        .enumerate()
        .filter(|(_, p)| p.winding_number(Vec2::ZERO) != 0)
        .min_by(|a, b| a.1.signed_area2().abs().total_cmp(&b.1.signed_area2().abs()))
        .map(|x| x.0);
    let local = enclosing.unwrap_or_else(|| {
        polylines
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance_to(Vec2::ZERO).total_cmp(&b.1.distance_to(Vec2::ZERO)))
            .map_or(0, |x| x.0)
    });
    Ok(TracedLevelSet { polylines, bbox, h, local })
}

/// Largest distance from a vertex of `a` to the segments of `b`.
pub fn directed_hausdorff(a: &Polyline, b: &Polyline) -> f64 {
    a.points.par_iter().map(|&p| b.distance_to(p)).reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance over the vertices of each polyline, measured
/// to the segments of the other.
pub fn hausdorff_distance(a: &Polyline, b: &Polyline) -> f64 {
    assert!(!a.points.is_empty() && !b.points.is_empty(), "hausdorff_distance needs nonempty polylines");
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Symmetric Hausdorff distance between point sets.
pub fn point_set_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let directed = |a: &[Vec2], b: &[Vec2]| {
        a.par_iter()
            .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Outcome of probing one grid node.
enum Probe {
    Single,
    /// Two separated local minima: distance to their equidistant line and
    /// the Newton-projected point when that lies within reach of the node.
    Double(f64, Option<Vec2>),
}

/// Looks for two well separated local minima of the distance from `p` to
/// the curve polygon.
///
/// With `n1`, `n2` the unit vectors from the two feet towards `p`, the gap
/// `d2 − d1` changes at rate `|n2 − n1|` across the equidistant line, so one
/// Newton step lands on it.
fn probe(c: &SampledCurve, p: Vec2, reach: f64) -> Probe {
    let m = c.segment_count();
    let feet: Vec<(f64, Vec2)> = (0..m)
        .map(|i| {
            let (a, b) = c.segment(i);
            let (q, _) = project_onto_segment(p, a, b);
            (p.dist(q), q)
        })
        .collect();
    let minima: Vec<usize> = (0..m)
        .filter(|&i| feet[i].0 <= feet[(i + m - 1) % m].0 && feet[i].0 < feet[(i + 1) % m].0)
        .collect();
    let Some(&first) = minima.iter().min_by(|&&a, &&b| feet[a].0.total_cmp(&feet[b].0)) else {
        return Probe::Single;
    };
    let sep = |i: usize| {
        let d = i.abs_diff(first);
        d.min(m - d)
    };
    let Some(&second) = minima
        .iter()
        .filter(|&&i| sep(i) >= 2)
        .min_by(|&&a, &&b| feet[a].0.total_cmp(&feet[b].0))
    else {
        return Probe::Single;
    };
    let (d1, f1) = feet[first];
    let (d2, f2) = feet[second];
    if d1 == 0.0 {
        return Probe::Single;
    }
    let g = (p - f2) * (1.0 / d2) - (p - f1) * (1.0 / d1);
    let gn = g.norm();
    if gn < 1e-3 {
        return Probe::Double(f64::INFINITY, None);
    }
    let step = (d2 - d1) / gn;
    Probe::Double(step, (step <= reach).then(|| p - g * ((d2 - d1) / (gn * gn))))
}

/// Sub-cell refinement factor used around nodes that see two minima.
pub const REFINE: usize = 8;

/// Brute-force medial axis of a closed curve on a grid of step `h`.
///
/// A grid node whose distance function has two separated local minima,
/// within `h/√2` of equality along the gradient of their gap, is moved onto
/// the equidistant line and reported. The two-minima region pinches to a
/// cusp at the ends of each branch, so cells within two steps of any node
/// lying within `2h` of such a line are resampled [`REFINE`] times finer. Interior and exterior
/// branches are both found.
pub fn medial_axis_oracle(c: &SampledCurve, bbox: BBox, h: f64) -> Result<Vec<Vec2>> {
    if !c.closed {
        return Err(Error::Config("medial axis oracle needs a closed curve".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("grid step must be positive, got {h}")));
    }
    let nx = (bbox.width() / h).ceil() as usize + 1;
    let ny = (bbox.height() / h).ceil() as usize + 1;
    if nx.saturating_mul(ny) > 16_000_000 {
        return Err(Error::Config(format!("medial grid {nx}×{ny} is too large")));
    }
    let node = |i: usize, j: usize| Vec2::new(bbox.min.x + i as f64 * h, bbox.min.y + j as f64 * h);
    let reach = h * std::f64::consts::FRAC_1_SQRT_2;
    let coarse: Vec<((usize, usize), Probe)> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| (0..ny).map(move |j| ((i, j), probe(c, node(i, j), reach))))
        .filter(|(_, p)| matches!(p, Probe::Double(..)))
        .collect();
    let mut cells: Vec<(usize, usize)> = coarse
        .iter()
        .filter(|(_, p)| matches!(p, Probe::Double(s, _) if *s <= 2.0 * h))
        .flat_map(|&((i, j), _)| {
            (i.saturating_sub(2)..(i + 2).min(nx - 1))
                .flat_map(move |a| (j.saturating_sub(2)..(j + 2).min(ny - 1)).map(move |b| (a, b)))
        })
        .collect();
    cells.sort_unstable();
    cells.dedup();
    let fine_h = h / REFINE as f64;
    let fine_reach = fine_h * std::f64::consts::FRAC_1_SQRT_2;
    let fine = cells.par_iter().flat_map_iter(|&(i, j)| {
        let o = node(i, j);
        (0..REFINE).flat_map(move |a| {
            (0..REFINE).filter_map(move |b| {
                let p = o + Vec2::new(a as f64 * fine_h, b as f64 * fine_h);
                match probe(c, p, fine_reach) {
                    Probe::Double(_, q) => q,
                    Probe::Single => None,
                }
            })
        })
    });
    let mut out: Vec<Vec2> = coarse
        .iter()
        .filter_map(|(_, p)| match p {
            Probe::Double(_, q) => *q,
            Probe::Single => None,
        })
        .collect();
    out.par_extend(fine);
    out.retain(|p| bbox.contains(*p));
    Ok(out)
}

/// Bounding box of a curve and the origin, grown by `margin` × its
/// diagonal on every side.
pub fn curve_box(c: &SampledCurve, margin: f64) -> BBox {
    let b = BBox::from_points(c.points.iter().chain([&Vec2::new(0.0, 0.0)])).expect("curve has points");
    b.expanded(margin)
}
