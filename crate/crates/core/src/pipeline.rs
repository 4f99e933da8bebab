//! End-to-end runs: surface and level in, sampled series curves, features
//! and symmetry sets out.

use crate::curve::{
    find_inflexions, find_vertices, sample_level_curve, sample_level_curve_unchecked, CurveFeature, SampledCurve, DEFAULT_PLATEAU_TOL,
};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::monge::{classify, principal_frame, rotate, MongeSurface, PointClass, PointTag, DEFAULT_CLASSIFY_TOL};
use crate::series::{
    cog_branch_domains, hyperbolic_domain, normalize_hyperbolic, series_coefficients, AngularDomain, LevelSign,
    SeriesMode, SeriesParametrization,
};
use crate::symmetry::{
    medial_graph, pre_symmetry_set_with, symmetry_set_with, MedialNode, PreSymmetrySet, PssOptions, SsOptions,
    SymmetrySet, DEFAULT_JUNCTION_RADIUS, DEFAULT_MEDIAL_TOL, DEFAULT_PARALLEL_TAU,
};

pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_SAMPLES: usize = 1024;
/// Half-width of the θ-range used for hyperbolic branches with no natural
/// bound.
pub const HYPERBOLIC_SPAN: f64 = 2.0;
/// Pull-in of θ-range ends where `r₀` blows up.
pub const DOMAIN_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Series order `N`.
    pub order: usize,
    /// Curve samples `M`.
    pub samples: usize,
    /// Pre-symmetry grid `G`.
    pub grid: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            order: DEFAULT_ORDER,
            samples: DEFAULT_SAMPLES,
            grid: crate::symmetry::DEFAULT_GRID,
        }
    }
}

impl Resolution {
    pub fn doubled(self) -> Self {
        Resolution {
            samples: 2 * self.samples,
            grid: 2 * self.grid,
            ..self
        }
    }
}

/// Map from the working frame back to the input coordinates: undo the axis
/// swap, then the rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameChange {
    pub angle: f64,
    pub swapped: bool,
}

impl FrameChange {
    pub const IDENTITY: FrameChange = FrameChange { angle: 0.0, swapped: false };

    pub fn is_identity(&self) -> bool {
        self.angle == 0.0 && !self.swapped
    }

    pub fn to_input(&self, p: Vec2) -> Vec2 {
        let q = if self.swapped { Vec2::new(p.y, p.x) } else { p };
        let (s, c) = self.angle.sin_cos();
        Vec2::new(q.x * c + q.y * s, -q.x * s + q.y * c)
    }
}

/// Surface prepared for the series ansatz that matches its point class.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub class: PointClass,
    /// Surface in the working frame, scaled for hyperbolic points.
    pub surface: MongeSurface,
    /// Working level is `scale · k`.
    pub scale: f64,
    pub frame: FrameChange,
    pub params: Vec<SeriesParametrization>,
}

impl Prepared {
    /// Tabulates the series for the branches carrying levels of the sign
    /// of `k`.
    pub fn new(s: &MongeSurface, k: f64, order: usize, samples: usize) -> Result<Self> {
        if !(k.is_finite() && k != 0.0) {
            return Err(Error::Config(format!("level must be finite and nonzero, got {k}")));
        }
        let class = classify(s, DEFAULT_CLASSIFY_TOL);
        let frame = FrameChange {
            angle: class.detail.principal_angle,
            swapped: class.detail.axes_swapped,
        };
        match class.tag {
            PointTag::Elliptic | PointTag::Umbilic => {
                let (surface, scale) = if s.kappa1() + s.kappa2() < 0.0 { (s.scaled(-1.0), -1.0) } else { (s.clone(), 1.0) };
                if LevelSign::of(scale * k) != LevelSign::Pos {
                    return Err(Error::Domain(format!("level k = {k} lies on the empty side of an elliptic point")));
                }
                let p = series_coefficients(&surface, SeriesMode::Elliptic, AngularDomain::full_circle(), samples, order)?;
                Ok(Prepared { class, surface, scale, frame: FrameChange::IDENTITY, params: vec![p] })
            }
            PointTag::EllipticCuspOfGauss => {
                let mut surface = principal_frame(s, &class);
                let mut scale = 1.0;
                if surface.coeff(2, 0) < 0.0 {
                    surface = surface.scaled(-1.0);
                    scale = -1.0;
                }
                if LevelSign::of(scale * k) != LevelSign::Pos {
                    return Err(Error::Domain(format!("level k = {k} lies on the empty side of the cusp of Gauss")));
                }
                let p = series_coefficients(&surface, SeriesMode::EllipticCog, AngularDomain::full_circle(), samples, order)?;
                Ok(Prepared { class, surface, scale, frame, params: vec![p] })
            }
            PointTag::Hyperbolic => {
                let rotated = if class.detail.principal_angle == 0.0 { s.clone() } else { rotate(s, class.detail.principal_angle) };
                let (surface, scale, _, swapped) = normalize_hyperbolic(&rotated)?;
                let sign = LevelSign::of(scale * k);
                let mode = if sign == LevelSign::Pos { SeriesMode::HyperbolicPos } else { SeriesMode::HyperbolicNeg };
                let domain = hyperbolic_domain(&surface, sign, HYPERBOLIC_SPAN)?;
                let domain = if domain.bounds().1 < HYPERBOLIC_SPAN { domain.shrunk(DOMAIN_MARGIN)? } else { domain };
                let p = series_coefficients(&surface, mode, domain, samples, order)?;
                let frame = FrameChange { angle: class.detail.principal_angle, swapped };
                Ok(Prepared { class, surface, scale, frame, params: vec![p] })
            }
            PointTag::HyperbolicCuspOfGauss => {
                let surface = principal_frame(s, &class);
                let sign = LevelSign::of(k);
                let params = cog_branch_domains(&surface, DOMAIN_MARGIN)?
                    .into_iter()
                    .filter(|d| d.sign == sign)
                    .map(|d| {
                        let mode = if sign == LevelSign::Pos { SeriesMode::HyperbolicCogPos } else { SeriesMode::HyperbolicCogNeg };
                        series_coefficients(&surface, mode, d, samples, order)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Prepared { class, surface, scale: 1.0, frame, params })
            }
            other => Err(Error::Classification(format!("no series parametrization for a point classified {other}"))),
        }
    }

    /// Sampled curves of `f = k`, one per branch, in the working frame.
    pub fn curves(&self, k: f64, samples: usize) -> Result<Vec<SampledCurve>> {
        self.params
            .iter()
            .map(|p| sample_level_curve(&self.surface, p, self.scale * k, samples))
            .collect()
    }

    /// As [`Prepared::curves`] but also beyond the validity radius.
    pub fn curves_unchecked(&self, k: f64, samples: usize) -> Result<Vec<SampledCurve>> {
        self.params
            .iter()
            .map(|p| sample_level_curve_unchecked(&self.surface, p, self.scale * k, samples))
            .collect()
    }

    /// Largest admissible `|k|` over the prepared branches.
    pub fn max_level(&self) -> f64 {
        let m = self.params[0].mode.leading_degree() as i32;
        let t = self.params.iter().map(|p| p.t_max).fold(f64::INFINITY, f64::min);
        t.powi(m) / self.scale.abs()
    }
}

/// The single closed section `f = k` near an elliptic point.
pub fn closed_section(s: &MongeSurface, k: f64, order: usize, samples: usize) -> Result<(Prepared, SampledCurve)> {
    let prep = Prepared::new(s, k, order, samples)?;
    let mut curves = prep.curves(k, samples)?;
    if curves.len() != 1 || !curves[0].closed {
        return Err(Error::Domain(format!(
            "the section at a point classified {} is not a closed curve",
            prep.class.tag
        )));
    }
    Ok((prep, curves.remove(0)))
}

/// The section `f = k` truncated at each of `orders`, sampled at a common
/// level even where a low order is beyond its validity radius.
pub fn order_comparison(s: &MongeSurface, k: f64, orders: &[usize], samples: usize) -> Result<Vec<(usize, Vec<SampledCurve>)>> {
    orders
        .iter()
        .map(|&n| Ok((n, Prepared::new(s, k, n, samples)?.curves_unchecked(k, samples)?)))
        .collect()
}

/// Everything computed for one closed section.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub prepared: Prepared,
    pub curve: SampledCurve,
    pub vertices: Vec<CurveFeature>,
    pub inflexions: Vec<CurveFeature>,
    pub pss: PreSymmetrySet,
    pub ss: SymmetrySet,
    pub medial: Vec<MedialNode>,
}

/// Tolerances a run may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative curvature change below which neighbouring extrema merge.
    pub plateau: f64,
    /// `|T₁ − T₂|` below which a bitangent circle is treated as a line.
    pub parallel_tau: f64,
    /// Relative slack in the medial test `radius ≤ distance`.
    pub medial: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            plateau: DEFAULT_PLATEAU_TOL,
            parallel_tau: DEFAULT_PARALLEL_TAU,
            medial: DEFAULT_MEDIAL_TOL,
        }
    }
}

pub fn analyze(s: &MongeSurface, k: f64, res: Resolution) -> Result<Analysis> {
    analyze_with(s, k, res, Tolerances::default())
}

pub fn analyze_with(s: &MongeSurface, k: f64, res: Resolution, tol: Tolerances) -> Result<Analysis> {
    let (prepared, curve) = closed_section(s, k, res.order, res.samples)?;
    let vertices = find_vertices(&curve, tol.plateau);
    let inflexions = find_inflexions(&curve, tol.plateau);
    let pss = pre_symmetry_set_with(&curve, &PssOptions { grid: res.grid, tau: tol.parallel_tau, ..PssOptions::default() })?;
    let ss = symmetry_set_with(&curve, &pss, &SsOptions { medial_tol: tol.medial, ..SsOptions::default() })?;
    let medial = medial_graph(&ss, DEFAULT_JUNCTION_RADIUS);
    Ok(Analysis { prepared, curve, vertices, inflexions, pss, ss, medial })
}

/// Counts reported for a section; compared across resolutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub vertices: usize,
    pub inflexions: usize,
    pub endpoints: usize,
    pub cusps: usize,
    pub triple_crossings: usize,
    pub branches: usize,
    pub unbounded: usize,
    /// Degrees of the medial graph nodes, ascending.
    pub medial_degrees: Vec<usize>,
}

impl Counts {
    pub fn of(a: &Analysis) -> Self {
        let mut medial_degrees: Vec<usize> = a.medial.iter().map(|n| n.degree).collect();
        medial_degrees.sort_unstable();
        Counts {
            vertices: a.vertices.len(),
            inflexions: a.inflexions.len(),
            endpoints: a.ss.features.endpoints.len(),
            cusps: a.ss.features.cusps.len(),
            triple_crossings: a.ss.features.triple_crossings.len(),
            branches: a.ss.branches.len(),
            unbounded: a.ss.unbounded_branches(),
            medial_degrees,
        }
    }

    /// One junction of degree 3, every other node a free end.
    pub fn medial_is_y(&self) -> bool {
        self.medial_degrees.iter().filter(|&&d| d == 3).count() == 1 && self.medial_degrees.iter().all(|&d| d == 1 || d == 3)
    }
}

/// Counts at `res` and at doubled `M` and `G`.
#[derive(Debug, Clone)]
pub struct StableCounts {
    pub counts: Counts,
    pub doubled: Counts,
}

impl StableCounts {
    pub fn stable(&self) -> bool {
        self.counts == self.doubled
    }
}

pub fn stable_counts(s: &MongeSurface, k: f64, res: Resolution) -> Result<StableCounts> {
    Ok(StableCounts {
        counts: Counts::of(&analyze(s, k, res)?),
        doubled: Counts::of(&analyze(s, k, res.doubled())?),
    })
}

/// Outcome of the small-`k` sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub k: f64,
    pub counts: StableCounts,
    /// `(k, counts)` for every level tried, largest first.
    pub tried: Vec<(f64, Counts)>,
}

/// Walks down the levels `k_max·10^(−j)` and returns the first level whose
/// counts are stable under doubling and agree with the next level down.
pub fn stability_sweep(s: &MongeSurface, levels: usize, res: Resolution) -> Result<Sweep> {
    let probe = 64.max(res.samples / 8);
    let (prep, sign) = match Prepared::new(s, 1.0, res.order, probe) {
        Ok(p) => (p, 1.0),
        Err(_) => (Prepared::new(s, -1.0, res.order, probe)?, -1.0),
    };
    let top = prep.max_level();
    if !(top > 0.0) {
        return Err(Error::Domain("the series has no admissible level".into()));
    }
    let k0 = 10f64.powf((0.9 * top).log10().floor());
    let mut tried = Vec::new();
    let mut prev: Option<(f64, StableCounts)> = None;
    for j in 0..levels {
        let k = sign * k0 * 10f64.powi(-(j as i32));
        let sc = stable_counts(s, k, res)?;
        tried.push((k, sc.counts.clone()));
        if let Some((pk, p)) = prev.take() {
            if p.stable() && sc.stable() && p.counts == sc.counts {
                return Ok(Sweep { k: pk, counts: p, tried });
            }
        }
        prev = Some((k, sc));
    }
    Err(Error::Domain(format!("counts did not settle over {levels} levels below k = {k0}")))
}
