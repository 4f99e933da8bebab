//! Truncated series `r(t, θ) = r₀ + r₁t + … + r_N t^N` parametrizing the
//! level curves of a Monge-form surface near the origin.
//!
//! Substituting the ansatz into `f` and dividing by `t^m` gives
//! `Σᵢ p_i(θ) t^(i−m) r^i = ±1` with `m = 2` (elliptic and hyperbolic points)
//! or `m = 4` with weighted degrees (cusps of Gauss). The coefficients `r_n`
//! follow by equating powers of `t`; see [`recurrence`].

pub mod recurrence;

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::monge::{
    classify, homogeneous_parts, term_degree, MongeSurface, PointTag, SubstitutionMode,
    DEFAULT_CLASSIFY_TOL,
};
use crate::roots;
use crate::scalar::{Jet, Real};

use recurrence::{solve_radial_series, RecurrenceFailure};

pub const DEFAULT_SAMPLES: usize = 1024;
pub const DEFAULT_ORDER: usize = 10;
/// Residual budget used when choosing `t_max`, as a fraction of `t^m`.
pub const DEFAULT_RESIDUAL_FRACTION: f64 = 0.01;
/// Distance kept from the zeros of the leading part on bounded domains.
pub const DEFAULT_DOMAIN_MARGIN: f64 = 0.05;
/// Half-width used for hyperbolic domains that are unrestricted in θ.
pub const DEFAULT_THETA_SPAN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelSign {
    Pos,
    Neg,
}

impl LevelSign {
    pub fn value(self) -> f64 {
        match self {
            LevelSign::Pos => 1.0,
            LevelSign::Neg => -1.0,
        }
    }

    pub fn of(k: f64) -> LevelSign {
        if k < 0.0 {
            LevelSign::Neg
        } else {
            LevelSign::Pos
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// `[0, 2π)`, periodic.
    FullCircle,
    /// `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

/// Range of θ together with the branch `z = ±t^m` it parametrizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularDomain {
    pub kind: DomainKind,
    pub sign: LevelSign,
}

impl AngularDomain {
    pub fn full_circle() -> Self {
        AngularDomain {
            kind: DomainKind::FullCircle,
            sign: LevelSign::Pos,
        }
    }

    pub fn interval(lo: f64, hi: f64, sign: LevelSign) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("empty or invalid angular interval [{lo}, {hi}]")));
        }
        Ok(AngularDomain {
            kind: DomainKind::Interval { lo, hi },
            sign,
        })
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, DomainKind::FullCircle)
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::FullCircle => (0.0, TAU),
            DomainKind::Interval { lo, hi } => (lo, hi),
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        match self.kind {
            DomainKind::FullCircle => theta.is_finite(),
            DomainKind::Interval { lo, hi } => {
                let slack = 1e-12 * (hi - lo);
                theta >= lo - slack && theta <= hi + slack
            }
        }
    }

    /// Pulls both ends of an interval in by `margin`.
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        match self.kind {
            DomainKind::FullCircle => Ok(*self),
            DomainKind::Interval { lo, hi } => AngularDomain::interval(lo + margin, hi - margin, self.sign),
        }
    }

    /// Sample spacing for `m` samples.
    pub fn spacing(&self, m: usize) -> f64 {
        match self.kind {
            DomainKind::FullCircle => TAU / m as f64,
            DomainKind::Interval { lo, hi } => (hi - lo) / (m - 1) as f64,
        }
    }

    /// Uniform samples: `2πj/m` on the circle, endpoints included on intervals.
    pub fn sample_angles(&self, m: usize) -> Vec<f64> {
        let h = self.spacing(m);
        let (lo, _) = self.bounds();
        (0..m).map(|j| lo + h * j as f64).collect()
    }
}

/// Which ansatz the parametrization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesMode {
    /// `(t r cos θ, t r sin θ)`, `z = t²`.
    Elliptic,
    /// `(t r cosh θ, t r sinh θ)`, `z = t²`.
    HyperbolicPos,
    /// `(t r sinh θ, t r cosh θ)`, `z = −t²`.
    HyperbolicNeg,
    /// `((t r)² cos θ, t r sin θ)`, `z = t⁴`.
    EllipticCog,
    /// As `EllipticCog` on a branch where the weighted quartic part is positive.
    HyperbolicCogPos,
    /// As `EllipticCog` with `z = −t⁴`, where the weighted quartic part is negative.
    HyperbolicCogNeg,
}

impl SeriesMode {
    pub fn substitution(self) -> SubstitutionMode {
        match self {
            SeriesMode::Elliptic => SubstitutionMode::Circular,
            SeriesMode::HyperbolicPos => SubstitutionMode::HyperbolicPos,
            SeriesMode::HyperbolicNeg => SubstitutionMode::HyperbolicNeg,
            SeriesMode::EllipticCog | SeriesMode::HyperbolicCogPos | SeriesMode::HyperbolicCogNeg => {
                SubstitutionMode::WeightedCog
            }
        }
    }

    /// `m`: the (weighted) degree of the leading part, so that `z = ±t^m`.
    pub fn leading_degree(self) -> u32 {
        if self.is_cog() {
            4
        } else {
            2
        }
    }

    pub fn is_cog(self) -> bool {
        matches!(
            self,
            SeriesMode::EllipticCog | SeriesMode::HyperbolicCogPos | SeriesMode::HyperbolicCogNeg
        )
    }

    pub fn sign(self) -> LevelSign {
        match self {
            SeriesMode::HyperbolicNeg | SeriesMode::HyperbolicCogNeg => LevelSign::Neg,
            _ => LevelSign::Pos,
        }
    }

    fn accepts(self, tag: PointTag) -> bool {
        match self {
            SeriesMode::Elliptic => matches!(tag, PointTag::Elliptic | PointTag::Umbilic),
            SeriesMode::HyperbolicPos | SeriesMode::HyperbolicNeg => tag == PointTag::Hyperbolic,
            SeriesMode::EllipticCog => tag == PointTag::EllipticCuspOfGauss,
            SeriesMode::HyperbolicCogPos | SeriesMode::HyperbolicCogNeg => {
                tag == PointTag::HyperbolicCuspOfGauss
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SeriesMode::Elliptic => "elliptic",
            SeriesMode::HyperbolicPos => "hyperbolic+",
            SeriesMode::HyperbolicNeg => "hyperbolic-",
            SeriesMode::EllipticCog => "elliptic-cog",
            SeriesMode::HyperbolicCogPos => "hyperbolic-cog+",
            SeriesMode::HyperbolicCogNeg => "hyperbolic-cog-",
        }
    }
}

/// Tabulated `r_i(θ_j)` with exact first and second θ-derivatives.
#[derive(Debug, Clone)]
pub struct SeriesParametrization {
    pub mode: SeriesMode,
    pub domain: AngularDomain,
    pub theta: Vec<f64>,
    /// `r[i][j] = r_i(θ_j)`.
    pub r: Vec<Vec<f64>>,
    pub r_dtheta: Vec<Vec<f64>>,
    pub r_dtheta2: Vec<Vec<f64>>,
    pub order: usize,
    /// Largest `t` of the sweep for which the residual stays within budget.
    pub t_max: f64,
}

impl SeriesParametrization {
    pub fn samples(&self) -> usize {
        self.theta.len()
    }

    fn locate(&self, theta: f64) -> Result<(usize, usize, f64, f64)> {
        if !self.domain.contains(theta) {
            return Err(Error::Domain(format!(
                "θ = {theta} lies outside the parametrized domain {:?}",
                self.domain.bounds()
            )));
        }
        let m = self.samples();
        let h = self.domain.spacing(m);
        match self.domain.kind {
            DomainKind::FullCircle => {
                let x = theta.rem_euclid(TAU) / h;
                let j = (x.floor() as usize).min(m - 1);
                Ok((j, (j + 1) % m, x - j as f64, h))
            }
            DomainKind::Interval { lo, .. } => {
                let x = ((theta - lo) / h).max(0.0);
                let j = (x.floor() as usize).min(m - 2);
                Ok((j, j + 1, (x - j as f64).min(1.0), h))
            }
        }
    }

    /// `r_0..r_N` at an arbitrary θ by cubic Hermite interpolation of the
    /// tabulated values and derivatives.
    pub fn coefficients_at(&self, theta: f64) -> Result<Vec<f64>> {
        let (j0, j1, u, h) = self.locate(theta)?;
        let (h00, h10, h01, h11) = hermite_basis(u);
        Ok((0..=self.order)
            .map(|i| {
                h00 * self.r[i][j0]
                    + h10 * h * self.r_dtheta[i][j0]
                    + h01 * self.r[i][j1]
                    + h11 * h * self.r_dtheta[i][j1]
            })
            .collect())
    }

    /// `t = |k|^(1/m)` for the level `f = k`.
    pub fn level_to_t(&self, k: f64) -> Result<f64> {
        if k == 0.0 || LevelSign::of(k) != self.domain.sign {
            return Err(Error::Domain(format!(
                "level k = {k} is incompatible with the {} branch",
                match self.domain.sign {
                    LevelSign::Pos => "z > 0",
                    LevelSign::Neg => "z < 0",
                }
            )));
        }
        let t = k.abs().powf(1.0 / self.mode.leading_degree() as f64);
        if t > self.t_max {
            return Err(Error::Domain(format!(
                "level k = {k} needs t = {t:.6}, beyond the validity radius t_max = {:.6}",
                self.t_max
            )));
        }
        Ok(t)
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}

fn leading_scale(s: &MongeSurface, mode: SeriesMode) -> f64 {
    let m = mode.leading_degree();
    let w = mode.is_cog();
    s.terms()
        .filter(|&((a, b), _)| term_degree(a, b, w) == m)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}

/// `r₀..=r_order` at one angle, over any scalar type.
pub fn radial_coefficients<T: Real>(s: &MongeSurface, mode: SeriesMode, theta: &T, order: usize) -> Result<Vec<T>> {
    let m = mode.leading_degree();
    let (c, sn) = mode.substitution().substitute(theta);
    let parts = homogeneous_parts(s, m, m + order as u32, &c, &sn, mode.is_cog());
    let floor = 1e-12 * leading_scale(s, mode).max(f64::MIN_POSITIVE);
    solve_radial_series(&parts, m as usize, order, mode.sign().value(), floor).map_err(
        |RecurrenceFailure::Pivot { leading }| {
            Error::Domain(format!(
                "leading part p{m}(θ) = {leading:e} at θ = {} has the wrong sign or vanishes",
                theta.value()
            ))
        },
    )
}

/// `r(t) = Σ r_i tⁱ` by Horner's rule.
pub fn radial_sum<T: Real>(coeffs: &[T], t: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
}

/// Planar point of the ansatz for a given radial factor `r = r(t, θ)`.
pub fn curve_point<T: Real>(mode: SeriesMode, t: &T, theta: &T, radial: &T) -> (T, T) {
    let tr = t.clone() * radial.clone();
    match mode {
        SeriesMode::Elliptic => (tr.clone() * theta.cos(), tr * theta.sin()),
        SeriesMode::HyperbolicPos => (tr.clone() * theta.cosh(), tr * theta.sinh()),
        SeriesMode::HyperbolicNeg => (tr.clone() * theta.sinh(), tr * theta.cosh()),
        SeriesMode::EllipticCog | SeriesMode::HyperbolicCogPos | SeriesMode::HyperbolicCogNeg => {
            (tr.clone() * tr.clone() * theta.cos(), tr * theta.sin())
        }
    }
}

/// `f(x(t, θ), y(t, θ)) − sign·t^m` for explicit coefficients.
pub fn residual_from_coefficients<T: Real>(s: &MongeSurface, mode: SeriesMode, coeffs: &[T], t: &T, theta: &T) -> T {
    let r = radial_sum(coeffs, t);
    let (x, y) = curve_point(mode, t, theta, &r);
    let level = t.powi(mode.leading_degree() as usize).scale(mode.sign().value());
    s.eval_generic(&x, &y) - level
}

fn check_mode(s: &MongeSurface, mode: SeriesMode, domain: &AngularDomain) -> Result<()> {
    let class = classify(s, DEFAULT_CLASSIFY_TOL);
    if !mode.accepts(class.tag) {
        return Err(Error::Classification(format!(
            "{} parametrization does not apply to a point classified {}",
            mode.name(),
            class.tag
        )));
    }
    if domain.sign != mode.sign() {
        return Err(Error::Domain(format!(
            "domain branch {:?} does not match mode {}",
            domain.sign,
            mode.name()
        )));
    }
    let closed_mode = matches!(mode, SeriesMode::Elliptic | SeriesMode::EllipticCog);
    if closed_mode != domain.is_closed() {
        return Err(Error::Domain(format!(
            "mode {} needs {} domain",
            mode.name(),
            if closed_mode { "a full-circle" } else { "an interval" }
        )));
    }
    if mode.is_cog() {
        let scale = DEFAULT_CLASSIFY_TOL * class.detail.kappa1.abs().max(1.0);
        for ((a, b), v) in s.terms() {
            if term_degree(a, b, true) < 4 && v.abs() > scale {
                return Err(Error::Domain(format!(
                    "term x^{a} y^{b} has weighted degree below 4; put the surface in its principal frame first"
                )));
            }
        }
    }
    Ok(())
}

/// Tabulates `r₀..r_N` on `samples` angles of `domain` and picks `t_max`.
pub fn series_coefficients(
    s: &MongeSurface,
    mode: SeriesMode,
    domain: AngularDomain,
    samples: usize,
    order: usize,
) -> Result<SeriesParametrization> {
    if samples < 4 {
        return Err(Error::Config(format!("need at least 4 θ samples, got {samples}")));
    }
    if order == 0 {
        return Err(Error::Config("series order must be at least 1".into()));
    }
    check_mode(s, mode, &domain)?;
    let theta = domain.sample_angles(samples);
    let jets: Vec<Vec<Jet>> = theta
        .par_iter()
        .map(|&th| radial_coefficients(s, mode, &Jet::variable(th), order))
        .collect::<Result<_>>()?;
    let column = |f: fn(&Jet) -> f64| -> Vec<Vec<f64>> {
        (0..=order)
            .map(|i| jets.iter().map(|js| f(&js[i])).collect())
            .collect()
    };
    let mut p = SeriesParametrization {
        mode,
        domain,
        r: column(|j| j.v),
        r_dtheta: column(|j| j.d1),
        r_dtheta2: column(|j| j.d2),
        theta,
        order,
        t_max: 0.0,
    };
    p.t_max = select_t_max(s, &p, DEFAULT_RESIDUAL_FRACTION);
    Ok(p)
}

/// Largest `t` in a quarter-octave sweep such that, at that `t` and every
/// smaller one in the sweep, `max_θ |residual| ≤ fraction · t^m`.
pub fn select_t_max(s: &MongeSurface, p: &SeriesParametrization, fraction: f64) -> f64 {
    let m = p.mode.leading_degree() as i32;
    let mut best = 0.0;
    for j in (0..=100).rev() {
        let t = 2f64.powf((8 - j) as f64 / 4.0);
        let budget = fraction * t.powi(m);
        let ok = (0..p.samples()).all(|col| {
            let coeffs: Vec<f64> = (0..=p.order).map(|i| p.r[i][col]).collect();
            let res = residual_from_coefficients(s, p.mode, &coeffs, &t, &p.theta[col]);
            res.abs() <= budget
        });
        if !ok {
            break;
        }
        best = t;
    }
    best
}

/// Point `(x, y)` of the parametrized level curve at `(t, θ)`.
pub fn evaluate_curve(p: &SeriesParametrization, t: f64, theta: f64) -> Result<Vec2> {
    let coeffs = p.coefficients_at(theta)?;
    let r = radial_sum(&coeffs, &t);
    let (x, y) = curve_point(p.mode, &t, &theta, &r);
    Ok(Vec2::new(x, y))
}

/// `f(x(t, θ), y(t, θ)) − sign·t^m`.
pub fn residual(s: &MongeSurface, p: &SeriesParametrization, t: f64, theta: f64) -> Result<f64> {
    let coeffs = p.coefficients_at(theta)?;
    Ok(residual_from_coefficients(s, p.mode, &coeffs, &t, &theta))
}

/// `α > 0` with the quadratic part proportional to `x² − α²y²`.
pub fn hyperbolic_alpha(s: &MongeSurface) -> Result<f64> {
    let class = classify(s, DEFAULT_CLASSIFY_TOL);
    if class.tag != PointTag::Hyperbolic {
        return Err(Error::Classification(format!(
            "hyperbolic domain needs a hyperbolic point, found {}",
            class.tag
        )));
    }
    let (k1, k2) = (s.kappa1(), s.kappa2());
    if s.coeff(1, 1).abs() > DEFAULT_CLASSIFY_TOL * k1.abs().max(k2.abs()) || k1 <= 0.0 {
        return Err(Error::Domain(
            "hyperbolic domain needs a diagonal quadratic part with positive x² coefficient".into(),
        ));
    }
    Ok((-k2 / k1).sqrt())
}

/// Scales a hyperbolic surface so its quadratic part is `x² − α²y²`
/// (swapping axes first if the x² coefficient is negative).
///
/// Returns the surface, the factor `λ` applied to `f`, `α`, and whether the
/// axes were swapped.
pub fn normalize_hyperbolic(s: &MongeSurface) -> Result<(MongeSurface, f64, f64, bool)> {
    let mut surf = s.clone();
    let mut swapped = false;
    if surf.kappa1() < 0.0 {
        surf = surf.swapped_axes();
        swapped = true;
    }
    let alpha = hyperbolic_alpha(&surf)?;
    let lambda = 2.0 / surf.kappa1();
    Ok((surf.scaled(lambda), lambda, alpha, swapped))
}

/// θ-range on which `r₀` is real for the `z = ±t²` hyperbolic branch.
///
/// Bounded ranges are `|θ| < acosh(α/√(α²−1))` (z > 0, α > 1) and
/// `|θ| < acosh(1/√(1−α²))` (z < 0, α < 1); otherwise every θ is admissible
/// and the range is clamped to `|θ| ≤ theta_span`. Endpoints of bounded
/// ranges are where `p₂` vanishes, so shrink before tabulating.
pub fn hyperbolic_domain(s: &MongeSurface, sign: LevelSign, theta_span: f64) -> Result<AngularDomain> {
    let alpha = hyperbolic_alpha(s)?;
    let bound = match sign {
        LevelSign::Pos if alpha > 1.0 => Some((alpha / (alpha * alpha - 1.0).sqrt()).acosh()),
        LevelSign::Neg if alpha < 1.0 => Some((1.0 / (1.0 - alpha * alpha).sqrt()).acosh()),
        _ => None,
    };
    let half = bound.unwrap_or(theta_span);
    AngularDomain::interval(-half, half, sign)
}

/// The four θ-intervals between the zeros of the weighted quartic part
/// `p₄(θ) = ½κ₁cos²θ + b₂cosθ sin²θ + c₄sin⁴θ` at a hyperbolic cusp of Gauss,
/// each pulled in by `margin` and tagged with the sign of `p₄` on it.
pub fn cog_branch_domains(s: &MongeSurface, margin: f64) -> Result<Vec<AngularDomain>> {
    let class = classify(s, DEFAULT_CLASSIFY_TOL);
    match class.tag {
        PointTag::HyperbolicCuspOfGauss => {}
        PointTag::EllipticCuspOfGauss => {
            return Err(Error::Domain(
                "no branch split: p4 is nonzero for all θ at an elliptic cusp of Gauss".into(),
            ))
        }
        other => {
            return Err(Error::Classification(format!(
                "branch domains need a hyperbolic cusp of Gauss, found {other}"
            )))
        }
    }
    let roots = cog_quartic_zeros(s)?;
    if roots.len() != 4 {
        return Err(Error::Classification(format!(
            "expected 4 zeros of p4, found {}",
            roots.len()
        )));
    }
    let p4 = |th: f64| crate::monge::homogeneous_part(s, 4, th, SubstitutionMode::WeightedCog);
    let edges = [
        (roots[3] - TAU, roots[0]),
        (roots[0], roots[1]),
        (roots[1], roots[2]),
        (roots[2], roots[3]),
    ];
    edges
        .iter()
        .map(|&(lo, hi)| {
            let sign = if p4(0.5 * (lo + hi)) > 0.0 {
                LevelSign::Pos
            } else {
                LevelSign::Neg
            };
            AngularDomain::interval(lo + margin, hi - margin, sign)
        })
        .collect()
}

/// Zeros of `p₄` in `(0, 2π)`, ascending. With `c = cos θ`, `p₄ = 0` is the
/// quartic `c₄c⁴ − b₂c³ + (½κ₁ − 2c₄)c² + b₂c + c₄ = 0`; each root in
/// `(−1, 1)` gives the pair `θ = acos c` and `2π − acos c`.
pub fn cog_quartic_zeros(s: &MongeSurface) -> Result<Vec<f64>> {
    let half_k1 = s.coeff(2, 0);
    let b2 = s.coeff(1, 2);
    let c4 = s.coeff(0, 4);
    let quartic = [c4, b2, half_k1 - 2.0 * c4, -b2, c4];
    let scale = 1.0 + half_k1.abs() + b2.abs() + c4.abs();
    let mut cs: Vec<f64> = roots::real_roots(&quartic, 1e-10 * scale)
        .into_iter()
        .filter(|c| c.abs() < 1.0)
        .collect();
    cs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut thetas: Vec<f64> = cs
        .iter()
        .flat_map(|&c| {
            let th = c.acos();
            [th, TAU - th]
        })
        .collect();
    thetas.sort_by(f64::total_cmp);
    if thetas.iter().any(|&t| !(0.0 < t && t < TAU)) {
        return Err(Error::Domain("p4 zero on the axis θ ∈ {0, π}".into()));
    }
    Ok(thetas)
}
