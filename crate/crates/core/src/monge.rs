//! Surfaces `z = f(x, y)` in Monge form: polynomial tables, classification of
//! the origin, scaling and rotation of coordinates.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::roots;
use crate::scalar::Real;

/// Default relative tolerance for the zero tests in [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Polynomial `f(x, y) = Σ coeff(a, b) xᵃ yᵇ` with `f(0) = 0` and `df(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MongeSurface {
    coeffs: BTreeMap<(u32, u32), f64>,
    max_degree: u32,
}

impl MongeSurface {
    /// Builds a surface from `((a, b), value)` entries. Exact zeros are
    /// dropped; repeated keys are summed.
    pub fn new<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((u32, u32), f64)>,
    {
        let mut coeffs = BTreeMap::new();
        for ((a, b), v) in terms {
            if !v.is_finite() {
                return Err(Error::InvalidSurface(format!(
                    "non-finite coefficient for x^{a} y^{b}"
                )));
            }
            *coeffs.entry((a, b)).or_insert(0.0) += v;
        }
        coeffs.retain(|_, v| *v != 0.0);
        for (key, name) in [((0, 0), "constant"), ((1, 0), "linear x"), ((0, 1), "linear y")] {
            if coeffs.contains_key(&key) {
                return Err(Error::InvalidSurface(format!(
                    "nonzero {name} term; the tangent plane at the origin must be z = 0"
                )));
            }
        }
        let max_degree = coeffs.keys().map(|&(a, b)| a + b).max().unwrap_or(0);
        if max_degree < 2 {
            return Err(Error::InvalidSurface(
                "surface must have terms of degree at least 2".into(),
            ));
        }
        Ok(MongeSurface { coeffs, max_degree })
    }

    /// Convenience constructor from `(a, b, value)` triples.
    pub fn from_terms(terms: &[(u32, u32, f64)]) -> Result<Self> {
        Self::new(terms.iter().map(|&(a, b, v)| ((a, b), v)))
    }

    pub fn coeff(&self, a: u32, b: u32) -> f64 {
        self.coeffs.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Nonzero terms in `(a, b)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn kappa1(&self) -> f64 {
        2.0 * self.coeff(2, 0)
    }

    pub fn kappa2(&self) -> f64 {
        2.0 * self.coeff(0, 2)
    }

    /// `[b0, b1, b2, b3]`, the coefficients of x³, x²y, xy², y³.
    pub fn cubic(&self) -> [f64; 4] {
        [self.coeff(3, 0), self.coeff(2, 1), self.coeff(1, 2), self.coeff(0, 3)]
    }

    pub fn scaled(&self, k: f64) -> MongeSurface {
        MongeSurface {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&key, &v)| (key, v * k))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
            max_degree: self.max_degree,
        }
    }

    /// Exchanges the roles of x and y.
    pub fn swapped_axes(&self) -> MongeSurface {
        MongeSurface {
            coeffs: self.coeffs.iter().map(|(&(a, b), &v)| ((b, a), v)).collect(),
            max_degree: self.max_degree,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_generic(&x, &y)
    }

    /// Evaluates `f` over any [`Real`] scalar.
    pub fn eval_generic<T: Real>(&self, x: &T, y: &T) -> T {
        let n = self.max_degree as usize;
        let xp = powers(x, n);
        let yp = powers(y, n);
        self.terms().fold(T::zero(), |acc, ((a, b), v)| {
            acc + (xp[a as usize].clone() * yp[b as usize].clone()).scale(v)
        })
    }

    /// `(∂f/∂x, ∂f/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for ((a, b), v) in self.terms() {
            if a > 0 {
                gx += v * a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32);
            }
            if b > 0 {
                gy += v * b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1);
            }
        }
        (gx, gy)
    }
}

impl fmt::Display for MongeSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by_key(|&((a, b), _)| (a + b, std::cmp::Reverse(a)));
        for ((a, b), v) in terms {
            let sign = if v < 0.0 { "-" } else { "+" };
            if first {
                if v < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = v.abs();
            if mag != 1.0 {
                write!(f, "{mag}")?;
            }
            for (var, e) in [("x", a), ("y", b)] {
                match e {
                    0 => {}
                    1 => write!(f, "{var}")?,
                    _ => write!(f, "{var}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn powers<T: Real>(x: &T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    for i in 0..n {
        let next = out[i].clone() * x.clone();
        out.push(next);
    }
    out
}

/// How `(x, y)` are replaced when forming the angular functions `p_i(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionMode {
    /// `(cos θ, sin θ)`.
    Circular,
    /// `(cosh θ, sinh θ)`, the `z > 0` hyperbolic branch.
    HyperbolicPos,
    /// `(sinh θ, cosh θ)`, the `z < 0` hyperbolic branch.
    HyperbolicNeg,
    /// `(cos θ, sin θ)` with x of weight 2 and y of weight 1.
    WeightedCog,
}

impl SubstitutionMode {
    pub fn weighted(self) -> bool {
        matches!(self, SubstitutionMode::WeightedCog)
    }

    /// The substituted pair for `θ`.
    pub fn substitute<T: Real>(self, theta: &T) -> (T, T) {
        match self {
            SubstitutionMode::Circular | SubstitutionMode::WeightedCog => (theta.cos(), theta.sin()),
            SubstitutionMode::HyperbolicPos => (theta.cosh(), theta.sinh()),
            SubstitutionMode::HyperbolicNeg => (theta.sinh(), theta.cosh()),
        }
    }
}

/// Degree of the monomial xᵃyᵇ under the given grading.
pub fn term_degree(a: u32, b: u32, weighted: bool) -> u32 {
    if weighted {
        2 * a + b
    } else {
        a + b
    }
}

/// `p_i(θ)`: the degree-`i` part of `f` (weighted degree for
/// [`SubstitutionMode::WeightedCog`]) evaluated at the substituted pair.
pub fn homogeneous_part(s: &MongeSurface, i: u32, theta: f64, mode: SubstitutionMode) -> f64 {
    let (c, sn) = mode.substitute(&theta);
    homogeneous_part_at(s, i, &c, &sn, mode.weighted())
}

/// `p_i` at an explicit `(c, s)` pair.
pub fn homogeneous_part_at<T: Real>(s: &MongeSurface, i: u32, c: &T, sn: &T, weighted: bool) -> T {
    let n = i as usize;
    let cp = powers(c, n);
    let sp = powers(sn, n);
    s.terms()
        .filter(|&((a, b), _)| term_degree(a, b, weighted) == i)
        .fold(T::zero(), |acc, ((a, b), v)| {
            acc + (cp[a as usize].clone() * sp[b as usize].clone()).scale(v)
        })
}

/// All `p_i` for `i` in `lo..=hi` at once.
pub(crate) fn homogeneous_parts<T: Real>(
    s: &MongeSurface,
    lo: u32,
    hi: u32,
    c: &T,
    sn: &T,
    weighted: bool,
) -> Vec<T> {
    let top = s
        .terms()
        .map(|((a, b), _)| a.max(b))
        .max()
        .unwrap_or(0) as usize;
    let cp = powers(c, top);
    let sp = powers(sn, top);
    let mut out = vec![T::zero(); (hi - lo + 1) as usize];
    for ((a, b), v) in s.terms() {
        let d = term_degree(a, b, weighted);
        if d < lo || d > hi {
            continue;
        }
        let slot = &mut out[(d - lo) as usize];
        *slot = slot.clone() + (cp[a as usize].clone() * sp[b as usize].clone()).scale(v);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointTag {
    Elliptic,
    Umbilic,
    Hyperbolic,
    EllipticCuspOfGauss,
    HyperbolicCuspOfGauss,
    OrdinaryParabolic,
    Unclassified,
}

impl fmt::Display for PointTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PointTag::Elliptic => "Elliptic",
            PointTag::Umbilic => "Umbilic",
            PointTag::Hyperbolic => "Hyperbolic",
            PointTag::EllipticCuspOfGauss => "EllipticCuspOfGauss",
            PointTag::HyperbolicCuspOfGauss => "HyperbolicCuspOfGauss",
            PointTag::OrdinaryParabolic => "OrdinaryParabolic",
            PointTag::Unclassified => "Unclassified",
        };
        f.write_str(name)
    }
}

/// Quantities the classification was decided on, measured in the principal
/// frame (after [`ClassDetail::principal_angle`] rotation and optional axis swap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDetail {
    pub kappa1: f64,
    pub kappa2: f64,
    /// Coefficient of y³ in the principal frame; parabolic points only.
    pub b3: Option<f64>,
    /// `b₂² − 2κ₁c₄`; parabolic points with vanishing `b₃` only.
    pub cusp_discriminant: Option<f64>,
    /// Rotation (as in [`rotate`]) that diagonalizes the quadratic part.
    pub principal_angle: f64,
    /// Whether x and y were exchanged so that `κ₂ = 0` at a parabolic point.
    pub axes_swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointClass {
    pub tag: PointTag,
    pub detail: ClassDetail,
}

/// Classifies the tangency at the origin.
///
/// Zero tests use the relative threshold `tol · max(|κ₁|, |κ₂|, 1)`; the cusp
/// discriminant is compared against `tol · max(b₂², |2κ₁c₄|, 1)`.
pub fn classify(s: &MongeSurface, tol: f64) -> PointClass {
    let frame = principal_frame_raw(s);
    let (mut surf, angle) = (frame.0, frame.1);
    let mut k1 = surf.kappa1();
    let mut k2 = surf.kappa2();
    let scale = tol * k1.abs().max(k2.abs()).max(1.0);
    let mut swapped = false;
    if k1.abs() <= scale && k2.abs() > scale {
        surf = surf.swapped_axes();
        std::mem::swap(&mut k1, &mut k2);
        swapped = true;
    }
    let mut detail = ClassDetail {
        kappa1: k1,
        kappa2: k2,
        b3: None,
        cusp_discriminant: None,
        principal_angle: angle,
        axes_swapped: swapped,
    };
    let z1 = k1.abs() <= scale;
    let z2 = k2.abs() <= scale;
    let tag = if z1 && z2 {
        PointTag::Unclassified
    } else if z2 {
        let [_, _, b2, b3] = surf.cubic();
        let c4 = surf.coeff(0, 4);
        detail.b3 = Some(b3);
        if b3.abs() > scale {
            PointTag::OrdinaryParabolic
        } else {
            let disc = b2 * b2 - 2.0 * k1 * c4;
            detail.cusp_discriminant = Some(disc);
            let disc_scale = tol * (b2 * b2).max((2.0 * k1 * c4).abs()).max(1.0);
            if disc.abs() <= disc_scale {
                PointTag::Unclassified
            } else if disc < 0.0 {
                PointTag::EllipticCuspOfGauss
            } else {
                PointTag::HyperbolicCuspOfGauss
            }
        }
    } else if k1 * k2 < 0.0 {
        PointTag::Hyperbolic
    } else if (k1 - k2).abs() <= scale {
        PointTag::Umbilic
    } else {
        PointTag::Elliptic
    };
    PointClass { tag, detail }
}

fn principal_frame_raw(s: &MongeSurface) -> (MongeSurface, f64) {
    let (a, b, c) = (s.coeff(2, 0), s.coeff(1, 1), s.coeff(0, 2));
    if b == 0.0 {
        return (s.clone(), 0.0);
    }
    // the uv coefficient after rotating by φ is (a − c) sin 2φ + b cos 2φ
    let angle = 0.5 * (-b).atan2(a - c);
    let mut r = rotate(s, angle);
    r.coeffs.remove(&(1, 1));
    (r, angle)
}

/// The surface expressed in the frame recorded by `class`: rotated to
/// principal axes and, at parabolic points, with axes swapped so that `κ₂ = 0`.
pub fn principal_frame(s: &MongeSurface, class: &PointClass) -> MongeSurface {
    let mut r = if class.detail.principal_angle == 0.0 {
        s.clone()
    } else {
        let mut r = rotate(s, class.detail.principal_angle);
        r.coeffs.remove(&(1, 1));
        r
    };
    if class.detail.axes_swapped {
        r = r.swapped_axes();
    }
    r
}

/// Scales an umbilic surface so its quadratic part is `x² + y²`.
///
/// Returns the scaled surface and the factor `λ = 2/κ`; the level set
/// `f = k` is the level set `λf = λk`.
pub fn normalize_umbilic(s: &MongeSurface) -> Result<(MongeSurface, f64)> {
    let class = classify(s, DEFAULT_CLASSIFY_TOL);
    if class.tag != PointTag::Umbilic {
        return Err(Error::Classification(format!(
            "normalize_umbilic needs an umbilic, found {}",
            class.tag
        )));
    }
    let kappa = 0.5 * (class.detail.kappa1 + class.detail.kappa2);
    let lambda = 2.0 / kappa;
    if lambda == 1.0 {
        return Ok((s.clone(), 1.0));
    }
    let mut out = s.scaled(lambda);
    // pin the quadratic part exactly
    out.coeffs.insert((2, 0), 1.0);
    out.coeffs.insert((0, 2), 1.0);
    out.coeffs.remove(&(1, 1));
    Ok((out, lambda))
}

fn binomial_row(n: u32) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for k in 0..n {
        let next = row[k as usize] * (n - k) as f64 / (k + 1) as f64;
        row.push(next);
    }
    row
}

/// Substitutes `x = u cos φ + v sin φ`, `y = −u sin φ + v cos φ` and expands
/// every monomial exactly, degree by degree.
pub fn rotate(s: &MongeSurface, phi: f64) -> MongeSurface {
    let (sn, cs) = phi.sin_cos();
    let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for ((a, b), v) in s.terms() {
        let ca = binomial_row(a);
        let cb = binomial_row(b);
        // (c u + s v)^a = Σ_i C(a,i) cⁱ s^(a−i) uⁱ v^(a−i)
        // (−s u + c v)^b = Σ_j C(b,j) (−s)ʲ c^(b−j) uʲ v^(b−j)
        for i in 0..=a {
            let fa = ca[i as usize] * cs.powi(i as i32) * sn.powi((a - i) as i32);
            for j in 0..=b {
                let fb = cb[j as usize] * (-sn).powi(j as i32) * cs.powi((b - j) as i32);
                let key = (i + j, a + b - i - j);
                *out.entry(key).or_insert(0.0) += v * fa * fb;
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    MongeSurface {
        coeffs: out,
        max_degree: s.max_degree,
    }
}

/// Coefficients (constant term first) of
/// `pU⁶ + 6qU⁵ − 15pU⁴ − 20qU³ + 15pU² + 6qU − p` with `p = b₂ − b₀`,
/// `q = b₃ − b₁`; its roots `U = tan(φ/2)` are the rotations making the
/// x³ and xy² coefficients equal.
pub fn equal_ends_sextic(p: f64, q: f64) -> [f64; 7] {
    [-p, 6.0 * q, 15.0 * p, -20.0 * q, -15.0 * p, 6.0 * q, p]
}

/// Real roots of [`equal_ends_sextic`].
pub fn equal_ends_sextic_roots(p: f64, q: f64) -> Vec<f64> {
    let tol = 1e-8 * (1.0 + p.abs() + q.abs());
    roots::real_roots(&equal_ends_sextic(p, q), tol)
}

/// `B₀ − B₂` of the rotated cubic, from the closed-form rotation of the cubic.
pub fn cubic_end_difference(cubic: [f64; 4], phi: f64) -> f64 {
    let [b0, b1, b2, b3] = cubic;
    let (s, c) = phi.sin_cos();
    let big_b0 = b0 * c.powi(3) - b1 * c * c * s + b2 * c * s * s - b3 * s.powi(3);
    let big_b2 = 3.0 * b0 * c * s * s - b1 * s.powi(3) + 2.0 * b1 * c * c * s
        - 2.0 * b2 * c * s * s
        + b2 * c.powi(3)
        - 3.0 * b3 * c * c * s;
    big_b0 - big_b2
}

/// A rotation making the cubic coefficients of x³ and xy² equal.
#[derive(Debug, Clone)]
pub struct CubicRotation {
    /// Angle in `[0, π)`.
    pub phi: f64,
    pub surface: MongeSurface,
}

/// Rotations of a normalized umbilic that equalize the x³ and xy²
/// coefficients, one per `φ mod π`.
pub fn rotate_to_equal_cubic_ends(s: &MongeSurface, tol: f64) -> Result<Vec<CubicRotation>> {
    let class = classify(s, DEFAULT_CLASSIFY_TOL);
    if class.tag != PointTag::Umbilic {
        return Err(Error::Classification(format!(
            "rotate_to_equal_cubic_ends needs an umbilic, found {}",
            class.tag
        )));
    }
    let cubic = s.cubic();
    let [b0, b1, b2, b3] = cubic;
    let (p, q) = (b2 - b0, b3 - b1);
    let mut phis: Vec<f64> = Vec::new();
    if p == 0.0 {
        phis.push(0.0);
    }
    for u in equal_ends_sextic_roots(p, q) {
        phis.push(2.0 * u.atan());
    }
    let mut out: Vec<CubicRotation> = Vec::new();
    for phi in phis {
        let phi = polish_angle(cubic, phi).rem_euclid(PI);
        let phi = if PI - phi < 1e-12 { 0.0 } else { phi };
        if out.iter().any(|r| angle_gap_mod_pi(r.phi, phi) < 1e-9) {
            continue;
        }
        let surface = rotate(s, phi);
        let [nb0, _, nb2, _] = surface.cubic();
        if (nb0 - nb2).abs() <= tol {
            out.push(CubicRotation { phi, surface });
        }
    }
    out.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    Ok(out)
}

fn angle_gap_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn polish_angle(cubic: [f64; 4], mut phi: f64) -> f64 {
    let h = 1e-7;
    for _ in 0..6 {
        let g = cubic_end_difference(cubic, phi);
        let dg = (cubic_end_difference(cubic, phi + h) - cubic_end_difference(cubic, phi - h)) / (2.0 * h);
        if dg == 0.0 {
            break;
        }
        let next = phi - g / dg;
        if cubic_end_difference(cubic, next).abs() >= g.abs() {
            break;
        }
        phi = next;
    }
    phi
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn cubic_umbilic() -> MongeSurface {
        MongeSurface::from_terms(&[
            (2, 0, 1.0),
            (0, 2, 1.0),
            (3, 0, 1.0),
            (2, 1, 2.0),
            (1, 2, 1.0),
            (0, 3, -3.0),
        ])
        .unwrap()
    }

    fn cog_example(c4: f64) -> MongeSurface {
        MongeSurface::from_terms(&[
            (2, 0, 1.0),
            (2, 1, 2.0),
            (1, 2, 1.0),
            (2, 2, 2.0),
            (1, 3, -1.0),
            (0, 4, c4),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_tangent_plane_violations() {
        assert!(MongeSurface::from_terms(&[(0, 0, 1.0), (2, 0, 1.0)]).is_err());
        assert!(MongeSurface::from_terms(&[(0, 1, 0.5), (2, 0, 1.0)]).is_err());
        assert!(MongeSurface::from_terms(&[(2, 0, 0.0)]).is_err());
        let s = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 0.0), (1, 0, 0.0)]).unwrap();
        assert_eq!(s.coeff(0, 2), 0.0);
        assert_eq!(s.terms().count(), 1);
    }

    #[test]
    fn classifies_reference_surfaces() {
        assert_eq!(classify(&cubic_umbilic(), 1e-9).tag, PointTag::Umbilic);
        let ex1 = classify(&cog_example(1.0), 1e-9);
        assert_eq!(ex1.tag, PointTag::EllipticCuspOfGauss);
        assert_eq!(ex1.detail.kappa1, 2.0);
        assert_eq!(ex1.detail.cusp_discriminant, Some(1.0 - 4.0));
        assert_eq!(classify(&cog_example(6.0), 1e-9).tag, PointTag::EllipticCuspOfGauss);
        let hyp_cog =
            MongeSurface::from_terms(&[(2, 0, 1.0), (1, 2, 3.0), (1, 3, 3.0), (0, 4, 1.0)]).unwrap();
        let c = classify(&hyp_cog, 1e-9);
        assert_eq!(c.tag, PointTag::HyperbolicCuspOfGauss);
        assert_eq!(c.detail.cusp_discriminant, Some(9.0 - 4.0));
        let saddle = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, -1.0)]).unwrap();
        assert_eq!(classify(&saddle, 1e-9).tag, PointTag::Hyperbolic);
    }

    #[test]
    fn classification_edge_cases() {
        let ell = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 2.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(classify(&ell, 1e-9).tag, PointTag::Elliptic);
        let parab = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(classify(&parab, 1e-9).tag, PointTag::OrdinaryParabolic);
        let flat = MongeSurface::from_terms(&[(3, 0, 1.0), (0, 4, 1.0)]).unwrap();
        assert_eq!(classify(&flat, 1e-9).tag, PointTag::Unclassified);
        // b2² = 2κ₁c₄ exactly: 4 = 2·2·1
        let degenerate = MongeSurface::from_terms(&[(2, 0, 1.0), (1, 2, 2.0), (0, 4, 1.0)]).unwrap();
        assert_eq!(classify(&degenerate, 1e-9).tag, PointTag::Unclassified);
    }

    #[test]
    fn parabolic_axis_is_renamed() {
        // y² + x²y + yx² ... with κ₁ = 0: swap puts the curved direction on x
        let s = MongeSurface::from_terms(&[(0, 2, 1.0), (2, 1, 1.0), (4, 0, 1.0)]).unwrap();
        let c = classify(&s, 1e-9);
        assert!(c.detail.axes_swapped);
        assert_eq!(c.detail.kappa1, 2.0);
        assert_eq!(c.tag, PointTag::EllipticCuspOfGauss);
        let p = principal_frame(&s, &c);
        assert_eq!(p.coeff(2, 0), 1.0);
        assert_eq!(p.coeff(1, 2), 1.0);
    }

    #[test]
    fn rotated_elliptic_is_still_elliptic() {
        let ell = MongeSurface::from_terms(&[(2, 0, 0.7), (0, 2, 2.0), (2, 1, 1.0)]).unwrap();
        let r = rotate(&ell, 0.4);
        assert!(r.coeff(1, 1).abs() > 0.1);
        let c = classify(&r, 1e-9);
        assert_eq!(c.tag, PointTag::Elliptic);
        let mut ks = [c.detail.kappa1, c.detail.kappa2];
        ks.sort_by(f64::total_cmp);
        assert!((ks[0] - 1.4).abs() < 1e-12 && (ks[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_umbilic_scales_quadratic() {
        let s = MongeSurface::from_terms(&[(2, 0, 3.0), (0, 2, 3.0), (3, 0, 1.0)]).unwrap();
        let (n, lambda) = normalize_umbilic(&s).unwrap();
        assert!((lambda - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(n.coeff(2, 0), 1.0);
        assert!((n.coeff(3, 0) - 1.0 / 3.0).abs() < 1e-15);
        let (same, l) = normalize_umbilic(&cubic_umbilic()).unwrap();
        assert_eq!(l, 1.0);
        assert_eq!(same, cubic_umbilic());
        assert!(normalize_umbilic(&cog_example(1.0)).is_err());
    }

    #[test]
    fn rotate_examples() {
        let f = cubic_umbilic();
        assert_eq!(rotate(&f, 0.0), f);
        let cube = MongeSurface::from_terms(&[(2, 0, 1.0), (3, 0, 1.0)]).unwrap();
        let r = rotate(&cube, PI / 2.0);
        assert!((r.coeff(0, 3) - 1.0).abs() < 1e-15);
        assert!(r.coeff(3, 0).abs() < 1e-15);
        assert!((r.coeff(0, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotated_cubic_matches_closed_forms() {
        let f = cubic_umbilic();
        let [b0, b1, b2, b3] = f.cubic();
        for &phi in &[0.3, 1.1, -2.0, 2.9] {
            let r = rotate(&f, phi);
            let (s, c) = f64::sin_cos(phi);
            let big_b0 = b0 * c.powi(3) - b1 * c * c * s + b2 * c * s * s - b3 * s.powi(3);
            let big_b2 = 3.0 * b0 * c * s * s - b1 * s.powi(3) + 2.0 * b1 * c * c * s
                - 2.0 * b2 * c * s * s
                + b2 * c.powi(3)
                - 3.0 * b3 * c * c * s;
            assert!((r.coeff(3, 0) - big_b0).abs() < 1e-13);
            assert!((r.coeff(1, 2) - big_b2).abs() < 1e-13);
            assert!((r.coeff(2, 0) - 1.0).abs() < 1e-14 && (r.coeff(0, 2) - 1.0).abs() < 1e-14);
            assert!(r.coeff(1, 1).abs() < 1e-14);
        }
    }

    #[test]
    fn equal_ends_rotation_for_cubic_umbilic() {
        let rots = rotate_to_equal_cubic_ends(&cubic_umbilic(), 1e-10).unwrap();
        assert!(rots.len() == 1 || rots.len() == 3);
        for r in &rots {
            let [nb0, _, nb2, _] = r.surface.cubic();
            assert!((nb0 - nb2).abs() < 1e-10);
            assert!((0.0..PI).contains(&r.phi));
        }
    }

    #[test]
    fn equal_ends_with_p_zero_contains_identity() {
        // b0 = b2 already
        let s = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 0.5), (1, 2, 0.5), (0, 3, 1.0)])
            .unwrap();
        let rots = rotate_to_equal_cubic_ends(&s, 1e-10).unwrap();
        assert!(rots.iter().any(|r| r.phi == 0.0));
        assert_eq!(rots.len(), 3);
    }

    #[test]
    fn homogeneous_parts_examples() {
        let f = cubic_umbilic();
        assert!((homogeneous_part(&f, 2, 0.0, SubstitutionMode::Circular) - f.kappa1() / 2.0).abs() < 1e-15);
        assert!((homogeneous_part(&f, 3, 0.0, SubstitutionMode::Circular) - 1.0).abs() < 1e-15);
        let ex1 = cog_example(1.0);
        let p4 = homogeneous_part(&ex1, 4, PI / 2.0, SubstitutionMode::WeightedCog);
        assert!((p4 - 1.0).abs() < 1e-15);
        // ½κ₁c² + b₂cs² + c₄s⁴
        let th = 0.8;
        let (s, c) = f64::sin_cos(th);
        let want = c * c + c * s * s + s.powi(4);
        assert!((homogeneous_part(&ex1, 4, th, SubstitutionMode::WeightedCog) - want).abs() < 1e-15);
        // hyperbolic substitutions
        let sad = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, -0.25)]).unwrap();
        let (ch, sh) = (th.cosh(), th.sinh());
        let pos = homogeneous_part(&sad, 2, th, SubstitutionMode::HyperbolicPos);
        let neg = homogeneous_part(&sad, 2, th, SubstitutionMode::HyperbolicNeg);
        assert!((pos - (ch * ch - 0.25 * sh * sh)).abs() < 1e-14);
        assert!((neg - (sh * sh - 0.25 * ch * ch)).abs() < 1e-14);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(cubic_umbilic().to_string(), "x^2 + y^2 + x^3 + 2x^2y + xy^2 - 3y^3");
    }

    fn surface_strategy() -> impl Strategy<Value = MongeSurface> {
        (0.2f64..3.0, 0.2f64..3.0, -1.0f64..1.0, proptest::collection::vec(-3.0f64..3.0, 9)).prop_map(|(k1, k2, m, hi)| {
            let mut t = vec![(2, 0, 0.5 * k1), (1, 1, m), (0, 2, 0.5 * k2)];
            let mut it = hi.into_iter();
            for (a, b) in [(3, 0), (2, 1), (1, 2), (0, 3), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)] {
                t.push((a, b, it.next().unwrap()));
            }
            MongeSurface::from_terms(&t).unwrap()
        })
    }

    fn close(a: &MongeSurface, b: &MongeSurface, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<_> = a.terms().chain(b.terms()).map(|(k, _)| k).collect();
        keys.into_iter().all(|(i, j)| (a.coeff(i, j) - b.coeff(i, j)).abs() < tol)
    }

    proptest! {
        #[test]
        fn rotations_compose(s in surface_strategy(), a in -PI..PI, b in -PI..PI) {
            prop_assert!(close(&rotate(&rotate(&s, a), b), &rotate(&s, a + b), 1e-10));
        }

        #[test]
        fn rotation_preserves_values(s in surface_strategy(), phi in -PI..PI, x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let (sn, cs) = phi.sin_cos();
            let r = rotate(&s, phi);
            let want = s.eval(x * cs + y * sn, -x * sn + y * cs);
            prop_assert!((r.eval(x, y) - want).abs() < 1e-11);
        }

        #[test]
        fn elliptic_class_is_rotation_invariant(s in surface_strategy(), phi in -PI..PI) {
            let c = classify(&s, DEFAULT_CLASSIFY_TOL);
            prop_assume!(matches!(c.tag, PointTag::Elliptic | PointTag::Umbilic));
            let r = classify(&rotate(&s, phi), DEFAULT_CLASSIFY_TOL);
            prop_assert_eq!(r.tag, c.tag);
            let sorted = |c: &PointClass| {
                let mut k = [c.detail.kappa1, c.detail.kappa2];
                k.sort_by(f64::total_cmp);
                k
            };
            let (a, b) = (sorted(&c), sorted(&r));
            prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }

        #[test]
        fn umbilic_class_is_rotation_invariant(k in 0.2f64..3.0, cubic in proptest::array::uniform4(-3.0f64..3.0), phi in -PI..PI) {
            let s = MongeSurface::from_terms(&[
                (2, 0, k), (0, 2, k), (3, 0, cubic[0]), (2, 1, cubic[1]), (1, 2, cubic[2]), (0, 3, cubic[3]),
            ]).unwrap();
            prop_assert_eq!(classify(&s, DEFAULT_CLASSIFY_TOL).tag, PointTag::Umbilic);
            prop_assert_eq!(classify(&rotate(&s, phi), DEFAULT_CLASSIFY_TOL).tag, PointTag::Umbilic);
        }

        #[test]
        fn sextic_roots_pair_under_inversion(p in -3.0f64..3.0, q in -3.0f64..3.0) {
            prop_assume!(p.abs() > 1e-3);
            let roots = equal_ends_sextic_roots(p, q);
            prop_assert!(roots.len() == 2 || roots.len() == 6, "{} roots", roots.len());
            for &u in &roots {
                prop_assume!(u.abs() > 1e-6);
                let v = -1.0 / u;
                let hit = roots.iter().any(|&w| (w - v).abs() < 1e-7 * (1.0 + v.abs()));
                prop_assert!(hit, "−1/{} missing from {:?}", u, roots);
            }
        }
    }
}
