use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use super::*;
use crate::curve::{sample_level_curve, CurveSource};
use crate::series::{series_coefficients, AngularDomain, SeriesMode};
use crate::MongeSurface;

fn ellipse() -> SampledCurve {
    SampledCurve::ellipse(2.0, 1.0, 1024).unwrap()
}

fn umbilic_curve() -> SampledCurve {
    let s = MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (2, 1, 2.0), (1, 2, 1.0), (0, 3, -3.0)])
        .unwrap();
    let p = series_coefficients(&s, SeriesMode::Elliptic, AngularDomain::full_circle(), 1024, 10).unwrap();
    sample_level_curve(&s, &p, 0.01, 1024).unwrap()
}

fn ellipse_frame(u: f64) -> (Vec2, Vec2) {
    let g = Vec2::new(2.0 * u.cos(), u.sin());
    let t = Vec2::new(-2.0 * u.sin(), u.cos());
    (g, t / t.norm())
}

#[test]
fn bitangent_center_examples() {
    let c = bitangent_center(Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, -1.0), Vec2::new(-1.0, 0.0), 1e-3);
    match c {
        Center::Finite(x) => assert!(x.norm() < 1e-15),
        Center::AtInfinity => panic!("expected a finite centre"),
    }
    let t = Vec2::new(0.6, 0.8);
    let c = bitangent_center(Vec2::new(0.0, 0.0), t, Vec2::new(1.0, 0.0), t, 1e-3);
    assert_eq!(c, Center::AtInfinity);
}

#[test]
fn ellipse_pair_centres_lie_on_major_axis() {
    for j in 1..50 {
        let u = 0.06 * j as f64;
        if (u - PI).abs() < 0.05 {
            continue;
        }
        let (g1, t1) = ellipse_frame(u);
        let (g2, t2) = ellipse_frame(-u);
        match bitangent_center(g1, t1, g2, t2, 1e-3) {
            Center::Finite(x) => assert!(x.y.abs() < 1e-10, "u = {u}: {x:?}"),
            Center::AtInfinity => panic!("u = {u}"),
        }
    }
}

#[test]
fn circle_is_degenerate() {
    let c = SampledCurve::ellipse(1.0, 1.0, 256).unwrap();
    match pre_symmetry_set(&c, 128) {
        Err(Error::Degenerate(msg)) => assert!(msg.contains("circle")),
        other => panic!("expected degeneracy, got {other:?}"),
    }
}

#[test]
fn small_inputs_are_rejected() {
    let c = SampledCurve::ellipse(2.0, 1.0, 64).unwrap();
    assert!(matches!(pre_symmetry_set(&c, 128), Err(Error::Config(_))));
    assert!(matches!(pre_symmetry_set(&ellipse(), 8), Err(Error::Config(_))));
}

#[test]
fn wrap_signed_range() {
    for &(x, want) in &[(0.1, 0.1), (-0.1, -0.1), (TAU - 0.1, -0.1), (PI, PI), (-PI, PI), (3.0 * TAU + 1.0, 1.0)] {
        assert!((wrap_signed(x, TAU) - want).abs() < 1e-12, "{x}");
    }
}

#[test]
fn regula_falsi_finds_cubic_root() {
    let f = |x: f64| x * x * x - 0.3;
    let r = regula_falsi(f, f(0.0), f(1.0));
    assert!((r - 0.3f64.cbrt()).abs() < 1e-13);
}

#[test]
fn ellipse_genuine_contours_follow_reflection_lines() {
    let c = ellipse();
    let pss = pre_symmetry_set(&c, 256).unwrap();
    for ct in &pss.contours {
        for s in 0..ct.segment_count() {
            if ct.flags[s] != SegmentFlag::Genuine {
                continue;
            }
            let (a, _) = ct.segment(s);
            let sum = a.0 + a.1;
            let off = wrap_signed(sum, TAU).abs().min(wrap_signed(sum - PI, TAU).abs());
            assert!(off < 1e-8, "vertex {a:?} is {off} off the reflection lines");
        }
    }
    // independent sign check: every sign change of the analytic function on
    // the same node layout sits next to a reflection line or the diagonal
    let n = 256;
    let h = TAU / n as f64;
    let g = |i: usize, j: usize| {
        let (u1, u2) = (i as f64 * h, (j as f64 + 0.5) * h);
        let (g1, t1) = ellipse_frame(u1);
        let (g2, t2) = ellipse_frame(u2);
        let d = 2.0 - 2.0 * (u1 - u2).cos();
        (g1 - g2).dot(t1 - t2) / (d * d)
    };
    for i in 0..n {
        for j in 0..n {
            // edge midpoints in parameter units
            for (i2, j2, u1, u2) in [
                ((i + 1) % n, j, (i as f64 + 0.5) * h, (j as f64 + 0.5) * h),
                (i, (j + 1) % n, i as f64 * h, (j as f64 + 1.0) * h),
            ] {
                if (g(i, j) > 0.0) == (g(i2, j2) > 0.0) {
                    continue;
                }
                let near_line = wrap_signed(u1 + u2, TAU).abs() < 2.0 * h || wrap_signed(u1 + u2 - PI, TAU).abs() < 2.0 * h;
                let near_diag = wrap_signed(u1 - u2, TAU).abs() < 2.0 * h;
                assert!(near_line || near_diag, "unexpected zero near ({u1}, {u2})");
            }
        }
    }
}

#[test]
fn ellipse_symmetry_set_structure() {
    let c = ellipse();
    let pss = pre_symmetry_set(&c, 512).unwrap();
    let ss = symmetry_set(&c, &pss).unwrap();
    assert_eq!(ss.features.endpoints.len(), 4);
    assert_eq!(ss.features.cusps.len(), 0);
    assert_eq!(ss.features.triple_crossings.len(), 0);
    assert_eq!(ss.unbounded_branches(), 0);
    // curvature centres of the vertices: (±(a − b²/a), 0) and (0, ±(b − a²/b))
    let want = [Vec2::new(1.5, 0.0), Vec2::new(-1.5, 0.0), Vec2::new(0.0, 3.0), Vec2::new(0.0, -3.0)];
    for w in want {
        let hit = ss.features.endpoints.iter().any(|e| matches!(e.center, Center::Finite(x) if x.dist(w) < 1e-3));
        assert!(hit, "no endpoint at {w:?}");
    }
    assert_eq!(ss.branches.len(), 2);
    for b in &ss.branches {
        let pts: Vec<Vec2> = b.traces.iter().flat_map(|t| t.centers.iter().flatten().copied()).collect();
        let on_x = pts.iter().all(|p| p.y.abs() < 1e-6);
        let on_y = pts.iter().all(|p| p.x.abs() < 1e-6);
        assert!(on_x || on_y, "branch {} is not on an axis", b.id);
    }
    let medial: Vec<Vec2> = ss.medial_points().map(|p| p.center).collect();
    assert!(medial.iter().all(|p| p.y.abs() < 1e-6 && p.x.abs() <= 1.5 + 1e-3));
    let (lo, hi) = medial.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    assert!(lo < -1.45 && hi > 1.45, "medial extent {lo}..{hi}");
    let nodes = medial_graph(&ss, DEFAULT_JUNCTION_RADIUS);
    assert!(nodes.iter().all(|n| n.degree == 1));
}

fn check_invariants(c: &SampledCurve, ss: &SymmetrySet, tol: f64) {
    for p in &ss.points {
        let mut rs = [0.0; 2];
        for (k, u) in [p.pair.0, p.pair.1].into_iter().enumerate() {
            let x = c.index_of_param(u);
            let g = c.point_at_index(x);
            let t = c.velocity_at_index(x).normalized();
            assert!((g - p.center).dot(t).abs() < tol * p.radius, "tangency at {:?}", p.pair);
            rs[k] = g.dist(p.center);
        }
        assert!((rs[0] - rs[1]).abs() < tol * p.radius, "radii at {:?}", p.pair);
        if p.medial {
            let d = c.points.iter().map(|q| q.dist(p.center)).fold(f64::INFINITY, f64::min);
            assert!(p.radius <= d * (1.0 + DEFAULT_MEDIAL_TOL), "medial point closer to the curve than its radius");
        }
    }
}

#[test]
fn bitangency_and_equal_radii() {
    for c in [ellipse(), umbilic_curve()] {
        let pss = pre_symmetry_set(&c, 512).unwrap();
        let ss = symmetry_set(&c, &pss).unwrap();
        assert!(!ss.points.is_empty());
        check_invariants(&c, &ss, 1e-6);
    }
}

#[test]
fn swap_symmetry_and_band() {
    for c in [ellipse(), umbilic_curve()] {
        let pss = pre_symmetry_set(&c, 256).unwrap();
        assert!(swap_symmetry_defect(&pss) < 1.0);
        for ct in &pss.contours {
            for s in 0..ct.segment_count() {
                let (a, b) = ct.segment(s);
                let mid = wrap_signed(0.5 * ((a.1 - a.0) + (b.1 - b.0)), pss.period);
                if ct.flags[s] == SegmentFlag::Genuine {
                    assert!(mid.abs() >= pss.band);
                }
            }
        }
    }
}

#[test]
fn umbilic_features() {
    let c = umbilic_curve();
    let pss = pre_symmetry_set(&c, 512).unwrap();
    let ss = symmetry_set(&c, &pss).unwrap();
    assert_eq!(ss.features.cusps.len(), 6);
    assert_eq!(ss.features.triple_crossings.len(), 2);
    assert_eq!(ss.features.endpoints.len(), 6);
    let nodes = medial_graph(&ss, DEFAULT_JUNCTION_RADIUS);
    assert_eq!(nodes.iter().filter(|n| n.degree == 3).count(), 1);
    assert!(nodes.iter().all(|n| n.degree == 1 || n.degree == 3));
}

#[test]
fn parallel_stretch_is_linked_into_one_branch() {
    let s = MongeSurface::from_terms(&[(2, 0, 1.0), (2, 1, 2.0), (1, 2, 1.0), (2, 2, 2.0), (1, 3, -1.0), (0, 4, 1.0)])
        .unwrap();
    let p = series_coefficients(&s, SeriesMode::EllipticCog, AngularDomain::full_circle(), 1024, 10).unwrap();
    let c = sample_level_curve(&s, &p, 1e-4, 1024).unwrap();
    let pss = pre_symmetry_set(&c, 512).unwrap();
    assert!(pss.contours.iter().any(|ct| ct.flags.contains(&SegmentFlag::ParallelTangent)));
    let ss = symmetry_set(&c, &pss).unwrap();
    let inflexions = ss.crossings.iter().filter(|x| x.kind == CrossingKind::Inflexion).count();
    assert_eq!(inflexions, 2);
    assert_eq!(ss.branches.len(), 2);
    assert_eq!(ss.unbounded_branches(), 1);
}

fn moved_ellipse(angle: f64, shift: Vec2) -> SampledCurve {
    SampledCurve::closed_from_fn(1024, 0.0, CurveSource::Explicit, |u| {
        let p = Vec2::new(2.0 * u.cos(), u.sin());
        let v = Vec2::new(-2.0 * u.sin(), u.cos());
        let a = Vec2::new(-2.0 * u.cos(), -u.sin());
        (p.rotated(angle) + shift, v.rotated(angle), a.rotated(angle))
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn euclidean_invariance(angle in 0.0..TAU, tx in -5.0..5.0f64, ty in -5.0..5.0f64) {
        let base = moved_ellipse(0.0, Vec2::ZERO);
        let moved = moved_ellipse(angle, Vec2::new(tx, ty));
        let a = symmetry_set(&base, &pre_symmetry_set(&base, 256).unwrap()).unwrap();
        let b = symmetry_set(&moved, &pre_symmetry_set(&moved, 256).unwrap()).unwrap();
        prop_assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            let want = p.center.rotated(angle) + Vec2::new(tx, ty);
            prop_assert!(want.dist(q.center) < 1e-9, "{:?} vs {:?}", want, q.center);
            prop_assert!((p.radius - q.radius).abs() < 1e-9);
        }
        prop_assert_eq!(a.features.endpoints.len(), b.features.endpoints.len());
    }
}
