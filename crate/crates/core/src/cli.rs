//! Command-line front end: argument parsing, run configuration and the
//! subcommands that turn pipeline results into CSV, SVG and summaries.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::curve::{curvature_profile, feature_locus, find_inflexions, find_vertices, CurveFeature, FeatureKind, SampledCurve};
use crate::error::{Error, Result};
use crate::geom::{BBox, Vec2};
use crate::io::{fmt_f64, parse_surface_file, write_file, Table};
use crate::monge::{MongeSurface, PointClass};
use crate::oracle::{curve_box, hausdorff_distance, medial_axis_oracle, point_set_hausdorff, trace_level_set, Polyline, DEFAULT_STEP_FRACTION};
use crate::pipeline::{analyze_with, order_comparison, Analysis, Counts, FrameChange, Prepared, Resolution, Tolerances};
use crate::svg::{render_svg, Arrow, Layer, Style};
use crate::symmetry::{BranchKind, Center, PreSymmetrySet, SegmentFlag, SsFeature};

pub const MIN_ORDER: usize = 1;
pub const MIN_SAMPLES: usize = 64;
pub const MIN_GRID: usize = 128;
/// Truncation orders drawn next to the chosen one in order comparisons.
pub const COMPARISON_ORDERS: [usize; 3] = [1, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Param,
    Levelset,
    Features,
    Presym,
    Symset,
    Medial,
    OracleCompare,
}

impl Command {
    /// Commands that need a closed section and hence `k > 0`.
    fn needs_closed(self) -> bool {
        matches!(self, Command::Features | Command::Presym | Command::Symset | Command::Medial)
    }

    fn needs_level(self) -> bool {
        !matches!(self, Command::Classify | Command::Param)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "sympar", version, about = "Level sets near singular tangent sections, with symmetry sets and medial axes")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Surface file: one `a b value` line per term value·xᵃyᵇ.
    #[arg(long)]
    pub surface: PathBuf,
    /// Level(s) k, comma separated.
    #[arg(long = "k", value_delimiter = ',', allow_hyphen_values = true)]
    pub k: Vec<f64>,
    /// Series order N.
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    /// Curve and θ-table samples M.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Pre-symmetry grid G.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Oracle grid step h (default: curve diameter / 400).
    #[arg(long)]
    pub oracle_step: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Parallel-tangent threshold on |T₁ − T₂|.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Relative slack of the medial test.
    #[arg(long)]
    pub medial_tol: Option<f64>,
    /// Relative curvature plateau for merging extrema.
    #[arg(long)]
    pub plateau_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: PathBuf,
    pub command: Command,
    pub k: Vec<f64>,
    pub resolution: Resolution,
    pub oracle_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let d = Tolerances::default();
        let cfg = RunConfig {
            surface: cli.surface,
            command: cli.command,
            k: cli.k,
            resolution: Resolution {
                order: cli.terms,
                samples: cli.samples,
                grid: cli.grid,
            },
            oracle_step: cli.oracle_step,
            out: cli.out,
            format: cli.format,
            tolerances: Tolerances {
                plateau: cli.plateau_tol.unwrap_or(d.plateau),
                parallel_tau: cli.tau.unwrap_or(d.parallel_tau),
                medial: cli.medial_tol.unwrap_or(d.medial),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.resolution;
        if r.order < MIN_ORDER {
            return Err(Error::Config(format!("--terms must be at least {MIN_ORDER}")));
        }
        if r.samples < MIN_SAMPLES {
            return Err(Error::Config(format!("--samples must be at least {MIN_SAMPLES}")));
        }
        if r.grid < MIN_GRID {
            return Err(Error::Config(format!("--grid must be at least {MIN_GRID}")));
        }
        if self.command.needs_level() && self.k.is_empty() {
            return Err(Error::Config("this command needs at least one level --k".into()));
        }
        for &k in &self.k {
            if !k.is_finite() || k == 0.0 {
                return Err(Error::Config(format!("level k = {k} must be finite and nonzero")));
            }
            if self.command.needs_closed() && k < 0.0 {
                return Err(Error::Config(format!("level k = {k} must be positive for a closed section")));
            }
        }
        if let Some(h) = self.oracle_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("--oracle-step must be positive, got {h}")));
            }
        }
        let t = self.tolerances;
        for (name, v) in [("--tau", t.parallel_tau), ("--medial-tol", t.medial), ("--plateau-tol", t.plateau)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(())
    }
}

/// What a run produced: summary lines, and the artifact text when no
/// output path was given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub summary: String,
    pub artifact: Option<String>,
    pub written: Option<PathBuf>,
}

enum Artifact {
    Table(Table),
    Plot(Vec<Layer>),
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let s = parse_surface_file(&cfg.surface)?;
    let mut summary = String::new();
    let artifact = match cfg.command {
        Command::Classify => classify_cmd(&s, &mut summary),
        Command::Param => param_cmd(&s, cfg, &mut summary)?,
        Command::Levelset => levelset_cmd(&s, cfg, &mut summary)?,
        Command::Features => features_cmd(&s, cfg, &mut summary)?,
        Command::Presym => presym_cmd(&s, cfg, &mut summary)?,
        Command::Symset => symset_cmd(&s, cfg, &mut summary, false)?,
        Command::Medial => symset_cmd(&s, cfg, &mut summary, true)?,
        Command::OracleCompare => oracle_cmd(&s, cfg, &mut summary)?,
    };
    let text = match artifact {
        Artifact::Table(t) => {
            if cfg.format == Format::Svg {
                return Err(Error::Config("this command has no SVG output; use --format csv".into()));
            }
            t.to_csv_string()?
        }
        Artifact::Plot(layers) => render_svg(&layers)?,
    };
    let mut report = Report { summary, ..Report::default() };
    match &cfg.out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            report.written = Some(p.clone());
        }
        None if matches!(cfg.command, Command::Param | Command::Levelset) || cfg.format == Format::Svg => {
            report.artifact = Some(text);
        }
        None => {}
    }
    Ok(report)
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

/// Prepends a `k` column when more than one level contributes rows.
fn merge_by_level(tables: Vec<(f64, Table)>) -> Table {
    if tables.len() == 1 {
        return tables.into_iter().next().expect("one table").1;
    }
    let mut out = Table::new(std::iter::once("k".to_string()).chain(tables[0].1.header.iter().cloned()));
    for (k, t) in tables {
        for r in t.rows {
            out.push(std::iter::once(f(k)).chain(r).collect());
        }
    }
    out
}

fn classify_cmd(s: &MongeSurface, out: &mut String) -> Artifact {
    let c: PointClass = crate::monge::classify(s, crate::monge::DEFAULT_CLASSIFY_TOL);
    let d = c.detail;
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), f);
    let rows = [
        ("class", c.tag.to_string()),
        ("kappa1", f(d.kappa1)),
        ("kappa2", f(d.kappa2)),
        ("b3", opt(d.b3)),
        ("cusp_discriminant", opt(d.cusp_discriminant)),
        ("principal_angle", f(d.principal_angle)),
        ("axes_swapped", d.axes_swapped.to_string()),
    ];
    let _ = writeln!(out, "{}", c.tag);
    let mut t = Table::new(["key", "value"]);
    for (k, v) in rows {
        if k != "class" {
            let _ = writeln!(out, "{k}: {v}");
        }
        t.push(vec![k.into(), v]);
    }
    Artifact::Table(t)
}

fn param_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String) -> Result<Artifact> {
    let k = cfg.k.first().copied().unwrap_or(1.0);
    let r = cfg.resolution;
    let prep = Prepared::new(s, k, r.order, r.samples)?;
    let _ = writeln!(out, "mode: {}", prep.params[0].mode.name());
    let _ = writeln!(out, "branches: {}", prep.params.len());
    let _ = writeln!(out, "t_max: {}", f(prep.params.iter().map(|p| p.t_max).fold(f64::INFINITY, f64::min)));
    let _ = writeln!(out, "max_level: {}", f(prep.max_level()));
    let mut t = Table::new(std::iter::once("theta".to_string()).chain((0..=r.order).map(|i| format!("r{i}"))));
    for p in &prep.params {
        for (j, th) in p.theta.iter().enumerate() {
            t.push(std::iter::once(f(*th)).chain((0..=r.order).map(|i| f(p.r[i][j]))).collect());
        }
    }
    Ok(Artifact::Table(t))
}

fn to_input(frame: &FrameChange, pts: &[Vec2]) -> Vec<Vec2> {
    pts.iter().map(|&p| frame.to_input(p)).collect()
}

/// Box around every branch and the origin for level-set tracing.
fn trace_box(curves: &[SampledCurve]) -> BBox {
    let origin = Vec2::new(0.0, 0.0);
    let pts = curves.iter().flat_map(|c| &c.points).chain([&origin]);
    BBox::from_points(pts).expect("nonempty").expanded(0.25)
}

fn oracle_step(cfg: &RunConfig, c: &SampledCurve) -> f64 {
    cfg.oracle_step.unwrap_or_else(|| c.diameter() * DEFAULT_STEP_FRACTION)
}

fn levelset_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String) -> Result<Artifact> {
    let r = cfg.resolution;
    let mut tables = Vec::new();
    let mut curves_layer = Layer::new("level-sets", Style::solid("black", 1.5));
    let mut trace_layer = Layer::new("oracle-trace", Style::dashed("#1f77b4", 1.0));
    let mut last = None;
    for &k in &cfg.k {
        let prep = Prepared::new(s, k, r.order, r.samples)?;
        let curves = prep.curves(k, r.samples)?;
        let mut t = Table::new(["theta", "x", "y"]);
        for c in &curves {
            let pts = to_input(&prep.frame, &c.points);
            for (th, p) in c.params.iter().zip(&pts) {
                t.push(vec![f(*th), f(p.x), f(p.y)]);
            }
            curves_layer.paths.push((pts, c.closed));
        }
        let _ = writeln!(
            out,
            "k={}: {} branch(es), {} samples, {}",
            f(k),
            curves.len(),
            r.samples,
            if curves.iter().all(|c| c.closed) { "closed" } else { "open" }
        );
        if cfg.format == Format::Svg {
            let tr = trace_level_set(&prep.surface, prep.scale * k, trace_box(&curves), oracle_step(cfg, &curves[0]))?;
            if curves[0].closed {
                let p = tr.local_polyline();
                trace_layer.paths.push((to_input(&prep.frame, &p.points), p.closed));
            } else {
                for p in &tr.polylines {
                    trace_layer.paths.push((to_input(&prep.frame, &p.points), p.closed));
                }
            }
        }
        tables.push((k, t));
        last = Some(k);
    }
    if cfg.format == Format::Csv {
        return Ok(Artifact::Table(merge_by_level(tables)));
    }
    let k = last.expect("at least one level");
    let mut layers = vec![curves_layer, trace_layer];
    let colours = ["#d62728", "#ff7f0e", "#2ca02c"];
    for ((n, curves), colour) in order_comparison(s, k, &COMPARISON_ORDERS, r.samples)?.into_iter().zip(colours) {
        let frame = Prepared::new(s, k, n, MIN_SAMPLES)?.frame;
        let mut l = Layer::new(&format!("order-{n}"), Style::solid(colour, 0.8));
        for c in curves {
            l.paths.push((to_input(&frame, &c.points), c.closed));
        }
        layers.push(l);
    }
    Ok(Artifact::Plot(layers))
}

fn feature_rows(t: &mut Table, frame: &FrameChange, curve: &SampledCurve, feats: &[CurveFeature]) {
    let kappa = curvature_profile(curve);
    for ft in feats {
        let p = frame.to_input(ft.point);
        let i = ft.index.round() as usize % curve.len();
        t.push(vec![ft.kind.name().into(), f(ft.param), f(p.x), f(p.y), f(kappa[i])]);
    }
}

fn features_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String) -> Result<Artifact> {
    let r = cfg.resolution;
    let mut tables = Vec::new();
    let mut layers = Vec::new();
    for &k in &cfg.k {
        let (prep, curve) = crate::pipeline::closed_section(s, k, r.order, r.samples)?;
        let v = find_vertices(&curve, cfg.tolerances.plateau);
        let i = find_inflexions(&curve, cfg.tolerances.plateau);
        let (_, fine) = crate::pipeline::closed_section(s, k, r.order, 2 * r.samples)?;
        let stable = find_vertices(&fine, cfg.tolerances.plateau).len() == v.len()
            && find_inflexions(&fine, cfg.tolerances.plateau).len() == i.len();
        if cfg.k.len() > 1 {
            let _ = writeln!(out, "k: {}", f(k));
        }
        let _ = writeln!(out, "vertices: {}, inflexions: {}", v.len(), i.len());
        let _ = writeln!(out, "stable: {stable} (M={} vs {})", r.samples, 2 * r.samples);
        let mut t = Table::new(["kind", "param", "x", "y", "curvature"]);
        feature_rows(&mut t, &prep.frame, &curve, &v);
        feature_rows(&mut t, &prep.frame, &curve, &i);
        tables.push((k, t));
        layers.push(Layer::new("curve", Style::solid("black", 1.5)).with_path(to_input(&prep.frame, &curve.points), true));
        let mut lv = Layer::new("vertices", Style::solid("#d62728", 1.5));
        lv.dots = v.iter().map(|x| prep.frame.to_input(x.point)).collect();
        let mut li = Layer::new("inflexions", Style::solid("#2ca02c", 1.5));
        li.dots = i.iter().map(|x| prep.frame.to_input(x.point)).collect();
        layers.extend([lv, li]);
    }
    Ok(match cfg.format {
        Format::Csv => Artifact::Table(merge_by_level(tables)),
        Format::Svg => Artifact::Plot(layers),
    })
}

/// Contour points folded into `[0, P)²`, split where folding jumps.
fn folded_runs(pts: &[(f64, f64)], period: f64) -> Vec<Vec<Vec2>> {
    let mut runs: Vec<Vec<Vec2>> = Vec::new();
    let mut cur: Vec<Vec2> = Vec::new();
    for &(a, b) in pts {
        let q = Vec2::new(a.rem_euclid(period), b.rem_euclid(period));
        if let Some(&last) = cur.last() {
            if (q.x - last.x).abs() > 0.5 * period || (q.y - last.y).abs() > 0.5 * period {
                runs.push(std::mem::take(&mut cur));
            }
        }
        cur.push(q);
    }
    if cur.len() > 1 {
        runs.push(cur);
    }
    runs.retain(|r| r.len() > 1);
    runs
}

fn presym_layers(pss: &PreSymmetrySet) -> Vec<Layer> {
    let p = pss.period;
    let mut frame = Layer::new("torus", Style::solid("#999999", 0.5))
        .with_path(vec![Vec2::new(0.0, 0.0), Vec2::new(p, 0.0), Vec2::new(p, p), Vec2::new(0.0, p)], true);
    frame.paths.push((vec![Vec2::new(0.0, 0.0), Vec2::new(p, p)], false));
    let mut layers = vec![frame];
    for flag in [SegmentFlag::Genuine, SegmentFlag::ParallelTangent, SegmentFlag::NearDiagonal] {
        let style = match flag {
            SegmentFlag::Genuine => Style::solid("black", 1.2),
            SegmentFlag::ParallelTangent => Style::dashed("black", 1.2),
            SegmentFlag::NearDiagonal => Style::solid("#bbbbbb", 0.8),
        };
        let mut l = Layer::new(flag.name(), style);
        for ct in &pss.contours {
            let mut run: Vec<(f64, f64)> = Vec::new();
            for i in 0..ct.segment_count() {
                let (a, b) = ct.segment(i);
                if ct.flags[i] == flag {
                    if run.is_empty() {
                        run.push(a);
                    }
                    run.push(b);
                } else if !run.is_empty() {
                    l.paths.extend(folded_runs(&run, p).into_iter().map(|r| (r, false)));
                    run.clear();
                }
            }
            l.paths.extend(folded_runs(&run, p).into_iter().map(|r| (r, false)));
        }
        layers.push(l);
    }
    layers
}

fn presym_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String) -> Result<Artifact> {
    let r = cfg.resolution;
    let mut tables = Vec::new();
    let mut layers = Vec::new();
    for &k in &cfg.k {
        let (_, curve) = crate::pipeline::closed_section(s, k, r.order, r.samples)?;
        let pss = crate::symmetry::pre_symmetry_set_with(
            &curve,
            &crate::symmetry::PssOptions { grid: r.grid, tau: cfg.tolerances.parallel_tau, ..Default::default() },
        )?;
        let count = |fl: SegmentFlag| pss.contours.iter().flat_map(|c| &c.flags).filter(|&&x| x == fl).count();
        if cfg.k.len() > 1 {
            let _ = writeln!(out, "k: {}", f(k));
        }
        let _ = writeln!(
            out,
            "contours: {}, genuine: {}, parallel_tangent: {}, near_diagonal: {}",
            pss.contours.len(),
            count(SegmentFlag::Genuine),
            count(SegmentFlag::ParallelTangent),
            count(SegmentFlag::NearDiagonal)
        );
        let _ = writeln!(out, "swap_defect_cells: {:.3}", crate::symmetry::swap_symmetry_defect(&pss));
        let mut t = Table::new(["contour", "index", "u1", "u2", "flag"]);
        for (ci, ct) in pss.contours.iter().enumerate() {
            for (i, &(a, b)) in ct.u.iter().enumerate() {
                let flag = ct.flags.get(i).or(ct.flags.last()).map_or("-", |x| x.name());
                t.push(vec![ci.to_string(), i.to_string(), f(a), f(b), flag.into()]);
            }
        }
        tables.push((k, t));
        layers = presym_layers(&pss);
    }
    Ok(match cfg.format {
        Format::Csv => Artifact::Table(merge_by_level(tables)),
        Format::Svg => Artifact::Plot(layers),
    })
}

fn feature_row(t: &mut Table, frame: &FrameChange, ft: &SsFeature) {
    let (x, y) = match ft.center {
        Center::Finite(p) => {
            let q = frame.to_input(p);
            (f(q.x), f(q.y))
        }
        Center::AtInfinity => ("inf".into(), "inf".into()),
    };
    t.push(vec![ft.kind.name().into(), x, y, String::new(), f(ft.pair.0), f(ft.pair.1), String::new(), String::new()]);
}

fn medial_shape(c: &Counts) -> &'static str {
    if c.medial_is_y() {
        "Y"
    } else if c.medial_degrees.iter().all(|&d| d == 1) {
        "arcs"
    } else {
        "other"
    }
}

/// Level sets over a sweep and the loci of their vertices.
fn loci_layers(s: &MongeSurface, a: &Analysis, k: f64, samples: usize) -> Result<Vec<Layer>> {
    let prep = &a.prepared;
    let p = &prep.params[0];
    let top = prep.max_level().min(4.0 * k.abs());
    let levels: Vec<f64> = (0..=24).map(|j| prep.scale * top * (j as f64 / 24.0 * (0.01f64).ln()).exp()).collect();
    let locus = feature_locus(&prep.surface, p, &levels, samples.min(512), crate::curve::DEFAULT_PLATEAU_TOL)?;
    let mut l = Layer::new("vertex-loci", Style::solid("#2ca02c", 0.8));
    for ch in &locus.chains {
        if matches!(ch.kind, FeatureKind::Vertex(_)) {
            let pts: Vec<Vec2> = ch.samples.iter().map(|x| prep.frame.to_input(x.2)).collect();
            l.paths.push((pts, false));
        }
    }
    let mut sections = Layer::new("sections", Style::solid("#aaaaaa", 0.6));
    for &lv in levels.iter().step_by(6) {
        if let Ok(cs) = prep.curves(lv / prep.scale, samples.min(512)) {
            for c in cs {
                sections.paths.push((to_input(&prep.frame, &c.points), c.closed));
            }
        }
    }
    let _ = s;
    Ok(vec![sections, l])
}

/// Arrow continuing the step `p → q` beyond `q`.
fn arrow_past(p: Vec2, q: Vec2, len: f64) -> Option<Arrow> {
    let d = q - p;
    (d.norm() > 0.0).then(|| Arrow { from: q, to: q + d.normalized() * len })
}

fn symset_layers(s: &MongeSurface, a: &Analysis, k: f64, samples: usize) -> Result<Vec<Layer>> {
    let fr = &a.prepared.frame;
    let mut layers = loci_layers(s, a, k, samples)?;
    layers.push(Layer::new("curve", Style::solid("black", 1.5)).with_path(to_input(fr, &a.curve.points), true));
    let mut ss_layer = Layer::new("symmetry-set", Style::solid("#1f77b4", 0.8));
    let mut medial = Layer::new("medial-axis", Style::solid("black", 4.0));
    let mut arrows = Layer::new("to-infinity", Style::solid("#1f77b4", 1.0));
    let reach = a.ss.points.iter().map(|p| p.center.dist(a.ss.centroid)).fold(0.0, f64::max);
    let len = 0.08 * reach.max(a.curve.diameter());
    for b in &a.ss.branches {
        for tr in &b.traces {
            let mut run: Vec<Vec2> = Vec::new();
            let mut mrun: Vec<Vec2> = Vec::new();
            let mut after_gap = false;
            for (i, c) in tr.centers.iter().enumerate() {
                match c {
                    Some(p) => {
                        run.push(fr.to_input(*p));
                        if after_gap && run.len() == 2 && b.kind == BranchKind::Unbounded {
                            arrows.arrows.extend(arrow_past(run[1], run[0], len));
                        }
                        let m = tr.point_index[i].is_some_and(|k| a.ss.points[k].medial);
                        if m {
                            mrun.push(fr.to_input(*p));
                        } else if !mrun.is_empty() {
                            medial.paths.push((std::mem::take(&mut mrun), false));
                        }
                    }
                    None => {
                        if b.kind == BranchKind::Unbounded && run.len() >= 2 {
                            arrows.arrows.extend(arrow_past(run[run.len() - 2], run[run.len() - 1], len));
                        }
                        if !run.is_empty() {
                            ss_layer.paths.push((std::mem::take(&mut run), false));
                        }
                        if !mrun.is_empty() {
                            medial.paths.push((std::mem::take(&mut mrun), false));
                        }
                        after_gap = true;
                    }
                }
            }
            ss_layer.paths.push((run, tr.closed));
            medial.paths.push((mrun, false));
        }
    }
    let dots = |name: &str, colour: &str, fs: &[SsFeature]| {
        let mut l = Layer::new(name, Style::solid(colour, 1.5));
        l.dots = fs
            .iter()
            .filter_map(|x| match x.center {
                Center::Finite(p) => Some(fr.to_input(p)),
                Center::AtInfinity => None,
            })
            .collect();
        l
    };
    let ft = &a.ss.features;
    layers.extend([
        ss_layer,
        medial,
        arrows,
        dots("endpoints", "#d62728", &ft.endpoints),
        dots("cusps", "#9467bd", &ft.cusps),
        dots("triple-crossings", "#ff7f0e", &ft.triple_crossings),
    ]);
    Ok(layers)
}

fn symset_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String, medial_only: bool) -> Result<Artifact> {
    let mut tables = Vec::new();
    let mut layers = Vec::new();
    for &k in &cfg.k {
        let a = analyze_with(s, k, cfg.resolution, cfg.tolerances)?;
        let c = Counts::of(&a);
        let fr = &a.prepared.frame;
        if cfg.k.len() > 1 {
            let _ = writeln!(out, "k: {}", f(k));
        }
        let medial_count = a.ss.medial_points().count();
        if medial_only {
            let _ = writeln!(out, "medial_points: {medial_count}");
            let _ = writeln!(out, "medial_nodes: {:?}", c.medial_degrees);
            let _ = writeln!(out, "shape: {}", medial_shape(&c));
            let mut t = Table::new(["x", "y", "radius", "u1", "u2", "branch"]);
            for p in a.ss.medial_points() {
                let q = fr.to_input(p.center);
                t.push(vec![f(q.x), f(q.y), f(p.radius), f(p.pair.0), f(p.pair.1), p.branch.to_string()]);
            }
            tables.push((k, t));
        } else {
            let ft = &a.ss.features;
            let _ = writeln!(out, "endpoints: {}", ft.endpoints.len());
            let _ = writeln!(out, "cusps: {}, triple_crossings: {}", ft.cusps.len(), ft.triple_crossings.len());
            let _ = writeln!(out, "branches: {}, unbounded: {}", c.branches, c.unbounded);
            let _ = writeln!(out, "points: {}, medial: {}", a.ss.points.len(), medial_count);
            let _ = writeln!(out, "collisions: {}", ft.collisions);
            let mut t = Table::new(["kind", "x", "y", "radius", "u1", "u2", "branch", "medial"]);
            for p in &a.ss.points {
                let q = fr.to_input(p.center);
                t.push(vec![
                    "point".into(),
                    f(q.x),
                    f(q.y),
                    f(p.radius),
                    f(p.pair.0),
                    f(p.pair.1),
                    p.branch.to_string(),
                    p.medial.to_string(),
                ]);
            }
            for x in ft.endpoints.iter().chain(&ft.cusps).chain(&ft.triple_crossings) {
                feature_row(&mut t, fr, x);
            }
            tables.push((k, t));
        }
        if cfg.format == Format::Svg {
            layers = symset_layers(s, &a, k, cfg.resolution.samples)?;
            if medial_only {
                layers.retain(|l| matches!(l.name.as_str(), "curve" | "medial-axis"));
            }
        }
    }
    Ok(match cfg.format {
        Format::Csv => Artifact::Table(merge_by_level(tables)),
        Format::Svg => Artifact::Plot(layers),
    })
}

fn oracle_cmd(s: &MongeSurface, cfg: &RunConfig, out: &mut String) -> Result<Artifact> {
    let r = cfg.resolution;
    let mut t = Table::new(["k", "what", "h", "distance", "ratio"]);
    let mut orders: Vec<usize> = COMPARISON_ORDERS.iter().copied().chain([r.order]).collect();
    orders.sort_unstable();
    orders.dedup();
    for &k in &cfg.k {
        let prep = Prepared::new(s, k, r.order, r.samples)?;
        let main = prep.curves(k, r.samples)?;
        let h = oracle_step(cfg, &main[0]);
        let tr = trace_level_set(&prep.surface, prep.scale * k, trace_box(&main), h)?;
        let local = tr.local_polyline();
        let _ = writeln!(out, "k={} h={}", f(k), f(h));
        for (n, cs) in order_comparison(s, k, &orders, r.samples)? {
            // open branches are cut off by the trace box, so only their
            // deviation from the traced pieces is meaningful
            let d = if cs[0].closed {
                hausdorff_distance(&Polyline::from(&cs[0]), local)
            } else {
                cs.iter()
                    .flat_map(|c| &c.points)
                    .map(|&p| tr.polylines.iter().map(|l| l.distance_to(p)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max)
            };
            let _ = writeln!(out, "  series N={n}: hausdorff {} ({:.3} h)", f(d), d / h);
            t.push(vec![f(k), format!("series-{n}"), f(h), f(d), f(d / h)]);
        }
        if main[0].closed && k > 0.0 {
            let a = analyze_with(s, k, r, cfg.tolerances)?;
            let bbox = curve_box(&a.curve, 0.05);
            let oracle = medial_axis_oracle(&a.curve, bbox, h)?;
            let med: Vec<Vec2> = a.ss.medial_points().map(|p| p.center).filter(|p| bbox.contains(*p)).collect();
            if !oracle.is_empty() && !med.is_empty() {
                let d = point_set_hausdorff(&oracle, &med);
                let _ = writeln!(out, "  medial axis: hausdorff {} ({:.3} h)", f(d), d / h);
                t.push(vec![f(k), "medial".into(), f(h), f(d), f(d / h)]);
            }
        }
    }
    Ok(Artifact::Table(t))
}

/// Caps the global thread pool from `SYMPAR_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SYMPAR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("SYMPAR_THREADS must be a positive integer, got `{v}`")))?;
    // a pool already built (e.g. by an earlier call) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Machine-readable error line.
pub fn error_line(e: &Error) -> String {
    format!("error[{}]: {e}", e.kind())
}
