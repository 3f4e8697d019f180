//! Experiment harness: mesh-size sweeps comparing discrete conformal maps
//! against their smooth references, convergence-order fits, identity-residual
//! suites, CSV reports and text-only SVG log-log plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::analytic::{predicted_s, AnalyticFunction};
use crate::lattice::{Dir, Disc, LatticeParams, Rect, Region, Subcomplex};
use crate::solver::{layout, solve_dirichlet, DiscreteMap, Normalization};
use crate::{Complex, Error, Result};

/// Region description parsed from a config file.
#[derive(Debug, Clone, Copy)]
pub enum RegionSpec {
    Disc { cx: f64, cy: f64, r: f64 },
    Rect { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
}

impl RegionSpec {
    pub fn as_region(&self) -> Box<dyn Region> {
        match *self {
            RegionSpec::Disc { cx, cy, r } => Box::new(Disc {
                center: Complex::new(cx, cy),
                radius: r,
            }),
            RegionSpec::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => Box::new(Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            }),
        }
    }

    fn contains_origin(&self) -> bool {
        match *self {
            RegionSpec::Disc { cx, cy, r } => (cx * cx + cy * cy).sqrt() < r,
            RegionSpec::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            } => xmin < 0.0 && 0.0 < xmax && ymin < 0.0 && 0.0 < ymax,
        }
    }
}

/// One convergence experiment: a reference function, the lattice shape, the
/// region, and a decreasing list of mesh sizes.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub function: AnalyticFunction,
    pub alpha: f64,
    pub beta: f64,
    pub region: RegionSpec,
    pub epsilons: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The built-in demo: exp on an equilateral lattice over the disc of
    /// radius 0.8.
    pub fn demo() -> ExperimentConfig {
        ExperimentConfig {
            function: AnalyticFunction::Exp,
            alpha: std::f64::consts::FRAC_PI_3,
            beta: std::f64::consts::FRAC_PI_3,
            region: RegionSpec::Disc {
                cx: 0.0,
                cy: 0.0,
                r: 0.8,
            },
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            out: None,
        }
    }

    /// Parses the flat key-value config format. Lines are `key = value`;
    /// `#` starts a comment. Keys: `function` (name plus optional numeric
    /// parameters), `alpha`, `beta`, `region` (`disc cx cy r` or
    /// `rect xmin xmax ymin ymax`), `epsilons` (comma-separated, strictly
    /// decreasing), `out` (optional directory).
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let bad = |msg: String| Error::InvalidConfig(msg);
        let mut function = None;
        let mut alpha = None;
        let mut beta = None;
        let mut region = None;
        let mut epsilons = None;
        let mut out = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number `{s}`", lineno + 1)))
            };
            match key {
                "function" => {
                    let mut parts = value.split_whitespace();
                    let name = parts
                        .next()
                        .ok_or_else(|| bad(format!("line {}: empty function", lineno + 1)))?;
                    let params: Vec<f64> =
                        parts.map(num).collect::<Result<Vec<f64>>>()?;
                    function = Some(AnalyticFunction::from_name(name, &params)?);
                }
                "alpha" => alpha = Some(num(value)?),
                "beta" => beta = Some(num(value)?),
                "region" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    region = Some(match parts.as_slice() {
                        ["disc", cx, cy, r] => RegionSpec::Disc {
                            cx: num(cx)?,
                            cy: num(cy)?,
                            r: num(r)?,
                        },
                        ["rect", x0, x1, y0, y1] => RegionSpec::Rect {
                            xmin: num(x0)?,
                            xmax: num(x1)?,
                            ymin: num(y0)?,
                            ymax: num(y1)?,
                        },
                        _ => {
                            return Err(bad(format!(
                                "line {}: region must be `disc cx cy r` or `rect xmin xmax ymin ymax`",
                                lineno + 1
                            )))
                        }
                    });
                }
                "epsilons" => {
                    let vals: Vec<f64> = value
                        .split(',')
                        .map(|s| num(s.trim()))
                        .collect::<Result<Vec<f64>>>()?;
                    epsilons = Some(vals);
                }
                "out" => out = Some(PathBuf::from(value)),
                other => {
                    return Err(bad(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            }
        }

        let cfg = ExperimentConfig {
            function: function.ok_or_else(|| bad("missing key `function`".into()))?,
            alpha: alpha.ok_or_else(|| bad("missing key `alpha`".into()))?,
            beta: beta.ok_or_else(|| bad("missing key `beta`".into()))?,
            region: region.ok_or_else(|| bad("missing key `region`".into()))?,
            epsilons: epsilons.ok_or_else(|| bad("missing key `epsilons`".into()))?,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::InvalidConfig("epsilons list is empty".into()));
        }
        for w in self.epsilons.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidConfig(
                    "epsilons must be strictly decreasing".into(),
                ));
            }
        }
        if !(self.epsilons[self.epsilons.len() - 1] > 0.0) {
            return Err(Error::InvalidConfig("epsilons must be positive".into()));
        }
        if !self.region.contains_origin() {
            return Err(Error::InvalidConfig(
                "region must contain the origin in its interior".into(),
            ));
        }
        // reject non-acute shape early
        LatticeParams::new(self.alpha, self.beta, self.epsilons[0])?;
        Ok(())
    }
}

/// Per-mesh-size measurements of one sweep level.
#[derive(Debug, Clone)]
pub struct LevelRow {
    pub epsilon: f64,
    pub vertices: usize,
    pub newton_iters: usize,
    pub max_angle_residual: f64,
    pub err_u_max: f64,
    pub err_f_vertex_max: f64,
    pub err_f_pl_max: f64,
    pub err_s_max: [f64; 3],
    pub flower_res_max: f64,
    pub phi_res_max: f64,
    pub dlap_s_res_max: f64,
    pub contact_res_max: f64,
}

/// Full sweep report: one row per completed level, failures for the rest,
/// and fitted convergence orders.
#[derive(Debug)]
pub struct ExperimentReport {
    pub rows: Vec<LevelRow>,
    pub failures: Vec<(f64, Error)>,
    pub slope_u: Option<f64>,
    pub slope_f: Option<f64>,
    pub slope_s: [Option<f64>; 3],
}

/// Solves the boundary-value problem for `f` on the carved subcomplex and
/// lays out the resulting discrete map, normalized to agree with `f` at the
/// origin in value and edge direction.
pub fn reference_map(
    f: &AnalyticFunction,
    params: &LatticeParams,
    region: &dyn crate::lattice::Region,
) -> Result<(DiscreteMap, crate::solver::DirichletSolution)> {
    let sub = Arc::new(Subcomplex::carve(params, region)?);

    let log_fprime = |z: Complex| -> Result<f64> { Ok(f.derivative(z)?.norm().ln()) };
    let boundary: BTreeMap<_, f64> = sub
        .boundary_vertices()
        .into_iter()
        .map(|v| Ok((v, log_fprime(params.position(v))?)))
        .collect::<Result<_>>()?;
    let sol = solve_dirichlet(&sub, &boundary)?;

    // normalization: value f(0) at the origin, image direction of the
    // distinguished edge rotated by arg f' at the edge midpoint
    let v0 = params.position(crate::lattice::VertexId::ORIGIN.neighbor(Dir::new(1)));
    let norm = Normalization {
        target: f.eval(Complex::new(0.0, 0.0))?,
        angle: v0.arg() + f.derivative(v0 / 2.0)?.arg(),
    };
    let map = layout(Arc::clone(&sub), &sol.scale, norm)?;
    Ok((map, sol))
}

/// Solves, lays out and measures a single mesh size. Returns the row and the
/// solved map.
pub fn run_level(config: &ExperimentConfig, epsilon: f64) -> Result<(LevelRow, DiscreteMap)> {
    let f = &config.function;
    let params = LatticeParams::new(config.alpha, config.beta, epsilon)?;
    let region = config.region.as_region();
    let (map, sol) = reference_map(f, &params, region.as_ref())?;
    let sub = map.subcomplex_arc();
    let log_fprime = |z: Complex| -> Result<f64> { Ok(f.derivative(z)?.norm().ln()) };

    // scale-factor and map errors against the smooth reference
    let mut err_u_max = 0.0f64;
    let mut err_f_vertex_max = 0.0f64;
    for v in sub.vertices() {
        let z = params.position(*v);
        err_u_max = err_u_max.max((sol.scale.get(*v)? - log_fprime(z)?).abs());
        err_f_vertex_max = err_f_vertex_max.max((map.value(*v)? - f.eval(z)?).norm());
    }

    // piecewise-linear error at face barycenters and edge midpoints
    let mut err_f_pl_max = err_f_vertex_max;
    for face in sub.faces() {
        let [a, b, c] = face.vertices();
        let x = (params.position(a) + params.position(b) + params.position(c)) / 3.0;
        err_f_pl_max = err_f_pl_max.max((map.evaluate_pl(x)? - f.eval(x)?).norm());
    }
    for (a, b) in sub.edges() {
        let x = (params.position(*a) + params.position(*b)) / 2.0;
        err_f_pl_max = err_f_pl_max.max((map.evaluate_pl(x)? - f.eval(x)?).norm());
    }

    // Schwarzians against their predicted limits on the two-fold interior
    let deep = sub.interior_depth_set(2);
    let mut err_s_max = [0.0f64; 3];
    for v in &deep {
        let limits = predicted_s(f, &params, params.position(*v))?;
        for k in 1..=3u8 {
            let s = crate::schwarzian::edge_schwarzian(&map, *v, Dir::new(k))?;
            let e = (s - limits[(k - 1) as usize]).norm();
            err_s_max[(k - 1) as usize] = err_s_max[(k - 1) as usize].max(e);
        }
    }

    // identity residuals
    let mut flower_res_max = 0.0f64;
    let mut phi_res_max = 0.0f64;
    for v in sub.interior_vertices() {
        flower_res_max =
            flower_res_max.max(crate::schwarzian::flower_identity_residuals(&map, v)?.max());
        let s = crate::schwarzian::vertex_schwarzians(&map, v)?;
        phi_res_max =
            phi_res_max.max(crate::schwarzian::polynomial_identity_residuals(&params, &s).max());
    }

    let mut dlap_s_res_max = 0.0f64;
    for v in &deep {
        for k in Dir::ALL {
            dlap_s_res_max =
                dlap_s_res_max.max(crate::schwarzian::laplacian_identity_residual(&map, *v, k)?);
        }
    }

    let mut contact_res_max = 0.0f64;
    for v in sub.vertices() {
        for k in Dir::ALL {
            match crate::mobius::verify_contact_relations(&map, *v, k) {
                Ok(r) => contact_res_max = contact_res_max.max(r.max()),
                Err(Error::MissingFace(_))
                | Err(Error::BoundaryEdge(..))
                | Err(Error::MissingValue(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let row = LevelRow {
        epsilon,
        vertices: sub.vertices().len(),
        newton_iters: sol.newton_iters,
        max_angle_residual: sol.max_residual,
        err_u_max,
        err_f_vertex_max,
        err_f_pl_max,
        err_s_max,
        flower_res_max,
        phi_res_max,
        dlap_s_res_max,
        contact_res_max,
    };
    Ok((row, map))
}

/// Runs the whole sweep, continuing past failed levels, and fits the
/// convergence orders.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &eps in &config.epsilons {
        match run_level(config, eps) {
            Ok((row, _)) => rows.push(row),
            Err(e) => failures.push((eps, e)),
        }
    }

    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let fit = |err: Vec<f64>| fit_order(&eps, &err).ok();
    let slope_u = fit(rows.iter().map(|r| r.err_u_max).collect());
    let slope_f = fit(rows.iter().map(|r| r.err_f_pl_max).collect());
    let slope_s = [
        fit(rows.iter().map(|r| r.err_s_max[0]).collect()),
        fit(rows.iter().map(|r| r.err_s_max[1]).collect()),
        fit(rows.iter().map(|r| r.err_s_max[2]).collect()),
    ];

    Ok(ExperimentReport {
        rows,
        failures,
        slope_u,
        slope_f,
        slope_s,
    })
}

/// Identity-residual suite over the sweep: the same rows, intended to be
/// read for the residual columns only.
pub fn run_identity_suite(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(config)
}

/// Threshold below which an error is considered exact and excluded from
/// order fits.
pub const EXACT_THRESHOLD: f64 = 1e-13;

/// Least-squares slope of `log err` against `log eps`.
pub fn fit_order(eps: &[f64], err: &[f64]) -> Result<f64> {
    if eps.len() != err.len() || eps.len() < 3 {
        return Err(Error::InsufficientData(eps.len()));
    }
    let pairs: Vec<(f64, f64)> = eps
        .iter()
        .zip(err.iter())
        .filter(|(e, r)| **e > 0.0 && **r > EXACT_THRESHOLD)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    if pairs.len() < 2 {
        // all (or almost all) levels are exact to rounding
        return Err(Error::ZeroError);
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

const CSV_HEADER: &str = "epsilon,vertices,newton_iters,max_angle_residual,err_u_max,err_f_vertex_max,err_f_pl_max,err_s1_max,err_s2_max,err_s3_max,flower_res_max,phi_res_max,dlap_s_res_max,contact_res_max";

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the report rows as CSV with the fixed column schema.
pub fn csv_string(rows: &[LevelRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cols = [
            fmt_float(r.epsilon),
            r.vertices.to_string(),
            r.newton_iters.to_string(),
            fmt_float(r.max_angle_residual),
            fmt_float(r.err_u_max),
            fmt_float(r.err_f_vertex_max),
            fmt_float(r.err_f_pl_max),
            fmt_float(r.err_s_max[0]),
            fmt_float(r.err_s_max[1]),
            fmt_float(r.err_s_max[2]),
            fmt_float(r.flower_res_max),
            fmt_float(r.phi_res_max),
            fmt_float(r.dlap_s_res_max),
            fmt_float(r.contact_res_max),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Log-log scatter-plus-line plot of `(eps, err)` points as a standalone SVG
/// document. Nonpositive values are dropped.
pub fn svg_loglog(title: &str, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();

    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">{title} (log-log)</text>",
        w / 2.0
    );

    if pts.is_empty() {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">no positive data</text>",
            w / 2.0,
            h / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let pad = |lo: f64, hi: f64| {
        let d = (hi - lo).max(1e-9) * 0.08;
        (lo - d, hi + d)
    };
    let (xmin, xmax) = pad(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = pad(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |x: f64| ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);

    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - mb,
        w - mr,
        h - mb
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        h - mb
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">log10 epsilon in [{:.3}, {:.3}]</text>",
        (ml + w - mr) / 2.0,
        h - 12.0,
        xmin,
        xmax
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">log10 error in [{:.3}, {:.3}]</text>",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        ymin,
        ymax
    );

    let path: Vec<String> = pts
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>",
        path.join(" ")
    );
    for (x, y) in &pts {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"steelblue\"/>",
            sx(*x),
            sy(*y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `report.csv` plus one SVG plot per error column into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), csv_string(&report.rows))?;

    let columns: [(&str, Box<dyn Fn(&LevelRow) -> f64>); 10] = [
        ("err_u_max", Box::new(|r| r.err_u_max)),
        ("err_f_vertex_max", Box::new(|r| r.err_f_vertex_max)),
        ("err_f_pl_max", Box::new(|r| r.err_f_pl_max)),
        ("err_s1_max", Box::new(|r| r.err_s_max[0])),
        ("err_s2_max", Box::new(|r| r.err_s_max[1])),
        ("err_s3_max", Box::new(|r| r.err_s_max[2])),
        ("flower_res_max", Box::new(|r| r.flower_res_max)),
        ("phi_res_max", Box::new(|r| r.phi_res_max)),
        ("dlap_s_res_max", Box::new(|r| r.dlap_s_res_max)),
        ("contact_res_max", Box::new(|r| r.contact_res_max)),
    ];
    for (name, get) in &columns {
        let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.epsilon, get(r))).collect();
        std::fs::write(dir.join(format!("{name}.svg")), svg_loglog(name, &pts))?;
    }
    Ok(())
}
