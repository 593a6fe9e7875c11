//! Pipeline orchestration for one scenario.

use std::f64::consts::TAU;
use std::time::Instant;

use gaussmap::chart::{field_to_csv, grid_header, ChartGrid, StencilOrder, Vec2};
use gaussmap::convergence::Convergence;
use gaussmap::error::Result;
use gaussmap::frames::{
    align_to_gauss_map, default_base_frame, induced_metric_error, integrate_frame, position_error, GraphCoefficients,
    IntegrationOptions,
};
use gaussmap::graphs::{
    curvature_via_gauss_equation, entire_spacelike_check, first_fundamental_form, gauss_equation_residual,
    metric_from_gradient, shape_operator, GraphSource, SpacelikeGraph,
};
use gaussmap::harmonic::{
    first_variation_probe, one_harmonic_residual, CodazziTolerance, JacobianMode, MapBetweenCharts, PerturbationRegion,
};
use gaussmap::legendre::{finiteness_sweep, gradient_image, legendre_transform, theorem_check, Finiteness};
use gaussmap::lorentz::{KleinPoint, StraightConvexDomain};
use serde::Serialize;
use serde_json::{json, Value};

use crate::figure::klein_figure;
use crate::scenario::{ConfigError, Scenario};

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisEntry {
    pub analysis: &'static str,
    pub pass: bool,
    pub metrics: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    /// The effective configuration, defaults filled in.
    pub config: Scenario,
    pub analyses: Vec<AnalysisEntry>,
    pub artifacts: Vec<String>,
    pub pass: bool,
}

/// Report, timings and named artifact contents, not yet written anywhere.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub timings: Vec<(&'static str, f64)>,
    pub artifacts: Vec<(String, String)>,
}

fn jacobian_mode(s: &SpacelikeGraph, order: StencilOrder) -> JacobianMode {
    if s.has_exact_derivatives() {
        JacobianMode::Exact
    } else {
        JacobianMode::FiniteDifference(order)
    }
}

fn entry(analysis: &'static str, r: Result<(bool, Value)>) -> AnalysisEntry {
    match r {
        Ok((pass, metrics)) => AnalysisEntry { analysis, pass, metrics },
        Err(e) => AnalysisEntry { analysis, pass: false, metrics: json!({ "error": e.to_string() }) },
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    s: SpacelikeGraph,
    chart: ChartGrid,
    order: StencilOrder,
    artifacts: Vec<(String, String)>,
    hull: Option<StraightConvexDomain>,
    cloud: Vec<KleinPoint>,
}

impl Ctx<'_> {
    fn sampled(&self) -> bool {
        matches!(self.s.source(), GraphSource::Sampled(_))
    }

    /// Charts for a convergence measurement. Sampled surfaces cannot be refined
    /// below their samples, so the comparison grid is coarser instead.
    fn pair(&self) -> (ChartGrid, ChartGrid) {
        if self.sampled() {
            let c = &self.chart;
            let coarse = ChartGrid::new(c.u_min, c.u_max, c.v_min, c.v_max, c.n_u / 2 + 1, c.n_v / 2 + 1);
            (coarse.unwrap_or(*c), *c)
        } else {
            (self.chart, self.chart.refined())
        }
    }

    fn at_chart(&self, c: &Convergence) -> f64 {
        if self.sampled() {
            c.fine
        } else {
            c.coarse
        }
    }

    fn forms(&mut self) -> Result<(bool, Value)> {
        let tol = &self.sc.tolerances;
        let spacelike = entire_spacelike_check(&self.s, &self.chart);
        let (c0, c1) = self.pair();
        let conv = Convergence::new(
            gauss_equation_residual(&self.s, &c0, self.order)?,
            gauss_equation_residual(&self.s, &c1, self.order)?,
        );
        let g = first_fundamental_form(&self.s, &self.chart)?;
        let b = shape_operator(&self.s, &self.chart)?;
        let k = curvature_via_gauss_equation(&self.s, &self.chart)?;
        self.artifacts
            .push(("grid.json".into(), serde_json::to_string_pretty(&grid_header(&self.chart)).unwrap_or_default()));
        self.artifacts.push(("metric.csv".into(), field_to_csv(g.field())));
        self.artifacts.push(("shape_operator.csv".into(), field_to_csv(&b)));
        self.artifacts.push(("curvature.csv".into(), field_to_csv(&k)));
        let pass = spacelike.pass && self.at_chart(&conv) <= tol.gauss && conv.reaches(tol.min_order);
        Ok((pass, json!({ "spacelike": spacelike, "gauss_equation": conv })))
    }

    fn codazzi(&self) -> Result<(bool, Value)> {
        let tol = &self.sc.tolerances;
        let mode = jacobian_mode(&self.s, self.order);
        let residual = |c: &ChartGrid| -> Result<f64> {
            one_harmonic_residual(&MapBetweenCharts::gauss_map_of(&self.s, c, mode)?, self.order)
        };
        let (c0, c1) = self.pair();
        let conv = Convergence::new(residual(&c0)?, residual(&c1)?);
        let calibrated = CodazziTolerance::calibrate(conv.coarse, c0.spacing());
        let threshold = tol.codazzi_factor / 10.0 * calibrated.at(c1.spacing());
        let pass = conv.reaches(tol.min_order) && conv.fine <= threshold;
        Ok((pass, json!({ "jacobian": format!("{mode:?}"), "residual": conv, "tolerance_at_fine": threshold })))
    }

    fn energy(&self) -> Result<(bool, Value)> {
        let tol = &self.sc.tolerances;
        let m = MapBetweenCharts::gauss_map_of(&self.s, &self.chart, jacobian_mode(&self.s, self.order))?;
        let ensemble = PerturbationRegion::ensemble(&self.chart, self.sc.seed, tol.bumps);
        let mut worst = (0.0f64, f64::NAN);
        for p in &ensemble {
            let probe = first_variation_probe(&m, p, tol.t_step)?;
            if probe.at_t.abs() >= worst.0 {
                worst = (probe.at_t.abs(), probe.richardson_ratio);
            }
        }
        Ok((
            worst.0 <= tol.energy,
            json!({
                "seed": self.sc.seed,
                "bumps": ensemble.len(),
                "t_step": tol.t_step,
                "max_first_variation": worst.0,
                "richardson_ratio_of_max": worst.1,
            }),
        ))
    }

    fn reconstruct(&self) -> Result<(bool, Value)> {
        let tol = &self.sc.tolerances;
        let base = self.chart.center_node();
        let (u, v) = self.chart.coords(base);
        let g0 = metric_from_gradient(self.s.gradient(Vec2::new(u, v))?);
        let opts = IntegrationOptions {
            substeps: tol.substeps,
            tol_frame: tol.tol_frame,
            tol_gc: Some(tol.tol_gc),
            order: self.order,
        };
        let mut r = integrate_frame(&GraphCoefficients(&self.s), &self.chart, base, &default_base_frame(&g0)?, &opts)?;
        let position = position_error(&r, base, &self.s)?;
        let metric = induced_metric_error(&r, self.order)?;
        let target = MapBetweenCharts::gauss_map_of(&self.s, &self.chart, jacobian_mode(&self.s, self.order))?;
        let al = align_to_gauss_map(&mut r, &target, base, tol.tol_gc)?;
        let pass = r.holonomy_residual <= tol.holonomy
            && r.max_gram_drift <= tol.tol_frame
            && al.gauss_residual <= tol.alignment;
        Ok((
            pass,
            json!({
                "step": self.chart.spacing() / tol.substeps as f64,
                "holonomy_residual": r.holonomy_residual,
                "max_gram_drift": r.max_gram_drift,
                "position_error": position,
                "induced_metric_error": metric,
                "alignment": al,
            }),
        ))
    }

    fn legendre(&mut self) -> Result<(bool, Value)> {
        let spec = &self.sc.legendre;
        let set = finiteness_sweep(&self.s, spec.angles, &spec.finiteness())?;
        let mut csv = String::from("theta,margin,rate,verdict\n");
        for s in &set.samples {
            let rate = s.rate.map(|r| format!("{r:.12e}")).unwrap_or_default();
            let verdict = match s.verdict {
                Finiteness::Finite => "finite",
                Finiteness::Infinite => "infinite",
                Finiteness::Undecided => "undecided",
            };
            csv.push_str(&format!("{:.12e},{:.12e},{rate},{verdict}\n", s.theta, s.margin));
        }
        self.artifacts.push(("finiteness.csv".into(), csv));
        let hull = set.hull();
        let hull_json = match &hull {
            Ok(h) => h.to_json(),
            Err(e) => json!({ "none": e.to_string() }),
        };

        let nodes: Vec<Vec2> = (0..9)
            .flat_map(|i| (0..9).map(move |j| (i, j)))
            .map(|(i, j)| {
                let e = self.chart.u_max;
                Vec2::new(-e + e * i as f64 / 4.0, -e + e * j as f64 / 4.0)
            })
            .collect();
        let fx: Vec<f64> = nodes.iter().map(|&x| self.s.value(x)).collect::<Result<_>>()?;
        let mut gap = f64::INFINITY;
        for i in 0..=4 {
            for k in 0..8 {
                let (rho, t) = (0.2 * i as f64, TAU * k as f64 / 8.0);
                let y = Vec2::new(rho * t.cos(), rho * t.sin());
                let conj = legendre_transform(&self.s, y, spec.radius)?.value;
                for (x, f) in nodes.iter().zip(&fx) {
                    gap = gap.min(f + conj - x.dot(&y));
                }
            }
        }
        if self.cloud.is_empty() {
            self.cloud = gradient_image(&self.s, &self.chart)?;
        }
        self.hull = hull.ok();
        let pass = set.undecided == 0 && gap >= -self.sc.tolerances.fenchel_young;
        Ok((
            pass,
            json!({
                "angles": spec.angles,
                "points": set.points,
                "arcs": set.arcs,
                "undecided": set.undecided,
                "hull": hull_json,
                "fenchel_young_min_gap": gap,
            }),
        ))
    }

    fn theorem(&mut self) -> Result<(bool, Value)> {
        let p = self.sc.theorem_params();
        let report = theorem_check(&self.s, &p)?;
        let largest = p.extents.iter().copied().fold(0.0, f64::max);
        self.cloud = gradient_image(&self.s, &ChartGrid::square(largest, p.nodes)?)?;
        self.hull = report.hull.clone();
        Ok((report.verdict, serde_json::to_value(&report).unwrap_or(Value::Null)))
    }
}

/// Runs the enabled analyses in dependency order.
pub fn run(sc: &Scenario) -> std::result::Result<RunOutput, ConfigError> {
    sc.validate()?;
    let mut ctx = Ctx {
        sc,
        s: sc.surface()?,
        chart: sc.chart()?,
        order: sc.stencil()?,
        artifacts: vec![],
        hull: None,
        cloud: vec![],
    };
    let a = sc.analyses;
    let mut entries = vec![];
    let mut timings = vec![];
    macro_rules! step {
        ($on:expr, $name:literal, $call:expr) => {
            if $on {
                let t = Instant::now();
                entries.push(entry($name, $call));
                timings.push(($name, t.elapsed().as_secs_f64()));
            }
        };
    }
    step!(a.fundamental_forms, "fundamental_forms", ctx.forms());
    step!(a.codazzi, "codazzi", ctx.codazzi());
    step!(a.energy_variation, "energy_variation", ctx.energy());
    step!(a.reconstruct, "reconstruct", ctx.reconstruct());
    step!(a.legendre, "legendre", ctx.legendre());
    step!(a.theorem_check, "theorem_check", ctx.theorem());
    if a.legendre || a.theorem_check {
        let t = Instant::now();
        let svg = klein_figure(ctx.hull.as_ref(), &ctx.cloud, sc.figure.poincare);
        ctx.artifacts.push(("figure.svg".into(), svg));
        timings.push(("figure", t.elapsed().as_secs_f64()));
    }
    let mut artifacts = ctx.artifacts;
    artifacts.sort_by(|a, b| a.0.cmp(&b.0));
    let pass = entries.iter().all(|e| e.pass);
    let mut names: Vec<String> = artifacts.iter().map(|a| a.0.clone()).collect();
    names.extend(["report.json".to_string(), "timings.json".to_string()]);
    Ok(RunOutput {
        report: RunReport {
            scenario: sc.name.clone(),
            seed: sc.seed,
            config: sc.clone(),
            analyses: entries,
            artifacts: names,
            pass,
        },
        timings,
        artifacts,
    })
}
