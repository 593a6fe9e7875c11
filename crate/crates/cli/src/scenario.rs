//! Scenario documents: one JSON object per run.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gaussmap::chart::{field_from_csv, ChartGrid, StencilOrder};
use gaussmap::graphs::{
    conjugate_construct, ClosedForm, GraphSource, Potential, SampledGraph, SpacelikeGraph, CONJUGATE_TABLE_RESOLUTION,
};
use gaussmap::legendre::{FinitenessParams, TheoremParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown built-in scenario {0:?}")]
    UnknownBuiltin(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Hyperboloid {
        #[serde(default = "one")]
        radius: f64,
    },
    HyperboloidBump {
        amplitude: f64,
    },
    Affine {
        slope: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
    HalfDisc {
        #[serde(default = "default_eps")]
        eps: f64,
    },
    ThreePoint {
        #[serde(default = "default_eps")]
        eps: f64,
        angles: [f64; 3],
    },
    DiscConjugate,
    /// Values of `f` on a rectangular grid, CSV with columns `u,v,value`.
    Sampled {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSpec {
    /// Half side of the square chart `[−e, e]²`.
    pub extent: f64,
    pub spacing: f64,
}

impl Default for ChartSpec {
    fn default() -> Self {
        Self { extent: 1.0, spacing: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub fundamental_forms: bool,
    pub codazzi: bool,
    pub energy_variation: bool,
    pub reconstruct: bool,
    pub legendre: bool,
    pub theorem_check: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Self {
            fundamental_forms: true,
            codazzi: true,
            energy_variation: true,
            reconstruct: true,
            legendre: false,
            theorem_check: false,
        }
    }
}

impl Analyses {
    pub fn none() -> Self {
        Self {
            fundamental_forms: false,
            codazzi: false,
            energy_variation: false,
            reconstruct: false,
            legendre: false,
            theorem_check: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `max |K_g + det B|`.
    pub gauss: f64,
    pub min_order: f64,
    /// Multiplier of the calibrated Codazzi tolerance `C·h^1.8`.
    pub codazzi_factor: f64,
    pub energy: f64,
    pub t_step: f64,
    pub bumps: usize,
    pub tol_gc: f64,
    pub tol_frame: f64,
    pub holonomy: f64,
    pub alignment: f64,
    pub substeps: usize,
    pub fenchel_young: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gauss: 5e-3,
            min_order: 1.8,
            codazzi_factor: 10.0,
            energy: 1e-3,
            t_step: 1e-3,
            bumps: 20,
            tol_gc: 1e-2,
            tol_frame: 1e-4,
            holonomy: 1e-6,
            alignment: 1e-6,
            substeps: 4,
            fenchel_young: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegendreSpec {
    pub radius: f64,
    pub angles: usize,
    pub delta_m: f64,
    pub delta_far: f64,
    pub tau: f64,
    pub circle_samples: usize,
}

impl Default for LegendreSpec {
    fn default() -> Self {
        let f = FinitenessParams::default();
        Self {
            radius: f.radius,
            angles: 1024,
            delta_m: f.delta_m,
            delta_far: f.delta_far,
            tau: f.tau,
            circle_samples: f.circle_samples,
        }
    }
}

impl LegendreSpec {
    pub fn finiteness(&self) -> FinitenessParams {
        FinitenessParams {
            radius: self.radius,
            delta_m: self.delta_m,
            delta_far: self.delta_far,
            tau: self.tau,
            circle_samples: self.circle_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremSpec {
    pub extents: Vec<f64>,
    pub nodes: usize,
    pub boundary_samples: usize,
    pub inclusion_tol: f64,
}

impl Default for TheoremSpec {
    fn default() -> Self {
        let p = TheoremParams::default();
        Self {
            extents: p.extents,
            nodes: p.nodes,
            boundary_samples: p.boundary_samples,
            inclusion_tol: p.inclusion_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FigureSpec {
    pub poincare: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub chart: ChartSpec,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub legendre: LegendreSpec,
    #[serde(default)]
    pub theorem: TheoremSpec,
    #[serde(default)]
    pub figure: FigureSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_order() -> u32 {
    2
}

fn default_seed() -> u64 {
    20240101
}

pub const MAX_NODES_PER_SIDE: usize = 2001;
pub const MAX_ANGLES: usize = 16384;

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// A path, or `builtin:<name>`.
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            let s = builtin(name).ok_or_else(|| ConfigError::UnknownBuiltin(name.into()))?;
            s.validate()?;
            return Ok(s);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut s = Self::from_json(&text)?;
        if let SurfaceSpec::Sampled { path: p } = &mut s.surface {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("chart.extent", self.chart.extent)?;
        positive("chart.spacing", self.chart.spacing)?;
        let per_side = 2.0 * self.chart.extent / self.chart.spacing;
        if per_side < 8.0 || per_side + 1.0 > MAX_NODES_PER_SIDE as f64 {
            return Err(invalid(format!(
                "chart must have between 9 and {MAX_NODES_PER_SIDE} nodes per side, got {:.0}",
                per_side + 1.0
            )));
        }
        self.stencil()?;
        let t = &self.tolerances;
        for (name, x) in [
            ("tolerances.gauss", t.gauss),
            ("tolerances.min_order", t.min_order),
            ("tolerances.codazzi_factor", t.codazzi_factor),
            ("tolerances.energy", t.energy),
            ("tolerances.t_step", t.t_step),
            ("tolerances.tol_gc", t.tol_gc),
            ("tolerances.tol_frame", t.tol_frame),
            ("tolerances.holonomy", t.holonomy),
            ("tolerances.alignment", t.alignment),
            ("tolerances.fenchel_young", t.fenchel_young),
        ] {
            positive(name, x)?;
        }
        if t.bumps == 0 || t.substeps == 0 {
            return Err(invalid("tolerances.bumps and tolerances.substeps must be at least 1"));
        }
        let l = &self.legendre;
        for (name, x) in [
            ("legendre.radius", l.radius),
            ("legendre.delta_m", l.delta_m),
            ("legendre.delta_far", l.delta_far),
            ("legendre.tau", l.tau),
        ] {
            positive(name, x)?;
        }
        if !(8..=MAX_ANGLES).contains(&l.angles) || !(8..=MAX_ANGLES).contains(&l.circle_samples) {
            return Err(invalid(format!("legendre.angles and legendre.circle_samples must lie in [8, {MAX_ANGLES}]")));
        }
        let th = &self.theorem;
        if th.extents.is_empty() {
            return Err(invalid("theorem.extents must not be empty"));
        }
        for &e in &th.extents {
            positive("theorem.extents", e)?;
        }
        if !(3..=MAX_NODES_PER_SIDE).contains(&th.nodes) || th.boundary_samples == 0 {
            return Err(invalid("theorem.nodes must lie in [3, 2001] and theorem.boundary_samples must be positive"));
        }
        positive("theorem.inclusion_tol", th.inclusion_tol)?;
        match &self.surface {
            SurfaceSpec::Hyperboloid { radius } => positive("surface.radius", *radius)?,
            SurfaceSpec::HyperboloidBump { amplitude } if !amplitude.is_finite() || amplitude.abs() > 0.2 => {
                return Err(invalid("surface.amplitude must lie in [−0.2, 0.2]"))
            }
            SurfaceSpec::Affine { slope, offset } => {
                if !(slope[0].hypot(slope[1]) < 1.0) || !offset.is_finite() {
                    return Err(invalid("affine slope must have norm < 1"));
                }
            }
            SurfaceSpec::HalfDisc { eps } | SurfaceSpec::ThreePoint { eps, .. } => positive("surface.eps", *eps)?,
            _ => {}
        }
        if let SurfaceSpec::ThreePoint { angles, .. } = &self.surface {
            if angles.iter().any(|a| !a.is_finite()) {
                return Err(invalid("three-point angles must be finite"));
            }
        }
        Ok(())
    }

    pub fn stencil(&self) -> Result<StencilOrder, ConfigError> {
        StencilOrder::from_int(self.order).map_err(|_| invalid(format!("order must be 2 or 4, got {}", self.order)))
    }

    pub fn chart(&self) -> Result<ChartGrid, ConfigError> {
        ChartGrid::square_with_spacing(self.chart.extent, self.chart.spacing).map_err(|e| invalid(e.to_string()))
    }

    pub fn theorem_params(&self) -> TheoremParams {
        TheoremParams {
            extents: self.theorem.extents.clone(),
            nodes: self.theorem.nodes,
            boundary_samples: self.theorem.boundary_samples,
            angles: self.legendre.angles,
            finiteness: self.legendre.finiteness(),
            inclusion_tol: self.theorem.inclusion_tol,
            ..TheoremParams::default()
        }
    }

    /// Builds the surface. Sampled inputs are read and checked here, so every
    /// failure is a configuration error.
    pub fn surface(&self) -> Result<SpacelikeGraph, ConfigError> {
        let conj = |p| conjugate_construct(p, CONJUGATE_TABLE_RESOLUTION).map_err(|e| invalid(e.to_string()));
        Ok(match &self.surface {
            SurfaceSpec::Hyperboloid { radius } => {
                SpacelikeGraph::closed_form(ClosedForm::Hyperboloid { radius: *radius })
            }
            SurfaceSpec::HyperboloidBump { amplitude } => {
                SpacelikeGraph::closed_form(ClosedForm::HyperboloidBump { amplitude: *amplitude })
            }
            SurfaceSpec::Affine { slope, offset } => {
                SpacelikeGraph::closed_form(ClosedForm::Affine { slope: *slope, offset: *offset })
            }
            SurfaceSpec::HalfDisc { eps } => conj(Potential::HalfDisc { eps: *eps })?,
            SurfaceSpec::ThreePoint { eps, angles } => conj(Potential::ThreePoint { eps: *eps, angles: *angles })?,
            SurfaceSpec::DiscConjugate => conj(Potential::Disc)?,
            SurfaceSpec::Sampled { path } => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                let grid = csv_grid(&text)?;
                let chart = self.chart()?;
                if chart.u_min < grid.u_min
                    || chart.u_max > grid.u_max
                    || chart.v_min < grid.v_min
                    || chart.v_max > grid.v_max
                {
                    return Err(invalid("chart extends beyond the sampled grid"));
                }
                let values = field_from_csv::<f64>(grid, &text).map_err(|e| invalid(e.to_string()))?;
                let sampled = SampledGraph::new(&values, self.stencil()?).map_err(|e| invalid(e.to_string()))?;
                SpacelikeGraph::new(GraphSource::Sampled(Arc::new(sampled)))
            }
        })
    }
}

/// Grid spanned by the `u,v` columns of a field CSV.
fn csv_grid(text: &str) -> Result<ChartGrid, ConfigError> {
    let mut us = vec![];
    let mut vs = vec![];
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
        match (cols.next(), cols.next()) {
            (Some(Ok(u)), Some(Ok(v))) => {
                us.push(u);
                vs.push(v);
            }
            _ => return Err(invalid(format!("bad sampled row {line:?}"))),
        }
    }
    let distinct = |xs: &mut Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        xs.len()
    };
    let (nu, nv) = (distinct(&mut us), distinct(&mut vs));
    if nu < 5 || nv < 5 {
        return Err(invalid("sampled grid needs at least 5 nodes per side"));
    }
    ChartGrid::new(us[0], us[nu - 1], vs[0], vs[nv - 1], nu, nv).map_err(|e| invalid(e.to_string()))
}

pub const BUILTINS: &[&str] =
    &["hyperboloid-full", "hyperboloid-bump", "half-disc", "three-point", "affine-theorem", "disc-conjugate"];

pub fn builtin(name: &str) -> Option<Scenario> {
    let base = |surface| Scenario {
        name: name.to_string(),
        surface,
        chart: ChartSpec::default(),
        order: default_order(),
        seed: default_seed(),
        analyses: Analyses::default(),
        tolerances: Tolerances::default(),
        legendre: LegendreSpec::default(),
        theorem: TheoremSpec::default(),
        figure: FigureSpec::default(),
        output: None,
    };
    let all = Analyses { legendre: true, theorem_check: true, ..Analyses::default() };
    Some(match name {
        "hyperboloid-full" => Scenario { analyses: all, ..base(SurfaceSpec::Hyperboloid { radius: 1.0 }) },
        "hyperboloid-bump" => base(SurfaceSpec::HyperboloidBump { amplitude: 0.05 }),
        "half-disc" => Scenario {
            analyses: all,
            theorem: TheoremSpec { extents: vec![3.0, 6.0, 12.0, 24.0], ..TheoremSpec::default() },
            ..base(SurfaceSpec::HalfDisc { eps: 0.1 })
        },
        "three-point" => Scenario {
            analyses: Analyses { legendre: true, ..Analyses::none() },
            ..base(SurfaceSpec::ThreePoint { eps: 0.1, angles: gaussmap::acceptance::three_point_angles() })
        },
        "affine-theorem" => Scenario {
            analyses: Analyses { theorem_check: true, ..Analyses::none() },
            ..base(SurfaceSpec::Affine { slope: [0.3, -0.1], offset: 0.5 })
        },
        "disc-conjugate" => base(SurfaceSpec::DiscConjugate),
        _ => return None,
    })
}
