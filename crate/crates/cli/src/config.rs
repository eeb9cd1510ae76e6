//! Model configuration files and built-in model ids.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use eigenbound::expr::{Bindings, Expr, Var};
use eigenbound::geometry::{AreaFunction, PolarMetric2D, RiemannianModel, WarpingFunction};
use eigenbound::{builtin, compare::Subject};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, StageExt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Warping,
    Area,
    Polar2d,
    Builtin,
}

/// A model as written in a JSON config file. Exactly one of `omega`, `area`,
/// `rho` or `builtin` is given, matching `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Value of the `kappa` variable in expressions, or the curvature of a
    /// `spherical`/`hyperbolic` builtin given without one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinId {
    Euclidean,
    Spherical(Option<f64>),
    Hyperbolic(Option<f64>),
    PaperExample,
}

impl FromStr for BuiltinId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (head, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => {
                let inner = s[i + 1..s.len() - 1].trim();
                let k = inner
                    .parse::<f64>()
                    .map_err(|_| format!("bad curvature `{inner}` in builtin id `{s}`"))?;
                (&s[..i], Some(k))
            }
            Some(_) => return Err(format!("unbalanced parenthesis in builtin id `{s}`")),
            None => (s, None),
        };
        match (head, arg) {
            ("euclidean", None) => Ok(BuiltinId::Euclidean),
            ("spherical", k) => Ok(BuiltinId::Spherical(k)),
            ("hyperbolic", k) => Ok(BuiltinId::Hyperbolic(k)),
            ("paper-example", None) => Ok(BuiltinId::PaperExample),
            _ => Err(format!(
                "unknown builtin `{s}`; expected euclidean, spherical(k), hyperbolic(k) or paper-example"
            )),
        }
    }
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinId::Euclidean => f.write_str("euclidean"),
            BuiltinId::Spherical(Some(k)) => write!(f, "spherical({k})"),
            BuiltinId::Spherical(None) => f.write_str("spherical"),
            BuiltinId::Hyperbolic(Some(k)) => write!(f, "hyperbolic({k})"),
            BuiltinId::Hyperbolic(None) => f.write_str("hyperbolic"),
            BuiltinId::PaperExample => f.write_str("paper-example"),
        }
    }
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub radius: Option<f64>,
    pub dimension: Option<usize>,
    pub kappa: Option<f64>,
}

/// The geometry described by a config.
#[derive(Debug, Clone)]
pub enum Geometry {
    Model(RiemannianModel),
    Area(AreaFunction),
    Metric(PolarMetric2D),
}

#[derive(Debug, Clone)]
pub struct Resolved {
    /// The config with defaults and overrides applied, echoed in reports.
    pub config: ModelConfig,
    pub geometry: Geometry,
}

impl Resolved {
    pub fn radius(&self) -> f64 {
        self.config.radius.expect("resolved radius")
    }

    /// The area function of the geodesic spheres, symmetrizing 2-D metrics on `grid`.
    pub fn area(&self, grid: &eigenbound::grid::RadialGrid, m_theta: usize) -> Result<AreaFunction, CliError> {
        match &self.geometry {
            Geometry::Model(m) => m.area().stage("area"),
            Geometry::Area(a) => Ok(a.clone()),
            Geometry::Metric(m) => eigenbound::geometry::area_from_polar_metric(m, grid, m_theta).stage("symmetrize"),
        }
    }

    pub fn subject(&self) -> Result<Subject, CliError> {
        Ok(match &self.geometry {
            Geometry::Model(m) => Subject::Model(m.clone()),
            Geometry::Metric(m) => Subject::Metric(m.clone()),
            Geometry::Area(a) => {
                let w = eigenbound::geometry::warping_from_area(a).stage("symmetrize")?;
                Subject::Model(RiemannianModel::new(a.dimension(), w).stage("symmetrize")?)
            }
        })
    }
}

pub fn load(path: &Path) -> Result<ModelConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn from_builtin(id: BuiltinId) -> ModelConfig {
    ModelConfig {
        name: id.to_string(),
        dimension: None,
        radius: None,
        kind: Kind::Builtin,
        omega: None,
        area: None,
        rho: None,
        builtin: Some(id.to_string()),
        kappa: None,
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_expr(field: &str, src: &str, allowed: &[Var]) -> Result<Expr, CliError> {
    let e = Expr::parse(src).map_err(|e| bad(format!("{field}: {e}")))?;
    if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
        let names: Vec<_> = allowed.iter().map(|v| v.name()).collect();
        return Err(bad(format!(
            "{field}: variable `{}` is not available here (allowed: {})",
            v.name(),
            names.join(", ")
        )));
    }
    Ok(e)
}

fn base_bindings(e: &Expr, radius: f64, kappa: Option<f64>, field: &str) -> Result<Bindings, CliError> {
    let mut b = Bindings::new().with(Var::Radius, radius);
    match kappa {
        Some(k) => b.set(Var::Kappa, k),
        None if e.variables().contains(&Var::Kappa) => {
            return Err(bad(format!("{field} uses `kappa` but no kappa was given")));
        }
        None => {}
    }
    Ok(b)
}

/// A warping function `W(t)` given as an expression in `t`, `R` and `kappa`.
pub fn warping_expr(src: &str, radius: f64, kappa: Option<f64>) -> Result<WarpingFunction, CliError> {
    let e = parse_expr("omega", src, &[Var::T, Var::Radius, Var::Kappa])?;
    let b = base_bindings(&e, radius, kappa, "omega")?;
    Ok(WarpingFunction::fallible(radius, move |t| {
        Ok(e.eval(&b.with(Var::T, t))?)
    }))
}

/// Applies defaults and overrides, checks the invariants of each kind and
/// builds the geometry.
pub fn resolve(mut cfg: ModelConfig, ov: Overrides) -> Result<Resolved, CliError> {
    if let Some(r) = ov.radius {
        cfg.radius = Some(r);
    }
    if let Some(n) = ov.dimension {
        cfg.dimension = Some(n);
    }
    if let Some(k) = ov.kappa {
        cfg.kappa = Some(k);
    }
    let present = [
        ("omega", cfg.omega.is_some(), Kind::Warping),
        ("area", cfg.area.is_some(), Kind::Area),
        ("rho", cfg.rho.is_some(), Kind::Polar2d),
        ("builtin", cfg.builtin.is_some(), Kind::Builtin),
    ];
    for (field, given, kind) in present {
        if given != (kind == cfg.kind) {
            return Err(bad(if given {
                format!("field `{field}` does not belong to kind {:?}", cfg.kind)
            } else {
                format!("kind {:?} requires field `{field}`", cfg.kind)
            }));
        }
    }

    let builtin_id = match &cfg.builtin {
        Some(s) => Some(s.parse::<BuiltinId>().map_err(bad)?),
        None => None,
    };
    let fixed_2d = cfg.kind == Kind::Polar2d || builtin_id == Some(BuiltinId::PaperExample);
    if fixed_2d {
        match cfg.dimension {
            Some(n) if n != 2 => return Err(bad(format!("2-D metrics need dimension 2, got {n}"))),
            _ => cfg.dimension = Some(2),
        }
    }
    let dimension = *cfg.dimension.get_or_insert(2);
    if dimension < 2 {
        return Err(bad(format!("dimension must be at least 2, got {dimension}")));
    }
    let default_radius = if builtin_id == Some(BuiltinId::PaperExample) {
        3.0
    } else {
        1.0
    };
    let radius = *cfg.radius.get_or_insert(default_radius);
    if !(radius.is_finite() && radius > 0.0) {
        return Err(bad(format!("radius must be positive, got {radius}")));
    }

    let geometry = match cfg.kind {
        Kind::Warping => {
            let w = warping_expr(cfg.omega.as_deref().unwrap(), radius, cfg.kappa)?;
            Geometry::Model(RiemannianModel::new(dimension, w).stage("model")?)
        }
        Kind::Area => {
            let e = parse_expr("area", cfg.area.as_deref().unwrap(), &[Var::T, Var::Radius, Var::Kappa])?;
            let b = base_bindings(&e, radius, cfg.kappa, "area")?;
            let a =
                AreaFunction::fallible(dimension, radius, move |t| Ok(e.eval(&b.with(Var::T, t))?)).stage("model")?;
            Geometry::Area(a)
        }
        Kind::Polar2d => {
            let e = parse_expr(
                "rho",
                cfg.rho.as_deref().unwrap(),
                &[Var::R, Var::Theta, Var::Radius, Var::Kappa],
            )?;
            let b = base_bindings(&e, radius, cfg.kappa, "rho")?;
            let m = PolarMetric2D::fallible(
                radius,
                move |r, th| Ok(e.eval(&b.with(Var::R, r).with(Var::Theta, th))?),
            )
            .stage("model")?;
            Geometry::Metric(m)
        }
        Kind::Builtin => {
            let id = builtin_id.unwrap();
            let curvature = |k: Option<f64>| k.or(cfg.kappa).unwrap_or(1.0);
            match id {
                BuiltinId::Euclidean => Geometry::Model(builtin::euclidean(dimension, radius).stage("model")?),
                BuiltinId::Spherical(k) => {
                    Geometry::Model(builtin::spherical(dimension, curvature(k), radius).stage("model")?)
                }
                BuiltinId::Hyperbolic(k) => {
                    Geometry::Model(builtin::hyperbolic(dimension, curvature(k), radius).stage("model")?)
                }
                BuiltinId::PaperExample => Geometry::Metric(builtin::example_metric(radius).stage("model")?),
            }
        }
    };
    Ok(Resolved { config: cfg, geometry })
}
