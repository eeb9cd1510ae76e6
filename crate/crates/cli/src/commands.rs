use std::f64::consts::TAU;
use std::time::Instant;

use eigenbound::builtin::{self, euclidean_disc_lambda1};
use eigenbound::compare::{cheng_report, equality_criterion, CompareSettings, Reference};
use eigenbound::geometry::{area_from_polar_metric, radiality_deviation, warping_from_area};
use eigenbound::grid::RadialGrid;
use eigenbound::moments::run_until_converged;
use eigenbound::oracle::{eigen_2d_polar_study, shoot_radial_lambda1, Mesh2D};

use crate::config::{self, Geometry, Overrides, Resolved};
use crate::error::{CliError, StageExt};
use crate::report::{
    ConfigEcho, OracleMethod, OracleReport, PaperExample, RunReport, Series, Settings, SymmetrizeTable,
};
use crate::{Cli, Command};

const ORACLE_TOL: f64 = 1e-10;
const AREA_CHECK: f64 = 1e-10;

struct Stopwatch<'a> {
    report: &'a mut RunReport,
}

impl Stopwatch<'_> {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.report.timings.insert(stage, start.elapsed().as_secs_f64());
        out
    }
}

fn settings(cli: &Cli) -> Settings {
    let o = &cli.opts;
    Settings {
        grid: o.grid,
        theta: o.theta,
        kmax: o.kmax,
        tol: o.tol,
        mesh: [o.mesh.radial, o.mesh.angular],
    }
}

fn validate_settings(s: &Settings) -> Result<(), CliError> {
    if !(s.tol > 0.0 && s.tol < 1.0) {
        return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {}", s.tol)));
    }
    if s.kmax < 2 {
        return Err(CliError::Usage(format!("--kmax must be at least 2, got {}", s.kmax)));
    }
    Ok(())
}

fn model(cli: &Cli, with_kappa: bool) -> Result<Resolved, CliError> {
    let o = &cli.opts;
    let cfg = match (&o.config, o.builtin) {
        (Some(path), _) => config::load(path)?,
        (None, Some(id)) => config::from_builtin(id),
        (None, None) => return Err(CliError::Usage("one of --config or --builtin is required".into())),
    };
    config::resolve(
        cfg,
        Overrides {
            radius: o.radius,
            dimension: o.dimension,
            kappa: if with_kappa { o.kappa } else { None },
        },
    )
}

fn grid_for(radius: f64, intervals: usize) -> Result<RadialGrid, CliError> {
    RadialGrid::uniform(radius, intervals).map_err(|e| CliError::Usage(e.to_string()))
}

fn mesh_for(radius: f64, s: &Settings) -> Result<Mesh2D, CliError> {
    Mesh2D::new(radius, s.mesh[0], s.mesh[1]).map_err(|e| CliError::Usage(e.to_string()))
}

fn check_model(m: &Resolved, grid: &RadialGrid, m_theta: usize) -> Result<(), CliError> {
    match &m.geometry {
        Geometry::Model(model) => model.warping().validate(grid).stage("model"),
        Geometry::Metric(metric) => metric.validate(grid, m_theta).stage("model"),
        Geometry::Area(_) => Ok(()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<RunReport, CliError> {
    let s = settings(cli);
    validate_settings(&s)?;
    match &cli.command {
        Command::Bound => bound(cli, s),
        Command::Oracle => oracle(cli, s),
        Command::Symmetrize => symmetrize(cli, s),
        Command::Compare { warping_ref } => compare(cli, s, warping_ref.as_deref()),
        Command::PaperExample => paper_example(cli, s),
    }
}

fn bound(cli: &Cli, s: Settings) -> Result<RunReport, CliError> {
    let m = model(cli, true)?;
    let grid = grid_for(m.radius(), s.grid)?;
    check_model(&m, &grid, s.theta)?;
    let mut report = RunReport::new(
        "bound",
        ConfigEcho {
            model: Some(m.config.clone()),
            settings: s.clone(),
        },
    );
    let mut sw = Stopwatch { report: &mut report };
    let area = sw.time("symmetrize", || -> Result<_, CliError> {
        let area = m.area(&grid, s.theta)?;
        if matches!(m.geometry, Geometry::Metric(_) | Geometry::Area(_)) {
            warping_from_area(&area).stage("symmetrize")?;
        }
        Ok(area)
    })?;
    let run = sw
        .time("bound", || run_until_converged(&area, &grid, s.tol, s.kmax))
        .stage("bound")?;
    if !run.converged() {
        log::warn!("estimators did not converge within {} levels", run.levels);
    }
    report.bound = Some(run.bound());
    report.series = Some(Series::from(&run));
    Ok(report)
}

fn radial_oracle(model: &eigenbound::geometry::RiemannianModel, grid: &RadialGrid) -> Result<OracleReport, CliError> {
    let fine = shoot_radial_lambda1(model, grid, ORACLE_TOL).stage("oracle")?;
    let coarse_grid = grid_for(
        grid.radius(),
        (grid.intervals() / 2).max(eigenbound::grid::MIN_INTERVALS),
    )?;
    let coarse = shoot_radial_lambda1(model, &coarse_grid, ORACLE_TOL).stage("oracle")?;
    // fourth-order stepper
    let diff = fine.lambda1 - coarse.lambda1;
    Ok(OracleReport {
        method: OracleMethod::RadialShooting,
        lambda1: fine.lambda1,
        richardson: diff.abs() / 15.0,
        coarse_lambda1: coarse.lambda1,
        extrapolated: fine.lambda1 + diff / 15.0,
        residual: fine.residual,
        iterations: fine.iterations,
        tol: ORACLE_TOL,
    })
}

fn polar_oracle(metric: &eigenbound::geometry::PolarMetric2D, s: &Settings) -> Result<OracleReport, CliError> {
    let mesh = mesh_for(metric.radius(), s)?;
    let study = eigen_2d_polar_study(metric, &mesh, ORACLE_TOL).stage("oracle")?;
    Ok(OracleReport {
        method: OracleMethod::PolarFiniteVolume,
        lambda1: study.fine.lambda1,
        richardson: study.richardson,
        coarse_lambda1: study.coarse.lambda1,
        extrapolated: study.extrapolated,
        residual: study.fine.residual,
        iterations: study.fine.iterations,
        tol: ORACLE_TOL,
    })
}

fn oracle(cli: &Cli, s: Settings) -> Result<RunReport, CliError> {
    let m = model(cli, true)?;
    let grid = grid_for(m.radius(), s.grid)?;
    check_model(&m, &grid, s.theta)?;
    let mut report = RunReport::new(
        "oracle",
        ConfigEcho {
            model: Some(m.config.clone()),
            settings: s.clone(),
        },
    );
    let mut sw = Stopwatch { report: &mut report };
    let result = sw.time("oracle", || -> Result<_, CliError> {
        match &m.geometry {
            Geometry::Metric(metric) => polar_oracle(metric, &s),
            Geometry::Model(model) => radial_oracle(model, &grid),
            Geometry::Area(_) => match m.subject()? {
                eigenbound::compare::Subject::Model(model) => radial_oracle(&model, &grid),
                eigenbound::compare::Subject::Metric(_) => unreachable!("area configs symmetrize to models"),
            },
        }
    })?;
    report.oracle = Some(result);
    Ok(report)
}

fn symmetrize(cli: &Cli, s: Settings) -> Result<RunReport, CliError> {
    let m = model(cli, true)?;
    let grid = grid_for(m.radius(), s.grid)?;
    check_model(&m, &grid, s.theta)?;
    let mut report = RunReport::new(
        "symmetrize",
        ConfigEcho {
            model: Some(m.config.clone()),
            settings: s.clone(),
        },
    );
    let mut sw = Stopwatch { report: &mut report };
    let table = sw.time("symmetrize", || -> Result<_, CliError> {
        let area = m.area(&grid, s.theta)?;
        let w = warping_from_area(&area).stage("symmetrize")?;
        let a = area.samples(&grid).stage("symmetrize")?;
        let omega = grid
            .nodes()
            .iter()
            .map(|&t| w.eval(t))
            .collect::<eigenbound::Result<Vec<_>>>()
            .stage("symmetrize")?;
        Ok(SymmetrizeTable {
            t: grid.nodes().to_vec(),
            area: a,
            omega,
        })
    })?;
    report.symmetrize = Some(table);
    Ok(report)
}

fn compare(cli: &Cli, s: Settings, warping_ref: Option<&str>) -> Result<RunReport, CliError> {
    let m = model(cli, false)?;
    let grid = grid_for(m.radius(), s.grid)?;
    check_model(&m, &grid, s.theta)?;
    let reference = match warping_ref {
        Some(src) => Reference::Warping(config::warping_expr(src, m.radius(), m.config.kappa)?),
        None => Reference::SpaceForm(cli.opts.kappa.unwrap_or(0.0)),
    };
    let settings = CompareSettings {
        grid_intervals: s.grid,
        m_theta: s.theta,
        k_max: s.kmax,
        tol: s.tol,
        ..CompareSettings::default()
    };
    let mut report = RunReport::new(
        "compare",
        ConfigEcho {
            model: Some(m.config.clone()),
            settings: s,
        },
    );
    let subject = m.subject()?;
    let mut sw = Stopwatch { report: &mut report };
    let rep = sw
        .time("compare", || {
            cheng_report(&m.config.name, &subject, &reference, &settings)
        })
        .stage("compare")?;
    report.bound = Some(rep.bound);
    report.comparison = Some(rep);
    Ok(report)
}

fn paper_example(cli: &Cli, s: Settings) -> Result<RunReport, CliError> {
    if cli.opts.config.is_some() || cli.opts.builtin.is_some() {
        return Err(CliError::Usage("paper-example takes no model; use --radius".into()));
    }
    let radius = cli.opts.radius.unwrap_or(3.0);
    let metric = builtin::example_metric(radius).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = grid_for(radius, s.grid)?;
    let cfg = config::from_builtin(config::BuiltinId::PaperExample);
    let resolved = config::resolve(
        cfg,
        Overrides {
            radius: Some(radius),
            ..Overrides::default()
        },
    )?;
    let mut report = RunReport::new(
        "paper-example",
        ConfigEcho {
            model: Some(resolved.config),
            settings: s.clone(),
        },
    );
    let mut sw = Stopwatch { report: &mut report };

    let (area, area_error) = sw.time("symmetrize", || -> Result<_, CliError> {
        let area = area_from_polar_metric(&metric, &grid, s.theta).stage("symmetrize")?;
        let samples = area.samples(&grid).stage("symmetrize")?;
        let err = grid
            .nodes()
            .iter()
            .zip(&samples)
            .map(|(t, a)| (a - TAU * t).abs())
            .fold(0.0, f64::max);
        if err > AREA_CHECK {
            return Err(CliError::Numerical {
                stage: "symmetrize",
                source: eigenbound::Error::InvalidArea(format!("max |A(t) - 2πt| = {err:e}")),
            });
        }
        Ok((area, err))
    })?;
    let run = sw
        .time("bound", || run_until_converged(&area, &grid, s.tol, s.kmax))
        .stage("bound")?;
    let oracle = sw.time("oracle", || polar_oracle(&metric, &s))?;
    let (radiality, equality) = sw.time("radiality", || -> Result<_, CliError> {
        let r = radiality_deviation(&metric, &grid, s.theta).stage("radiality")?;
        let eq =
            equality_criterion(&metric, &grid, s.theta, CompareSettings::default().radiality_tol).stage("radiality")?;
        Ok((r, eq))
    })?;

    let canonical = euclidean_disc_lambda1(radius);
    let gap = canonical - oracle.lambda1;
    report.paper_example = Some(PaperExample {
        radius,
        area_error,
        canonical_lambda1: canonical,
        bound: run.bound(),
        oracle_lambda1: oracle.lambda1,
        richardson: oracle.richardson,
        gap,
        strict_inequality: gap > oracle.richardson,
        radiality,
        equality,
    });
    report.bound = Some(run.bound());
    report.series = Some(Series::from(&run));
    report.oracle = Some(oracle);
    Ok(report)
}
