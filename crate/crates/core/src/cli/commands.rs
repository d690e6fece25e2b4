//! The `bound`, `sweep`, `csl` and `montecarlo` commands, as library calls
//! that return their output text.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AnglePolicy, Config, SchemeChoice, SweepConfig, SweepVariable};
use super::output::{render, Cell, Table, VERSION};
use super::units::Dimension;
use crate::csl::{min_detectable_rate, parse_overlay, SphereSpec};
use crate::dynamics::{canonical_squeeze_angle, db_to_squeezing, FreeExpansion, Scenario, SqueezedThermalSpec, AMU_KG};
use crate::error::{Error, Result};
use crate::fisher::{
    bound_for, heterodyne_crb, homodyne_crb, optimal_homodyne_angle, optimal_homodyne_crb,
    optimal_homodyne_squeeze_angle, qcrb_branch_select, qcrb_closed_form, MeasurementScheme, PrecisionBound,
};
use crate::montecarlo::{saturation_study, EstimationReport, ExperimentRun};
use crate::sld::{required_squeezing_db, sld_spectrum, SldQuadraticForm};

/// A bound together with the state and quadrature it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub bound: PrecisionBound,
    pub squeezing: f64,
    pub phi: f64,
    pub theta: Option<f64>,
}

fn quadrature_angle(choice: SchemeChoice, tau: f64) -> Result<Option<f64>> {
    Ok(match choice {
        SchemeChoice::Position => Some(0.0),
        SchemeChoice::Momentum => Some(std::f64::consts::FRAC_PI_2),
        SchemeChoice::Homodyne(theta) => Some(theta),
        SchemeChoice::OptimalHomodyne => Some(optimal_homodyne_angle(tau)?),
        SchemeChoice::Heterodyne | SchemeChoice::Qcrb => None,
    })
}

/// Minimise a `pi`-periodic function of the squeezing angle: grid scan, then
/// golden-section refinement around the best grid point.
fn minimise_angle(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    const GRID: usize = 90;
    let step = std::f64::consts::PI / GRID as f64;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..GRID {
        let phi = k as f64 * step;
        let v = f(phi)?;
        if v < best.1 {
            best = (phi, v);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bound for `choice` on a squeezed thermal input. The optimal-homodyne and
/// QCRB schemes choose their own squeezing angle; the others follow `policy`.
pub fn evaluate(
    choice: SchemeChoice,
    thermal_variance: f64,
    squeezing: f64,
    policy: AnglePolicy,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<Evaluation> {
    let base = SqueezedThermalSpec::new(thermal_variance, squeezing, 0.0)?;
    let needs_time = matches!(choice, SchemeChoice::OptimalHomodyne | SchemeChoice::Qcrb)
        || (policy == AnglePolicy::Auto && choice != SchemeChoice::Heterodyne);
    if tau == 0.0 && needs_time {
        return Err(Error::Uninformative);
    }
    let theta = quadrature_angle(choice, tau)?;
    let (spec, bound) = match choice {
        SchemeChoice::OptimalHomodyne => {
            let theta = theta.expect("homodyne");
            let spec = base
                .with_squeezing(squeezing.abs())
                .with_angle(optimal_homodyne_squeeze_angle(theta, tau));
            (spec, optimal_homodyne_crb(&spec, tau, lambda_tilde, lambda_sql)?)
        }
        SchemeChoice::Qcrb => {
            let spec = qcrb_branch_select(&base, tau, lambda_tilde)?.apply(&base);
            (spec, qcrb_closed_form(&spec, tau, lambda_tilde, lambda_sql)?)
        }
        SchemeChoice::Heterodyne => {
            let phi = match policy {
                AnglePolicy::Fixed(phi) => phi,
                AnglePolicy::Auto => minimise_angle(|phi| {
                    Ok(heterodyne_crb(&base.with_angle(phi), tau, lambda_tilde, lambda_sql)?.dimensionless_bound)
                })?,
            };
            let spec = base.with_angle(phi);
            (spec, heterodyne_crb(&spec, tau, lambda_tilde, lambda_sql)?)
        }
        _ => {
            let theta = theta.expect("homodyne");
            let phi = match policy {
                AnglePolicy::Fixed(phi) => phi,
                AnglePolicy::Auto => optimal_homodyne_squeeze_angle(theta, tau),
            };
            let spec = base.with_angle(phi);
            (spec, homodyne_crb(theta, &spec, tau, lambda_tilde, lambda_sql)?)
        }
    };
    Ok(Evaluation {
        bound,
        squeezing: spec.squeezing(),
        phi: spec.angle(),
        theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub scheme: String,
    /// `None` when the scheme is degenerate at this point.
    pub variance_single_shot: Option<f64>,
    pub std_single_shot: Option<f64>,
    pub std_repetitions: Option<f64>,
    pub dimensionless_bound: Option<f64>,
    pub squeezing: Option<f64>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub message: Option<String>,
}

/// Squeezing (dB) needed to make phonon counting optimal, for both parameter
/// conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldSqueezing {
    pub derived: Option<f64>,
    pub table1_literal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub version: String,
    pub tau: f64,
    pub lambda: f64,
    pub lambda_sql: f64,
    pub lambda_tilde: f64,
    pub repetitions: f64,
    pub thermal_variance: f64,
    pub squeezing_db: f64,
    pub entries: Vec<BoundEntry>,
    pub optimal_homodyne_angle: Option<f64>,
    pub qcrb_squeeze_angle: Option<f64>,
    pub sld_squeezing_db: SldSqueezing,
}

impl BoundReport {
    /// First degenerate-regime message, if any scheme hit a singular corner.
    pub fn degenerate(&self) -> Option<String> {
        self.entries
            .iter()
            .find_map(|e| e.message.as_ref().map(|m| format!("{}: {m}", e.scheme)))
    }

    pub fn entry(&self, scheme: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.scheme == scheme)
    }

    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("degenerate".to_string(), |v| format!("{v:.6e}"));
        let mut s = format!(
            "diffest {}\ntau = {:e}\nLambda = {:e} m^-2 s^-1\nLambda_SQL = {:e} m^-2 s^-1\nlambda_tilde = {:e}\nnu = {}\nT = {}, squeezing = {} dB\n\n",
            self.version, self.tau, self.lambda, self.lambda_sql, self.lambda_tilde, self.repetitions,
            self.thermal_variance, self.squeezing_db
        );
        s.push_str(&format!(
            "{:<22} {:>14} {:>14} {:>14} {:>10} {:>10}\n",
            "scheme", "var/shot", "std/shot", "std(nu)", "phi[rad]", "theta[rad]"
        ));
        for e in &self.entries {
            s.push_str(&format!(
                "{:<22} {:>14} {:>14} {:>14} {:>10} {:>10}\n",
                e.scheme,
                opt(e.variance_single_shot),
                opt(e.std_single_shot),
                opt(e.std_repetitions),
                e.phi.map_or("-".into(), |v| format!("{v:.6}")),
                e.theta.map_or("-".into(), |v| format!("{v:.6}")),
            ));
        }
        s.push_str(&format!(
            "\noptimal homodyne angle: {}\nQCRB squeezing angle: {}\nSLD squeezing: {} dB (derived), {} dB (table literal)\n",
            self.optimal_homodyne_angle.map_or("-".into(), |v| format!("{v:.9}")),
            self.qcrb_squeeze_angle.map_or("-".into(), |v| format!("{v:.9}")),
            self.sld_squeezing_db.derived.map_or("-".into(), |v| format!("{v:.3}")),
            self.sld_squeezing_db.table1_literal.map_or("-".into(), |v| format!("{v:.3}")),
        ));
        if let Some(m) = self.degenerate() {
            s.push_str(&format!("\ndegenerate regime: {m}\n"));
        }
        s
    }
}

/// Required SLD squeezing in dB at the QCRB-optimal input.
pub fn sld_squeezing_db(thermal_variance: f64, squeezing: f64, tau: f64, lambda_tilde: f64) -> Result<f64> {
    let base = SqueezedThermalSpec::new(thermal_variance, squeezing, 0.0)?;
    let spec = qcrb_branch_select(&base, tau, lambda_tilde)?.apply(&base);
    let ex = FreeExpansion::new(&spec, tau, lambda_tilde)?;
    let form = SldQuadraticForm::for_expansion(&ex)?;
    Ok(required_squeezing_db(&sld_spectrum(&form, &ex.covariance(), tau)?))
}

pub fn cmd_bound(config: &Config) -> Result<BoundReport> {
    let s = config.scenario()?;
    let t = config.state.thermal_variance;
    let r = config.squeezing()?;
    let policy = config.state.squeezing_angle;
    let mut entries = Vec::new();
    for &choice in &config.schemes {
        let entry = match evaluate(choice, t, r, policy, s.tau, s.lambda_tilde, s.lambda_sql) {
            Ok(e) => BoundEntry {
                scheme: choice.to_string(),
                variance_single_shot: Some(e.bound.variance_bound),
                std_single_shot: Some(e.bound.variance_bound.sqrt()),
                std_repetitions: Some(e.bound.std_dev(s.repetitions)),
                dimensionless_bound: Some(e.bound.dimensionless_bound),
                squeezing: Some(e.squeezing),
                phi: Some(e.phi),
                theta: e.theta,
                message: None,
            },
            Err(e) if e.is_degenerate() => BoundEntry {
                scheme: choice.to_string(),
                variance_single_shot: None,
                std_single_shot: None,
                std_repetitions: None,
                dimensionless_bound: None,
                squeezing: None,
                phi: None,
                theta: None,
                message: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }
    let derived = if config.scenario.table1_literal {
        let mut plain = config.clone();
        plain.scenario.table1_literal = false;
        plain.scenario()?
    } else {
        s
    };
    let literal = derived.with_table1_literals();
    let sld = |sc: &Scenario| sld_squeezing_db(t, r, sc.tau, sc.lambda_tilde).ok();
    let qcrb_angle = SqueezedThermalSpec::new(t, r, 0.0)
        .and_then(|b| Ok(canonical_squeeze_angle(qcrb_branch_select(&b, s.tau, s.lambda_tilde)?.angle)))
        .ok();
    Ok(BoundReport {
        version: VERSION.to_string(),
        tau: s.tau,
        lambda: s.lambda,
        lambda_sql: s.lambda_sql,
        lambda_tilde: s.lambda_tilde,
        repetitions: s.repetitions,
        thermal_variance: t,
        squeezing_db: config.state.squeezing.value,
        entries,
        optimal_homodyne_angle: optimal_homodyne_angle(s.tau).ok(),
        qcrb_squeeze_angle: qcrb_angle,
        sld_squeezing_db: SldSqueezing {
            derived: sld(&derived),
            table1_literal: sld(&literal),
        },
    })
}

fn sweep_section(config: &Config) -> Result<&SweepConfig> {
    config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("a [sweep] section is required".into()))
}

fn sphere(config: &Config, scenario: &Scenario) -> Result<SphereSpec> {
    let m0 = match config.csl.as_ref().and_then(|c| c.reference_mass) {
        Some(q) => q.expect(Dimension::Mass, "csl.reference_mass")?,
        None => AMU_KG,
    };
    SphereSpec::with_reference_mass(scenario.mass, scenario.sphere_radius, m0)
}

/// Grid evaluation shared by `sweep` and `csl`.
pub fn sweep_table(config: &Config) -> Result<Table> {
    let sweep = sweep_section(config)?;
    let s = config.scenario()?;
    let grid = sweep.grid()?;
    let t = config.state.thermal_variance;
    let policy = config.state.squeezing_angle;
    let nu = s.repetitions;
    let sphere = if sweep.variable == SweepVariable::RC {
        Some(sphere(config, &s)?)
    } else {
        None
    };

    // (label, r); the squeezing sweep supplies r per row
    let levels: Vec<(Option<String>, Option<f64>)> = if sweep.variable == SweepVariable::Squeezing {
        vec![(None, None)]
    } else {
        let dbs: Vec<f64> = match &sweep.squeezing_levels {
            Some(l) => l.iter().map(|q| q.value).collect(),
            None => vec![config.state.squeezing.value],
        };
        dbs.into_iter()
            .map(|db| (Some(format!("{db}dB")), Some(db_to_squeezing(db))))
            .collect()
    };

    let mut columns = vec![
        sweep.variable.column().to_string(),
        "tau".into(),
        "lambda_tilde".into(),
        "nu".into(),
    ];
    let value_name = if sweep.variable == SweepVariable::RC {
        "lambda_min[s^-1]"
    } else {
        "std[m^-2 s^-1]"
    };
    for (label, _) in &levels {
        for scheme in &config.schemes {
            let prefix = match label {
                Some(l) => format!("{scheme}@{l}"),
                None => scheme.to_string(),
            };
            columns.push(format!("{prefix}:{value_name}"));
            columns.push(format!("{prefix}:phi[rad]"));
            columns.push(format!("{prefix}:theta[rad]"));
        }
    }

    let rows = grid
        .par_iter()
        .map(|&v| {
            let (tau, lt, row_r) = match sweep.variable {
                SweepVariable::Lambda => (s.tau, v / s.lambda_sql, None),
                SweepVariable::Tau => (v, s.lambda_tilde, None),
                SweepVariable::Squeezing => (s.tau, s.lambda_tilde, Some(db_to_squeezing(v))),
                SweepVariable::RC => (s.tau, 0.0, None),
            };
            let mut row = vec![Cell::num(v), Cell::num(tau), Cell::num(lt), Cell::num(nu)];
            for (_, level) in &levels {
                let r = level.or(row_r).expect("squeezing level");
                for &choice in &config.schemes {
                    match evaluate(choice, t, r, policy, tau, lt, s.lambda_sql) {
                        Ok(e) => {
                            let value = match &sphere {
                                Some(sp) => match min_detectable_rate(&e.bound, v, sp, nu) {
                                    Ok(x) => Cell::num(x),
                                    Err(err) if err.is_degenerate() => Cell::Degenerate,
                                    Err(err) => return Err(err),
                                },
                                None => Cell::num(e.bound.std_dev(nu)),
                            };
                            row.push(value);
                            row.push(Cell::num(e.phi));
                            row.push(e.theta.map_or(Cell::NotApplicable, Cell::num));
                        }
                        Err(e) if e.is_degenerate() => {
                            row.extend([Cell::Degenerate, Cell::Degenerate, Cell::Degenerate]);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

fn scenario_notes(config: &Config) -> Result<Vec<(&'static str, String)>> {
    let s = config.scenario()?;
    Ok(vec![
        ("tau", format!("{:e}", s.tau)),
        ("lambda_sql[m^-2 s^-1]", format!("{:e}", s.lambda_sql)),
        ("nu", format!("{:e}", s.repetitions)),
    ])
}

pub fn cmd_sweep(config: &Config) -> Result<String> {
    let table = sweep_table(config)?;
    render("sweep", config, &scenario_notes(config)?, &table)
}

/// Piecewise log-log interpolation of `(x, y)` rows; `None` outside the range.
fn interpolate(rows: &[(f64, f64)], x: f64) -> Option<f64> {
    let i = rows.windows(2).position(|w| w[0].0 <= x && x <= w[1].0)?;
    let ((x0, y0), (x1, y1)) = (rows[i], rows[i + 1]);
    if x1 == x0 {
        return Some(y0);
    }
    if x0 > 0.0 && y0 > 0.0 && y1 > 0.0 {
        let f = (x / x0).ln() / (x1 / x0).ln();
        Some(y0 * (y1 / y0).powf(f))
    } else {
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// Minimum detectable collapse rate against `r_C`, with an optional overlay
/// curve resampled onto the grid. Overlay paths are relative to `base_dir`.
pub fn csl_table(config: &Config, base_dir: &Path) -> Result<Table> {
    let sweep = sweep_section(config)?;
    if sweep.variable != SweepVariable::RC {
        return Err(Error::Config("csl requires sweep.variable = \"r_c\"".into()));
    }
    let mut table = sweep_table(config)?;
    if let Some(path) = config.csl.as_ref().and_then(|c| c.overlay.as_ref()) {
        let text = std::fs::read_to_string(base_dir.join(path))
            .map_err(|e| Error::Config(format!("overlay {}: {e}", path.display())))?;
        let mut rows = parse_overlay(&text)?;
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        table.columns.push("overlay:lambda[s^-1]".into());
        for row in &mut table.rows {
            let r_c = row[0].value().expect("grid value");
            row.push(interpolate(&rows, r_c).map_or(Cell::NotApplicable, Cell::num));
        }
    }
    Ok(table)
}

pub fn cmd_csl(config: &Config, base_dir: &Path) -> Result<String> {
    let table = csl_table(config, base_dir)?;
    render("csl", config, &scenario_notes(config)?, &table)
}

/// The experiment described by `[montecarlo]`, at the scheme's own
/// squeezing angle.
pub fn montecarlo_run(config: &Config) -> Result<ExperimentRun> {
    let mc = config
        .montecarlo
        .as_ref()
        .ok_or_else(|| Error::Config("a [montecarlo] section is required".into()))?;
    let seed = mc
        .seed
        .ok_or_else(|| Error::Config("montecarlo.seed must be given explicitly (config or --seed)".into()))?;
    let s = config.scenario()?;
    let lt = match mc.true_lambda.dimension {
        Dimension::Dimensionless => mc.true_lambda.value,
        _ => {
            mc.true_lambda
                .expect(Dimension::DiffusionRate, "montecarlo.true_lambda")?
                / s.lambda_sql
        }
    };
    if !(lt > 0.0 && lt.is_finite()) {
        return Err(Error::Config(format!(
            "montecarlo.true_lambda must be an interior (positive) truth, got {lt}"
        )));
    }
    let t = config.state.thermal_variance;
    let r = config.squeezing()?;
    let e = evaluate(mc.scheme, t, r, config.state.squeezing_angle, s.tau, lt, s.lambda_sql)
        .map_err(|e| Error::Config(format!("montecarlo scheme {}: {e}", mc.scheme)))?;
    let scheme = match (mc.scheme, e.theta) {
        (SchemeChoice::Qcrb, _) => {
            return Err(Error::NonIdentifiable(
                "the QCRB measurement (phonon counting) is not simulated".into(),
            ))
        }
        (_, Some(theta)) => MeasurementScheme::homodyne(theta),
        (_, None) => MeasurementScheme::Heterodyne,
    };
    Ok(ExperimentRun {
        scheme,
        spec: SqueezedThermalSpec::new(t, e.squeezing, e.phi)?,
        tau: s.tau,
        true_lambda_tilde: lt,
        samples: mc.samples,
        seed,
        chunk_size: mc.chunk_size,
    })
}

pub fn montecarlo_report(config: &Config) -> Result<EstimationReport> {
    let run = montecarlo_run(config)?;
    let replicates = config.montecarlo.as_ref().expect("checked").replicates;
    // the bound for the simulated scheme must exist at the truth
    bound_for(run.scheme, &run.spec, run.tau, run.true_lambda_tilde, 1.0)?;
    saturation_study(&run, replicates).map_err(|e| match e {
        Error::NonIdentifiable(m) => Error::Config(m),
        other => other,
    })
}

pub fn cmd_montecarlo(config: &Config) -> Result<String> {
    let report = montecarlo_report(config)?;
    let run = report.run;
    let (theta, scheme) = match run.scheme {
        MeasurementScheme::Homodyne { theta } => (Cell::num(theta), "homodyne"),
        _ => (Cell::NotApplicable, "heterodyne"),
    };
    let table = Table {
        columns: [
            "theta[rad]",
            "phi[rad]",
            "squeezing",
            "thermal_variance",
            "tau",
            "true_lambda_tilde",
            "samples",
            "replicates",
            "chunk_size",
            "estimate_mean",
            "empirical_variance",
            "crb",
            "saturation_ratio",
            "ratio_half_width",
        ]
        .map(String::from)
        .to_vec(),
        rows: vec![vec![
            theta,
            Cell::num(run.spec.angle()),
            Cell::num(run.spec.squeezing()),
            Cell::num(run.spec.thermal_variance()),
            Cell::num(run.tau),
            Cell::num(run.true_lambda_tilde),
            Cell::num(run.samples as f64),
            Cell::num(report.replicates as f64),
            Cell::num(run.chunk_size as f64),
            Cell::num(report.estimate_mean),
            Cell::num(report.empirical_variance),
            Cell::num(report.crb),
            Cell::num(report.saturation_ratio),
            Cell::num(report.ratio_half_width),
        ]],
    };
    let notes = vec![
        (
            "scheme",
            format!("{scheme} ({})", config.montecarlo.as_ref().expect("checked").scheme),
        ),
        ("seed", run.seed.to_string()),
    ];
    render("montecarlo", config, &notes, &table)
}
