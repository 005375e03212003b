//! `chawkes reproduce`: the ruin, speedup and exceedance tables and the
//! three convergence series, on the bundled bivariate model by default.
//!
//! Plain Monte Carlo cells beyond desk scale (ruin levels above 60,
//! exceedance horizons above 10) are written as `n/a`. A failing cell is
//! recorded in the row's `status` column and the command moves on.

use std::path::PathBuf;

use clap::ValueEnum;

use super::output::{fmt_float, Sink, Table, NA};
use super::{CliError, Context, EXIT_OK, EXIT_RUN_CAP};
use crate::estimate::{
    derive_seed, estimate_exceedance_is, estimate_exceedance_mc, estimate_ruin_is,
    estimate_ruin_mc, speedup_ratio, EstimateError, EstimatorResult,
};
use crate::model::MarkRegime;
use crate::optimize::{dominant_point, solve_theta_star};

pub const MC_RUIN_LEVEL_LIMIT: f64 = 60.0;
pub const MC_EXCEED_HORIZON_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
    Fig3,
}

impl ReproduceTarget {
    pub fn name(self) -> &'static str {
        match self {
            ReproduceTarget::Table1 => "table1",
            ReproduceTarget::Table2 => "table2",
            ReproduceTarget::Table3 => "table3",
            ReproduceTarget::Fig1 => "fig1",
            ReproduceTarget::Fig2 => "fig2",
            ReproduceTarget::Fig3 => "fig3",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            ReproduceTarget::Table1 => vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0],
            ReproduceTarget::Table2 => vec![
                1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 100.0, 200.0,
                300.0,
            ],
            ReproduceTarget::Table3 | ReproduceTarget::Fig3 => vec![
                1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 75.0, 100.0,
            ],
            ReproduceTarget::Fig1 | ReproduceTarget::Fig2 => vec![
                5.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 150.0, 200.0, 250.0, 300.0,
            ],
        }
    }
}

/// An estimator cell: the (possibly partial) result and its status.
struct Cell {
    result: Option<EstimatorResult>,
    status: String,
    code: i32,
}

impl Cell {
    fn from(outcome: Result<EstimatorResult, EstimateError>) -> Self {
        match outcome {
            Ok(r) => Cell {
                result: Some(r),
                status: "ok".into(),
                code: EXIT_OK,
            },
            Err(EstimateError::MaxRunsExceeded(r)) => Cell {
                result: Some(*r),
                status: "max_runs_exceeded".into(),
                code: EXIT_RUN_CAP,
            },
            Err(e) => {
                let e = CliError::from(e);
                Cell {
                    result: None,
                    status: format!("{}: {}", e.reason, e.message),
                    code: e.code,
                }
            }
        }
    }

    fn skipped() -> Self {
        Cell {
            result: None,
            status: "ok".into(),
            code: EXIT_OK,
        }
    }

    fn get(&self, f: impl Fn(&EstimatorResult) -> String) -> String {
        self.result.as_ref().map(f).unwrap_or_else(|| NA.into())
    }

    fn estimate(&self) -> String {
        self.get(|r| fmt_float(r.estimate))
    }

    fn variance(&self) -> String {
        self.get(|r| fmt_float(r.variance))
    }

    fn runs(&self) -> String {
        self.get(|r| r.runs.to_string())
    }

    fn wall(&self) -> String {
        self.get(|r| r.wall_time.map(fmt_float).unwrap_or_else(|| NA.into()))
    }
}

fn status(cells: &[&Cell]) -> String {
    let bad: Vec<&str> = cells
        .iter()
        .filter(|c| c.status != "ok")
        .map(|c| c.status.as_str())
        .collect();
    if bad.is_empty() {
        "ok".into()
    } else {
        bad.join("; ")
    }
}

fn kappa(mc: &Cell, is_: &Cell) -> String {
    match (&mc.result, &is_.result) {
        (Some(m), Some(i)) if mc.code == EXIT_OK && is_.code == EXIT_OK => speedup_ratio(m, i)
            .map(fmt_float)
            .unwrap_or_else(|_| NA.into()),
        _ => NA.into(),
    }
}

pub(super) fn run(
    ctx: &Context,
    sink: &mut Sink,
    which: ReproduceTarget,
    config_det: Option<&PathBuf>,
    grid: &[f64],
    exceed_target: &[f64],
) -> Result<i32, CliError> {
    let grid = if grid.is_empty() {
        which.default_grid()
    } else {
        grid.to_vec()
    };
    let seed = ctx.seed();
    let rule = ctx.rule();
    // row seeds are salted by table so different outputs never share streams
    let salt = 0x1000 * (which as u64 + 1);
    let row_seed = |row: usize, sub: u64| derive_seed(seed, salt + 0x10 * row as u64 + sub);
    let mut codes = Vec::new();
    let table = match which {
        ReproduceTarget::Table1 => {
            let det = ctx.load(config_det, MarkRegime::Deterministic)?;
            let rand = ctx.model()?;
            let theta_d = solve_theta_star(&det, 0)?;
            let theta_r = solve_theta_star(&rand, 0)?;
            let mut t = Table::new(&[
                "u",
                "lundberg_det",
                "p_det",
                "n_det",
                "lundberg_rand",
                "p_rand",
                "n_rand",
                "status",
            ]);
            for (row, &u) in grid.iter().enumerate() {
                let d = Cell::from(estimate_ruin_is(&det, 0, u, &rule, row_seed(row, 0)));
                let r = Cell::from(estimate_ruin_is(&rand, 0, u, &rule, row_seed(row, 1)));
                codes.extend([d.code, r.code]);
                t.push(vec![
                    fmt_float(u),
                    fmt_float((-theta_d * u).exp()),
                    d.estimate(),
                    d.runs(),
                    fmt_float((-theta_r * u).exp()),
                    r.estimate(),
                    r.runs(),
                    status(&[&d, &r]),
                ]);
            }
            t
        }
        ReproduceTarget::Table2 | ReproduceTarget::Table3 => {
            let spec = ctx.model()?;
            let ruin = which == ReproduceTarget::Table2;
            let x = if ruin { "u" } else { "t" };
            let (p_mc, p_is) = if ruin {
                ("p_mc", "p_is")
            } else {
                ("q_mc", "q_is")
            };
            let mut t = Table::new(&[
                x, p_mc, "n_mc", p_is, "v_is", "n_is", "kappa", "wall_mc", "wall_is", "status",
            ]);
            for (row, &x) in grid.iter().enumerate() {
                let (is_, mc) = if ruin {
                    (
                        Cell::from(estimate_ruin_is(&spec, 0, x, &rule, row_seed(row, 0))),
                        if x <= MC_RUIN_LEVEL_LIMIT {
                            Cell::from(estimate_ruin_mc(
                                &spec,
                                0,
                                x,
                                &rule,
                                ctx.horizon_cap(),
                                row_seed(row, 1),
                            ))
                        } else {
                            Cell::skipped()
                        },
                    )
                } else {
                    (
                        Cell::from(estimate_exceedance_is(
                            &spec,
                            exceed_target,
                            x,
                            &rule,
                            row_seed(row, 0),
                        )),
                        if x <= MC_EXCEED_HORIZON_LIMIT {
                            Cell::from(estimate_exceedance_mc(
                                &spec,
                                exceed_target,
                                x,
                                &rule,
                                row_seed(row, 1),
                            ))
                        } else {
                            Cell::skipped()
                        },
                    )
                };
                codes.extend([is_.code, mc.code]);
                t.push(vec![
                    fmt_float(x),
                    mc.estimate(),
                    mc.runs(),
                    is_.estimate(),
                    is_.variance(),
                    is_.runs(),
                    kappa(&mc, &is_),
                    mc.wall(),
                    is_.wall(),
                    status(&[&mc, &is_]),
                ]);
            }
            t
        }
        ReproduceTarget::Fig1 | ReproduceTarget::Fig2 => {
            let spec = if which == ReproduceTarget::Fig1 {
                ctx.load(config_det, MarkRegime::Deterministic)?
            } else {
                ctx.model()?
            };
            let theta = solve_theta_star(&spec, 0)?;
            let mut t = Table::new(&[
                "u",
                "log_estimate_over_u",
                "theta_star",
                "estimate",
                "rel_std_err",
                "runs",
                "status",
            ]);
            for (row, &u) in grid.iter().enumerate() {
                let c = Cell::from(estimate_ruin_is(&spec, 0, u, &rule, row_seed(row, 0)));
                codes.push(c.code);
                t.push(vec![
                    fmt_float(u),
                    c.get(|r| fmt_float(r.estimate.ln() / u)),
                    fmt_float(theta),
                    c.estimate(),
                    c.get(|r| fmt_float(r.rel_std_err)),
                    c.runs(),
                    status(&[&c]),
                ]);
            }
            t
        }
        ReproduceTarget::Fig3 => {
            let spec = ctx.model()?;
            let rate = dominant_point(&spec, exceed_target)?.rate;
            let mut t = Table::new(&[
                "t",
                "log_estimate_over_t",
                "rate",
                "estimate",
                "rel_std_err",
                "runs",
                "status",
            ]);
            for (row, &h) in grid.iter().enumerate() {
                let c = Cell::from(estimate_exceedance_is(
                    &spec,
                    exceed_target,
                    h,
                    &rule,
                    row_seed(row, 0),
                ));
                codes.push(c.code);
                t.push(vec![
                    fmt_float(h),
                    c.get(|r| fmt_float(r.estimate.ln() / h)),
                    fmt_float(rate),
                    c.estimate(),
                    c.get(|r| fmt_float(r.rel_std_err)),
                    c.runs(),
                    status(&[&c]),
                ]);
            }
            t
        }
    };
    sink.csv(which.name(), &table, &ctx.manifest())?;
    Ok(codes.into_iter().max().unwrap_or(EXIT_OK))
}

/// Parse a reproduce CSV back into rows keyed by header, for checks and plots.
pub fn read_series(text: &str) -> Result<Vec<std::collections::HashMap<String, String>>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(CliError::csv)?.clone();
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(CliError::csv)?;
            Ok(header
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect())
        })
        .collect()
}
