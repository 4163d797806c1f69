use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use clca::engine::{stage_shares, MarginalReport};
use clca::infra_allocation::infra_breakdown;
use clca::io::{NumericTable, Precision};
use clca::mode_factors::{FactorTable, Stage};
use clca::project::{self, Project, ShiftOutput};
use clca::scenario_lab::{
    break_even_ffes_ef, break_even_mix, default_lifetime_grid, mix_model, sweep_lifetime, sweep_mix,
    sweep_servicing, Overrides, Scenario, SweepResult,
};
use clca::street_inventory::{annualized_flows, STREET_FLOWS};

#[derive(Parser)]
#[command(name = "clca", version, about = "Consequential LCA of an urban modal shift")]
struct Cli {
    /// Project file, directory, or name of a bundled project.
    #[arg(long, global = true, default_value = project::DEFAULT_PROJECT)]
    project: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Round numbers to this many significant digits instead of writing
    /// them at full precision.
    #[arg(long, global = true)]
    sig: Option<usize>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Load the project and list warnings.
    Check,
    /// Population-scaled passenger-km shift per mode.
    Shift {
        #[arg(long)]
        population: Option<f64>,
    },
    /// Emission factors per mode and stage.
    Factors,
    /// Marginal impact of the shift.
    Assess {
        #[arg(long)]
        population: Option<f64>,
        /// Lifetime mileage of the disruptive mode's vehicles (km).
        #[arg(long)]
        lifetime_km: Option<f64>,
        /// Servicing scenario of the disruptive mode.
        #[arg(long)]
        servicing: Option<String>,
        /// Electricity mix code from the mixes file.
        #[arg(long)]
        mix: Option<String>,
    },
    #[command(subcommand)]
    Sweep(SweepCommand),
    #[command(subcommand)]
    Breakeven(BreakevenCommand),
    #[command(subcommand)]
    Infra(InfraCommand),
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Lifetime mileage of the disruptive mode.
    Lifetime {
        /// Comma-separated mileages (km); a log grid by default.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
    },
    /// Servicing scenarios of the disruptive mode; all of them by default.
    Servicing {
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<String>,
    },
    /// Electricity mixes of the mixes file.
    Mix,
}

#[derive(Subcommand)]
enum BreakevenCommand {
    /// Electricity intensity at which the shift is neutral.
    Mix,
    /// Disruptive-mode emission factor at which the shift is neutral.
    Ffes,
}

#[derive(Subcommand)]
enum InfraCommand {
    /// Annualized material and transport flows of street specifications.
    Flows {
        /// Street names; all of them by default.
        streets: Vec<String>,
    },
    /// Allocation of infrastructure impacts to modes.
    Allocation {
        #[arg(long)]
        year: Option<i32>,
    },
}

fn opt(x: f64) -> Option<f64> {
    Some(x)
}

fn shift_table(s: &ShiftOutput) -> NumericTable {
    let mut t = NumericTable::new(&["mode", "survey_sum_km", "delta_pkt"]);
    for (mode, dpkt) in s.result.delta.iter() {
        t.push(mode.as_str(), vec![s.result.survey_sums.get(mode).copied(), opt(dpkt)]);
    }
    t
}

fn factor_table(f: &FactorTable) -> NumericTable {
    let mut t = NumericTable::new(&[
        "mode",
        "vehicle_kg_pkt",
        "use_kg_pkt",
        "servicing_kg_pkt",
        "infrastructure_kg_pkt",
        "total_kg_pkt",
    ]);
    for ef in f.values() {
        let mut row: Vec<Option<f64>> = Stage::ALL.iter().map(|s| opt(ef.stage(*s))).collect();
        row.push(opt(ef.total));
        t.push(ef.mode.as_str(), row);
    }
    t
}

fn report_table(r: &MarginalReport) -> NumericTable {
    let mut t = NumericTable::new(&[
        "mode",
        "delta_pkt",
        "vehicle_kg",
        "use_kg",
        "servicing_kg",
        "infrastructure_kg",
        "total_kg",
    ]);
    for line in &r.lines {
        let mut row = vec![opt(line.delta_pkt)];
        row.extend(Stage::ALL.iter().map(|s| opt(line.stages.get(*s))));
        row.push(opt(line.marginal));
        t.push(line.mode.as_str(), row);
    }
    let mut total = vec![None];
    total.extend(
        Stage::ALL
            .iter()
            .map(|s| opt(r.lines.iter().map(|l| l.stages.get(*s)).sum())),
    );
    total.push(opt(r.total));
    t.push("total", total);
    t
}

fn sweep_table(s: &SweepResult) -> NumericTable {
    let mut t = NumericTable::new(&["scenario", &s.parameter, "total_kg"]);
    for p in &s.points {
        t.push(p.label.clone(), vec![opt(p.parameter), opt(p.total_kg)]);
    }
    t
}

#[derive(Serialize)]
struct AssessOutput<'a> {
    report: &'a MarginalReport,
    stage_shares: Option<clca::StageShares>,
}

struct Output {
    table: NumericTable,
    json: serde_json::Value,
}

impl Output {
    fn new(table: NumericTable, value: impl Serialize) -> anyhow::Result<Self> {
        Ok(Output {
            table,
            json: serde_json::to_value(value)?,
        })
    }
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    let project = project::load(&cli.project)?;
    let output = match &cli.command {
        Command::Check => {
            let mut t = NumericTable::new(&["warning"]);
            for w in &project.warnings {
                t.push(w.clone(), vec![]);
            }
            Output::new(t, &project.warnings)?
        }
        Command::Shift { population } => {
            let s = project.shift(*population)?;
            Output::new(shift_table(&s), &s)?
        }
        Command::Factors => {
            let f = project.baseline(None)?.factors()?;
            Output::new(factor_table(&f), f.values().collect::<Vec<_>>())?
        }
        Command::Assess {
            population,
            lifetime_km,
            servicing,
            mix,
        } => assess(&project, *population, *lifetime_km, servicing.as_deref(), mix.as_deref())?,
        Command::Sweep(cmd) => {
            let baseline = project.baseline(None)?;
            let result = match cmd {
                SweepCommand::Lifetime { grid } => {
                    let grid = if grid.is_empty() { default_lifetime_grid() } else { grid.clone() };
                    sweep_lifetime(&baseline, &grid)?
                }
                SweepCommand::Servicing { scenarios } => {
                    let chosen = if scenarios.is_empty() {
                        // Scenarios already assigned to other modes are not alternatives.
                        let disruptive = &project.config.disruptive_mode;
                        project
                            .servicing
                            .iter()
                            .filter(|s| {
                                !project.profiles.iter().any(|p| {
                                    &p.mode != disruptive && p.servicing_scenario.as_deref() == Some(s.name.as_str())
                                })
                            })
                            .cloned()
                            .collect()
                    } else {
                        scenarios
                            .iter()
                            .map(|n| project.servicing_named(n).cloned())
                            .collect::<clca::Result<Vec<_>>>()?
                    };
                    sweep_servicing(&baseline, &chosen)?
                }
                SweepCommand::Mix => sweep_mix(&baseline, &project.mixes()?)?,
            };
            Output::new(sweep_table(&result), &result)?
        }
        Command::Breakeven(cmd) => {
            let baseline = project.baseline(None)?;
            let mut t = NumericTable::new(&["quantity", "value"]);
            match cmd {
                BreakevenCommand::Mix => {
                    let (alpha, beta) = mix_model(&baseline)?;
                    let be = break_even_mix(&baseline)?;
                    t.push("total_at_zero_intensity_kg", vec![opt(alpha)]);
                    t.push("total_per_intensity_kg_per_kg_kwh", vec![opt(beta)]);
                    t.push("break_even_intensity_kg_kwh", vec![be.intensity()]);
                    Output::new(t, serde_json::json!({ "alpha": alpha, "beta": beta, "break_even": be }))?
                }
                BreakevenCommand::Ffes => {
                    let ef = break_even_ffes_ef(&baseline)?;
                    t.push("break_even_ef_kg_pkt", vec![opt(ef)]);
                    Output::new(t, serde_json::json!({ "break_even_ef_kg_pkt": ef }))?
                }
            }
        }
        Command::Infra(InfraCommand::Flows { streets }) => {
            let all = project.streets()?;
            let chosen: Vec<_> = if streets.is_empty() {
                all.iter().collect()
            } else {
                streets
                    .iter()
                    .map(|n| {
                        all.iter()
                            .find(|s| &s.name == n)
                            .with_context(|| format!("no street `{n}` in the streets file"))
                    })
                    .collect::<anyhow::Result<_>>()?
            };
            if chosen.is_empty() {
                bail!(clca::Error::EmptyInput("no street specifications".into()));
            }
            let flows = chosen
                .iter()
                .map(|s| annualized_flows(s))
                .collect::<clca::Result<Vec<_>>>()?;
            let mut headers = vec!["flow"];
            headers.extend(chosen.iter().map(|s| s.name.as_str()));
            let mut t = NumericTable::new(&headers);
            for (key, label) in STREET_FLOWS {
                t.push(label, flows.iter().map(|f| opt(f.get(key))).collect());
            }
            let json: Vec<_> = chosen
                .iter()
                .zip(&flows)
                .map(|(s, f)| serde_json::json!({ "street": s.name, "functional_unit": s.functional_unit.to_string(), "flows": f }))
                .collect();
            Output::new(t, json)?
        }
        Command::Infra(InfraCommand::Allocation { year }) => {
            let year = year.unwrap_or(project.config.year);
            let traffic = project.traffic_for_year(year);
            if traffic.is_empty() {
                bail!(clca::Error::Config(format!("no traffic records for year {year}")));
            }
            let mut t = NumericTable::new(&["mode@infra", "share", "allocation_factor_per_pkt", "ef_kg_pkt"]);
            let mut parts = Vec::new();
            for p in &project.profiles {
                for c in infra_breakdown(&p.mode, &project.assets, &traffic)? {
                    t.push(
                        format!("{}@{}", p.mode, c.infra),
                        vec![opt(c.share), opt(c.allocation_factor), opt(c.ef)],
                    );
                    parts.push(serde_json::json!({ "mode": p.mode, "contribution": c }));
                }
            }
            Output::new(t, parts)?
        }
    };
    let precision = cli.sig.map_or(Precision::Full, Precision::Significant);
    Ok(match cli.format {
        Format::Csv => output.table.to_csv(precision),
        Format::Json => serde_json::to_string_pretty(&output.json)? + "\n",
    })
}

fn assess(
    project: &Project,
    population: Option<f64>,
    lifetime_km: Option<f64>,
    servicing: Option<&str>,
    mix: Option<&str>,
) -> anyhow::Result<Output> {
    let baseline = project.baseline(None)?;
    let overrides = Overrides {
        lifetime_km,
        servicing: servicing.map(|n| project.servicing_named(n).cloned()).transpose()?,
        mix: match mix {
            Some(code) => Some(
                project
                    .mixes()?
                    .into_iter()
                    .find(|m| m.code == code)
                    .ok_or_else(|| clca::Error::Link(format!("unknown electricity mix `{code}`")))?,
            ),
            None => None,
        },
        population,
    };
    let report = if overrides == Overrides::default() {
        baseline.assess()?
    } else {
        baseline.evaluate(&Scenario::new("custom", overrides)?)?
    };
    let shares = stage_shares(&report).ok();
    let json = AssessOutput {
        report: &report,
        stage_shares: shares,
    };
    Output::new(report_table(&report), json)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| {
        match &cli.out {
            Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<clca::Error>().map_or("runtime", |e| e.kind());
            let body = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
