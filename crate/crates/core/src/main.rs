//! Command-line front end: PV and battery sizing, simulation runs, the
//! sizing-table reproduction, and coverage metrics.
//!
//! Exit codes: 0 on success, 1 on validation or parse errors, 2 when a
//! request is infeasible (nothing to size against, or demand that no
//! admissible configuration can back).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use solardc::consolidation::ConsolidationError;
use solardc::power::PowerError;
use solardc::scenario::report::{emit_report, Report, ReportFormat};
use solardc::scenario::{
    load_irradiance_csv, load_scenario, reproduce_table2, trace_to_csv, Scenario, ScenarioError,
};
use solardc::sim::{run, summarize, SimError};
use solardc::solar::{daily_insolation, delta_e, mps, peak_irradiance, size_array, SolarError};
use solardc::storage::{backup_energy, effective_energy, required_batteries};

#[derive(Parser)]
#[command(name = "solardc", version, about = "Solar-powered data center sizing and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size the PV array for a scenario against an irradiance profile.
    SizePv {
        /// Scenario file.
        #[arg(long)]
        scenario: PathBuf,
        /// Irradiance CSV (hour,irradiance_wm2).
        #[arg(long)]
        irradiance: PathBuf,
    },
    /// Run the night-backup battery sizing pipeline for a scenario.
    SizeBatteries {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Simulate day/night cycles and emit a trace and report.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's day count.
        #[arg(long)]
        days: Option<u32>,
        /// Write the per-step trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recompute the scenario's battery-sizing table from its power table.
    #[command(name = "reproduce-table2")]
    ReproduceTable2 {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print coverage metrics for a production/consumption pair.
    Metrics {
        /// Renewable production in Wh.
        #[arg(long)]
        production: f64,
        /// Total consumption in Wh.
        #[arg(long)]
        consumption: f64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Consolidation(#[from] ConsolidationError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let infeasible = matches!(
            self,
            CliError::Solar(SolarError::InfeasibleSizing { .. })
                | CliError::Consolidation(
                    ConsolidationError::InsufficientStorage { .. }
                        | ConsolidationError::NoCandidates { .. },
                )
                | CliError::Scenario(ScenarioError::Solar(SolarError::InfeasibleSizing { .. }))
                | CliError::Scenario(ScenarioError::Power(PowerError::InfeasibleDemand { .. }))
                | CliError::Sim(SimError::Power(PowerError::InfeasibleDemand { .. }))
        );
        if infeasible {
            2
        } else {
            1
        }
    }
}

fn scenario_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_size_pv(scenario_path: &Path, irradiance_path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let profile = load_irradiance_csv(irradiance_path)?;
    let insolation = daily_insolation(&profile);
    let (peak_hour, peak) = peak_irradiance(&profile);
    let target = scenario.target_energy_wh()?;
    let sizing = size_array(
        target,
        insolation,
        &scenario.panel,
        scenario.area_round_up_to_m2,
    )?;
    println!("scenario = {}", scenario.name);
    println!("daily_insolation_whm2 = {insolation}");
    println!("peak_irradiance_wm2 = {peak} at hour {peak_hour}");
    println!("target_daily_energy_wh = {target}");
    println!("required_area_m2 = {}", sizing.required_area_m2);
    println!("rounded_area_m2 = {}", sizing.rounded_area_m2);
    println!("panel_count = {}", sizing.panel_count);
    println!("daily_production_wh = {}", sizing.daily_production_wh);
    Ok(())
}

fn cmd_size_batteries(scenario_path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let power = scenario.full_load_power_w()?;
    let hours = scenario.night_window.duration_hours();
    let energy = backup_energy(power, hours);
    let effective = effective_energy(energy, scenario.battery.efficiency);
    let needed = required_batteries(effective, &scenario.battery);
    println!("scenario = {}", scenario.name);
    println!("full_load_power_w = {power}");
    println!("backup_hours = {hours}");
    println!("night_energy_wh = {energy}");
    println!("effective_energy_wh = {effective}");
    println!("battery_capacity_wh = {}", scenario.battery.capacity_wh());
    println!("batteries_required = {needed}");
    println!("bank_count = {}", scenario.bank_count);
    Ok(())
}

fn build_report(
    scenario: &Scenario,
    insolation_whm2: f64,
    days: u32,
    trace: &solardc::SimulationTrace,
) -> Result<Report, CliError> {
    let sizing = size_array(
        scenario.target_energy_wh()?,
        insolation_whm2,
        &scenario.panel,
        scenario.area_round_up_to_m2,
    )?;
    let effective = effective_energy(
        backup_energy(
            scenario.full_load_power_w()?,
            scenario.night_window.duration_hours(),
        ),
        scenario.battery.efficiency,
    );
    Ok(Report {
        scenario_name: scenario.name.clone(),
        days,
        summary: summarize(trace)?,
        sizing,
        batteries_required: required_batteries(effective, &scenario.battery),
        bank_count: scenario.bank_count,
    })
}

fn cmd_simulate(
    scenario_path: &Path,
    days: Option<u32>,
    trace_out: Option<&Path>,
    report_out: Option<&Path>,
) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let dir = scenario_dir(scenario_path);
    let profile = scenario.load_irradiance(&dir)?;
    let insolation = daily_insolation(&profile);
    let config = scenario.to_sim_config(profile, days);
    let trace = run(&config)?;
    let summary = summarize(&trace)?;

    println!("scenario = {}", scenario.name);
    println!("days = {}", config.days);
    println!("total_production_wh = {}", summary.total_production_wh);
    println!("total_consumption_wh = {}", summary.total_consumption_wh);
    println!("energy_saving_wh = {}", summary.energy_saving_wh);
    println!("mps_percent = {}", summary.mps_percent);
    println!("delta_e_wh = {}", summary.delta_e_wh);
    println!("min_soc_wh = {}", summary.min_soc_wh);
    println!("max_deficit_wh = {}", summary.max_deficit_wh);
    println!("batteries_implied = {}", summary.batteries_implied);

    if let Some(path) = trace_out {
        fs::write(path, trace_to_csv(&trace))?;
        println!("trace_csv = {}", path.display());
    }
    if let Some(path) = report_out {
        let report = build_report(&scenario, insolation, config.days, &trace)?;
        fs::write(path, emit_report(&report, ReportFormat::Json))?;
        println!("report_json = {}", path.display());
    }
    Ok(())
}

fn cmd_reproduce_table2(scenario_path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(scenario_path)?;
    let rows = reproduce_table2(&scenario)?;
    println!("{:>8}  {:>10}  {:>12}  {:>14}  {:>9}", "n_active", "power_mw", "energy_mwh", "effective_mwh", "batteries");
    for row in rows {
        println!(
            "{:>8}  {:>10}  {:>12}  {:>14}  {:>9}",
            row.n_active,
            row.power_w / 1e6,
            row.energy_wh / 1e6,
            row.effective_wh / 1e6,
            row.batteries
        );
    }
    Ok(())
}

fn cmd_metrics(production: f64, consumption: f64) -> Result<(), CliError> {
    let coverage = mps(production, consumption)?;
    println!("mps_percent = {coverage}");
    println!("delta_e_wh = {}", delta_e(production, consumption));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SizePv {
            scenario,
            irradiance,
        } => cmd_size_pv(scenario, irradiance),
        Command::SizeBatteries { scenario } => cmd_size_batteries(scenario),
        Command::Simulate {
            scenario,
            days,
            trace,
            report,
        } => cmd_simulate(scenario, *days, trace.as_deref(), report.as_deref()),
        Command::ReproduceTable2 { scenario } => cmd_reproduce_table2(scenario),
        Command::Metrics {
            production,
            consumption,
        } => cmd_metrics(*production, *consumption),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
