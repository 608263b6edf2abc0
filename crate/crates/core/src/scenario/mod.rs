//! Scenario files, irradiance CSV ingestion, trace export, and the bundled
//! sizing-table reproduction.
//!
//! Scenario files are flat `key = value` text with dotted section names.
//! Grammar: one pair per line; blank lines and lines starting with `#` are
//! skipped; everything after the first `=` is the value, trimmed. Keys are
//! from a fixed vocabulary (unknown or repeated keys are rejected with their
//! line number) and all units are SI base units spelled in the key name:
//! watts, watt-hours, meters, hours. Power-table rows use one key per row,
//! `power_table.<n_active> = <watts>`.

pub mod report;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::consolidation::DemandModel;
use crate::power::{
    CoolingSpec, DataCenterSpec, PowerCurve, PowerError, PowerLookupTable, ServerSpec,
};
use crate::sim::{NightWindow, Policy, PowerSource, SimulationConfig, SimulationTrace};
use crate::solar::{IrradianceProfile, IrradianceSample, PanelSpec, SolarError};
use crate::storage::{backup_energy, effective_energy, required_batteries, BatteryBank, BatterySpec};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for '{key}': {msg}")]
    InvalidValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("missing required key '{key}'")]
    MissingKey { key: String },
    #[error("field '{field}': {constraint}")]
    Validation { field: String, constraint: String },
    #[error("row {row}: {msg}")]
    Csv { row: usize, msg: String },
    #[error("scenario has no irradiance file configured")]
    MissingIrradiance,
    #[error("scenario has no power table configured")]
    MissingTable,
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Solar(#[from] SolarError),
}

/// Which model prices an active-server count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSourceKind {
    Parametric,
    Table,
}

/// A fully validated scenario: the simulation inputs plus metadata and the
/// optional measured power table.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub dc: DataCenterSpec,
    pub panel: PanelSpec,
    pub panel_count: u32,
    pub area_round_up_to_m2: f64,
    pub target_daily_energy_wh: Option<f64>,
    pub battery: BatterySpec,
    pub bank_count: u32,
    pub bank_min_soc_fraction: f64,
    pub night_window: NightWindow,
    pub step_hours: f64,
    pub days: u32,
    pub policy: Policy,
    pub power_source_kind: PowerSourceKind,
    pub power_table: Option<PowerLookupTable>,
    pub demand: DemandModel,
    pub initial_soc_fraction: f64,
    pub start_hour: f64,
    pub replan_each_step: bool,
    pub irradiance_path: Option<String>,
}

struct RawEntry {
    line: usize,
    value: String,
}

struct RawScenario {
    entries: Vec<(String, RawEntry)>,
}

impl RawScenario {
    fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some(eq) = trimmed.find('=') else {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("expected 'key = value', got '{trimmed}'"),
                });
            };
            let key = trimmed[..eq].trim().to_string();
            let value = trimmed[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(ScenarioError::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            if !seen.insert(key.clone()) {
                return Err(ScenarioError::DuplicateKey { line, key });
            }
            entries.push((key, RawEntry { line, value }));
        }
        if entries.is_empty() {
            return Err(ScenarioError::Parse {
                line: 1,
                msg: "no key = value pairs in scenario".into(),
            });
        }
        Ok(RawScenario { entries })
    }

    fn take(&mut self, key: &str) -> Option<RawEntry> {
        let idx = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(idx).1)
    }
}

fn parse_f64(key: &str, entry: &RawEntry) -> Result<f64, ScenarioError> {
    entry
        .value
        .parse::<f64>()
        .map_err(|e| ScenarioError::InvalidValue {
            line: entry.line,
            key: key.into(),
            msg: e.to_string(),
        })
}

fn parse_u32(key: &str, entry: &RawEntry) -> Result<u32, ScenarioError> {
    entry
        .value
        .parse::<u32>()
        .map_err(|e| ScenarioError::InvalidValue {
            line: entry.line,
            key: key.into(),
            msg: e.to_string(),
        })
}

fn parse_bool(key: &str, entry: &RawEntry) -> Result<bool, ScenarioError> {
    match entry.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ScenarioError::InvalidValue {
            line: entry.line,
            key: key.into(),
            msg: format!("expected true or false, got '{other}'"),
        }),
    }
}

fn required(raw: &mut RawScenario, key: &str) -> Result<RawEntry, ScenarioError> {
    raw.take(key).ok_or_else(|| ScenarioError::MissingKey {
        key: key.to_string(),
    })
}

fn req_f64(raw: &mut RawScenario, key: &str) -> Result<f64, ScenarioError> {
    parse_f64(key, &required(raw, key)?)
}

fn req_u32(raw: &mut RawScenario, key: &str) -> Result<u32, ScenarioError> {
    parse_u32(key, &required(raw, key)?)
}

fn opt_f64(raw: &mut RawScenario, key: &str, default: f64) -> Result<f64, ScenarioError> {
    match raw.take(key) {
        Some(entry) => parse_f64(key, &entry),
        None => Ok(default),
    }
}

fn opt_u32(raw: &mut RawScenario, key: &str, default: u32) -> Result<u32, ScenarioError> {
    match raw.take(key) {
        Some(entry) => parse_u32(key, &entry),
        None => Ok(default),
    }
}

fn validated<T, E: std::fmt::Display>(field: &str, result: Result<T, E>) -> Result<T, ScenarioError> {
    result.map_err(|e| ScenarioError::Validation {
        field: field.to_string(),
        constraint: e.to_string(),
    })
}

impl Scenario {
    /// Parses scenario text. See the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut raw = RawScenario::parse(text)?;

        let name = raw.take("name").map(|e| e.value).unwrap_or_default();
        let description = raw.take("description").map(|e| e.value).unwrap_or_default();

        let server = validated(
            "server.p_max_w/server.k_idle",
            ServerSpec::new(
                req_f64(&mut raw, "server.p_max_w")?,
                req_f64(&mut raw, "server.k_idle")?,
            ),
        )?;
        let cooling = validated(
            "cooling.power_per_group_w/cooling.servers_per_group",
            CoolingSpec::new(
                req_f64(&mut raw, "cooling.power_per_group_w")?,
                req_u32(&mut raw, "cooling.servers_per_group")?,
            ),
        )?;
        let dc = validated(
            "datacenter",
            DataCenterSpec::new(
                req_u32(&mut raw, "datacenter.n_servers")?,
                server,
                req_f64(&mut raw, "datacenter.networking_power_w")?,
                req_f64(&mut raw, "datacenter.storage_power_w")?,
                cooling,
                req_f64(&mut raw, "datacenter.other_infra_power_w")?,
            ),
        )?;
        let panel = validated(
            "panel",
            PanelSpec::new(
                req_f64(&mut raw, "panel.length_m")?,
                req_f64(&mut raw, "panel.width_m")?,
                req_u32(&mut raw, "panel.cells")?,
                opt_f64(&mut raw, "panel.conversion_efficiency", 1.0)?,
            ),
        )?;
        let panel_count = req_u32(&mut raw, "array.panel_count")?;
        let area_round_up_to_m2 = opt_f64(&mut raw, "array.area_round_up_to_m2", 1.0)?;
        if !area_round_up_to_m2.is_finite() || area_round_up_to_m2 <= 0.0 {
            return Err(ScenarioError::Validation {
                field: "array.area_round_up_to_m2".into(),
                constraint: format!("must be positive, got {area_round_up_to_m2}"),
            });
        }
        let target_daily_energy_wh = match raw.take("array.target_daily_energy_wh") {
            Some(entry) => {
                let v = parse_f64("array.target_daily_energy_wh", &entry)?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(ScenarioError::Validation {
                        field: "array.target_daily_energy_wh".into(),
                        constraint: format!("must be positive, got {v}"),
                    });
                }
                Some(v)
            }
            None => None,
        };
        let battery = validated(
            "battery",
            BatterySpec::new(
                req_f64(&mut raw, "battery.amp_hours")?,
                req_f64(&mut raw, "battery.voltage_v")?,
                req_f64(&mut raw, "battery.efficiency")?,
            ),
        )?;
        let bank_count = req_u32(&mut raw, "bank.count")?;
        let bank_min_soc_fraction = opt_f64(&mut raw, "bank.min_soc_fraction", 0.0)?;
        if !(0.0..=1.0).contains(&bank_min_soc_fraction) {
            return Err(ScenarioError::Validation {
                field: "bank.min_soc_fraction".into(),
                constraint: format!("must be within [0, 1], got {bank_min_soc_fraction}"),
            });
        }
        let night_window = validated(
            "sim.night_start_hour/sim.night_end_hour",
            NightWindow::new(
                opt_f64(&mut raw, "sim.night_start_hour", 17.0)?,
                opt_f64(&mut raw, "sim.night_end_hour", 7.0)?,
            ),
        )?;
        let step_hours = opt_f64(&mut raw, "sim.step_hours", 1.0)?;
        let days = opt_u32(&mut raw, "sim.days", 1)?;
        let initial_soc_fraction = opt_f64(&mut raw, "sim.initial_soc_fraction", 1.0)?;
        if !(0.0..=1.0).contains(&initial_soc_fraction) {
            return Err(ScenarioError::Validation {
                field: "sim.initial_soc_fraction".into(),
                constraint: format!("must be within [0, 1], got {initial_soc_fraction}"),
            });
        }
        let start_hour = opt_f64(&mut raw, "sim.start_hour", 0.0)?;
        if !start_hour.is_finite() || !(0.0..24.0).contains(&start_hour) {
            return Err(ScenarioError::Validation {
                field: "sim.start_hour".into(),
                constraint: format!("must be within [0, 24), got {start_hour}"),
            });
        }
        let replan_each_step = match raw.take("sim.replan_each_step") {
            Some(entry) => parse_bool("sim.replan_each_step", &entry)?,
            None => false,
        };

        let policy_name = raw
            .take("sim.policy")
            .map(|e| (e.line, e.value))
            .unwrap_or((0, "always-on".to_string()));
        let fixed_count = raw.take("sim.policy_n_active");
        let policy = match (policy_name.1.as_str(), fixed_count) {
            ("always-on", None) => Policy::AlwaysOn,
            ("consolidate", None) => Policy::Consolidate,
            ("night-fixed", Some(entry)) => {
                let n = parse_u32("sim.policy_n_active", &entry)?;
                if n == 0 || n > dc.n_servers {
                    return Err(ScenarioError::Validation {
                        field: "sim.policy_n_active".into(),
                        constraint: format!("must be within 1..={}, got {n}", dc.n_servers),
                    });
                }
                Policy::NightFixed(n)
            }
            ("night-fixed", None) => {
                return Err(ScenarioError::MissingKey {
                    key: "sim.policy_n_active".into(),
                })
            }
            ("always-on" | "consolidate", Some(entry)) => {
                return Err(ScenarioError::InvalidValue {
                    line: entry.line,
                    key: "sim.policy_n_active".into(),
                    msg: "only valid with sim.policy = night-fixed".into(),
                })
            }
            (other, _) => {
                return Err(ScenarioError::InvalidValue {
                    line: policy_name.0,
                    key: "sim.policy".into(),
                    msg: format!(
                        "expected always-on, consolidate or night-fixed, got '{other}'"
                    ),
                })
            }
        };

        let demand = match raw.take("sim.demand") {
            None => DemandModel::FullLoad,
            Some(entry) => {
                if entry.value == "full-load" {
                    DemandModel::FullLoad
                } else {
                    let d = parse_f64("sim.demand", &entry)?;
                    if !d.is_finite() || d < 0.0 {
                        return Err(ScenarioError::Validation {
                            field: "sim.demand".into(),
                            constraint: format!("must be non-negative, got {d}"),
                        });
                    }
                    DemandModel::Aggregate(d)
                }
            }
        };

        let power_source_kind = match raw.take("sim.power_source") {
            None => PowerSourceKind::Parametric,
            Some(entry) => match entry.value.as_str() {
                "parametric" => PowerSourceKind::Parametric,
                "table" => PowerSourceKind::Table,
                other => {
                    return Err(ScenarioError::InvalidValue {
                        line: entry.line,
                        key: "sim.power_source".into(),
                        msg: format!("expected parametric or table, got '{other}'"),
                    })
                }
            },
        };

        let irradiance_path = raw.take("irradiance.path").map(|e| e.value);

        // gather power_table.<n> rows; anything else left over is unknown
        let mut table_rows: Vec<(u32, f64)> = Vec::new();
        let mut leftover: Option<(usize, String)> = None;
        for (key, entry) in raw.entries.drain(..) {
            if let Some(suffix) = key.strip_prefix("power_table.") {
                let n: u32 = suffix.parse().map_err(|_| ScenarioError::InvalidValue {
                    line: entry.line,
                    key: key.clone(),
                    msg: format!("'{suffix}' is not a server count"),
                })?;
                let power = parse_f64(&key, &entry)?;
                table_rows.push((n, power));
            } else if leftover.is_none() {
                leftover = Some((entry.line, key));
            }
        }
        if let Some((line, key)) = leftover {
            return Err(ScenarioError::UnknownKey { line, key });
        }
        let power_table = if table_rows.is_empty() {
            None
        } else {
            Some(validated("power_table", PowerLookupTable::new(table_rows))?)
        };

        if power_source_kind == PowerSourceKind::Table {
            let table = power_table.as_ref().ok_or(ScenarioError::MissingTable)?;
            if !table.contains(dc.n_servers) {
                return Err(ScenarioError::Validation {
                    field: "power_table".into(),
                    constraint: format!(
                        "table power source needs a row for all {} servers",
                        dc.n_servers
                    ),
                });
            }
            if let Policy::NightFixed(n) = policy {
                if !table.contains(n) {
                    return Err(ScenarioError::Validation {
                        field: "sim.policy_n_active".into(),
                        constraint: format!("power table has no row for {n} servers"),
                    });
                }
            }
        }

        // step validity is a simulation invariant; check it here so a bad
        // scenario fails at load time rather than at run time
        if !step_hours.is_finite()
            || step_hours <= 0.0
            || ((24.0 / step_hours) - (24.0 / step_hours).round()).abs() > 1e-9
        {
            return Err(ScenarioError::Validation {
                field: "sim.step_hours".into(),
                constraint: format!("must be positive and divide 24, got {step_hours}"),
            });
        }
        if days == 0 {
            return Err(ScenarioError::Validation {
                field: "sim.days".into(),
                constraint: "must be at least 1".into(),
            });
        }

        Ok(Scenario {
            name,
            description,
            dc,
            panel,
            panel_count,
            area_round_up_to_m2,
            target_daily_energy_wh,
            battery,
            bank_count,
            bank_min_soc_fraction,
            night_window,
            step_hours,
            days,
            policy,
            power_source_kind,
            power_table,
            demand,
            initial_soc_fraction,
            start_hour,
            replan_each_step,
            irradiance_path,
        })
    }

    /// Serializes back to scenario text with every field explicit. Parsing
    /// the output reproduces this scenario exactly.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        push("name", self.name.clone());
        push("description", self.description.clone());
        push("server.p_max_w", self.dc.server.p_max_w().to_string());
        push("server.k_idle", self.dc.server.k_idle().to_string());
        push("datacenter.n_servers", self.dc.n_servers.to_string());
        push(
            "datacenter.networking_power_w",
            self.dc.networking_power_w.to_string(),
        );
        push(
            "datacenter.storage_power_w",
            self.dc.storage_power_w.to_string(),
        );
        push(
            "datacenter.other_infra_power_w",
            self.dc.other_infra_power_w.to_string(),
        );
        push(
            "cooling.power_per_group_w",
            self.dc.cooling.power_per_group_w().to_string(),
        );
        push(
            "cooling.servers_per_group",
            self.dc.cooling.servers_per_group().to_string(),
        );
        push("panel.length_m", self.panel.length_m.to_string());
        push("panel.width_m", self.panel.width_m.to_string());
        push("panel.cells", self.panel.cells.to_string());
        push(
            "panel.conversion_efficiency",
            self.panel.conversion_efficiency.to_string(),
        );
        push("array.panel_count", self.panel_count.to_string());
        push(
            "array.area_round_up_to_m2",
            self.area_round_up_to_m2.to_string(),
        );
        if let Some(target) = self.target_daily_energy_wh {
            push("array.target_daily_energy_wh", target.to_string());
        }
        push("battery.amp_hours", self.battery.amp_hours.to_string());
        push("battery.voltage_v", self.battery.voltage.to_string());
        push("battery.efficiency", self.battery.efficiency.to_string());
        push("bank.count", self.bank_count.to_string());
        push(
            "bank.min_soc_fraction",
            self.bank_min_soc_fraction.to_string(),
        );
        push(
            "sim.night_start_hour",
            self.night_window.start_hour.to_string(),
        );
        push("sim.night_end_hour", self.night_window.end_hour.to_string());
        push("sim.step_hours", self.step_hours.to_string());
        push("sim.days", self.days.to_string());
        match self.policy {
            Policy::AlwaysOn => push("sim.policy", "always-on".into()),
            Policy::Consolidate => push("sim.policy", "consolidate".into()),
            Policy::NightFixed(n) => {
                push("sim.policy", "night-fixed".into());
                push("sim.policy_n_active", n.to_string());
            }
        }
        match self.power_source_kind {
            PowerSourceKind::Parametric => push("sim.power_source", "parametric".into()),
            PowerSourceKind::Table => push("sim.power_source", "table".into()),
        }
        match self.demand {
            DemandModel::FullLoad => push("sim.demand", "full-load".into()),
            DemandModel::Aggregate(d) => push("sim.demand", d.to_string()),
        }
        push(
            "sim.initial_soc_fraction",
            self.initial_soc_fraction.to_string(),
        );
        push("sim.start_hour", self.start_hour.to_string());
        push("sim.replan_each_step", self.replan_each_step.to_string());
        if let Some(path) = &self.irradiance_path {
            push("irradiance.path", path.clone());
        }
        if let Some(table) = &self.power_table {
            for &(n, power) in table.rows().iter().rev() {
                push(&format!("power_table.{n}"), power.to_string());
            }
        }
        out
    }

    /// The power model this scenario evaluates active-server counts with.
    pub fn power_curve(&self) -> Result<PowerCurve<'_>, ScenarioError> {
        match self.power_source_kind {
            PowerSourceKind::Parametric => Ok(PowerCurve::Parametric(&self.dc)),
            PowerSourceKind::Table => Ok(PowerCurve::Table {
                table: self.power_table.as_ref().ok_or(ScenarioError::MissingTable)?,
                n_servers: self.dc.n_servers,
            }),
        }
    }

    /// Facility power with the whole fleet active at full utilization.
    pub fn full_load_power_w(&self) -> Result<f64, ScenarioError> {
        let curve = self.power_curve()?;
        Ok(curve
            .power_at(self.dc.n_servers, self.dc.n_servers as f64)?
            .total_power_w)
    }

    /// Daily energy the array must cover: the explicit target if present,
    /// otherwise the night window's full-load backup energy.
    pub fn target_energy_wh(&self) -> Result<f64, ScenarioError> {
        match self.target_daily_energy_wh {
            Some(target) => Ok(target),
            None => Ok(backup_energy(
                self.full_load_power_w()?,
                self.night_window.duration_hours(),
            )),
        }
    }

    pub fn bank(&self) -> BatteryBank {
        BatteryBank::new(self.battery, self.bank_count)
            .with_min_soc_fraction(self.bank_min_soc_fraction)
    }

    /// Assembles the simulation configuration, optionally overriding days.
    pub fn to_sim_config(
        &self,
        profile: IrradianceProfile,
        days_override: Option<u32>,
    ) -> SimulationConfig {
        SimulationConfig {
            dc: self.dc.clone(),
            panel: self.panel,
            panel_count: self.panel_count,
            bank: self.bank(),
            profile,
            night_window: self.night_window,
            step_hours: self.step_hours,
            days: days_override.unwrap_or(self.days),
            policy: self.policy,
            power_source: match self.power_source_kind {
                PowerSourceKind::Parametric => PowerSource::Parametric,
                PowerSourceKind::Table => PowerSource::Table(
                    self.power_table
                        .clone()
                        .expect("table presence checked at load"),
                ),
            },
            demand: self.demand,
            initial_soc_fraction: self.initial_soc_fraction,
            start_hour: self.start_hour,
            replan_each_step: self.replan_each_step,
        }
    }

    /// Loads the irradiance profile referenced by this scenario, resolved
    /// relative to `base_dir`.
    pub fn load_irradiance(&self, base_dir: &Path) -> Result<IrradianceProfile, ScenarioError> {
        let rel = self
            .irradiance_path
            .as_ref()
            .ok_or(ScenarioError::MissingIrradiance)?;
        load_irradiance_csv(&base_dir.join(rel))
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path)?;
    Scenario::parse(&text)
}

/// Parses an irradiance CSV: optional leading `#` comments, a
/// `hour,irradiance_wm2` header, then one sample per row with strictly
/// increasing decimal hours. Errors carry the offending row number.
pub fn load_irradiance_csv(path: &Path) -> Result<IrradianceProfile, ScenarioError> {
    let text = fs::read_to_string(path)?;
    parse_irradiance_csv(&text)
}

pub fn parse_irradiance_csv(text: &str) -> Result<IrradianceProfile, ScenarioError> {
    let mut samples: Vec<IrradianceSample> = Vec::new();
    let mut header_seen = false;
    let mut last_row = 0;
    for (i, raw_line) in text.lines().enumerate() {
        let row = i + 1;
        last_row = row;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != "hour,irradiance_wm2" {
                return Err(ScenarioError::Csv {
                    row,
                    msg: format!("expected header 'hour,irradiance_wm2', got '{line}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut fields = line.split(',');
        let (Some(hour_s), Some(irr_s), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(ScenarioError::Csv {
                row,
                msg: format!("expected 2 fields, got '{line}'"),
            });
        };
        let hour: f64 = hour_s.trim().parse().map_err(|_| ScenarioError::Csv {
            row,
            msg: format!("'{}' is not a number", hour_s.trim()),
        })?;
        let irradiance: f64 = irr_s.trim().parse().map_err(|_| ScenarioError::Csv {
            row,
            msg: format!("'{}' is not a number", irr_s.trim()),
        })?;
        if !hour.is_finite() || !(0.0..=24.0).contains(&hour) {
            return Err(ScenarioError::Csv {
                row,
                msg: format!("hour {hour} outside [0, 24]"),
            });
        }
        if let Some(prev) = samples.last() {
            if hour <= prev.hour {
                return Err(ScenarioError::Csv {
                    row,
                    msg: format!("hour {hour} does not increase past {}", prev.hour),
                });
            }
        }
        if !irradiance.is_finite() || irradiance < 0.0 {
            return Err(ScenarioError::Csv {
                row,
                msg: format!("irradiance {irradiance} must be non-negative"),
            });
        }
        samples.push(IrradianceSample {
            hour,
            irradiance_wm2: irradiance,
        });
    }
    if !header_seen {
        return Err(ScenarioError::Csv {
            row: 1,
            msg: "missing 'hour,irradiance_wm2' header".into(),
        });
    }
    if samples.len() < 2 {
        return Err(ScenarioError::Csv {
            row: last_row,
            msg: format!("need at least 2 samples, got {}", samples.len()),
        });
    }
    Ok(IrradianceProfile::new(samples)?)
}

/// One row of the battery-sizing table: measured power through the backup
/// pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingTableRow {
    pub n_active: u32,
    pub power_w: f64,
    pub energy_wh: f64,
    pub effective_wh: f64,
    pub batteries: u32,
}

/// Recomputes the scenario's sizing table from its power table: each row's
/// power runs through backup energy, effective energy, and battery count
/// using the scenario's night window and battery. Rows come back in
/// descending active-server order.
pub fn reproduce_table2(scenario: &Scenario) -> Result<Vec<SizingTableRow>, ScenarioError> {
    let table = scenario
        .power_table
        .as_ref()
        .ok_or(ScenarioError::MissingTable)?;
    let hours = scenario.night_window.duration_hours();
    let rows = table
        .rows()
        .iter()
        .rev()
        .map(|&(n_active, power_w)| {
            let energy_wh = backup_energy(power_w, hours);
            let effective_wh = effective_energy(energy_wh, scenario.battery.efficiency);
            SizingTableRow {
                n_active,
                power_w,
                energy_wh,
                effective_wh,
                batteries: required_batteries(effective_wh, &scenario.battery),
            }
        })
        .collect();
    Ok(rows)
}

/// Trace CSV header, one column per step-record field.
pub const TRACE_CSV_HEADER: &str =
    "t_hours,solar_in_wh,load_wh,charge_wh,discharge_wh,soc_wh,curtailed_wh,deficit_wh,n_active";

/// Serializes a trace as CSV with full-precision numbers.
pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for s in &trace.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.t_hours,
            s.solar_in_wh,
            s.load_wh,
            s.charge_wh,
            s.discharge_wh,
            s.soc_wh,
            s.curtailed_wh,
            s.deficit_wh,
            s.n_active
        ));
    }
    out
}
