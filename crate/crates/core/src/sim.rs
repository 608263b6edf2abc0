//! Deterministic hourly simulation of one or more 24-hour cycles.
//!
//! Each step the array's solar energy serves the load first; surplus charges
//! the bank and anything beyond capacity is curtailed. Shortfall discharges
//! the bank, and whatever the bank cannot deliver is recorded as deficit.
//! During the night window a policy decides how many servers stay active.

use thiserror::Error;

use crate::consolidation::{max_active_with_budget, ConsolidationError, DemandModel};
use crate::power::{DataCenterSpec, PowerCurve, PowerError, PowerLookupTable};
use crate::solar::{daily_insolation, IrradianceProfile, PanelSpec};
use crate::storage::{effective_energy, required_batteries, BatteryBank, BatterySpec, StateOfCharge};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("night window must have distinct start and end hours in [0, 24), got ({start}, {end})")]
    InvalidWindow { start: f64, end: f64 },
    #[error("step must be positive and divide 24 hours evenly, got {0}")]
    InvalidStep(f64),
    #[error("simulation needs at least one day")]
    ZeroDays,
    #[error("initial state of charge fraction must be within [0, 1], got {0}")]
    InvalidInitialSoc(f64),
    #[error("start hour must be within [0, 24), got {0}")]
    InvalidStartHour(f64),
    #[error("aggregate demand must be non-negative and finite, got {0}")]
    InvalidDemand(f64),
    #[error("fixed night policy count {n_active} is outside 1..={n_servers}")]
    InvalidFixedCount { n_active: u32, n_servers: u32 },
    #[error("cannot summarize an empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Consolidation(#[from] ConsolidationError),
}

/// The battery-backed night period, possibly wrapping midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NightWindow {
    pub start_hour: f64,
    pub end_hour: f64,
}

impl NightWindow {
    pub fn new(start_hour: f64, end_hour: f64) -> Result<Self, SimError> {
        let valid = |h: f64| h.is_finite() && (0.0..24.0).contains(&h);
        if !valid(start_hour) || !valid(end_hour) || start_hour == end_hour {
            return Err(SimError::InvalidWindow {
                start: start_hour,
                end: end_hour,
            });
        }
        Ok(NightWindow {
            start_hour,
            end_hour,
        })
    }

    /// Whether an hour-of-day falls inside the window.
    pub fn contains(&self, hour_of_day: f64) -> bool {
        if self.start_hour < self.end_hour {
            (self.start_hour..self.end_hour).contains(&hour_of_day)
        } else {
            hour_of_day >= self.start_hour || hour_of_day < self.end_hour
        }
    }

    /// Window length in hours, wrapping modulo 24.
    pub fn duration_hours(&self) -> f64 {
        (self.end_hour - self.start_hour).rem_euclid(24.0)
    }
}

/// How many servers run during the night window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// The whole fleet stays on.
    AlwaysOn,
    /// Fit the active count to the energy stored when the night begins.
    Consolidate,
    /// Force a fixed active count every night (what-if studies).
    NightFixed(u32),
}

/// Facility power model used by the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerSource {
    Parametric,
    Table(PowerLookupTable),
}

/// Everything a simulation run needs; validated by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub dc: DataCenterSpec,
    pub panel: PanelSpec,
    pub panel_count: u32,
    pub bank: BatteryBank,
    pub profile: IrradianceProfile,
    pub night_window: NightWindow,
    pub step_hours: f64,
    pub days: u32,
    pub policy: Policy,
    pub power_source: PowerSource,
    pub demand: DemandModel,
    pub initial_soc_fraction: f64,
    /// Hour-of-day the run begins at; lets a run open exactly at a window
    /// boundary.
    pub start_hour: f64,
    /// Re-evaluate the consolidation choice every night step instead of once
    /// per window.
    pub replan_each_step: bool,
}

impl SimulationConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.days == 0 {
            return Err(SimError::ZeroDays);
        }
        if !self.step_hours.is_finite() || self.step_hours <= 0.0 {
            return Err(SimError::InvalidStep(self.step_hours));
        }
        let per_day = 24.0 / self.step_hours;
        if (per_day - per_day.round()).abs() > 1e-9 || per_day.round() < 1.0 {
            return Err(SimError::InvalidStep(self.step_hours));
        }
        if !(0.0..=1.0).contains(&self.initial_soc_fraction) {
            return Err(SimError::InvalidInitialSoc(self.initial_soc_fraction));
        }
        if !self.start_hour.is_finite() || !(0.0..24.0).contains(&self.start_hour) {
            return Err(SimError::InvalidStartHour(self.start_hour));
        }
        if let DemandModel::Aggregate(d) = self.demand {
            if !d.is_finite() || d < 0.0 {
                return Err(SimError::InvalidDemand(d));
            }
        }
        if let Policy::NightFixed(n) = self.policy {
            if n == 0 || n > self.dc.n_servers {
                return Err(SimError::InvalidFixedCount {
                    n_active: n,
                    n_servers: self.dc.n_servers,
                });
            }
        }
        // the engine must be able to price every active count it will use
        if let PowerSource::Table(table) = &self.power_source {
            table.power_at(self.dc.n_servers)?;
            if let Policy::NightFixed(n) = self.policy {
                table.power_at(n)?;
            }
        }
        Ok(())
    }

    fn curve(&self) -> PowerCurve<'_> {
        match &self.power_source {
            PowerSource::Parametric => PowerCurve::Parametric(&self.dc),
            PowerSource::Table(table) => PowerCurve::Table {
                table,
                n_servers: self.dc.n_servers,
            },
        }
    }

    fn steps_per_day(&self) -> u32 {
        (24.0 / self.step_hours).round() as u32
    }

    /// Collector area times conversion efficiency, in m².
    fn effective_array_m2(&self) -> f64 {
        self.panel_count as f64 * self.panel.area_m2() * self.panel.conversion_efficiency
    }

    /// Whole-array production over one day, in Wh.
    pub fn daily_production_wh(&self) -> f64 {
        self.effective_array_m2() * daily_insolation(&self.profile)
    }
}

/// One simulation step. Energies are watt-hours over the step; `soc_wh` is
/// the stored energy at the end of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t_hours: f64,
    pub solar_in_wh: f64,
    pub load_wh: f64,
    pub charge_wh: f64,
    pub discharge_wh: f64,
    pub soc_wh: f64,
    pub curtailed_wh: f64,
    pub deficit_wh: f64,
    pub n_active: u32,
}

/// Run parameters a summary needs to interpret the records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMeta {
    pub night_window: NightWindow,
    pub step_hours: f64,
    pub days: u32,
    pub battery: BatterySpec,
}

/// Full per-step history of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub steps: Vec<StepRecord>,
    pub meta: TraceMeta,
}

/// Aggregates of a trace, all re-derivable by a single pass over the steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub total_production_wh: f64,
    pub total_consumption_wh: f64,
    pub energy_saving_wh: f64,
    pub mps_percent: f64,
    pub delta_e_wh: f64,
    pub min_soc_wh: f64,
    pub max_deficit_wh: f64,
    pub batteries_implied: u32,
}

fn hour_of_day(t_hours: f64) -> f64 {
    t_hours.rem_euclid(24.0)
}

/// Runs the simulation. Within the night window the policy picks the active
/// count; consolidation decides once at window entry against the energy
/// stored at that moment (or every step with `replan_each_step`). If even the
/// smallest admissible count does not fit the stored energy, the night runs
/// at that smallest count and the shortfall shows up as deficit.
pub fn run(config: &SimulationConfig) -> Result<SimulationTrace, SimError> {
    config.validate()?;
    let curve = config.curve();
    let backup_hours = config.night_window.duration_hours();
    let production_wh = config.daily_production_wh();
    let total_steps = config.steps_per_day() as u64 * config.days as u64;
    let mut soc = StateOfCharge::at_fraction(&config.bank, config.initial_soc_fraction);
    let mut night_choice: Option<u32> = None;
    let mut steps = Vec::with_capacity(total_steps as usize);

    for i in 0..total_steps {
        let t = config.start_hour + i as f64 * config.step_hours;
        let hod = hour_of_day(t);
        let night = config.night_window.contains(hod);

        let n_active = if night {
            if config.replan_each_step || night_choice.is_none() {
                night_choice = Some(match config.policy {
                    Policy::AlwaysOn => config.dc.n_servers,
                    Policy::NightFixed(n) => n,
                    Policy::Consolidate => max_active_with_budget(
                        &curve,
                        config.demand,
                        &config.bank.spec,
                        soc.stored_wh,
                        backup_hours,
                        production_wh,
                    )
                    .map(|plan| plan.n_active)
                    .unwrap_or_else(|_| smallest_candidate(&curve, config.demand)),
                });
            }
            night_choice.expect("night choice was just made")
        } else {
            night_choice = None;
            config.dc.n_servers
        };

        let load = curve.power_at(n_active, config.demand.aggregate_for(n_active))?;
        let load_wh = load.total_power_w * config.step_hours;
        // a step can straddle midnight when start_hour is not step-aligned
        let step_end = hod + config.step_hours;
        let insolation_whm2 = if step_end <= 24.0 {
            config.profile.energy_between_whm2(hod, step_end)
        } else {
            config.profile.energy_between_whm2(hod, 24.0)
                + config.profile.energy_between_whm2(0.0, step_end - 24.0)
        };
        let solar_in_wh = config.effective_array_m2() * insolation_whm2;

        let direct_wh = solar_in_wh.min(load_wh);
        let surplus_wh = solar_in_wh - direct_wh;
        let shortfall_wh = load_wh - direct_wh;

        let charged = config.bank.charge(soc, surplus_wh);
        let discharged = config.bank.discharge(charged.state, shortfall_wh);
        soc = discharged.state;

        let record = StepRecord {
            t_hours: t,
            solar_in_wh,
            load_wh,
            charge_wh: charged.accepted_wh,
            discharge_wh: discharged.delivered_wh,
            soc_wh: soc.stored_wh,
            curtailed_wh: charged.curtailed_wh,
            deficit_wh: discharged.deficit_wh,
            n_active,
        };
        debug_assert!(
            {
                let served = record.load_wh - record.deficit_wh;
                let lhs = record.solar_in_wh + record.discharge_wh;
                let rhs = served + record.charge_wh + record.curtailed_wh;
                (lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1.0)
            },
            "per-step energy conservation violated at t={t}"
        );
        steps.push(record);
    }

    Ok(SimulationTrace {
        steps,
        meta: TraceMeta {
            night_window: config.night_window,
            step_hours: config.step_hours,
            days: config.days,
            battery: config.bank.spec,
        },
    })
}

fn smallest_candidate(curve: &PowerCurve, demand: DemandModel) -> u32 {
    let lo = match demand {
        DemandModel::FullLoad => 1,
        DemandModel::Aggregate(d) => (d.ceil() as u32).max(1),
    };
    curve
        .candidates_desc(lo, curve.n_servers())
        .last()
        .copied()
        .unwrap_or(curve.n_servers())
}

/// Aggregates a trace into totals and coverage metrics. The implied battery
/// count applies the sizing pipeline to the average per-day night-window
/// consumption.
pub fn summarize(trace: &SimulationTrace) -> Result<SimulationSummary, SimError> {
    if trace.steps.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    let mut production = 0.0;
    let mut consumption = 0.0;
    let mut night_consumption = 0.0;
    let mut min_soc = f64::INFINITY;
    let mut max_deficit: f64 = 0.0;
    for step in &trace.steps {
        production += step.solar_in_wh;
        consumption += step.load_wh;
        if trace.meta.night_window.contains(hour_of_day(step.t_hours)) {
            night_consumption += step.load_wh;
        }
        min_soc = min_soc.min(step.soc_wh);
        max_deficit = max_deficit.max(step.deficit_wh);
    }
    let nightly = night_consumption / trace.meta.days as f64;
    let effective = effective_energy(nightly, trace.meta.battery.efficiency);
    let mps_percent = if consumption > 0.0 {
        production / consumption * 100.0
    } else {
        0.0
    };
    Ok(SimulationSummary {
        total_production_wh: production,
        total_consumption_wh: consumption,
        energy_saving_wh: production - consumption,
        mps_percent,
        delta_e_wh: production - consumption,
        min_soc_wh: min_soc,
        max_deficit_wh: max_deficit,
        batteries_implied: required_batteries(effective, &trace.meta.battery),
    })
}
