//! ON/OFF server consolidation: choose how many servers stay active so the
//! night's energy fits the battery budget, spread the demand across them,
//! and account the energy saved against solar production.

use thiserror::Error;

use crate::power::{PowerCurve, PowerError};
use crate::storage::{
    backup_energy, effective_energy, fits_budget, required_batteries, BatteryBank, BatterySpec,
};

#[derive(Debug, Error, PartialEq)]
pub enum ConsolidationError {
    #[error(
        "even {n_active} active servers need {min_batteries} batteries \
         (effective {required_wh} Wh against budget {budget_wh} Wh)"
    )]
    InsufficientStorage {
        n_active: u32,
        min_batteries: u32,
        required_wh: f64,
        budget_wh: f64,
    },
    #[error("no admissible active-server count between {lo} and {hi}")]
    NoCandidates { lo: u32, hi: u32 },
    #[error("active-server count must be at least 1")]
    ZeroActive,
    #[error(transparent)]
    Power(#[from] PowerError),
}

/// What the servers must serve during the planning window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemandModel {
    /// Every active server runs at full utilization.
    FullLoad,
    /// A fixed aggregate demand in server-equivalents, spread uniformly.
    Aggregate(f64),
}

impl DemandModel {
    /// Aggregate demand seen by `n_active` servers.
    pub fn aggregate_for(&self, n_active: u32) -> f64 {
        match self {
            DemandModel::FullLoad => n_active as f64,
            DemandModel::Aggregate(d) => *d,
        }
    }

    /// Smallest active count that serves the demand in full.
    fn min_active(&self) -> u32 {
        match self {
            DemandModel::FullLoad => 1,
            DemandModel::Aggregate(d) => (d.ceil() as u32).max(1),
        }
    }
}

/// Demand spread over a set of active servers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsolidatedLoad {
    pub per_server_utilization: f64,
    pub unserved_demand: f64,
}

/// Uniform utilization `min(1, demand / n_active)`; demand beyond the active
/// capacity is reported, never dropped silently.
pub fn consolidate_utilization(
    demand: f64,
    n_active: u32,
) -> Result<ConsolidatedLoad, ConsolidationError> {
    if n_active == 0 {
        return Err(ConsolidationError::ZeroActive);
    }
    Ok(ConsolidatedLoad {
        per_server_utilization: (demand / n_active as f64).min(1.0),
        unserved_demand: (demand - n_active as f64).max(0.0),
    })
}

/// Solar production left over after consumption; negative means shortfall.
pub fn energy_saving(solar_production_wh: f64, consumption_wh: f64) -> f64 {
    solar_production_wh - consumption_wh
}

/// A resolved consolidation choice with its full energy accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsolidationPlan {
    pub n_active: u32,
    pub per_server_utilization: f64,
    pub unserved_demand: f64,
    pub total_power_w: f64,
    pub night_energy_wh: f64,
    pub effective_energy_wh: f64,
    pub batteries_needed: u32,
    pub energy_saving_wh: f64,
}

/// Evaluates the plan for a fixed active count, without checking any budget.
pub fn plan_for(
    curve: &PowerCurve,
    demand: DemandModel,
    battery: &BatterySpec,
    n_active: u32,
    backup_hours: f64,
    solar_production_wh: f64,
) -> Result<ConsolidationPlan, ConsolidationError> {
    if n_active == 0 {
        return Err(ConsolidationError::ZeroActive);
    }
    let load = curve.power_at(n_active, demand.aggregate_for(n_active))?;
    let night_energy_wh = backup_energy(load.total_power_w, backup_hours);
    let effective_energy_wh = effective_energy(night_energy_wh, battery.efficiency);
    Ok(ConsolidationPlan {
        n_active,
        per_server_utilization: load.per_server_utilization,
        unserved_demand: load.unserved_demand,
        total_power_w: load.total_power_w,
        night_energy_wh,
        effective_energy_wh,
        batteries_needed: required_batteries(effective_energy_wh, battery),
        energy_saving_wh: energy_saving(solar_production_wh, night_energy_wh),
    })
}

/// Largest admissible active count whose effective night energy fits the
/// given watt-hour budget. Candidates run from the smallest count that
/// serves the demand up to the fleet size; lookup curves restrict them to
/// table rows.
pub fn max_active_with_budget(
    curve: &PowerCurve,
    demand: DemandModel,
    battery: &BatterySpec,
    budget_wh: f64,
    backup_hours: f64,
    solar_production_wh: f64,
) -> Result<ConsolidationPlan, ConsolidationError> {
    let lo = demand.min_active();
    let hi = curve.n_servers();
    let candidates = curve.candidates_desc(lo, hi);
    if candidates.is_empty() {
        return Err(ConsolidationError::NoCandidates { lo, hi });
    }
    let mut smallest_plan = None;
    for &n in &candidates {
        let plan = plan_for(curve, demand, battery, n, backup_hours, solar_production_wh)?;
        if fits_budget(plan.effective_energy_wh, budget_wh) {
            return Ok(plan);
        }
        smallest_plan = Some(plan);
    }
    // candidates are descending, so the last evaluated plan is the smallest
    let plan = smallest_plan.expect("candidates is non-empty");
    Err(ConsolidationError::InsufficientStorage {
        n_active: plan.n_active,
        min_batteries: plan.batteries_needed,
        required_wh: plan.effective_energy_wh,
        budget_wh,
    })
}

/// Largest active count the bank's nameplate capacity can back for a night.
pub fn max_active_servers(
    curve: &PowerCurve,
    demand: DemandModel,
    bank: &BatteryBank,
    backup_hours: f64,
    solar_production_wh: f64,
) -> Result<ConsolidationPlan, ConsolidationError> {
    max_active_with_budget(
        curve,
        demand,
        &bank.spec,
        bank.capacity_wh(),
        backup_hours,
        solar_production_wh,
    )
}
