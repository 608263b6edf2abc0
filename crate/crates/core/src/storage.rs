//! Battery capacity arithmetic, night-backup sizing, and the charge /
//! discharge state machine used by the simulator.
//!
//! Sizing follows the plant convention: backup demand is converted to an
//! "effective" energy by multiplying with battery efficiency, and that
//! effective energy is divided by per-battery capacity. Discharge mirrors
//! the same convention: a bank holding `S` watt-hours can deliver
//! `S * efficiency`; charging is lossless.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StorageError {
    #[error("battery amp-hours must be positive, got {0}")]
    NonPositiveAmpHours(f64),
    #[error("battery voltage must be positive, got {0}")]
    NonPositiveVoltage(f64),
    #[error("battery efficiency must be within (0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("energy amounts must be non-negative and finite, got {0}")]
    NegativeEnergy(f64),
}

/// Electrical constants of one battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec {
    pub amp_hours: f64,
    pub voltage: f64,
    pub efficiency: f64,
}

impl BatterySpec {
    pub fn new(amp_hours: f64, voltage: f64, efficiency: f64) -> Result<Self, StorageError> {
        if !amp_hours.is_finite() || amp_hours <= 0.0 {
            return Err(StorageError::NonPositiveAmpHours(amp_hours));
        }
        if !voltage.is_finite() || voltage <= 0.0 {
            return Err(StorageError::NonPositiveVoltage(voltage));
        }
        if !efficiency.is_finite() || efficiency <= 0.0 || efficiency > 1.0 {
            return Err(StorageError::EfficiencyOutOfRange(efficiency));
        }
        Ok(BatterySpec {
            amp_hours,
            voltage,
            efficiency,
        })
    }

    /// Nameplate capacity `Ah * V` in watt-hours.
    pub fn capacity_wh(&self) -> f64 {
        self.amp_hours * self.voltage
    }
}

/// A set of identical batteries operated together. An optional
/// state-of-charge floor reserves the bottom fraction of the bank; discharge
/// never draws below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryBank {
    pub spec: BatterySpec,
    pub count: u32,
    pub min_soc_fraction: f64,
}

impl BatteryBank {
    pub fn new(spec: BatterySpec, count: u32) -> Self {
        BatteryBank {
            spec,
            count,
            min_soc_fraction: 0.0,
        }
    }

    pub fn with_min_soc_fraction(mut self, fraction: f64) -> Self {
        self.min_soc_fraction = fraction.clamp(0.0, 1.0);
        self
    }

    pub fn capacity_wh(&self) -> f64 {
        self.count as f64 * self.spec.capacity_wh()
    }

    /// Stored energy discharge will not go below.
    pub fn floor_wh(&self) -> f64 {
        self.capacity_wh() * self.min_soc_fraction
    }

    /// Charges the bank; surplus beyond capacity is curtailed.
    pub fn charge(&self, state: StateOfCharge, energy_in_wh: f64) -> ChargeOutcome {
        let headroom = (self.capacity_wh() - state.stored_wh).max(0.0);
        let accepted_wh = energy_in_wh.max(0.0).min(headroom);
        ChargeOutcome {
            state: StateOfCharge {
                stored_wh: state.stored_wh + accepted_wh,
            },
            accepted_wh,
            curtailed_wh: energy_in_wh.max(0.0) - accepted_wh,
        }
    }

    /// Discharges toward a demand. Deliverable energy is the stored energy
    /// above the floor times efficiency; every delivered watt-hour removes
    /// `1 / efficiency` from the store. Unmet demand is reported as deficit.
    pub fn discharge(&self, state: StateOfCharge, demand_wh: f64) -> DischargeOutcome {
        let demand = demand_wh.max(0.0);
        let floor = self.floor_wh();
        let deliverable = (state.stored_wh - floor).max(0.0) * self.spec.efficiency;
        let delivered_wh = demand.min(deliverable);
        let drained = delivered_wh / self.spec.efficiency;
        DischargeOutcome {
            state: StateOfCharge {
                stored_wh: (state.stored_wh - drained).max(floor.min(state.stored_wh)),
            },
            delivered_wh,
            deficit_wh: demand - delivered_wh,
        }
    }
}

/// Energy currently stored in a bank, in watt-hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateOfCharge {
    pub stored_wh: f64,
}

impl StateOfCharge {
    pub fn empty() -> Self {
        StateOfCharge { stored_wh: 0.0 }
    }

    pub fn full(bank: &BatteryBank) -> Self {
        StateOfCharge {
            stored_wh: bank.capacity_wh(),
        }
    }

    pub fn at_fraction(bank: &BatteryBank, fraction: f64) -> Self {
        StateOfCharge {
            stored_wh: bank.capacity_wh() * fraction.clamp(0.0, 1.0),
        }
    }
}

/// Result of a charge step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeOutcome {
    pub state: StateOfCharge,
    pub accepted_wh: f64,
    pub curtailed_wh: f64,
}

/// Result of a discharge step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargeOutcome {
    pub state: StateOfCharge,
    pub delivered_wh: f64,
    pub deficit_wh: f64,
}

/// Energy consumed over a backup window: power times hours.
pub fn backup_energy(total_power_w: f64, backup_hours: f64) -> f64 {
    total_power_w * backup_hours
}

/// Backup energy scaled by battery efficiency, the quantity batteries are
/// sized against.
pub fn effective_energy(total_energy_wh: f64, efficiency: f64) -> f64 {
    total_energy_wh * efficiency
}

// Slack subtracted from the capacity ratio before ceiling so exact fits do
// not round up under floating-point noise.
const COUNT_SLACK: f64 = 1e-9;

/// Whole batteries needed to hold the effective energy.
pub fn required_batteries(effective_wh: f64, spec: &BatterySpec) -> u32 {
    if effective_wh <= 0.0 {
        return 0;
    }
    (effective_wh / spec.capacity_wh() - COUNT_SLACK).ceil() as u32
}

/// True when an effective energy fits a watt-hour budget, with the same
/// slack convention as [`required_batteries`].
pub fn fits_budget(effective_wh: f64, budget_wh: f64) -> bool {
    effective_wh <= budget_wh + COUNT_SLACK * budget_wh.abs().max(1.0)
}
