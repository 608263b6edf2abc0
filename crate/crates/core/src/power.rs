//! Utilization-proportional power draw of servers and whole-facility load.
//!
//! A server draws `k * p_max + (1 - k) * p_max * u` watts at CPU utilization
//! `u`, where `k` is the idle fraction. Facility power stacks the server
//! aggregate with fixed networking/storage draw, per-group cooling, and any
//! remaining infrastructure. Servers that are switched off draw nothing and
//! shed their cooling-group share.

use thiserror::Error;

/// Errors from power-model validation and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum PowerError {
    #[error("p_max must be positive and finite, got {0}")]
    NonPositivePMax(f64),
    #[error("idle fraction must be within [0, 1], got {0}")]
    IdleFractionOutOfRange(f64),
    #[error("utilization must be within [0, 1], got {value}{}", index_suffix(*.index))]
    UtilizationOutOfRange { value: f64, index: Option<usize> },
    #[error("idle power {p_idle} W exceeds maximum power {p_max} W")]
    IdleAboveMax { p_idle: f64, p_max: f64 },
    #[error("cooling power per group must be non-negative, got {0}")]
    NegativeCoolingPower(f64),
    #[error("servers per cooling group must be at least 1")]
    ZeroServersPerGroup,
    #[error("data center must have at least one server")]
    ZeroServers,
    #[error("{field} must be non-negative and finite, got {value}")]
    NegativePower { field: &'static str, value: f64 },
    #[error("{got} utilizations supplied for {n_servers} servers")]
    TooManyUtilizations { got: usize, n_servers: u32 },
    #[error("active server count {n_active} exceeds fleet size {n_servers}")]
    ActiveAboveFleet { n_active: u32, n_servers: u32 },
    #[error("demand {demand} cannot be served with zero active servers")]
    InfeasibleDemand { demand: f64 },
    #[error("demand must be non-negative and finite, got {0}")]
    InvalidDemand(f64),
    #[error("no power table row for {n_active} active servers")]
    MissingTableRow { n_active: u32 },
    #[error("power table rows must have distinct server counts, {n_active} repeats")]
    DuplicateTableRow { n_active: u32 },
    #[error("power table value for {n_active} servers must be non-negative, got {power_w}")]
    NegativeTablePower { n_active: u32, power_w: f64 },
}

fn index_suffix(index: Option<usize>) -> String {
    match index {
        Some(i) => format!(" at index {i}"),
        None => String::new(),
    }
}

/// CPU utilization as a fraction of full load, guaranteed within [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Utilization(f64);

impl Utilization {
    pub const ZERO: Utilization = Utilization(0.0);
    pub const FULL: Utilization = Utilization(1.0);

    pub fn new(value: f64) -> Result<Self, PowerError> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(PowerError::UtilizationOutOfRange { value, index: None });
        }
        Ok(Utilization(value))
    }

    /// Converts a raw slice, reporting the offending index on failure.
    pub fn vec_from_raw(values: &[f64]) -> Result<Vec<Utilization>, PowerError> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                Utilization::new(v).map_err(|_| PowerError::UtilizationOutOfRange {
                    value: v,
                    index: Some(i),
                })
            })
            .collect()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Electrical constants of a single server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerSpec {
    p_max_w: f64,
    k_idle: f64,
}

impl ServerSpec {
    pub fn new(p_max_w: f64, k_idle: f64) -> Result<Self, PowerError> {
        if !p_max_w.is_finite() || p_max_w <= 0.0 {
            return Err(PowerError::NonPositivePMax(p_max_w));
        }
        if !k_idle.is_finite() || !(0.0..=1.0).contains(&k_idle) {
            return Err(PowerError::IdleFractionOutOfRange(k_idle));
        }
        Ok(ServerSpec { p_max_w, k_idle })
    }

    pub fn p_max_w(&self) -> f64 {
        self.p_max_w
    }

    pub fn k_idle(&self) -> f64 {
        self.k_idle
    }

    /// Idle draw `k * p_max`.
    pub fn p_idle_w(&self) -> f64 {
        self.k_idle * self.p_max_w
    }
}

/// Discrete cooling units, each serving a fixed group of servers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingSpec {
    power_per_group_w: f64,
    servers_per_group: u32,
}

impl CoolingSpec {
    pub fn new(power_per_group_w: f64, servers_per_group: u32) -> Result<Self, PowerError> {
        if !power_per_group_w.is_finite() || power_per_group_w < 0.0 {
            return Err(PowerError::NegativeCoolingPower(power_per_group_w));
        }
        if servers_per_group == 0 {
            return Err(PowerError::ZeroServersPerGroup);
        }
        Ok(CoolingSpec {
            power_per_group_w,
            servers_per_group,
        })
    }

    pub fn power_per_group_w(&self) -> f64 {
        self.power_per_group_w
    }

    pub fn servers_per_group(&self) -> u32 {
        self.servers_per_group
    }
}

/// Electrical description of the whole data center.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCenterSpec {
    pub n_servers: u32,
    pub server: ServerSpec,
    pub networking_power_w: f64,
    pub storage_power_w: f64,
    pub cooling: CoolingSpec,
    pub other_infra_power_w: f64,
}

impl DataCenterSpec {
    pub fn new(
        n_servers: u32,
        server: ServerSpec,
        networking_power_w: f64,
        storage_power_w: f64,
        cooling: CoolingSpec,
        other_infra_power_w: f64,
    ) -> Result<Self, PowerError> {
        if n_servers == 0 {
            return Err(PowerError::ZeroServers);
        }
        for (field, value) in [
            ("networking_power_w", networking_power_w),
            ("storage_power_w", storage_power_w),
            ("other_infra_power_w", other_infra_power_w),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(PowerError::NegativePower { field, value });
            }
        }
        Ok(DataCenterSpec {
            n_servers,
            server,
            networking_power_w,
            storage_power_w,
            cooling,
            other_infra_power_w,
        })
    }
}

/// Power drawn by one server at utilization `u`: `k*p_max + (1-k)*p_max*u`.
pub fn server_power(spec: &ServerSpec, u: Utilization) -> f64 {
    spec.k_idle * spec.p_max_w + (1.0 - spec.k_idle) * spec.p_max_w * u.value()
}

/// Same curve parameterized by idle power: `p_idle + (p_max - p_idle)*u`.
pub fn server_power_idle_form(
    p_idle_w: f64,
    p_max_w: f64,
    u: Utilization,
) -> Result<f64, PowerError> {
    if !p_max_w.is_finite() || p_max_w <= 0.0 {
        return Err(PowerError::NonPositivePMax(p_max_w));
    }
    if !p_idle_w.is_finite() || p_idle_w < 0.0 || p_idle_w > p_max_w {
        return Err(PowerError::IdleAboveMax {
            p_idle: p_idle_w,
            p_max: p_max_w,
        });
    }
    Ok(p_idle_w + (p_max_w - p_idle_w) * u.value())
}

/// Total draw of the listed active servers. An OFF server does not appear in
/// the list; the empty list models everything switched off and sums to zero.
pub fn aggregate_server_power(spec: &ServerSpec, utilizations: &[Utilization]) -> f64 {
    utilizations.iter().map(|&u| server_power(spec, u)).sum()
}

/// Cooling draw for `active_servers`, in whole cooling groups. A partially
/// used group still costs one full unit; idle groups are off.
pub fn cooling_power(cooling: &CoolingSpec, active_servers: u32) -> f64 {
    let groups = active_servers.div_ceil(cooling.servers_per_group);
    groups as f64 * cooling.power_per_group_w
}

/// IT load: servers plus fixed networking and storage equipment.
pub fn it_load(dc: &DataCenterSpec, utilizations: &[Utilization]) -> Result<f64, PowerError> {
    if utilizations.len() > dc.n_servers as usize {
        return Err(PowerError::TooManyUtilizations {
            got: utilizations.len(),
            n_servers: dc.n_servers,
        });
    }
    Ok(aggregate_server_power(&dc.server, utilizations)
        + dc.networking_power_w
        + dc.storage_power_w)
}

/// Whole-facility draw: IT load plus cooling for the active servers plus
/// remaining infrastructure.
pub fn total_power(dc: &DataCenterSpec, utilizations: &[Utilization]) -> Result<f64, PowerError> {
    let it = it_load(dc, utilizations)?;
    Ok(it + cooling_power(&dc.cooling, utilizations.len() as u32) + dc.other_infra_power_w)
}

/// Facility draw with `n_active` servers uniformly sharing an aggregate
/// demand, plus any demand left unserved once utilization saturates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveLoad {
    pub total_power_w: f64,
    pub per_server_utilization: f64,
    pub unserved_demand: f64,
}

/// Evaluates `total_power` with `n_active` servers each at
/// `u = min(1, demand / n_active)`. Demand is in server-equivalents: a demand
/// of 10 keeps ten servers fully busy. Demand beyond `n_active` saturates
/// utilization at 1 and is reported as unserved.
pub fn power_at_active(
    dc: &DataCenterSpec,
    n_active: u32,
    demand: f64,
) -> Result<ActiveLoad, PowerError> {
    if !demand.is_finite() || demand < 0.0 {
        return Err(PowerError::InvalidDemand(demand));
    }
    if n_active > dc.n_servers {
        return Err(PowerError::ActiveAboveFleet {
            n_active,
            n_servers: dc.n_servers,
        });
    }
    if n_active == 0 {
        if demand > 0.0 {
            return Err(PowerError::InfeasibleDemand { demand });
        }
        let power = total_power(dc, &[])?;
        return Ok(ActiveLoad {
            total_power_w: power,
            per_server_utilization: 0.0,
            unserved_demand: 0.0,
        });
    }
    let u = (demand / n_active as f64).min(1.0);
    let utilizations = vec![Utilization::new(u)?; n_active as usize];
    let power = total_power(dc, &utilizations)?;
    Ok(ActiveLoad {
        total_power_w: power,
        per_server_utilization: u,
        unserved_demand: (demand - n_active as f64).max(0.0),
    })
}

/// Measured power per active-server count, used in place of the parametric
/// model when a scenario supplies observed facility draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLookupTable {
    rows: Vec<(u32, f64)>,
}

impl PowerLookupTable {
    /// Builds a table from `(n_active, power_w)` pairs; rows are kept sorted
    /// by server count.
    pub fn new(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, PowerError> {
        let mut rows: Vec<(u32, f64)> = pairs.into_iter().collect();
        rows.sort_by_key(|&(n, _)| n);
        for window in rows.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(PowerError::DuplicateTableRow {
                    n_active: window[0].0,
                });
            }
        }
        for &(n_active, power_w) in &rows {
            if !power_w.is_finite() || power_w < 0.0 {
                return Err(PowerError::NegativeTablePower { n_active, power_w });
            }
        }
        Ok(PowerLookupTable { rows })
    }

    pub fn power_at(&self, n_active: u32) -> Result<f64, PowerError> {
        self.rows
            .iter()
            .find(|&&(n, _)| n == n_active)
            .map(|&(_, p)| p)
            .ok_or(PowerError::MissingTableRow { n_active })
    }

    pub fn contains(&self, n_active: u32) -> bool {
        self.rows.iter().any(|&(n, _)| n == n_active)
    }

    /// Rows sorted by ascending server count.
    pub fn rows(&self) -> &[(u32, f64)] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Where facility power comes from when evaluating an active-server count:
/// the parametric model or a scenario-supplied measurement table.
#[derive(Debug, Clone, Copy)]
pub enum PowerCurve<'a> {
    Parametric(&'a DataCenterSpec),
    Table {
        table: &'a PowerLookupTable,
        n_servers: u32,
    },
}

impl<'a> PowerCurve<'a> {
    pub fn n_servers(&self) -> u32 {
        match self {
            PowerCurve::Parametric(dc) => dc.n_servers,
            PowerCurve::Table { n_servers, .. } => *n_servers,
        }
    }

    /// Facility power with `n_active` servers serving `demand`. Table rows
    /// are taken as-is (they already embed a utilization assumption), so the
    /// demand only shapes the reported per-server utilization there.
    pub fn power_at(&self, n_active: u32, demand: f64) -> Result<ActiveLoad, PowerError> {
        match self {
            PowerCurve::Parametric(dc) => power_at_active(dc, n_active, demand),
            PowerCurve::Table { table, n_servers } => {
                if n_active > *n_servers {
                    return Err(PowerError::ActiveAboveFleet {
                        n_active,
                        n_servers: *n_servers,
                    });
                }
                if !demand.is_finite() || demand < 0.0 {
                    return Err(PowerError::InvalidDemand(demand));
                }
                let power = table.power_at(n_active)?;
                let u = if n_active == 0 {
                    0.0
                } else {
                    (demand / n_active as f64).min(1.0)
                };
                Ok(ActiveLoad {
                    total_power_w: power,
                    per_server_utilization: u,
                    unserved_demand: (demand - n_active as f64).max(0.0),
                })
            }
        }
    }

    /// Candidate active-server counts in `[lo, hi]`, descending. Parametric
    /// curves admit every count; tables only their rows.
    pub fn candidates_desc(&self, lo: u32, hi: u32) -> Vec<u32> {
        match self {
            PowerCurve::Parametric(_) => (lo..=hi).rev().collect(),
            PowerCurve::Table { table, .. } => {
                let mut counts: Vec<u32> = table
                    .rows
                    .iter()
                    .map(|&(n, _)| n)
                    .filter(|&n| n >= lo && n <= hi)
                    .collect();
                counts.sort_unstable_by(|a, b| b.cmp(a));
                counts
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn server_250() -> ServerSpec {
        ServerSpec::new(250.0, 0.7).unwrap()
    }

    /// 100 servers of 250 W (k=0.7), 125 kW fixed IT, 2.5 kW cooling per 5
    /// servers, 10 kW other infrastructure.
    pub(crate) fn reference_dc() -> DataCenterSpec {
        DataCenterSpec::new(
            100,
            server_250(),
            0.0,
            125_000.0,
            CoolingSpec::new(2_500.0, 5).unwrap(),
            10_000.0,
        )
        .unwrap()
    }

    #[test]
    fn server_power_full_idle_half() {
        let s = server_250();
        assert_eq!(server_power(&s, Utilization::FULL), 250.0);
        assert_eq!(server_power(&s, Utilization::ZERO), 175.0);
        assert_eq!(server_power(&s, Utilization::new(0.5).unwrap()), 212.5);
    }

    #[test]
    fn server_power_bounds_and_monotonicity() {
        let s = ServerSpec::new(380.0, 0.42).unwrap();
        let mut last = -1.0;
        for i in 0..=100 {
            let u = Utilization::new(i as f64 / 100.0).unwrap();
            let p = server_power(&s, u);
            assert!(p >= s.p_idle_w() - 1e-12 && p <= s.p_max_w() + 1e-12);
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            ServerSpec::new(0.0, 0.7),
            Err(PowerError::NonPositivePMax(_))
        ));
        assert!(matches!(
            ServerSpec::new(250.0, 1.5),
            Err(PowerError::IdleFractionOutOfRange(_))
        ));
        assert!(matches!(
            Utilization::new(-0.1),
            Err(PowerError::UtilizationOutOfRange { .. })
        ));
        assert!(Utilization::new(f64::NAN).is_err());
    }

    #[test]
    fn idle_form_examples() {
        assert_eq!(
            server_power_idle_form(175.0, 250.0, Utilization::ZERO).unwrap(),
            175.0
        );
        assert_eq!(
            server_power_idle_form(175.0, 250.0, Utilization::FULL).unwrap(),
            250.0
        );
        assert_eq!(
            server_power_idle_form(175.0, 250.0, Utilization::new(0.4).unwrap()).unwrap(),
            205.0
        );
        assert!(matches!(
            server_power_idle_form(300.0, 250.0, Utilization::ZERO),
            Err(PowerError::IdleAboveMax { .. })
        ));
    }

    #[test]
    fn both_forms_agree() {
        let s = server_250();
        for i in 0..=10 {
            let u = Utilization::new(i as f64 / 10.0).unwrap();
            let a = server_power(&s, u);
            let b = server_power_idle_form(s.p_idle_w(), s.p_max_w(), u).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn aggregate_examples() {
        let s = server_250();
        let hundred_full = vec![Utilization::FULL; 100];
        assert_eq!(aggregate_server_power(&s, &hundred_full), 25_000.0);
        assert_eq!(aggregate_server_power(&s, &[]), 0.0);
        assert_eq!(
            aggregate_server_power(&s, &[Utilization::ZERO, Utilization::FULL]),
            425.0
        );
    }

    #[test]
    fn aggregate_linearity_matches_scalar_multiple() {
        let s = server_250();
        for &(u, n) in &[(0.5, 100usize), (0.0, 37), (1.0, 64), (0.25, 16)] {
            let util = Utilization::new(u).unwrap();
            let list = vec![util; n];
            assert_eq!(
                aggregate_server_power(&s, &list),
                n as f64 * server_power(&s, util)
            );
        }
    }

    #[test]
    fn raw_utilization_error_names_index() {
        let err = Utilization::vec_from_raw(&[0.3, 0.9, 1.2]).unwrap_err();
        assert_eq!(
            err,
            PowerError::UtilizationOutOfRange {
                value: 1.2,
                index: Some(2)
            }
        );
        assert!(err.to_string().contains("index 2"));
    }

    #[test]
    fn cooling_examples() {
        let c = CoolingSpec::new(2_500.0, 5).unwrap();
        assert_eq!(cooling_power(&c, 100), 50_000.0);
        assert_eq!(cooling_power(&c, 0), 0.0);
        assert_eq!(cooling_power(&c, 7), 5_000.0);
    }

    #[test]
    fn it_load_examples() {
        let dc = reference_dc();
        let full = vec![Utilization::FULL; 100];
        assert_eq!(it_load(&dc, &full).unwrap(), 150_000.0);

        let bare = DataCenterSpec::new(
            10,
            server_250(),
            0.0,
            0.0,
            CoolingSpec::new(0.0, 5).unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(it_load(&bare, &[]).unwrap(), 0.0);

        let mixed = DataCenterSpec::new(
            100,
            server_250(),
            1_000.0,
            2_000.0,
            CoolingSpec::new(2_500.0, 5).unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(it_load(&mixed, &full).unwrap(), 28_000.0);
    }

    #[test]
    fn it_load_rejects_oversized_vector() {
        let dc = reference_dc();
        let too_many = vec![Utilization::FULL; 101];
        assert!(matches!(
            it_load(&dc, &too_many),
            Err(PowerError::TooManyUtilizations { got: 101, .. })
        ));
    }

    #[test]
    fn total_power_reference_anchor() {
        let dc = reference_dc();
        let full = vec![Utilization::FULL; 100];
        assert_eq!(total_power(&dc, &full).unwrap(), 210_000.0);

        let sixty = vec![Utilization::FULL; 60];
        assert_eq!(total_power(&dc, &sixty).unwrap(), 180_000.0);

        let zero = DataCenterSpec::new(
            1,
            ServerSpec::new(1.0, 0.0).unwrap(),
            0.0,
            0.0,
            CoolingSpec::new(0.0, 1).unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(total_power(&zero, &[]).unwrap(), 0.0);
    }

    #[test]
    fn power_at_active_examples() {
        let dc = reference_dc();
        let at_100 = power_at_active(&dc, 100, 100.0).unwrap();
        assert_eq!(at_100.total_power_w, 210_000.0);
        assert_eq!(at_100.per_server_utilization, 1.0);
        assert_eq!(at_100.unserved_demand, 0.0);

        let at_10 = power_at_active(&dc, 10, 10.0).unwrap();
        assert_eq!(at_10.total_power_w, 142_500.0);

        // one idle server: fixed loads + idle draw + one cooling group
        let at_1 = power_at_active(&dc, 1, 0.0).unwrap();
        assert_eq!(at_1.total_power_w, 135_000.0 + 175.0 + 2_500.0);
    }

    #[test]
    fn power_at_active_saturates_and_errors() {
        let dc = reference_dc();
        let sat = power_at_active(&dc, 10, 25.0).unwrap();
        assert_eq!(sat.per_server_utilization, 1.0);
        assert_eq!(sat.unserved_demand, 15.0);

        assert!(matches!(
            power_at_active(&dc, 0, 5.0),
            Err(PowerError::InfeasibleDemand { .. })
        ));
        assert!(matches!(
            power_at_active(&dc, 101, 10.0),
            Err(PowerError::ActiveAboveFleet { .. })
        ));
    }

    #[test]
    fn consolidation_algebra() {
        // At fixed aggregate demand, server power is p_max*(k*n + (1-k)*D)
        // and dropping one active server saves exactly k*p_max.
        let dc = reference_dc();
        let s = &dc.server;
        let demand = 30.0;
        for n in 30..100u32 {
            let u = Utilization::new(demand / n as f64).unwrap();
            let agg = aggregate_server_power(s, &vec![u; n as usize]);
            let closed =
                s.p_max_w() * (s.k_idle() * n as f64 + (1.0 - s.k_idle()) * demand);
            assert!((agg - closed).abs() <= 1e-9 * closed);
            if n > 30 {
                let u_prev = Utilization::new(demand / (n - 1) as f64).unwrap();
                let agg_prev = aggregate_server_power(s, &vec![u_prev; (n - 1) as usize]);
                assert!((agg - agg_prev - s.k_idle() * s.p_max_w()).abs() <= 1e-9 * agg);
            }
        }
    }

    #[test]
    fn lookup_table_roundtrip_and_candidates() {
        let table = PowerLookupTable::new([
            (100, 210_000.0),
            (80, 200_000.0),
            (60, 180_000.0),
            (35, 170_000.0),
            (10, 150_000.0),
        ])
        .unwrap();
        assert_eq!(table.power_at(35).unwrap(), 170_000.0);
        assert!(matches!(
            table.power_at(50),
            Err(PowerError::MissingTableRow { n_active: 50 })
        ));
        let curve = PowerCurve::Table {
            table: &table,
            n_servers: 100,
        };
        assert_eq!(curve.candidates_desc(1, 100), vec![100, 80, 60, 35, 10]);
        assert_eq!(curve.candidates_desc(36, 100), vec![100, 80, 60]);
        assert!(PowerLookupTable::new([(10, 1.0), (10, 2.0)]).is_err());
    }
}
