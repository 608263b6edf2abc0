//! Irradiance profiles, PV array sizing, and renewable coverage metrics.
//!
//! A profile is an ordered list of (hour, W/m²) samples; insolation is its
//! trapezoidal integral. Array sizing works backwards from a daily energy
//! target: required area, area rounded up to an installation granularity,
//! then whole panels to cover it.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolarError {
    #[error("irradiance profile needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index}: hour {hour} outside [0, 24]")]
    HourOutOfRange { index: usize, hour: f64 },
    #[error("sample {index}: hours must be strictly increasing")]
    NonIncreasingHours { index: usize },
    #[error("sample {index}: irradiance must be non-negative and finite, got {value}")]
    InvalidIrradiance { index: usize, value: f64 },
    #[error("panel dimensions must be positive, got {length_m} m x {width_m} m")]
    NonPositivePanelDims { length_m: f64, width_m: f64 },
    #[error("panel must have at least one cell")]
    ZeroCells,
    #[error("panel conversion efficiency must be within (0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("sizing target energy must be positive, got {0} Wh")]
    NonPositiveTarget(f64),
    #[error("cannot size an array against {insolation} Wh/m^2 of daily insolation")]
    InfeasibleSizing { insolation: f64 },
    #[error("area rounding granularity must be positive, got {0} m^2")]
    NonPositiveRounding(f64),
    #[error("coverage is undefined for non-positive consumption {0}")]
    NonPositiveConsumption(f64),
}

/// One point of an irradiance profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrradianceSample {
    pub hour: f64,
    pub irradiance_wm2: f64,
}

/// Hourly irradiance over one day; hours strictly increasing within [0, 24].
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceProfile {
    samples: Vec<IrradianceSample>,
}

impl IrradianceProfile {
    pub fn new(samples: Vec<IrradianceSample>) -> Result<Self, SolarError> {
        if samples.len() < 2 {
            return Err(SolarError::TooFewSamples(samples.len()));
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.hour.is_finite() || !(0.0..=24.0).contains(&s.hour) {
                return Err(SolarError::HourOutOfRange {
                    index,
                    hour: s.hour,
                });
            }
            if !s.irradiance_wm2.is_finite() || s.irradiance_wm2 < 0.0 {
                return Err(SolarError::InvalidIrradiance {
                    index,
                    value: s.irradiance_wm2,
                });
            }
            if index > 0 && s.hour <= samples[index - 1].hour {
                return Err(SolarError::NonIncreasingHours { index });
            }
        }
        Ok(IrradianceProfile { samples })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, SolarError> {
        Self::new(
            pairs
                .iter()
                .map(|&(hour, irradiance_wm2)| IrradianceSample {
                    hour,
                    irradiance_wm2,
                })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[IrradianceSample] {
        &self.samples
    }

    /// First and last sample hours.
    pub fn span(&self) -> (f64, f64) {
        (
            self.samples[0].hour,
            self.samples[self.samples.len() - 1].hour,
        )
    }

    /// Piecewise-linear irradiance at an hour; zero outside the sampled span.
    pub fn irradiance_at(&self, hour: f64) -> f64 {
        let (start, end) = self.span();
        if hour < start || hour > end {
            return 0.0;
        }
        for pair in self.samples.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if hour <= b.hour {
                let t = (hour - a.hour) / (b.hour - a.hour);
                return a.irradiance_wm2 + (b.irradiance_wm2 - a.irradiance_wm2) * t;
            }
        }
        self.samples[self.samples.len() - 1].irradiance_wm2
    }

    /// Integral of irradiance over `[from_hour, to_hour]` in Wh/m², clamped
    /// to the sampled span (the profile contributes nothing outside it).
    pub fn energy_between_whm2(&self, from_hour: f64, to_hour: f64) -> f64 {
        let mut total = 0.0;
        for pair in self.samples.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let lo = from_hour.max(a.hour);
            let hi = to_hour.min(b.hour);
            if hi > lo {
                let v_lo = self.irradiance_at(lo);
                let v_hi = self.irradiance_at(hi);
                total += 0.5 * (v_lo + v_hi) * (hi - lo);
            }
        }
        total
    }
}

/// Trapezoidal integral of the whole profile, in Wh/m².
pub fn daily_insolation(profile: &IrradianceProfile) -> f64 {
    let (start, end) = profile.span();
    profile.energy_between_whm2(start, end)
}

/// Sample with the highest irradiance; ties go to the earliest hour.
pub fn peak_irradiance(profile: &IrradianceProfile) -> (f64, f64) {
    let mut best = profile.samples()[0];
    for &s in &profile.samples()[1..] {
        if s.irradiance_wm2 > best.irradiance_wm2 {
            best = s;
        }
    }
    (best.hour, best.irradiance_wm2)
}

/// Geometry and conversion efficiency of one PV panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelSpec {
    pub length_m: f64,
    pub width_m: f64,
    pub cells: u32,
    pub conversion_efficiency: f64,
}

impl PanelSpec {
    pub fn new(
        length_m: f64,
        width_m: f64,
        cells: u32,
        conversion_efficiency: f64,
    ) -> Result<Self, SolarError> {
        if !length_m.is_finite() || !width_m.is_finite() || length_m <= 0.0 || width_m <= 0.0 {
            return Err(SolarError::NonPositivePanelDims { length_m, width_m });
        }
        if cells == 0 {
            return Err(SolarError::ZeroCells);
        }
        if !conversion_efficiency.is_finite()
            || conversion_efficiency <= 0.0
            || conversion_efficiency > 1.0
        {
            return Err(SolarError::EfficiencyOutOfRange(conversion_efficiency));
        }
        Ok(PanelSpec {
            length_m,
            width_m,
            cells,
            conversion_efficiency,
        })
    }

    pub fn area_m2(&self) -> f64 {
        self.length_m * self.width_m
    }
}

/// Result of sizing a PV array against a daily energy target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySizing {
    pub required_area_m2: f64,
    pub rounded_area_m2: f64,
    pub panel_count: u32,
    pub daily_production_wh: f64,
}

// Absolute slack applied before ceiling so exact fits stay exact under
// floating-point noise.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_with_slack(ratio: f64) -> f64 {
    (ratio - CEIL_SLACK).ceil()
}

/// Sizes the array: area needed for the target, rounded up to whole
/// `area_round_up_to_m2` plots, then whole panels to cover that area.
pub fn size_array(
    target_daily_energy_wh: f64,
    insolation_whm2: f64,
    panel: &PanelSpec,
    area_round_up_to_m2: f64,
) -> Result<ArraySizing, SolarError> {
    if !target_daily_energy_wh.is_finite() || target_daily_energy_wh <= 0.0 {
        return Err(SolarError::NonPositiveTarget(target_daily_energy_wh));
    }
    if !insolation_whm2.is_finite() || insolation_whm2 <= 0.0 {
        return Err(SolarError::InfeasibleSizing {
            insolation: insolation_whm2,
        });
    }
    if !area_round_up_to_m2.is_finite() || area_round_up_to_m2 <= 0.0 {
        return Err(SolarError::NonPositiveRounding(area_round_up_to_m2));
    }
    let yield_whm2 = insolation_whm2 * panel.conversion_efficiency;
    let required_area_m2 = target_daily_energy_wh / yield_whm2;
    let rounded_area_m2 = ceil_with_slack(required_area_m2 / area_round_up_to_m2) * area_round_up_to_m2;
    let panel_count = ceil_with_slack(rounded_area_m2 / panel.area_m2()) as u32;
    let daily_production_wh = panel_count as f64 * panel.area_m2() * yield_whm2;
    Ok(ArraySizing {
        required_area_m2,
        rounded_area_m2,
        panel_count,
        daily_production_wh,
    })
}

/// Renewable coverage: production over consumption, as a percentage.
pub fn mps(renewable_production: f64, total_consumption: f64) -> Result<f64, SolarError> {
    if !total_consumption.is_finite() || total_consumption <= 0.0 {
        return Err(SolarError::NonPositiveConsumption(total_consumption));
    }
    Ok(renewable_production / total_consumption * 100.0)
}

/// Signed surplus of production over consumption, in the callers' unit.
pub fn delta_e(renewable: f64, consumption: f64) -> f64 {
    renewable - consumption
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rejects_bad_profiles() {
        assert_eq!(
            IrradianceProfile::from_pairs(&[(8.0, 100.0)]),
            Err(SolarError::TooFewSamples(1))
        );
        assert_eq!(
            IrradianceProfile::from_pairs(&[(8.0, 100.0), (7.0, 50.0)]),
            Err(SolarError::NonIncreasingHours { index: 1 })
        );
        assert!(matches!(
            IrradianceProfile::from_pairs(&[(8.0, 100.0), (9.0, -1.0)]),
            Err(SolarError::InvalidIrradiance { index: 1, .. })
        ));
        assert!(matches!(
            IrradianceProfile::from_pairs(&[(-1.0, 0.0), (9.0, 1.0)]),
            Err(SolarError::HourOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn constant_profile_is_a_rectangle() {
        let p = IrradianceProfile::from_pairs(&[(8.0, 100.0), (12.0, 100.0)]).unwrap();
        assert_eq!(daily_insolation(&p), 400.0);
    }

    #[test]
    fn triangle_profile_is_half_base_times_height() {
        let p = IrradianceProfile::from_pairs(&[(7.0, 0.0), (12.0, 443.0), (17.0, 0.0)]).unwrap();
        assert!(close(daily_insolation(&p), 2215.0, 1e-12));
    }

    #[test]
    fn insolation_is_homogeneous_in_irradiance() {
        let base = [(7.0, 20.0), (9.5, 310.0), (12.0, 443.0), (16.0, 85.0)];
        let p = IrradianceProfile::from_pairs(&base).unwrap();
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(h, v)| (h, v * 3.5)).collect();
        let q = IrradianceProfile::from_pairs(&scaled).unwrap();
        assert!(close(daily_insolation(&q), 3.5 * daily_insolation(&p), 1e-12));
    }

    #[test]
    fn peak_examples() {
        let p = IrradianceProfile::from_pairs(&[(8.0, 100.0), (14.0, 100.0), (15.0, 50.0)]).unwrap();
        assert_eq!(peak_irradiance(&p), (8.0, 100.0));
        let flat = IrradianceProfile::from_pairs(&[(6.0, 55.0), (18.0, 55.0)]).unwrap();
        assert_eq!(peak_irradiance(&flat), (6.0, 55.0));
    }

    #[test]
    fn partial_integrals_sum_to_the_whole() {
        let p = IrradianceProfile::from_pairs(&[(7.0, 0.0), (12.0, 443.0), (17.0, 0.0)]).unwrap();
        let total = daily_insolation(&p);
        let mut summed = 0.0;
        for h in 0..24 {
            summed += p.energy_between_whm2(h as f64, h as f64 + 1.0);
        }
        assert!(close(summed, total, 1e-12));
        assert_eq!(p.energy_between_whm2(0.0, 6.0), 0.0);
        assert_eq!(p.energy_between_whm2(18.0, 24.0), 0.0);
    }

    #[test]
    fn interpolation_endpoints() {
        let p = IrradianceProfile::from_pairs(&[(7.0, 10.0), (9.0, 30.0)]).unwrap();
        assert_eq!(p.irradiance_at(7.0), 10.0);
        assert_eq!(p.irradiance_at(9.0), 30.0);
        assert_eq!(p.irradiance_at(8.0), 20.0);
        assert_eq!(p.irradiance_at(6.0), 0.0);
        assert_eq!(p.irradiance_at(10.0), 0.0);
    }

    #[test]
    fn sizing_reference_array() {
        let panel = PanelSpec::new(1.98, 0.99, 72, 1.0).unwrap();
        let s = size_array(2_940_000.0, 2464.0, &panel, 100.0).unwrap();
        assert!(close(s.required_area_m2, 1193.1818181818182, 1e-12));
        assert_eq!(s.rounded_area_m2, 1200.0);
        assert_eq!(s.panel_count, 613);
        assert!(close(s.daily_production_wh, 2960748.8064, 1e-9));

        // exact ft->m conversion shaves the area just enough for 612 panels
        let panel_ft = PanelSpec::new(1.9812, 0.9906, 72, 1.0).unwrap();
        let s2 = size_array(2_940_000.0, 2464.0, &panel_ft, 100.0).unwrap();
        assert_eq!(s2.panel_count, 612);
    }

    #[test]
    fn sizing_trivial_and_small() {
        let unit = PanelSpec::new(1.0, 1.0, 1, 1.0).unwrap();
        for x in [1.0, 3.7, 2464.0] {
            let s = size_array(x, x, &unit, 1.0).unwrap();
            assert_eq!(s.panel_count, 1);
        }
        let panel = PanelSpec::new(1.98, 0.99, 72, 1.0).unwrap();
        let s = size_array(4_830.0, 2_464.0, &panel, 1.0).unwrap();
        assert_eq!(s.rounded_area_m2, 2.0);
        assert_eq!(s.panel_count, 2);
    }

    #[test]
    fn sizing_minimal_panel_count() {
        // one fewer panel would not cover the rounded area
        let cases = [
            (2_940_000.0, 2464.0, 100.0),
            (500_000.0, 1800.0, 1.0),
            (123_456.0, 950.0, 10.0),
        ];
        let panel = PanelSpec::new(1.98, 0.99, 72, 1.0).unwrap();
        for (target, insolation, round_to) in cases {
            let s = size_array(target, insolation, &panel, round_to).unwrap();
            let mut minimal = None;
            for count in 1..=s.panel_count {
                if count as f64 * panel.area_m2() >= s.rounded_area_m2 - 1e-9 {
                    minimal = Some(count);
                    break;
                }
            }
            assert_eq!(minimal, Some(s.panel_count));
        }
    }

    #[test]
    fn production_linear_in_panel_count() {
        let panel = PanelSpec::new(1.98, 0.99, 72, 1.0).unwrap();
        let per_panel = panel.area_m2() * 2464.0;
        let s = size_array(2_940_000.0, 2464.0, &panel, 100.0).unwrap();
        assert!(close(s.daily_production_wh, s.panel_count as f64 * per_panel, 1e-12));
    }

    #[test]
    fn sizing_errors() {
        let panel = PanelSpec::new(1.0, 1.0, 1, 1.0).unwrap();
        assert!(matches!(
            size_array(100.0, 0.0, &panel, 1.0),
            Err(SolarError::InfeasibleSizing { .. })
        ));
        assert!(matches!(
            size_array(0.0, 100.0, &panel, 1.0),
            Err(SolarError::NonPositiveTarget(_))
        ));
        assert!(matches!(
            size_array(100.0, 100.0, &panel, 0.0),
            Err(SolarError::NonPositiveRounding(_))
        ));
    }

    #[test]
    fn coverage_metrics() {
        assert_eq!(mps(2940.0, 2940.0).unwrap(), 100.0);
        let literal = mps(2.464, 2940.0).unwrap();
        assert!(close(literal, 0.0838095238095238, 1e-12));
        assert!(close(mps(2967.0, 2940.0).unwrap(), 100.91836734693878, 1e-12));
        assert!(matches!(
            mps(1.0, 0.0),
            Err(SolarError::NonPositiveConsumption(_))
        ));
    }

    #[test]
    fn surplus_metric() {
        assert_eq!(delta_e(2967.0, 2940.0), 27.0);
        assert_eq!(delta_e(5.5, 5.5), 0.0);
        assert_eq!(delta_e(2100.0, 2967.0), -867.0);
        // antisymmetry and the coverage identity
        for &(a, b) in &[(10.0, 3.0), (0.0, 7.5), (2967.0, 2940.0)] {
            assert_eq!(delta_e(a, b), -delta_e(b, a));
            if b > 0.0 {
                let m = mps(a, b).unwrap();
                assert!((m * b / 100.0 - a).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
