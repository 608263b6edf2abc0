//! Machine-readable run reports.
//!
//! Reports serialize to JSON and CSV with full-precision numbers. Every
//! energy/area/percentage field also gets a `*_display` twin rounded to
//! 3 significant figures so headline values read the way they are usually
//! quoted; parsing ignores the twins, so round-trips are lossless.

use serde_json::{json, Map, Value};

use crate::scenario::ScenarioError;
use crate::sim::SimulationSummary;
use crate::solar::ArraySizing;

/// Summary of a run plus the sizing context it ran under.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario_name: String,
    pub days: u32,
    pub summary: SimulationSummary,
    pub sizing: ArraySizing,
    pub batteries_required: u32,
    pub bank_count: u32,
}

/// Output encodings for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Rounds to `digits` significant figures for the display twins.
pub fn round_sig_figs(value: f64, digits: i32) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (value * factor).round() / factor
}

fn put(map: &mut Map<String, Value>, key: &str, value: f64) {
    map.insert(key.to_string(), json!(value));
    map.insert(format!("{key}_display"), json!(round_sig_figs(value, 3)));
}

impl Report {
    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("scenario".into(), json!(self.scenario_name));
        map.insert("days".into(), json!(self.days));
        put(&mut map, "total_production_wh", self.summary.total_production_wh);
        put(
            &mut map,
            "total_consumption_wh",
            self.summary.total_consumption_wh,
        );
        put(&mut map, "energy_saving_wh", self.summary.energy_saving_wh);
        put(&mut map, "mps_percent", self.summary.mps_percent);
        put(&mut map, "delta_e_wh", self.summary.delta_e_wh);
        put(&mut map, "min_soc_wh", self.summary.min_soc_wh);
        put(&mut map, "max_deficit_wh", self.summary.max_deficit_wh);
        map.insert(
            "batteries_implied".into(),
            json!(self.summary.batteries_implied),
        );
        let mut sizing = Map::new();
        put(&mut sizing, "required_area_m2", self.sizing.required_area_m2);
        put(&mut sizing, "rounded_area_m2", self.sizing.rounded_area_m2);
        sizing.insert("panel_count".into(), json!(self.sizing.panel_count));
        put(
            &mut sizing,
            "daily_production_wh",
            self.sizing.daily_production_wh,
        );
        map.insert("sizing".into(), Value::Object(sizing));
        map.insert(
            "batteries_required".into(),
            json!(self.batteries_required),
        );
        map.insert("bank_count".into(), json!(self.bank_count));
        Value::Object(map)
    }

    pub fn from_json(text: &str) -> Result<Report, ScenarioError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let field_err = |field: &str| ScenarioError::Validation {
            field: field.to_string(),
            constraint: "missing or mistyped in report JSON".into(),
        };
        let num = |v: &Value, field: &str| v.get(field).and_then(Value::as_f64).ok_or_else(|| field_err(field));
        let int = |v: &Value, field: &str| {
            v.get(field)
                .and_then(Value::as_u64)
                .map(|n| n as u32)
                .ok_or_else(|| field_err(field))
        };
        let sizing = value.get("sizing").ok_or_else(|| field_err("sizing"))?;
        Ok(Report {
            scenario_name: value
                .get("scenario")
                .and_then(Value::as_str)
                .ok_or_else(|| field_err("scenario"))?
                .to_string(),
            days: int(&value, "days")?,
            summary: SimulationSummary {
                total_production_wh: num(&value, "total_production_wh")?,
                total_consumption_wh: num(&value, "total_consumption_wh")?,
                energy_saving_wh: num(&value, "energy_saving_wh")?,
                mps_percent: num(&value, "mps_percent")?,
                delta_e_wh: num(&value, "delta_e_wh")?,
                min_soc_wh: num(&value, "min_soc_wh")?,
                max_deficit_wh: num(&value, "max_deficit_wh")?,
                batteries_implied: int(&value, "batteries_implied")?,
            },
            sizing: ArraySizing {
                required_area_m2: num(sizing, "required_area_m2")?,
                rounded_area_m2: num(sizing, "rounded_area_m2")?,
                panel_count: int(sizing, "panel_count")?,
                daily_production_wh: num(sizing, "daily_production_wh")?,
            },
            batteries_required: int(&value, "batteries_required")?,
            bank_count: int(&value, "bank_count")?,
        })
    }

    fn csv_columns(&self) -> Vec<(String, String)> {
        fn num(cols: &mut Vec<(String, String)>, name: &str, v: f64) {
            cols.push((name.to_string(), v.to_string()));
            cols.push((
                format!("{name}_display"),
                round_sig_figs(v, 3).to_string(),
            ));
        }
        let mut cols: Vec<(String, String)> = Vec::new();
        cols.push(("scenario".into(), csv_quote(&self.scenario_name)));
        cols.push(("days".into(), self.days.to_string()));
        num(&mut cols, "total_production_wh", self.summary.total_production_wh);
        num(&mut cols, "total_consumption_wh", self.summary.total_consumption_wh);
        num(&mut cols, "energy_saving_wh", self.summary.energy_saving_wh);
        num(&mut cols, "mps_percent", self.summary.mps_percent);
        num(&mut cols, "delta_e_wh", self.summary.delta_e_wh);
        num(&mut cols, "min_soc_wh", self.summary.min_soc_wh);
        num(&mut cols, "max_deficit_wh", self.summary.max_deficit_wh);
        cols.push((
            "batteries_implied".into(),
            self.summary.batteries_implied.to_string(),
        ));
        num(&mut cols, "required_area_m2", self.sizing.required_area_m2);
        num(&mut cols, "rounded_area_m2", self.sizing.rounded_area_m2);
        cols.push(("panel_count".into(), self.sizing.panel_count.to_string()));
        num(&mut cols, "daily_production_wh", self.sizing.daily_production_wh);
        cols.push(("batteries_required".into(), self.batteries_required.to_string()));
        cols.push(("bank_count".into(), self.bank_count.to_string()));
        cols
    }

    pub fn to_csv(&self) -> String {
        let cols = self.csv_columns();
        let header: Vec<&str> = cols.iter().map(|(k, _)| k.as_str()).collect();
        let values: Vec<&str> = cols.iter().map(|(_, v)| v.as_str()).collect();
        format!("{}\n{}\n", header.join(","), values.join(","))
    }

    pub fn from_csv(text: &str) -> Result<Report, ScenarioError> {
        let mut lines = text.lines();
        let (Some(header), Some(data)) = (lines.next(), lines.next()) else {
            return Err(ScenarioError::Csv {
                row: 1,
                msg: "report CSV needs a header and a data row".into(),
            });
        };
        let keys: Vec<&str> = header.split(',').collect();
        let values = split_csv_row(data);
        if keys.len() != values.len() {
            return Err(ScenarioError::Csv {
                row: 2,
                msg: format!("{} columns against {} headers", values.len(), keys.len()),
            });
        }
        let get = |field: &str| -> Result<&str, ScenarioError> {
            keys.iter()
                .position(|&k| k == field)
                .map(|i| values[i].as_str())
                .ok_or_else(|| ScenarioError::Csv {
                    row: 1,
                    msg: format!("missing column '{field}'"),
                })
        };
        let num = |field: &str| -> Result<f64, ScenarioError> {
            get(field)?.parse().map_err(|_| ScenarioError::Csv {
                row: 2,
                msg: format!("column '{field}' is not a number"),
            })
        };
        let int = |field: &str| -> Result<u32, ScenarioError> {
            get(field)?.parse().map_err(|_| ScenarioError::Csv {
                row: 2,
                msg: format!("column '{field}' is not an integer"),
            })
        };
        Ok(Report {
            scenario_name: get("scenario")?.to_string(),
            days: int("days")?,
            summary: SimulationSummary {
                total_production_wh: num("total_production_wh")?,
                total_consumption_wh: num("total_consumption_wh")?,
                energy_saving_wh: num("energy_saving_wh")?,
                mps_percent: num("mps_percent")?,
                delta_e_wh: num("delta_e_wh")?,
                min_soc_wh: num("min_soc_wh")?,
                max_deficit_wh: num("max_deficit_wh")?,
                batteries_implied: int("batteries_implied")?,
            },
            sizing: ArraySizing {
                required_area_m2: num("required_area_m2")?,
                rounded_area_m2: num("rounded_area_m2")?,
                panel_count: int("panel_count")?,
                daily_production_wh: num("daily_production_wh")?,
            },
            batteries_required: int("batteries_required")?,
            bank_count: int("bank_count")?,
        })
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn split_csv_row(row: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut chars = row.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                current.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    fields.push(current);
    fields
}

/// Serializes the report; JSON keys are emitted in sorted order so output is
/// byte-stable across runs.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&report.to_json_value())
                .expect("report JSON serialization is infallible");
            text.push('\n');
            text
        }
        ReportFormat::Csv => report.to_csv(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        Report {
            scenario_name: "mosul-100".into(),
            days: 1,
            summary: SimulationSummary {
                total_production_wh: 2_967_000.0,
                total_consumption_wh: 2_100_000.0,
                energy_saving_wh: 867_000.0,
                mps_percent: 141.2857142857143,
                delta_e_wh: 867_000.0,
                min_soc_wh: 0.0,
                max_deficit_wh: 12_345.678,
                batteries_implied: 4,
            },
            sizing: ArraySizing {
                required_area_m2: 1193.1818181818182,
                rounded_area_m2: 1200.0,
                panel_count: 613,
                daily_production_wh: 2960748.8064,
            },
            batteries_required: 5,
            bank_count: 5,
        }
    }

    #[test]
    fn rounding_to_three_significant_figures() {
        assert_eq!(round_sig_figs(2_352_000.0, 3), 2_350_000.0);
        assert_eq!(round_sig_figs(0.0838095238095238, 3), 0.0838);
        assert_eq!(round_sig_figs(-867_000.0, 3), -867_000.0);
        assert_eq!(round_sig_figs(0.0, 3), 0.0);
        assert_eq!(round_sig_figs(1193.1818, 3), 1190.0);
    }

    #[test]
    fn json_has_full_precision_and_display_twins() {
        let report = sample_report();
        let text = emit_report(&report, ReportFormat::Json);
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["energy_saving_wh"], json!(867_000.0));
        assert_eq!(value["energy_saving_wh_display"], json!(867_000.0));
        assert_eq!(value["mps_percent"], json!(141.2857142857143));
        assert_eq!(value["mps_percent_display"], json!(141.0));
        assert_eq!(value["sizing"]["panel_count"], json!(613));
        assert_eq!(
            value["sizing"]["required_area_m2_display"],
            json!(1190.0)
        );
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let report = sample_report();
        let text = emit_report(&report, ReportFormat::Json);
        assert_eq!(Report::from_json(&text).unwrap(), report);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let report = sample_report();
        let text = emit_report(&report, ReportFormat::Csv);
        assert_eq!(Report::from_csv(&text).unwrap(), report);
    }

    #[test]
    fn csv_handles_awkward_names() {
        let mut report = sample_report();
        report.scenario_name = "a,b \"c\"".into();
        let text = report.to_csv();
        assert_eq!(Report::from_csv(&text).unwrap(), report);
    }

    #[test]
    fn emissions_are_byte_stable() {
        let report = sample_report();
        assert_eq!(
            emit_report(&report, ReportFormat::Json),
            emit_report(&report, ReportFormat::Json)
        );
        assert_eq!(
            emit_report(&report, ReportFormat::Csv),
            emit_report(&report, ReportFormat::Csv)
        );
    }
}
