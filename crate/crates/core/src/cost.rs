//! Per-unit print metrics, tray capacity and the batch amortisation curve.
//!
//! Currency is GBP excluding VAT.

use crate::error::{Error, Result};
use crate::model::SensorVariant;

/// Bundled per-sensor manufacturing table.
pub const BUNDLED_TABLE: &str = include_str!("../data/cost_table.csv");

/// Columns along X on the print tray for every sensor family.
pub const TRAY_X_SLOTS: usize = 8;
/// Batch size after which another tray column is needed.
pub const DEFAULT_KNEE: usize = 8;
/// Published C-Tac endpoint: average minutes and GBP per unit at a full tray.
pub const CTAC_FULL_TRAY: (usize, f64, f64) = (48, 9.08, 2.43);

#[derive(Debug, Clone, PartialEq)]
pub struct CostRecord {
    pub name: String,
    pub variant: Option<SensorVariant>,
    /// Bounding size X/Y/Z, mm.
    pub footprint: [f64; 3],
    /// Printed volume, cm³ (an input: the parts are not full boxes).
    pub volume: f64,
    /// Grams of Agilus30, Vero, DraftGrey and support.
    pub materials: [f64; 4],
    pub time_single: f64,
    pub cost_single: f64,
    /// T/V and C/V as listed in the source table, when present.
    pub listed: Option<UnitMetrics>,
}

impl CostRecord {
    pub fn validate(&self) -> Result<()> {
        let scalars = [self.volume, self.time_single, self.cost_single];
        for &v in self.footprint.iter().chain(&self.materials).chain(&scalars) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{}: every quantity must be positive", self.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitMetrics {
    /// Minutes per cm³.
    pub t_per_v: f64,
    /// GBP per cm³.
    pub c_per_v: f64,
}

pub fn unit_metrics(rec: &CostRecord) -> UnitMetrics {
    UnitMetrics {
        t_per_v: rec.time_single / rec.volume,
        c_per_v: rec.cost_single / rec.volume,
    }
}

fn parse_size(s: &str) -> Option<[f64; 3]> {
    let v: Vec<f64> = s.split('x').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
    (v.len() == 3).then(|| [v[0], v[1], v[2]])
}

/// Parses the manufacturing table (header as in [`BUNDLED_TABLE`]; the two
/// trailing metric columns are optional).
pub fn parse_table(text: &str) -> Result<Vec<CostRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row?;
        let line = idx + 2;
        let num = |k: usize| -> Result<f64> {
            row.get(k)
                .ok_or_else(|| Error::parse(line, format!("missing column {k}")))?
                .parse::<f64>()
                .map_err(|e| Error::parse(line, format!("column {k}: {e}")))
        };
        let name = row.get(0).unwrap_or_default().to_string();
        let footprint = parse_size(row.get(1).unwrap_or_default())
            .ok_or_else(|| Error::parse(line, "size must look like 34x27x16.5"))?;
        let listed = if row.len() >= 11 {
            Some(UnitMetrics {
                t_per_v: num(9)?,
                c_per_v: num(10)?,
            })
        } else {
            None
        };
        let rec = CostRecord {
            variant: name.parse().ok(),
            name,
            footprint,
            volume: num(2)?,
            materials: [num(3)?, num(4)?, num(5)?, num(6)?],
            time_single: num(7)?,
            cost_single: num(8)?,
            listed,
        };
        rec.validate()?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("cost table has no rows".into()));
    }
    Ok(out)
}

pub fn bundled_table() -> Vec<CostRecord> {
    parse_table(BUNDLED_TABLE).expect("bundled cost table is valid")
}

pub fn find_record<'a>(table: &'a [CostRecord], variant: SensorVariant) -> Option<&'a CostRecord> {
    table.iter().find(|r| r.variant == Some(variant))
}

/// Sensors per tray: 8 × 6 on the Digit base, 8 × 8 on the custom base.
pub fn tray_capacity(variant: SensorVariant) -> usize {
    let y_slots = if variant.digit_base() { 6 } else { 8 };
    TRAY_X_SLOTS * y_slots
}

/// Affine batch model constants.
///
/// `total_time(n) = fixed_time + n·marginal_time + (⌈n/knee⌉ − 1)·column_time`,
/// `total_cost(n) = fixed_cost + n·marginal_cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub knee: usize,
    pub fixed_time: f64,
    pub marginal_time: f64,
    pub column_time: f64,
    pub fixed_cost: f64,
    pub marginal_cost: f64,
}

fn extra_columns(n: usize, knee: usize) -> usize {
    n.div_ceil(knee).saturating_sub(1)
}

impl Calibration {
    /// Fits the constants to a single-unit point and a full-batch average.
    ///
    /// Two endpoints leave the marginal time free. Any value in the interval
    /// where the per-column overhead is non-negative and the average curve
    /// stays non-increasing across every column jump is admissible; the
    /// midpoint of that interval is used.
    pub fn fit(time_single: f64, cost_single: f64, n: usize, avg_time: f64, avg_cost: f64, knee: usize) -> Result<Self> {
        if knee < 2 || n <= knee {
            return Err(Error::Parameter(format!("need knee >= 2 and endpoint {n} beyond knee {knee}")));
        }
        let nf = n as f64;
        let c = extra_columns(n, knee) as f64;
        let q = (knee as f64 - 1.0) * c + 1.0;
        let excess = nf * avg_time - time_single;
        let hi = excess / (nf - 1.0);
        let lo = (q * excess - c * time_single) / (q * (nf - 1.0) - c);
        if !(lo <= hi) || hi <= 0.0 {
            return Err(Error::Parameter(format!(
                "no monotone calibration through ({time_single}, {avg_time}) at n = {n}"
            )));
        }
        let marginal_time = 0.5 * (lo + hi).max(0.0);
        let column_time = (excess - (nf - 1.0) * marginal_time) / c;
        let marginal_cost = (nf * avg_cost - cost_single) / (nf - 1.0);
        let cal = Calibration {
            knee,
            fixed_time: time_single - marginal_time,
            marginal_time,
            column_time,
            fixed_cost: cost_single - marginal_cost,
            marginal_cost,
        };
        if cal.fixed_cost < 0.0 || marginal_cost <= 0.0 {
            return Err(Error::Parameter("cost endpoints imply a negative overhead".into()));
        }
        Ok(cal)
    }

    /// Calibration against the published C-Tac endpoints.
    pub fn ctac() -> Self {
        let (n, t, c) = CTAC_FULL_TRAY;
        Calibration::fit(74.0, 4.678, n, t, c, DEFAULT_KNEE).expect("C-Tac endpoints are consistent")
    }

    /// C-Tac constants rescaled to another record's single-unit time and cost.
    pub fn for_record(rec: &CostRecord) -> Self {
        let base = Self::ctac();
        let (kt, kc) = (rec.time_single / 74.0, rec.cost_single / 4.678);
        Calibration {
            knee: base.knee,
            fixed_time: base.fixed_time * kt,
            marginal_time: base.marginal_time * kt,
            column_time: base.column_time * kt,
            fixed_cost: base.fixed_cost * kc,
            marginal_cost: base.marginal_cost * kc,
        }
    }

    pub fn total_time(&self, n: usize) -> f64 {
        self.fixed_time + n as f64 * self.marginal_time + extra_columns(n, self.knee) as f64 * self.column_time
    }

    pub fn total_cost(&self, n: usize) -> f64 {
        self.fixed_cost + n as f64 * self.marginal_cost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchPlan {
    pub sensor: String,
    pub capacity: usize,
    pub avg_time: f64,
    pub avg_cost: f64,
    pub total_time: f64,
    pub total_cost: f64,
}

/// Averages for a batch of `capacity` units (`1 ≤ capacity ≤ max_capacity`).
pub fn batch_plan(rec: &CostRecord, capacity: usize, max_capacity: usize, calib: &Calibration) -> Result<BatchPlan> {
    if capacity == 0 || capacity > max_capacity {
        return Err(Error::Capacity {
            capacity,
            max: max_capacity,
        });
    }
    let total_time = calib.total_time(capacity);
    let total_cost = calib.total_cost(capacity);
    Ok(BatchPlan {
        sensor: rec.name.clone(),
        capacity,
        avg_time: total_time / capacity as f64,
        avg_cost: total_cost / capacity as f64,
        total_time,
        total_cost,
    })
}

/// Capacity of the record's tray, falling back to the smaller tray for
/// records that do not name a known sensor.
pub fn record_capacity(rec: &CostRecord) -> usize {
    rec.variant.map(tray_capacity).unwrap_or(TRAY_X_SLOTS * 6)
}

/// Batch plan for every capacity from 1 to the record's tray maximum.
pub fn sweep(rec: &CostRecord, calib: &Calibration) -> Vec<BatchPlan> {
    let max = record_capacity(rec);
    (1..=max)
        .map(|n| batch_plan(rec, n, max, calib).expect("capacity in range"))
        .collect()
}

pub fn sweep_csv(plans: &[BatchPlan]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sensor", "capacity", "avg_time_min", "avg_cost_gbp", "total_time_min", "total_cost_gbp"])?;
    for p in plans {
        w.write_record([
            p.sensor.clone(),
            p.capacity.to_string(),
            format!("{:.4}", p.avg_time),
            format!("{:.4}", p.avg_cost),
            format!("{:.4}", p.total_time),
            format!("{:.4}", p.total_cost),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_inputs() {
        let r = CostRecord {
            name: "unit".into(),
            variant: None,
            footprint: [1.0; 3],
            volume: 1.0,
            materials: [1.0; 4],
            time_single: 1.0,
            cost_single: 1.0,
            listed: None,
        };
        assert_eq!(unit_metrics(&r), UnitMetrics { t_per_v: 1.0, c_per_v: 1.0 });
    }

    #[test]
    fn bundled_table_parses() {
        let t = bundled_table();
        assert_eq!(t.len(), 5);
        for v in SensorVariant::ALL {
            assert!(find_record(&t, v).is_some(), "{v}");
        }
    }

    #[test]
    fn capacities() {
        assert_eq!(tray_capacity(SensorVariant::CTac), 48);
        assert_eq!(tray_capacity(SensorVariant::CSight), 64);
        assert_eq!(tray_capacity(SensorVariant::CSighTac), 64);
        assert_eq!(tray_capacity(SensorVariant::ViCTac), 48);
        assert_eq!(tray_capacity(SensorVariant::ViCSight), 48);
    }

    #[test]
    fn calibration_interval() {
        let c = Calibration::ctac();
        assert!(c.marginal_time > 7.5023 && c.marginal_time < 7.6987, "{c:?}");
        assert!(c.column_time > 0.0);
        assert!((c.marginal_cost - 2.38217).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_capacity() {
        let t = bundled_table();
        let r = find_record(&t, SensorVariant::CTac).unwrap();
        let c = Calibration::for_record(r);
        assert!(matches!(batch_plan(r, 49, 48, &c), Err(Error::Capacity { capacity: 49, max: 48 })));
        assert!(batch_plan(r, 0, 48, &c).is_err());
    }

    #[test]
    fn sweep_csv_has_header_and_rows() {
        let t = bundled_table();
        let r = find_record(&t, SensorVariant::CSight).unwrap();
        let s = sweep_csv(&sweep(r, &Calibration::for_record(r))).unwrap();
        assert_eq!(s.lines().count(), 65);
    }
}
