//! CSV and JSON writers for sweeps, scaling tables and analytic curves.
//!
//! Floats are written with 17 significant digits; missing values are empty
//! CSV fields and JSON `null`.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analytic::{AnalyticRecord, ThermoParams};
use crate::error::Result;
use crate::models::ModelSpec;
use crate::sweep::{ScalingTable, SweepConfig, SweepRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Column names of a sweep under `cfg`, in CSV order.
pub fn sweep_columns(cfg: &SweepConfig) -> Vec<String> {
    let mut cols: Vec<String> = ["param", "e0", "de0", "d2e0", "c12", "c23"].map(String::from).to_vec();
    for r in cfg.pair_routes() {
        cols.push(format!("chi12_{r}"));
        cols.push(format!("chi23_{r}"));
    }
    cols.extend(["chi_global", "gap", "flags"].map(String::from));
    cols
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord], cfg: &SweepConfig) -> Result<()> {
    let cols = sweep_columns(cfg);
    writeln!(w, "{}", cols.join(","))?;
    for rec in records {
        let mut fields: Vec<String> =
            cols[..cols.len() - 1].iter().map(|c| fmt_opt(rec.column(c))).collect();
        fields.push(rec.flags.join(";"));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

fn num(x: Option<f64>) -> Value {
    x.filter(|v| v.is_finite()).map_or(Value::Null, Value::from)
}

fn sweep_record_json(rec: &SweepRecord, cols: &[String]) -> Value {
    let mut obj = Map::new();
    for c in &cols[..cols.len() - 1] {
        obj.insert(c.clone(), num(rec.column(c)));
    }
    obj.insert("flags".into(), json!(rec.flags));
    obj.insert("route_spread".into(), num(rec.route_spread));
    obj.insert("su2_deviation".into(), num(rec.su2_deviation));
    Value::Object(obj)
}

pub fn sweep_meta(spec: &ModelSpec, cfg: &SweepConfig) -> Value {
    json!({
        "version": VERSION,
        "model": spec,
        "param_name": spec.family.param_name(),
        "routes": cfg.routes,
        "delta": cfg.delta,
        "fd_step": cfg.fd_step,
        "solver": cfg.solver,
        "seed": cfg.solver.lanczos.seed,
        "threads": cfg.threads,
    })
}

pub fn sweep_json(spec: &ModelSpec, cfg: &SweepConfig, records: &[SweepRecord]) -> Value {
    let cols = sweep_columns(cfg);
    json!({
        "meta": sweep_meta(spec, cfg),
        "records": records.iter().map(|r| sweep_record_json(r, &cols)).collect::<Vec<_>>(),
    })
}

pub fn write_sweep<W: Write>(
    mut w: W,
    format: Format,
    spec: &ModelSpec,
    cfg: &SweepConfig,
    records: &[SweepRecord],
) -> Result<()> {
    match format {
        Format::Csv => write_sweep_csv(w, records, cfg),
        Format::Json => write_json(&mut w, &sweep_json(spec, cfg, records)),
    }
}

fn write_json<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| crate::Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_scaling<W: Write>(
    mut w: W,
    format: Format,
    spec: &ModelSpec,
    cfg: &SweepConfig,
    table: &ScalingTable,
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "n_sites,param_star,chi_star,grid_resolution,grid_argmax")?;
            for row in &table.rows {
                let p = &row.peak;
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    row.n_sites,
                    fmt_f64(p.param_star),
                    fmt_f64(p.chi_star),
                    fmt_f64(p.grid_resolution),
                    fmt_f64(p.grid_argmax)
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let mut meta = sweep_meta(spec, cfg);
            meta["column"] = json!(table.column);
            meta["param_monotone"] = json!(table.param_monotone);
            meta["chi_monotone"] = json!(table.chi_monotone);
            write_json(&mut w, &json!({ "meta": meta, "records": table.rows }))
        }
    }
}

const ANALYTIC_COLUMNS: [&str; 12] = [
    "alpha",
    "eta",
    "n4_e0",
    "n4_de0",
    "n4_d2e0",
    "n4_chi",
    "thermo_e0",
    "thermo_de0",
    "thermo_d2e0",
    "thermo_chi12",
    "thermo_chi23",
    "power_law",
];

fn analytic_fields(r: &AnalyticRecord) -> [Option<f64>; 12] {
    [
        Some(r.alpha),
        r.eta,
        Some(r.n4_e0),
        Some(r.n4_de0),
        Some(r.n4_d2e0),
        Some(r.n4_chi),
        r.thermo_e0,
        r.thermo_de0,
        r.thermo_d2e0,
        r.thermo_chi12,
        r.thermo_chi23,
        r.power_law,
    ]
}

pub fn write_analytic<W: Write>(
    mut w: W,
    format: Format,
    params: &ThermoParams,
    records: &[AnalyticRecord],
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", ANALYTIC_COLUMNS.join(","))?;
            for r in records {
                let fields: Vec<String> = analytic_fields(r).into_iter().map(fmt_opt).collect();
                writeln!(w, "{}", fields.join(","))?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = ANALYTIC_COLUMNS
                        .iter()
                        .zip(analytic_fields(r))
                        .map(|(k, v)| (k.to_string(), num(v)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let meta = json!({
                "version": VERSION,
                "thermo": params,
                "exponent": params.exponent(),
                "fit_range_eta": ThermoParams::FIT_RANGE,
            });
            write_json(&mut w, &json!({ "meta": meta, "records": rows }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::Route;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, -12345.678e-9, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_layout() {
        let cfg = SweepConfig::with_routes([Route::Global, Route::Energy, Route::Uhlmann]);
        assert_eq!(
            sweep_columns(&cfg).join(","),
            "param,e0,de0,d2e0,c12,c23,chi12_uhlmann,chi23_uhlmann,chi12_energy,chi23_energy,chi_global,gap,flags"
        );
        let none = SweepConfig::with_routes([]);
        assert_eq!(sweep_columns(&none).join(","), "param,e0,de0,d2e0,c12,c23,chi_global,gap,flags");
    }
}
