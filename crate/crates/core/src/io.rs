//! CSV input/output: measured time series, parameter tables, field grids.

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitTag {
    Meters,
    Newtons,
    Pascals,
    Kilograms,
}

impl UnitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitTag::Meters => "m",
            UnitTag::Newtons => "N",
            UnitTag::Pascals => "Pa",
            UnitTag::Kilograms => "kg",
        }
    }

    pub fn parse(s: &str) -> Option<UnitTag> {
        match s {
            "m" => Some(UnitTag::Meters),
            "N" => Some(UnitTag::Newtons),
            "Pa" => Some(UnitTag::Pascals),
            "kg" => Some(UnitTag::Kilograms),
            _ => None,
        }
    }
}

/// A measured or computed signal over time. The value column carries a unit
/// tag so consumers can refuse series in the wrong quantity.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub unit: UnitTag,
    /// value column name without the unit suffix, e.g. "displacement"
    pub label: String,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, v: Vec<f64>, unit: UnitTag, label: &str) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::BadData(format!(
                "time and value columns differ in length ({} vs {})",
                t.len(),
                v.len()
            )));
        }
        if t.is_empty() {
            return Err(Error::BadData("time series has no samples".into()));
        }
        if t.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadData("time series contains non-finite values".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadData("time not strictly increasing".into()));
        }
        Ok(TimeSeries {
            t,
            v,
            unit,
            label: label.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn expect_unit(&self, unit: UnitTag) -> Result<()> {
        if self.unit != unit {
            return Err(Error::BadData(format!(
                "series '{}' carries unit '{}', expected '{}'",
                self.label,
                self.unit.as_str(),
                unit.as_str()
            )));
        }
        Ok(())
    }
}

fn input_err(origin: &str, line: u64, reason: String) -> Error {
    Error::Input {
        path: origin.to_string(),
        line: line as usize,
        reason,
    }
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_field(origin: &str, rec: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    let v: f64 = raw.parse().map_err(|_| {
        input_err(
            origin,
            record_line(rec),
            format!("cannot parse '{raw}' as a number for column '{name}'"),
        )
    })?;
    if !v.is_finite() {
        return Err(input_err(
            origin,
            record_line(rec),
            format!("non-finite value '{raw}' in column '{name}'"),
        ));
    }
    Ok(v)
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Read a two-column time series: header `time_s,<label>_<unit>` with unit
/// one of m, N, Pa, kg; '#' lines are comments. Errors carry the offending
/// line number.
pub fn read_timeseries<R: Read>(r: R, origin: &str) -> Result<TimeSeries> {
    let mut rdr = csv_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(origin, 1, format!("cannot read header: {e}")))?
        .clone();
    if headers.len() != 2 {
        return Err(input_err(
            origin,
            1,
            format!("expected 2 columns, found {}", headers.len()),
        ));
    }
    if headers.get(0) != Some("time_s") {
        return Err(input_err(
            origin,
            1,
            format!("first column must be 'time_s', found '{}'", &headers[0]),
        ));
    }
    let value_col = headers.get(1).unwrap_or("");
    let (label, unit) = match value_col.rsplit_once('_') {
        Some((label, tag)) if !label.is_empty() => match UnitTag::parse(tag) {
            Some(u) => (label.to_string(), u),
            None => {
                return Err(input_err(
                    origin,
                    1,
                    format!("unknown unit tag '{tag}' in column '{value_col}' (expect m, N, Pa or kg)"),
                ))
            }
        },
        _ => {
            return Err(input_err(
                origin,
                1,
                format!("value column '{value_col}' must be named <label>_<unit>"),
            ))
        }
    };
    let mut t = Vec::new();
    let mut v = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(origin, line, format!("malformed row: {e}"))
        })?;
        if rec.len() != 2 {
            return Err(input_err(
                origin,
                record_line(&rec),
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let ti = parse_field(origin, &rec, 0, "time_s")?;
        let vi = parse_field(origin, &rec, 1, value_col)?;
        if let Some(&prev) = t.last() {
            if ti <= prev {
                return Err(input_err(
                    origin,
                    record_line(&rec),
                    format!("time not strictly increasing ({ti} after {prev})"),
                ));
            }
        }
        t.push(ti);
        v.push(vi);
    }
    if t.is_empty() {
        return Err(Error::BadData(format!("{origin}: no data rows")));
    }
    TimeSeries::new(t, v, unit, &label)
}

pub fn read_timeseries_csv(path: &Path) -> Result<TimeSeries> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_timeseries(f, &path.display().to_string())
}

/// Write a time series with full f64 precision (17 significant digits).
pub fn write_timeseries<W: Write>(w: W, ts: &TimeSeries) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadData(format!("csv write failed: {e}"));
    wtr.write_record([
        "time_s".to_string(),
        format!("{}_{}", ts.label, ts.unit.as_str()),
    ])
    .map_err(err)?;
    for (ti, vi) in ts.t.iter().zip(&ts.v) {
        wtr.write_record([format!("{ti:.16e}"), format!("{vi:.16e}")])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::BadData(format!("csv write failed: {e}")))
}

pub fn write_timeseries_csv(path: &Path, ts: &TimeSeries) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_timeseries(f, ts)
}

/// Two numeric columns under arbitrary header names, for plot-ready output
/// (a Mittag-Leffler sweep, a weight curve, a flux history).
#[derive(Debug, Clone, PartialEq)]
pub struct XyTable {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl XyTable {
    pub fn new(x_name: &str, y_name: &str, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::BadData(format!(
                "column lengths differ ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::BadData("table has no rows".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::BadData("table contains non-finite values".into()));
        }
        Ok(XyTable {
            x_name: x_name.to_string(),
            y_name: y_name.to_string(),
            x,
            y,
        })
    }
}

pub fn read_xy<R: Read>(r: R, origin: &str) -> Result<XyTable> {
    let mut rdr = csv_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(origin, 1, format!("cannot read header: {e}")))?
        .clone();
    if headers.len() != 2 {
        return Err(input_err(
            origin,
            1,
            format!("expected 2 columns, found {}", headers.len()),
        ));
    }
    let (x_name, y_name) = (headers[0].to_string(), headers[1].to_string());
    let mut x = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(origin, line, format!("malformed row: {e}"))
        })?;
        if rec.len() != 2 {
            return Err(input_err(
                origin,
                record_line(&rec),
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        x.push(parse_field(origin, &rec, 0, &x_name)?);
        y.push(parse_field(origin, &rec, 1, &y_name)?);
    }
    if x.is_empty() {
        return Err(Error::BadData(format!("{origin}: no data rows")));
    }
    XyTable::new(&x_name, &y_name, x, y)
}

pub fn read_xy_csv(path: &Path) -> Result<XyTable> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_xy(f, &path.display().to_string())
}

pub fn write_xy<W: Write>(w: W, t: &XyTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadData(format!("csv write failed: {e}"));
    wtr.write_record([t.x_name.clone(), t.y_name.clone()]).map_err(err)?;
    for (xi, yi) in t.x.iter().zip(&t.y) {
        wtr.write_record([format!("{xi:.16e}"), format!("{yi:.16e}")])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::BadData(format!("csv write failed: {e}")))
}

pub fn write_xy_csv(path: &Path, t: &XyTable) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_xy(f, t)
}

/// One row of an emitted group-summary table (`label,n,mean,sd`).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTableRow {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

const SUMMARY_HEADER: [&str; 4] = ["label", "n", "mean", "sd"];

pub fn read_summary<R: Read>(r: R, origin: &str) -> Result<Vec<SummaryTableRow>> {
    let mut rdr = csv_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(origin, 1, format!("cannot read header: {e}")))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != SUMMARY_HEADER {
        return Err(input_err(
            origin,
            1,
            format!(
                "expected header '{}', found '{}'",
                SUMMARY_HEADER.join(","),
                got.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(origin, line, format!("malformed row: {e}"))
        })?;
        if rec.len() != 4 {
            return Err(input_err(
                origin,
                record_line(&rec),
                format!("expected 4 fields, found {}", rec.len()),
            ));
        }
        let n: usize = rec.get(1).unwrap_or("").parse().map_err(|_| {
            input_err(
                origin,
                record_line(&rec),
                format!("cannot parse '{}' as a count", rec.get(1).unwrap_or("")),
            )
        })?;
        rows.push(SummaryTableRow {
            label: rec.get(0).unwrap_or("").to_string(),
            n,
            mean: parse_field(origin, &rec, 2, "mean")?,
            sd: parse_field(origin, &rec, 3, "sd")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::BadData(format!("{origin}: no data rows")));
    }
    Ok(rows)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryTableRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_summary(f, &path.display().to_string())
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryTableRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadData(format!("csv write failed: {e}"));
    wtr.write_record(SUMMARY_HEADER).map_err(err)?;
    for r in rows {
        wtr.write_record([
            r.label.clone(),
            r.n.to_string(),
            format!("{:.16e}", r.mean),
            format!("{:.16e}", r.sd),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::BadData(format!("csv write failed: {e}")))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryTableRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_summary(f, rows)
}

/// One row of a fitted-parameter table. The thickness column keeps the
/// file's millimetre convention so that tables round-trip bit for bit;
/// use [FitTableRow::h_m] for the SI value.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTableRow {
    pub sample: String,
    pub h_mm: f64,
    pub m: f64,
    pub beta: f64,
    pub lambda_beta: f64,
    pub rms: f64,
}

impl FitTableRow {
    pub fn h_m(&self) -> f64 {
        self.h_mm * 1e-3
    }
}

const FIT_TABLE_HEADER: [&str; 6] = ["sample", "h_mm", "M_pa", "beta", "lambda_beta", "rms"];

/// Read a fitted-parameter table (`sample,h_mm,M_pa,beta,lambda_beta,rms`).
pub fn read_fit_table<R: Read>(r: R, origin: &str) -> Result<Vec<FitTableRow>> {
    let mut rdr = csv_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(origin, 1, format!("cannot read header: {e}")))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != FIT_TABLE_HEADER {
        return Err(input_err(
            origin,
            1,
            format!(
                "expected header '{}', found '{}'",
                FIT_TABLE_HEADER.join(","),
                got.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(origin, line, format!("malformed row: {e}"))
        })?;
        if rec.len() != 6 {
            return Err(input_err(
                origin,
                record_line(&rec),
                format!("expected 6 fields, found {}", rec.len()),
            ));
        }
        let sample = rec.get(0).unwrap_or("").to_string();
        if sample.is_empty() {
            return Err(input_err(origin, record_line(&rec), "empty sample id".into()));
        }
        rows.push(FitTableRow {
            sample,
            h_mm: parse_field(origin, &rec, 1, "h_mm")?,
            m: parse_field(origin, &rec, 2, "M_pa")?,
            beta: parse_field(origin, &rec, 3, "beta")?,
            lambda_beta: parse_field(origin, &rec, 4, "lambda_beta")?,
            rms: parse_field(origin, &rec, 5, "rms")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::BadData(format!("{origin}: no data rows")));
    }
    Ok(rows)
}

pub fn read_fit_table_csv(path: &Path) -> Result<Vec<FitTableRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_fit_table(f, &path.display().to_string())
}

pub fn write_fit_table<W: Write>(w: W, rows: &[FitTableRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadData(format!("csv write failed: {e}"));
    wtr.write_record(FIT_TABLE_HEADER).map_err(err)?;
    for r in rows {
        wtr.write_record([
            r.sample.clone(),
            format!("{:.16e}", r.h_mm),
            format!("{:.16e}", r.m),
            format!("{:.16e}", r.beta),
            format!("{:.16e}", r.lambda_beta),
            format!("{:.16e}", r.rms),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::BadData(format!("csv write failed: {e}")))
}

pub fn write_fit_table_csv(path: &Path, rows: &[FitTableRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_fit_table(f, rows)
}

/// A named space-time field sampled on a rectangular (z, t) grid, stored in
/// long form (`field,z_m,t_s,value`) when written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub name: String,
    pub zs: Vec<f64>,
    pub ts: Vec<f64>,
    /// row-major over times: values[k] holds the profile at ts[k]
    pub values: Vec<Vec<f64>>,
}

impl FieldGrid {
    pub fn new(name: &str, zs: Vec<f64>, ts: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != ts.len() || values.iter().any(|row| row.len() != zs.len()) {
            return Err(Error::BadData(format!(
                "field '{name}': values shape does not match the grid"
            )));
        }
        Ok(FieldGrid {
            name: name.to_string(),
            zs,
            ts,
            values,
        })
    }
}

const GRID_HEADER: [&str; 4] = ["field", "z_m", "t_s", "value"];

/// Write one or more field grids in long form, fields back to back.
pub fn write_field_grids<W: Write>(w: W, grids: &[FieldGrid]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadData(format!("csv write failed: {e}"));
    wtr.write_record(GRID_HEADER).map_err(err)?;
    for g in grids {
        for (k, t) in g.ts.iter().enumerate() {
            for (i, z) in g.zs.iter().enumerate() {
                wtr.write_record([
                    g.name.clone(),
                    format!("{z:.16e}"),
                    format!("{t:.16e}"),
                    format!("{:.16e}", g.values[k][i]),
                ])
                .map_err(err)?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::BadData(format!("csv write failed: {e}")))
}

pub fn write_field_grids_csv(path: &Path, grids: &[FieldGrid]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_field_grids(f, grids)
}

/// Read field grids back from long form. Rows of one field must be grouped
/// and laid out time-major exactly as written.
pub fn read_field_grids<R: Read>(r: R, origin: &str) -> Result<Vec<FieldGrid>> {
    let mut rdr = csv_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(origin, 1, format!("cannot read header: {e}")))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != GRID_HEADER {
        return Err(input_err(
            origin,
            1,
            format!(
                "expected header '{}', found '{}'",
                GRID_HEADER.join(","),
                got.join(",")
            ),
        ));
    }
    // (field, z, t, value) tuples in file order
    let mut raw: Vec<(String, f64, f64, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(origin, line, format!("malformed row: {e}"))
        })?;
        if rec.len() != 4 {
            return Err(input_err(
                origin,
                record_line(&rec),
                format!("expected 4 fields, found {}", rec.len()),
            ));
        }
        raw.push((
            rec.get(0).unwrap_or("").to_string(),
            parse_field(origin, &rec, 1, "z_m")?,
            parse_field(origin, &rec, 2, "t_s")?,
            parse_field(origin, &rec, 3, "value")?,
        ));
    }
    if raw.is_empty() {
        return Err(Error::BadData(format!("{origin}: no data rows")));
    }
    let mut grids: Vec<FieldGrid> = Vec::new();
    let mut i = 0;
    while i < raw.len() {
        let name = raw[i].0.clone();
        let mut end = i;
        while end < raw.len() && raw[end].0 == name {
            end += 1;
        }
        let block = &raw[i..end];
        // z axis repeats within each time slice; the first slice defines it
        let mut zs = Vec::new();
        for row in block {
            if (row.2 - block[0].2).abs() != 0.0 {
                break;
            }
            zs.push(row.1);
        }
        let nz = zs.len();
        if nz == 0 || block.len() % nz != 0 {
            return Err(Error::BadData(format!(
                "{origin}: field '{name}' rows do not form a rectangular grid"
            )));
        }
        let nt = block.len() / nz;
        let mut ts = Vec::with_capacity(nt);
        let mut values = Vec::with_capacity(nt);
        for k in 0..nt {
            let slice = &block[k * nz..(k + 1) * nz];
            let t = slice[0].2;
            for (j, row) in slice.iter().enumerate() {
                if row.1.to_bits() != zs[j].to_bits() || row.2.to_bits() != t.to_bits() {
                    return Err(Error::BadData(format!(
                        "{origin}: field '{name}' rows are not laid out time-major on a fixed z axis"
                    )));
                }
            }
            ts.push(t);
            values.push(slice.iter().map(|row| row.3).collect());
        }
        grids.push(FieldGrid::new(&name, zs, ts, values)?);
        i = end;
    }
    Ok(grids)
}

pub fn read_field_grids_csv(path: &Path) -> Result<Vec<FieldGrid>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_field_grids(f, &path.display().to_string())
}
