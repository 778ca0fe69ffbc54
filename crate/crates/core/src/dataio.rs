//! Station data ingestion, deseasonalization, geographic coordinates and the
//! on-disk format for regular monitoring data.
//!
//! Data file layout: a UTF-8 text file whose first line is a JSON header
//! `{"stations": [..], "coords": [[..], ..], "n": n, "dt": dt, "start": ..}`
//! followed by exactly p lines, one per station in header order, each holding n
//! comma-separated values written in shortest round-trip decimal form.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::exactlik::simulate;
pub use crate::whittle::RegularMonitoringData;

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Length of the seasonal cycle in days.
pub const YEAR_DAYS: f64 = 365.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub lon: f64,
    pub lat: f64,
    /// Contiguous daily dates, first to last.
    pub dates: Vec<NaiveDate>,
    /// Observations; NaN marks a missing value.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawStationTable {
    pub stations: Vec<Station>,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    station: String,
    lon: f64,
    lat: f64,
    date: String,
    value: Option<f64>,
}

impl RawStationTable {
    /// Reads long-format CSV with columns `station, lon, lat, date, value`.
    /// Dates are ISO-8601; empty values are read as missing.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut by_id: BTreeMap<String, (f64, f64, Vec<(NaiveDate, f64)>)> = BTreeMap::new();
        let mut order = Vec::new();
        for row in rdr.deserialize() {
            let row: RawRow = row?;
            let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d")
                .map_err(|e| Error::Parse(format!("date {:?} at station {}: {e}", row.date, row.station)))?;
            let entry = by_id.entry(row.station.clone()).or_insert_with(|| {
                order.push(row.station.clone());
                (row.lon, row.lat, Vec::new())
            });
            if entry.0 != row.lon || entry.1 != row.lat {
                return Err(Error::Data(format!("station {} changes location", row.station)));
            }
            entry.2.push((date, row.value.unwrap_or(f64::NAN)));
        }
        let mut stations = Vec::with_capacity(order.len());
        for id in order {
            let (lon, lat, mut obs) = by_id.remove(&id).expect("id recorded on insert");
            obs.sort_by_key(|(d, _)| *d);
            for w in obs.windows(2) {
                let gap = (w[1].0 - w[0].0).num_days();
                if gap != 1 {
                    let what = if gap == 0 { "duplicate" } else { "non-contiguous" };
                    return Err(Error::Data(format!("station {id}: {what} dates at {}", w[1].0)));
                }
            }
            let (dates, values) = obs.into_iter().unzip();
            stations.push(Station { id, lon, lat, dates, values });
        }
        if stations.is_empty() {
            return Err(Error::Data("no stations in input".into()));
        }
        Ok(RawStationTable { stations })
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }

    /// Restricts every station to the date range common to all of them.
    pub fn align(&self) -> Result<RawStationTable> {
        let first = self.stations.iter().filter_map(|s| s.dates.first()).max();
        let last = self.stations.iter().filter_map(|s| s.dates.last()).min();
        let (Some(&first), Some(&last)) = (first, last) else {
            return Err(Error::Data("a station has no observations".into()));
        };
        if last < first {
            return Err(Error::Data("stations share no common dates".into()));
        }
        let stations = self
            .stations
            .iter()
            .map(|s| {
                let off = (first - s.dates[0]).num_days() as usize;
                let len = (last - first).num_days() as usize + 1;
                Station {
                    dates: s.dates[off..off + len].to_vec(),
                    values: s.values[off..off + len].to_vec(),
                    ..s.clone()
                }
            })
            .collect();
        Ok(RawStationTable { stations })
    }
}

/// Converts degrees of longitude and latitude to a point on the sphere of
/// radius 6371 km.
pub fn lonlat_to_xyz(lon: f64, lat: f64) -> [f64; 3] {
    let (lo, la) = (lon.to_radians(), lat.to_radians());
    [
        EARTH_RADIUS_KM * la.cos() * lo.cos(),
        EARTH_RADIUS_KM * la.cos() * lo.sin(),
        EARTH_RADIUS_KM * la.sin(),
    ]
}

/// Unit east-west tangent vector at the centroid of the given sites.
pub fn east_west_direction(lonlat: &[(f64, f64)]) -> Result<[f64; 3]> {
    let mut c = [0.0; 3];
    for &(lon, lat) in lonlat {
        let p = lonlat_to_xyz(lon, lat);
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    let horiz = c[0].hypot(c[1]);
    if horiz <= 1e-9 * (horiz + c[2].abs()) {
        return Err(Error::Data("east-west direction undefined at a pole".into()));
    }
    Ok([-c[1] / horiz, c[0] / horiz, 0.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformOrder {
    /// Square root, then harmonic regression.
    SqrtFirst,
    /// Harmonic regression on the raw values, then a signed square root of
    /// the residuals.
    HarmonicsFirst,
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub n_harmonics: usize,
    /// Station ids to leave out.
    pub drop: Vec<String>,
    /// Fit one seasonal curve to all stations together rather than one each.
    pub pooled: bool,
    pub order: TransformOrder,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { n_harmonics: 4, drop: Vec::new(), pooled: true, order: TransformOrder::SqrtFirst }
    }
}

/// Preprocessed data with the station metadata it came from.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: RegularMonitoringData,
    pub stations: Vec<String>,
    pub lonlat: Vec<(f64, f64)>,
    pub start: NaiveDate,
}

impl Prepared {
    pub fn header(&self) -> DataHeader {
        DataHeader {
            stations: self.stations.clone(),
            coords: self.data.coords.clone(),
            n: self.data.n(),
            dt: self.data.dt,
            start: Some(self.start.to_string()),
            lonlat: Some(self.lonlat.iter().map(|&(a, b)| [a, b]).collect()),
        }
    }
}

/// Design matrix with an intercept and sin/cos pairs at 2πj·day/365.25.
fn harmonic_design(days: &[f64], n_harmonics: usize) -> DMatrix<f64> {
    DMatrix::from_fn(days.len(), 1 + 2 * n_harmonics, |i, c| {
        if c == 0 {
            return 1.0;
        }
        let j = (c + 1) / 2;
        let arg = 2.0 * std::f64::consts::PI * j as f64 * days[i] / YEAR_DAYS;
        if c % 2 == 1 { arg.sin() } else { arg.cos() }
    })
}

/// Least-squares fit of y on the harmonic design; returns fitted values.
fn harmonic_fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let beta = svd.solve(y, 1e-12).map_err(|e| Error::Data(format!("harmonic regression: {e}")))?;
    Ok(x * beta)
}

/// Removes the seasonal fit from each row. With `pooled`, a single curve is fit
/// to all rows jointly, which for a shared time grid is the fit to the row mean.
pub fn deseasonalize(series: &mut DMatrix<f64>, days: &[f64], n_harmonics: usize, pooled: bool) -> Result<()> {
    let x = harmonic_design(days, n_harmonics);
    if x.nrows() <= x.ncols() {
        return Err(Error::Data(format!("{} days too few for {n_harmonics} harmonics", days.len())));
    }
    if pooled {
        let mean = DVector::from_iterator(series.ncols(), series.column_iter().map(|c| c.mean()));
        let fit = harmonic_fit(&x, &mean)?;
        for mut row in series.row_iter_mut() {
            row -= fit.transpose();
        }
    } else {
        for mut row in series.row_iter_mut() {
            let y = row.transpose();
            let fit = harmonic_fit(&x, &y)?;
            row -= fit.transpose();
        }
    }
    Ok(())
}

/// Subtracts each row's mean and divides by its sample standard deviation.
pub fn standardize(series: &mut DMatrix<f64>) -> Result<()> {
    let n = series.ncols() as f64;
    for (i, mut row) in series.row_iter_mut().enumerate() {
        let m = row.mean();
        row.add_scalar_mut(-m);
        let sd = (row.norm_squared() / (n - 1.0)).sqrt();
        if !(sd > 0.0) {
            return Err(Error::Data(format!("station row {i} has zero variance")));
        }
        row /= sd;
    }
    Ok(())
}

/// Square root, seasonal removal, centering and scaling, in that order by
/// default. Missing values are an error.
pub fn preprocess(raw: &RawStationTable, opts: &PreprocessOptions) -> Result<Prepared> {
    let kept: Vec<&Station> = raw.stations.iter().filter(|s| !opts.drop.contains(&s.id)).collect();
    for id in &opts.drop {
        if !raw.stations.iter().any(|s| &s.id == id) {
            return Err(Error::Data(format!("cannot drop unknown station {id}")));
        }
    }
    if kept.is_empty() {
        return Err(Error::Data("every station was dropped".into()));
    }
    let table = RawStationTable { stations: kept.into_iter().cloned().collect() }.align()?;
    let p = table.stations.len();
    let n = table.stations[0].values.len();
    if n < 2 {
        return Err(Error::Data("need at least two common days".into()));
    }
    let mut series = DMatrix::zeros(p, n);
    for (i, s) in table.stations.iter().enumerate() {
        for (t, &v) in s.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Data(format!("station {} missing a value on {}", s.id, s.dates[t])));
            }
            if v < 0.0 {
                return Err(Error::Data(format!("station {} has a negative value on {}", s.id, s.dates[t])));
            }
            series[(i, t)] = v;
        }
        if s.values.iter().all(|&v| v == s.values[0]) {
            return Err(Error::Data(format!("station {} is constant", s.id)));
        }
    }
    let start = table.stations[0].dates[0];
    let epoch = NaiveDate::from_ymd_opt(start.year(), 1, 1).expect("valid date");
    let days: Vec<f64> = (0..n).map(|t| ((start - epoch).num_days() + t as i64) as f64).collect();
    match opts.order {
        TransformOrder::SqrtFirst => {
            series.apply(|v| *v = v.sqrt());
            deseasonalize(&mut series, &days, opts.n_harmonics, opts.pooled)?;
        }
        TransformOrder::HarmonicsFirst => {
            deseasonalize(&mut series, &days, opts.n_harmonics, opts.pooled)?;
            // residuals can be negative; take a signed square root
            series.apply(|v| *v = v.signum() * v.abs().sqrt());
        }
    }
    standardize(&mut series)?;
    let lonlat: Vec<(f64, f64)> = table.stations.iter().map(|s| (s.lon, s.lat)).collect();
    let coords = lonlat.iter().map(|&(lo, la)| lonlat_to_xyz(lo, la).to_vec()).collect();
    Ok(Prepared {
        data: RegularMonitoringData::new(coords, series, 1.0)?,
        stations: table.stations.iter().map(|s| s.id.clone()).collect(),
        lonlat,
        start,
    })
}

/// Header line of a data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataHeader {
    pub stations: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub n: usize,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lonlat: Option<Vec<[f64; 2]>>,
}

impl DataHeader {
    /// Header with generated station names `s0, s1, ..`.
    pub fn for_data(data: &RegularMonitoringData) -> Self {
        DataHeader {
            stations: (0..data.p()).map(|i| format!("s{i}")).collect(),
            coords: data.coords.clone(),
            n: data.n(),
            dt: data.dt,
            start: None,
            lonlat: None,
        }
    }
}

pub fn write_data<W: Write>(mut w: W, header: &DataHeader, data: &RegularMonitoringData) -> Result<()> {
    if header.stations.len() != data.p() || header.n != data.n() {
        return Err(Error::Data("header does not match the data shape".into()));
    }
    serde_json::to_writer(&mut w, header)?;
    writeln!(w)?;
    for row in data.series.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_data_path(path: impl AsRef<Path>, header: &DataHeader, data: &RegularMonitoringData) -> Result<()> {
    write_data(BufWriter::new(File::create(path)?), header, data)
}

pub fn read_data<R: Read>(reader: R) -> Result<(DataHeader, RegularMonitoringData)> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty data file".into()))??;
    let header: DataHeader = serde_json::from_str(&first)?;
    let p = header.stations.len();
    let mut series = DMatrix::zeros(p, header.n);
    let mut rows = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if rows == p {
            return Err(Error::Parse(format!("more than {p} data rows")));
        }
        let mut count = 0;
        for (t, tok) in line.split(',').enumerate() {
            if t >= header.n {
                return Err(Error::Parse(format!("row {rows} longer than n = {}", header.n)));
            }
            series[(rows, t)] =
                tok.trim().parse().map_err(|e| Error::Parse(format!("row {rows}, column {t}: {e}")))?;
            count += 1;
        }
        if count != header.n {
            return Err(Error::Parse(format!("row {rows} has {count} values, expected {}", header.n)));
        }
        rows += 1;
    }
    if rows != p {
        return Err(Error::Parse(format!("{rows} data rows for {p} stations")));
    }
    let data = RegularMonitoringData::new(header.coords.clone(), series, header.dt)?;
    Ok((header, data))
}

pub fn read_data_path(path: impl AsRef<Path>) -> Result<(DataHeader, RegularMonitoringData)> {
    read_data(File::open(path)?)
}
