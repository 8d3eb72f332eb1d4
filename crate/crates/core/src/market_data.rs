//! Daily price ingestion, predictor calendar alignment and return transforms.
//!
//! Target series trade every calendar day; predictors (equity indices,
//! metals, rates, VIX) do not. A predictor with no quote on a target date
//! keeps its previous price, which yields a return of exactly `0.0` there.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// A named daily price history with strictly increasing dates and positive prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    name: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(name: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let name = name.into();
        for (i, &(date, price)) in observations.iter().enumerate() {
            if !(price > 0.0) || !price.is_finite() {
                return Err(Error::NonPositivePrice {
                    series: name,
                    date,
                    price,
                });
            }
            if i > 0 && observations[i - 1].0 >= date {
                return Err(Error::UnorderedDates { series: name, date });
            }
        }
        Ok(Self { name, observations })
    }

    /// Reads a `date,price` CSV. Errors carry the source label and line number.
    pub fn from_csv_reader<R: Read>(name: impl Into<String>, source: &str, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "date" || &headers[1] != "price" {
            return Err(Error::Parse {
                location: format!("{source}:1"),
                message: format!("expected header `date,price`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut observations = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record?;
            let location = format!("{source}:{line}");
            let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT).map_err(|e| Error::Parse {
                location: location.clone(),
                message: format!("bad date `{}`: {e}", &record[0]),
            })?;
            let price: f64 = record
                .get(1)
                .ok_or_else(|| Error::Parse {
                    location: location.clone(),
                    message: "missing price".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    location: location.clone(),
                    message: format!("bad price `{}`: {e}", &record[1]),
                })?;
            observations.push((date, price));
        }
        Self::new(name, observations).map_err(|e| match e {
            Error::NonPositivePrice { date, price, .. } => Error::Parse {
                location: source.to_string(),
                message: format!("non-positive price {price} on {date}"),
            },
            Error::UnorderedDates { date, .. } => Error::Parse {
                location: source.to_string(),
                message: format!("dates not strictly increasing at {date}"),
            },
            other => other,
        })
    }

    pub fn from_csv_path(name: impl Into<String>, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(name, &path.display().to_string(), file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["date", "price"])?;
        for (date, price) in &self.observations {
            wtr.write_record([date.format(DATE_FORMAT).to_string(), price.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|(d, _)| *d).collect()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Dated `T x N` matrix of percent log returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    values: DMatrix<f64>,
}

/// Panel of forecast targets.
pub type ReturnPanel = Panel;
/// Panel of calendar-aligned exogenous predictors.
pub type PredictorPanel = Panel;

impl Panel {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != dates.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} dates",
                values.nrows(),
                dates.len()
            )));
        }
        if values.ncols() != names.len() {
            return Err(Error::Dimension(format!(
                "{} columns but {} names",
                values.ncols(),
                names.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Misaligned(format!("panel dates not strictly increasing at {}", w[1])));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidParameter(format!(
                "non-finite value for `{}` on {}",
                names[c], dates[r]
            )));
        }
        Ok(Self { dates, names, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    /// Rows `[start, end)` as a new panel.
    pub fn slice_rows(&self, start: usize, end: usize) -> Panel {
        Panel {
            dates: self.dates[start..end].to_vec(),
            names: self.names.clone(),
            values: self.values.rows(start, end - start).into_owned(),
        }
    }

    /// Keeps only the named column.
    pub fn select_series(&self, j: usize) -> Panel {
        Panel {
            dates: self.dates.clone(),
            names: vec![self.names[j].clone()],
            values: self.values.columns(j, 1).into_owned(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        wtr.write_record(&header)?;
        for (i, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.format(DATE_FORMAT).to_string()];
            row.extend(self.values.row(i).iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: &str, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() || &headers[0] != "date" {
            return Err(Error::Parse {
                location: format!("{source}:1"),
                message: "first column must be `date`".into(),
            });
        }
        let names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
        let mut dates = Vec::new();
        let mut flat = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let location = format!("{source}:{}", i + 2);
            if record.len() != names.len() + 1 {
                return Err(Error::Parse {
                    location,
                    message: format!("expected {} fields, found {}", names.len() + 1, record.len()),
                });
            }
            dates.push(NaiveDate::parse_from_str(&record[0], DATE_FORMAT).map_err(|e| Error::Parse {
                location: location.clone(),
                message: format!("bad date `{}`: {e}", &record[0]),
            })?);
            for field in record.iter().skip(1) {
                flat.push(field.parse::<f64>().map_err(|e| Error::Parse {
                    location: location.clone(),
                    message: format!("bad value `{field}`: {e}"),
                })?);
            }
        }
        let values = DMatrix::from_row_slice(dates.len(), names.len(), &flat);
        Panel::new(dates, names, values)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(&path.display().to_string(), file)
    }
}

/// Percent log returns `100 * ln(S_t / S_{t-1})`; one shorter than the input.
pub fn to_log_returns(prices: &PriceSeries) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: prices.len(),
        });
    }
    Ok(prices
        .observations
        .windows(2)
        .map(|w| 100.0 * (w[1].1 / w[0].1).ln())
        .collect())
}

/// Inverse of [`to_log_returns`]: rebuilds prices from a starting price.
pub fn reconstruct_prices(first_price: f64, returns: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(returns.len() + 1);
    out.push(first_price);
    let mut cum = 0.0;
    for r in returns {
        cum += r / 100.0;
        out.push(first_price * cum.exp());
    }
    out
}

/// Builds the target return panel. Every series must share one calendar;
/// gaps in a target series are rejected rather than filled.
pub fn returns_panel(series: &[PriceSeries]) -> Result<ReturnPanel> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidParameter("no target series".into()))?;
    let dates = first.dates();
    for s in &series[1..] {
        let other = s.dates();
        if other != dates {
            let at = dates
                .iter()
                .zip(&other)
                .find(|(a, b)| a != b)
                .map(|(a, _)| a.to_string())
                .unwrap_or_else(|| format!("length {} vs {}", dates.len(), other.len()));
            return Err(Error::Misaligned(format!(
                "target `{}` calendar differs from `{}` at {at}",
                s.name(),
                first.name()
            )));
        }
    }
    let t = dates.len().saturating_sub(1);
    let mut values = DMatrix::zeros(t, series.len());
    for (j, s) in series.iter().enumerate() {
        for (i, r) in to_log_returns(s)?.into_iter().enumerate() {
            values[(i, j)] = r;
        }
    }
    Panel::new(
        dates[1..].to_vec(),
        series.iter().map(|s| s.name().to_string()).collect(),
        values,
    )
}

/// Predictor panel plus, per predictor, the target dates whose price was carried forward.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub panel: PredictorPanel,
    pub carried_forward: Vec<Vec<NaiveDate>>,
}

/// Aligns raw predictor prices to the target calendar by last-observation
/// carry-forward, then differences. Output dates are `target_dates[1..]`.
pub fn align_predictors(target_dates: &[NaiveDate], raw: &[PriceSeries]) -> Result<PredictorPanel> {
    align_predictors_with_log(target_dates, raw).map(|a| a.panel)
}

pub fn align_predictors_with_log(target_dates: &[NaiveDate], raw: &[PriceSeries]) -> Result<Alignment> {
    if target_dates.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: target_dates.len(),
        });
    }
    if target_dates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Misaligned("target dates not strictly increasing".into()));
    }
    let first_target = target_dates[0];
    let t = target_dates.len() - 1;
    let mut values = DMatrix::zeros(t, raw.len());
    let mut carried_forward = Vec::with_capacity(raw.len());
    for (j, series) in raw.iter().enumerate() {
        let obs = series.observations();
        match obs.first() {
            Some(&(start, _)) if start <= first_target => {}
            Some(&(start, _)) => {
                return Err(Error::PredictorStartsLate {
                    series: series.name().to_string(),
                    starts: start,
                    first_target,
                })
            }
            None => {
                return Err(Error::TooFewObservations { needed: 1, got: 0 });
            }
        }
        let mut cursor = 0usize;
        let mut aligned = Vec::with_capacity(target_dates.len());
        let mut carried = Vec::new();
        for &date in target_dates {
            while cursor + 1 < obs.len() && obs[cursor + 1].0 <= date {
                cursor += 1;
            }
            if obs[cursor].0 != date {
                carried.push(date);
            }
            aligned.push(obs[cursor].1);
        }
        for i in 0..t {
            values[(i, j)] = if aligned[i + 1] == aligned[i] {
                0.0
            } else {
                100.0 * (aligned[i + 1] / aligned[i]).ln()
            };
        }
        carried_forward.push(carried);
    }
    let panel = Panel::new(
        target_dates[1..].to_vec(),
        raw.iter().map(|s| s.name().to_string()).collect(),
        values,
    )?;
    Ok(Alignment {
        panel,
        carried_forward,
    })
}

/// Table-style summary of one return series. Kurtosis is raw (normal = 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub name: String,
    pub maximum: f64,
    pub minimum: f64,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Summary statistics for every column of the panel.
pub fn describe(panel: &ReturnPanel) -> Result<Vec<DescriptiveStats>> {
    (0..panel.n_series())
        .map(|j| describe_series(&panel.names()[j], &panel.column(j)))
        .collect()
}

pub fn describe_series(name: &str, data: &[f64]) -> Result<DescriptiveStats> {
    let n = data.len();
    if n < 4 {
        return Err(Error::TooFewObservations { needed: 4, got: n });
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::ZeroVariance(format!("series `{name}`")));
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);

    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    Ok(DescriptiveStats {
        name: name.to_string(),
        maximum: sorted[n - 1],
        minimum: sorted[0],
        mean,
        median,
        std_dev,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}
