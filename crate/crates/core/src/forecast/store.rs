//! Draw files: a `key = value` manifest, a `---` line, then one record per
//! origin. Each completed record is a header line
//! `origin <index> <date> ok <bytes>` followed by a zlib-compressed block of
//! little-endian f64 values and a newline. Per series the block holds the
//! realization, then the predictive draws, conditional means, conditional
//! variances and, for Student-t models, the degrees of freedom.
//! Failed origins are a single line `origin <index> <date> failed <message>`.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::predictive::SeriesPredictive;
use super::rolling::{ForecastSet, OriginFailure, OriginForecast, RollingPlan, SeriesForecast};
use crate::bvar::{Family, MinnesotaHyper, ModelSpec, Volatility};
use crate::error::{Error, Result};

const MAGIC: &str = "bvarcast-draws 1";
const SEPARATOR: &str = "---";

/// Plain-text header of a draw file.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastManifest {
    pub model: String,
    pub family: Family,
    pub volatility: Volatility,
    pub lags: usize,
    pub plan: RollingPlan,
    pub seed: u64,
    pub n_iter: usize,
    pub n_burn: usize,
    /// Retained draws per origin.
    pub draws: usize,
    pub series: Vec<String>,
    pub prior: MinnesotaHyper,
    /// Origins whose fit failed.
    pub incomplete: Vec<usize>,
    pub version: String,
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

impl ForecastManifest {
    pub fn new(spec: &ModelSpec, plan: &RollingPlan, series: Vec<String>) -> Self {
        Self {
            model: spec.label(),
            family: spec.family,
            volatility: spec.volatility,
            lags: spec.lags,
            plan: *plan,
            seed: spec.seed,
            n_iter: spec.n_iter,
            n_burn: spec.n_burn,
            draws: spec.retained(),
            series,
            prior: spec.prior,
            incomplete: Vec::new(),
            version: version_string(),
        }
    }

    pub fn student(&self) -> bool {
        self.volatility == Volatility::StudentSv
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.prior;
        vec![
            ("model", self.model.clone()),
            ("family", self.family.to_string()),
            ("volatility", self.volatility.to_string()),
            ("p", self.lags.to_string()),
            ("window", self.plan.window.to_string()),
            ("first_origin", self.plan.first_origin.to_string()),
            ("origins", self.plan.n_origins.to_string()),
            ("stride", self.plan.stride.to_string()),
            ("seed", self.seed.to_string()),
            ("n_iter", self.n_iter.to_string()),
            ("n_burn", self.n_burn.to_string()),
            ("draws", self.draws.to_string()),
            ("series", self.series.join(",")),
            (
                "prior",
                format!("{} {} {} {} {}", p.overall, p.cross, p.decay, p.exogenous, p.own_lag_mean),
            ),
            (
                "incomplete",
                self.incomplete.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
            ),
            ("version", self.version.clone()),
        ]
    }

    /// Errors naming the first field that differs, ignoring version and failures.
    pub fn check_compatible(&self, other: &ForecastManifest) -> Result<()> {
        for ((key, a), (_, b)) in self.entries().into_iter().zip(other.entries()) {
            if key == "version" || key == "incomplete" {
                continue;
            }
            if a != b {
                return Err(Error::schema(key, format!("expected `{a}`, found `{b}`")));
            }
        }
        Ok(())
    }

    fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        if let Some(bad) = self.series.iter().find(|s| s.contains([',', '\n'])) {
            return Err(Error::schema("series", format!("name `{bad}` contains a comma or newline")));
        }
        writeln!(w, "{MAGIC}")?;
        for (key, value) in self.entries() {
            writeln!(w, "{key} = {value}")?;
        }
        writeln!(w, "{SEPARATOR}")?;
        Ok(())
    }

    fn read<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::schema("magic", "not a draw file"));
        }
        let mut map = HashMap::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::schema("manifest", "file ends inside the manifest"));
            }
            let text = line.trim_end_matches(['\n', '\r']);
            if text == SEPARATOR {
                break;
            }
            let (k, v) = text
                .split_once(" = ")
                .or_else(|| text.strip_suffix(" =").map(|k| (k, "")))
                .ok_or_else(|| Error::schema("manifest", format!("malformed line `{text}`")))?;
            map.insert(k.to_string(), v.to_string());
        }
        let get = |key: &str| -> Result<&str> {
            map.get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::schema(key, "missing"))
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::schema(key, format!("cannot parse `{v}`")))
        }
        let prior: Vec<f64> = get("prior")?
            .split_whitespace()
            .map(|v| num("prior", v))
            .collect::<Result<_>>()?;
        if prior.len() != 5 {
            return Err(Error::schema("prior", "expected five values"));
        }
        let list = |key: &str| -> Result<Vec<String>> {
            let v = get(key)?;
            Ok(if v.is_empty() {
                Vec::new()
            } else {
                v.split(',').map(str::to_string).collect()
            })
        };
        Ok(Self {
            model: get("model")?.to_string(),
            family: get("family")?.parse().map_err(|_| Error::schema("family", "unknown"))?,
            volatility: get("volatility")?
                .parse()
                .map_err(|_| Error::schema("volatility", "unknown"))?,
            lags: num("p", get("p")?)?,
            plan: RollingPlan {
                window: num("window", get("window")?)?,
                first_origin: num("first_origin", get("first_origin")?)?,
                n_origins: num("origins", get("origins")?)?,
                stride: num("stride", get("stride")?)?,
            },
            seed: num("seed", get("seed")?)?,
            n_iter: num("n_iter", get("n_iter")?)?,
            n_burn: num("n_burn", get("n_burn")?)?,
            draws: num("draws", get("draws")?)?,
            series: list("series")?,
            prior: MinnesotaHyper {
                overall: prior[0],
                cross: prior[1],
                decay: prior[2],
                exogenous: prior[3],
                own_lag_mean: prior[4],
            },
            incomplete: list("incomplete")?
                .iter()
                .map(|v| num("incomplete", v))
                .collect::<Result<_>>()?,
            version: get("version")?.to_string(),
        })
    }
}

fn encode_record(rec: &OriginForecast, student: bool) -> Result<Vec<u8>> {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
    let mut put = |v: f64| enc.write_all(&v.to_le_bytes());
    for s in &rec.series {
        let p = &s.predictive;
        put(s.realized)?;
        for block in [&p.draws, &p.cond_mean, &p.cond_var] {
            for v in block.iter() {
                put(*v)?;
            }
        }
        if student {
            let eta = p.eta.as_ref().ok_or_else(|| Error::schema("eta", "missing for a Student-t model"))?;
            for v in eta {
                put(*v)?;
            }
        }
    }
    let payload = enc.finish()?;
    let mut out = format!("origin {} {} ok {}\n", rec.origin, rec.date, payload.len()).into_bytes();
    out.extend_from_slice(&payload);
    out.push(b'\n');
    Ok(out)
}

fn encode_failure(f: &OriginFailure) -> Vec<u8> {
    let msg = f.message.replace(['\n', '\r'], " ");
    format!("origin {} {} failed {}\n", f.origin, f.date, msg).into_bytes()
}

enum Entry {
    Done(OriginForecast),
    Failed(OriginFailure),
}

fn read_entry<R: BufRead>(r: &mut R, m: &ForecastManifest) -> Result<Option<Entry>> {
    let mut header = Vec::new();
    if r.read_until(b'\n', &mut header)? == 0 {
        return Ok(None);
    }
    let text = String::from_utf8(header).map_err(|_| Error::schema("record", "header is not text"))?;
    let text = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::schema("record", "truncated record header"))?;
    let mut parts = text.splitn(5, ' ');
    let bad = || Error::schema("record", format!("malformed record header `{text}`"));
    if parts.next() != Some("origin") {
        return Err(bad());
    }
    let origin: usize = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let date: NaiveDate = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let status = parts.next().ok_or_else(bad)?;
    let rest = parts.next().unwrap_or("");
    let field = format!("origin {origin}");
    match status {
        "failed" => Ok(Some(Entry::Failed(OriginFailure {
            origin,
            date,
            message: rest.to_string(),
        }))),
        "ok" => {
            let len: usize = rest.parse().map_err(|_| bad())?;
            let mut payload = vec![0u8; len + 1];
            r.read_exact(&mut payload)
                .map_err(|_| Error::schema(&field, "truncated draw block"))?;
            if payload.pop() != Some(b'\n') {
                return Err(Error::schema(&field, "draw block not terminated"));
            }
            let mut raw = Vec::new();
            ZlibDecoder::new(payload.as_slice())
                .read_to_end(&mut raw)
                .map_err(|e| Error::schema(&field, format!("corrupt draw block: {e}")))?;
            let md = m.draws;
            let per_series = 1 + md * if m.student() { 4 } else { 3 };
            let n = m.series.len();
            if raw.len() != 8 * per_series * n {
                return Err(Error::schema(
                    &field,
                    format!("draw block holds {} bytes, expected {}", raw.len(), 8 * per_series * n),
                ));
            }
            let values: Vec<f64> = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            let series = values
                .chunks_exact(per_series)
                .map(|c| SeriesForecast {
                    realized: c[0],
                    predictive: SeriesPredictive {
                        draws: c[1..1 + md].to_vec(),
                        cond_mean: c[1 + md..1 + 2 * md].to_vec(),
                        cond_var: c[1 + 2 * md..1 + 3 * md].to_vec(),
                        eta: m.student().then(|| c[1 + 3 * md..].to_vec()),
                    },
                })
                .collect();
            Ok(Some(Entry::Done(OriginForecast { origin, date, series })))
        }
        _ => Err(bad()),
    }
}

fn read_file(path: &Path, lenient: bool) -> Result<ForecastSet> {
    let mut r = BufReader::new(File::open(path)?);
    let manifest = ForecastManifest::read(&mut r)?;
    let mut set = ForecastSet {
        manifest,
        records: Vec::new(),
        failures: Vec::new(),
    };
    loop {
        match read_entry(&mut r, &set.manifest) {
            Ok(None) => break,
            Ok(Some(Entry::Done(rec))) => {
                set.records.retain(|x| x.origin != rec.origin);
                set.failures.retain(|x| x.origin != rec.origin);
                set.records.push(rec);
            }
            Ok(Some(Entry::Failed(f))) => {
                set.records.retain(|x| x.origin != f.origin);
                set.failures.retain(|x| x.origin != f.origin);
                set.failures.push(f);
            }
            Err(e) if lenient => {
                log::warn!("{}: dropping unreadable tail ({e})", path.display());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    set.records.sort_by_key(|x| x.origin);
    set.failures.sort_by_key(|x| x.origin);
    Ok(set)
}

/// Writes `set` in canonical order, replacing any existing file atomically.
pub fn store_forecasts(set: &ForecastSet, path: &Path) -> Result<()> {
    set.validate()?;
    let tmp = temp_path(path);
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        set.manifest.write(&mut w)?;
        let mut records: Vec<&OriginForecast> = set.records.iter().collect();
        records.sort_by_key(|r| r.origin);
        for rec in records {
            w.write_all(&encode_record(rec, set.manifest.student())?)?;
        }
        let mut failures: Vec<&OriginFailure> = set.failures.iter().collect();
        failures.sort_by_key(|f| f.origin);
        for f in failures {
            w.write_all(&encode_failure(f))?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a draw file; truncation or a malformed manifest is a schema error.
pub fn load_forecasts(path: &Path) -> Result<ForecastSet> {
    let set = read_file(path, false)?;
    set.validate()?;
    Ok(set)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Append-only writer used while a rolling run is in progress.
pub struct DrawWriter {
    file: BufWriter<File>,
    student: bool,
}

impl DrawWriter {
    /// Opens `path` for appending. An existing file must carry a compatible
    /// manifest; its completed origins are returned and its failures dropped
    /// so they are retried. A partially written final record is discarded.
    pub fn open(path: &Path, manifest: &ForecastManifest) -> Result<(Vec<OriginForecast>, Self)> {
        let mut done = Vec::new();
        let has_content = path.metadata().map(|m| m.len() > 0).unwrap_or(false);
        if has_content {
            let existing = read_file(path, true)?;
            manifest.check_compatible(&existing.manifest)?;
            done = existing.records;
        }
        let base = ForecastSet {
            manifest: manifest.clone(),
            records: done,
            failures: Vec::new(),
        };
        store_forecasts(&base, path)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok((
            base.records,
            Self {
                file: BufWriter::new(file),
                student: manifest.student(),
            },
        ))
    }

    pub fn append(&mut self, rec: &OriginForecast) -> Result<()> {
        self.file.write_all(&encode_record(rec, self.student)?)?;
        self.file.flush()?;
        Ok(())
    }

    pub fn append_failure(&mut self, f: &OriginFailure) -> Result<()> {
        self.file.write_all(&encode_failure(f))?;
        self.file.flush()?;
        Ok(())
    }
}
