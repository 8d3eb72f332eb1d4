//! Daily prices from a CoinGecko-style `market_chart` response:
//! `{"prices": [[unix_ms, price], ...]}`.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use bvarcast::market_data::PriceSeries;
use chrono::{DateTime, NaiveDate};
use serde::Deserialize;

#[derive(Deserialize)]
struct MarketChart {
    prices: Vec<(f64, f64)>,
}

/// Keeps the last quote of each UTC day.
pub fn parse_market_chart(name: &str, json: &str) -> Result<PriceSeries> {
    let chart: MarketChart = serde_json::from_str(json).context("unexpected JSON layout")?;
    let mut daily: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for (ms, price) in chart.prices {
        let date = DateTime::from_timestamp_millis(ms as i64)
            .with_context(|| format!("bad timestamp {ms}"))?
            .date_naive();
        daily.insert(date, price);
    }
    if daily.is_empty() {
        bail!("response holds no prices");
    }
    Ok(PriceSeries::new(name, daily.into_iter().collect())?)
}

#[cfg(feature = "fetch")]
pub fn download(coin: &str, from: NaiveDate, to: NaiveDate) -> Result<String> {
    let ts = |d: NaiveDate| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp();
    let url = format!(
        "https://api.coingecko.com/api/v3/coins/{coin}/market_chart/range?vs_currency=usd&from={}&to={}",
        ts(from),
        ts(to) + 86_400
    );
    log::info!("GET {url}");
    let body = reqwest::blocking::get(&url)?.error_for_status()?.text()?;
    Ok(body)
}

#[cfg(not(feature = "fetch"))]
pub fn download(_coin: &str, _from: NaiveDate, _to: NaiveDate) -> Result<String> {
    bail!("this build has no network client; rebuild with `--features fetch`")
}
