//! Price series, drawdowns and drawdown periods.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::basis::fmt_f64;
use crate::error::{Error, Result};

/// Column chosen by header name or by zero-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    /// Digits select by position, anything else by name.
    pub fn parse(s: &str) -> Column {
        match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        }
    }

    fn locate(&self, headers: &csv::StringRecord) -> Result<usize> {
        match self {
            Column::Index(i) if *i < headers.len() => Ok(*i),
            Column::Index(i) => Err(Error::InvalidInput(format!("column {i} out of range"))),
            Column::Name(n) => headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(n.trim()))
                .ok_or_else(|| Error::InvalidInput(format!("no column named '{n}'"))),
        }
    }
}

pub const DEFAULT_DATE_COLUMN: &str = "Date";
pub const DEFAULT_PRICE_COLUMN: &str = "Adj Close";

#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    /// Time keys as they appeared in the input.
    pub labels: Vec<String>,
    pub price: Vec<f64>,
}

impl PriceSeries {
    /// Series indexed `0..n`.
    pub fn from_prices(price: Vec<f64>) -> Result<Self> {
        check_prices(&price)?;
        let labels = (0..price.len()).map(|i| i.to_string()).collect();
        Ok(PriceSeries { labels, price })
    }

    pub fn len(&self) -> usize {
        self.price.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price.is_empty()
    }
}

fn check_prices(price: &[f64]) -> Result<()> {
    if price.is_empty() {
        return Err(Error::InvalidInput("empty price series".into()));
    }
    match price.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        Some(i) => Err(Error::InvalidInput(format!("price {} at position {i} is not positive", price[i]))),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
enum Key {
    Date(NaiveDate),
    Number(f64),
}

fn parse_key(s: &str) -> Option<Key> {
    let s = s.trim();
    // timestamps keep only their date part
    let day = s.split(['T', ' ']).next().unwrap_or(s);
    for fmt in ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%Y%m%d"] {
        if let Ok(d) = NaiveDate::parse_from_str(day, fmt) {
            if fmt != "%Y%m%d" || day.len() == 8 {
                return Some(Key::Date(d));
            }
        }
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Key::Number)
}

/// Read a comma-separated table with a header row. Rows are sorted by their
/// time key; repeated keys are rejected.
pub fn read_prices<R: Read>(reader: R, date: &Column, price: &Column) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    let (di, pi) = (date.locate(&headers)?, price.locate(&headers)?);
    let mut rows: Vec<(Key, String, f64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let field = |k: usize| rec.get(k).map(str::trim).unwrap_or("");
        let label = field(di).to_string();
        let key = parse_key(&label)
            .ok_or_else(|| Error::Parse { line, msg: format!("unreadable time key '{label}'") })?;
        let raw = field(pi);
        let p: f64 = raw
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("price '{raw}' is not a number") })?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Parse { line, msg: format!("price {p} is not positive") });
        }
        if let Some((prev, _, _)) = rows.first() {
            if std::mem::discriminant(prev) != std::mem::discriminant(&key) {
                return Err(Error::Parse { line, msg: "mixed date and numeric time keys".into() });
            }
        }
        rows.push((key, label, p));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no price rows".into()));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite keys"));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidInput(format!("duplicate time key '{}'", w[1].1)));
    }
    let (labels, price) = rows.into_iter().map(|(_, l, p)| (l, p)).unzip();
    Ok(PriceSeries { labels, price })
}

pub fn load_prices(path: &Path, date: &Column, price: &Column) -> Result<PriceSeries> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_prices(std::io::BufReader::new(f), date, price)
}

/// `d_t = (max_{i <= t} p_i - p_t) / max_{i <= t} p_i`.
pub fn drawdown_series(price: &[f64]) -> Result<Vec<f64>> {
    check_prices(price)?;
    let mut peak = f64::NEG_INFINITY;
    Ok(price
        .iter()
        .map(|&p| {
            peak = peak.max(p);
            (peak - p) / peak
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrawdownRecord {
    /// Index of the zero that opens the period.
    pub start: usize,
    /// Index of the zero that closes it, or the last index when open-ended.
    pub end: usize,
    pub max_drawdown: f64,
    pub log_drawdown: f64,
    /// The series ends before the drawdown recovers.
    pub open_ended: bool,
}

/// Maximal runs of positive drawdown bracketed by zeros.
pub fn drawdown_periods(d: &[f64]) -> Vec<DrawdownRecord> {
    let mut out = Vec::new();
    let mut open: Option<(usize, f64)> = None;
    for (t, &v) in d.iter().enumerate() {
        match open {
            None if v > 0.0 => open = Some((t.saturating_sub(1), v)),
            Some((s, m)) if v > 0.0 => open = Some((s, m.max(v))),
            Some((s, m)) => {
                out.push(record(s, t, m, false));
                open = None;
            }
            None => {}
        }
    }
    if let Some((s, m)) = open {
        out.push(record(s, d.len() - 1, m, true));
    }
    out
}

fn record(start: usize, end: usize, m: f64, open_ended: bool) -> DrawdownRecord {
    DrawdownRecord { start, end, max_drawdown: m, log_drawdown: m.ln(), open_ended }
}

/// Values to fit: log or raw maxima, optionally with the open-ended period.
pub fn fit_values(records: &[DrawdownRecord], log: bool, include_open: bool) -> Vec<f64> {
    records
        .iter()
        .filter(|r| include_open || !r.open_ended)
        .map(|r| if log { r.log_drawdown } else { r.max_drawdown })
        .collect()
}

/// `start,end,max_drawdown,log_drawdown,open_ended`, with time labels when
/// a series is given and indices otherwise.
pub fn records_to_csv(records: &[DrawdownRecord], series: Option<&PriceSeries>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["start", "end", "max_drawdown", "log_drawdown", "open_ended"]).map_err(csv_err)?;
    for r in records {
        let at = |i: usize| series.map_or_else(|| i.to_string(), |s| s.labels[i].clone());
        w.write_record([
            at(r.start),
            at(r.end),
            fmt_f64(r.max_drawdown),
            fmt_f64(r.log_drawdown),
            r.open_ended.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_series() {
        let d = drawdown_series(&[100.0, 90.0, 110.0, 99.0, 121.0]).unwrap();
        let want = [0.0, 0.1, 0.0, 0.1, 0.0];
        assert!(d.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15));
        let r = drawdown_periods(&d);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].start, r[0].end, r[1].start, r[1].end), (0, 2, 2, 4));
        assert!(r.iter().all(|r| (r.max_drawdown - 0.1).abs() < 1e-15 && !r.open_ended));
    }

    #[test]
    fn trailing_run_is_open() {
        let r = drawdown_periods(&[0.0, 0.05, 0.2, 0.1]);
        assert_eq!(r.len(), 1);
        assert!(r[0].open_ended && r[0].end == 3 && r[0].max_drawdown == 0.2);
        assert!(fit_values(&r, true, false).is_empty());
    }

    #[test]
    fn reads_sorts_and_rejects() {
        let text = "Date,Close,Adj Close\n2020-01-03,1,3\n2020-01-01,1,1\n2020-01-02,1,2\n";
        let s = read_prices(text.as_bytes(), &Column::parse("Date"), &Column::parse("Adj Close")).unwrap();
        assert_eq!(s.price, vec![1.0, 2.0, 3.0]);
        let bad = "Date,Adj Close\n2020-01-01,1\n2020-01-02,abc\n";
        match read_prices(bad.as_bytes(), &Column::Index(0), &Column::Index(1)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let dup = "Date,Adj Close\n2020-01-01,1\n2020-01-01,2\n";
        assert!(read_prices(dup.as_bytes(), &Column::Index(0), &Column::Index(1)).is_err());
    }
}
