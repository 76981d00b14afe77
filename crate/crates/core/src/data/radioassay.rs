//! Radioassay activities per component, in mBq/kg.
//!
//! CSV columns `component, isotope, activity`; the activity is `v ± s`
//! (also `v +/- s`) for a measurement or `<u` for a 90% C.L. upper limit.

use std::path::Path;

use serde::Serialize;

use crate::data::nuclear::NuclearDb;
use crate::error::{read_to_string, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActivityKind {
    Measured { value: f64, sigma: f64 },
    Limit { upper90: f64 },
}

impl ActivityKind {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.trim().parse::<f64>().map_err(|_| format!("malformed number '{}'", t.trim()))
        };
        if let Some(u) = s.strip_prefix('<') {
            let upper90 = num(u)?;
            if !(upper90 > 0.0) || !upper90.is_finite() {
                return Err(format!("upper limit must be > 0, got '{s}'"));
            }
            return Ok(ActivityKind::Limit { upper90 });
        }
        let (v, e) = s
            .split_once('±')
            .or_else(|| s.split_once("+/-"))
            .ok_or_else(|| format!("malformed activity '{s}'; expected 'v ± s' or '<u'"))?;
        let (value, sigma) = (num(v)?, num(e)?);
        if !(value > 0.0) || !(sigma >= 0.0) || !value.is_finite() || !sigma.is_finite() {
            return Err(format!("activity needs value > 0 and sigma >= 0, got '{s}'"));
        }
        Ok(ActivityKind::Measured { value, sigma })
    }

    /// Value used for sampling and normalization: the measurement or the limit.
    pub fn nominal(&self) -> f64 {
        match *self {
            ActivityKind::Measured { value, .. } => value,
            ActivityKind::Limit { upper90 } => upper90,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, ActivityKind::Limit { .. })
    }
}

impl std::fmt::Display for ActivityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActivityKind::Measured { value, sigma } => write!(f, "{value} ± {sigma}"),
            ActivityKind::Limit { upper90 } => write!(f, "<{upper90}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActivityEntry {
    pub component: String,
    pub isotope: String,
    /// mBq/kg.
    pub activity: ActivityKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadioassayTable {
    pub entries: Vec<ActivityEntry>,
}

impl RadioassayTable {
    pub fn for_component<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a ActivityEntry> + 'a {
        self.entries.iter().filter(move |e| e.component == id)
    }

    pub fn get(&self, component: &str, isotope: &str) -> Option<&ActivityEntry> {
        self.entries.iter().find(|e| e.component == component && e.isotope == isotope)
    }
}

#[derive(serde::Deserialize)]
struct RawRow {
    component: String,
    isotope: String,
    activity: String,
}

/// Parses radioassay CSV text. Component ids must appear in `components`
/// and isotope names must be known emitters of `nuclear`.
pub fn parse_radioassay(text: &str, path: &str, components: &[&str], nuclear: &NuclearDb) -> Result<RadioassayTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut t = RadioassayTable::default();
    let headers = rdr.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: RawRow = rec.deserialize(Some(&headers)).map_err(|e| Error::parse(path, line, e.to_string()))?;
        if !components.contains(&row.component.as_str()) {
            return Err(Error::parse(path, line, format!("unknown component id '{}'", row.component)));
        }
        if !nuclear.is_known(&row.isotope) {
            return Err(Error::parse(path, line, format!("unknown isotope name '{}'", row.isotope)));
        }
        let activity = ActivityKind::parse(&row.activity).map_err(|m| Error::parse(path, line, m))?;
        if t.get(&row.component, &row.isotope).is_some() {
            return Err(Error::parse(path, line, format!("duplicate entry {} / {}", row.component, row.isotope)));
        }
        t.entries.push(ActivityEntry { component: row.component, isotope: row.isotope, activity });
    }
    Ok(t)
}

pub fn load_radioassay(path: &Path, components: &[&str], nuclear: &NuclearDb) -> Result<RadioassayTable> {
    parse_radioassay(&read_to_string(path)?, &path.display().to_string(), components, nuclear)
}
