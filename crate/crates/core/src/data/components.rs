//! Components whose bulk activity is simulated: mass, placed volumes, and
//! the radioassay row that applies to them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSpec {
    pub id: String,
    pub mass_kg: f64,
    /// Geometry volumes that make up the component.
    pub volumes: Vec<String>,
    /// Radioassay component id whose activities apply (usually `id`).
    pub assay: String,
    /// Mass derived from stated dimensions rather than weighed.
    pub estimate: bool,
    pub description: String,
}

#[derive(Deserialize)]
struct RawRow {
    id: String,
    mass_kg: f64,
    volumes: String,
    assay: String,
    estimate: String,
    description: String,
}

pub fn parse_components(text: &str, path: &str) -> Result<Vec<ComponentSpec>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out: Vec<ComponentSpec> = Vec::new();
    let headers = rdr.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let r: RawRow = rec.deserialize(Some(&headers)).map_err(|e| Error::parse(path, line, e.to_string()))?;
        if !(r.mass_kg > 0.0) || !r.mass_kg.is_finite() {
            return Err(Error::parse(path, line, format!("component '{}': mass must be > 0", r.id)));
        }
        let volumes: Vec<String> = r.volumes.split('+').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if volumes.is_empty() {
            return Err(Error::parse(path, line, format!("component '{}' lists no volumes", r.id)));
        }
        let estimate = match r.estimate.as_str() {
            "yes" | "true" => true,
            "no" | "false" => false,
            o => return Err(Error::parse(path, line, format!("estimate must be yes/no, got '{o}'"))),
        };
        if out.iter().any(|c| c.id == r.id) {
            return Err(Error::parse(path, line, format!("duplicate component id '{}'", r.id)));
        }
        out.push(ComponentSpec { id: r.id, mass_kg: r.mass_kg, volumes, assay: r.assay, estimate, description: r.description });
    }
    Ok(out)
}

pub fn load_components(path: &Path) -> Result<Vec<ComponentSpec>> {
    parse_components(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        let t = "id,mass_kg,volumes,assay,estimate,description\nA,0.007,pcb,A,no,PCB\nE,0.005,cable_a+cable_b,E,yes,\"cables, lower\"\n";
        let c = parse_components(t, "c").unwrap();
        assert_eq!(c[1].volumes, vec!["cable_a", "cable_b"]);
        assert!(c[1].estimate);
        assert_eq!(c[1].description, "cables, lower");
    }

    #[test]
    fn rejects_zero_mass() {
        let t = "id,mass_kg,volumes,assay,estimate,description\nA,0,pcb,A,no,x\n";
        assert!(parse_components(t, "c").unwrap_err().to_string().contains("mass must be > 0"));
    }
}
