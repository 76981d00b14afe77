//! Materials and their per-species interaction tables.
//!
//! Layout of a data directory:
//! `materials.txt` (name, density g/cm³, neutron A, note) and one file per
//! material in each of `photon/`, `electron/`, `alpha/`, `muon/`, `neutron/`.
//! Stopping powers and ranges are stored in mass units (keV cm²/g, g/cm²).

use std::collections::HashMap;
use std::path::Path;

use crate::data::table::{content_lines, parse_table, render, Curve, TextTable};
use crate::error::{read_to_string, Error, Result};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Material {
    pub name: String,
    /// g/cm³
    pub density: f64,
    /// Mass number of the nucleus dominating neutron elastic scattering.
    pub neutron_a: f64,
    pub note: String,
}

pub fn parse_materials(text: &str, path: &str) -> Result<Vec<Material>> {
    let mut lines = content_lines(text);
    if lines.next().is_none() {
        return Err(Error::Data(format!("{path}: no materials defined")));
    }
    let mut out: Vec<Material> = Vec::new();
    for (line, l) in lines {
        let mut it = l.splitn(4, char::is_whitespace).filter(|s| !s.is_empty());
        let (Some(name), Some(rho), Some(a)) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, line, "expected: name density neutron_A [note]"));
        };
        let note = it.next().unwrap_or("").trim().to_string();
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("malformed {what} '{s}'")))
        };
        let density = num(rho, "density")?;
        let neutron_a = num(a, "neutron_A")?;
        if density <= 0.0 {
            return Err(Error::parse(path, line, "density must be > 0"));
        }
        if neutron_a < 1.0 {
            return Err(Error::parse(path, line, "neutron_A must be >= 1"));
        }
        if out.iter().any(|m| m.name == name) {
            return Err(Error::parse(path, line, format!("duplicate material name '{name}'")));
        }
        out.push(Material { name: name.to_string(), density, neutron_a, note });
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{path}: no materials defined")));
    }
    Ok(out)
}

pub fn render_materials(ms: &[Material]) -> String {
    let mut s = String::from("name density_g_cm3 neutron_A note\n");
    for m in ms {
        s.push_str(&format!("{} {} {} {}\n", m.name, m.density, m.neutron_a, m.note));
    }
    s
}

fn check_positive(t: &TextTable, col: usize, allow_zero: bool) -> Result<Vec<f64>> {
    let v = t.column(col)?;
    for (x, r) in v.iter().zip(&t.rows) {
        let bad = if allow_zero { *x < 0.0 } else { *x <= 0.0 };
        if bad {
            return Err(Error::parse(&t.path, r.line, format!("{} must be positive", t.header[col])));
        }
    }
    Ok(v)
}

fn curve(t: &TextTable, x: Vec<f64>, y: Vec<f64>) -> Result<Curve> {
    Curve::new(x, y, &t.path)
}

fn expect_columns(t: &TextTable, n: usize) -> Result<()> {
    if t.header.len() != n {
        return Err(Error::parse(&t.path, 1, format!("expected {n} columns")));
    }
    Ok(())
}

/// Photon mass attenuation with the photoelectric (absorption) share.
#[derive(Clone, Debug)]
pub struct PhotonTable {
    pub mu_rho: Curve,
    pub photo_fraction: Curve,
}

impl PhotonTable {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        expect_columns(&t, 3)?;
        let e = check_positive(&t, 0, false)?;
        let mu = check_positive(&t, 1, false)?;
        let pf = t.column(2)?;
        if let Some(r) = pf.iter().zip(&t.rows).find(|(p, _)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::parse(path, r.1.line, "photoelectric fraction outside [0, 1]"));
        }
        if e.len() < 10 || e[0] > 10.0 || e[e.len() - 1] < 10_000.0 {
            return Err(Error::Data(format!("{path}: need >= 10 rows spanning 10 keV to 10 MeV")));
        }
        Ok(PhotonTable { mu_rho: curve(&t, e.clone(), mu)?, photo_fraction: curve(&t, e, pf)? })
    }

    pub fn to_text(&self) -> String {
        let rows = (0..self.mu_rho.xs().len())
            .map(|i| vec![self.mu_rho.xs()[i], self.mu_rho.ys()[i], self.photo_fraction.ys()[i]]);
        render(&["energy_keV", "mu_rho_cm2_g", "photo_fraction"], rows)
    }
}

#[derive(Clone, Debug)]
pub struct ElectronTable {
    /// keV cm²/g
    pub dedx: Curve,
    /// g/cm²
    pub csda: Curve,
}

impl ElectronTable {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        expect_columns(&t, 3)?;
        let e = check_positive(&t, 0, false)?;
        let s = check_positive(&t, 1, false)?;
        let r = check_positive(&t, 2, false)?;
        let csda = curve(&t, e.clone(), r)?;
        if csda.ys().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("{path}: CSDA range must increase with energy")));
        }
        Ok(ElectronTable { dedx: curve(&t, e, s)?, csda })
    }

    pub fn to_text(&self) -> String {
        let rows = (0..self.dedx.xs().len())
            .map(|i| vec![self.dedx.xs()[i], self.dedx.ys()[i], self.csda.ys()[i]]);
        render(&["energy_keV", "dedx_keV_cm2_g", "csda_g_cm2"], rows)
    }
}

/// Energy versus CSDA range (g/cm²) for particles that stop in a short path.
#[derive(Clone, Debug)]
pub struct RangeTable {
    pub csda: Curve,
}

impl RangeTable {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        expect_columns(&t, 2)?;
        let e = check_positive(&t, 0, false)?;
        let r = check_positive(&t, 1, false)?;
        let csda = curve(&t, e, r)?;
        if csda.ys().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("{path}: CSDA range must increase with energy")));
        }
        Ok(RangeTable { csda })
    }

    pub fn to_text(&self) -> String {
        let rows = (0..self.csda.xs().len()).map(|i| vec![self.csda.xs()[i], self.csda.ys()[i]]);
        render(&["energy_keV", "csda_g_cm2"], rows)
    }
}

/// Mean energy loss (keV cm²/g), used for muons.
#[derive(Clone, Debug)]
pub struct DedxTable {
    pub dedx: Curve,
}

impl DedxTable {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        expect_columns(&t, 2)?;
        let e = check_positive(&t, 0, false)?;
        let s = check_positive(&t, 1, false)?;
        Ok(DedxTable { dedx: curve(&t, e, s)? })
    }

    pub fn to_text(&self) -> String {
        let rows = (0..self.dedx.xs().len()).map(|i| vec![self.dedx.xs()[i], self.dedx.ys()[i]]);
        render(&["energy_keV", "dedx_keV_cm2_g"], rows)
    }
}

/// Macroscopic elastic cross-section Σ (1/cm), interpolated linearly in ln E.
#[derive(Clone, Debug)]
pub struct NeutronTable {
    pub sigma: Curve,
    pub a: f64,
}

impl NeutronTable {
    pub fn parse(text: &str, path: &str, a: f64) -> Result<Self> {
        let t = parse_table(text, path)?;
        expect_columns(&t, 2)?;
        let e = check_positive(&t, 0, false)?;
        let s = check_positive(&t, 1, true)?;
        if a < 1.0 {
            return Err(Error::Data(format!("{path}: mass number must be >= 1")));
        }
        Ok(NeutronTable { sigma: curve(&t, e, s)?, a })
    }

    pub fn to_text(&self) -> String {
        let rows = (0..self.sigma.xs().len()).map(|i| vec![self.sigma.xs()[i], self.sigma.ys()[i]]);
        render(&["energy_keV", "sigma_per_cm"], rows)
    }
}

#[derive(Clone, Debug)]
pub struct MaterialData {
    pub material: Material,
    pub photon: PhotonTable,
    pub electron: ElectronTable,
    pub alpha: RangeTable,
    pub muon: DedxTable,
    pub neutron: NeutronTable,
}

impl MaterialData {
    pub fn density(&self) -> f64 {
        self.material.density
    }
}

#[derive(Clone, Debug, Default)]
pub struct MaterialDb {
    items: Vec<MaterialData>,
    index: HashMap<String, usize>,
}

pub const SPECIES_DIRS: [&str; 5] = ["photon", "electron", "alpha", "muon", "neutron"];

pub fn load_materials(dir: &Path) -> Result<MaterialDb> {
    let mpath = dir.join("materials.txt");
    let list = parse_materials(&read_to_string(&mpath)?, &mpath.display().to_string())?;
    let mut db = MaterialDb::default();
    for m in list {
        let read = |sub: &str| -> Result<(String, String)> {
            let p = dir.join(sub).join(format!("{}.txt", m.name));
            Ok((read_to_string(&p)?, p.display().to_string()))
        };
        let (t, p) = read("photon")?;
        let photon = PhotonTable::parse(&t, &p)?;
        let (t, p) = read("electron")?;
        let electron = ElectronTable::parse(&t, &p)?;
        let (t, p) = read("alpha")?;
        let alpha = RangeTable::parse(&t, &p)?;
        let (t, p) = read("muon")?;
        let muon = DedxTable::parse(&t, &p)?;
        let (t, p) = read("neutron")?;
        let neutron = NeutronTable::parse(&t, &p, m.neutron_a)?;
        db.insert(MaterialData { material: m, photon, electron, alpha, muon, neutron })?;
    }
    Ok(db)
}

impl MaterialDb {
    pub fn insert(&mut self, m: MaterialData) -> Result<usize> {
        if self.index.contains_key(&m.material.name) {
            return Err(Error::Data(format!("duplicate material name '{}'", m.material.name)));
        }
        let id = self.items.len();
        self.index.insert(m.material.name.clone(), id);
        self.items.push(m);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&MaterialData> {
        self.id(name).map(|i| &self.items[i])
    }

    #[inline]
    pub fn by_id(&self, id: usize) -> &MaterialData {
        &self.items[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialData> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// μ/ρ in cm²/g; no extrapolation outside the tabulated grid.
    pub fn attenuation_coefficient(&self, material: &str, energy_kev: f64) -> Result<f64> {
        let m = self
            .get(material)
            .ok_or_else(|| Error::Data(format!("unknown material '{material}'")))?;
        m.photon.mu_rho.check_range(energy_kev, "photon energy (keV)")?;
        Ok(m.photon.mu_rho.loglog(energy_kev))
    }
}
