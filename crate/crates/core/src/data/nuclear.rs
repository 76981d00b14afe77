//! Decay schemes and equilibrium chains.
//!
//! `nuclides/<name>.txt` lists typed emission lines (`gamma|beta|alpha`,
//! energy keV, intensity per decay). Alpha and beta rows are mutually
//! exclusive decay branches; gamma lines fire independently. Beta energies
//! follow the allowed shape N(T) ∝ p·E·(Q−T)² without the Fermi function.
//!
//! `chains.txt` maps a chain name to members decaying together per parent
//! decay; `member:w` means `w` decays per parent decay.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;

use crate::data::table::{content_lines, parse_table};
use crate::error::{read_to_string, Error, Result};
use crate::geometry::Vec3;
use crate::sources::Species;
use crate::transport::physics::ELECTRON_MASS_KEV;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub energy: f64,
    pub intensity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaBranch {
    pub endpoint: f64,
    pub intensity: f64,
    /// Maximum of the unnormalized shape on [0, endpoint].
    shape_max: f64,
}

/// Unnormalized allowed beta shape at kinetic energy `t`.
pub fn beta_shape(t: f64, q: f64) -> f64 {
    if t <= 0.0 || t >= q {
        return 0.0;
    }
    let e = t + ELECTRON_MASS_KEV;
    let p = (t * (t + 2.0 * ELECTRON_MASS_KEV)).sqrt();
    p * e * (q - t) * (q - t)
}

fn shape_max(q: f64) -> f64 {
    // Golden-section search; the shape is unimodal on (0, q).
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, q);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if beta_shape(c, q) > beta_shape(d, q) {
            b = d;
        } else {
            a = c;
        }
    }
    beta_shape(0.5 * (a + b), q)
}

impl BetaBranch {
    pub fn new(endpoint: f64, intensity: f64) -> Self {
        BetaBranch { endpoint, intensity, shape_max: shape_max(endpoint) }
    }

    pub fn sample_energy<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let fmax = self.shape_max * (1.0 + 1e-9);
        loop {
            let t = self.endpoint * rng.gen::<f64>();
            if rng.gen::<f64>() * fmax < beta_shape(t, self.endpoint) {
                return t;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayScheme {
    pub name: String,
    pub gammas: Vec<Line>,
    pub betas: Vec<BetaBranch>,
    pub alphas: Vec<Line>,
}

/// One particle produced by a decay, before placement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Emission {
    pub species: Species,
    pub energy: f64,
    pub direction: Vec3<f64>,
}

impl DecayScheme {
    pub fn empty(name: &str) -> Self {
        DecayScheme { name: name.into(), gammas: vec![], betas: vec![], alphas: vec![] }
    }

    pub fn parse(name: &str, text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        if t.header.len() != 3 {
            return Err(Error::parse(path, 1, "expected header: type energy_keV intensity"));
        }
        let mut s = DecayScheme::empty(name);
        for r in &t.rows {
            let energy = t.number(r, 1)?;
            let intensity = t.number(r, 2)?;
            if energy <= 0.0 {
                return Err(Error::parse(path, r.line, "energy must be > 0"));
            }
            if !(0.0..=1.0).contains(&intensity) {
                return Err(Error::parse(path, r.line, "intensity outside [0, 1]"));
            }
            match r.fields[0].as_str() {
                "gamma" => s.gammas.push(Line { energy, intensity }),
                "beta" => s.betas.push(BetaBranch::new(energy, intensity)),
                "alpha" => s.alphas.push(Line { energy, intensity }),
                other => return Err(Error::parse(path, r.line, format!("unknown emission type '{other}'"))),
            }
        }
        let branching = s.branching_sum();
        if branching > 1.0 + 1e-9 {
            return Err(Error::Data(format!("{path}: alpha+beta intensities sum to {branching} > 1")));
        }
        Ok(s)
    }

    pub fn branching_sum(&self) -> f64 {
        self.alphas.iter().map(|l| l.intensity).sum::<f64>() + self.betas.iter().map(|b| b.intensity).sum::<f64>()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("type energy_keV intensity\n");
        for (kind, e, i) in self.rows() {
            s.push_str(&format!("{kind} {e} {i}\n"));
        }
        s
    }

    fn rows(&self) -> Vec<(&'static str, f64, f64)> {
        let mut v = Vec::new();
        v.extend(self.gammas.iter().map(|l| ("gamma", l.energy, l.intensity)));
        v.extend(self.betas.iter().map(|b| ("beta", b.endpoint, b.intensity)));
        v.extend(self.alphas.iter().map(|l| ("alpha", l.energy, l.intensity)));
        v
    }
}

/// Particles from one decay of `scheme`, appended to `out`. Directions are
/// isotropic; an empty scheme produces nothing.
pub fn decay_emissions<R: Rng + ?Sized>(scheme: &DecayScheme, rng: &mut R, out: &mut Vec<Emission>) {
    let iso = |rng: &mut R| Vec3::isotropic(rng.gen::<f64>(), rng.gen::<f64>());
    for g in &scheme.gammas {
        if rng.gen::<f64>() < g.intensity {
            let direction = iso(rng);
            out.push(Emission { species: Species::Gamma, energy: g.energy, direction });
        }
    }
    if scheme.alphas.is_empty() && scheme.betas.is_empty() {
        return;
    }
    let mut u = rng.gen::<f64>();
    for a in &scheme.alphas {
        if u < a.intensity {
            let direction = iso(rng);
            out.push(Emission { species: Species::Alpha, energy: a.energy, direction });
            return;
        }
        u -= a.intensity;
    }
    for b in &scheme.betas {
        if u < b.intensity {
            let energy = b.sample_energy(rng);
            let direction = iso(rng);
            out.push(Emission { species: Species::Electron, energy, direction });
            return;
        }
        u -= b.intensity;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub name: String,
    /// Member scheme names with decays per parent decay.
    pub members: Vec<(String, f64)>,
}

pub fn parse_chains(text: &str, path: &str) -> Result<Vec<Chain>> {
    let mut lines = content_lines(text);
    if lines.next().is_none() {
        return Err(Error::parse(path, 0, "missing header line"));
    }
    let mut out: Vec<Chain> = Vec::new();
    for (line, l) in lines {
        let (name, rest) = l
            .split_once(':')
            .ok_or_else(|| Error::parse(path, line, "expected '<chain name>: <members>'"))?;
        let name = name.trim().to_string();
        let mut members = Vec::new();
        for tok in rest.split_whitespace() {
            let (m, w) = match tok.split_once(':') {
                Some((m, w)) => {
                    let w: f64 = w
                        .parse()
                        .ok()
                        .filter(|w: &f64| *w > 0.0 && *w <= 1.0)
                        .ok_or_else(|| Error::parse(path, line, format!("bad branch weight in '{tok}'")))?;
                    (m, w)
                }
                None => (tok, 1.0),
            };
            members.push((m.to_string(), w));
        }
        if members.is_empty() {
            return Err(Error::parse(path, line, format!("chain '{name}' has no members")));
        }
        if out.iter().any(|c| c.name == name) {
            return Err(Error::parse(path, line, format!("duplicate chain '{name}'")));
        }
        out.push(Chain { name, members });
    }
    Ok(out)
}

/// Schemes to decay for one parent decay, with the probability of each.
pub type Emitter = Vec<(usize, f64)>;

#[derive(Clone, Debug, Default)]
pub struct NuclearDb {
    schemes: Vec<DecayScheme>,
    index: HashMap<String, usize>,
    chains: Vec<Chain>,
}

pub fn load_nuclear(dir: &Path) -> Result<NuclearDb> {
    let ndir = dir.join("nuclides");
    let mut names: Vec<_> = std::fs::read_dir(&ndir)
        .map_err(|e| Error::io(&ndir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    names.sort();
    let mut db = NuclearDb::default();
    for p in names {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let s = DecayScheme::parse(&name, &read_to_string(&p)?, &p.display().to_string())?;
        db.add_scheme(s)?;
    }
    let cpath = dir.join("chains.txt");
    for c in parse_chains(&read_to_string(&cpath)?, &cpath.display().to_string())? {
        db.add_chain(c)?;
    }
    Ok(db)
}

impl NuclearDb {
    pub fn add_scheme(&mut self, s: DecayScheme) -> Result<()> {
        if self.index.contains_key(&s.name) {
            return Err(Error::Data(format!("duplicate decay scheme '{}'", s.name)));
        }
        self.index.insert(s.name.clone(), self.schemes.len());
        self.schemes.push(s);
        Ok(())
    }

    pub fn add_chain(&mut self, c: Chain) -> Result<()> {
        for (m, _) in &c.members {
            if !self.index.contains_key(m) {
                return Err(Error::Data(format!("chain '{}': unknown member '{m}'", c.name)));
            }
        }
        if self.index.contains_key(&c.name) || self.chains.iter().any(|x| x.name == c.name) {
            return Err(Error::Data(format!("duplicate emitter name '{}'", c.name)));
        }
        self.chains.push(c);
        Ok(())
    }

    pub fn scheme(&self, name: &str) -> Option<&DecayScheme> {
        self.index.get(name).map(|&i| &self.schemes[i])
    }

    #[inline]
    pub fn scheme_by_id(&self, id: usize) -> &DecayScheme {
        &self.schemes[id]
    }

    pub fn schemes(&self) -> &[DecayScheme] {
        &self.schemes
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn chain(&self, name: &str) -> Option<&Chain> {
        self.chains.iter().find(|c| c.name == name)
    }

    pub fn is_known(&self, name: &str) -> bool {
        self.emitter(name).is_some()
    }

    /// An isotope decays alone; a chain expands to its members.
    pub fn emitter(&self, name: &str) -> Option<Emitter> {
        if let Some(&i) = self.index.get(name) {
            return Some(vec![(i, 1.0)]);
        }
        self.chain(name).map(|c| c.members.iter().map(|(m, w)| (self.index[m], *w)).collect())
    }

    /// Emissions for one parent decay. Members with weight below one (branches
    /// of the chain) decay with that probability.
    pub fn emit<R: Rng + ?Sized>(&self, emitter: &Emitter, rng: &mut R, out: &mut Vec<Emission>) {
        for &(i, w) in emitter {
            if w >= 1.0 || rng.gen::<f64>() < w {
                decay_emissions(&self.schemes[i], rng, out);
            }
        }
    }
}
