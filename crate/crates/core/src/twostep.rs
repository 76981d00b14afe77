//! Two-step variance reduction for photons.
//!
//! Pass one emits from the outer surface S1 and records every inward
//! crossing of the inner surface S2 (energy, angle to the local inward
//! normal, facet). Pass two emits from S2 according to the recorded
//! distributions and stops photons when they leave S2. The S2 flux is
//! `n_cross / (A2 · t1)` with `t1 = N1 / (A1 · flux1)`, and pass two has
//! `t_eq = N2 / (A2 · flux2)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Facet, SurfaceDef, Vec3};
use crate::sources::{BinnedSampler, RecordedReplay, ReplayLaw, ReplayMode, Species};
use crate::transport::CrossingRecord;

/// Uniform binning on `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBins {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl UniformBins {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.bins as f64).collect()
    }

    /// Clamped bin index.
    #[inline]
    pub fn index(&self, x: f64) -> usize {
        let i = ((x - self.lo) / (self.hi - self.lo) * self.bins as f64).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.bins - 1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepBinning {
    pub energy: UniformBins,
    pub theta: UniformBins,
}

impl Default for TwoStepBinning {
    /// 1 keV up to 10 MeV; 1° up to π/2.
    fn default() -> Self {
        TwoStepBinning {
            energy: UniformBins { lo: 0.0, hi: 10_000.0, bins: 10_000 },
            theta: UniformBins { lo: 0.0, hi: std::f64::consts::FRAC_PI_2, bins: 90 },
        }
    }
}

/// First-pass bookkeeping needed to normalize pass two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n_gen1: u64,
    /// cm².
    pub area1: f64,
    /// 1/cm²/s.
    pub flux1: f64,
    pub flux1_sigma: f64,
    pub surface2: SurfaceDef<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingDistributions {
    pub binning: TwoStepBinning,
    pub energy: Vec<u64>,
    pub theta: Vec<u64>,
    /// `ie * n_theta + it`.
    pub joint: Vec<u64>,
    /// Per facet (lateral, top, bottom) energy and angle counts.
    pub facet_energy: [Vec<u64>; 3],
    pub facet_theta: [Vec<u64>; 3],
    pub n_crossings: u64,
    pub provenance: Provenance,
}

fn facet_index(f: Facet) -> usize {
    Facet::ALL.iter().position(|x| *x == f).expect("facet listed")
}

pub fn build_crossing_distributions(
    records: &[CrossingRecord],
    binning: &TwoStepBinning,
    provenance: Provenance,
) -> Result<CrossingDistributions> {
    if records.is_empty() {
        return Err(Error::Starved);
    }
    let (ne, nt) = (binning.energy.bins, binning.theta.bins);
    let mut d = CrossingDistributions {
        binning: binning.clone(),
        energy: vec![0; ne],
        theta: vec![0; nt],
        joint: vec![0; ne * nt],
        facet_energy: [vec![0; ne], vec![0; ne], vec![0; ne]],
        facet_theta: [vec![0; nt], vec![0; nt], vec![0; nt]],
        n_crossings: 0,
        provenance,
    };
    for r in records {
        let ie = binning.energy.index(r.energy);
        let it = binning.theta.index(r.theta);
        let f = facet_index(r.facet);
        d.energy[ie] += 1;
        d.theta[it] += 1;
        d.joint[ie * nt + it] += 1;
        d.facet_energy[f][ie] += 1;
        d.facet_theta[f][it] += 1;
        d.n_crossings += 1;
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flux2 {
    /// 1/cm²/s.
    pub value: f64,
    /// Poisson sigma from the crossing count.
    pub sigma: f64,
    /// Propagated from the flux1 uncertainty.
    pub sys: f64,
}

/// First-pass equivalent time, seconds.
pub fn first_pass_time(p: &Provenance) -> f64 {
    p.n_gen1 as f64 / (p.area1 * p.flux1)
}

pub fn flux2_from_counts(n_crossings: u64, p: &Provenance) -> Flux2 {
    let t1 = first_pass_time(p);
    let a2 = p.surface2.area();
    let value = n_crossings as f64 / (a2 * t1);
    let rel = if p.flux1 > 0.0 { p.flux1_sigma / p.flux1 } else { 0.0 };
    Flux2 { value, sigma: (n_crossings as f64).sqrt() / (a2 * t1), sys: value * rel }
}

pub fn compute_flux2(d: &CrossingDistributions) -> Flux2 {
    flux2_from_counts(d.n_crossings, &d.provenance)
}

/// Pass-two equivalent time `n2 / (A2 · flux2)`.
pub fn second_pass_time(n2: u64, area2: f64, flux2: f64) -> f64 {
    n2 as f64 / (area2 * flux2)
}

fn sampler(edges: Vec<f64>, counts: &[u64]) -> Result<BinnedSampler> {
    BinnedSampler::new(edges, counts.iter().map(|&c| c as f64).collect())
}

/// Replay source for pass two.
pub fn replay_source(d: &CrossingDistributions, mode: ReplayMode) -> Result<RecordedReplay> {
    if d.n_crossings == 0 {
        return Err(Error::Starved);
    }
    let ee = d.binning.energy.edges();
    let te = d.binning.theta.edges();
    let law = match mode {
        ReplayMode::Marginal => ReplayLaw::Marginal { energy: sampler(ee, &d.energy)?, theta: sampler(te, &d.theta)? },
        ReplayMode::Joint => {
            let cells = BinnedSampler::new(
                (0..=d.joint.len()).map(|i| i as f64).collect(),
                d.joint.iter().map(|&c| c as f64).collect(),
            )?;
            ReplayLaw::Joint { energy_edges: ee, theta_edges: te, cells }
        }
        ReplayMode::Facet => {
            let counts: Vec<f64> = (0..3).map(|f| d.facet_energy[f].iter().sum::<u64>() as f64).collect();
            let facets = BinnedSampler::new(vec![0.0, 1.0, 2.0, 3.0], counts.clone())?;
            let per_facet = (0..3)
                .map(|f| {
                    if counts[f] > 0.0 {
                        Ok(Some((sampler(ee.clone(), &d.facet_energy[f])?, sampler(te.clone(), &d.facet_theta[f])?)))
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            ReplayLaw::Facet { facets, per_facet }
        }
    };
    let f2 = compute_flux2(d);
    Ok(RecordedReplay {
        species: Species::Gamma,
        surface: d.provenance.surface2.clone(),
        law,
        flux2: f2.value,
        flux2_sigma: f2.sys,
    })
}

impl CrossingDistributions {
    /// Text artifact: provenance block, then sparse `key index count` rows.
    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let s = &p.surface2;
        let b = &self.binning;
        let mut o = String::new();
        o.push_str("# S2 crossing distributions\n");
        let _ = writeln!(o, "n_gen1 {}", p.n_gen1);
        let _ = writeln!(o, "area1 {}", p.area1);
        let _ = writeln!(o, "flux1 {}", p.flux1);
        let _ = writeln!(o, "flux1_sigma {}", p.flux1_sigma);
        let _ = writeln!(o, "surface2 {} {} {} {} {} {}", s.name, s.radius, s.half_height, s.center.x, s.center.y, s.center.z);
        let _ = writeln!(o, "energy_bins {} {} {}", b.energy.lo, b.energy.hi, b.energy.bins);
        let _ = writeln!(o, "theta_bins {} {} {}", b.theta.lo, b.theta.hi, b.theta.bins);
        let _ = writeln!(o, "n_crossings {}", self.n_crossings);
        let mut rows = |key: &str, v: &[u64]| {
            for (i, c) in v.iter().enumerate().filter(|(_, c)| **c > 0) {
                let _ = writeln!(o, "{key} {i} {c}");
            }
        };
        rows("energy", &self.energy);
        rows("theta", &self.theta);
        rows("joint", &self.joint);
        for f in Facet::ALL {
            rows(&format!("energy_{}", f.name()), &self.facet_energy[facet_index(f)]);
            rows(&format!("theta_{}", f.name()), &self.facet_theta[facet_index(f)]);
        }
        o
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let err = |line: usize, m: &str| Error::parse(path, line, m);
        let mut kv: std::collections::HashMap<&str, (usize, Vec<&str>)> = Default::default();
        let mut rows: Vec<(usize, &str, usize, u64)> = Vec::new();
        for (i, l) in text.lines().enumerate() {
            let l = l.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let mut it = l.split_whitespace();
            let key = it.next().expect("non-empty");
            let rest: Vec<&str> = it.collect();
            let is_row = key.starts_with("energy") && key != "energy_bins" || key.starts_with("theta") && key != "theta_bins" || key == "joint";
            if is_row {
                if rest.len() != 2 {
                    return Err(err(i + 1, "expected '<histogram> <bin> <count>'"));
                }
                let bin = rest[0].parse().map_err(|_| err(i + 1, "bad bin index"))?;
                let count = rest[1].parse().map_err(|_| err(i + 1, "bad count"))?;
                rows.push((i + 1, key, bin, count));
            } else {
                kv.insert(key, (i + 1, rest));
            }
        }
        let field = |k: &str, n: usize| -> Result<(usize, Vec<&str>)> {
            let (line, v) = kv.get(k).cloned().ok_or_else(|| err(0, &format!("missing '{k}'")))?;
            if v.len() != n {
                return Err(err(line, &format!("'{k}' expects {n} values")));
            }
            Ok((line, v))
        };
        let num = |k: &str, i: usize, n: usize| -> Result<f64> {
            let (line, v) = field(k, n)?;
            v[i].parse::<f64>().map_err(|_| err(line, &format!("bad number in '{k}'")))
        };
        let bins = |k: &str| -> Result<UniformBins> {
            let (line, v) = field(k, 3)?;
            let lo = num(k, 0, 3)?;
            let hi = num(k, 1, 3)?;
            let bins: usize = v[2].parse().map_err(|_| err(line, "bad bin count"))?;
            if !(hi > lo) || bins == 0 {
                return Err(err(line, "invalid binning"));
            }
            Ok(UniformBins { lo, hi, bins })
        };
        let (_, s2) = field("surface2", 6)?;
        let provenance = Provenance {
            n_gen1: num("n_gen1", 0, 1)? as u64,
            area1: num("area1", 0, 1)?,
            flux1: num("flux1", 0, 1)?,
            flux1_sigma: num("flux1_sigma", 0, 1)?,
            surface2: SurfaceDef {
                name: s2[0].to_string(),
                radius: num("surface2", 1, 6)?,
                half_height: num("surface2", 2, 6)?,
                center: Vec3::new(num("surface2", 3, 6)?, num("surface2", 4, 6)?, num("surface2", 5, 6)?),
            },
        };
        let binning = TwoStepBinning { energy: bins("energy_bins")?, theta: bins("theta_bins")? };
        let (ne, nt) = (binning.energy.bins, binning.theta.bins);
        let mut d = CrossingDistributions {
            binning,
            energy: vec![0; ne],
            theta: vec![0; nt],
            joint: vec![0; ne * nt],
            facet_energy: [vec![0; ne], vec![0; ne], vec![0; ne]],
            facet_theta: [vec![0; nt], vec![0; nt], vec![0; nt]],
            n_crossings: num("n_crossings", 0, 1)? as u64,
            provenance,
        };
        for (line, key, bin, count) in rows {
            let target: &mut Vec<u64> = match key {
                "energy" => &mut d.energy,
                "theta" => &mut d.theta,
                "joint" => &mut d.joint,
                k => {
                    let (kind, facet) = k.split_once('_').ok_or_else(|| err(line, "unknown histogram"))?;
                    let f = Facet::from_name(facet).ok_or_else(|| err(line, "unknown facet"))?;
                    match kind {
                        "energy" => &mut d.facet_energy[facet_index(f)],
                        "theta" => &mut d.facet_theta[facet_index(f)],
                        _ => return Err(err(line, "unknown histogram")),
                    }
                }
            };
            *target.get_mut(bin).ok_or_else(|| err(line, "bin index out of range"))? = count;
        }
        for (name, v) in [("energy", &d.energy), ("theta", &d.theta), ("joint", &d.joint)] {
            if v.iter().sum::<u64>() != d.n_crossings {
                return Err(Error::Data(format!("{path}: {name} histogram total differs from n_crossings")));
            }
        }
        Ok(d)
    }
}
