//! Primary-particle generators. Each source pairs a sampler with the
//! normalization needed to turn hit counts into rates.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::Normalization;
use crate::data::nuclear::{Emitter, NuclearDb};
use crate::data::table::parse_table;
use crate::error::{read_to_string, Error, Result};
use crate::geometry::{Facet, GeometryModel, SurfaceDef, Vec3, VolumeId};

/// Fixed muon kinetic energy, keV.
pub const MUON_ENERGY_KEV: f64 = 4.0e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Gamma,
    Muon,
    Neutron,
    Electron,
    Alpha,
}

impl Species {
    pub fn name(self) -> &'static str {
        match self {
            Species::Gamma => "gamma",
            Species::Muon => "muon",
            Species::Neutron => "neutron",
            Species::Electron => "electron",
            Species::Alpha => "alpha",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub species: Species,
    /// Kinetic energy, keV.
    pub energy: f64,
    pub position: Vec3<f64>,
    pub direction: Vec3<f64>,
}

/// Histogram with per-bin weights, sampled uniformly within the chosen bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedSampler {
    edges: Vec<f64>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl BinnedSampler {
    pub fn new(edges: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || edges.len() != weights.len() + 1 {
            return Err(Error::Data("histogram needs at least one bin and n+1 edges".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("histogram edges must increase".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Data("histogram weights must be finite and >= 0".into()));
        }
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::Data("empty histogram".into()));
        }
        Ok(BinnedSampler { edges, weights, cdf })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        *self.cdf.last().expect("non-empty")
    }

    /// Bin index drawn with probability proportional to its weight.
    #[inline]
    pub fn sample_bin(&self, u: f64) -> usize {
        let x = u * self.total();
        self.cdf.partition_point(|&c| c <= x).min(self.weights.len() - 1)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.sample_bin(rng.gen());
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        a + (b - a) * rng.gen::<f64>()
    }
}

/// Energy spectrum in particles/cm²/s per bin.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyHistogram {
    pub sampler: BinnedSampler,
}

impl EnergyHistogram {
    pub fn new(edges: Vec<f64>, flux: Vec<f64>) -> Result<Self> {
        Ok(EnergyHistogram { sampler: BinnedSampler::new(edges, flux)? })
    }

    /// Two columns: bin upper edge (keV) and flux in that bin. The first
    /// row only supplies the lowest edge and must carry zero flux.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let t = parse_table(text, path)?;
        if t.header.len() != 2 {
            return Err(Error::parse(path, 1, "expected header: upper_edge_keV flux_cm2_s"));
        }
        if t.rows.len() < 2 {
            return Err(Error::parse(path, 1, "need at least two rows"));
        }
        let edges = t.column(0)?;
        let flux = t.column(1)?;
        if flux[0] != 0.0 {
            return Err(Error::parse(path, t.rows[0].line, "first row gives the lowest edge; its flux must be 0"));
        }
        EnergyHistogram::new(edges, flux[1..].to_vec()).map_err(|e| Error::Data(format!("{path}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        EnergyHistogram::parse(&read_to_string(path)?, &path.display().to_string())
    }

    /// Integrated flux, particles/cm²/s.
    pub fn total_flux(&self) -> f64 {
        self.sampler.total()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionLaw {
    /// Inward cosine-weighted about the local normal: the angular law of an
    /// isotropic ambient field crossing a surface.
    #[default]
    Cosine,
    /// Directions uniform over the full sphere; half of them leave at once.
    Isotropic,
}

#[derive(Clone, Debug)]
pub struct SurfaceFlux {
    pub species: Species,
    pub surface: SurfaceDef<f64>,
    pub spectrum: EnergyHistogram,
    /// particles/cm²/s.
    pub flux: f64,
    pub flux_sigma: f64,
    pub law: DirectionLaw,
}

impl SurfaceFlux {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Particle {
        let (position, n, _) = self.surface.sample_on_surface(rng);
        let direction = match self.law {
            DirectionLaw::Cosine => n.rotated(rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()),
            DirectionLaw::Isotropic => Vec3::isotropic(rng.gen(), rng.gen()),
        };
        Particle { species: self.species, energy: self.spectrum.sampler.sample(rng), position, direction }
    }

    pub fn normalization(&self) -> Normalization {
        Normalization::Flux { area: self.surface.area(), flux: self.flux, flux_sigma: self.flux_sigma }
    }
}

/// Muons from a square plane tangent to a hemisphere, zenith law ∝ cos²θ.
#[derive(Clone, Debug)]
pub struct MuonHemisphere {
    pub center: Vec3<f64>,
    pub radius: f64,
    /// Full side of the square plane, cm.
    pub plane_side: f64,
    /// μ/cm²/min through a plane perpendicular to the muon direction.
    pub flux_per_min: f64,
    pub flux_sigma_per_min: f64,
}

impl MuonHemisphere {
    /// Checks the source against a geometry: the hemisphere encloses every
    /// volume, the plane covers the active volume's shadow at every angle,
    /// and the plane stays inside the world.
    pub fn check(&self, g: &GeometryModel<f64>) -> Result<()> {
        if !(self.radius > 0.0 && self.plane_side > 0.0 && self.flux_per_min >= 0.0) {
            return Err(Error::Config("muon source needs radius > 0, plane side > 0, flux >= 0".into()));
        }
        let br = g.bounding_radius(self.center);
        if self.radius < br {
            return Err(Error::Config(format!(
                "muon hemisphere radius {} cm is inside the geometry (bounding radius {br:.3} cm)",
                self.radius
            )));
        }
        let shadow = g.aabb_radius(g.active(), self.center);
        if 0.5 * self.plane_side < shadow {
            return Err(Error::Config(format!(
                "muon plane side {} cm is smaller than the active volume's shadow (needs >= {:.3} cm)",
                self.plane_side,
                2.0 * shadow
            )));
        }
        let h = 0.5 * self.plane_side;
        let rc = (self.radius * self.radius + 2.0 * h * h).sqrt();
        let (lo, hi) = g.aabb(g.root());
        let c = self.center;
        let inside = c.x - rc >= lo.x && c.x + rc <= hi.x && c.y - rc >= lo.y && c.y + rc <= hi.y;
        if !inside || c.z + rc > hi.z || c.z - h < lo.z {
            return Err(Error::Config("muon generation plane extends outside the world volume".into()));
        }
        Ok(())
    }

    /// Zenith cosine from a uniform: inverse of the CDF 1 − cos³θ.
    #[inline]
    pub fn zenith_cos(u: f64) -> f64 {
        (1.0 - u).cbrt()
    }

    /// Muon for zenith `cos_t`, azimuth `phi` and plane coordinates `a, b` in [-1, 1].
    pub fn at(&self, cos_t: f64, phi: f64, a: f64, b: f64) -> Particle {
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let (sp, cp) = phi.sin_cos();
        let n = Vec3::new(sin_t * cp, sin_t * sp, cos_t);
        let e1 = Vec3::new(cos_t * cp, cos_t * sp, -sin_t);
        let e2 = Vec3::new(-sp, cp, 0.0);
        let h = 0.5 * self.plane_side;
        let position = self.center + n * self.radius + e1 * (a * h) + e2 * (b * h);
        Particle { species: Species::Muon, energy: MUON_ENERGY_KEV, position, direction: -n }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Particle {
        let cos_t = Self::zenith_cos(rng.gen());
        let phi = std::f64::consts::TAU * rng.gen::<f64>();
        let a = 2.0 * rng.gen::<f64>() - 1.0;
        let b = 2.0 * rng.gen::<f64>() - 1.0;
        self.at(cos_t, phi, a, b)
    }

    pub fn normalization(&self) -> Normalization {
        Normalization::Flux {
            area: self.plane_side * self.plane_side,
            flux: self.flux_per_min / 60.0,
            flux_sigma: self.flux_sigma_per_min / 60.0,
        }
    }
}

/// Decays uniformly distributed in the material of one or more volumes.
#[derive(Clone, Debug)]
pub struct BulkDecay {
    /// Volumes with cumulative mass fractions.
    volumes: Vec<(VolumeId, f64)>,
    pub emitter: Emitter,
    pub normalization: Normalization,
}

impl BulkDecay {
    /// `masses` weights each volume (its material mass); vertices are uniform
    /// per unit mass across the component.
    pub fn new(volumes: &[(VolumeId, f64)], emitter: Emitter, normalization: Normalization) -> Result<Self> {
        let total: f64 = volumes.iter().map(|v| v.1).sum();
        if volumes.is_empty() || !(total > 0.0) {
            return Err(Error::Config("decay source needs at least one volume with positive mass".into()));
        }
        let mut acc = 0.0;
        let volumes = volumes
            .iter()
            .map(|&(v, m)| {
                acc += m / total;
                (v, acc)
            })
            .collect();
        Ok(BulkDecay { volumes, emitter, normalization })
    }

    pub fn volume_ids(&self) -> impl Iterator<Item = VolumeId> + '_ {
        self.volumes.iter().map(|v| v.0)
    }

    /// One decay: a vertex, then every emission of the emitter at that vertex.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        g: &GeometryModel<f64>,
        nuclear: &NuclearDb,
        rng: &mut R,
        out: &mut Vec<Particle>,
    ) {
        let u = rng.gen::<f64>();
        let i = self.volumes.partition_point(|v| v.1 <= u).min(self.volumes.len() - 1);
        let vertex = g.sample_point_in_volume(self.volumes[i].0, rng);
        let mut em = Vec::with_capacity(8);
        nuclear.emit(&self.emitter, rng, &mut em);
        out.extend(em.into_iter().map(|e| Particle {
            species: e.species,
            energy: e.energy,
            position: vertex,
            direction: e.direction,
        }));
    }
}

/// How recorded S2 distributions are resampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    /// Independent energy and angle marginals, position uniform on S2.
    #[default]
    Marginal,
    /// Joint (energy, angle) cells, position uniform on S2.
    Joint,
    /// Facet chosen by its crossing count, then that facet's marginals.
    Facet,
}

#[derive(Clone, Debug)]
pub enum ReplayLaw {
    Marginal { energy: BinnedSampler, theta: BinnedSampler },
    /// Cells indexed `ie * n_theta + it`.
    Joint { energy_edges: Vec<f64>, theta_edges: Vec<f64>, cells: BinnedSampler },
    Facet { facets: BinnedSampler, per_facet: Vec<Option<(BinnedSampler, BinnedSampler)>> },
}

/// Photons replayed from S2 with recorded distributions.
#[derive(Clone, Debug)]
pub struct RecordedReplay {
    pub species: Species,
    pub surface: SurfaceDef<f64>,
    pub law: ReplayLaw,
    /// particles/cm²/s at S2; a normalization datum only.
    pub flux2: f64,
    pub flux2_sigma: f64,
}

impl RecordedReplay {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Particle {
        let (position, n, energy, theta) = match &self.law {
            ReplayLaw::Marginal { energy, theta } => {
                let (p, n, _) = self.surface.sample_on_surface(rng);
                (p, n, energy.sample(rng), theta.sample(rng))
            }
            ReplayLaw::Joint { energy_edges, theta_edges, cells } => {
                let (p, n, _) = self.surface.sample_on_surface(rng);
                let nt = theta_edges.len() - 1;
                let c = cells.sample_bin(rng.gen());
                let (ie, it) = (c / nt, c % nt);
                let lerp = |e: &[f64], i: usize, u: f64| e[i] + (e[i + 1] - e[i]) * u;
                (p, n, lerp(energy_edges, ie, rng.gen()), lerp(theta_edges, it, rng.gen()))
            }
            ReplayLaw::Facet { facets, per_facet } => {
                let f = facets.sample_bin(rng.gen());
                let (p, n) = self.surface.sample_on_facet(Facet::ALL[f], rng);
                let (e, t) = per_facet[f].as_ref().expect("facet with zero weight is never drawn");
                (p, n, e.sample(rng), t.sample(rng))
            }
        };
        let direction = n.rotated(theta.cos(), std::f64::consts::TAU * rng.gen::<f64>());
        Particle { species: self.species, energy, position, direction }
    }

    pub fn normalization(&self) -> Normalization {
        Normalization::Flux { area: self.surface.area(), flux: self.flux2, flux_sigma: self.flux2_sigma }
    }
}

#[derive(Clone, Debug)]
pub enum SourceSpec {
    SurfaceFlux(SurfaceFlux),
    Muon(MuonHemisphere),
    BulkDecay(BulkDecay),
    Recorded(RecordedReplay),
}

impl SourceSpec {
    /// Primaries of one event, appended to `out`.
    #[inline]
    pub fn sample_event<R: Rng + ?Sized>(
        &self,
        g: &GeometryModel<f64>,
        nuclear: &NuclearDb,
        rng: &mut R,
        out: &mut Vec<Particle>,
    ) {
        match self {
            SourceSpec::SurfaceFlux(s) => out.push(s.sample(rng)),
            SourceSpec::Muon(s) => out.push(s.sample(rng)),
            SourceSpec::BulkDecay(s) => s.sample(g, nuclear, rng, out),
            SourceSpec::Recorded(s) => out.push(s.sample(rng)),
        }
    }

    pub fn normalization(&self) -> Normalization {
        match self {
            SourceSpec::SurfaceFlux(s) => s.normalization(),
            SourceSpec::Muon(s) => s.normalization(),
            SourceSpec::BulkDecay(s) => s.normalization.clone(),
            SourceSpec::Recorded(s) => s.normalization(),
        }
    }
}
