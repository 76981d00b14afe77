use rand::Rng;
use serde::{Deserialize, Serialize};

use super::physics::{elastic, klein_nishina};
use crate::data::materials::{MaterialData, MaterialDb};
use crate::error::{Error, Result};
use crate::geometry::{Facet, GeometryModel, SurfaceDef, Vec3, VolumeId, EPSILON};
use crate::sources::{Particle, Species};

/// Hard cap on steps per particle; the remainder is counted as discarded.
const MAX_STEPS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransportOptions {
    pub photon_cutoff_kev: f64,
    pub neutron_cutoff_kev: f64,
    pub electron_cutoff_kev: f64,
    /// Alphas below this energy deposit locally.
    pub alpha_cutoff_kev: f64,
    /// Chip deposit above which an event counts as a hit.
    pub threshold_kev: f64,
    /// Accumulate per-volume path lengths (diagnostic).
    pub record_paths: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            photon_cutoff_kev: 10.0,
            neutron_cutoff_kev: 1.0,
            electron_cutoff_kev: 1.0,
            alpha_cutoff_kev: 10.0,
            threshold_kev: 1.0,
            record_paths: false,
        }
    }
}

/// A photon entering the recording surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub species: Species,
    pub energy: f64,
    /// Angle to the inward normal of the facet crossed, radians in [0, π/2].
    pub theta: f64,
    pub facet: Facet,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventResult {
    pub event: u64,
    /// Energy deposited in the active volume, keV.
    pub deposit: f64,
    /// Energy deposited anywhere, chip included.
    pub deposited_total: f64,
    /// Kinetic energy leaving the world (or the replay surface).
    pub escaped: f64,
    /// Energy dropped below the neutron cutoff or at the step cap.
    pub discarded: f64,
    pub primary_energy: f64,
    /// Track length inside the active volume, cm.
    pub active_path: f64,
    /// Per-volume track length, filled when `record_paths` is set.
    pub path_lengths: Vec<f64>,
    pub crossings: Vec<CrossingRecord>,
}

impl EventResult {
    pub fn reset(&mut self, event: u64) {
        self.event = event;
        self.deposit = 0.0;
        self.deposited_total = 0.0;
        self.escaped = 0.0;
        self.discarded = 0.0;
        self.primary_energy = 0.0;
        self.active_path = 0.0;
        self.path_lengths.iter_mut().for_each(|x| *x = 0.0);
        self.crossings.clear();
    }

    /// |deposits + escaped + discarded − primary| / primary.
    pub fn bookkeeping_error(&self) -> f64 {
        if self.primary_energy == 0.0 {
            return 0.0;
        }
        (self.deposited_total + self.escaped + self.discarded - self.primary_energy).abs() / self.primary_energy
    }
}

/// Read-only transport context shared by all workers.
#[derive(Clone, Debug)]
pub struct Transport<'a> {
    geom: &'a GeometryModel<f64>,
    mats: Vec<Option<&'a MaterialData>>,
    active: VolumeId,
    record: Option<SurfaceDef<f64>>,
    kill: Option<SurfaceDef<f64>>,
    pub opts: TransportOptions,
}

#[derive(Clone, Copy)]
struct Track {
    p: Vec3<f64>,
    d: Vec3<f64>,
    e: f64,
    v: VolumeId,
}

impl<'a> Transport<'a> {
    pub fn new(geom: &'a GeometryModel<f64>, db: &'a MaterialDb, opts: TransportOptions) -> Result<Self> {
        let mats = geom
            .volumes()
            .iter()
            .map(|pv| {
                if pv.material == "vacuum" {
                    Ok(None)
                } else {
                    db.get(&pv.material)
                        .map(Some)
                        .ok_or_else(|| Error::Config(format!("volume '{}': unknown material '{}'", pv.name, pv.material)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Transport { geom, mats, active: geom.active(), record: None, kill: None, opts })
    }

    /// Record inward photon crossings of `s`.
    pub fn recording(mut self, s: SurfaceDef<f64>) -> Self {
        self.record = Some(s);
        self
    }

    /// Stop photons when they leave `s`.
    pub fn killing(mut self, s: SurfaceDef<f64>) -> Self {
        self.kill = Some(s);
        self
    }

    pub fn geometry(&self) -> &GeometryModel<f64> {
        self.geom
    }

    pub fn new_result(&self) -> EventResult {
        EventResult {
            path_lengths: if self.opts.record_paths { vec![0.0; self.geom.volumes().len()] } else { Vec::new() },
            ..Default::default()
        }
    }

    pub fn transport_event<R: Rng + ?Sized>(&self, primaries: &[Particle], rng: &mut R) -> EventResult {
        let mut res = self.new_result();
        self.transport_into(primaries, rng, &mut res);
        res
    }

    /// Transports every primary; `res` must have been reset by the caller.
    pub fn transport_into<R: Rng + ?Sized>(&self, primaries: &[Particle], rng: &mut R, res: &mut EventResult) {
        for p in primaries {
            res.primary_energy += p.energy;
            let Some(v) = self.geom.locate(p.position) else {
                res.escaped += p.energy;
                continue;
            };
            let t = Track { p: p.position, d: p.direction, e: p.energy, v };
            match p.species {
                Species::Gamma => self.photon(t, rng, res),
                Species::Neutron => self.neutron(t, rng, res),
                Species::Muon => self.muon(t, res),
                Species::Electron | Species::Alpha => self.ranged(p.species, t, res),
            }
        }
    }

    #[inline]
    fn deposit(&self, v: VolumeId, e: f64, res: &mut EventResult) {
        res.deposited_total += e;
        if v == self.active {
            res.deposit += e;
        }
    }

    #[inline]
    fn travelled(&self, v: VolumeId, len: f64, res: &mut EventResult) {
        if v == self.active {
            res.active_path += len;
        }
        if let Some(x) = res.path_lengths.get_mut(v) {
            *x += len;
        }
    }

    /// Moves across the boundary found by `step_to_boundary`. Returns false
    /// when the track leaves the world.
    #[inline]
    fn cross(&self, t: &mut Track, dist: f64, child: Option<VolumeId>) -> bool {
        t.p = t.p + t.d * (dist + EPSILON);
        let start = match child {
            Some(c) => c,
            None => match self.geom.volume(t.v).parent {
                Some(p) => p,
                None => return false,
            },
        };
        match self.geom.locate_from(start, t.p) {
            Some(v) => {
                t.v = v;
                true
            }
            None => false,
        }
    }

    fn photon<R: Rng + ?Sized>(&self, mut t: Track, rng: &mut R, res: &mut EventResult) {
        let cutoff = self.opts.photon_cutoff_kev;
        if t.e < cutoff {
            self.deposit(t.v, t.e, res);
            return;
        }
        for _ in 0..MAX_STEPS {
            let mat = self.mats[t.v];
            let mu = mat.map_or(0.0, |m| m.photon.mu_rho.loglog(t.e) * m.density());
            let s = if mu > 0.0 { -(1.0 - rng.gen::<f64>()).ln() / mu } else { f64::INFINITY };
            let (dist, child) = self.geom.step_to_boundary(t.v, t.p, t.d);
            let boundary = s >= dist;
            let seg = if boundary { dist + EPSILON } else { s };
            if let Some(rec) = &self.record {
                if let Some(h) = rec.inward_crossing(t.p, t.d, seg) {
                    res.crossings.push(CrossingRecord {
                        species: Species::Gamma,
                        energy: t.e,
                        theta: h.cos_theta.acos(),
                        facet: h.facet,
                    });
                }
            }
            if let Some(k) = &self.kill {
                if let Some(x) = k.outward_crossing(t.p, t.d, seg) {
                    self.travelled(t.v, x.min(dist), res);
                    res.escaped += t.e;
                    return;
                }
            }
            self.travelled(t.v, seg.min(dist), res);
            if boundary {
                if !self.cross(&mut t, dist, child) {
                    res.escaped += t.e;
                    return;
                }
                continue;
            }
            t.p = t.p + t.d * s;
            let m = mat.expect("interaction only in material");
            if rng.gen::<f64>() < m.photon.photo_fraction.lin_log(t.e) {
                self.deposit(t.v, t.e, res);
                return;
            }
            let (e1, cos_t) = klein_nishina(t.e, || rng.gen::<f64>());
            self.deposit(t.v, t.e - e1, res);
            t.e = e1;
            t.d = t.d.rotated(cos_t, std::f64::consts::TAU * rng.gen::<f64>());
            if t.e < cutoff {
                self.deposit(t.v, t.e, res);
                return;
            }
        }
        res.discarded += t.e;
    }

    fn neutron<R: Rng + ?Sized>(&self, mut t: Track, rng: &mut R, res: &mut EventResult) {
        let cutoff = self.opts.neutron_cutoff_kev;
        for _ in 0..MAX_STEPS {
            if t.e < cutoff {
                res.discarded += t.e;
                return;
            }
            let mat = self.mats[t.v];
            let sigma = mat.map_or(0.0, |m| m.neutron.sigma.lin_log(t.e).max(0.0));
            let s = if sigma > 0.0 { -(1.0 - rng.gen::<f64>()).ln() / sigma } else { f64::INFINITY };
            let (dist, child) = self.geom.step_to_boundary(t.v, t.p, t.d);
            if s >= dist {
                self.travelled(t.v, dist, res);
                if !self.cross(&mut t, dist, child) {
                    res.escaped += t.e;
                    return;
                }
                continue;
            }
            self.travelled(t.v, s, res);
            t.p = t.p + t.d * s;
            let a = mat.expect("interaction only in material").neutron.a;
            let (recoil, cos_lab) = elastic(t.e, a, 2.0 * rng.gen::<f64>() - 1.0);
            self.deposit(t.v, recoil, res);
            t.e -= recoil;
            t.d = t.d.rotated(cos_lab, std::f64::consts::TAU * rng.gen::<f64>());
        }
        res.discarded += t.e;
    }

    fn muon(&self, mut t: Track, res: &mut EventResult) {
        // the push past each boundary belongs to the volume entered
        let mut lead = 0.0;
        for _ in 0..MAX_STEPS {
            let (dist, child) = self.geom.step_to_boundary(t.v, t.p, t.d);
            let len = dist + lead;
            self.travelled(t.v, len, res);
            if let Some(m) = self.mats[t.v] {
                let loss = (m.muon.dedx.loglog(t.e) * m.density() * len).min(t.e);
                self.deposit(t.v, loss, res);
                t.e -= loss;
                if t.e <= 0.0 {
                    return;
                }
            }
            if !self.cross(&mut t, dist, child) {
                res.escaped += t.e;
                return;
            }
            lead = EPSILON;
        }
        res.discarded += t.e;
    }

    /// Electrons and alphas: CSDA range decides between a local deposit and
    /// straight-line continuous slowing down.
    fn ranged(&self, species: Species, mut t: Track, res: &mut EventResult) {
        let alpha = species == Species::Alpha;
        let cutoff = if alpha { self.opts.alpha_cutoff_kev } else { self.opts.electron_cutoff_kev };
        let range = |m: &'a MaterialData| if alpha { &m.alpha.csda } else { &m.electron.csda };
        let mut check = true;
        let mut lead = 0.0;
        for _ in 0..MAX_STEPS {
            if t.e < cutoff {
                self.deposit(t.v, t.e, res);
                return;
            }
            let mat = self.mats[t.v];
            if let (Some(m), true) = (mat, check && t.v != self.active) {
                let r = range(m).loglog(t.e) / m.density();
                if r < self.geom.distance_to_aabb(self.active, t.p) {
                    self.deposit(t.v, t.e, res);
                    return;
                }
            }
            let (dist, child) = self.geom.step_to_boundary(t.v, t.p, t.d);
            let len = dist + lead;
            if let Some(m) = mat {
                let curve = range(m);
                let r0 = curve.loglog(t.e);
                let x = m.density() * len;
                if x >= r0 {
                    self.travelled(t.v, r0 / m.density(), res);
                    self.deposit(t.v, t.e, res);
                    return;
                }
                let e1 = curve.inverse_loglog(r0 - x).min(t.e);
                self.deposit(t.v, t.e - e1, res);
                t.e = e1;
            }
            self.travelled(t.v, len, res);
            if !self.cross(&mut t, dist, child) {
                res.escaped += t.e;
                return;
            }
            lead = EPSILON;
            check = self.mats[t.v].is_some();
        }
        res.discarded += t.e;
    }
}
