//! Scenario files: geometry, data, sources and options in one TOML document,
//! plus the pipeline that runs them and writes the reports.
//!
//! Paths inside a scenario are relative to the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    build_rate_table, build_spectrum, combine, probability_in_window, rate_from_tally, suppression_between,
    Normalization, RateResult, SpectrumResult,
};
use crate::data::components::{load_components, ComponentSpec};
use crate::data::radioassay::{load_radioassay, ActivityKind, RadioassayTable};
use crate::data::{load_dataset, DataSet};
use crate::error::{read_to_string, Error, Result};
use crate::geometry::parse::render_geometry;
use crate::geometry::{parse_geometry, GeometryModel, SurfaceDef, Vec3};
use crate::rng::GENERATOR;
use crate::runner::{run_source, run_two_step, RunConfig, TwoStepPlan};
use crate::sources::{BulkDecay, DirectionLaw, EnergyHistogram, MuonHemisphere, ReplayMode, SourceSpec, Species, SurfaceFlux};
use crate::transport::{Binning, Tally, Transport, TransportOptions};
use crate::twostep::{replay_source, second_pass_time, CrossingDistributions, TwoStepBinning};

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub threshold_kev: f64,
    pub direction_law: DirectionLaw,
    pub binning: Binning,
    pub two_step_binning: TwoStepBinning,
    /// Write `events_<label>.txt` with every event that deposits in the chip.
    pub event_log: bool,
    /// Group labels left out of an extra `spectrum_total_without_*` file.
    pub spectrum_exclude: Vec<String>,
    /// Points per volume for the containment/overlap checks.
    pub validate_samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            threshold_kev: 1.0,
            direction_law: DirectionLaw::Cosine,
            binning: Binning::default(),
            two_step_binning: TwoStepBinning::default(),
            event_log: false,
            spectrum_exclude: Vec::new(),
            validate_samples: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStepDecl {
    pub surface: String,
    pub n1: u64,
    pub n2: u64,
    #[serde(default)]
    pub mode: ReplayMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceDecl {
    SurfaceFlux {
        label: String,
        species: Species,
        surface: String,
        spectrum: PathBuf,
        /// 1/cm²/s.
        flux: f64,
        #[serde(default)]
        flux_sigma: f64,
        #[serde(default)]
        events: u64,
        direction_law: Option<DirectionLaw>,
        two_step: Option<TwoStepDecl>,
    },
    Muon {
        label: String,
        radius_cm: f64,
        plane_side_cm: f64,
        flux_per_min: f64,
        #[serde(default)]
        flux_sigma_per_min: f64,
        #[serde(default)]
        center_cm: [f64; 3],
        events: u64,
    },
    Components {
        #[serde(default)]
        label: String,
        components: PathBuf,
        radioassay: PathBuf,
        include: Option<Vec<String>>,
        events: u64,
    },
    BulkDecay {
        label: String,
        volumes: Vec<String>,
        emitter: String,
        /// mBq/kg, `v ± s` or `<u`.
        activity: String,
        mass_kg: Option<f64>,
        events: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub geometry: PathBuf,
    pub data_dir: PathBuf,
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub options: Options,
    #[serde(rename = "source", default)]
    pub sources: Vec<SourceDecl>,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Events for every source; for two-step sources both passes.
    pub events: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct TwoStepJob {
    pub surface: SurfaceDef<f64>,
    pub n1: u64,
    pub n2: u64,
    pub mode: ReplayMode,
}

/// One source run: a sampler, its event count and normalization.
#[derive(Clone, Debug)]
pub struct Job {
    pub label: String,
    /// Rows with the same group are summed into one table row.
    pub group: String,
    pub kind: &'static str,
    pub source: SourceSpec,
    pub events: u64,
    pub two_step: Option<TwoStepJob>,
}

#[derive(Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub dir: PathBuf,
    pub geometry: GeometryModel<f64>,
    pub data: DataSet,
    pub jobs: Vec<Job>,
    pub hash: String,
}

fn label_file(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut file: ScenarioFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        if let Some(s) = ov.seed {
            file.seed = s;
        }
        if let Some(w) = ov.workers {
            file.workers = w;
        }
        if let Some(n) = ov.events {
            for s in &mut file.sources {
                match s {
                    SourceDecl::SurfaceFlux { events, two_step, .. } => {
                        *events = n;
                        if let Some(t) = two_step {
                            t.n1 = n;
                            t.n2 = n;
                        }
                    }
                    SourceDecl::Muon { events, .. }
                    | SourceDecl::Components { events, .. }
                    | SourceDecl::BulkDecay { events, .. } => *events = n,
                }
            }
        }
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let gpath = dir.join(&file.geometry);
        let geometry: GeometryModel<f64> = parse_geometry(&read_to_string(&gpath)?, &gpath.display().to_string())?;
        let data = load_dataset(&dir.join(&file.data_dir))?;
        for pv in geometry.volumes() {
            if pv.material != "vacuum" && data.materials.get(&pv.material).is_none() {
                return Err(Error::Config(format!("volume '{}': unknown material '{}'", pv.name, pv.material)));
            }
        }
        let mut hasher = Sha256::new();
        let mut canonical = file.clone();
        canonical.workers = 0;
        hasher.update(serde_json::to_string(&canonical).expect("serializable"));
        hasher.update(render_geometry(&geometry));
        for m in data.materials.iter() {
            hasher.update(format!("{} {} {}\n", m.material.name, m.material.density, m.material.neutron_a));
            hasher.update(m.photon.to_text());
            hasher.update(m.electron.to_text());
            hasher.update(m.alpha.to_text());
            hasher.update(m.muon.to_text());
            hasher.update(m.neutron.to_text());
        }
        for s in data.nuclear.schemes() {
            hasher.update(&s.name);
            hasher.update(s.to_text());
        }
        for c in data.nuclear.chains() {
            hasher.update(format!("{c:?}"));
        }
        let mut errors = Vec::new();
        let mut jobs = Vec::new();
        for decl in &file.sources {
            match build_jobs(decl, &file.options, &dir, &geometry, &data, &mut hasher) {
                Ok(j) => jobs.extend(j),
                Err(Error::Config(m)) => errors.push(m),
                Err(e) => errors.push(e.to_string()),
            }
        }
        let mut seen = std::collections::HashSet::new();
        for j in &jobs {
            if !seen.insert(j.label.clone()) {
                errors.push(format!("duplicate source label '{}'", j.label));
            }
        }
        if !errors.is_empty() {
            return Err(Error::Config(errors.join("; ")));
        }
        let hash = hex::encode(hasher.finalize());
        Ok(Scenario { file, dir, geometry, data, jobs, hash })
    }

    pub fn transport_options(&self) -> TransportOptions {
        TransportOptions { threshold_kev: self.file.options.threshold_kev, ..TransportOptions::default() }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            seed: self.file.seed,
            workers: self.file.workers,
            binning: self.file.options.binning.clone(),
            event_log: self.file.options.event_log,
        }
    }

    /// Geometry checks by sampling. Empty when clean.
    pub fn validate(&self) -> Vec<String> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.file.seed);
        let mut d = self.geometry.validate_by_sampling(self.file.options.validate_samples, &mut rng);
        for j in &self.jobs {
            if j.events == 0 && j.two_step.is_none() {
                d.push(format!("source '{}': events must be > 0", j.label));
            }
        }
        d
    }

    pub fn run(&self) -> Result<RunReport> {
        let start = Instant::now();
        let transport = Transport::new(&self.geometry, &self.data.materials, self.transport_options())?;
        let cfg = self.run_config();
        let mut outcomes = Vec::new();
        for job in &self.jobs {
            outcomes.push(self.run_job(&transport, job, &cfg)?);
        }
        Ok(self.report(outcomes, start.elapsed().as_secs_f64()))
    }

    fn run_job(&self, transport: &Transport<'_>, job: &Job, cfg: &RunConfig) -> Result<SourceOutcome> {
        let nuclear = &self.data.nuclear;
        match &job.two_step {
            None => {
                let out = run_source(transport, nuclear, &job.source, &job.label, 1, job.events, cfg)?;
                let norm = job.source.normalization();
                let rate = rate_from_tally(&job.label, &out.tally, &norm, None)?;
                Ok(SourceOutcome {
                    label: job.label.clone(),
                    group: job.group.clone(),
                    kind: job.kind.to_string(),
                    tally: out.tally,
                    normalization: norm,
                    rate,
                    two_step: None,
                    crossings: None,
                    event_log: out.event_log,
                    max_bookkeeping_error: out.max_bookkeeping_error,
                })
            }
            Some(ts) => {
                let plan = TwoStepPlan {
                    s2: &ts.surface,
                    n1: ts.n1,
                    n2: ts.n2,
                    mode: ts.mode,
                    binning: self.file.options.two_step_binning.clone(),
                };
                let out = run_two_step(transport, nuclear, &job.source, &job.label, &plan, cfg)?;
                let replay = replay_source(&out.distributions, ts.mode)?;
                let norm = replay.normalization();
                let mut rate = rate_from_tally(&job.label, &out.pass2.tally, &norm, Some(out.distributions.n_crossings))?;
                rate.t_eq = out.t_eq2;
                let one_step = rate_from_tally(&job.label, &out.pass1.tally, &job.source.normalization(), None)?;
                Ok(SourceOutcome {
                    label: job.label.clone(),
                    group: job.group.clone(),
                    kind: job.kind.to_string(),
                    tally: out.pass2.tally,
                    normalization: norm,
                    rate,
                    two_step: Some(TwoStepSummary {
                        surface: ts.surface.name.clone(),
                        mode: ts.mode,
                        n1: ts.n1,
                        n2: ts.n2,
                        n_crossings: out.distributions.n_crossings,
                        flux2: out.flux2.value,
                        flux2_sigma: out.flux2.sigma,
                        t_eq1: crate::twostep::first_pass_time(&out.distributions.provenance),
                        t_eq2: out.t_eq2,
                        one_step,
                    }),
                    crossings: Some(out.distributions),
                    event_log: out.pass2.event_log,
                    max_bookkeeping_error: out.pass1.max_bookkeeping_error.max(out.pass2.max_bookkeeping_error),
                })
            }
        }
    }

    /// Pass two only, from a saved crossing artifact.
    pub fn replay(&self, label: &str, dist: &CrossingDistributions, n2: u64, mode: ReplayMode) -> Result<RunReport> {
        let start = Instant::now();
        let job = self
            .jobs
            .iter()
            .find(|j| j.label == label)
            .ok_or_else(|| Error::Config(format!("no source labelled '{label}'")))?;
        let transport = Transport::new(&self.geometry, &self.data.materials, self.transport_options())?
            .killing(dist.provenance.surface2.clone());
        let replay = replay_source(dist, mode)?;
        let src = SourceSpec::Recorded(replay.clone());
        let cfg = self.run_config();
        let out = run_source(&transport, &self.data.nuclear, &src, label, 2, n2, &cfg)?;
        let norm = replay.normalization();
        let mut rate = rate_from_tally(label, &out.tally, &norm, Some(dist.n_crossings))?;
        let area2 = dist.provenance.surface2.area();
        rate.t_eq = if n2 == 0 { 0.0 } else { second_pass_time(n2, area2, replay.flux2) };
        let outcome = SourceOutcome {
            label: label.into(),
            group: job.group.clone(),
            kind: "two_step_replay".into(),
            tally: out.tally,
            normalization: norm,
            rate,
            two_step: None,
            crossings: None,
            event_log: out.event_log,
            max_bookkeeping_error: out.max_bookkeeping_error,
        };
        Ok(self.report(vec![outcome], start.elapsed().as_secs_f64()))
    }

    fn report(&self, outcomes: Vec<SourceOutcome>, wall: f64) -> RunReport {
        let mut groups: BTreeMap<&str, Vec<RateResult>> = BTreeMap::new();
        for o in &outcomes {
            groups.entry(o.group.as_str()).or_default().push(o.rate.clone());
        }
        let group_rates: Vec<RateResult> = groups
            .iter()
            .filter(|(g, parts)| parts.len() > 1 || parts[0].label != **g)
            .map(|(g, parts)| combine(g, parts))
            .collect();
        let tops: Vec<RateResult> = groups.iter().map(|(g, parts)| combine(g, parts)).collect();
        let total = combine("total", &tops);
        RunReport {
            scenario: self.file.name.clone(),
            hash: self.hash.clone(),
            seed: self.file.seed,
            threshold_kev: self.file.options.threshold_kev,
            outcomes,
            groups: group_rates,
            total,
            wall_time_s: wall,
            workers: if self.file.workers == 0 { rayon::current_num_threads() } else { self.file.workers },
            spectrum_exclude: self.file.options.spectrum_exclude.clone(),
        }
    }
}

fn spectrum_of(dir: &Path, p: &Path, hasher: &mut Sha256) -> Result<EnergyHistogram> {
    let h = EnergyHistogram::load(&dir.join(p))?;
    for (e, w) in h.sampler.edges().iter().zip(h.sampler.weights()) {
        hasher.update(format!("{e} {w}\n"));
    }
    Ok(h)
}

fn surface(g: &GeometryModel<f64>, name: &str, label: &str) -> Result<SurfaceDef<f64>> {
    g.surface(name)
        .cloned()
        .ok_or_else(|| Error::Config(format!("source '{label}': surface '{name}' is not defined in the geometry")))
}

fn volume_masses(g: &GeometryModel<f64>, data: &DataSet, names: &[String], who: &str) -> Result<Vec<(usize, f64)>> {
    names
        .iter()
        .map(|n| {
            let v = g.id(n).ok_or_else(|| Error::Config(format!("{who}: volume '{n}' not in geometry")))?;
            let pv = g.volume(v);
            let rho = data
                .materials
                .get(&pv.material)
                .map(|m| m.density())
                .ok_or_else(|| Error::Config(format!("{who}: volume '{n}' has no material")))?;
            Ok((v, g.material_volume(v) * rho * 1e-3))
        })
        .collect()
}

fn build_jobs(
    decl: &SourceDecl,
    opts: &Options,
    dir: &Path,
    g: &GeometryModel<f64>,
    data: &DataSet,
    hasher: &mut Sha256,
) -> Result<Vec<Job>> {
    match decl {
        SourceDecl::SurfaceFlux { label, species, surface: sname, spectrum, flux, flux_sigma, events, direction_law, two_step } => {
            let spectrum = spectrum_of(dir, spectrum, hasher)?;
            if !(*flux >= 0.0) || !(*flux_sigma >= 0.0) {
                return Err(Error::Config(format!("source '{label}': flux and flux_sigma must be >= 0")));
            }
            let src = SurfaceFlux {
                species: *species,
                surface: surface(g, sname, label)?,
                spectrum,
                flux: *flux,
                flux_sigma: *flux_sigma,
                law: direction_law.unwrap_or(opts.direction_law),
            };
            let two_step = match two_step {
                Some(t) => {
                    if *species != Species::Gamma {
                        return Err(Error::Config(format!("source '{label}': two-step applies to photons only")));
                    }
                    if t.n1 == 0 {
                        return Err(Error::Config(format!("source '{label}': two_step.n1 must be > 0")));
                    }
                    Some(TwoStepJob { surface: surface(g, &t.surface, label)?, n1: t.n1, n2: t.n2, mode: t.mode })
                }
                None => {
                    if *events == 0 {
                        return Err(Error::Config(format!("source '{label}': events must be > 0")));
                    }
                    None
                }
            };
            Ok(vec![Job {
                label: label.clone(),
                group: label.clone(),
                kind: "surface_flux",
                source: SourceSpec::SurfaceFlux(src),
                events: *events,
                two_step,
            }])
        }
        SourceDecl::Muon { label, radius_cm, plane_side_cm, flux_per_min, flux_sigma_per_min, center_cm, events } => {
            let m = MuonHemisphere {
                center: Vec3::new(center_cm[0], center_cm[1], center_cm[2]),
                radius: *radius_cm,
                plane_side: *plane_side_cm,
                flux_per_min: *flux_per_min,
                flux_sigma_per_min: *flux_sigma_per_min,
            };
            m.check(g).map_err(|e| Error::Config(format!("source '{label}': {e}")))?;
            Ok(vec![Job {
                label: label.clone(),
                group: label.clone(),
                kind: "muon",
                source: SourceSpec::Muon(m),
                events: *events,
                two_step: None,
            }])
        }
        SourceDecl::Components { label, components, radioassay, include, events } => {
            let comps = load_components(&dir.join(components))?;
            let ids: Vec<&str> = comps.iter().map(|c| c.id.as_str()).chain(comps.iter().map(|c| c.assay.as_str())).collect();
            let table = load_radioassay(&dir.join(radioassay), &ids, &data.nuclear)?;
            hasher.update(serde_json::to_string(&comps).expect("serializable"));
            hasher.update(serde_json::to_string(&table.entries).expect("serializable"));
            component_jobs(label, &comps, &table, include.as_deref(), *events, g, data)
        }
        SourceDecl::BulkDecay { label, volumes, emitter, activity, mass_kg, events } => {
            let activity = ActivityKind::parse(activity).map_err(|m| Error::Config(format!("source '{label}': {m}")))?;
            let em = data
                .nuclear
                .emitter(emitter)
                .ok_or_else(|| Error::Config(format!("source '{label}': unknown emitter '{emitter}'")))?;
            let vm = volume_masses(g, data, volumes, &format!("source '{label}'"))?;
            let mass = mass_kg.unwrap_or_else(|| vm.iter().map(|v| v.1).sum());
            let norm = Normalization::Activity { mass_kg: mass, activity };
            Ok(vec![Job {
                label: label.clone(),
                group: label.clone(),
                kind: "bulk_decay",
                source: SourceSpec::BulkDecay(BulkDecay::new(&vm, em, norm)?),
                events: *events,
                two_step: None,
            }])
        }
    }
}

fn component_jobs(
    prefix: &str,
    comps: &[ComponentSpec],
    table: &RadioassayTable,
    include: Option<&[String]>,
    events: u64,
    g: &GeometryModel<f64>,
    data: &DataSet,
) -> Result<Vec<Job>> {
    if let Some(inc) = include {
        for id in inc {
            if !comps.iter().any(|c| &c.id == id) {
                return Err(Error::Config(format!("include lists unknown component '{id}'")));
            }
        }
    }
    let mut jobs = Vec::new();
    for c in comps {
        if include.is_some_and(|inc| !inc.contains(&c.id)) {
            continue;
        }
        let who = format!("component '{}'", c.id);
        let vm = volume_masses(g, data, &c.volumes, &who)?;
        let group = if prefix.is_empty() { c.id.clone() } else { format!("{prefix} {}", c.id) };
        let mut any = false;
        for e in table.for_component(&c.assay) {
            any = true;
            let em = data.nuclear.emitter(&e.isotope).expect("checked when the table was loaded");
            let norm = Normalization::Activity { mass_kg: c.mass_kg, activity: e.activity };
            jobs.push(Job {
                label: format!("{group} {}", e.isotope),
                group: group.clone(),
                kind: "bulk_decay",
                source: SourceSpec::BulkDecay(BulkDecay::new(&vm, em, norm)?),
                events,
                two_step: None,
            });
        }
        if !any {
            return Err(Error::Config(format!("{who}: no radioassay entries for '{}'", c.assay)));
        }
    }
    Ok(jobs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepSummary {
    pub surface: String,
    pub mode: ReplayMode,
    pub n1: u64,
    pub n2: u64,
    pub n_crossings: u64,
    pub flux2: f64,
    pub flux2_sigma: f64,
    pub t_eq1: f64,
    pub t_eq2: f64,
    /// Pass-one tally normalized directly to S1.
    pub one_step: RateResult,
}

#[derive(Clone, Debug)]
pub struct SourceOutcome {
    pub label: String,
    pub group: String,
    pub kind: String,
    pub tally: Tally,
    pub normalization: Normalization,
    pub rate: RateResult,
    pub two_step: Option<TwoStepSummary>,
    pub crossings: Option<CrossingDistributions>,
    pub event_log: Vec<(u64, f64)>,
    pub max_bookkeeping_error: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: String,
    pub hash: String,
    pub seed: u64,
    pub threshold_kev: f64,
    pub outcomes: Vec<SourceOutcome>,
    /// Sums over sources sharing a group.
    pub groups: Vec<RateResult>,
    pub total: RateResult,
    pub wall_time_s: f64,
    pub workers: usize,
    pub spectrum_exclude: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub label: String,
    pub group: String,
    pub kind: String,
    pub n_gen: u64,
    pub hits: u64,
    pub t_eq_s: f64,
    pub rate: RateResult,
    pub two_step: Option<TwoStepSummary>,
}

/// Machine-readable results; a pure function of scenario and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub threshold_kev: f64,
    pub sources: Vec<SourceSummary>,
    pub groups: Vec<RateResult>,
    pub total: RateResult,
    /// Chance of at least one event in one second at the total central rate.
    pub probability_1s: f64,
}

impl Summary {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    /// Rate rows: groups with several members, and every source.
    pub fn rows(&self) -> Vec<RateResult> {
        let mut rows: Vec<RateResult> = self.sources.iter().map(|s| s.rate.clone()).collect();
        rows.extend(self.groups.iter().map(|g| RateResult { label: format!("{} (sum)", g.label), ..g.clone() }));
        rows
    }

    /// Row used for a label in comparisons: a group sum when one exists.
    fn comparable(&self) -> BTreeMap<String, RateResult> {
        let mut m: BTreeMap<String, RateResult> = BTreeMap::new();
        for s in &self.sources {
            m.insert(s.group.clone(), s.rate.clone());
        }
        for g in &self.groups {
            m.insert(g.label.clone(), g.clone());
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub factor: Option<f64>,
    pub sigma: Option<f64>,
    pub note: Option<String>,
}

/// Per-label suppression factors `a / b`. Both summaries must carry the
/// same labels.
pub fn compare(a: &Summary, b: &Summary) -> Result<Vec<ComparisonRow>> {
    let (ma, mb) = (a.comparable(), b.comparable());
    let only_a: Vec<_> = ma.keys().filter(|k| !mb.contains_key(*k)).cloned().collect();
    let only_b: Vec<_> = mb.keys().filter(|k| !ma.contains_key(*k)).cloned().collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Error::Mismatch(format!(
            "source labels differ: only in first [{}], only in second [{}]",
            only_a.join(", "),
            only_b.join(", ")
        )));
    }
    let mut rows = Vec::new();
    for (label, ra) in &ma {
        let rb = &mb[label];
        rows.push(match suppression_between(ra, rb) {
            Ok((f, s)) => ComparisonRow { label: label.clone(), factor: Some(f), sigma: Some(s), note: None },
            Err(e) => ComparisonRow { label: label.clone(), factor: None, sigma: None, note: Some(e.to_string()) },
        });
    }
    let total = match suppression_between(&a.total, &b.total) {
        Ok((f, s)) => ComparisonRow { label: "total".into(), factor: Some(f), sigma: Some(s), note: None },
        Err(e) => ComparisonRow { label: "total".into(), factor: None, sigma: None, note: Some(e.to_string()) },
    };
    rows.push(total);
    Ok(rows)
}

pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let w = rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(5).max(6);
    let mut s = format!("{:<w$}  factor\n", "source");
    for r in rows {
        let v = match (r.factor, r.sigma, &r.note) {
            (Some(f), Some(e), _) => format!("{f:.4} ± {e:.4}"),
            (_, _, Some(n)) => n.clone(),
            _ => String::new(),
        };
        s.push_str(&format!("{:<w$}  {v}\n", r.label));
    }
    s
}

#[derive(Serialize)]
struct ManifestSource<'a> {
    label: &'a str,
    n_gen: u64,
    hits: u64,
    t_eq_s: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    scenario_hash: &'a str,
    code_version: &'a str,
    seed: u64,
    workers: usize,
    rng: &'a str,
    wall_time_s: f64,
    sources: Vec<ManifestSource<'a>>,
}

impl RunReport {
    pub fn summary(&self) -> Summary {
        Summary {
            scenario: self.scenario.clone(),
            scenario_hash: self.hash.clone(),
            seed: self.seed,
            threshold_kev: self.threshold_kev,
            sources: self
                .outcomes
                .iter()
                .map(|o| SourceSummary {
                    label: o.label.clone(),
                    group: o.group.clone(),
                    kind: o.kind.clone(),
                    n_gen: o.tally.n_gen,
                    hits: o.tally.hits,
                    t_eq_s: o.rate.t_eq,
                    rate: o.rate.clone(),
                    two_step: o.two_step.clone(),
                })
                .collect(),
            groups: self.groups.clone(),
            total: self.total.clone(),
            probability_1s: probability_in_window(self.total.central().unwrap_or(self.total.sort_key().max(0.0)), 1.0),
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("serializable") + "\n"
    }

    pub fn outcome(&self, label: &str) -> Option<&SourceOutcome> {
        self.outcomes.iter().find(|o| o.label == label)
    }

    /// Spectra per group, the total, and the total without excluded groups.
    pub fn spectra(&self) -> Result<Vec<SpectrumResult>> {
        let mut per_group: BTreeMap<&str, SpectrumResult> = BTreeMap::new();
        for o in &self.outcomes {
            let s = build_spectrum(&o.group, &o.tally, &o.normalization)?;
            let merged = match per_group.remove(o.group.as_str()) {
                Some(prev) => prev.add(&s, &o.group)?,
                None => s,
            };
            per_group.insert(o.group.as_str(), merged);
        }
        let mut out: Vec<SpectrumResult> = per_group.values().cloned().collect();
        let mut it = per_group.values();
        if let Some(first) = it.next() {
            let mut total = first.clone();
            for s in it {
                total = total.add(s, "total")?;
            }
            total.label = "total".into();
            if !self.spectrum_exclude.is_empty() {
                let mut without = total.clone();
                for g in &self.spectrum_exclude {
                    if let Some(s) = per_group.get(g.as_str()) {
                        without = without.subtract(s, "")?;
                    }
                }
                without.label = format!("total_without_{}", self.spectrum_exclude.join("_"));
                out.push(without);
            }
            out.push(total);
        }
        Ok(out)
    }

    pub fn manifest_json(&self) -> String {
        let m = Manifest {
            scenario: &self.scenario,
            scenario_hash: &self.hash,
            code_version: crate::CODE_VERSION,
            seed: self.seed,
            workers: self.workers,
            rng: GENERATOR,
            wall_time_s: self.wall_time_s,
            sources: self
                .outcomes
                .iter()
                .map(|o| ManifestSource { label: &o.label, n_gen: o.tally.n_gen, hits: o.tally.hits, t_eq_s: o.rate.t_eq })
                .collect(),
        };
        serde_json::to_string_pretty(&m).expect("serializable") + "\n"
    }

    /// Writes every artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: &str| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        let summary = self.summary();
        let table = build_rate_table(&summary.rows());
        put("summary.json", &self.summary_json())?;
        put("manifest.json", &self.manifest_json())?;
        put("rates.csv", &table.to_csv())?;
        put("rates.txt", &table.to_text())?;
        for s in self.spectra()? {
            put(&format!("spectrum_{}.csv", label_file(&s.label)), &s.to_csv())?;
        }
        for o in &self.outcomes {
            if let Some(d) = &o.crossings {
                put(&format!("crossings_{}.txt", label_file(&o.label)), &d.to_text())?;
            }
            if !o.event_log.is_empty() {
                let mut t = String::from("# event deposit_kev\n");
                for (e, d) in &o.event_log {
                    t.push_str(&format!("{e} {d}\n"));
                }
                put(&format!("events_{}.txt", label_file(&o.label)), &t)?;
            }
        }
        Ok(())
    }
}
