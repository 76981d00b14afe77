//! Event-parallel execution.
//!
//! Events are split into fixed-size chunks run on a rayon pool. Each event
//! draws from its own counter-based stream, and chunk results are merged in
//! chunk order, so outputs do not depend on the worker count.

use rayon::prelude::*;

use crate::data::nuclear::NuclearDb;
use crate::error::{Error, Result};
use crate::geometry::SurfaceDef;
use crate::rng::StreamFactory;
use crate::sources::{ReplayMode, SourceSpec};
use crate::transport::{Binning, CrossingRecord, EventResult, Tally, Transport};
use crate::twostep::{
    build_crossing_distributions, compute_flux2, replay_source, second_pass_time, CrossingDistributions, Flux2,
    Provenance, TwoStepBinning,
};

/// Events per chunk.
pub const CHUNK: u64 = 4096;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 uses every available core.
    pub workers: usize,
    pub binning: Binning,
    /// Keep `(event, deposit)` for events with a chip deposit.
    pub event_log: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 1, workers: 0, binning: Binning::default(), event_log: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub tally: Tally,
    pub crossings: Vec<CrossingRecord>,
    pub event_log: Vec<(u64, f64)>,
    /// Largest per-event relative energy-bookkeeping error.
    pub max_bookkeeping_error: f64,
}

impl RunOutput {
    fn empty(cfg: &RunConfig, threshold: f64) -> Self {
        RunOutput {
            tally: Tally::new(cfg.binning.clone(), threshold),
            crossings: Vec::new(),
            event_log: Vec::new(),
            max_bookkeeping_error: 0.0,
        }
    }

    fn absorb(&mut self, o: RunOutput) {
        self.tally.merge(&o.tally).expect("same binning");
        self.crossings.extend(o.crossings);
        self.event_log.extend(o.event_log);
        self.max_bookkeeping_error = self.max_bookkeeping_error.max(o.max_bookkeeping_error);
    }
}

/// Runs `f` inside a pool of `workers` threads (0 = all cores).
pub fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Transports `n` events of `source`. `label` and `pass` key the random streams.
pub fn run_source(
    transport: &Transport<'_>,
    nuclear: &NuclearDb,
    source: &SourceSpec,
    label: &str,
    pass: u32,
    n: u64,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    let factory = StreamFactory::new(cfg.seed, label, pass);
    let threshold = transport.opts.threshold_kev;
    let chunks = n.div_ceil(CHUNK);
    let run_chunk = |c: u64| {
        let mut out = RunOutput::empty(cfg, threshold);
        let mut res: EventResult = transport.new_result();
        let mut primaries = Vec::with_capacity(16);
        for ev in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let mut rng = factory.stream(ev);
            primaries.clear();
            source.sample_event(transport.geometry(), nuclear, &mut rng, &mut primaries);
            res.reset(ev);
            transport.transport_into(&primaries, &mut rng, &mut res);
            out.tally.record(res.deposit);
            if cfg.event_log && res.deposit > 0.0 {
                out.event_log.push((ev, res.deposit));
            }
            out.crossings.extend_from_slice(&res.crossings);
            out.max_bookkeeping_error = out.max_bookkeeping_error.max(res.bookkeeping_error());
        }
        out
    };
    let parts: Vec<RunOutput> = with_pool(cfg.workers, || (0..chunks).into_par_iter().map(run_chunk).collect())?;
    let mut total = RunOutput::empty(cfg, threshold);
    for p in parts {
        total.absorb(p);
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct TwoStepOutput {
    /// Pass one: S1 emission; its tally is a one-step estimate.
    pub pass1: RunOutput,
    pub distributions: CrossingDistributions,
    pub flux2: Flux2,
    pub pass2: RunOutput,
    /// Pass-two equivalent time, seconds (0 when `n2 = 0`).
    pub t_eq2: f64,
}

#[derive(Clone, Debug)]
pub struct TwoStepPlan<'a> {
    pub s2: &'a SurfaceDef<f64>,
    pub n1: u64,
    pub n2: u64,
    pub mode: ReplayMode,
    pub binning: TwoStepBinning,
}

/// Both passes of the two-step scheme for a surface-flux photon source.
pub fn run_two_step(
    transport: &Transport<'_>,
    nuclear: &NuclearDb,
    source: &SourceSpec,
    label: &str,
    plan: &TwoStepPlan<'_>,
    cfg: &RunConfig,
) -> Result<TwoStepOutput> {
    let SourceSpec::SurfaceFlux(s1) = source else {
        return Err(Error::Config(format!("source '{label}': two-step needs a surface flux source")));
    };
    let t1 = transport.clone().recording(plan.s2.clone());
    let mut pass1 = run_source(&t1, nuclear, source, label, 1, plan.n1, cfg)?;
    let provenance = Provenance {
        n_gen1: plan.n1,
        area1: s1.surface.area(),
        flux1: s1.flux,
        flux1_sigma: s1.flux_sigma,
        surface2: plan.s2.clone(),
    };
    let distributions = build_crossing_distributions(&pass1.crossings, &plan.binning, provenance)?;
    pass1.crossings = Vec::new();
    let flux2 = compute_flux2(&distributions);
    let replay = SourceSpec::Recorded(replay_source(&distributions, plan.mode)?);
    let t2 = transport.clone().killing(plan.s2.clone());
    let pass2 = run_source(&t2, nuclear, &replay, label, 2, plan.n2, cfg)?;
    let t_eq2 = if plan.n2 == 0 { 0.0 } else { second_pass_time(plan.n2, plan.s2.area(), flux2.value) };
    Ok(TwoStepOutput { pass1, distributions, flux2, pass2, t_eq2 })
}
