//! Acceptance suite: one PASS/FAIL line per criterion. Runs the bundled
//! scenarios at their stated event counts, so it takes several minutes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;

use qbkg::analysis::{suppression_between, RateResult, RateValue};
use qbkg::data::load_dataset;
use qbkg::geometry::{parse_geometry, Facet, GeometryModel, Vec3};
use qbkg::rng::StreamFactory;
use qbkg::scenario::{Overrides, RunReport, Scenario};
use qbkg::sources::{DirectionLaw, EnergyHistogram, MuonHemisphere, Particle, Species, SurfaceFlux};
use qbkg::transport::physics::{elastic, max_elastic_transfer};
use qbkg::transport::{Transport, TransportOptions};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(format!("{name}.toml"))
}

fn load(name: &str, ov: &Overrides) -> Scenario {
    Scenario::load(&scenario(name), ov).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Runs only the named sources of a scenario.
fn run_only(name: &str, labels: &[&str]) -> (RunReport, f64) {
    let mut s = load(name, &Overrides::default());
    s.jobs.retain(|j| labels.contains(&j.label.as_str()));
    assert_eq!(s.jobs.len(), labels.len(), "{name}: missing sources {labels:?}");
    let t = Instant::now();
    let r = s.run().unwrap_or_else(|e| panic!("{name}: {e}"));
    (r, t.elapsed().as_secs_f64())
}

fn central(r: &RateResult) -> f64 {
    match r.rate {
        RateValue::Central { value } => value,
        RateValue::Interval { lo, .. } => lo,
        RateValue::Undefined => f64::NAN,
    }
}

fn upper(r: &RateResult) -> f64 {
    match r.rate {
        RateValue::Central { value } => value,
        RateValue::Interval { hi, .. } => hi,
        RateValue::Undefined => f64::NAN,
    }
}

fn rate<'a>(r: &'a RunReport, label: &str) -> &'a RateResult {
    &r.outcome(label).unwrap_or_else(|| panic!("no source '{label}'")).rate
}

fn group<'a>(r: &'a RunReport, id: &str) -> &'a RateResult {
    r.groups.iter().find(|g| g.label == id).unwrap_or_else(|| panic!("no group '{id}'"))
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

struct Suite {
    failed: usize,
    bookkeeping: f64,
}

impl Suite {
    fn line(&mut self, n: u32, ok: bool, text: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} [{n}] {text}", if ok { "PASS" } else { "FAIL" });
    }

    fn track(&mut self, r: &RunReport) {
        for o in &r.outcomes {
            self.bookkeeping = self.bookkeeping.max(o.max_bookkeeping_error);
        }
    }
}

fn muon_rate(s: &mut Suite, standard: &RunReport, secs: f64) {
    let r = rate(standard, "muon");
    let sim = central(r);
    let sc = load("standard_lab", &Overrides::default());
    let (lo, hi) = sc.geometry.aabb(sc.geometry.active());
    let (lx, ly, t) = (hi.x - lo.x, hi.y - lo.y, hi.z - lo.z);
    // cos²-weighted flux through the top face plus the four side faces
    let oracle = 1.0 / 60.0 * (lx * ly * 0.75 + (lx + ly) * t * 0.375) * 1e3;
    let pull = (sim - oracle) / r.stat;
    let ok = within(sim, 8.0, 13.0) && pull.abs() <= 3.0 && secs < 60.0;
    s.line(
        1,
        ok,
        format!(
            "muon rate {sim:.3} ± {:.3} mHz (window 8-13), analytic {oracle:.3} mHz ({pull:+.2} sigma), {} muons in {secs:.1} s",
            r.stat, r.n_gen
        ),
    );
}

fn gamma_rate(s: &mut Suite, standard: &RunReport, secs: f64) {
    let r = rate(standard, "gamma");
    let v = central(r);
    let ts = standard.outcome("gamma").and_then(|o| o.two_step.as_ref()).expect("two-step gamma");
    let ok = within(v, 6.0, 54.0) && secs < 300.0 && ts.n1 == 1_000_000 && ts.n2 == 10_000_000;
    s.line(
        2,
        ok,
        format!(
            "standard gamma rate {v:.2} ± {:.2} mHz (window 6-54), two-step n1={} n2={} in {secs:.1} s",
            r.stat, ts.n1, ts.n2
        ),
    );
}

fn shields(s: &mut Suite) {
    let runs: Vec<RunReport> = ["lngs_noshield", "lngs_ext_shield", "lngs_int_shield", "lngs_full_shield"]
        .iter()
        .map(|n| {
            let (r, _) = run_only(n, &["gamma"]);
            s.track(&r);
            r
        })
        .collect();
    let f = |i: usize| suppression_between(rate(&runs[0], "gamma"), rate(&runs[i], "gamma"));
    let windows = [("external", 35.0, 140.0), ("internal", 1.3, 3.0), ("combined", 50.0, 200.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, lo, hi)) in windows.iter().enumerate() {
        match f(i + 1) {
            Ok((v, e)) => {
                ok &= within(v, *lo, *hi);
                parts.push(format!("{name} {v:.2} ± {e:.2} [{lo}, {hi}]"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    s.line(3, ok, format!("shield suppression: {}", parts.join("; ")));
}

fn neutron_rate(s: &mut Suite, standard: &RunReport, secs: f64) {
    let r = rate(standard, "neutron");
    let v = central(r);
    let ok = within(v, 0.03, 0.75) && secs < 120.0 && r.n_gen == 1_000_000;
    s.line(4, ok, format!("neutron rate {v:.4} ± {:.4} mHz (window 0.03-0.75), {} neutrons in {secs:.1} s", r.stat, r.n_gen));
}

fn close_sources(s: &mut Suite) {
    let sc = load("close_sources", &Overrides::default());
    let all_1e6 = sc.jobs.iter().all(|j| j.events == 1_000_000);
    let t = Instant::now();
    let r = sc.run().expect("close sources");
    let secs = t.elapsed().as_secs_f64();
    s.track(&r);
    let pcb = central(group(&r, "A"));
    let box_hi = upper(group(&r, "B"));
    let ok = within(pcb, 4.52 / 3.0, 4.52 * 3.0) && pcb > 100.0 * box_hi && all_1e6 && secs < 600.0;
    s.line(
        5,
        ok,
        format!(
            "PCB {pcb:.3} mHz (4.52 within x3), copper box <= {box_hi:.3e} mHz (ratio {:.0} > 100), {} runs at 1e6 decays in {secs:.1} s",
            pcb / box_hi,
            sc.jobs.len()
        ),
    );
}

fn lead_210(s: &mut Suite) {
    let sc = load("pb210_internal", &Overrides::default());
    let r = sc.run().expect("pb210");
    s.track(&r);
    let o = &r.outcomes[0].rate;
    let v = central(o);
    let bound = o.upper90.unwrap_or(v + 3.0 * o.stat);
    let ok = v <= 0.1 && bound <= 0.1;
    s.line(
        6,
        ok,
        format!("internal-lead Pb-210 at 100 Bq/kg: {} mHz, 90% bound {bound:.3e} mHz (<= 0.1), {} decays", o.format_value(), o.n_gen),
    );
}

fn two_step(s: &mut Suite) {
    let mut agree = 0;
    let mut worst_identity: f64 = 0.0;
    let mut pulls = Vec::new();
    for seed in 1..=20u64 {
        let sc = load("thin_absorber", &Overrides { seed: Some(seed), ..Default::default() });
        let r = sc.run().expect("thin absorber");
        s.track(&r);
        let o = &r.outcomes[0];
        let ts = o.two_step.as_ref().expect("two-step");
        let (a, sa) = (central(&o.rate), o.rate.stat);
        let (b, sb) = (central(&ts.one_step), ts.one_step.stat);
        let pull = (a - b) / sa.hypot(sb);
        if pull.abs() <= 3.0 {
            agree += 1;
        }
        pulls.push(pull);
        let area2 = sc.geometry.surface(&ts.surface).expect("S2").area();
        let n2 = ts.n2 as f64;
        worst_identity = worst_identity.max((ts.t_eq2 * area2 * ts.flux2 - n2).abs() / n2);
    }
    let ok = agree >= 19 && worst_identity <= 1e-12;
    let mean = pulls.iter().sum::<f64>() / pulls.len() as f64;
    s.line(
        7,
        ok,
        format!(
            "thin absorber: two-step vs one-step within 3 sigma in {agree}/20 seeds (mean pull {mean:+.2}); max |t_eq*A2*flux2 - n2|/n2 = {worst_identity:.1e}"
        ),
    );
}

fn physics(s: &mut Suite) {
    let data = load_dataset(&root().join("data")).expect("data");
    let mut notes = Vec::new();
    let mut ok = true;

    // Uncollided transmission through an active slab: no deposit at all.
    let slab = |mat: &str, half_cm: f64| -> GeometryModel<f64> {
        let text = format!(
            "volume name=world solid=box dims=1000,1000,1000 material=vacuum\n\
             volume name=slab solid=box dims=500,500,{} material={mat} parent=world active\n",
            half_cm * 10.0
        );
        parse_geometry(&text, "slab").expect("slab geometry")
    };
    let n = 100_000u64;
    let cases = [(60.0, "silicon", 1.0), (200.0, "copper", 0.5), (662.0, "copper", 1.5), (1460.0, "lead", 1.0), (2614.0, "lead", 1.5)];
    let mut worst: f64 = 0.0;
    for (e, mat, thick) in cases {
        let g = slab(mat, thick / 2.0);
        let tr = Transport::new(&g, &data.materials, TransportOptions::default()).expect("transport");
        let f = StreamFactory::new(1, mat, 0);
        let mut through = 0u64;
        for ev in 0..n {
            let mut rng = f.stream(ev);
            let p = Particle { species: Species::Gamma, energy: e, position: Vec3::new(0.0, 0.0, 60.0), direction: Vec3::new(0.0, 0.0, -1.0) };
            if tr.transport_event(&[p], &mut rng).deposit == 0.0 {
                through += 1;
            }
        }
        let mu = data.materials.attenuation_coefficient(mat, e).expect("mu") * data.materials.get(mat).expect("mat").density();
        let expect = (-mu * thick).exp();
        let got = through as f64 / n as f64;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        let pull = (got - expect) / sigma;
        worst = worst.max(pull.abs());
        ok &= pull.abs() <= 3.0;
    }
    notes.push(format!("slab transmission at 5 energies, worst {worst:.2} sigma"));

    // Muon through a thin silicon slab at 30 degrees.
    let g = slab("silicon", 0.01625);
    let tr = Transport::new(&g, &data.materials, TransportOptions::default()).expect("transport");
    let cos_t = (30f64).to_radians().cos();
    let dir = Vec3::new((1.0 - cos_t * cos_t).sqrt(), 0.0, -cos_t);
    let p = Particle { species: Species::Muon, energy: 4.0e6, position: Vec3::new(0.0, 0.0, 50.0), direction: dir };
    let res = tr.transport_event(&[p], &mut StreamFactory::new(1, "mu", 0).stream(0));
    let si = data.materials.get("silicon").expect("silicon");
    let want = si.muon.dedx.loglog(4.0e6) * si.density() * 0.0325 / cos_t;
    let rel = (res.deposit - want).abs() / want;
    ok &= rel < 1e-9;
    notes.push(format!("muon deposit {:.4} keV vs dE/dx*rho*path {want:.4} keV", res.deposit));

    // Neutron maximum transfer, head-on and over sampled angles.
    let mut worst_n: f64 = 0.0;
    let mut rng = StreamFactory::new(1, "n", 0).stream(0);
    for a in [1.0f64, 12.0, 28.0, 56.0, 63.0, 207.0] {
        let exact = 4.0 * a / ((a + 1.0) * (a + 1.0));
        let (recoil, _) = elastic(1000.0, a, -1.0);
        worst_n = worst_n.max((max_elastic_transfer(a) - exact).abs()).max((recoil / 1000.0 - exact).abs());
        for _ in 0..10_000 {
            let (r, _) = elastic(1000.0, a, 2.0 * rng.gen::<f64>() - 1.0);
            ok &= r <= 1000.0 * exact * (1.0 + 1e-12);
        }
    }
    ok &= worst_n < 1e-12;
    notes.push(format!("neutron max transfer 4A/(A+1)^2 to {worst_n:.0e}"));

    ok &= s.bookkeeping <= 1e-6;
    notes.push(format!("energy bookkeeping max {:.1e} over all runs", s.bookkeeping));
    s.line(8, ok, notes.join("; "));
}

fn determinism(s: &mut Suite) {
    let ov = |w| Overrides { workers: Some(w), events: Some(40_000), ..Default::default() };
    let a = load("standard_lab", &ov(1)).run().expect("run").summary_json();
    let b = load("standard_lab", &ov(8)).run().expect("run").summary_json();
    let same = a == b;

    let n = 1_000_000u64;
    let f = StreamFactory::new(7, "samplers", 0);
    let mut c: Vec<f64> = (0..n).map(|i| MuonHemisphere::zenith_cos(f.stream(i).gen())).collect();
    c.sort_by(f64::total_cmp);
    let ks = c
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let cdf = x * x * x;
            (cdf - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - cdf).abs())
        })
        .fold(0.0, f64::max);

    let text = "volume name=world solid=box dims=500,500,500 material=vacuum\n\
                volume name=chip solid=box dims=1,1,1 material=silicon parent=world active\n\
                surface name=S radius=100 half_height=150 center=0,0,0\n";
    let g: GeometryModel<f64> = parse_geometry(text, "cosine").expect("geometry");
    let surf = g.surface("S").expect("S").clone();
    let src = SurfaceFlux {
        species: Species::Gamma,
        surface: surf.clone(),
        spectrum: EnergyHistogram::new(vec![100.0, 200.0], vec![1.0]).expect("spectrum"),
        flux: 1.0,
        flux_sigma: 0.0,
        law: DirectionLaw::Cosine,
    };
    let mut sum = 0.0;
    for i in 0..n {
        let p = src.sample(&mut f.stream(n + i));
        let dz = p.position.z - surf.center.z;
        let facet = if (dz - surf.half_height).abs() < 1e-9 {
            Facet::Top
        } else if (dz + surf.half_height).abs() < 1e-9 {
            Facet::Bottom
        } else {
            Facet::Lateral
        };
        sum += p.direction.dot(surf.inward_normal(facet, p.position));
    }
    let mean = sum / n as f64;
    let ok = same && ks < 0.002 && (mean - 2.0 / 3.0).abs() <= 0.002;
    s.line(
        9,
        ok,
        format!(
            "summary.json identical for 1 and 8 workers: {same}; zenith cos^3 KS {ks:.5} (< 0.002); cosine-law mean cos {mean:.5} (2/3 ± 0.002)"
        ),
    );
}

fn main() {
    let mut s = Suite { failed: 0, bookkeeping: 0.0 };
    let (mu, t_mu) = run_only("standard_lab", &["muon"]);
    let (ga, t_ga) = run_only("standard_lab", &["gamma"]);
    let (ne, t_ne) = run_only("standard_lab", &["neutron"]);
    for r in [&mu, &ga, &ne] {
        s.track(r);
    }
    muon_rate(&mut s, &mu, t_mu);
    gamma_rate(&mut s, &ga, t_ga);
    shields(&mut s);
    neutron_rate(&mut s, &ne, t_ne);
    close_sources(&mut s);
    lead_210(&mut s);
    two_step(&mut s);
    physics(&mut s);
    determinism(&mut s);
    println!("{} of 9 criteria passed", 9 - s.failed);
    if s.failed > 0 {
        std::process::exit(1);
    }
}
