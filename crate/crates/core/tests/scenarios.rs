//! Scenario loading, hashing, overrides and diagnostics on real files.

use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use qbkg::data::materials::{parse_materials, render_materials};
use qbkg::geometry::parse::{parse_geometry, render_geometry};
use qbkg::scenario::{Overrides, Scenario};
use qbkg::Error;
use tempfile::TempDir;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data() -> String {
    root().join("data").canonicalize().unwrap().display().to_string()
}

const ABSORBER_GEO: &str = "\
volume name=world solid=box dims=500,500,500 material=vacuum
volume name=can solid=cylinder dims=143,143 material=aluminum parent=world
volume name=inside solid=cylinder dims=140,140 material=vacuum parent=can
volume name=target solid=box dims=20,20,10 material=silicon parent=inside active
surface name=S1 radius=200 half_height=200 center=0,0,0
surface name=S2 radius=60 half_height=60 center=0,0,0
";

fn gamma_toml(extra: &str) -> String {
    format!(
        "name = \"t\"\ngeometry = \"g.geo\"\ndata_dir = \"{d}\"\nseed = 3\n\n[[source]]\nkind = \"surface_flux\"\n\
         label = \"gamma\"\nspecies = \"gamma\"\nsurface = \"S1\"\nspectrum = \"{d}/spectra/gamma_lab.txt\"\n\
         flux = 2.5\nflux_sigma = 0.5\n{extra}",
        d = data()
    )
}

/// Writes `g.geo` and `s.toml` into a fresh directory.
fn setup(geo: &str, toml: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.geo"), geo).unwrap();
    let p = dir.path().join("s.toml");
    fs::write(&p, toml).unwrap();
    (dir, p)
}

fn load(p: &Path) -> Scenario {
    Scenario::load(p, &Overrides::default()).unwrap()
}

#[test]
fn shipped_scenarios_load_and_validate() {
    let mut n = 0;
    for e in fs::read_dir(root().join("scenarios")).unwrap() {
        let p = e.unwrap().path();
        if p.extension().and_then(|x| x.to_str()) != Some("toml") {
            continue;
        }
        let s = Scenario::load(&p, &Overrides::default()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(s.validate().is_empty(), "{}: {:?}", p.display(), s.validate());
        assert!(!s.jobs.is_empty());
        n += 1;
    }
    assert!(n >= 8);
}

#[test]
fn hash_ignores_layout_but_not_content() {
    let base = gamma_toml("events = 1000\n");
    let (_a, pa) = setup(ABSORBER_GEO, &base);
    // spacing, comments and the worker count do not change the identity
    let spaced = base
        .replace(" = ", "   =   ")
        .replace("[[source]]", "# a comment\n\n[[source]]")
        .replace("seed = 3\n", "seed = 3\nworkers = 4\n");
    let geo_spaced = ABSORBER_GEO.replace("dims=143,143", "dims=143.0,143.000   ").replace("\n", "\n\n# c\n");
    let (_b, pb) = setup(&geo_spaced, &spaced);
    let (_c, pc) = setup(ABSORBER_GEO, &base.replace("flux = 2.5", "flux = 2.6"));
    let (_d, pd) = setup(&ABSORBER_GEO.replace("dims=20,20,10", "dims=20,20,11"), &base);
    let h = load(&pa).hash;
    assert_eq!(h.len(), 64);
    assert_eq!(load(&pb).hash, h);
    assert_ne!(load(&pc).hash, h);
    assert_ne!(load(&pd).hash, h);
}

#[test]
fn overrides_replace_seed_workers_and_counts() {
    let (_d, p) = setup(ABSORBER_GEO, &gamma_toml("two_step = { surface = \"S2\", n1 = 1000, n2 = 2000 }\n"));
    let ov = Overrides { seed: Some(9), workers: Some(2), events: Some(77) };
    let s = Scenario::load(&p, &ov).unwrap();
    assert_eq!(s.file.seed, 9);
    assert_eq!(s.file.workers, 2);
    let t = s.jobs[0].two_step.as_ref().unwrap();
    assert_eq!((t.n1, t.n2), (77, 77));
    assert_eq!(s.jobs[0].events, 77);
    // the seed is part of the scenario identity
    assert_ne!(s.hash, load(&p).hash);
}

#[test]
fn missing_component_volume_is_reported() {
    let d = data();
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.geo"), ABSORBER_GEO).unwrap();
    fs::write(
        dir.path().join("c.csv"),
        "id,mass_kg,volumes,assay,estimate,description\nX,0.1,target+nope,X,no,test\n",
    )
    .unwrap();
    fs::write(dir.path().join("r.csv"), "component,isotope,activity\nX,K-40,5 ± 1\n").unwrap();
    let p = dir.path().join("s.toml");
    fs::write(
        &p,
        format!(
            "name = \"t\"\ngeometry = \"g.geo\"\ndata_dir = \"{d}\"\n[[source]]\nkind = \"components\"\n\
             components = \"c.csv\"\nradioassay = \"r.csv\"\nevents = 10\n"
        ),
    )
    .unwrap();
    let e = Scenario::load(&p, &Overrides::default()).unwrap_err().to_string();
    assert!(e.contains("'nope'"), "{e}");
    assert!(!e.contains("configuration: configuration"), "{e}");
}

#[test]
fn unknown_surface_and_bad_flux_both_reported() {
    let t = gamma_toml("events = 10\n").replace("surface = \"S1\"", "surface = \"S9\"")
        + "\n[[source]]\nkind = \"surface_flux\"\nlabel = \"g2\"\nspecies = \"gamma\"\nsurface = \"S1\"\n"
        + &format!("spectrum = \"{}/spectra/gamma_lab.txt\"\nflux = -1.0\nevents = 10\n", data());
    let (_d, p) = setup(ABSORBER_GEO, &t);
    let e = Scenario::load(&p, &Overrides::default()).unwrap_err().to_string();
    assert!(e.contains("'S9'"), "{e}");
    assert!(e.contains("'g2'"), "{e}");
}

#[test]
fn overlap_diagnostic_names_both_volumes() {
    let geo = ABSORBER_GEO.to_string()
        + "volume name=lump solid=box dims=30,30,5 material=aluminum parent=inside offset=0,0,10\n";
    let (_d, p) = setup(&geo, &gamma_toml("events = 10\n"));
    let diags = load(&p).validate();
    assert!(
        diags.iter().any(|m| m.contains("overlap") && m.contains("'target'") && m.contains("'lump'")),
        "{diags:?}"
    );
}

#[test]
fn geometry_render_parse_round_trip() {
    for f in ["cryostat_full.geo", "thin_absorber.geo"] {
        let path = root().join("scenarios/geometry").join(f);
        let g = parse_geometry::<f64>(&fs::read_to_string(&path).unwrap(), f).unwrap();
        let text = render_geometry(&g);
        let g2 = parse_geometry::<f64>(&text, "rendered").unwrap();
        assert_eq!(render_geometry(&g2), text);
        assert_eq!(g2.volumes().len(), g.volumes().len());
        assert_eq!(g2.volume(g2.active()).name, g.volume(g.active()).name);
    }
}

#[test]
fn materials_render_parse_round_trip() {
    let text = fs::read_to_string(root().join("data/materials.txt")).unwrap();
    let ms = parse_materials(&text, "materials.txt").unwrap();
    assert!(ms.len() >= 5);
    let again = parse_materials(&render_materials(&ms), "rendered").unwrap();
    assert_eq!(again, ms);
}

#[test]
fn first_pass_without_crossings_is_starvation() {
    // 15 cm of lead between S1 and S2
    let geo = "\
volume name=world solid=box dims=500,500,500 material=vacuum
volume name=wall solid=cylinder dims=190,190 material=lead parent=world
volume name=hole solid=cylinder dims=40,40 material=vacuum parent=wall
volume name=target solid=box dims=5,5,5 material=silicon parent=hole active
surface name=S1 radius=195 half_height=195 center=0,0,0
surface name=S2 radius=30 half_height=30 center=0,0,0
";
    let (_d, p) = setup(geo, &gamma_toml("two_step = { surface = \"S2\", n1 = 50, n2 = 50 }\n"));
    match load(&p).run() {
        Err(Error::Starved) => {}
        other => panic!("expected starvation, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn per_event_energy_bookkeeping(seed in any::<u64>()) {
        let (_d, p) = setup(ABSORBER_GEO, &gamma_toml("events = 3000\n"));
        let s = Scenario::load(&p, &Overrides { seed: Some(seed), workers: Some(1), events: None }).unwrap();
        let r = s.run().unwrap();
        prop_assert!(r.outcomes[0].max_bookkeeping_error <= 1e-6, "{}", r.outcomes[0].max_bookkeeping_error);
    }
}
