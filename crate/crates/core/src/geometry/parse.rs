//! Declarative geometry files.
//!
//! One statement per line, `key=value` fields, lengths in mm:
//!
//! ```text
//! volume name=world solid=box dims=2600,2600,2600 material=vacuum
//! volume name=chip solid=box dims=5.95,3.5,0.1625 material=silicon parent=cavity offset=0,0,0 active
//! surface name=S2 radius=190 half_height=135 center=0,0,-5
//! ```
//!
//! `dims` are half extents: `box` hx,hy,hz; `cylinder` radius,half_height;
//! `shell` inner,outer,half_height; `disk` radius,half_thickness.
//! The single volume without `parent` is the world.

use std::collections::HashMap;

use super::model::{GeometryModel, VolumeDecl};
use super::solid::Solid;
use super::surface::SurfaceDef;
use super::vec3::Vec3;
use crate::data::table::{content_lines, format_number};
use crate::error::{Error, Result};
use crate::num::Real;

const MM: f64 = 0.1;

fn fields<'a>(path: &str, line: usize, toks: &[&'a str]) -> Result<(HashMap<&'a str, &'a str>, Vec<&'a str>)> {
    let mut kv = HashMap::new();
    let mut flags = Vec::new();
    for t in toks {
        match t.split_once('=') {
            Some((k, v)) => {
                if kv.insert(k, v).is_some() {
                    return Err(Error::parse(path, line, format!("repeated key '{k}'")));
                }
            }
            None => flags.push(*t),
        }
    }
    Ok((kv, flags))
}

fn numbers(path: &str, line: usize, key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("malformed number in {key}: '{x}'")))
        })
        .collect()
}

fn vec3<T: Real>(path: &str, line: usize, key: &str, s: &str) -> Result<Vec3<T>> {
    let v = numbers(path, line, key, s)?;
    if v.len() != 3 {
        return Err(Error::parse(path, line, format!("{key} needs three values")));
    }
    Ok(Vec3::new(T::lit(v[0] * MM), T::lit(v[1] * MM), T::lit(v[2] * MM)))
}

fn required<'a>(kv: &HashMap<&str, &'a str>, key: &str, path: &str, line: usize) -> Result<&'a str> {
    kv.get(key).copied().ok_or_else(|| Error::parse(path, line, format!("missing '{key}'")))
}

pub fn parse_geometry<T: Real>(text: &str, path: &str) -> Result<GeometryModel<T>> {
    let mut decls = Vec::new();
    let mut surfaces = Vec::new();
    for (line, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let (kv, flags) = fields(path, line, &toks[1..])?;
        match toks[0] {
            "volume" => {
                let name = required(&kv, "name", path, line)?;
                let kind = required(&kv, "solid", path, line)?;
                let dims = numbers(path, line, "dims", required(&kv, "dims", path, line)?)?;
                let d = |i: usize| T::lit(dims[i] * MM);
                let want = match kind {
                    "box" | "shell" => 3,
                    "cylinder" | "disk" => 2,
                    other => return Err(Error::parse(path, line, format!("unknown solid '{other}'"))),
                };
                if dims.len() != want {
                    return Err(Error::parse(path, line, format!("solid '{kind}' needs {want} dims")));
                }
                let solid = match kind {
                    "box" => Solid::Box { half: Vec3::new(d(0), d(1), d(2)) },
                    "cylinder" => Solid::Cylinder { radius: d(0), half_height: d(1) },
                    "disk" => Solid::Disk { radius: d(0), half_thickness: d(1) },
                    _ => Solid::CylinderShell { inner: d(0), outer: d(1), half_height: d(2) },
                };
                solid.validate().map_err(|e| Error::parse(path, line, e))?;
                let offset = match kv.get("offset") {
                    Some(s) => vec3(path, line, "offset", s)?,
                    None => Vec3::zero(),
                };
                let active = match flags.as_slice() {
                    [] => false,
                    ["active"] => true,
                    other => return Err(Error::parse(path, line, format!("unexpected tokens {other:?}"))),
                };
                for k in kv.keys() {
                    if !matches!(*k, "name" | "solid" | "dims" | "material" | "parent" | "offset") {
                        return Err(Error::parse(path, line, format!("unknown key '{k}'")));
                    }
                }
                decls.push(VolumeDecl {
                    name: name.to_string(),
                    solid,
                    material: required(&kv, "material", path, line)?.to_string(),
                    parent: kv.get("parent").map(|s| s.to_string()),
                    offset,
                    active,
                });
            }
            "surface" => {
                let num = |key: &str| -> Result<T> {
                    let v = numbers(path, line, key, required(&kv, key, path, line)?)?;
                    match v.as_slice() {
                        [x] => Ok(T::lit(x * MM)),
                        _ => Err(Error::parse(path, line, format!("{key} needs one value"))),
                    }
                };
                let center = match kv.get("center") {
                    Some(s) => vec3(path, line, "center", s)?,
                    None => Vec3::zero(),
                };
                surfaces.push(SurfaceDef {
                    name: required(&kv, "name", path, line)?.to_string(),
                    radius: num("radius")?,
                    half_height: num("half_height")?,
                    center,
                });
            }
            other => return Err(Error::parse(path, line, format!("unknown statement '{other}'"))),
        }
    }
    GeometryModel::build(decls, surfaces).map_err(|e| match e {
        Error::Geometry(m) => Error::Geometry(format!("{path}: {m}")),
        e => e,
    })
}

fn mm<T: Real>(x: T) -> String {
    let v = x.to_f64_lossy() / MM;
    // Undo the cm conversion round-off so canonical text is stable.
    format_number((v * 1e9).round() / 1e9)
}

fn mm3<T: Real>(v: Vec3<T>) -> String {
    format!("{},{},{}", mm(v.x), mm(v.y), mm(v.z))
}

/// Canonical text of a model; equal for files that differ only in layout and comments.
pub fn render_geometry<T: Real>(g: &GeometryModel<T>) -> String {
    let mut out = String::new();
    for d in g.decls() {
        let (kind, dims) = match d.solid {
            Solid::Box { half } => ("box", mm3(half)),
            Solid::Cylinder { radius, half_height } => ("cylinder", format!("{},{}", mm(radius), mm(half_height))),
            Solid::Disk { radius, half_thickness } => ("disk", format!("{},{}", mm(radius), mm(half_thickness))),
            Solid::CylinderShell { inner, outer, half_height } => {
                ("shell", format!("{},{},{}", mm(inner), mm(outer), mm(half_height)))
            }
        };
        out.push_str(&format!("volume name={} solid={kind} dims={dims} material={}", d.name, d.material));
        if let Some(p) = &d.parent {
            out.push_str(&format!(" parent={p} offset={}", mm3(d.offset)));
        }
        if d.active {
            out.push_str(" active");
        }
        out.push('\n');
    }
    for s in g.surfaces() {
        out.push_str(&format!(
            "surface name={} radius={} half_height={} center={}\n",
            s.name,
            mm(s.radius),
            mm(s.half_height),
            mm3(s.center)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "\
# test geometry
volume name=world solid=box dims=1000,1000,1000 material=vacuum
volume name=shield solid=shell dims=50,60,100 material=copper parent=world
volume name=chip solid=box dims=10,10,1 material=silicon parent=world offset=0,0,5 active
surface name=S2 radius=40 half_height=40 center=0,0,0
";

    #[test]
    fn parses_mm_into_cm() {
        let g: GeometryModel<f64> = parse_geometry(TEXT, "t.geo").unwrap();
        let chip = g.volume(g.active());
        assert_eq!(chip.name, "chip");
        assert!((chip.origin.z - 0.5).abs() < 1e-12);
        assert_eq!(g.surface("S2").unwrap().radius, 4.0);
        assert_eq!(g.locate(Vec3::new(5.5, 0.0, 0.0)), g.id("shield"));
    }

    #[test]
    fn render_is_layout_independent() {
        let a: GeometryModel<f64> = parse_geometry(TEXT, "a").unwrap();
        let shuffled = TEXT.replace("name=chip solid=box", "solid=box   name=chip").replace("# test geometry", "");
        let b: GeometryModel<f64> = parse_geometry(&shuffled, "b").unwrap();
        assert_eq!(render_geometry(&a), render_geometry(&b));
        let c: GeometryModel<f64> = parse_geometry(&render_geometry(&a), "c").unwrap();
        assert_eq!(render_geometry(&a), render_geometry(&c));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_geometry::<f64>("volume name=w solid=sphere dims=1 material=vacuum\n", "g").unwrap_err();
        assert_eq!(e.to_string(), "g:1: unknown solid 'sphere'");
        let e = parse_geometry::<f64>("\nvolume name=w solid=box dims=1,2 material=vacuum\n", "g").unwrap_err();
        assert_eq!(e.to_string(), "g:2: solid 'box' needs 3 dims");
        let e = parse_geometry::<f64>("volume name=w solid=shell dims=2,1,1 material=vacuum\n", "g").unwrap_err();
        assert!(e.to_string().contains("inner radius"));
    }
}
