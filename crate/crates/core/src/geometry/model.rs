use std::collections::HashMap;

use rand::Rng;

use super::solid::Solid;
use super::surface::SurfaceDef;
use super::vec3::Vec3;
use super::EPSILON;
use crate::error::{Error, Result};
use crate::num::Real;

pub type VolumeId = usize;

/// Declaration of one placed volume before the tree is resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeDecl<T> {
    pub name: String,
    pub solid: Solid<T>,
    pub material: String,
    pub parent: Option<String>,
    /// Translation relative to the parent's origin.
    pub offset: Vec3<T>,
    pub active: bool,
}

#[derive(Clone, Debug)]
pub struct PlacedVolume<T> {
    pub name: String,
    pub solid: Solid<T>,
    pub material: String,
    pub offset: Vec3<T>,
    /// Absolute position of the solid's centre.
    pub origin: Vec3<T>,
    pub parent: Option<VolumeId>,
    pub children: Vec<VolumeId>,
    pub active: bool,
}

/// Immutable tree of placed solids plus the emission/recording surfaces.
#[derive(Clone, Debug)]
pub struct GeometryModel<T> {
    volumes: Vec<PlacedVolume<T>>,
    decls: Vec<VolumeDecl<T>>,
    root: VolumeId,
    active: VolumeId,
    surfaces: Vec<SurfaceDef<T>>,
    index: HashMap<String, VolumeId>,
}

impl<T: Real> GeometryModel<T> {
    pub fn build(decls: Vec<VolumeDecl<T>>, surfaces: Vec<SurfaceDef<T>>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, d) in decls.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(Error::Geometry(format!("duplicate volume name '{}'", d.name)));
            }
            d.solid
                .validate()
                .map_err(|e| Error::Geometry(format!("volume '{}': {e}", d.name)))?;
            if !d.offset.is_finite() {
                return Err(Error::Geometry(format!("volume '{}': non-finite offset", d.name)));
            }
        }
        let roots: Vec<usize> = (0..decls.len()).filter(|&i| decls[i].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Geometry(format!(
                "expected exactly one volume without a parent (the world), found {}",
                roots.len()
            )));
        }
        let mut parent = vec![None; decls.len()];
        for (i, d) in decls.iter().enumerate() {
            if let Some(p) = &d.parent {
                let pi = *index
                    .get(p)
                    .ok_or_else(|| Error::Geometry(format!("volume '{}': unknown parent '{p}'", d.name)))?;
                parent[i] = Some(pi);
            }
        }
        // Resolve absolute origins, rejecting cycles.
        let mut origin: Vec<Option<Vec3<T>>> = vec![None; decls.len()];
        for i in 0..decls.len() {
            let mut chain = vec![i];
            let mut cur = i;
            while let Some(p) = parent[cur] {
                if origin[cur].is_some() {
                    break;
                }
                if chain.contains(&p) {
                    return Err(Error::Geometry(format!("volume '{}': parent cycle", decls[i].name)));
                }
                chain.push(p);
                cur = p;
            }
            for &v in chain.iter().rev() {
                if origin[v].is_none() {
                    let base = parent[v].map(|p| origin[p].expect("parent resolved")).unwrap_or_else(Vec3::zero);
                    origin[v] = Some(base + decls[v].offset);
                }
            }
        }
        let actives: Vec<usize> = (0..decls.len()).filter(|&i| decls[i].active).collect();
        if actives.len() != 1 {
            return Err(Error::Geometry(format!("expected exactly one active volume, found {}", actives.len())));
        }
        let mut volumes: Vec<PlacedVolume<T>> = decls
            .iter()
            .enumerate()
            .map(|(i, d)| PlacedVolume {
                name: d.name.clone(),
                solid: d.solid,
                material: d.material.clone(),
                offset: d.offset,
                origin: origin[i].expect("resolved"),
                parent: parent[i],
                children: Vec::new(),
                active: d.active,
            })
            .collect();
        for i in 0..volumes.len() {
            if let Some(p) = parent[i] {
                volumes[p].children.push(i);
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &surfaces {
            if !seen.insert(s.name.clone()) {
                return Err(Error::Geometry(format!("duplicate surface name '{}'", s.name)));
            }
            if !(s.radius > T::zero() && s.half_height > T::zero()) {
                return Err(Error::Geometry(format!("surface '{}': dimensions must be > 0", s.name)));
            }
        }
        Ok(GeometryModel { volumes, decls, root: roots[0], active: actives[0], surfaces, index })
    }

    pub fn decls(&self) -> &[VolumeDecl<T>] {
        &self.decls
    }

    pub fn root(&self) -> VolumeId {
        self.root
    }

    pub fn active(&self) -> VolumeId {
        self.active
    }

    pub fn volumes(&self) -> &[PlacedVolume<T>] {
        &self.volumes
    }

    #[inline]
    pub fn volume(&self, id: VolumeId) -> &PlacedVolume<T> {
        &self.volumes[id]
    }

    pub fn id(&self, name: &str) -> Option<VolumeId> {
        self.index.get(name).copied()
    }

    pub fn surfaces(&self) -> &[SurfaceDef<T>] {
        &self.surfaces
    }

    pub fn surface(&self, name: &str) -> Option<&SurfaceDef<T>> {
        self.surfaces.iter().find(|s| s.name == name)
    }

    #[inline]
    fn solid_contains(&self, v: VolumeId, p: Vec3<T>) -> bool {
        let pv = &self.volumes[v];
        pv.solid.contains(p - pv.origin)
    }

    #[inline]
    fn descend(&self, mut v: VolumeId, p: Vec3<T>) -> VolumeId {
        'outer: loop {
            for &c in &self.volumes[v].children {
                if self.solid_contains(c, p) {
                    v = c;
                    continue 'outer;
                }
            }
            return v;
        }
    }

    /// Deepest volume containing `p`; `None` outside the world.
    pub fn locate(&self, p: Vec3<T>) -> Option<VolumeId> {
        if !self.solid_contains(self.root, p) {
            return None;
        }
        Some(self.descend(self.root, p))
    }

    /// Same as [`locate`](Self::locate), searching upward from a nearby volume first.
    #[inline]
    pub fn locate_from(&self, start: VolumeId, p: Vec3<T>) -> Option<VolumeId> {
        let mut v = start;
        while !self.solid_contains(v, p) {
            v = self.volumes[v].parent?;
        }
        Some(self.descend(v, p))
    }

    /// Distance from `p` (inside `v`) to the next boundary: the exit of `v`'s
    /// solid or the entry into one of its children, whichever comes first.
    /// Returns the child entered, or `None` when leaving `v`.
    #[inline]
    pub fn step_to_boundary(&self, v: VolumeId, p: Vec3<T>, d: Vec3<T>) -> (T, Option<VolumeId>) {
        let pv = &self.volumes[v];
        let mut best = pv.solid.exit_distance(p - pv.origin, d);
        let mut next = None;
        for &c in &pv.children {
            let cv = &self.volumes[c];
            if let Some(t) = cv.solid.entry_distance(p - cv.origin, d) {
                if t < best {
                    best = t;
                    next = Some(c);
                }
            }
        }
        (best, next)
    }

    /// Distance to the next boundary along a unit direction, and the volume
    /// found just past it (`None` when the ray leaves the world).
    pub fn distance_to_boundary(&self, v: VolumeId, p: Vec3<T>, d: Vec3<T>) -> Result<(T, Option<VolumeId>)> {
        let n = d.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Geometry("degenerate direction".into()));
        }
        let d = d * (T::one() / n);
        let (len, child) = self.step_to_boundary(v, p, d);
        let landing = p + d * (len + T::lit(EPSILON));
        let start = child.or(self.volumes[v].parent).unwrap_or(v);
        Ok((len, self.locate_from(start, landing)))
    }

    /// Analytic volume of the material region (solid minus children), cm³.
    pub fn material_volume(&self, v: VolumeId) -> T {
        let pv = &self.volumes[v];
        pv.children.iter().fold(pv.solid.volume(), |acc, &c| acc - self.volumes[c].solid.volume())
    }

    /// Uniform point in the material region of `v` (its children excluded).
    pub fn sample_point_in_volume<R: Rng + ?Sized>(&self, v: VolumeId, rng: &mut R) -> Vec3<T> {
        let pv = &self.volumes[v];
        loop {
            let p = pv.origin + pv.solid.sample_local(rng);
            if !pv.children.iter().any(|&c| self.solid_contains(c, p)) {
                return p;
            }
        }
    }

    /// Absolute bounding box of a volume's solid.
    pub fn aabb(&self, v: VolumeId) -> (Vec3<T>, Vec3<T>) {
        let pv = &self.volumes[v];
        let h = pv.solid.half_extents();
        (pv.origin - h, pv.origin + h)
    }

    /// Euclidean distance from `p` to the bounding box of `v` (0 inside).
    #[inline]
    pub fn distance_to_aabb(&self, v: VolumeId, p: Vec3<T>) -> T {
        let (lo, hi) = self.aabb(v);
        let z = T::zero();
        let dx = (lo.x - p.x).max(z).max(p.x - hi.x);
        let dy = (lo.y - p.y).max(z).max(p.y - hi.y);
        let dz = (lo.z - p.z).max(z).max(p.z - hi.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Largest distance from `c` to a bounding-box corner of any volume but the world.
    pub fn bounding_radius(&self, c: Vec3<T>) -> T {
        let mut r = T::zero();
        for v in 0..self.volumes.len() {
            if v == self.root {
                continue;
            }
            r = r.max(self.aabb_radius(v, c));
        }
        r
    }

    /// Largest distance from `c` to a corner of `v`'s bounding box.
    pub fn aabb_radius(&self, v: VolumeId, c: Vec3<T>) -> T {
        let (lo, hi) = self.aabb(v);
        let fx = (lo.x - c.x).abs().max((hi.x - c.x).abs());
        let fy = (lo.y - c.y).abs().max((hi.y - c.y).abs());
        let fz = (lo.z - c.z).abs().max((hi.z - c.z).abs());
        (fx * fx + fy * fy + fz * fz).sqrt()
    }

    fn aabbs_overlap(&self, a: VolumeId, b: VolumeId) -> bool {
        let (la, ha) = self.aabb(a);
        let (lb, hb) = self.aabb(b);
        la.x < hb.x && lb.x < ha.x && la.y < hb.y && lb.y < ha.y && la.z < hb.z && lb.z < ha.z
    }

    /// Containment and sibling-overlap checks by sampling `n` points per
    /// volume. Returns one diagnostic per violation.
    pub fn validate_by_sampling<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<String> {
        let mut out = Vec::new();
        for pv in &self.volumes {
            let Some(p) = pv.parent else { continue };
            let outside = (0..n)
                .filter(|_| !self.solid_contains(p, pv.origin + pv.solid.sample_local(rng)))
                .count();
            if outside > 0 {
                out.push(format!(
                    "containment: volume '{}' extends outside its parent '{}' ({outside}/{n} samples)",
                    pv.name, self.volumes[p].name
                ));
            }
        }
        for pv in &self.volumes {
            let kids = &pv.children;
            for (i, &a) in kids.iter().enumerate() {
                for &b in &kids[i + 1..] {
                    if !self.aabbs_overlap(a, b) {
                        continue;
                    }
                    let hits = |x: VolumeId, y: VolumeId, rng: &mut R| {
                        let vx = &self.volumes[x];
                        (0..n).filter(|_| self.solid_contains(y, vx.origin + vx.solid.sample_local(rng))).count()
                    };
                    let k = hits(a, b, rng) + hits(b, a, rng);
                    if k > 0 {
                        out.push(format!(
                            "overlap: volumes '{}' and '{}' overlap ({k} samples)",
                            self.volumes[a].name, self.volumes[b].name
                        ));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn decl(name: &str, solid: Solid<f64>, parent: Option<&str>, offset: Vec3<f64>) -> VolumeDecl<f64> {
        VolumeDecl {
            name: name.into(),
            solid,
            material: "copper".into(),
            parent: parent.map(Into::into),
            offset,
            active: false,
        }
    }

    /// World > box (copper) > cavity (vacuum) > chip.
    fn nested() -> GeometryModel<f64> {
        let mut chip = decl("chip", Solid::Box { half: v(0.595, 0.35, 0.01625) }, Some("cavity"), v(0.0, 0.0, 0.0));
        chip.active = true;
        let decls = vec![
            decl("world", Solid::Box { half: v(100.0, 100.0, 100.0) }, None, Vec3::zero()),
            decl("box", Solid::Box { half: v(2.5, 2.0, 1.2) }, Some("world"), v(0.0, 0.0, 0.5)),
            decl("cavity", Solid::Box { half: v(1.3, 1.1, 0.3) }, Some("box"), v(0.0, 0.0, -0.5)),
            chip,
        ];
        GeometryModel::build(decls, vec![]).unwrap()
    }

    #[test]
    fn locate_examples() {
        let g = nested();
        assert_eq!(g.locate(v(0.0, 0.0, 0.0)), g.id("chip"));
        assert_eq!(g.locate(v(0.0, 0.0, 1.5)), g.id("box"));
        assert_eq!(g.locate(v(2.0, 0.0, 0.0)), g.id("box"));
        assert_eq!(g.locate(v(0.0, 0.0, 0.2)), g.id("cavity"));
        assert_eq!(g.locate(v(50.0, 0.0, 0.0)), g.id("world"));
        assert_eq!(g.locate(v(150.0, 0.0, 0.0)), None);
    }

    #[test]
    fn chip_half_thickness_distance() {
        let g = nested();
        let (len, next) = g.distance_to_boundary(g.active(), v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        assert!((len - 0.01625).abs() < 1e-15);
        assert_eq!(next, g.id("cavity"));
    }

    #[test]
    fn zero_direction_is_an_error() {
        let g = nested();
        assert!(g.distance_to_boundary(0, Vec3::zero(), Vec3::zero()).is_err());
    }

    #[test]
    fn material_volume_excludes_children() {
        let g = nested();
        let b = g.id("box").unwrap();
        assert!((g.material_volume(b) - (48.0 - 2.6 * 2.2 * 0.6)).abs() < 1e-9);
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let cav = g.id("cavity").unwrap();
        for _ in 0..5000 {
            let p = g.sample_point_in_volume(b, &mut r);
            assert_eq!(g.locate(p), Some(b));
            let q = g.sample_point_in_volume(cav, &mut r);
            assert_ne!(g.locate(q), g.id("chip"));
        }
    }

    #[test]
    fn build_errors() {
        let w = decl("world", Solid::Box { half: v(1.0, 1.0, 1.0) }, None, Vec3::zero());
        let mut a = decl("a", Solid::Box { half: v(0.1, 0.1, 0.1) }, Some("nowhere"), Vec3::zero());
        a.active = true;
        let e = GeometryModel::build(vec![w.clone(), a.clone()], vec![]).unwrap_err();
        assert!(e.to_string().contains("unknown parent"));
        let e = GeometryModel::build(vec![w.clone(), w.clone()], vec![]).unwrap_err();
        assert!(e.to_string().contains("duplicate volume name"));
        let e = GeometryModel::build(vec![w], vec![]).unwrap_err();
        assert!(e.to_string().contains("active"));
    }

    #[test]
    fn sampling_finds_overlap_and_escape() {
        let mut chip = decl("chip", Solid::Box { half: v(0.5, 0.5, 0.5) }, Some("world"), v(0.0, 0.0, 0.0));
        chip.active = true;
        let decls = vec![
            decl("world", Solid::Box { half: v(10.0, 10.0, 10.0) }, None, Vec3::zero()),
            chip,
            decl("plate", Solid::Box { half: v(2.0, 2.0, 0.5) }, Some("world"), v(0.0, 0.0, 0.8)),
            decl("rod", Solid::Cylinder { radius: 1.0, half_height: 5.0 }, Some("plate"), Vec3::zero()),
        ];
        let g = GeometryModel::build(decls, vec![]).unwrap();
        let d = g.validate_by_sampling(2000, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(d.iter().any(|m| m.contains("'chip' and 'plate'")), "{d:?}");
        assert!(d.iter().any(|m| m.contains("'rod' extends outside its parent 'plate'")), "{d:?}");
        assert!(nested().validate_by_sampling(2000, &mut ChaCha8Rng::seed_from_u64(2)).is_empty());
    }

    #[test]
    fn f32_model_locates() {
        let mut chip = VolumeDecl {
            name: "chip".into(),
            solid: Solid::Box { half: Vec3::<f32>::new(0.5, 0.5, 0.1) },
            material: "silicon".into(),
            parent: Some("world".into()),
            offset: Vec3::zero(),
            active: true,
        };
        let world = VolumeDecl {
            name: "world".into(),
            solid: Solid::Box { half: Vec3::<f32>::new(5.0, 5.0, 5.0) },
            material: "vacuum".into(),
            parent: None,
            offset: Vec3::zero(),
            active: false,
        };
        chip.offset = Vec3::new(0.0, 0.0, 1.0);
        let g: crate::GeometryF32 = GeometryModel::build(vec![world, chip], vec![]).unwrap();
        assert_eq!(g.locate(Vec3::new(0.0, 0.0, 1.05)), Some(1));
        let (len, next) = g.distance_to_boundary(0, Vec3::zero(), Vec3::ez()).unwrap();
        assert!((len - 0.9).abs() < 1e-6);
        assert_eq!(next, Some(1));
    }
}
