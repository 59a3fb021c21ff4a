//! Exact restriction of complexes to superlevel sets, level sets and closed
//! half-spaces.
//!
//! Every simplex `σ` of the input is cut by an affine function `g` given by
//! its vertex values. The pieces `σ ∩ {g ≥ 0}` and `σ ∩ {g = 0}` are convex
//! polytopes whose face lattices are known combinatorially from the signs of
//! `g` on the vertices of `σ`, so no geometric predicate is ever evaluated.
//! Each polytope is triangulated by pulling its vertices in a fixed global
//! order; pulling triangulations restrict to pulling triangulations on faces,
//! so adjacent pieces agree on what they share and the output is closed.
//!
//! New vertices sit on input edges whose endpoints have strictly opposite
//! signs. They are identified by their edge, never by coordinates.
//!
//! To avoid emitting shared faces twice, each output simplex is produced only
//! by its carrier: the unique polytope face whose relative interior contains
//! it. The carriers are `σ` itself (σ entirely kept), `σ ∩ {g ≥ 0}` and
//! `σ ∩ {g = 0}` for simplices with vertices on both sides.

use std::collections::HashMap;
use std::fmt;

use crate::complex::{dot, Complex, MAX_SIMPLEX_DIM};
use crate::error::{Error, Result};
use crate::field::PlField;

/// Where a vertex of a [`ClippedComplex`] comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexOrigin {
    /// Vertex `i` of the input complex.
    Original(u32),
    /// Point `x_lo + s (x_hi - x_lo)` on input edge `(lo, hi)`, where `lo`
    /// is the endpoint outside the region.
    Crossing { lo: u32, hi: u32, s: f64 },
}

/// A complex obtained by clipping, together with the provenance of its
/// vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ClippedComplex {
    pub complex: Complex,
    pub provenance: Vec<VertexOrigin>,
}

impl ClippedComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.complex.euler_characteristic()
    }

    /// Index of the vertex created on input edge `{a, b}`, if any.
    pub fn crossing_vertex(&self, a: u32, b: u32) -> Option<usize> {
        let (a, b) = (a.min(b), a.max(b));
        self.provenance.iter().position(|p| match *p {
            VertexOrigin::Crossing { lo, hi, .. } => lo.min(hi) == a && lo.max(hi) == b,
            _ => false,
        })
    }
}

impl fmt::Display for ClippedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = &self.complex;
        writeln!(f, "clipped complex: {} vertices, f-vector {:?}, chi {}", k.num_points(), k.f_vector(), k.euler_characteristic())?;
        for (i, origin) in self.provenance.iter().enumerate() {
            write!(f, "v{i} {:?}", k.point(i))?;
            match origin {
                VertexOrigin::Original(j) => writeln!(f, " original {j}")?,
                VertexOrigin::Crossing { lo, hi, s } => writeln!(f, " edge ({lo},{hi}) s={s}")?,
            }
        }
        for s in k.iter() {
            writeln!(f, "{s:?}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cut {
    /// Keep `σ ∩ {g ≥ 0}`.
    AtLeast,
    /// Keep `σ ∩ {g = 0}`.
    Equal,
}

/// Superlevel set `{f ≥ t}` of a PL field.
pub fn superlevel_restrict(f: &PlField, t: f64) -> Result<ClippedComplex> {
    check_threshold(t)?;
    let g: Vec<f64> = f.values().iter().map(|&v| v - t).collect();
    Ok(clip(f.complex(), &g, Cut::AtLeast))
}

/// Level set `{f = t}` of a PL field.
pub fn level_restrict(f: &PlField, t: f64) -> Result<ClippedComplex> {
    check_threshold(t)?;
    let g: Vec<f64> = f.values().iter().map(|&v| v - t).collect();
    Ok(clip(f.complex(), &g, Cut::Equal))
}

/// Closed half-space restriction `K ∩ {x . v ≤ h}`.
///
/// Provenance of the result refers to the vertices of `k.complex`.
pub fn halfspace_clip(k: &ClippedComplex, v: &[f64], h: f64) -> Result<ClippedComplex> {
    halfspace_clip_complex(&k.complex, v, h)
}

/// [`halfspace_clip`] for a bare complex.
pub fn halfspace_clip_complex(k: &Complex, v: &[f64], h: f64) -> Result<ClippedComplex> {
    if v.len() != k.ambient_dim() {
        return Err(Error::param("direction dimension does not match the complex"));
    }
    let norm = dot(v, v).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("direction must be a unit vector (norm {norm})")));
    }
    let g: Vec<f64> = k.points().chunks_exact(k.ambient_dim()).map(|p| h - dot(p, v)).collect();
    Ok(clip(k, &g, Cut::AtLeast))
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::ThresholdOutOfRange(t))
    }
}

// Vertex keys order vertices globally: original vertices by index, then
// crossing vertices by their (sorted) edge.
const CROSS_TAG: u64 = 1 << 62;

fn orig_key(i: u32) -> u64 {
    i as u64
}

fn cross_key(a: u32, b: u32) -> u64 {
    let (a, b) = (a.min(b) as u64, a.max(b) as u64);
    CROSS_TAG | (a << 31) | b
}

/// At most 6 vertices appear on a clipped tetrahedron (a prism).
const MAX_FACE_KEYS: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq)]
struct KeySet {
    keys: [u64; MAX_FACE_KEYS],
    len: u8,
}

impl KeySet {
    fn new() -> Self {
        KeySet {
            keys: [u64::MAX; MAX_FACE_KEYS],
            len: 0,
        }
    }

    fn as_slice(&self) -> &[u64] {
        &self.keys[..self.len as usize]
    }

    fn insert(&mut self, k: u64) {
        let s = self.as_slice();
        match s.binary_search(&k) {
            Ok(_) => {}
            Err(pos) => {
                let n = self.len as usize;
                self.keys.copy_within(pos..n, pos + 1);
                self.keys[pos] = k;
                self.len += 1;
            }
        }
    }

    fn contains(&self, k: u64) -> bool {
        self.as_slice().binary_search(&k).is_ok()
    }

    fn is_subset_of(&self, other: &KeySet) -> bool {
        self.as_slice().iter().all(|&k| other.contains(k))
    }
}

#[derive(Clone, Copy)]
struct Face {
    keys: KeySet,
    dim: usize,
}

/// Face lattice of `σ ∩ {g ≥ 0}` (or `σ ∩ {g = 0}`), built from the vertex
/// signs. Faces are `τ ∩ {g ≥ 0}` and `τ ∩ {g = 0}` over the faces `τ ⊆ σ`.
fn cut_faces(verts: &[u32], sign: &[i8], cut: Cut, out: &mut Vec<Face>) {
    out.clear();
    let m = verts.len();
    let push = |face: Face, out: &mut Vec<Face>| {
        if face.keys.len > 0 && !out.iter().any(|f| f.keys == face.keys) {
            out.push(face);
        }
    };
    for mask in 1u32..(1 << m) {
        let members = || (0..m).filter(move |i| mask & (1 << i) != 0);
        let n_pos = members().filter(|&i| sign[i] > 0).count();
        let n_neg = members().filter(|&i| sign[i] < 0).count();
        let size = mask.count_ones() as usize;

        let mut zero = KeySet::new();
        for i in members().filter(|&i| sign[i] == 0) {
            zero.insert(orig_key(verts[i]));
        }
        let mut crossings = zero;
        for p in members().filter(|&i| sign[i] > 0) {
            for n in members().filter(|&i| sign[i] < 0) {
                crossings.insert(cross_key(verts[p], verts[n]));
            }
        }

        if n_pos == 0 && n_neg == 0 {
            push(Face { keys: zero, dim: size - 1 }, out);
        }
        if n_pos > 0 && n_neg > 0 {
            push(Face { keys: crossings, dim: size - 2 }, out);
        }
        if cut == Cut::AtLeast && n_pos > 0 {
            let mut keys = crossings;
            for p in members().filter(|&i| sign[i] > 0) {
                keys.insert(orig_key(verts[p]));
            }
            push(Face { keys, dim: size - 1 }, out);
        }
    }
}

/// Pulling triangulation of face `fi`: top-dimensional simplices only.
fn pull(faces: &[Face], fi: usize, out: &mut Vec<KeySet>) {
    let face = faces[fi];
    if face.keys.len as usize == face.dim + 1 {
        out.push(face.keys);
        return;
    }
    let apex = face.keys.keys[0];
    let mut sub = Vec::new();
    for (gi, g) in faces.iter().enumerate() {
        if g.dim + 1 == face.dim && !g.keys.contains(apex) && g.keys.is_subset_of(&face.keys) {
            sub.clear();
            pull(faces, gi, &mut sub);
            for s in &sub {
                let mut cone = *s;
                cone.insert(apex);
                out.push(cone);
            }
        }
    }
}

struct Builder<'a> {
    input: &'a Complex,
    g: &'a [f64],
    orig_map: Vec<u32>,
    cross_map: HashMap<u64, u32>,
    points: Vec<f64>,
    provenance: Vec<VertexOrigin>,
    cells: Vec<Vec<u32>>,
}

impl<'a> Builder<'a> {
    fn vertex(&mut self, key: u64) -> u32 {
        if key & CROSS_TAG == 0 {
            let i = key as usize;
            if self.orig_map[i] == u32::MAX {
                self.orig_map[i] = self.provenance.len() as u32;
                self.points.extend_from_slice(self.input.point(i));
                self.provenance.push(VertexOrigin::Original(i as u32));
            }
            return self.orig_map[i];
        }
        if let Some(&idx) = self.cross_map.get(&key) {
            return idx;
        }
        let a = ((key >> 31) & 0x7fff_ffff) as u32;
        let b = (key & 0x7fff_ffff) as u32;
        let (lo, hi) = if self.g[a as usize] < 0.0 { (a, b) } else { (b, a) };
        let (glo, ghi) = (self.g[lo as usize], self.g[hi as usize]);
        let s = -glo / (ghi - glo);
        let (xl, xh) = (self.input.point(lo as usize), self.input.point(hi as usize));
        for (l, h) in xl.iter().zip(xh) {
            self.points.push(l + s * (h - l));
        }
        let idx = self.provenance.len() as u32;
        self.provenance.push(VertexOrigin::Crossing { lo, hi, s });
        self.cross_map.insert(key, idx);
        idx
    }

    fn emit_keys(&mut self, keys: &[u64]) {
        let mut idx = [0u32; MAX_SIMPLEX_DIM + 1];
        for (slot, &k) in idx.iter_mut().zip(keys) {
            *slot = self.vertex(k);
        }
        let s = &mut idx[..keys.len()];
        s.sort_unstable();
        self.cells[keys.len() - 1].extend_from_slice(s);
    }

    fn emit_original(&mut self, s: &[u32]) {
        let mut keys = [0u64; MAX_SIMPLEX_DIM + 1];
        for (k, &v) in keys.iter_mut().zip(s) {
            *k = orig_key(v);
        }
        self.emit_keys(&keys[..s.len()]);
    }

    /// Emits the simplices of the pulling triangulation of face `fi` that
    /// lie in its relative interior.
    fn emit_interior(&mut self, faces: &[Face], fi: usize, scratch: &mut Vec<KeySet>) {
        let top = faces[fi];
        scratch.clear();
        pull(faces, fi, scratch);
        let facets: Vec<KeySet> = faces
            .iter()
            .filter(|g| g.dim + 1 == top.dim && g.keys.is_subset_of(&top.keys))
            .map(|g| g.keys)
            .collect();
        let mut done: Vec<KeySet> = Vec::new();
        for simplex in scratch.iter() {
            let m = simplex.len as usize;
            for mask in 1u32..(1 << m) {
                let mut sub = KeySet::new();
                for i in (0..m).filter(|i| mask & (1 << i) != 0) {
                    sub.insert(simplex.keys[i]);
                }
                if facets.iter().any(|f| sub.is_subset_of(f)) || done.contains(&sub) {
                    continue;
                }
                done.push(sub);
            }
        }
        for s in &done {
            self.emit_keys(s.as_slice());
        }
    }
}

pub(crate) fn clip(input: &Complex, g: &[f64], cut: Cut) -> ClippedComplex {
    assert_eq!(g.len(), input.num_points());
    let mut b = Builder {
        input,
        g,
        orig_map: vec![u32::MAX; input.num_points()],
        cross_map: HashMap::new(),
        points: Vec::new(),
        provenance: Vec::new(),
        cells: vec![Vec::new(); MAX_SIMPLEX_DIM + 1],
    };
    let mut faces = Vec::with_capacity(32);
    let mut scratch = Vec::new();
    let mut sign = [0i8; MAX_SIMPLEX_DIM + 1];
    for s in input.iter() {
        let mut n_pos = 0;
        let mut n_neg = 0;
        for (sg, &v) in sign.iter_mut().zip(s) {
            let gv = g[v as usize];
            *sg = if gv > 0.0 {
                n_pos += 1;
                1
            } else if gv < 0.0 {
                n_neg += 1;
                -1
            } else {
                0
            };
        }
        let mixed = n_pos > 0 && n_neg > 0;
        match cut {
            Cut::AtLeast if n_neg == 0 => b.emit_original(s),
            Cut::Equal if n_neg == 0 && n_pos == 0 => b.emit_original(s),
            _ if mixed => {
                cut_faces(s, &sign[..s.len()], cut, &mut faces);
                let full_dim = s.len() - 1;
                if cut == Cut::AtLeast {
                    let top = faces.iter().position(|f| f.dim == full_dim).expect("clipped cell present");
                    b.emit_interior(&faces, top, &mut scratch);
                }
                let keys = section_keys(s, &sign[..s.len()]);
                let section = faces.iter().position(|f| f.keys == keys).expect("section present");
                b.emit_interior(&faces, section, &mut scratch);
            }
            _ => {}
        }
    }
    let mut complex = Complex::new(input.ambient_dim(), b.points);
    for (k, cells) in b.cells.iter().enumerate() {
        for simplex in cells.chunks_exact(k + 1) {
            complex.push_sorted(simplex);
        }
    }
    ClippedComplex {
        complex,
        provenance: b.provenance,
    }
}

/// Vertices of `σ ∩ {g = 0}`.
fn section_keys(s: &[u32], sign: &[i8]) -> KeySet {
    let mut keys = KeySet::new();
    for (i, &a) in s.iter().enumerate() {
        match sign[i] {
            0 => keys.insert(orig_key(a)),
            1 => {
                for (j, &b) in s.iter().enumerate() {
                    if sign[j] < 0 {
                        keys.insert(cross_key(a, b));
                    }
                }
            }
            _ => {}
        }
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment_field(a: f64, b: f64) -> PlField {
        PlField::from_parts(1, vec![0.0, 1.0], vec![a, b], [vec![0u32], vec![1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn constant_one_field_is_unchanged() {
        let f = PlField::from_parts(2, vec![0., 0., 1., 0., 0., 1.], vec![1.0; 3], [vec![0u32, 1, 2]].iter().flat_map(|s| faces_of(s))).unwrap();
        let c = superlevel_restrict(&f, 0.5).unwrap();
        assert_eq!(c.complex.f_vector(), f.complex().f_vector());
        assert!(c.provenance.iter().all(|p| matches!(p, VertexOrigin::Original(_))));
    }

    #[test]
    fn half_segment() {
        let c = superlevel_restrict(&segment_field(0.0, 1.0), 0.5).unwrap();
        assert_eq!(c.complex.f_vector(), [2, 1, 0, 0]);
        assert_eq!(c.euler_characteristic(), 1);
        let x = c.crossing_vertex(0, 1).unwrap();
        assert_eq!(c.complex.point(x), &[0.5]);
        assert_eq!(c.provenance[x], VertexOrigin::Crossing { lo: 0, hi: 1, s: 0.5 });
    }

    #[test]
    fn level_of_segment_is_a_point() {
        let c = level_restrict(&segment_field(0.0, 1.0), 0.5).unwrap();
        assert_eq!(c.complex.f_vector(), [1, 0, 0, 0]);
    }

    #[test]
    fn exact_hits_are_kept() {
        let c = superlevel_restrict(&segment_field(0.25, 0.5), 0.5).unwrap();
        assert_eq!(c.complex.f_vector(), [1, 0, 0, 0]);
        let c = level_restrict(&segment_field(0.25, 0.5), 0.5).unwrap();
        assert_eq!(c.complex.f_vector(), [1, 0, 0, 0]);
    }

    #[test]
    fn constant_triangle_level_set_is_whole_triangle() {
        let f = PlField::from_parts(2, vec![0., 0., 1., 0., 0., 1.], vec![0.4; 3], faces_of(&[0, 1, 2])).unwrap();
        let c = level_restrict(&f, 0.4).unwrap();
        assert_eq!(c.complex.f_vector(), [3, 3, 1, 0]);
        assert_eq!(c.euler_characteristic(), 1);
    }

    #[test]
    fn tetra_cross_section_is_two_triangles() {
        let pts = vec![0., 0., 0., 1., 0., 0., 0., 1., 0., 0., 0., 1.];
        let f = PlField::from_parts(3, pts, vec![0.0, 0.0, 1.0, 1.0], faces_of(&[0, 1, 2, 3])).unwrap();
        let c = level_restrict(&f, 0.5).unwrap();
        // 4 crossing edges (0-2, 0-3, 1-2, 1-3), a quadrilateral split by one diagonal
        assert_eq!(c.complex.f_vector(), [4, 5, 2, 0]);
        assert_eq!(c.euler_characteristic(), 1);
        let sup = superlevel_restrict(&f, 0.5).unwrap();
        assert_eq!(sup.euler_characteristic(), 1);
        // prism: 6 vertices, triangulated into 3 tetrahedra
        assert_eq!(sup.complex.count(0), 6);
        assert_eq!(sup.complex.count(3), 3);
        sup.complex.check_closed().unwrap();
    }

    #[test]
    fn halfspace_examples() {
        let pts = vec![0., 0., 1., 0., 1., 1., 0., 1.];
        let mut simplices = faces_of(&[0, 1, 2]);
        simplices.extend(faces_of(&[0, 2, 3]));
        simplices.sort();
        simplices.dedup();
        let k = Complex::from_simplices(2, pts, &simplices).unwrap();
        let whole = halfspace_clip_complex(&k, &[1.0, 0.0], 2.0).unwrap();
        assert_eq!(whole.complex.f_vector(), k.f_vector());
        let empty = halfspace_clip_complex(&k, &[1.0, 0.0], -0.5).unwrap();
        assert!(empty.complex.is_empty());
        let left = halfspace_clip_complex(&k, &[1.0, 0.0], 0.5).unwrap();
        assert_eq!(left.euler_characteristic(), 1);
        left.complex.check_closed().unwrap();
        for p in left.complex.points().chunks(2) {
            assert!(p[0] <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_thresholds() {
        let f = segment_field(0.0, 1.0);
        assert!(matches!(superlevel_restrict(&f, 0.0), Err(Error::ThresholdOutOfRange(_))));
        assert!(matches!(level_restrict(&f, 1.5), Err(Error::ThresholdOutOfRange(_))));
    }

    fn faces_of(s: &[u32]) -> Vec<Vec<u32>> {
        let m = s.len();
        let mut out: Vec<Vec<u32>> = (1u32..(1 << m)).map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect()).collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        out
    }
}
