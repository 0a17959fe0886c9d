//! Shapes: triangulated meshes, unions of equal-radius balls, and the
//! two-arc shape families used by the simulation studies.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

/// Slack allowed when checking that a shape sits inside its bounding ball.
pub const CONTAINMENT_TOL: f64 = 1e-9;

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A closed simplicial complex embedded in R^2 or R^3.
///
/// Simplices are stored with sorted vertex indices. Every vertex is a
/// 0-simplex; `edges`, `triangles` and `tetrahedra` hold the higher ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    dim: usize,
    vertices: Vec<Point>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    tetrahedra: Vec<[usize; 4]>,
}

fn sorted<const N: usize>(mut s: [usize; N]) -> [usize; N] {
    s.sort_unstable();
    s
}

fn check_simplex<const N: usize>(s: &[usize; N], nv: usize) -> Result<()> {
    for (i, &v) in s.iter().enumerate() {
        if v >= nv {
            return Err(Error::Validation(format!(
                "simplex {s:?} references vertex {v} but the mesh has {nv} vertices"
            )));
        }
        if s[..i].contains(&v) {
            return Err(Error::Validation(format!(
                "degenerate simplex {s:?}: repeated vertex {v}"
            )));
        }
    }
    Ok(())
}

fn unique<const N: usize>(items: &[[usize; N]], what: &str) -> Result<HashSet<[usize; N]>> {
    let mut set = HashSet::with_capacity(items.len());
    for s in items {
        if !set.insert(*s) {
            return Err(Error::Validation(format!("duplicate {what} {s:?}")));
        }
    }
    Ok(set)
}

impl TriMesh {
    /// Builds a mesh from explicit simplices, checking that indices are
    /// valid and that the complex is closed under taking faces.
    pub fn new(
        vertices: Vec<Point>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
        tetrahedra: Vec<[usize; 4]>,
    ) -> Result<Self> {
        let dim = check_points(&vertices)?;
        let nv = vertices.len();
        if !tetrahedra.is_empty() && dim < 3 {
            return Err(Error::Validation(
                "tetrahedra require ambient dimension 3".into(),
            ));
        }
        for s in &edges {
            check_simplex(s, nv)?;
        }
        for s in &triangles {
            check_simplex(s, nv)?;
        }
        for s in &tetrahedra {
            check_simplex(s, nv)?;
        }
        let edges: Vec<_> = edges.into_iter().map(sorted).collect();
        let triangles: Vec<_> = triangles.into_iter().map(sorted).collect();
        let tetrahedra: Vec<_> = tetrahedra.into_iter().map(sorted).collect();

        let edge_set = unique(&edges, "edge")?;
        let tri_set = unique(&triangles, "triangle")?;
        unique(&tetrahedra, "tetrahedron")?;

        for &[a, b, c] in &triangles {
            for e in [[a, b], [a, c], [b, c]] {
                if !edge_set.contains(&e) {
                    return Err(Error::Validation(format!(
                        "edge {e:?} of triangle {:?} is missing",
                        [a, b, c]
                    )));
                }
            }
        }
        for &[a, b, c, d] in &tetrahedra {
            for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
                if !tri_set.contains(&f) {
                    return Err(Error::Validation(format!(
                        "face {f:?} of tetrahedron {:?} is missing",
                        [a, b, c, d]
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            vertices,
            edges,
            triangles,
            tetrahedra,
        })
    }

    /// Builds the closed complex spanned by a list of triangles: edges are
    /// derived from the faces and deduplicated.
    pub fn from_triangles(vertices: Vec<Point>, triangles: &[[usize; 3]]) -> Result<Self> {
        let nv = vertices.len();
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        let mut tris = Vec::with_capacity(triangles.len());
        for t in triangles {
            check_simplex(t, nv)?;
            let [a, b, c] = sorted(*t);
            for e in [[a, b], [a, c], [b, c]] {
                if seen.insert(e) {
                    edges.push(e);
                }
            }
            tris.push([a, b, c]);
        }
        Self::new(vertices, edges, tris, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tetrahedra(&self) -> &[[usize; 4]] {
        &self.tetrahedra
    }

    /// Number of k-simplices.
    pub fn count(&self, k: usize) -> usize {
        match k {
            0 => self.vertices.len(),
            1 => self.edges.len(),
            2 => self.triangles.len(),
            3 => self.tetrahedra.len(),
            _ => 0,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.count(0) as i64 - self.count(1) as i64 + self.count(2) as i64
            - self.count(3) as i64
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }

    /// Drops the third coordinate of a mesh lying in the plane z = 0.
    pub fn to_planar(&self) -> Result<Self> {
        if self.dim == 2 {
            return Ok(self.clone());
        }
        if !self.tetrahedra.is_empty() || self.vertices.iter().any(|v| v[2] != 0.0) {
            return Err(Error::Validation(
                "mesh is not planar (some z coordinate is nonzero)".into(),
            ));
        }
        let mut out = self.clone();
        out.dim = 2;
        for v in &mut out.vertices {
            v.truncate(2);
        }
        Ok(out)
    }
}

fn check_points(points: &[Point]) -> Result<usize> {
    let dim = points.first().map_or(0, |p| p.len());
    if !(2..=3).contains(&dim) {
        return Err(Error::Validation(format!(
            "points must live in R^2 or R^3 (got dimension {dim})"
        )));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::Validation(
                "points have inconsistent dimensions".into(),
            ));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite coordinate in {p:?}")));
        }
    }
    Ok(dim)
}

/// Parses an ASCII OFF file with triangle faces.
pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());

    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("OFF") {
        return Err(Error::Parse(format!("expected OFF header, found {header:?}")));
    }
    // Counts may share the header line ("OFF 4 4 6").
    let rest: Vec<&str> = head.collect();
    let counts_line: Vec<&str> = if rest.is_empty() {
        lines
            .next()
            .ok_or_else(|| Error::Parse("missing vertex/face count line".into()))?
            .split_whitespace()
            .collect()
    } else {
        rest
    };
    let count = |i: usize, what: &str| -> Result<usize> {
        counts_line
            .get(i)
            .ok_or_else(|| Error::Parse(format!("missing {what} count")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what} count: {e}")))
    };
    let nv = count(0, "vertex")?;
    let nf = count(1, "face")?;

    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {nv} vertices, found {i}")))?;
        let coords: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("vertex {i}: {e}")))?;
        if coords.len() != 3 {
            return Err(Error::Parse(format!("vertex {i}: expected 3 coordinates")));
        }
        vertices.push(coords);
    }

    let mut triangles = Vec::with_capacity(nf);
    for i in 0..nf {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {nf} faces, found {i}")))?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("face {i}: {e}")))?;
        match idx.as_slice() {
            [3, a, b, c, ..] => triangles.push([*a, *b, *c]),
            [k, ..] => {
                return Err(Error::Validation(format!(
                    "face {i} has {k} vertices; only triangles are supported"
                )))
            }
            [] => return Err(Error::Parse(format!("face {i} is empty"))),
        }
    }
    TriMesh::from_triangles(vertices, &triangles)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_off(&text)
}

/// A union of closed balls of a common radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallUnion {
    centers: Vec<Point>,
    radius: f64,
}

impl BallUnion {
    pub fn new(centers: Vec<Point>, radius: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Validation("ball union needs at least one center".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Validation(format!("radius must be positive, got {radius}")));
        }
        check_points(&centers)?;
        Ok(Self { centers, radius })
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn max_center_norm(&self) -> f64 {
        self.centers.iter().map(|c| norm(c)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Mesh(TriMesh),
    Balls(BallUnion),
}

/// A shape together with a radius R of a closed ball about the origin that
/// contains it. The filtration horizon is T = 2R.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    geometry: Geometry,
    bounding_radius: f64,
}

impl ShapeSpec {
    /// Checks containment: mesh vertices, and ball centers, must lie in the
    /// closed ball of radius R. Ball unions are filtered through their
    /// centers, so the balls themselves may poke out of B(0, R).
    pub fn new(geometry: Geometry, bounding_radius: f64) -> Result<Self> {
        if !(bounding_radius > 0.0 && bounding_radius.is_finite()) {
            return Err(Error::Validation(format!(
                "bounding radius must be positive, got {bounding_radius}"
            )));
        }
        let extent = match &geometry {
            Geometry::Mesh(m) => m.max_vertex_norm(),
            Geometry::Balls(b) => b.max_center_norm(),
        };
        if extent > bounding_radius + CONTAINMENT_TOL {
            return Err(Error::Containment(format!(
                "shape extends to radius {extent} beyond R = {bounding_radius}"
            )));
        }
        Ok(Self {
            geometry,
            bounding_radius,
        })
    }

    /// Wraps a mesh with R equal to its largest vertex norm.
    pub fn from_mesh(mesh: TriMesh) -> Result<Self> {
        let r = mesh.max_vertex_norm();
        let r = if r > 0.0 { r } else { 1.0 };
        Self::new(Geometry::Mesh(mesh), r)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn horizon(&self) -> f64 {
        2.0 * self.bounding_radius
    }

    pub fn dim(&self) -> usize {
        match &self.geometry {
            Geometry::Mesh(m) => m.dim(),
            Geometry::Balls(b) => b.dim(),
        }
    }
}

/// Bounding radius used for every member of the two-arc families.
pub const FAMILY_BOUNDING_RADIUS: f64 = 1.5;
/// Tube radius of the two-arc families.
pub const FAMILY_TUBE_RADIUS: f64 = 0.2;
const ARC_OFFSET: f64 = 0.4;

/// Parameters of the perturbed two-arc family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    /// Dissimilarity index; opens the first arc by επ/5 at both ends.
    pub epsilon: f64,
    /// Standard deviation of the four amplitude multipliers (mean 1).
    pub noise_sd: f64,
    /// Centers per arc.
    pub curve_points: usize,
    pub tube_radius: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            noise_sd: 0.05,
            curve_points: 100,
            tube_radius: FAMILY_TUBE_RADIUS,
        }
    }
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise_sd must be > 0, got {}",
                self.noise_sd
            )));
        }
        if self.curve_points < 3 {
            return Err(Error::InvalidArgument(format!(
                "curve_points must be >= 3, got {}",
                self.curve_points
            )));
        }
        if !(self.tube_radius > 0.0 && self.tube_radius.is_finite()) {
            return Err(Error::InvalidArgument("tube_radius must be > 0".into()));
        }
        Ok(())
    }

    /// Parameter range of the first arc.
    pub fn first_arc_range(&self) -> (f64, f64) {
        ((1.0 - self.epsilon) * PI / 5.0, (9.0 + self.epsilon) * PI / 5.0)
    }
}

/// An ellipse arc `(x0 + a cos t, b sin t)` sampled at `t_j = start + (j/J)(end - start)`,
/// `j = 1..=J`.
fn arc(x0: f64, a: f64, b: f64, start: f64, end: f64, points: usize) -> impl Iterator<Item = Point> {
    (1..=points).map(move |j| {
        let t = start + (j as f64 / points as f64) * (end - start);
        vec![x0 + a * t.cos(), b * t.sin()]
    })
}

/// Centers of a two-arc shape with amplitudes `[a1, a2, b1, b2]` and the
/// given first-arc parameter range. The second arc always spans [6π/5, 14π/5].
pub fn two_arc_centers(first_arc: (f64, f64), amplitudes: [f64; 4], points: usize) -> Vec<Point> {
    let [a1, a2, b1, b2] = amplitudes;
    arc(ARC_OFFSET, a1, b1, first_arc.0, first_arc.1, points)
        .chain(arc(-ARC_OFFSET, a2, b2, 6.0 * PI / 5.0, 14.0 * PI / 5.0, points))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinShape {
    /// Two interlocking open arcs.
    K1,
    /// A full circle interlocked with an open arc.
    K2,
}

impl std::str::FromStr for BuiltinShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K1" | "k1" => Ok(Self::K1),
            "K2" | "k2" => Ok(Self::K2),
            _ => Err(Error::InvalidArgument(format!("unknown builtin shape {s:?}"))),
        }
    }
}

pub fn make_deterministic_shape(which: BuiltinShape, curve_points: usize) -> Result<ShapeSpec> {
    if curve_points < 3 {
        return Err(Error::InvalidArgument(format!(
            "curve_points must be >= 3, got {curve_points}"
        )));
    }
    let first = match which {
        BuiltinShape::K1 => (PI / 5.0, 9.0 * PI / 5.0),
        BuiltinShape::K2 => (0.0, 2.0 * PI),
    };
    let centers = two_arc_centers(first, [1.0; 4], curve_points);
    ShapeSpec::new(
        Geometry::Balls(BallUnion::new(centers, FAMILY_TUBE_RADIUS)?),
        FAMILY_BOUNDING_RADIUS,
    )
}

/// Draws one member of the perturbed two-arc family.
///
/// The four amplitudes are drawn in the order a1, a2, b1, b2. The bounding
/// radius is fixed at 3/2 for the whole family; a draw far in the tails may
/// place a few centers marginally outside B(0, 3/2), which the ball-union
/// curve computations tolerate by clamping heights into [0, T].
pub fn sample_random_shape<R: Rng + ?Sized>(params: &FamilyParams, rng: &mut R) -> Result<ShapeSpec> {
    params.validate()?;
    let normal = Normal::new(1.0, params.noise_sd)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let amplitudes = [
        normal.sample(rng),
        normal.sample(rng),
        normal.sample(rng),
        normal.sample(rng),
    ];
    let centers = two_arc_centers(params.first_arc_range(), amplitudes, params.curve_points);
    Ok(ShapeSpec {
        geometry: Geometry::Balls(BallUnion::new(centers, params.tube_radius)?),
        bounding_radius: FAMILY_BOUNDING_RADIUS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn off_single_triangle_closes_edges() {
        let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!((m.count(0), m.count(1), m.count(2)), (3, 3, 1));
    }

    #[test]
    fn off_tetrahedron_boundary() {
        let text = "OFF\n# comment\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n\
                    3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n";
        let m = parse_off(text).unwrap();
        assert_eq!((m.count(0), m.count(1), m.count(2)), (4, 6, 4));
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn off_counts_on_header_line() {
        let m = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(m.count(2), 1);
    }

    #[test]
    fn off_out_of_range_face() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 9\n";
        assert!(matches!(parse_off(text), Err(Error::Validation(_))));
    }

    #[test]
    fn off_degenerate_face() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n";
        assert!(matches!(parse_off(text), Err(Error::Validation(_))));
    }

    #[test]
    fn off_malformed() {
        assert!(matches!(parse_off("PLY\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_off("OFF\n2 0 0\n0 0 0\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_off("OFF\n1 0 0\n0 x 0\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 2 3\n"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mesh_requires_faces_of_faces() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let err = TriMesh::new(v, vec![[0, 1], [1, 2]], vec![[0, 1, 2]], vec![]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn planar_projection() {
        let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(m.to_planar().unwrap().dim(), 2);
        let m = parse_off("OFF\n3 1 0\n0 0 1\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert!(m.to_planar().is_err());
    }

    fn centers(s: &ShapeSpec) -> &[Point] {
        match s.geometry() {
            Geometry::Balls(b) => b.centers(),
            Geometry::Mesh(_) => panic!("expected balls"),
        }
    }

    #[test]
    fn deterministic_k1() {
        let s = make_deterministic_shape(BuiltinShape::K1, 100).unwrap();
        assert_eq!(centers(&s).len(), 200);
        assert_eq!(s.bounding_radius(), 1.5);
        match s.geometry() {
            Geometry::Balls(b) => assert_eq!(b.radius(), 0.2),
            _ => unreachable!(),
        }
        assert_eq!(centers(&make_deterministic_shape(BuiltinShape::K1, 3).unwrap()).len(), 6);
        assert!(make_deterministic_shape(BuiltinShape::K1, 2).is_err());
    }

    #[test]
    fn k2_first_arc_is_full_circle() {
        let s = make_deterministic_shape(BuiltinShape::K2, 100).unwrap();
        let c = centers(&s);
        // j = J closes the circle at t = 2π.
        assert!((c[99][0] - 1.4).abs() < 1e-12 && c[99][1].abs() < 1e-12);
        let t1 = 2.0 * PI / 100.0;
        assert!((c[0][0] - (0.4 + t1.cos())).abs() < 1e-15);
    }

    #[test]
    fn k1_and_k2_share_second_arc() {
        let a = make_deterministic_shape(BuiltinShape::K1, 17).unwrap();
        let b = make_deterministic_shape(BuiltinShape::K2, 17).unwrap();
        assert_eq!(centers(&a)[17..], centers(&b)[17..]);
        assert_ne!(centers(&a)[..17], centers(&b)[..17]);
    }

    #[test]
    fn family_limit_matches_k1() {
        let params = FamilyParams {
            noise_sd: 1e-300,
            ..FamilyParams::default()
        };
        let s = sample_random_shape(&params, &mut rng::stream(3, &[0])).unwrap();
        let k1 = make_deterministic_shape(BuiltinShape::K1, 100).unwrap();
        for (x, y) in centers(&s).iter().zip(centers(&k1)) {
            assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn family_epsilon_range() {
        let p = FamilyParams {
            epsilon: 0.1,
            ..FamilyParams::default()
        };
        let (lo, hi) = p.first_arc_range();
        assert!((lo - 0.18 * PI).abs() < 1e-12);
        assert!((hi - 1.82 * PI).abs() < 1e-12);
    }

    #[test]
    fn family_seeded_draws_repeat() {
        let p = FamilyParams::default();
        let a = sample_random_shape(&p, &mut rng::stream(11, &[4, 2])).unwrap();
        let b = sample_random_shape(&p, &mut rng::stream(11, &[4, 2])).unwrap();
        let c = sample_random_shape(&p, &mut rng::stream(11, &[4, 3])).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn family_rejects_bad_params() {
        let mut p = FamilyParams::default();
        p.noise_sd = 0.0;
        assert!(p.validate().is_err());
        p = FamilyParams {
            curve_points: 2,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = FamilyParams {
            epsilon: -0.01,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn containment_is_checked() {
        let b = BallUnion::new(vec![vec![2.0, 0.0]], 0.1).unwrap();
        assert!(matches!(
            ShapeSpec::new(Geometry::Balls(b), 1.5),
            Err(Error::Containment(_))
        ));
        assert!(BallUnion::new(vec![], 0.1).is_err());
        assert!(BallUnion::new(vec![vec![0.0, 0.0]], 0.0).is_err());
    }
}
