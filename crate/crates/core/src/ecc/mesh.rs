use crate::ecc::ECCurve;
use crate::error::{Error, Result};
use crate::shapes::{dot, TriMesh, CONTAINMENT_TOL};

/// Vertex heights `v·ν + R`, checked to lie in `[0, 2R]`.
fn heights(mesh: &TriMesh, direction: &[f64], radius: f64) -> Result<Vec<f64>> {
    if direction.len() != mesh.dim() {
        return Err(Error::InvalidArgument(format!(
            "direction has dimension {} but the mesh lives in R^{}",
            direction.len(),
            mesh.dim()
        )));
    }
    let horizon = 2.0 * radius;
    let tol = CONTAINMENT_TOL * horizon.max(1.0);
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let h = dot(v, direction) + radius;
            if h < -tol || h > horizon + tol {
                Err(Error::Containment(format!(
                    "vertex {i} has height {h} outside [0, {horizon}]; is the mesh inside B(0, {radius})?"
                )))
            } else {
                Ok(h.clamp(0.0, horizon))
            }
        })
        .collect()
}

/// Exact Euler characteristic curve of a mesh under the lower-star
/// filtration: each simplex enters at the largest height of its vertices.
pub fn ecc_mesh(mesh: &TriMesh, direction: &[f64], radius: f64) -> Result<ECCurve> {
    let h = heights(mesh, direction, radius)?;
    let entry = |s: &[usize]| s.iter().map(|&v| h[v]).fold(f64::NEG_INFINITY, f64::max);

    let jumps = h
        .iter()
        .map(|&t| (t, 1))
        .chain(mesh.edges().iter().map(|s| (entry(s), -1)))
        .chain(mesh.triangles().iter().map(|s| (entry(s), 1)))
        .chain(mesh.tetrahedra().iter().map(|s| (entry(s), -1)));
    Ok(ECCurve::from_jumps(2.0 * radius, jumps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::parse_off;

    fn tri(points: [[f64; 2]; 3]) -> TriMesh {
        TriMesh::from_triangles(points.iter().map(|p| p.to_vec()).collect(), &[[0, 1, 2]]).unwrap()
    }

    #[test]
    fn single_triangle() {
        let m = tri([[0.0, 0.0], [0.5, 0.1], [0.9, 0.3]]);
        let c = ecc_mesh(&m, &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(c.breakpoints(), &[1.0]);
        assert_eq!(c.values(), &[1]);
        for t in [1.0, 1.5, 1.9, 2.0] {
            assert_eq!(c.value_at(t), 1);
        }
    }

    #[test]
    fn two_disjoint_triangles() {
        let v = vec![
            vec![-0.9, 0.0],
            vec![-0.5, 0.1],
            vec![-0.7, 0.4],
            vec![0.2, 0.0],
            vec![0.6, 0.1],
            vec![0.4, 0.4],
        ];
        let m = TriMesh::from_triangles(v, &[[0, 1, 2], [3, 4, 5]]).unwrap();
        let c = ecc_mesh(&m, &[0.0, 1.0], 1.0).unwrap();
        assert_eq!(c.terminal_value(), 2);
    }

    #[test]
    fn tetrahedron_boundary_is_a_sphere() {
        let text = "OFF\n4 4 0\n0.5 0 0\n0 0.5 0\n0 0 0.5\n-0.3 -0.3 -0.3\n\
                    3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n";
        let m = parse_off(text).unwrap();
        for nu in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [-0.48, 0.6, -0.64]] {
            let c = ecc_mesh(&m, &nu, 1.0).unwrap();
            assert_eq!(c.terminal_value(), 2);
            assert_eq!(c.value_at(0.0), 0);
        }
    }

    #[test]
    fn containment_violation() {
        let m = tri([[0.0, 0.0], [3.0, 0.0], [0.0, 0.5]]);
        assert!(matches!(ecc_mesh(&m, &[1.0, 0.0], 1.0), Err(Error::Containment(_))));
        assert!(ecc_mesh(&m, &[1.0, 0.0, 0.0], 5.0).is_err());
    }
}
