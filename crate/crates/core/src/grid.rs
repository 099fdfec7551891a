//! Geodesic sphere grids from icosahedral subdivision.
//!
//! Level 0 is the unit icosahedron (12 vertices, 20 faces); each level splits
//! every triangle into four and reprojects midpoints onto the sphere, giving
//! `10 * 4^L + 2` vertices and `20 * 4^L` faces.  All faces are oriented
//! counter-clockwise seen from outside, which every signed-area computation
//! downstream relies on.

use std::collections::HashMap;

pub mod vec3 {
    //! Minimal 3-vector helpers on `[f64; 3]`.

    pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn det(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
        dot(a, cross(b, c))
    }

    pub fn norm(a: [f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn normalize(a: [f64; 3]) -> [f64; 3] {
        let n = norm(a);
        [a[0] / n, a[1] / n, a[2] / n]
    }

    pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale(a: [f64; 3], c: f64) -> [f64; 3] {
        [c * a[0], c * a[1], c * a[2]]
    }

    pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
        norm(sub(a, b))
    }
}

/// A subdivided icosahedral sphere grid.
pub struct SphereGrid {
    pub level: u32,
    pub vertices: Vec<[f64; 3]>,
    /// Vertex index triples, counter-clockwise from outside.
    pub triangles: Vec<[u32; 3]>,
}

impl SphereGrid {
    /// Number of vertices at a level: `10 * 4^L + 2`.
    pub fn vertex_count(level: u32) -> usize {
        10 * 4usize.pow(level) + 2
    }

    pub fn new(level: u32) -> SphereGrid {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let mut vertices: Vec<[f64; 3]> = [
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ]
        .into_iter()
        .map(vec3::normalize)
        .collect();
        let mut triangles: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for tri in &triangles {
                let mid = |a: u32,
                           b: u32,
                           vertices: &mut Vec<[f64; 3]>,
                           midpoints: &mut HashMap<(u32, u32), u32>| {
                    let key = (a.min(b), a.max(b));
                    *midpoints.entry(key).or_insert_with(|| {
                        let m =
                            vec3::normalize(vec3::add(vertices[a as usize], vertices[b as usize]));
                        vertices.push(m);
                        (vertices.len() - 1) as u32
                    })
                };
                let [a, b, c] = *tri;
                let ab = mid(a, b, &mut vertices, &mut midpoints);
                let bc = mid(b, c, &mut vertices, &mut midpoints);
                let ca = mid(c, a, &mut vertices, &mut midpoints);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            triangles = next;
        }
        SphereGrid {
            level,
            vertices,
            triangles,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_and_face_counts() {
        for level in 0..=5 {
            let g = SphereGrid::new(level);
            assert_eq!(g.vertices.len(), SphereGrid::vertex_count(level));
            assert_eq!(g.triangles.len(), 20 * 4usize.pow(level));
        }
        assert_eq!(SphereGrid::vertex_count(5), 10242);
        assert_eq!(SphereGrid::vertex_count(4), 2562);
    }

    #[test]
    fn vertices_lie_on_the_unit_sphere() {
        let g = SphereGrid::new(3);
        for v in &g.vertices {
            assert!((vec3::norm(*v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn faces_are_ccw_from_outside() {
        // for a convex body around the origin this is det(v0, v1, v2) > 0
        for level in [0, 2, 4] {
            let g = SphereGrid::new(level);
            for t in &g.triangles {
                let d = vec3::det(
                    g.vertices[t[0] as usize],
                    g.vertices[t[1] as usize],
                    g.vertices[t[2] as usize],
                );
                assert!(d > 0.0, "level {level} face {t:?} has det {d}");
            }
        }
    }

    #[test]
    fn total_solid_angle_is_the_full_sphere() {
        let g = SphereGrid::new(2);
        let mut total = 0.0;
        for t in &g.triangles {
            let a = g.vertices[t[0] as usize];
            let b = g.vertices[t[1] as usize];
            let c = g.vertices[t[2] as usize];
            let num = vec3::det(a, b, c);
            let den = 1.0 + vec3::dot(a, b) + vec3::dot(b, c) + vec3::dot(c, a);
            total += 2.0 * num.atan2(den);
        }
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn each_edge_is_shared_by_two_faces() {
        let g = SphereGrid::new(1);
        let mut edge_count: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &g.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        assert!(edge_count.values().all(|&c| c == 2));
        // Euler characteristic V - E + F = 2
        let v = g.vertices.len() as i64;
        let e = edge_count.len() as i64;
        let f = g.triangles.len() as i64;
        assert_eq!(v - e + f, 2);
    }
}
