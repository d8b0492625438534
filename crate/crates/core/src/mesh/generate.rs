use std::collections::BTreeMap;

use super::TriMesh;

/// Rotated ellipse carved out of a generated plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleSpec {
    pub cx: f64,
    pub cy: f64,
    /// Semi-axis along the rotated x direction (mm).
    pub a: f64,
    /// Semi-axis along the rotated y direction (mm).
    pub b: f64,
    pub angle_deg: f64,
}

impl HoleSpec {
    /// Squared elliptical radius of a point in hole-local coordinates
    /// (< 1 inside, = 1 on the outline).
    pub(crate) fn radius2(&self, x: f64, y: f64) -> f64 {
        let phi = self.angle_deg.to_radians();
        let (s, c) = phi.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let xi = c * dx + s * dy;
        let eta = -s * dx + c * dy;
        (xi / self.a).powi(2) + (eta / self.b).powi(2)
    }

    pub(crate) fn contains(&self, x: f64, y: f64) -> bool {
        self.radius2(x, y) < 1.0
    }

    /// Radial projection of an interior point onto the outline.
    fn snap_to_outline(&self, x: f64, y: f64) -> [f64; 2] {
        let r = self.radius2(x, y).sqrt();
        if r < 1e-12 {
            // Degenerate: point at the hole center; push along the major axis.
            let phi = self.angle_deg.to_radians();
            return [self.cx + self.a * phi.cos(), self.cy + self.a * phi.sin()];
        }
        [
            self.cx + (x - self.cx) / r,
            self.cy + (y - self.cy) / r,
        ]
    }

    fn outline_points(&self, n: usize) -> Vec<[f64; 2]> {
        let phi = self.angle_deg.to_radians();
        let (s, c) = phi.sin_cos();
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let xi = self.a * t.cos();
                let eta = self.b * t.sin();
                [self.cx + c * xi - s * eta, self.cy + s * xi + c * eta]
            })
            .collect()
    }
}

/// Generates a structured triangulation of a `width` x `height` plate,
/// carving elliptical holes and snapping the freed boundary nodes onto the
/// hole outlines. Boundary sets: bottom, top, left, right, holes.
pub fn generate_plate_mesh(
    width: f64,
    height: f64,
    holes: &[HoleSpec],
    target_size: f64,
    h0: f64,
) -> crate::Result<TriMesh> {
    if width <= 0.0 || height <= 0.0 || target_size <= 0.0 {
        return Err(crate::Error::Mesh("plate dimensions must be > 0".into()));
    }
    for (i, h) in holes.iter().enumerate() {
        if h.a <= 0.0 || h.b <= 0.0 {
            return Err(crate::Error::Mesh(format!("hole {i} has non-positive axis")));
        }
        for p in h.outline_points(64) {
            if p[0] <= 0.0 || p[0] >= width || p[1] <= 0.0 || p[1] >= height {
                return Err(crate::Error::Mesh(format!(
                    "hole {i} is not strictly inside the plate"
                )));
            }
            for (j, other) in holes.iter().enumerate() {
                if j != i && other.contains(p[0], p[1]) {
                    return Err(crate::Error::Mesh(format!("holes {i} and {j} overlap")));
                }
            }
        }
    }

    let nx = (width / target_size).round().max(1.0) as usize;
    let ny = (height / target_size).round().max(1.0) as usize;
    let dx = width / nx as f64;
    let dy = height / ny as f64;

    // Row-major node numbering keeps the assembled stiffness banded.
    let nid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n00, n10) = (nid(i, j), nid(i + 1, j));
            let (n01, n11) = (nid(i, j + 1), nid(i + 1, j + 1));
            elements.push([n00, n10, n11]);
            elements.push([n00, n11, n01]);
        }
    }

    // Carve: drop elements whose centroid falls inside a hole.
    let inside_any = |x: f64, y: f64| holes.iter().any(|h| h.contains(x, y));
    elements.retain(|&[a, b, c]| {
        let cx = (nodes[a][0] + nodes[b][0] + nodes[c][0]) / 3.0;
        let cy = (nodes[a][1] + nodes[b][1] + nodes[c][1]) / 3.0;
        !inside_any(cx, cy)
    });

    // Drop orphan nodes, preserving order.
    let mut used = vec![false; nodes.len()];
    for conn in &elements {
        for &n in conn {
            used[n] = true;
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut new_nodes = Vec::new();
    for (n, &u) in used.iter().enumerate() {
        if u {
            remap[n] = new_nodes.len();
            new_nodes.push(nodes[n]);
        }
    }
    for conn in &mut elements {
        for n in conn.iter_mut() {
            *n = remap[*n];
        }
    }
    let mut nodes = new_nodes;

    // Snap surviving in-hole nodes onto the nearest outline.
    let mut on_hole = vec![false; nodes.len()];
    for (n, p) in nodes.iter_mut().enumerate() {
        for h in holes {
            if h.contains(p[0], p[1]) {
                *p = h.snap_to_outline(p[0], p[1]);
                on_hole[n] = true;
            }
        }
    }

    // Snapping can leave sliver triangles along the outlines; a few guarded
    // Laplacian passes restore their quality. Only nodes close to a hole may
    // move: everything else keeps its exact structured-grid coordinates.
    if !holes.is_empty() {
        let tol = 1e-9 * width.max(height);
        let near_hole = |x: f64, y: f64| -> bool {
            holes.iter().any(|h| {
                let r = h.radius2(x, y).sqrt();
                (r - 1.0).abs() * h.a.min(h.b) <= 3.0 * target_size
            })
        };
        let fixed: Vec<bool> = nodes
            .iter()
            .enumerate()
            .map(|(n, p)| {
                on_hole[n]
                    || !near_hole(p[0], p[1])
                    || p[0].abs() < tol
                    || (p[0] - width).abs() < tol
                    || p[1].abs() < tol
                    || (p[1] - height).abs() < tol
            })
            .collect();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for conn in &elements {
            for k in 0..3 {
                let (a, b) = (conn[k], conn[(k + 1) % 3]);
                if !neighbors[a].contains(&b) {
                    neighbors[a].push(b);
                }
                if !neighbors[b].contains(&a) {
                    neighbors[b].push(a);
                }
            }
        }
        let mut attached: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (e, conn) in elements.iter().enumerate() {
            for &n in conn {
                attached[n].push(e);
            }
        }
        let signed_area = |nodes: &[[f64; 2]], conn: &[usize; 3]| -> f64 {
            let (p0, p1, p2) = (nodes[conn[0]], nodes[conn[1]], nodes[conn[2]]);
            0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
        };
        for _pass in 0..4 {
            for n in 0..nodes.len() {
                if fixed[n] || neighbors[n].is_empty() {
                    continue;
                }
                let mut mean = [0.0, 0.0];
                for &m in &neighbors[n] {
                    mean[0] += nodes[m][0];
                    mean[1] += nodes[m][1];
                }
                mean[0] /= neighbors[n].len() as f64;
                mean[1] /= neighbors[n].len() as f64;
                let old = nodes[n];
                nodes[n] = mean;
                let ok = attached[n]
                    .iter()
                    .all(|&e| signed_area(&nodes, &elements[e]) > 1e-12);
                if !ok {
                    nodes[n] = old;
                }
            }
        }
    }

    let tol = 1e-9 * width.max(height);
    let mut boundary_sets = BTreeMap::new();
    let pick = |pred: &dyn Fn(f64, f64) -> bool| -> Vec<usize> {
        nodes
            .iter()
            .enumerate()
            .filter(|(_, p)| pred(p[0], p[1]))
            .map(|(n, _)| n)
            .collect()
    };
    boundary_sets.insert("bottom".into(), pick(&|_, y| y.abs() < tol));
    boundary_sets.insert("top".into(), pick(&|_, y| (y - height).abs() < tol));
    boundary_sets.insert("left".into(), pick(&|x, _| x.abs() < tol));
    boundary_sets.insert("right".into(), pick(&|x, _| (x - width).abs() < tol));
    boundary_sets.insert(
        "holes".into(),
        on_hole
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(n, _)| n)
            .collect(),
    );

    TriMesh::new(nodes, elements, boundary_sets, h0).map_err(|e| {
        crate::Error::Mesh(format!(
            "infeasible geometry: snapped mesh failed validation ({e})"
        ))
    })
}
