//! Linear-triangle plane meshes with single-point quadrature: shape-function
//! gradients, connectivity operators, node/quadrature-point projections and
//! consistent edge loads.

mod connectivity;
mod generate;
mod io;

pub use connectivity::{bmatrix_deformed, bmatrix_total, Config, Connectivity};
pub use generate::{generate_plate_mesh, HoleSpec};

use std::collections::BTreeMap;

/// 2D mesh of linear triangles with named boundary node sets and a reference
/// thickness (mm).
#[derive(Debug, Clone)]
pub struct TriMesh {
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary_sets: BTreeMap<String, Vec<usize>>,
    h0: f64,
}

impl TriMesh {
    pub fn new(
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary_sets: BTreeMap<String, Vec<usize>>,
        h0: f64,
    ) -> crate::Result<Self> {
        if h0 <= 0.0 {
            return Err(crate::Error::Mesh("reference thickness must be > 0".into()));
        }
        let mesh = Self {
            nodes,
            elements,
            boundary_sets,
            h0,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> crate::Result<()> {
        for (e, conn) in self.elements.iter().enumerate() {
            for &n in conn {
                if n >= self.nodes.len() {
                    return Err(crate::Error::Mesh(format!(
                        "element {e} references node {n} out of {}",
                        self.nodes.len()
                    )));
                }
            }
            let area = self.element_area(e);
            if area <= 0.0 {
                return Err(crate::Error::Mesh(format!(
                    "element {e} has non-positive area {area}"
                )));
            }
        }
        for (name, set) in &self.boundary_sets {
            for &n in set {
                if n >= self.nodes.len() {
                    return Err(crate::Error::Mesh(format!(
                        "boundary set '{name}' references node {n} out of {}",
                        self.nodes.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> [usize; 3] {
        self.elements[e]
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn boundary_sets(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.boundary_sets
    }

    pub fn boundary_set(&self, name: &str) -> crate::Result<&[usize]> {
        self.boundary_sets
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| crate::Error::Mesh(format!("no boundary set named '{name}'")))
    }

    /// Signed reference area of an element (positive for valid orientation).
    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.elements[e];
        let (p0, p1, p2) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Elements attached to each node.
    pub fn node_to_elements(&self) -> Vec<Vec<usize>> {
        let mut map = vec![Vec::new(); self.nodes.len()];
        for (e, conn) in self.elements.iter().enumerate() {
            for &n in conn {
                map[n].push(e);
            }
        }
        map
    }

    /// Area-weighted projection of per-element values onto nodes.
    ///
    /// `weights` supplies the per-element weight (reference or deformed
    /// Jacobian determinant, depending on the configuration of interest).
    pub fn project_to_nodes(&self, elem_values: &[f64], weights: &[f64]) -> crate::Result<Vec<f64>> {
        if elem_values.len() != self.elements.len() || weights.len() != self.elements.len() {
            return Err(crate::Error::Mesh(
                "per-element array length mismatch in nodal projection".into(),
            ));
        }
        let attach = self.node_to_elements();
        let mut out = vec![0.0; self.nodes.len()];
        for (n, elems) in attach.iter().enumerate() {
            if elems.is_empty() {
                return Err(crate::Error::Mesh(format!(
                    "node {n} has no attached elements"
                )));
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for &e in elems {
                num += weights[e] * elem_values[e];
                den += weights[e];
            }
            out[n] = num / den;
        }
        Ok(out)
    }

    /// Arithmetic mean of the three nodal values per element (the value at
    /// the single quadrature point of a linear triangle).
    pub fn project_to_quadpoints(&self, node_values: &[f64]) -> Vec<f64> {
        self.elements
            .iter()
            .map(|&[a, b, c]| (node_values[a] + node_values[b] + node_values[c]) / 3.0)
            .collect()
    }

    /// Consistent nodal loads for a homogeneous traction `p_bar` (MPa) acting
    /// along `direction` on the polyline of element edges whose endpoints both
    /// belong to `edge_nodes`. Integration runs over the reference edge with
    /// the reference thickness.
    pub fn traction_to_nodal_forces(
        &self,
        edge_nodes: &[usize],
        p_bar: f64,
        direction: [f64; 2],
    ) -> crate::Result<Vec<(usize, [f64; 2])>> {
        use std::collections::{BTreeMap, BTreeSet};
        let in_set: BTreeSet<usize> = edge_nodes.iter().copied().collect();
        let mut edges = BTreeSet::new();
        for conn in &self.elements {
            for k in 0..3 {
                let (a, b) = (conn[k], conn[(k + 1) % 3]);
                if in_set.contains(&a) && in_set.contains(&b) {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        if edges.is_empty() {
            return Err(crate::Error::Mesh(
                "edge set contains no element edges".into(),
            ));
        }
        // The edges must form one connected polyline.
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &edges {
            *degree.entry(a).or_insert(0) += 1;
            *degree.entry(b).or_insert(0) += 1;
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        if degree.values().any(|&d| d > 2) {
            return Err(crate::Error::Mesh(
                "edge set branches; expected a simple polyline".into(),
            ));
        }
        let start = *degree.keys().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for &m in adj.get(&n).into_iter().flatten() {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        if seen.len() != degree.len() {
            return Err(crate::Error::Mesh("edge set is disconnected".into()));
        }

        let mut forces: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
        for &(a, b) in &edges {
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            let half = 0.5 * p_bar * self.h0 * len;
            for n in [a, b] {
                let f = forces.entry(n).or_insert([0.0, 0.0]);
                f[0] += half * direction[0];
                f[1] += half * direction[1];
            }
        }
        Ok(forces.into_iter().collect())
    }

    /// Extracts the submesh of elements accepted by `keep`, renumbering nodes
    /// compactly in their original order. Boundary sets are intersected with
    /// the kept nodes.
    pub fn extract_submesh(&self, keep: impl Fn(usize) -> bool) -> (TriMesh, SubmeshMap) {
        let kept_elems: Vec<usize> = (0..self.elements.len()).filter(|&e| keep(e)).collect();
        let mut node_old_to_new = vec![usize::MAX; self.nodes.len()];
        let mut node_new_to_old = Vec::new();
        for &e in &kept_elems {
            for &n in &self.elements[e] {
                if node_old_to_new[n] == usize::MAX {
                    node_old_to_new[n] = 0; // mark
                }
            }
        }
        for (n, slot) in node_old_to_new.iter_mut().enumerate() {
            if *slot != usize::MAX {
                *slot = node_new_to_old.len();
                node_new_to_old.push(n);
            }
        }
        let nodes: Vec<[f64; 2]> = node_new_to_old.iter().map(|&n| self.nodes[n]).collect();
        let elements: Vec<[usize; 3]> = kept_elems
            .iter()
            .map(|&e| {
                let [a, b, c] = self.elements[e];
                [
                    node_old_to_new[a],
                    node_old_to_new[b],
                    node_old_to_new[c],
                ]
            })
            .collect();
        let mut boundary_sets = BTreeMap::new();
        for (name, set) in &self.boundary_sets {
            let mapped: Vec<usize> = set
                .iter()
                .filter(|&&n| node_old_to_new[n] != usize::MAX)
                .map(|&n| node_old_to_new[n])
                .collect();
            if !mapped.is_empty() {
                boundary_sets.insert(name.clone(), mapped);
            }
        }
        let mesh = TriMesh {
            nodes,
            elements,
            boundary_sets,
            h0: self.h0,
        };
        (
            mesh,
            SubmeshMap {
                node_old_to_new,
                node_new_to_old,
                elem_new_to_old: kept_elems,
            },
        )
    }

    pub fn set_boundary(&mut self, name: &str, nodes: Vec<usize>) {
        self.boundary_sets.insert(name.to_string(), nodes);
    }

    /// Nodes selected by a predicate on their coordinates, in index order.
    pub fn select_nodes(&self, pred: impl Fn(f64, f64) -> bool) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| pred(self.nodes[n][0], self.nodes[n][1]))
            .collect()
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Index maps produced by [`TriMesh::extract_submesh`].
#[derive(Debug, Clone)]
pub struct SubmeshMap {
    /// usize::MAX for dropped nodes.
    pub node_old_to_new: Vec<usize>,
    pub node_new_to_old: Vec<usize>,
    pub elem_new_to_old: Vec<usize>,
}

#[cfg(test)]
mod tests;
