//! Raw measurement datasets: the mesh plus one file per snapshot holding
//! displacements, known nodal forces, thickness and the global testing force.
//!
//! One file per snapshot, line oriented:
//!
//! ```text
//! snapshot <index>
//! displacements <N>
//! ux uy                      (N lines)
//! forces_known <K>
//! idx fx fy                  (K lines)
//! thickness_quadpoints <M>   (or: thickness_nodes <N>)
//! h                          (M or N lines)
//! global_force
//! F
//! ```
//!
//! A `dataset.txt` header records the export mode and which boundary sets
//! carry prescribed and unknown forces.

use std::path::Path;

use crate::mesh::TriMesh;
use crate::textio::{fmt_f64, parse_f64};

/// Whether a dataset carries exact nodal forces or only the global force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportMode {
    /// Exact nodal forces everywhere outside the unknown-force boundary.
    Ideal,
    /// Only the global testing force plus geometry; nodal forces must be
    /// reconstructed from a homogeneous-traction assumption.
    Realistic,
}

impl ExportMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExportMode::Ideal => "ideal",
            ExportMode::Realistic => "realistic",
        }
    }
}

/// Thickness measurements, either per quadrature point (ideal) or per node
/// (as a stereo-DIC system would deliver them).
#[derive(Debug, Clone, PartialEq)]
pub enum Thickness {
    QuadPoints(Vec<f64>),
    Nodes(Vec<f64>),
}

/// One measured load increment.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    /// In-plane nodal displacements (mm).
    pub displacements: Vec<[f64; 2]>,
    /// Known external nodal forces (N); nodes not listed are unknown.
    pub forces_known: Vec<(usize, [f64; 2])>,
    pub thickness: Thickness,
    /// Global testing force (N).
    pub global_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub mode: ExportMode,
    /// Boundary set whose nodal forces are unknown.
    pub zeta_boundary: String,
    /// Boundary set carrying the traction derived from the global force.
    pub force_boundary: String,
    /// Ground-truth material parameters (E in MPa, nu), when generated.
    pub material: Option<(f64, f64)>,
}

/// A complete raw dataset: mesh, snapshots, metadata.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub mesh: TriMesh,
    pub snapshots: Vec<Snapshot>,
    pub meta: DatasetMeta,
}

impl Snapshot {
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "snapshot {}", self.index).unwrap();
        writeln!(s, "displacements {}", self.displacements.len()).unwrap();
        for u in &self.displacements {
            writeln!(s, "{} {}", fmt_f64(u[0]), fmt_f64(u[1])).unwrap();
        }
        writeln!(s, "forces_known {}", self.forces_known.len()).unwrap();
        for (n, f) in &self.forces_known {
            writeln!(s, "{} {} {}", n, fmt_f64(f[0]), fmt_f64(f[1])).unwrap();
        }
        match &self.thickness {
            Thickness::QuadPoints(h) => {
                writeln!(s, "thickness_quadpoints {}", h.len()).unwrap();
                for v in h {
                    writeln!(s, "{}", fmt_f64(*v)).unwrap();
                }
            }
            Thickness::Nodes(h) => {
                writeln!(s, "thickness_nodes {}", h.len()).unwrap();
                for v in h {
                    writeln!(s, "{}", fmt_f64(*v)).unwrap();
                }
            }
        }
        writeln!(s, "global_force").unwrap();
        writeln!(s, "{}", fmt_f64(self.global_force)).unwrap();
        s
    }

    pub fn from_text(text: &str, origin: &Path) -> crate::Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let mut cursor = Cursor {
            origin,
            lines: &lines,
            pos: 0,
        };

        let head = cursor.tokens("snapshot <index>")?;
        if head.len() != 2 || head[0] != "snapshot" {
            return Err(cursor.error("expected 'snapshot <index>'"));
        }
        let index: usize = head[1]
            .parse()
            .map_err(|_| cursor.error("bad snapshot index"))?;

        let n = cursor.section_count("displacements")?;
        let mut displacements = Vec::with_capacity(n);
        for _ in 0..n {
            let t = cursor.tokens("ux uy")?;
            if t.len() != 2 {
                return Err(cursor.error("expected 'ux uy'"));
            }
            match (parse_f64(&t[0]), parse_f64(&t[1])) {
                (Some(a), Some(b)) => displacements.push([a, b]),
                _ => return Err(cursor.error("bad displacement value")),
            }
        }

        let k = cursor.section_count("forces_known")?;
        let mut forces_known = Vec::with_capacity(k);
        for _ in 0..k {
            let t = cursor.tokens("idx fx fy")?;
            if t.len() != 3 {
                return Err(cursor.error("expected 'idx fx fy'"));
            }
            let idx: usize = t[0].parse().map_err(|_| cursor.error("bad node index"))?;
            match (parse_f64(&t[1]), parse_f64(&t[2])) {
                (Some(a), Some(b)) => forces_known.push((idx, [a, b])),
                _ => return Err(cursor.error("bad force value")),
            }
        }

        let head = cursor.tokens("thickness section")?;
        if head.len() != 2 {
            return Err(cursor.error("expected 'thickness_quadpoints <M>' or 'thickness_nodes <N>'"));
        }
        let m: usize = head[1].parse().map_err(|_| cursor.error("bad count"))?;
        let mut h = Vec::with_capacity(m);
        for _ in 0..m {
            let t = cursor.tokens("h")?;
            match parse_f64(&t[0]) {
                Some(v) if v > 0.0 => h.push(v),
                _ => return Err(cursor.error("thickness must be a positive number")),
            }
        }
        let thickness = match head[0].as_str() {
            "thickness_quadpoints" => Thickness::QuadPoints(h),
            "thickness_nodes" => Thickness::Nodes(h),
            other => return Err(cursor.error(&format!("unknown thickness section '{other}'"))),
        };

        let head = cursor.tokens("global_force")?;
        if head[0] != "global_force" {
            return Err(cursor.error("expected 'global_force'"));
        }
        let t = cursor.tokens("F")?;
        let global_force = parse_f64(&t[0]).ok_or_else(|| cursor.error("bad global force"))?;

        Ok(Snapshot {
            index,
            displacements,
            forces_known,
            thickness,
            global_force,
        })
    }
}

struct Cursor<'a> {
    origin: &'a Path,
    lines: &'a [&'a str],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn tokens(&mut self, expect: &str) -> crate::Result<Vec<String>> {
        while self.pos < self.lines.len() && self.lines[self.pos].trim().is_empty() {
            self.pos += 1;
        }
        if self.pos >= self.lines.len() {
            return Err(crate::Error::parse(
                self.origin,
                self.pos,
                format!("unexpected end of file, expected '{expect}'"),
            ));
        }
        let toks = self.lines[self.pos]
            .split_whitespace()
            .map(|t| t.to_string())
            .collect();
        self.pos += 1;
        Ok(toks)
    }

    fn section_count(&mut self, name: &str) -> crate::Result<usize> {
        let head = self.tokens(name)?;
        if head.len() != 2 || head[0] != name {
            return Err(self.error(&format!("expected '{name} <count>'")));
        }
        head[1].parse().map_err(|_| self.error("bad count"))
    }

    fn error(&self, msg: &str) -> crate::Error {
        crate::Error::parse(self.origin, self.pos, msg)
    }
}

impl RawDataset {
    pub fn write_dir(&self, dir: &Path) -> crate::Result<()> {
        std::fs::create_dir_all(dir)?;
        self.mesh.write_file(&dir.join("mesh.txt"))?;
        use std::fmt::Write;
        let mut meta = String::new();
        writeln!(meta, "hyperfit-dataset-v1").unwrap();
        writeln!(meta, "mode {}", self.meta.mode.as_str()).unwrap();
        writeln!(meta, "snapshots {}", self.snapshots.len()).unwrap();
        writeln!(meta, "zeta_boundary {}", self.meta.zeta_boundary).unwrap();
        writeln!(meta, "force_boundary {}", self.meta.force_boundary).unwrap();
        if let Some((e, nu)) = self.meta.material {
            writeln!(meta, "material {} {}", fmt_f64(e), fmt_f64(nu)).unwrap();
        }
        std::fs::write(dir.join("dataset.txt"), meta)?;
        for snap in &self.snapshots {
            let name = format!("snapshot_{:04}.txt", snap.index);
            std::fs::write(dir.join(name), snap.to_text())?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> crate::Result<Self> {
        let meta_path = dir.join("dataset.txt");
        let text = std::fs::read_to_string(&meta_path)?;
        let mut mode = None;
        let mut n_snap = None;
        let mut zeta = None;
        let mut force = None;
        let mut material = None;
        for (lno, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["hyperfit-dataset-v1"] | [] => {}
                ["mode", "ideal"] => mode = Some(ExportMode::Ideal),
                ["mode", "realistic"] => mode = Some(ExportMode::Realistic),
                ["snapshots", n] => {
                    n_snap = Some(n.parse::<usize>().map_err(|_| {
                        crate::Error::parse(&meta_path, lno + 1, "bad snapshot count")
                    })?)
                }
                ["zeta_boundary", name] => zeta = Some(name.to_string()),
                ["force_boundary", name] => force = Some(name.to_string()),
                ["material", e, nu] => {
                    let e = parse_f64(e)
                        .ok_or_else(|| crate::Error::parse(&meta_path, lno + 1, "bad material E"))?;
                    let nu = parse_f64(nu)
                        .ok_or_else(|| crate::Error::parse(&meta_path, lno + 1, "bad material nu"))?;
                    material = Some((e, nu));
                }
                _ => {
                    return Err(crate::Error::parse(
                        &meta_path,
                        lno + 1,
                        format!("unknown dataset header line '{line}'"),
                    ))
                }
            }
        }
        let missing = |what: &str| crate::Error::Config(format!("dataset.txt missing '{what}'"));
        let meta = DatasetMeta {
            mode: mode.ok_or_else(|| missing("mode"))?,
            zeta_boundary: zeta.ok_or_else(|| missing("zeta_boundary"))?,
            force_boundary: force.ok_or_else(|| missing("force_boundary"))?,
            material,
        };
        let n_snap = n_snap.ok_or_else(|| missing("snapshots"))?;
        let mesh = TriMesh::read_file(&dir.join("mesh.txt"))?;
        let mut snapshots = Vec::with_capacity(n_snap);
        for i in 1..=n_snap {
            let path = dir.join(format!("snapshot_{i:04}.txt"));
            let text = std::fs::read_to_string(&path)?;
            let snap = Snapshot::from_text(&text, &path)?;
            if snap.displacements.len() != mesh.num_nodes() {
                return Err(crate::Error::Config(format!(
                    "snapshot {i}: displacement count {} does not match mesh nodes {}",
                    snap.displacements.len(),
                    mesh.num_nodes()
                )));
            }
            snapshots.push(snap);
        }
        Ok(RawDataset {
            mesh,
            snapshots,
            meta,
        })
    }

    /// Per-point thickness for every snapshot, projecting nodal measurements
    /// onto quadrature points where necessary.
    pub fn thickness_at_quadpoints(&self) -> Vec<Vec<f64>> {
        self.snapshots
            .iter()
            .map(|s| match &s.thickness {
                Thickness::QuadPoints(h) => h.clone(),
                Thickness::Nodes(h) => self.mesh.project_to_quadpoints(h),
            })
            .collect()
    }
}
