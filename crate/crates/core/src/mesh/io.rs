//! Line-oriented mesh text format.
//!
//! ```text
//! nodes N elements M thickness h0
//! x y            (N lines)
//! i j k          (M lines, 0-based node indices)
//! boundary <name>: i0 i1 ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::TriMesh;
use crate::textio::fmt_f64;

impl TriMesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "nodes {} elements {} thickness {}",
            self.num_nodes(),
            self.num_elements(),
            self.h0()
        )
        .unwrap();
        for p in self.nodes() {
            writeln!(s, "{} {}", fmt_f64(p[0]), fmt_f64(p[1])).unwrap();
        }
        for e in self.elements() {
            writeln!(s, "{} {} {}", e[0], e[1], e[2]).unwrap();
        }
        for (name, set) in self.boundary_sets() {
            write!(s, "boundary {name}:").unwrap();
            for n in set {
                write!(s, " {n}").unwrap();
            }
            writeln!(s).unwrap();
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> crate::Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str, origin: &Path) -> crate::Result<Self> {
        let err = |line: usize, msg: String| crate::Error::parse(origin, line, msg);
        let mut lines = text.lines().enumerate();
        let (lno, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty mesh file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 6 || toks[0] != "nodes" || toks[2] != "elements" || toks[4] != "thickness"
        {
            return Err(err(lno + 1, format!("bad header '{header}'")));
        }
        let n: usize = toks[1].parse().map_err(|_| err(1, "bad node count".into()))?;
        let m: usize = toks[3]
            .parse()
            .map_err(|_| err(1, "bad element count".into()))?;
        let h0: f64 = toks[5].parse().map_err(|_| err(1, "bad thickness".into()))?;

        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| err(0, "unexpected end of file in nodes".into()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err(lno + 1, format!("bad node line '{line}'")))?;
            if vals.len() != 2 {
                return Err(err(lno + 1, "expected 'x y'".into()));
            }
            nodes.push([vals[0], vals[1]]);
        }
        let mut elements = Vec::with_capacity(m);
        for _ in 0..m {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| err(0, "unexpected end of file in elements".into()))?;
            let vals: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| err(lno + 1, format!("bad element line '{line}'")))?;
            if vals.len() != 3 {
                return Err(err(lno + 1, "expected 'i j k'".into()));
            }
            elements.push([vals[0], vals[1], vals[2]]);
        }
        let mut boundary_sets = BTreeMap::new();
        for (lno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix("boundary ")
                .ok_or_else(|| err(lno + 1, format!("expected 'boundary <name>: ...', got '{line}'")))?;
            let (name, idx) = rest
                .split_once(':')
                .ok_or_else(|| err(lno + 1, "missing ':' in boundary line".into()))?;
            let set: Vec<usize> = idx
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| err(lno + 1, "bad boundary index".into()))?;
            boundary_sets.insert(name.trim().to_string(), set);
        }
        TriMesh::new(nodes, elements, boundary_sets, h0)
    }

    pub fn read_file(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, path)
    }
}
