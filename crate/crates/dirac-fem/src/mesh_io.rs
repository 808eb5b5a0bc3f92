//! Plain-text mesh export and import.
//!
//! Layout, one record per line, `#` starts a comment:
//!
//! ```text
//! dirac-fem-mesh 1
//! geometry <r0> <nseg> <m_edge>
//! discretization <refine> <order>
//! nodes <count>
//! <index> <x> <y> <dof> <shift1> <shift2>
//! elements <count> <nodes_per_element>
//! <index> <node>... <region tag>
//! dofs <count>
//! <index> <master node>
//! pairs <count>
//! <node> <partner> <shift1> <shift2>
//! rotation <count>
//! <dof> <target> <shift1> <shift2>
//! inversion <count>
//! <dof> <target> <shift1> <shift2>
//! ```
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so export followed by import reproduces the mesh exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::mesh::{CellGeometry, DofMap, Mesh, PeriodicPair, Region};

const MAGIC: &str = "dirac-fem-mesh";
const VERSION: u32 = 1;

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    let g = &mesh.geometry;
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "geometry {:?} {} {}", g.r0, g.nseg, g.m_edge)?;
    writeln!(w, "discretization {} {}", mesh.refine, mesh.order)?;
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for (i, x) in mesh.nodes.iter().enumerate() {
        let s = mesh.node_shift[i];
        writeln!(w, "{i} {:?} {:?} {} {} {}", x[0], x[1], mesh.node_dof[i], s[0], s[1])?;
    }
    let npe = mesh.nodes_per_element();
    writeln!(w, "elements {} {npe}", mesh.n_elements())?;
    for e in 0..mesh.n_elements() {
        write!(w, "{e}")?;
        for n in mesh.element(e) {
            write!(w, " {n}")?;
        }
        writeln!(w, " {}", mesh.regions[e].tag())?;
    }
    writeln!(w, "dofs {}", mesh.dof_node.len())?;
    for (d, n) in mesh.dof_node.iter().enumerate() {
        writeln!(w, "{d} {n}")?;
    }
    writeln!(w, "pairs {}", mesh.periodic_pairs.len())?;
    for p in &mesh.periodic_pairs {
        writeln!(w, "{} {} {} {}", p.node, p.partner, p.shift[0], p.shift[1])?;
    }
    for (name, action) in [("rotation", &mesh.rot_action), ("inversion", &mesh.inv_action)] {
        writeln!(w, "{name} {}", action.len())?;
        for (d, m) in action.iter().enumerate() {
            writeln!(w, "{d} {} {} {}", m.target, m.shift[0], m.shift[1])?;
        }
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("mesh text is ascii")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_record(&mut self) -> Result<Vec<String>> {
        loop {
            let line = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of mesh file after line {}", self.lineno)))??;
            self.lineno += 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                return Ok(body.split_whitespace().map(str::to_owned).collect());
            }
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Parse(format!("mesh line {}: {msg}", self.lineno))
    }

    fn header(&mut self, key: &str, nargs: usize) -> Result<Vec<String>> {
        let rec = self.next_record()?;
        if rec.first().map(String::as_str) != Some(key) || rec.len() != nargs + 1 {
            return Err(self.err(format!("expected `{key}` with {nargs} fields, got `{}`", rec.join(" "))));
        }
        Ok(rec[1..].to_vec())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn row(&mut self, expect_index: usize, nfields: usize) -> Result<Vec<String>> {
        let rec = self.next_record()?;
        if rec.len() != nfields {
            return Err(self.err(format!("expected {nfields} fields, got {}", rec.len())));
        }
        let idx: usize = self.parse(&rec[0])?;
        if idx != expect_index {
            return Err(self.err(format!("expected record {expect_index}, got {idx}")));
        }
        Ok(rec)
    }

    fn action(&mut self, key: &str) -> Result<Vec<DofMap>> {
        let h = self.header(key, 1)?;
        let n: usize = self.parse(&h[0])?;
        let mut out = Vec::with_capacity(n);
        for d in 0..n {
            let r = self.row(d, 4)?;
            out.push(DofMap {
                target: self.parse(&r[1])?,
                shift: [self.parse(&r[2])?, self.parse(&r[3])?],
            });
        }
        Ok(out)
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh> {
    let mut l = Lines { inner: r.lines(), lineno: 0 };
    let h = l.header(MAGIC, 1)?;
    let v: u32 = l.parse(&h[0])?;
    if v != VERSION {
        return Err(l.err(format!("unsupported mesh format version {v}")));
    }
    let h = l.header("geometry", 3)?;
    let geometry = CellGeometry {
        r0: l.parse(&h[0])?,
        nseg: l.parse(&h[1])?,
        m_edge: l.parse(&h[2])?,
    };
    let h = l.header("discretization", 2)?;
    let refine: usize = l.parse(&h[0])?;
    let order: usize = l.parse(&h[1])?;

    let h = l.header("nodes", 1)?;
    let nn: usize = l.parse(&h[0])?;
    let mut nodes = Vec::with_capacity(nn);
    let mut node_dof = Vec::with_capacity(nn);
    let mut node_shift = Vec::with_capacity(nn);
    for i in 0..nn {
        let r = l.row(i, 6)?;
        nodes.push([l.parse(&r[1])?, l.parse(&r[2])?]);
        node_dof.push(l.parse(&r[3])?);
        node_shift.push([l.parse(&r[4])?, l.parse(&r[5])?]);
    }

    let h = l.header("elements", 2)?;
    let ne: usize = l.parse(&h[0])?;
    let npe: usize = l.parse(&h[1])?;
    let mut elements = Vec::with_capacity(ne * npe);
    let mut regions = Vec::with_capacity(ne);
    for e in 0..ne {
        let r = l.row(e, npe + 2)?;
        for s in &r[1..=npe] {
            let n: usize = l.parse(s)?;
            if n >= nn {
                return Err(l.err(format!("node index {n} out of range")));
            }
            elements.push(n);
        }
        let tag = &r[npe + 1];
        regions.push(Region::from_tag(tag).ok_or_else(|| l.err(format!("unknown region tag `{tag}`")))?);
    }

    let h = l.header("dofs", 1)?;
    let nd: usize = l.parse(&h[0])?;
    let mut dof_node = Vec::with_capacity(nd);
    for d in 0..nd {
        let r = l.row(d, 2)?;
        dof_node.push(l.parse(&r[1])?);
    }

    let h = l.header("pairs", 1)?;
    let np: usize = l.parse(&h[0])?;
    let mut periodic_pairs = Vec::with_capacity(np);
    for _ in 0..np {
        let r = l.next_record()?;
        if r.len() != 4 {
            return Err(l.err("pair records have 4 fields"));
        }
        periodic_pairs.push(PeriodicPair {
            node: l.parse(&r[0])?,
            partner: l.parse(&r[1])?,
            shift: [l.parse(&r[2])?, l.parse(&r[3])?],
        });
    }

    let rot_action = l.action("rotation")?;
    let inv_action = l.action("inversion")?;

    let mesh = Mesh {
        geometry,
        refine,
        order,
        nodes,
        elements,
        regions,
        node_dof,
        node_shift,
        dof_node,
        periodic_pairs,
        rot_action,
        inv_action,
    };
    if mesh.nodes_per_element() != npe {
        return Err(Error::Parse(format!(
            "order {order} needs {} nodes per element, file has {npe}",
            mesh.nodes_per_element()
        )));
    }
    Ok(mesh)
}

pub fn mesh_from_str(s: &str) -> Result<Mesh> {
    read_mesh(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    #[test]
    fn round_trip_is_exact() {
        let m = build_mesh(&CellGeometry::default(), 0, 2).unwrap();
        let text = mesh_to_string(&m);
        let back = mesh_from_str(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(text, mesh_to_string(&back));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let m = build_mesh(&CellGeometry::default(), 0, 1).unwrap();
        let text = mesh_to_string(&m);
        let cut = &text[..text.len() / 2];
        assert!(matches!(mesh_from_str(cut), Err(Error::Parse(_))));
    }
}
