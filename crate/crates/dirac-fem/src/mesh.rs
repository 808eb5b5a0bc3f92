//! Symmetric conforming triangulation of the fundamental rhombus with two
//! disc inclusions, periodic identification and point-group node maps.
//!
//! The rhombus splits along its short diagonal into two equilateral
//! triangles centered at the A and B sites. The A triangle is meshed with
//! concentric rings whose node counts are multiples of three, so the mesh is
//! invariant under rotation by 2 pi / 3 about the A site; the B triangle is
//! its point inversion. Rotation and inversion about the hexagon center x_c
//! then map the periodic mesh to itself.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{add, norm, scale, sub, LatticeBasis, PointGroupData, Vec2, SQRT3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    InclusionA,
    InclusionB,
    Bulk,
}

impl Region {
    pub fn tag(self) -> &'static str {
        match self {
            Region::InclusionA => "A",
            Region::InclusionB => "B",
            Region::Bulk => "bulk",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Region::InclusionA),
            "B" => Some(Region::InclusionB),
            "bulk" => Some(Region::Bulk),
            _ => None,
        }
    }

    pub fn is_inclusion(self) -> bool {
        self != Region::Bulk
    }
}

/// Where a node sits relative to the inclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    InteriorA,
    InteriorB,
    InterfaceA,
    InterfaceB,
    Bulk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub r0: f64,
    /// Segments of the inscribed polygon of each circle before refinement.
    pub nseg: usize,
    /// Segments per edge of the equilateral half-cells before refinement.
    pub m_edge: usize,
}

impl Default for CellGeometry {
    fn default() -> Self {
        Self {
            r0: 0.2,
            nseg: 24,
            m_edge: 8,
        }
    }
}

impl CellGeometry {
    pub fn new(r0: f64, nseg: usize) -> Self {
        Self {
            r0,
            nseg,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sep = 1.0 / SQRT3;
        if !(self.r0 > 0.0) {
            return Err(Error::Geometry(format!("inclusion radius must be > 0, got {}", self.r0)));
        }
        if 2.0 * self.r0 >= sep - 1e-6 {
            return Err(Error::Geometry(format!(
                "inclusions overlap or touch: 2*R0 = {} >= |v_B - v_A| = {}",
                2.0 * self.r0,
                sep
            )));
        }
        // The distance from a site to the rhombus edges equals half the site spacing.
        let gap = 0.5 * sep - self.r0;
        if gap <= 0.0 {
            return Err(Error::Geometry(format!(
                "inclusion touches the cell boundary: dist = {gap}"
            )));
        }
        if self.nseg < 6 || !self.nseg.is_multiple_of(6) {
            return Err(Error::Geometry(format!(
                "nseg must be a positive multiple of 6, got {}",
                self.nseg
            )));
        }
        if self.m_edge == 0 {
            return Err(Error::Geometry("m_edge must be >= 1".into()));
        }
        Ok(())
    }

    /// Circle polygon resolution after `refine` uniform refinements.
    pub fn effective_nseg(&self, refine: usize) -> usize {
        self.nseg << refine
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicPair {
    pub node: usize,
    pub partner: usize,
    /// x_partner = x_node + shift[0] v1 + shift[1] v2
    pub shift: [i64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofMap {
    pub target: usize,
    /// Image point = x_target + shift[0] v1 + shift[1] v2
    pub shift: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub geometry: CellGeometry,
    pub refine: usize,
    pub order: usize,
    pub nodes: Vec<Vec2>,
    /// Flat connectivity, `nodes_per_element()` entries per element:
    /// three vertices counterclockwise, then midsides of (0,1), (1,2), (2,0).
    pub elements: Vec<usize>,
    pub regions: Vec<Region>,
    pub node_dof: Vec<usize>,
    /// x_node = x_master + shift[0] v1 + shift[1] v2
    pub node_shift: Vec<[i64; 2]>,
    pub dof_node: Vec<usize>,
    pub periodic_pairs: Vec<PeriodicPair>,
    pub rot_action: Vec<DofMap>,
    pub inv_action: Vec<DofMap>,
}

/// Hash grid for tolerant point lookup.
pub(crate) struct PointIndex {
    cell: f64,
    tol: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
    pts: Vec<Vec2>,
}

impl PointIndex {
    pub(crate) fn new(tol: f64) -> Self {
        Self {
            cell: tol * 16.0,
            tol,
            map: HashMap::new(),
            pts: Vec::new(),
        }
    }

    fn key(&self, x: Vec2) -> (i64, i64) {
        ((x[0] / self.cell).floor() as i64, (x[1] / self.cell).floor() as i64)
    }

    pub(crate) fn find(&self, x: Vec2) -> Option<usize> {
        let (a, b) = self.key(x);
        let mut best: Option<(usize, f64)> = None;
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(list) = self.map.get(&(a + da, b + db)) {
                    for &i in list {
                        let d = norm(sub(self.pts[i], x));
                        if d <= self.tol && best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    pub(crate) fn insert(&mut self, x: Vec2) -> (usize, bool) {
        if let Some(i) = self.find(x) {
            return (i, false);
        }
        let i = self.pts.len();
        self.pts.push(x);
        let k = self.key(x);
        self.map.entry(k).or_default().push(i);
        (i, true)
    }
}

/// Indexed P1 triangulation used during construction.
#[derive(Debug, Clone)]
struct TriMesh {
    pts: Vec<Vec2>,
    on_circle: Vec<bool>,
    tris: Vec<[usize; 3]>,
    regions: Vec<Region>,
}

impl TriMesh {
    fn push_pt(&mut self, x: Vec2, on_circle: bool) -> usize {
        self.pts.push(x);
        self.on_circle.push(on_circle);
        self.pts.len() - 1
    }

    fn push_tri(&mut self, mut t: [usize; 3], region: Region) {
        let a = signed_area(self.pts[t[0]], self.pts[t[1]], self.pts[t[2]]);
        if a < 0.0 {
            t.swap(1, 2);
        }
        self.tris.push(t);
        self.regions.push(region);
    }

    fn stitch(&mut self, inner: &[usize], outer: &[usize], region: Region) {
        let (a, b) = (inner.len(), outer.len());
        let (mut i, mut j) = (0, 0);
        while i < a || j < b {
            // Exact comparison of the next parameters (i+1)/a and (j+1)/b.
            let adv_inner = if i == a {
                false
            } else if j == b {
                true
            } else {
                (i + 1) * b <= (j + 1) * a
            };
            if adv_inner {
                self.push_tri([inner[i], inner[(i + 1) % a], outer[j % b]], region);
                i += 1;
            } else {
                self.push_tri([inner[i % a], outer[(j + 1) % b], outer[j]], region);
                j += 1;
            }
        }
    }

    fn refine(&self, center: Vec2, r0: f64) -> TriMesh {
        let mut out = TriMesh {
            pts: self.pts.clone(),
            on_circle: self.on_circle.clone(),
            tris: Vec::with_capacity(self.tris.len() * 4),
            regions: Vec::with_capacity(self.tris.len() * 4),
        };
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |out: &mut TriMesh, a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = mids.get(&key) {
                return m;
            }
            let mut x = scale(0.5, add(out.pts[a], out.pts[b]));
            let circ = out.on_circle[a] && out.on_circle[b];
            if circ {
                let d = sub(x, center);
                x = add(center, scale(r0 / norm(d), d));
            }
            let m = out.push_pt(x, circ);
            mids.insert(key, m);
            m
        };
        for (t, &reg) in self.tris.iter().zip(&self.regions) {
            let m01 = mid(&mut out, t[0], t[1]);
            let m12 = mid(&mut out, t[1], t[2]);
            let m20 = mid(&mut out, t[2], t[0]);
            out.push_tri([t[0], m01, m20], reg);
            out.push_tri([m01, t[1], m12], reg);
            out.push_tri([m20, m12, t[2]], reg);
            out.push_tri([m01, m12, m20], reg);
        }
        out
    }
}

pub fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn round3(x: f64) -> usize {
    3 * ((x / 3.0).round() as usize).max(1)
}

/// Mesh of the equilateral half-cell centered at the origin.
fn half_cell(geom: &CellGeometry) -> TriMesh {
    let r0 = geom.r0;
    let m = geom.m_edge;
    let nseg = geom.nseg;
    let corners: [Vec2; 3] = [
        [1.0 / (2.0 * SQRT3), 0.5],
        [-1.0 / SQRT3, 0.0],
        [1.0 / (2.0 * SQRT3), -0.5],
    ];
    let circle = |j: usize, n: usize, r: f64| -> Vec2 {
        let a = PI / 3.0 + 2.0 * PI * j as f64 / n as f64;
        [r * a.cos(), r * a.sin()]
    };
    let edge = |j: usize, n: usize| -> Vec2 {
        let seg = (3 * j) / n;
        let t = (3 * j - seg * n) as f64 / n as f64;
        let a = corners[seg % 3];
        let b = corners[(seg + 1) % 3];
        add(a, scale(t, sub(b, a)))
    };
    let mut tm = TriMesh {
        pts: Vec::new(),
        on_circle: Vec::new(),
        tris: Vec::new(),
        regions: Vec::new(),
    };

    let nd = ((nseg as f64 / (2.0 * PI)).round() as usize).max(1);
    let center = tm.push_pt([0.0, 0.0], false);
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for i in 1..=nd {
        let n = if i == nd {
            nseg
        } else {
            6 * (((nseg * i) as f64 / (6 * nd) as f64).round() as usize).max(1)
        };
        let r = r0 * i as f64 / nd as f64;
        let ring: Vec<usize> = (0..n)
            .map(|j| {
                let x = circle(j, n, r);
                tm.push_pt(x, i == nd)
            })
            .collect();
        rings.push(ring);
    }
    let first = rings[0].clone();
    for j in 0..first.len() {
        tm.push_tri([center, first[j], first[(j + 1) % first.len()]], Region::InclusionA);
    }
    for w in 1..rings.len() {
        let (a, b) = (rings[w - 1].clone(), rings[w].clone());
        tm.stitch(&a, &b, Region::InclusionA);
    }

    let corner_dist = norm(corners[0]);
    let h = 1.0 / m as f64;
    let layers = (((corner_dist - r0) / h).ceil() as usize).max(1);
    let mut prev = rings[nd - 1].clone();
    for l in 1..=layers {
        let s = l as f64 / layers as f64;
        let n = if l == layers {
            3 * m
        } else {
            round3((1.0 - s) * nseg as f64 + s * (3 * m) as f64)
        };
        let ring: Vec<usize> = (0..n)
            .map(|j| {
                let x = if l == layers {
                    edge(j, n)
                } else {
                    add(scale(1.0 - s, circle(j, n, r0)), scale(s, edge(j, n)))
                };
                tm.push_pt(x, false)
            })
            .collect();
        tm.stitch(&prev, &ring, Region::Bulk);
        prev = ring;
    }
    tm
}

pub fn build_mesh(geom: &CellGeometry, refine: usize, order: usize) -> Result<Mesh> {
    geom.validate()?;
    if order != 1 && order != 2 {
        return Err(Error::Invalid(format!("element order must be 1 or 2, got {order}")));
    }
    let mut ta = half_cell(geom);
    for _ in 0..refine {
        ta = ta.refine([0.0, 0.0], geom.r0);
    }
    let mid_diag: Vec2 = [1.0 / (2.0 * SQRT3), 0.0];

    let mut index = PointIndex::new(1e-9);
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut regions = Vec::new();
    let map_a: Vec<usize> = ta.pts.iter().map(|&x| index.insert(x).0).collect();
    for (t, &r) in ta.tris.iter().zip(&ta.regions) {
        tris.push([map_a[t[0]], map_a[t[1]], map_a[t[2]]]);
        regions.push(r);
    }
    let map_b: Vec<usize> = ta
        .pts
        .iter()
        .map(|&x| index.insert(sub(scale(2.0, mid_diag), x)).0)
        .collect();
    for (t, &r) in ta.tris.iter().zip(&ta.regions) {
        tris.push([map_b[t[0]], map_b[t[1]], map_b[t[2]]]);
        regions.push(if r == Region::InclusionA { Region::InclusionB } else { r });
    }

    let mut nodes = index.pts.clone();
    let npe = if order == 2 { 6 } else { 3 };
    let mut elements = Vec::with_capacity(tris.len() * npe);
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &tris {
        elements.extend_from_slice(t);
        if order == 2 {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                let m = *mids.entry(key).or_insert_with(|| {
                    nodes.push(scale(0.5, add(nodes[a], nodes[b])));
                    nodes.len() - 1
                });
                elements.push(m);
            }
        }
    }
    finish_mesh(*geom, refine, order, nodes, elements, regions)
}

fn finish_mesh(
    geometry: CellGeometry,
    refine: usize,
    order: usize,
    nodes: Vec<Vec2>,
    elements: Vec<usize>,
    regions: Vec<Region>,
) -> Result<Mesh> {
    let basis = LatticeBasis::honeycomb();
    let mut index = PointIndex::new(1e-9);
    for &x in &nodes {
        index.insert(x);
    }
    let mut node_dof = vec![usize::MAX; nodes.len()];
    let mut node_shift = vec![[0i64; 2]; nodes.len()];
    let mut dof_node = Vec::new();
    let mut master: Vec<usize> = vec![usize::MAX; nodes.len()];
    for (i, &x) in nodes.iter().enumerate() {
        let (x0, n) = basis.reduce(x);
        let m = index
            .find(x0)
            .ok_or_else(|| Error::Geometry(format!("node {i} has no periodic partner in the cell")))?;
        master[i] = m;
        node_shift[i] = n;
    }
    for i in 0..nodes.len() {
        if master[i] == i {
            node_dof[i] = dof_node.len();
            dof_node.push(i);
        }
    }
    for i in 0..nodes.len() {
        node_dof[i] = node_dof[master[i]];
        if node_dof[i] == usize::MAX {
            return Err(Error::Geometry(format!("node {i} maps to a non-master node")));
        }
    }

    let mut periodic_pairs = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        let t = basis.to_frac(x);
        for dir in 0..2 {
            if t[dir].abs() < 1e-9 {
                let shift = if dir == 0 { [1, 0] } else { [0, 1] };
                let y = add(x, basis.lattice_vec([shift[0] as f64, shift[1] as f64]));
                let p = index.find(y).ok_or_else(|| {
                    Error::Geometry(format!("boundary node {i} lacks a periodic partner"))
                })?;
                periodic_pairs.push(PeriodicPair { node: i, partner: p, shift });
                periodic_pairs.push(PeriodicPair {
                    node: p,
                    partner: i,
                    shift: [-shift[0], -shift[1]],
                });
            }
        }
    }

    let mut mesh = Mesh {
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
        rot_action: Vec::new(),
        inv_action: Vec::new(),
    };
    let pg = PointGroupData::honeycomb();
    mesh.rot_action = mesh.dof_action(&index, |x| pg.rotate(x))?;
    mesh.inv_action = mesh.dof_action(&index, |x| pg.invert(x))?;
    Ok(mesh)
}

impl Mesh {
    pub fn nodes_per_element(&self) -> usize {
        if self.order == 2 {
            6
        } else {
            3
        }
    }

    pub fn n_elements(&self) -> usize {
        self.regions.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_node.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let n = self.nodes_per_element();
        &self.elements[e * n..(e + 1) * n]
    }

    pub fn vertices(&self, e: usize) -> [Vec2; 3] {
        let el = self.element(e);
        [self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let v = self.vertices(e);
        signed_area(v[0], v[1], v[2])
    }

    pub fn dof_position(&self, d: usize) -> Vec2 {
        self.nodes[self.dof_node[d]]
    }

    /// Largest element edge length.
    pub fn max_diameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| {
                let v = self.vertices(e);
                norm(sub(v[0], v[1]))
                    .max(norm(sub(v[1], v[2])))
                    .max(norm(sub(v[2], v[0])))
            })
            .fold(0.0, f64::max)
    }

    pub fn region_area(&self, r: Region) -> f64 {
        (0..self.n_elements())
            .filter(|&e| self.regions[e] == r)
            .map(|e| self.element_area(e))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_area(e)).sum()
    }

    /// Classification of every DOF by the regions of its incident elements.
    pub fn dof_classes(&self) -> Vec<NodeClass> {
        let mut flags = vec![[false; 3]; self.n_dofs()];
        for e in 0..self.n_elements() {
            let r = self.regions[e] as usize;
            for &n in self.element(e) {
                flags[self.node_dof[n]][r] = true;
            }
        }
        flags
            .into_iter()
            .map(|[a, b, bulk]| match (a, b, bulk) {
                (true, false, false) => NodeClass::InteriorA,
                (false, true, false) => NodeClass::InteriorB,
                (true, _, true) => NodeClass::InterfaceA,
                (_, true, true) => NodeClass::InterfaceB,
                _ => NodeClass::Bulk,
            })
            .collect()
    }

    /// DOFs lying on the boundary of the rhombus.
    pub fn boundary_dofs(&self) -> Vec<bool> {
        let basis = LatticeBasis::honeycomb();
        let mut out = vec![false; self.n_dofs()];
        for (i, &x) in self.nodes.iter().enumerate() {
            let t = basis.to_frac(x);
            if t.iter().any(|&s| s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9) {
                out[self.node_dof[i]] = true;
            }
        }
        out
    }

    /// Vertex positions (the P1 node set).
    pub fn vertex_positions(&self) -> Vec<Vec2> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for e in 0..self.n_elements() {
            for &n in &self.element(e)[..3] {
                if !seen[n] {
                    seen[n] = true;
                    out.push(self.nodes[n]);
                }
            }
        }
        out
    }

    fn dof_action(&self, index: &PointIndex, map: impl Fn(Vec2) -> Vec2) -> Result<Vec<DofMap>> {
        let basis = LatticeBasis::honeycomb();
        let mut out = Vec::with_capacity(self.n_dofs());
        let mut hit = vec![false; self.n_dofs()];
        for d in 0..self.n_dofs() {
            let y = map(self.dof_position(d));
            let (y0, n) = basis.reduce(y);
            let node = index.find(y0).filter(|&i| norm(sub(self.nodes[i], y0)) < 1e-10);
            let node = node.ok_or_else(|| {
                Error::Symmetry(format!("image of dof {d} at {y0:?} is not a mesh node"))
            })?;
            let target = self.node_dof[node];
            // Account for a non-master hit.
            let s = self.node_shift[node];
            if hit[target] {
                return Err(Error::Symmetry(format!("point map is not injective at dof {target}")));
            }
            hit[target] = true;
            out.push(DofMap {
                target,
                shift: [n[0] + s[0], n[1] + s[1]],
            });
        }
        Ok(out)
    }

    /// Locate the element containing `x` and its barycentric coordinates.
    pub fn locate(&self, x: Vec2) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for e in 0..self.n_elements() {
            let v = self.vertices(e);
            let a = signed_area(v[0], v[1], v[2]);
            let l0 = signed_area(x, v[1], v[2]) / a;
            let l1 = signed_area(v[0], x, v[2]) / a;
            let l2 = 1.0 - l0 - l1;
            let mn = l0.min(l1).min(l2);
            if mn >= -1e-12 {
                return Some((e, [l0, l1, l2]));
            }
            if best.as_ref().is_none_or(|b| mn > b.2) {
                best = Some((e, [l0, l1, l2], mn));
            }
        }
        best.filter(|b| b.2 > -1e-9).map(|b| (b.0, b.1))
    }

    /// Interpolate a DOF vector at a point of the closed cell.
    pub fn interpolate<T>(&self, u: &[T], x: Vec2) -> Result<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        let basis = LatticeBasis::honeycomb();
        let t = basis.to_frac(x);
        if t.iter().any(|&s| !(-1e-9..=1.0 + 1e-9).contains(&s)) {
            return Err(Error::Invalid(format!("point {x:?} is outside the cell")));
        }
        let (e, l) = self
            .locate(x)
            .ok_or_else(|| Error::Invalid(format!("point {x:?} not covered by the mesh")))?;
        let n = shape_values(self.order, l);
        let el = self.element(e);
        let mut acc = T::default();
        for (k, &node) in el.iter().enumerate() {
            acc = acc + u[self.node_dof[node]] * n[k];
        }
        Ok(acc)
    }
}

/// Lagrange shape functions at barycentric coordinates `l`.
pub fn shape_values(order: usize, l: [f64; 3]) -> Vec<f64> {
    if order == 1 {
        l.to_vec()
    } else {
        vec![
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }
}

/// Compose a DOF action with itself `times` times; returns targets and net shifts.
pub fn compose_action(action: &[DofMap], times: usize) -> Vec<DofMap> {
    (0..action.len())
        .map(|d| {
            let mut cur = DofMap { target: d, shift: [0, 0] };
            for _ in 0..times {
                let m = action[cur.target];
                cur = DofMap {
                    target: m.target,
                    shift: [cur.shift[0] + m.shift[0], cur.shift[1] + m.shift[1]],
                };
            }
            cur
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn areas() {
        let m = build_mesh(&CellGeometry::default(), 0, 2).unwrap();
        assert!((m.total_area() - SQRT3 / 2.0).abs() < 1e-12);
        let a = m.region_area(Region::InclusionA);
        let b = m.region_area(Region::InclusionB);
        assert!((a - b).abs() < 1e-14);
        let poly = 0.5 * 24.0 * 0.04 * (2.0 * PI / 24.0).sin();
        assert!((a - poly).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(build_mesh(&CellGeometry::new(0.29, 24), 0, 2).is_err());
        assert!(build_mesh(&CellGeometry::new(0.2, 64), 0, 2).is_err());
        assert!(build_mesh(&CellGeometry::new(0.2, 24), 0, 3).is_err());
    }

    #[test]
    fn all_elements_positive() {
        let m = build_mesh(&CellGeometry::default(), 1, 1).unwrap();
        for e in 0..m.n_elements() {
            assert!(m.element_area(e) > 1e-6, "element {e}");
        }
    }
}
