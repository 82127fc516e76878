//! Structured bilayer meshes of 10-node tetrahedra.
//!
//! Local node ordering follows the VTK quadratic tetrahedron: corners `0..4`, then the midpoints
//! of edges `(0,1) (1,2) (0,2) (0,3) (1,3) (2,3)`. Geometry is affine: midpoint nodes sit exactly
//! at edge midpoints.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::MeshError;
use crate::tensor::{Tensor2, Vec3};

/// Corner pairs of the six edges, in local midpoint order.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)];

/// Corner triples of the four faces.
const TET_FACES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Region {
    Film,
    Substrate,
}

impl Region {
    pub fn tag(self) -> u8 {
        match self {
            Region::Film => 1,
            Region::Substrate => 0,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Region> {
        match tag {
            1 => Some(Region::Film),
            0 => Some(Region::Substrate),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetSet {
    Bottom,
    Top,
    XMin,
    XMax,
    YMin,
    YMax,
}

impl FacetSet {
    pub const ALL: [FacetSet; 6] =
        [FacetSet::Bottom, FacetSet::Top, FacetSet::XMin, FacetSet::XMax, FacetSet::YMin, FacetSet::YMax];

    pub fn name(self) -> &'static str {
        match self {
            FacetSet::Bottom => "bottom",
            FacetSet::Top => "top",
            FacetSet::XMin => "x_min",
            FacetSet::XMax => "x_max",
            FacetSet::YMin => "y_min",
            FacetSet::YMax => "y_max",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A 6-node boundary triangle: corners, then midpoints of `(0,1) (1,2) (2,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Facet {
    pub nodes: [usize; 6],
    pub cell: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Vec3>,
    pub cells: Vec<[usize; 10]>,
    pub regions: Vec<Region>,
    facets: [Vec<Facet>; 6],
    /// Bounding box corners.
    pub lower: Vec3,
    pub upper: Vec3,
}

impl Mesh {
    /// Assembles a mesh from raw arrays and classifies boundary triangles by bounding-box plane.
    /// Boundary triangles that lie on none of the six planes are left unassigned and reported by
    /// [`validate_mesh`].
    pub fn from_parts(nodes: Vec<Vec3>, cells: Vec<[usize; 10]>, regions: Vec<Region>) -> Result<Mesh, MeshError> {
        if cells.len() != regions.len() {
            return Err(MeshError::InvalidGeometry(format!(
                "{} cells but {} region tags",
                cells.len(),
                regions.len()
            )));
        }
        if let Some(bad) = cells.iter().flatten().find(|&&n| n >= nodes.len()) {
            return Err(MeshError::InvalidGeometry(format!("node id {bad} out of range")));
        }
        let (lower, upper) = bounding_box(&nodes);
        let mut mesh = Mesh { nodes, cells, regions, facets: Default::default(), lower, upper };
        mesh.classify_boundary();
        Ok(mesh)
    }

    pub fn facets(&self, set: FacetSet) -> &[Facet] {
        &self.facets[set.index()]
    }

    pub fn extent(&self) -> Vec3 {
        self.upper - self.lower
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_corners(&self, cell: usize) -> [Vec3; 4] {
        let c = &self.cells[cell];
        [self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]], self.nodes[c[3]]]
    }

    /// Jacobian of the affine map from the reference tetrahedron, columns `x_i − x_0`.
    pub fn cell_jacobian(&self, cell: usize) -> Tensor2 {
        let [x0, x1, x2, x3] = self.cell_corners(cell);
        let (a, b, c) = (x1 - x0, x2 - x0, x3 - x0);
        Tensor2([[a[0], b[0], c[0]], [a[1], b[1], c[1]], [a[2], b[2], c[2]]])
    }

    pub fn cell_volume(&self, cell: usize) -> f64 {
        self.cell_jacobian(cell).det() / 6.0
    }

    pub fn cell_centroid(&self, cell: usize) -> Vec3 {
        let [a, b, c, d] = self.cell_corners(cell);
        (a + b + c + d).scale(0.25)
    }

    /// Characteristic length used to scale geometric tolerances.
    pub fn length_scale(&self) -> f64 {
        let e = self.extent();
        e[0].max(e[1]).max(e[2]).max(f64::MIN_POSITIVE)
    }

    /// Node ids referenced by a facet set, sorted and deduplicated.
    pub fn facet_nodes(&self, set: FacetSet) -> Vec<usize> {
        let mut ids: Vec<usize> = self.facets(set).iter().flat_map(|f| f.nodes).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn classify_boundary(&mut self) {
        let tol = 1e-9 * self.length_scale();
        let mut count: BTreeMap<[usize; 3], (usize, usize)> = BTreeMap::new();
        for (cell, nodes) in self.cells.iter().enumerate() {
            for (f, face) in TET_FACES.iter().enumerate() {
                let mut key = [nodes[face[0]], nodes[face[1]], nodes[face[2]]];
                key.sort_unstable();
                count.entry(key).and_modify(|e| e.0 += 1).or_insert((1, cell * 4 + f));
            }
        }
        let mut facets: [Vec<Facet>; 6] = Default::default();
        for (_, (n, tag)) in count {
            if n != 1 {
                continue;
            }
            let (cell, f) = (tag / 4, tag % 4);
            let c = &self.cells[cell];
            let [a, b, d] = TET_FACES[f];
            let nodes = [c[a], c[b], c[d], c[4 + edge_index(a, b)], c[4 + edge_index(b, d)], c[4 + edge_index(a, d)]];
            let pts = [self.nodes[nodes[0]], self.nodes[nodes[1]], self.nodes[nodes[2]]];
            let on = |axis: usize, value: f64| pts.iter().all(|p| libm::fabs(p[axis] - value) <= tol);
            let set = if on(2, self.lower[2]) {
                Some(FacetSet::Bottom)
            } else if on(2, self.upper[2]) {
                Some(FacetSet::Top)
            } else if on(0, self.lower[0]) {
                Some(FacetSet::XMin)
            } else if on(0, self.upper[0]) {
                Some(FacetSet::XMax)
            } else if on(1, self.lower[1]) {
                Some(FacetSet::YMin)
            } else if on(1, self.upper[1]) {
                Some(FacetSet::YMax)
            } else {
                None
            };
            if let Some(set) = set {
                facets[set.index()].push(Facet { nodes, cell });
            }
        }
        self.facets = facets;
    }

    /// Boundary triangles (by sorted corner ids) that belong to no facet set.
    fn unassigned_boundary_faces(&self) -> usize {
        let mut count: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for nodes in &self.cells {
            for face in &TET_FACES {
                let mut key = [nodes[face[0]], nodes[face[1]], nodes[face[2]]];
                key.sort_unstable();
                *count.entry(key).or_insert(0) += 1;
            }
        }
        let boundary = count.values().filter(|&&n| n == 1).count();
        let assigned: usize = self.facets.iter().map(Vec::len).sum();
        boundary - assigned
    }
}

/// Local midpoint index (0..6) of the edge joining corners `a` and `b`.
pub fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    TET_EDGES.iter().position(|&e| e == (a, b)).expect("corner pair is a tetrahedron edge")
}

fn bounding_box(nodes: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in nodes {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    if nodes.is_empty() {
        (Vec3::zero(), Vec3::zero())
    } else {
        (lo, hi)
    }
}

/// Box dimensions and grid counts for [`build_bilayer_box`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxSpec {
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub h_film: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz_subs: usize,
    pub nz_film: usize,
}

/// Structured film-on-substrate box, each grid box cut into six tetrahedra around its main
/// diagonal. The uniform diagonal pattern makes opposite faces triangulate identically.
pub fn build_bilayer_box(spec: &BoxSpec) -> Result<Mesh, MeshError> {
    let BoxSpec { lx, ly, h, h_film, nx, ny, nz_subs, nz_film } = *spec;
    for (name, v) in [("Lx", lx), ("Ly", ly), ("H", h), ("h_film", h_film)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(MeshError::InvalidGeometry(format!("{name} must be positive, got {v}")));
        }
    }
    if nx == 0 || ny == 0 || nz_subs == 0 || nz_film == 0 {
        return Err(MeshError::InvalidGeometry(String::from("all element counts must be >= 1")));
    }
    if !(h_film < h) {
        return Err(MeshError::InvalidGeometry(format!(
            "film thickness {h_film} does not fit inside total height {h}"
        )));
    }
    let nz = nz_subs + nz_film;
    let h_subs = h - h_film;
    let plane_z = |k: usize| -> f64 {
        if k <= nz_subs {
            h_subs * k as f64 / nz_subs as f64
        } else {
            h_subs + h_film * (k - nz_subs) as f64 / nz_film as f64
        }
    };
    let interface = plane_z(nz_subs);
    if libm::fabs(interface - (h - h_film)) > 1e-12 * h {
        return Err(MeshError::InvalidGeometry(String::from("layer interface is not a grid plane")));
    }

    // Nodes live on the doubled grid; every doubled-grid point is a corner or an edge midpoint.
    let (mx, my, mz) = (2 * nx + 1, 2 * ny + 1, 2 * nz + 1);
    let node_id = |i: usize, j: usize, k: usize| (k * my + j) * mx + i;
    let mut nodes = Vec::with_capacity(mx * my * mz);
    for k in 0..mz {
        let z = if k % 2 == 0 { plane_z(k / 2) } else { 0.5 * (plane_z(k / 2) + plane_z(k / 2 + 1)) };
        for j in 0..my {
            let y = ly * j as f64 / (2 * ny) as f64;
            for i in 0..mx {
                let x = lx * i as f64 / (2 * nx) as f64;
                nodes.push(Vec3::new(x, y, z));
            }
        }
    }

    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    let mut regions = Vec::with_capacity(6 * nx * ny * nz);
    for bz in 0..nz {
        let region = if bz >= nz_subs { Region::Film } else { Region::Substrate };
        for by in 0..ny {
            for bx in 0..nx {
                let base = [2 * bx, 2 * by, 2 * bz];
                for perm in &PERMS {
                    let mut corners = [[0usize; 3]; 4];
                    let mut cur = base;
                    corners[0] = cur;
                    for (step, &axis) in perm.iter().enumerate() {
                        cur[axis] += 2;
                        corners[step + 1] = cur;
                    }
                    let pos = |c: [usize; 3]| nodes[node_id(c[0], c[1], c[2])];
                    let (p0, p1, p2, p3) = (pos(corners[0]), pos(corners[1]), pos(corners[2]), pos(corners[3]));
                    let vol = (p1 - p0).dot(&(p2 - p0).cross(&(p3 - p0)));
                    if vol < 0.0 {
                        corners.swap(1, 2);
                    }
                    let mut cell = [0usize; 10];
                    for (a, c) in corners.iter().enumerate() {
                        cell[a] = node_id(c[0], c[1], c[2]);
                    }
                    for (e, &(a, b)) in TET_EDGES.iter().enumerate() {
                        let (ca, cb) = (corners[a], corners[b]);
                        cell[4 + e] = node_id((ca[0] + cb[0]) / 2, (ca[1] + cb[1]) / 2, (ca[2] + cb[2]) / 2);
                    }
                    cells.push(cell);
                    regions.push(region);
                }
            }
        }
    }
    Mesh::from_parts(nodes, cells, regions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
        }
    }
}

/// One follower node slaved to its (fully resolved) leader.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicPair {
    pub follower: usize,
    pub leader: usize,
    /// `x_follower − x_leader`; has a component along every axis the pair was chained through.
    pub offset: Vec3,
    /// Pairing axes, `[x, y]`.
    pub axes: [bool; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeriodicPairs {
    pub pairs: Vec<PeriodicPair>,
    /// Period along x and y when that axis is paired.
    pub translation: [Option<f64>; 2],
}

impl PeriodicPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `leader[node]`, identity for nodes that are not followers.
    pub fn leader_map(&self, num_nodes: usize) -> Vec<usize> {
        let mut map: Vec<usize> = (0..num_nodes).collect();
        for p in &self.pairs {
            map[p.follower] = p.leader;
        }
        map
    }
}

/// Pairs every node on the max face of each axis with the node on the min face one period away.
/// Nodes on edges shared by both periodic directions chain to a single leader.
pub fn find_periodic_pairs(mesh: &Mesh, axes: &[Axis]) -> Result<PeriodicPairs, MeshError> {
    let scale = mesh.length_scale();
    let tol = 1e-8 * scale;
    let quant = 1e-7 * scale;
    let key = |p: &Vec3| -> [i64; 3] {
        [
            libm::round(p[0] / quant) as i64,
            libm::round(p[1] / quant) as i64,
            libm::round(p[2] / quant) as i64,
        ]
    };

    // links[axis]: follower -> leader one period away along that axis
    let mut links: [BTreeMap<usize, usize>; 2] = Default::default();
    let mut translation = [None, None];
    for &axis in axes {
        let a = axis.index();
        let lo = mesh.lower[a];
        let period = mesh.upper[a] - lo;
        translation[a] = Some(period);
        let leaders: BTreeMap<[i64; 3], usize> = mesh
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, p)| libm::fabs(p[a] - lo) <= tol)
            .map(|(id, p)| (key(p), id))
            .collect();
        let mut unmatched = Vec::new();
        for (id, p) in mesh.nodes.iter().enumerate() {
            if libm::fabs(p[a] - mesh.upper[a]) > tol {
                continue;
            }
            let mut target = *p;
            target[a] -= period;
            match leaders.get(&key(&target)) {
                Some(&leader) if (mesh.nodes[leader] - target).norm() <= tol => {
                    links[a].insert(id, leader);
                }
                _ => unmatched.push(id),
            }
        }
        if !unmatched.is_empty() {
            return Err(MeshError::PairingFailure { axis: axis.label(), nodes: unmatched });
        }
    }

    let mut followers: Vec<usize> = links.iter().flat_map(|l| l.keys().copied()).collect();
    followers.sort_unstable();
    followers.dedup();
    let mut pairs = Vec::with_capacity(followers.len());
    for follower in followers {
        let mut axes_used = [false; 2];
        let mut leader = follower;
        // each hop strictly decreases one coordinate to its minimum, so at most two hops
        for _ in 0..3 {
            let hop = (0..2).find_map(|a| links[a].get(&leader).map(|&n| (a, n)));
            match hop {
                Some((a, n)) => {
                    axes_used[a] = true;
                    leader = n;
                }
                None => break,
            }
        }
        if (0..2).any(|a| links[a].contains_key(&leader)) {
            return Err(MeshError::PairingFailure { axis: 'x', nodes: vec![follower] });
        }
        pairs.push(PeriodicPair {
            follower,
            leader,
            offset: mesh.nodes[follower] - mesh.nodes[leader],
            axes: axes_used,
        });
    }
    Ok(PeriodicPairs { pairs, translation })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshIssue {
    InvertedCell { cell: usize, det: f64 },
    MidpointOffset { cell: usize, local: usize, distance: f64 },
    UnassignedBoundaryFaces { count: usize },
    NonFiniteNode { node: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshReport {
    pub issues: Vec<MeshIssue>,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks orientation, affine midpoints and boundary coverage.
pub fn validate_mesh(mesh: &Mesh) -> MeshReport {
    let mut issues = Vec::new();
    for (id, p) in mesh.nodes.iter().enumerate() {
        if !p.is_finite() {
            issues.push(MeshIssue::NonFiniteNode { node: id });
        }
    }
    for cell in 0..mesh.num_cells() {
        let det = mesh.cell_jacobian(cell).det();
        if !(det > 0.0) {
            issues.push(MeshIssue::InvertedCell { cell, det });
        }
        let c = &mesh.cells[cell];
        let edge_len = (mesh.nodes[c[1]] - mesh.nodes[c[0]]).norm();
        for (e, &(a, b)) in TET_EDGES.iter().enumerate() {
            let mid = (mesh.nodes[c[a]] + mesh.nodes[c[b]]).scale(0.5);
            let distance = (mesh.nodes[c[4 + e]] - mid).norm();
            if distance > 1e-12 * edge_len.max(f64::MIN_POSITIVE) {
                issues.push(MeshIssue::MidpointOffset { cell, local: 4 + e, distance });
            }
        }
    }
    let unassigned = mesh.unassigned_boundary_faces();
    if unassigned > 0 {
        issues.push(MeshIssue::UnassignedBoundaryFaces { count: unassigned });
    }
    MeshReport { issues }
}
