//! Periodic/Dirichlet dof numbering and global assembly of the condensed T2P0F0 system.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{EnergyBreakdown, LayerEnergy};
use crate::element::{evaluate_element, CellGeometry, ElementEnergy, Growth, MixedElementState, ReferenceElementT2, DOFS, NODES};
use crate::error::{FemError, MaterialError};
use crate::material::{GrowthKind, GrowthSpec, MaterialParams};
use crate::mesh::{find_periodic_pairs, Axis, FacetSet, Mesh, PeriodicPairs, Region};
use crate::tensor::Vec3;

/// Where a node component lives in the global system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DofSlot {
    Free(usize),
    Fixed(f64),
}

/// Node-component to equation map with periodic aliasing and Dirichlet elimination.
#[derive(Clone, Debug)]
pub struct DofMap {
    leader: Vec<usize>,
    slots: Vec<DofSlot>,
    num_free: usize,
}

/// A prescribed displacement component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dirichlet {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

impl DofMap {
    /// Followers of `pairs` share their leader's equations (`u_follower = u_leader`). A Dirichlet
    /// value set on a follower is transferred to its leader.
    pub fn new(num_nodes: usize, pairs: &PeriodicPairs, dirichlet: &[Dirichlet]) -> Result<DofMap, FemError> {
        let leader = pairs.leader_map(num_nodes);
        let mut fixed: Vec<Option<f64>> = vec![None; 3 * num_nodes];
        for d in dirichlet {
            if d.node >= num_nodes || d.component > 2 {
                return Err(FemError::DofMap(format!("Dirichlet entry out of range: node {} component {}", d.node, d.component)));
            }
            let slot = &mut fixed[3 * leader[d.node] + d.component];
            match *slot {
                Some(v) if v != d.value => {
                    return Err(FemError::DofMap(format!(
                        "conflicting prescribed values {v} and {} on node {} component {}",
                        d.value, leader[d.node], d.component
                    )))
                }
                _ => *slot = Some(d.value),
            }
        }
        let mut slots = vec![DofSlot::Fixed(0.0); 3 * num_nodes];
        let mut num_free = 0;
        for n in 0..num_nodes {
            if leader[n] != n {
                continue;
            }
            for c in 0..3 {
                slots[3 * n + c] = match fixed[3 * n + c] {
                    Some(v) => DofSlot::Fixed(v),
                    None => {
                        num_free += 1;
                        DofSlot::Free(num_free - 1)
                    }
                };
            }
        }
        for n in 0..num_nodes {
            if leader[n] != n {
                for c in 0..3 {
                    slots[3 * n + c] = slots[3 * leader[n] + c];
                }
            }
        }
        Ok(DofMap { leader, slots, num_free })
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn num_nodes(&self) -> usize {
        self.leader.len()
    }

    pub fn slot(&self, node: usize, component: usize) -> DofSlot {
        self.slots[3 * node + component]
    }

    pub fn leader(&self, node: usize) -> usize {
        self.leader[node]
    }

    /// Nodal displacements from free values plus prescribed values.
    pub fn expand(&self, free: &[f64]) -> Vec<Vec3> {
        (0..self.num_nodes())
            .map(|n| {
                let mut v = Vec3::zero();
                for c in 0..3 {
                    v[c] = match self.slot(n, c) {
                        DofSlot::Free(i) => free[i],
                        DofSlot::Fixed(x) => x,
                    };
                }
                v
            })
            .collect()
    }

    /// Free values read from nodal displacements (leaders only).
    pub fn gather(&self, nodal: &[Vec3]) -> Vec<f64> {
        let mut free = vec![0.0; self.num_free];
        for n in 0..self.num_nodes() {
            if self.leader[n] != n {
                continue;
            }
            for c in 0..3 {
                if let DofSlot::Free(i) = self.slot(n, c) {
                    free[i] = nodal[n][c];
                }
            }
        }
        free
    }

    /// Sums a full nodal vector (3 per node) onto free equations.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_free];
        for (k, v) in nodal.iter().enumerate() {
            if let DofSlot::Free(i) = self.slots[k] {
                out[i] += v;
            }
        }
        out
    }
}

/// Lower triangle of a symmetric sparse matrix in compressed-column form; rows sorted per column.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricCsc {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SymmetricCsc {
    /// Pattern from (row, col) entries; only `row >= col` entries are kept.
    pub fn from_pattern(n: usize, mut entries: Vec<(usize, usize)>) -> SymmetricCsc {
        entries.retain(|&(r, c)| r >= c);
        entries.sort_unstable_by_key(|&(r, c)| (c, r));
        entries.dedup();
        let mut col_ptr = vec![0; n + 1];
        for &(_, c) in &entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx: Vec<usize> = entries.iter().map(|&(r, _)| r).collect();
        let nnz = row_idx.len();
        SymmetricCsc { n, col_ptr, row_idx, values: vec![0.0; nnz] }
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        let start = self.col_ptr[c];
        let rows = &self.row_idx[start..self.col_ptr[c + 1]];
        rows.binary_search(&r).ok().map(|k| start + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    pub fn zero_values(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `y = K x` using both triangles.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = self.values[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                d[r][c] = self.values[k];
                d[c][r] = self.values[k];
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Boundary conditions of a model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    pub periodic: Vec<Axis>,
    pub fix_bottom: bool,
    pub dirichlet: Vec<Dirichlet>,
}

impl Constraints {
    /// Periodic side walls and a clamped bottom face.
    pub fn periodic_clamped() -> Constraints {
        Constraints { periodic: vec![Axis::X, Axis::Y], fix_bottom: true, dirichlet: Vec::new() }
    }
}

/// Global residual, optional tangent and per-cell results of one assembly.
#[derive(Clone, Debug)]
pub struct Assembly {
    /// Internal minus external forces on free equations.
    pub residual: Vec<f64>,
    pub mixed: Vec<MixedElementState>,
    pub energy: EnergyBreakdown,
}

/// Mesh, materials, growth law and constraints: everything needed to evaluate the discrete
/// problem at a given growth level.
#[derive(Clone, Debug)]
pub struct Model {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub film: MaterialParams,
    pub substrate: MaterialParams,
    pub growth_kind: GrowthKind,
    pub m0: Vec3,
    pub pairs: PeriodicPairs,
    geometry: Vec<CellGeometry>,
    cell_slots: Vec<[DofSlot; DOFS]>,
    pattern: SymmetricCsc,
}

impl Model {
    pub fn new(
        mesh: Mesh,
        film: MaterialParams,
        substrate: MaterialParams,
        growth_kind: GrowthKind,
        m0: Vec3,
        constraints: &Constraints,
    ) -> Result<Model, FemError> {
        for p in [&film, &substrate] {
            p.validate().map_err(|e| FemError::Material { cell: usize::MAX, source: e })?;
        }
        let pairs = find_periodic_pairs(&mesh, &constraints.periodic)
            .map_err(|e| FemError::DofMap(format!("{e}")))?;
        let mut dirichlet = constraints.dirichlet.clone();
        if constraints.fix_bottom {
            for n in mesh.facet_nodes(FacetSet::Bottom) {
                for component in 0..3 {
                    dirichlet.push(Dirichlet { node: n, component, value: 0.0 });
                }
            }
        }
        let dofs = DofMap::new(mesh.num_nodes(), &pairs, &dirichlet)?;
        let reference = ReferenceElementT2::new();
        let mut geometry = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            let geom = CellGeometry::new(&reference, &mesh.cell_corners(c)).ok_or(FemError::NonPositiveJacobian {
                cell: c,
                det_f: mesh.cell_jacobian(c).det(),
                det_fe: f64::NAN,
            })?;
            geometry.push(geom);
        }
        let cell_slots: Vec<[DofSlot; DOFS]> = mesh
            .cells
            .iter()
            .map(|cell| {
                let mut s = [DofSlot::Fixed(0.0); DOFS];
                for a in 0..NODES {
                    for i in 0..3 {
                        s[3 * a + i] = dofs.slot(cell[a], i);
                    }
                }
                s
            })
            .collect();
        let mut entries = Vec::new();
        for slots in &cell_slots {
            let free: Vec<usize> =
                slots.iter().filter_map(|s| if let DofSlot::Free(i) = s { Some(*i) } else { None }).collect();
            for &r in &free {
                for &c in &free {
                    if r >= c {
                        entries.push((r, c));
                    }
                }
            }
        }
        let pattern = SymmetricCsc::from_pattern(dofs.num_free(), entries);
        Ok(Model { mesh, dofs, film, substrate, growth_kind, m0, pairs, geometry, cell_slots, pattern })
    }

    pub fn num_free(&self) -> usize {
        self.dofs.num_free()
    }

    pub fn params(&self, cell: usize) -> &MaterialParams {
        match self.mesh.regions[cell] {
            Region::Film => &self.film,
            Region::Substrate => &self.substrate,
        }
    }

    pub fn growth_spec(&self, g: f64) -> GrowthSpec {
        match self.growth_kind {
            GrowthKind::Isotropic => GrowthSpec::isotropic(g),
            GrowthKind::Planar => GrowthSpec::planar(g, self.m0),
        }
    }

    pub fn growth(&self, g: f64) -> Result<Growth, FemError> {
        Growth::new(&self.growth_spec(g)).map_err(|e| FemError::Material { cell: usize::MAX, source: e })
    }

    pub fn geometry(&self, cell: usize) -> &CellGeometry {
        &self.geometry[cell]
    }

    /// Empty tangent with the model's sparsity pattern.
    pub fn tangent_pattern(&self) -> SymmetricCsc {
        self.pattern.clone()
    }

    fn cell_displacements(&self, cell: usize, nodal: &[Vec3]) -> [Vec3; NODES] {
        let ids = &self.mesh.cells[cell];
        let mut u = [Vec3::zero(); NODES];
        for a in 0..NODES {
            u[a] = nodal[ids[a]];
        }
        u
    }

    /// Residual `f_int(u) − f_ext` on free equations. `external` is a full nodal vector
    /// (3 per node) or `None`. When `tangent` is given its values are overwritten.
    pub fn assemble(
        &self,
        free: &[f64],
        g: f64,
        external: Option<&[f64]>,
        mut tangent: Option<&mut SymmetricCsc>,
    ) -> Result<Assembly, FemError> {
        let growth = self.growth(g)?;
        let nodal = self.dofs.expand(free);
        let mut residual = vec![0.0; self.num_free()];
        let mut mixed = Vec::with_capacity(self.mesh.num_cells());
        let mut energy = EnergyBreakdown::default();
        if let Some(k) = tangent.as_deref_mut() {
            k.zero_values();
        }
        for cell in 0..self.mesh.num_cells() {
            let u = self.cell_displacements(cell, &nodal);
            let out = evaluate_element(&self.geometry[cell], &u, self.params(cell), &growth, tangent.is_some())
                .map_err(|e| FemError::from_material(cell, e))?;
            let slots = &self.cell_slots[cell];
            for (la, slot) in slots.iter().enumerate() {
                if let DofSlot::Free(r) = *slot {
                    residual[r] += out.residual[la];
                }
            }
            if let (Some(k), Some(ke)) = (tangent.as_deref_mut(), out.tangent.as_ref()) {
                for (la, sa) in slots.iter().enumerate() {
                    let DofSlot::Free(r) = *sa else { continue };
                    for (lb, sb) in slots.iter().enumerate() {
                        let DofSlot::Free(c) = *sb else { continue };
                        if r >= c {
                            let pos = k.position(r, c).expect("pattern covers every element coupling");
                            k.values[pos] += ke[la][lb];
                        }
                    }
                }
            }
            mixed.push(out.mixed);
            let layer = match self.mesh.regions[cell] {
                Region::Film => &mut energy.film,
                Region::Substrate => &mut energy.substrate,
            };
            *layer += LayerEnergy { iso: out.energy.iso, vol: out.energy.vol, ani: out.energy.ani };
        }
        if let Some(f) = external {
            for (r, v) in residual.iter_mut().zip(self.dofs.restrict(f)) {
                *r -= v;
            }
        }
        Ok(Assembly { residual, mixed, energy })
    }

    /// Condensed potential minus external work `Σ f_ext · u`.
    pub fn potential(&self, free: &[f64], g: f64, external: Option<&[f64]>) -> Result<f64, FemError> {
        let a = self.assemble(free, g, None, None)?;
        let mut pi = a.energy.total();
        if let Some(f) = external {
            let nodal = self.dofs.expand(free);
            for (n, u) in nodal.iter().enumerate() {
                for c in 0..3 {
                    pi -= f[3 * n + c] * u[c];
                }
            }
        }
        Ok(pi)
    }

    /// Per-cell energies, for field output.
    pub fn cell_energies(&self, free: &[f64], g: f64) -> Result<Vec<ElementEnergy>, FemError> {
        let growth = self.growth(g)?;
        let nodal = self.dofs.expand(free);
        (0..self.mesh.num_cells())
            .map(|cell| {
                let u = self.cell_displacements(cell, &nodal);
                evaluate_element(&self.geometry[cell], &u, self.params(cell), &growth, false)
                    .map(|out| out.energy)
                    .map_err(|e| FemError::from_material(cell, e))
            })
            .collect()
    }

    /// Free displacement vector of the homogeneous map `u = (A − I) X`, ignoring prescribed values.
    pub fn affine_state(&self, a: &crate::tensor::Tensor2) -> Vec<f64> {
        let d = *a - crate::tensor::Tensor2::identity();
        let nodal: Vec<Vec3> = self.mesh.nodes.iter().map(|x| d.mul_vec(x)).collect();
        self.dofs.gather(&nodal)
    }
}

impl From<MaterialError> for FemError {
    fn from(e: MaterialError) -> Self {
        FemError::Material { cell: usize::MAX, source: e }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::element_residual;
    use crate::material::MaterialParams;
    use crate::mesh::{build_bilayer_box, BoxSpec};
    use crate::tensor::Tensor2;

    fn unit_box() -> Mesh {
        build_bilayer_box(&BoxSpec { lx: 1.0, ly: 1.0, h: 1.0, h_film: 0.5, nx: 1, ny: 1, nz_subs: 1, nz_film: 1 })
            .unwrap()
    }

    fn soft() -> MaterialParams {
        MaterialParams { mu0: 1.0, penalty_lambda: 20.0, mu_fiber: 0.0, n0: Vec3::new(0.0, 1.0, 0.0), tension_only: false }
    }

    fn stiff() -> MaterialParams {
        MaterialParams { mu0: 10.0, penalty_lambda: 200.0, mu_fiber: 5.0, n0: Vec3::new(0.0, 1.0, 0.0), tension_only: false }
    }

    #[test]
    fn dof_map_aliases_followers_and_drops_fixed() {
        let mesh = unit_box();
        let pairs = find_periodic_pairs(&mesh, &[Axis::X, Axis::Y]).unwrap();
        let bottom: Vec<Dirichlet> = mesh
            .facet_nodes(FacetSet::Bottom)
            .into_iter()
            .flat_map(|n| (0..3).map(move |component| Dirichlet { node: n, component, value: 0.0 }))
            .collect();
        let map = DofMap::new(mesh.num_nodes(), &pairs, &bottom).unwrap();
        // 5 z-levels of the doubled grid, 4 distinct periodic columns each, the bottom level fixed
        assert_eq!(map.num_free(), 3 * 4 * 4);
        for p in &pairs.pairs {
            for c in 0..3 {
                assert_eq!(map.slot(p.follower, c), map.slot(p.leader, c));
            }
        }
        let mut seen = vec![false; map.num_free()];
        for n in 0..mesh.num_nodes() {
            for c in 0..3 {
                if let DofSlot::Free(i) = map.slot(n, c) {
                    seen[i] = true;
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn conflicting_dirichlet_values_are_rejected() {
        let mesh = unit_box();
        let pairs = find_periodic_pairs(&mesh, &[Axis::X]).unwrap();
        let p = pairs.pairs[0];
        let bc = [
            Dirichlet { node: p.follower, component: 0, value: 1.0 },
            Dirichlet { node: p.leader, component: 0, value: 2.0 },
        ];
        assert!(matches!(DofMap::new(mesh.num_nodes(), &pairs, &bc), Err(FemError::DofMap(_))));
    }

    #[test]
    fn single_element_reproduces_element_residual() {
        let reference = ReferenceElementT2::new();
        let corners =
            [Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let nodes = ReferenceElementT2::node_coordinates().to_vec();
        let mesh = Mesh::from_parts(nodes, vec![[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]], vec![Region::Film]).unwrap();
        let model =
            Model::new(mesh, stiff(), soft(), GrowthKind::Planar, Vec3::new(0.0, 0.0, 1.0), &Constraints::default())
                .unwrap();
        let free: Vec<f64> = (0..30).map(|k| 0.01 * libm::sin(k as f64)).collect();
        let a = model.assemble(&free, 0.02, None, None).unwrap();
        let geom = CellGeometry::new(&reference, &corners).unwrap();
        let mut u = [Vec3::zero(); NODES];
        for k in 0..30 {
            u[k / 3][k % 3] = free[k];
        }
        let growth = Growth::new(&GrowthSpec::planar(0.02, Vec3::new(0.0, 0.0, 1.0))).unwrap();
        let r = element_residual(&geom, &u, &stiff(), &growth).unwrap();
        for k in 0..30 {
            assert_eq!(a.residual[k], r[k]);
        }
    }

    #[test]
    fn shared_face_residual_is_the_sum_of_both_elements() {
        // two tets sharing face (1, 2, 3)
        let corners = [
            Vec3::zero(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.8, 0.8, 0.8),
        ];
        let mut nodes = corners.to_vec();
        let mut edge_node = BTreeMapLite::default();
        let tets = [[0usize, 1, 2, 3], [4, 2, 1, 3]];
        let mut cells = Vec::new();
        for t in tets {
            let mut cell = [0usize; 10];
            cell[..4].copy_from_slice(&t);
            for (e, &(a, b)) in crate::mesh::TET_EDGES.iter().enumerate() {
                cell[4 + e] = edge_node.get_or_insert(t[a], t[b], &mut nodes);
            }
            cells.push(cell);
        }
        let mesh = Mesh::from_parts(nodes, cells, vec![Region::Film, Region::Substrate]).unwrap();
        let model =
            Model::new(mesh, stiff(), soft(), GrowthKind::Isotropic, Vec3::new(0.0, 0.0, 1.0), &Constraints::default())
                .unwrap();
        let n = model.num_free();
        let free: Vec<f64> = (0..n).map(|k| 0.02 * libm::cos(1.7 * k as f64)).collect();
        let a = model.assemble(&free, 0.01, None, None).unwrap();
        let nodal = model.dofs.expand(&free);
        let growth = model.growth(0.01).unwrap();
        let mut by_hand = vec![0.0; n];
        for cell in 0..2 {
            let ids = model.mesh.cells[cell];
            let mut u = [Vec3::zero(); NODES];
            for k in 0..NODES {
                u[k] = nodal[ids[k]];
            }
            let r = element_residual(model.geometry(cell), &u, model.params(cell), &growth).unwrap();
            for k in 0..NODES {
                for c in 0..3 {
                    if let DofSlot::Free(i) = model.dofs.slot(ids[k], c) {
                        by_hand[i] += r[3 * k + c];
                    }
                }
            }
        }
        for k in 0..n {
            assert!((a.residual[k] - by_hand[k]).abs() < 1e-13);
        }
    }

    #[derive(Default)]
    struct BTreeMapLite(alloc::collections::BTreeMap<(usize, usize), usize>);

    impl BTreeMapLite {
        fn get_or_insert(&mut self, a: usize, b: usize, nodes: &mut Vec<Vec3>) -> usize {
            let key = (a.min(b), a.max(b));
            *self.0.entry(key).or_insert_with(|| {
                nodes.push((nodes[a] + nodes[b]).scale(0.5));
                nodes.len() - 1
            })
        }
    }

    #[test]
    fn homogeneous_state_matches_scaled_unpaired_residual() {
        // With u = (A − I) X every element of the periodic box carries the same stress; leader rows
        // collect the contributions of all aliased copies.
        let mesh = unit_box();
        let a = Tensor2::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.97]]);
        let periodic = Model::new(
            mesh.clone(),
            stiff(),
            soft(),
            GrowthKind::Planar,
            Vec3::new(0.0, 0.0, 1.0),
            &Constraints { periodic: vec![Axis::X, Axis::Y], fix_bottom: false, dirichlet: vec![] },
        )
        .unwrap();
        let plain =
            Model::new(mesh, stiff(), soft(), GrowthKind::Planar, Vec3::new(0.0, 0.0, 1.0), &Constraints::default())
                .unwrap();
        let rp = periodic.assemble(&periodic.affine_state(&a), 0.01, None, None).unwrap().residual;
        let rq = plain.assemble(&plain.affine_state(&a), 0.01, None, None).unwrap().residual;
        for n in 0..plain.mesh.num_nodes() {
            for c in 0..3 {
                let DofSlot::Free(i) = periodic.dofs.slot(n, c) else { continue };
                if periodic.dofs.leader(n) != n {
                    continue;
                }
                let DofSlot::Free(j) = plain.dofs.slot(n, c) else { unreachable!() };
                let mut sum = 0.0;
                for m in 0..plain.mesh.num_nodes() {
                    if periodic.dofs.leader(m) == n {
                        let DofSlot::Free(k) = plain.dofs.slot(m, c) else { unreachable!() };
                        sum += rq[k];
                    }
                }
                let _ = j;
                assert!((rp[i] - sum).abs() < 1e-10, "node {n} comp {c}: {} vs {sum}", rp[i]);
            }
        }
    }

    #[test]
    fn sparse_matvec_matches_dense() {
        let k = {
            let mut k = SymmetricCsc::from_pattern(3, vec![(0, 0), (1, 0), (1, 1), (2, 2), (2, 1), (0, 2)]);
            for (v, x) in k.values.iter_mut().zip([4.0, 1.0, 3.0, 0.5, 2.0]) {
                *v = x;
            }
            k
        };
        let d = k.to_dense();
        let x = [1.0, -2.0, 0.5];
        let y = k.mul_vec(&x);
        for r in 0..3 {
            let e: f64 = (0..3).map(|c| d[r][c] * x[c]).sum();
            assert!((y[r] - e).abs() < 1e-15);
        }
        assert_eq!(k.get(0, 1), 1.0);
        assert_eq!(k.get(0, 2), 0.0);
    }
}
