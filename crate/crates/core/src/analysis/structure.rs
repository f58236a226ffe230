//! Planar frame model for the direct stiffness method: three degrees of
//! freedom per node, rigid end offsets and master–slave node constraints.

use super::AnalysisError;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix6, Vector6};

/// Moment capacities of the two hinge directions.
///
/// `sagging` is reached when the member bends with its local +y face in
/// compression at midspan (bottom fibres in tension for a beam drawn left to
/// right); `hogging` the opposite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HingeSpec {
    pub sagging: f64,
    pub hogging: f64,
}

impl HingeSpec {
    pub fn symmetric(moment: f64) -> Self {
        Self { sagging: moment, hogging: moment }
    }

    /// Admissible `(min, max)` end moment at end `end` (0 = i, 1 = j) in the
    /// member's counter-clockwise end-moment convention.
    pub fn bounds(&self, end: usize) -> (f64, f64) {
        if end == 0 {
            (-self.sagging, self.hogging)
        } else {
            (-self.hogging, self.sagging)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub i: usize,
    pub j: usize,
    /// Elastic modulus, kN/m².
    pub e: f64,
    /// Area, m².
    pub a: f64,
    /// Second moment of area, m⁴.
    pub inertia: f64,
    /// Rigid arm from node `i` to the flexible end, m.
    pub offset_i: [f64; 2],
    pub offset_j: [f64; 2],
    /// End hinges; `None` keeps the member elastic.
    pub hinge: Option<HingeSpec>,
    /// Include the member in the geometric stiffness.
    pub p_delta: bool,
}

impl Element {
    pub fn new(i: usize, j: usize, e: f64, a: f64, inertia: f64) -> Self {
        Self {
            i,
            j,
            e,
            a,
            inertia,
            offset_i: [0.0; 2],
            offset_j: [0.0; 2],
            hinge: None,
            p_delta: false,
        }
    }
}

/// Nodal loads plus a uniform transverse load per element (local +y
/// positive, kN/m).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCase {
    pub nodal: Vec<[f64; 3]>,
    pub member_w: Vec<f64>,
}

impl LoadCase {
    pub fn zeros(nodes: usize, elements: usize) -> Self {
        Self { nodal: vec![[0.0; 3]; nodes], member_w: vec![0.0; elements] }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            nodal: self.nodal.iter().map(|f| [k * f[0], k * f[1], k * f[2]]).collect(),
            member_w: self.member_w.iter().map(|w| k * w).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &LoadCase, k: f64) {
        for (a, b) in self.nodal.iter_mut().zip(&other.nodal) {
            for d in 0..3 {
                a[d] += k * b[d];
            }
        }
        for (a, b) in self.member_w.iter_mut().zip(&other.member_w) {
            *a += k * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.nodal.iter().all(|f| f.iter().all(|v| *v == 0.0)) && self.member_w.iter().all(|w| *w == 0.0)
    }
}

/// Geometry of one element after offsets and constraints are resolved.
#[derive(Debug, Clone)]
pub(crate) struct ElementFrame {
    /// Equation numbers of the six controlling degrees of freedom.
    pub dofs: [Option<usize>; 6],
    /// Maps the controlling nodal displacements to local end displacements.
    pub b: Matrix6<f64>,
    pub length: f64,
    pub k: Matrix6<f64>,
}

#[derive(Debug, Clone)]
pub struct Structure {
    pub nodes: Vec<[f64; 2]>,
    /// Restrained `(u, v, θ)` per node.
    pub restraints: Vec<[bool; 3]>,
    pub elements: Vec<Element>,
    /// Master and offset of each constrained node, resolved to the root master.
    constraints: Vec<Option<(usize, [f64; 2])>>,
    equations: Vec<[Option<usize>; 3]>,
    n_eq: usize,
    pub(crate) frames: Vec<ElementFrame>,
}

/// `T(r)`: displacement of a point at offset `r` from a rigidly attached node.
fn rigid(r: [f64; 2]) -> [[f64; 3]; 3] {
    [[1.0, 0.0, -r[1]], [0.0, 1.0, r[0]], [0.0, 0.0, 1.0]]
}

pub(crate) fn local_stiffness(e: f64, a: f64, i: f64, l: f64) -> Matrix6<f64> {
    let ea = e * a / l;
    let k1 = 12.0 * e * i / l.powi(3);
    let k2 = 6.0 * e * i / (l * l);
    let k3 = 4.0 * e * i / l;
    let k4 = 2.0 * e * i / l;
    Matrix6::from_row_slice(&[
        ea, 0.0, 0.0, -ea, 0.0, 0.0, //
        0.0, k1, k2, 0.0, -k1, k2, //
        0.0, k2, k3, 0.0, -k2, k4, //
        -ea, 0.0, 0.0, ea, 0.0, 0.0, //
        0.0, -k1, -k2, 0.0, k1, -k2, //
        0.0, k2, k4, 0.0, -k2, k3,
    ])
}

/// Fixed-end forces of a fully fixed member under uniform transverse load `w`.
pub(crate) fn fixed_end_forces(w: f64, l: f64) -> Vector6<f64> {
    Vector6::new(0.0, -w * l / 2.0, -w * l * l / 12.0, 0.0, -w * l / 2.0, w * l * l / 12.0)
}

/// Linearized geometric stiffness for axial force `n` (tension positive).
pub(crate) fn geometric_stiffness(n: f64, l: f64) -> Matrix6<f64> {
    let g = n / l;
    let mut k = Matrix6::zeros();
    k[(1, 1)] = g;
    k[(4, 4)] = g;
    k[(1, 4)] = -g;
    k[(4, 1)] = -g;
    k
}

impl Structure {
    /// Assembles the model. `slaves` lists `(slave, master)` pairs; chains
    /// are followed to the root master.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        restraints: Vec<[bool; 3]>,
        slaves: &[(usize, usize)],
        elements: Vec<Element>,
    ) -> Result<Self, AnalysisError> {
        let n = nodes.len();
        if restraints.len() != n {
            return Err(AnalysisError::Model(format!("{} restraint entries for {n} nodes", restraints.len())));
        }
        let mut master: Vec<Option<usize>> = vec![None; n];
        for &(s, m) in slaves {
            if s >= n || m >= n || s == m {
                return Err(AnalysisError::Model(format!("invalid constraint {s} -> {m}")));
            }
            if master[s].replace(m).is_some() {
                return Err(AnalysisError::Model(format!("node {s} constrained twice")));
            }
        }
        let mut constraints = vec![None; n];
        for s in 0..n {
            let mut root = s;
            let mut hops = 0;
            while let Some(m) = master[root] {
                root = m;
                hops += 1;
                if hops > n {
                    return Err(AnalysisError::Model(format!("constraint cycle through node {s}")));
                }
            }
            if root != s {
                if restraints[s].iter().any(|r| *r) {
                    return Err(AnalysisError::Model(format!("constrained node {s} cannot carry a support")));
                }
                let r = [nodes[s][0] - nodes[root][0], nodes[s][1] - nodes[root][1]];
                constraints[s] = Some((root, r));
            }
        }
        let mut equations = vec![[None; 3]; n];
        let mut n_eq = 0;
        for (node, eq) in equations.iter_mut().enumerate() {
            if constraints[node].is_some() {
                continue;
            }
            for d in 0..3 {
                if !restraints[node][d] {
                    eq[d] = Some(n_eq);
                    n_eq += 1;
                }
            }
        }
        let mut s = Self { nodes, restraints, elements, constraints, equations, n_eq, frames: Vec::new() };
        s.frames = (0..s.elements.len()).map(|e| s.element_frame(e)).collect::<Result<_, _>>()?;
        Ok(s)
    }

    pub fn equation_count(&self) -> usize {
        self.n_eq
    }

    /// Root node and rigid transform controlling `node`.
    fn controller(&self, node: usize, extra: [f64; 2]) -> (usize, [[f64; 3]; 3]) {
        match self.constraints[node] {
            Some((root, r)) => (root, rigid([r[0] + extra[0], r[1] + extra[1]])),
            None => (node, rigid(extra)),
        }
    }

    fn element_frame(&self, index: usize) -> Result<ElementFrame, AnalysisError> {
        let el = &self.elements[index];
        if el.i >= self.nodes.len() || el.j >= self.nodes.len() {
            return Err(AnalysisError::Model(format!("element {index} references a missing node")));
        }
        let pi = [self.nodes[el.i][0] + el.offset_i[0], self.nodes[el.i][1] + el.offset_i[1]];
        let pj = [self.nodes[el.j][0] + el.offset_j[0], self.nodes[el.j][1] + el.offset_j[1]];
        let (dx, dy) = (pj[0] - pi[0], pj[1] - pi[1]);
        let length = dx.hypot(dy);
        if !(length > 0.0) || !(el.e > 0.0 && el.a > 0.0 && el.inertia > 0.0) {
            return Err(AnalysisError::Model(format!("element {index} has zero length or stiffness")));
        }
        let (c, s) = (dx / length, dy / length);
        let rot = [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]];
        let (ni, ti) = self.controller(el.i, el.offset_i);
        let (nj, tj) = self.controller(el.j, el.offset_j);
        let mut b = Matrix6::zeros();
        for (block, t) in [(0usize, ti), (3, tj)] {
            for r in 0..3 {
                for col in 0..3 {
                    b[(block + r, block + col)] = (0..3).map(|k| rot[r][k] * t[k][col]).sum();
                }
            }
        }
        let eq_i = self.equations[ni];
        let eq_j = self.equations[nj];
        Ok(ElementFrame {
            dofs: [eq_i[0], eq_i[1], eq_i[2], eq_j[0], eq_j[1], eq_j[2]],
            b,
            length,
            k: local_stiffness(el.e, el.a, el.inertia, length),
        })
    }

    pub fn element_length(&self, index: usize) -> f64 {
        self.frames[index].length
    }

    /// Adds `Bᵀ·k·B` of every element into a fresh global matrix.
    pub(crate) fn assemble(&self, local: impl Fn(usize) -> Matrix6<f64>) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.n_eq, self.n_eq);
        for (e, fr) in self.frames.iter().enumerate() {
            let kg = fr.b.transpose() * local(e) * fr.b;
            for (r, dr) in fr.dofs.iter().enumerate() {
                let Some(dr) = *dr else { continue };
                for (c, dc) in fr.dofs.iter().enumerate() {
                    if let Some(dc) = *dc {
                        k[(dr, dc)] += kg[(r, c)];
                    }
                }
            }
        }
        k
    }

    /// Scatters local element end forces `f` into global equations as `−Bᵀf`.
    pub(crate) fn scatter_fixed(&self, rhs: &mut DVector<f64>, e: usize, f: &Vector6<f64>) {
        let fr = &self.frames[e];
        let g = fr.b.transpose() * f;
        for (r, dr) in fr.dofs.iter().enumerate() {
            if let Some(dr) = *dr {
                rhs[dr] -= g[r];
            }
        }
    }

    /// Global load vector of the nodal part of a load case.
    pub(crate) fn nodal_vector(&self, loads: &[[f64; 3]]) -> DVector<f64> {
        let mut rhs = DVector::zeros(self.n_eq);
        for (node, f) in loads.iter().enumerate() {
            if f.iter().all(|v| *v == 0.0) {
                continue;
            }
            let (root, t) = self.controller(node, [0.0, 0.0]);
            for col in 0..3 {
                let g: f64 = (0..3).map(|r| t[r][col] * f[r]).sum();
                if let Some(eq) = self.equations[root][col] {
                    rhs[eq] += g;
                }
            }
        }
        rhs
    }

    pub(crate) fn load_vector(&self, loads: &LoadCase) -> DVector<f64> {
        let mut rhs = self.nodal_vector(&loads.nodal);
        for (e, &w) in loads.member_w.iter().enumerate() {
            if w != 0.0 {
                let fef = fixed_end_forces(w, self.frames[e].length);
                self.scatter_fixed(&mut rhs, e, &fef);
            }
        }
        rhs
    }

    /// Local end displacements of element `e`.
    pub(crate) fn local_displacements(&self, e: usize, d: &DVector<f64>) -> Vector6<f64> {
        let fr = &self.frames[e];
        let mut g = Vector6::zeros();
        for (r, dr) in fr.dofs.iter().enumerate() {
            if let Some(dr) = *dr {
                g[r] = d[dr];
            }
        }
        fr.b * g
    }

    /// Displacement `(u, v, θ)` of every node.
    pub fn nodal_displacements(&self, d: &DVector<f64>) -> Vec<[f64; 3]> {
        (0..self.nodes.len())
            .map(|node| {
                let (root, t) = self.controller(node, [0.0, 0.0]);
                let m: Vec<f64> = (0..3).map(|k| self.equations[root][k].map_or(0.0, |eq| d[eq])).collect();
                [0, 1, 2].map(|r| (0..3).map(|k| t[r][k] * m[k]).sum())
            })
            .collect()
    }

    /// Weights `c` such that `c·d` is the mean horizontal displacement of `nodes`.
    pub(crate) fn mean_u_vector(&self, nodes: &[usize]) -> DVector<f64> {
        let mut c = DVector::zeros(self.n_eq);
        let w = 1.0 / nodes.len() as f64;
        for &node in nodes {
            let (root, t) = self.controller(node, [0.0, 0.0]);
            for k in 0..3 {
                if let Some(eq) = self.equations[root][k] {
                    c[eq] += w * t[0][k];
                }
            }
        }
        c
    }
}

/// Factorizes a stiffness matrix, reporting loss of positive definiteness.
pub(crate) fn factorize(k: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, AnalysisError> {
    Cholesky::new(k).ok_or(AnalysisError::Mechanism)
}

/// Displacements and local end forces `[N_i, V_i, M_i, N_j, V_j, M_j]`
/// (kN, kN·m) of a linear solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub displacements: Vec<[f64; 3]>,
    pub end_forces: Vec<[f64; 6]>,
}

impl LinearSolution {
    /// `Σ kᵢ·solutionᵢ`; all parts must come from the same structure.
    pub fn combine(parts: &[(f64, &LinearSolution)]) -> LinearSolution {
        let (_, first) = parts[0];
        let mut out = LinearSolution {
            displacements: vec![[0.0; 3]; first.displacements.len()],
            end_forces: vec![[0.0; 6]; first.end_forces.len()],
        };
        for &(k, s) in parts {
            for (a, b) in out.displacements.iter_mut().zip(&s.displacements) {
                for d in 0..3 {
                    a[d] += k * b[d];
                }
            }
            for (a, b) in out.end_forces.iter_mut().zip(&s.end_forces) {
                for d in 0..6 {
                    a[d] += k * b[d];
                }
            }
        }
        out
    }
}

/// Elastic first-order solution of each load case with one factorization.
pub fn linear_static(structure: &Structure, cases: &[LoadCase]) -> Result<Vec<LinearSolution>, AnalysisError> {
    let chol = factorize(structure.assemble(|e| structure.frames[e].k))?;
    Ok(cases
        .iter()
        .map(|case| {
            let d = chol.solve(&structure.load_vector(case));
            let end_forces = (0..structure.elements.len())
                .map(|e| {
                    let fr = &structure.frames[e];
                    let mut f = fr.k * structure.local_displacements(e, &d);
                    let w = case.member_w.get(e).copied().unwrap_or(0.0);
                    if w != 0.0 {
                        f += fixed_end_forces(w, fr.length);
                    }
                    f.into()
                })
                .collect();
            LinearSolution { displacements: structure.nodal_displacements(&d), end_forces }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const E: f64 = 2.5e7;

    fn cantilever(l: f64, inertia: f64) -> Structure {
        Structure::new(
            vec![[0.0, 0.0], [0.0, l]],
            vec![[true; 3], [false; 3]],
            &[],
            vec![Element::new(0, 1, E, 0.09, inertia)],
        )
        .unwrap()
    }

    #[test]
    fn cantilever_tip_matches_closed_form() {
        let (l, i, f) = (3.0, 6.75e-4 * 0.7, 10.0);
        let s = cantilever(l, i);
        let mut load = LoadCase::zeros(2, 1);
        load.nodal[1] = [f, 0.0, 0.0];
        let sol = &linear_static(&s, &[load]).unwrap()[0];
        let exact = f * l.powi(3) / (3.0 * E * i);
        assert_relative_eq!(sol.displacements[1][0], exact, max_relative = 1e-9);
        let m_base = sol.end_forces[0][2];
        assert_relative_eq!(m_base.abs(), f * l, max_relative = 1e-9);
    }

    #[test]
    fn portal_with_rigid_beam() {
        let (h, b, i) = (3.0, 5.0, 4.725e-4);
        let s = Structure::new(
            vec![[0.0, 0.0], [b, 0.0], [0.0, h], [b, h]],
            vec![[true; 3], [true; 3], [false; 3], [false; 3]],
            &[],
            vec![
                Element::new(0, 2, E, 1e6, i),
                Element::new(1, 3, E, 1e6, i),
                Element::new(2, 3, E, 1e6, 1e6),
            ],
        )
        .unwrap();
        let mut load = LoadCase::zeros(4, 3);
        load.nodal[2] = [1.0, 0.0, 0.0];
        let sol = &linear_static(&s, &[load]).unwrap()[0];
        let k = 1.0 / sol.displacements[2][0];
        assert_relative_eq!(k, 2.0 * 12.0 * E * i / h.powi(3), max_relative = 1e-6);
    }

    #[test]
    fn zero_load_gives_zero_response() {
        let s = cantilever(3.0, 1e-3);
        let sol = &linear_static(&s, &[LoadCase::zeros(2, 1)]).unwrap()[0];
        assert!(sol.displacements.iter().flatten().all(|v| *v == 0.0));
        assert!(sol.end_forces.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn unsupported_structure_is_a_mechanism() {
        let s = Structure::new(
            vec![[0.0, 0.0], [0.0, 3.0]],
            vec![[false; 3], [false; 3]],
            &[],
            vec![Element::new(0, 1, E, 0.09, 1e-3)],
        )
        .unwrap();
        assert!(matches!(linear_static(&s, &[LoadCase::zeros(2, 1)]), Err(AnalysisError::Mechanism)));
    }

    #[test]
    fn fixed_beam_under_uniform_load() {
        let (l, w) = (5.0, -20.0);
        let s = Structure::new(
            vec![[0.0, 0.0], [l, 0.0]],
            vec![[true; 3], [true; 3]],
            &[],
            vec![Element::new(0, 1, E, 0.09, 1e-3)],
        );
        // Every degree of freedom is restrained: no equations at all.
        let s = s.unwrap();
        assert_eq!(s.equation_count(), 0);
        let mut load = LoadCase::zeros(2, 1);
        load.member_w[0] = w;
        let f = linear_static(&s, &[load]).unwrap()[0].end_forces[0];
        assert_relative_eq!(f[2], -w * l * l / 12.0);
        assert_relative_eq!(f[5], w * l * l / 12.0);
        assert_relative_eq!(f[1] + f[4], -w * l);
    }

    #[test]
    fn slaved_node_moves_rigidly() {
        // Two cantilevers whose tips are tied by a rigid link: twice the stiffness.
        let (l, i) = (3.0, 1e-3);
        let s = Structure::new(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, l], [2.0, l]],
            vec![[true; 3], [true; 3], [false; 3], [false; 3]],
            &[(3, 2)],
            vec![Element::new(0, 2, E, 1e3, i), Element::new(1, 3, E, 1e3, i)],
        )
        .unwrap();
        assert_eq!(s.equation_count(), 3);
        let mut load = LoadCase::zeros(4, 2);
        load.nodal[3] = [1.0, 0.0, 0.0];
        let sol = &linear_static(&s, &[load]).unwrap()[0];
        let d = &sol.displacements;
        assert_relative_eq!(d[2][0], d[3][0], max_relative = 1e-12);
        assert_relative_eq!(d[3][1] - d[2][1], 2.0 * d[2][2], max_relative = 1e-9);
    }

    #[test]
    fn stiffness_is_symmetric() {
        let s = Structure::new(
            vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0], [4.0, 3.0]],
            vec![[true; 3], [true, true, false], [false; 3], [false; 3]],
            &[],
            vec![
                Element::new(0, 2, E, 0.1, 1e-3),
                Element::new(1, 3, E, 0.1, 1e-3),
                Element { offset_i: [0.2, 0.0], ..Element::new(2, 3, E, 0.1, 2e-3) },
            ],
        )
        .unwrap();
        let k = s.assemble(|e| s.frames[e].k + geometric_stiffness(-50.0, s.frames[e].length));
        assert_relative_eq!(k.clone(), k.transpose(), epsilon = 1e-9);
    }
}
