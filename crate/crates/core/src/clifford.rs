//! Clifford groups on one and two qubits, enumerated with pulse decompositions.
//!
//! The single-qubit group (24 elements) is generated by {X/2, Y/2}; each
//! element carries a fixed decomposition into physical microwave gates.  The
//! two-qubit group (11520 elements) is built in four classes by CZ count
//! (0, 1, 2, 3), giving a mean of exactly 1.5 CZs per element.  Elements are
//! keyed by a phase-normalized canonical form of their unitary, which also
//! serves recovery-gate lookup: the recovery for a sequence is the group
//! element whose unitary is the inverse of the accumulated ideal product.

use crate::linalg::{eye, kron};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

/// Physical single-qubit gate labels (rotation axis and angle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SqGate {
    I,
    XHalf,
    XNegHalf,
    YHalf,
    YNegHalf,
    X,
    Y,
}

impl SqGate {
    pub const ALL: [SqGate; 7] = [
        SqGate::I,
        SqGate::XHalf,
        SqGate::XNegHalf,
        SqGate::YHalf,
        SqGate::YNegHalf,
        SqGate::X,
        SqGate::Y,
    ];

    /// Rotation angle in radians, sign included; zero for the idle.
    pub fn angle(&self) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            SqGate::I => 0.0,
            SqGate::XHalf | SqGate::YHalf => FRAC_PI_2,
            SqGate::XNegHalf | SqGate::YNegHalf => -FRAC_PI_2,
            SqGate::X | SqGate::Y => PI,
        }
    }

    /// True for rotations about y, false for x (idle counts as x).
    pub fn is_y_axis(&self) -> bool {
        matches!(self, SqGate::YHalf | SqGate::YNegHalf | SqGate::Y)
    }

    /// Qubit-subspace unitary (2x2).
    pub fn unitary(&self) -> Array2<C64> {
        let half = self.angle() / 2.0;
        let (c, s) = (half.cos(), half.sin());
        if self.is_y_axis() {
            ndarray::array![
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)]
            ]
        } else {
            ndarray::array![
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)]
            ]
        }
    }
}

impl fmt::Display for SqGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SqGate::I => "I",
            SqGate::XHalf => "X/2",
            SqGate::XNegHalf => "-X/2",
            SqGate::YHalf => "Y/2",
            SqGate::YNegHalf => "-Y/2",
            SqGate::X => "X",
            SqGate::Y => "Y",
        };
        f.write_str(s)
    }
}

/// One physical gate in a decomposition, time-ordered within its element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Sq { qubit: u8, gate: SqGate },
    Cz,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Sq { qubit, gate } => write!(f, "{gate}@{qubit}"),
            Gate::Cz => f.write_str("CZ"),
        }
    }
}

/// One Clifford element: canonical unitary, pulse decomposition, group index.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub index: usize,
    pub unitary: Array2<C64>,
    pub decomposition: Vec<Gate>,
    pub cz_count: u8,
}

/// RB sequence: `m` random elements, an optional interleaved element after
/// each, and the recovery element that closes the ideal product to identity.
#[derive(Clone, Debug)]
pub struct RbSequence {
    pub m: usize,
    pub cliffords: Vec<usize>,
    pub interleaved: Option<usize>,
    pub recovery: usize,
}

impl RbSequence {
    /// Element indices in played order, interleaving and recovery included.
    pub fn played_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.m + 1);
        for &c in &self.cliffords {
            out.push(c);
            if let Some(g) = self.interleaved {
                out.push(g);
            }
        }
        out.push(self.recovery);
        out
    }
}

type CanonKey = Vec<i32>;

/// Phase-normalize in place: scale so the first entry of magnitude above 0.1
/// (row-major scan) is real positive.  Clifford unitaries have entries that
/// are exactly zero or of magnitude >= 1/(2*sqrt(2)), so the threshold is
/// unambiguous.
fn canonicalize(u: &mut Array2<C64>) {
    let z = *u
        .iter()
        .find(|z| z.norm() > 0.1)
        .expect("unitary has no entry above threshold");
    let phase = z.conj() / z.norm();
    u.mapv_inplace(|w| w * phase);
}

fn canon_key(u: &Array2<C64>) -> CanonKey {
    let mut v = u.clone();
    canonicalize(&mut v);
    let mut key = Vec::with_capacity(2 * v.len());
    for z in v.iter() {
        key.push((z.re * 1e5).round() as i32);
        key.push((z.im * 1e5).round() as i32);
    }
    key
}

/// Single-qubit decomposition table: 24 elements covering the closure of
/// {X/2, Y/2}, grouped as Paulis, 2pi/3 axis permutations, pi/2 rotations,
/// and Hadamard-like elements.  Mean length 1.875 gates.
const SQ_TABLE: [&[SqGate]; 24] = {
    use SqGate::*;
    [
        &[I],
        &[X],
        &[Y],
        &[Y, X],
        &[XHalf, YHalf],
        &[XHalf, YNegHalf],
        &[XNegHalf, YHalf],
        &[XNegHalf, YNegHalf],
        &[YHalf, XHalf],
        &[YHalf, XNegHalf],
        &[YNegHalf, XHalf],
        &[YNegHalf, XNegHalf],
        &[XHalf],
        &[XNegHalf],
        &[YHalf],
        &[YNegHalf],
        &[XNegHalf, YHalf, XHalf],
        &[XNegHalf, YNegHalf, XHalf],
        &[X, YHalf],
        &[X, YNegHalf],
        &[Y, XHalf],
        &[Y, XNegHalf],
        &[XHalf, YHalf, XHalf],
        &[XNegHalf, YHalf, XNegHalf],
    ]
};

// Transversal sets for the one-CZ and two-CZ classes, as SQ_TABLE indices.
// The two-CZ (iSWAP-like) class needs different per-qubit sets because its
// local stabilizer is not a product subgroup.
const T_CZ: [usize; 3] = [0, 14, 12]; // I, Y/2, X/2
const T_ISWAP_A: [usize; 3] = [0, 4, 14]; // I, X/2.Y/2, Y/2
const T_ISWAP_B: [usize; 3] = [0, 12, 8]; // I, X/2, Y/2.X/2

fn sq_unitary(gates: &[SqGate]) -> Array2<C64> {
    let mut u = eye(2);
    for g in gates {
        u = g.unitary().dot(&u);
    }
    u
}

fn cz_unitary() -> Array2<C64> {
    let mut u = eye(4);
    u[[3, 3]] = C64::new(-1.0, 0.0);
    u
}

/// An enumerated Clifford group with canonical-form lookup.
pub struct CliffordGroup {
    n_qubits: u8,
    elements: Vec<CliffordElement>,
    index_by_key: HashMap<CanonKey, usize>,
    identity: usize,
}

impl CliffordGroup {
    pub fn n_qubits(&self) -> u8 {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn element(&self, index: usize) -> &CliffordElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    /// Group index of a unitary (up to global phase), if it is an element.
    pub fn lookup(&self, u: &Array2<C64>) -> Option<usize> {
        self.index_by_key.get(&canon_key(u)).copied()
    }

    /// Index of `a` followed by `b` (matrix product `U_b U_a`).
    pub fn compose(&self, a: usize, b: usize) -> usize {
        let u = self.elements[b].unitary.dot(&self.elements[a].unitary);
        *self
            .index_by_key
            .get(&canon_key(&u))
            .expect("group is closed under composition")
    }

    /// Index of the inverse element.
    pub fn invert(&self, a: usize) -> usize {
        let u = self.elements[a].unitary.t().mapv(|z| z.conj());
        *self
            .index_by_key
            .get(&canon_key(&u))
            .expect("group contains inverses")
    }

    /// Ideal unitary product of a sequence with an optional element
    /// interleaved after each listed element.
    pub fn sequence_product(&self, cliffords: &[usize], interleaved: Option<usize>) -> Array2<C64> {
        let mut u = eye(self.dim());
        for &c in cliffords {
            u = self.elements[c].unitary.dot(&u);
            if let Some(g) = interleaved {
                u = self.elements[g].unitary.dot(&u);
            }
        }
        u
    }

    /// Recovery element: the group element inverting the accumulated ideal
    /// product, so the full sequence composes to identity up to phase.
    pub fn recovery_for(&self, cliffords: &[usize], interleaved: Option<usize>) -> usize {
        let u = self.sequence_product(cliffords, interleaved);
        let inv = u.t().mapv(|z| z.conj());
        *self
            .index_by_key
            .get(&canon_key(&inv))
            .expect("inverse of a product of elements is an element")
    }

    /// Draw `m` elements uniformly and close with the recovery element.
    pub fn sample_sequence<R: Rng>(
        &self,
        m: usize,
        interleaved: Option<usize>,
        rng: &mut R,
    ) -> RbSequence {
        let cliffords: Vec<usize> = (0..m).map(|_| rng.random_range(0..self.len())).collect();
        let recovery = self.recovery_for(&cliffords, interleaved);
        RbSequence {
            m,
            cliffords,
            interleaved,
            recovery,
        }
    }

    /// Mean CZ count over the full enumeration (exactly 1.5 for two qubits).
    pub fn mean_cz_count(&self) -> f64 {
        let total: u64 = self.elements.iter().map(|e| e.cz_count as u64).sum();
        total as f64 / self.len() as f64
    }

    /// Mean single-qubit gate count per element, idles included.
    pub fn mean_sq_gate_count(&self) -> f64 {
        let total: u64 = self
            .elements
            .iter()
            .map(|e| {
                e.decomposition
                    .iter()
                    .filter(|g| matches!(g, Gate::Sq { .. }))
                    .count() as u64
            })
            .sum();
        total as f64 / self.len() as f64
    }

    /// Text table of the enumeration: index, CZ count, decomposition.
    pub fn table_dump(&self) -> String {
        let mut out = String::new();
        out.push_str("index\tcz\tdecomposition\n");
        for e in &self.elements {
            let gates: Vec<String> = e.decomposition.iter().map(|g| g.to_string()).collect();
            out.push_str(&format!("{}\t{}\t{}\n", e.index, e.cz_count, gates.join(" ")));
        }
        out
    }

    fn push(&mut self, unitary: Array2<C64>, decomposition: Vec<Gate>, cz_count: u8) {
        let mut u = unitary;
        canonicalize(&mut u);
        let key = canon_key(&u);
        let index = self.elements.len();
        let prev = self.index_by_key.insert(key, index);
        assert!(prev.is_none(), "duplicate element in group construction");
        self.elements.push(CliffordElement {
            index,
            unitary: u,
            decomposition,
            cz_count,
        });
    }

    fn build_single_qubit() -> CliffordGroup {
        let mut g = CliffordGroup {
            n_qubits: 1,
            elements: Vec::with_capacity(24),
            index_by_key: HashMap::with_capacity(24),
            identity: 0,
        };
        for gates in SQ_TABLE {
            let decomposition = gates
                .iter()
                .map(|&gate| Gate::Sq { qubit: 0, gate })
                .collect();
            g.push(sq_unitary(gates), decomposition, 0);
        }
        assert_eq!(g.len(), 24);
        g
    }

    fn build_two_qubit() -> CliffordGroup {
        let sq: Vec<Array2<C64>> = SQ_TABLE.iter().map(|t| sq_unitary(t)).collect();
        let cz = cz_unitary();
        let m3 = kron(&sq_unitary(&[SqGate::YHalf]), &sq_unitary(&[SqGate::XNegHalf]));
        let m4a = kron(&sq_unitary(&[SqGate::YNegHalf]), &sq_unitary(&[SqGate::YHalf]));
        let m4b = kron(&sq_unitary(&[SqGate::YHalf]), &sq_unitary(&[SqGate::YNegHalf]));
        // fixed cores, applied before the free single-qubit layer
        let w3 = cz.dot(&m3).dot(&cz);
        let w4 = cz.dot(&m4b).dot(&cz).dot(&m4a).dot(&cz);

        let layer = |a: usize, b: usize| -> Vec<Gate> {
            let mut v: Vec<Gate> = SQ_TABLE[a]
                .iter()
                .map(|&gate| Gate::Sq { qubit: 0, gate })
                .collect();
            v.extend(SQ_TABLE[b].iter().map(|&gate| Gate::Sq { qubit: 1, gate }));
            v
        };

        let mut g = CliffordGroup {
            n_qubits: 2,
            elements: Vec::with_capacity(11520),
            index_by_key: HashMap::with_capacity(11520),
            identity: 0,
        };
        for a in 0..24 {
            for b in 0..24 {
                let free = kron(&sq[a], &sq[b]);
                let free_layer = layer(a, b);

                g.push(free.clone(), free_layer.clone(), 0);

                for &sa in &T_CZ {
                    for &sb in &T_CZ {
                        let u = free.dot(&cz).dot(&kron(&sq[sa], &sq[sb]));
                        let mut d = layer(sa, sb);
                        d.push(Gate::Cz);
                        d.extend(free_layer.iter().copied());
                        g.push(u, d, 1);
                    }
                }

                for &sa in &T_ISWAP_A {
                    for &sb in &T_ISWAP_B {
                        let u = free.dot(&w3).dot(&kron(&sq[sa], &sq[sb]));
                        let mut d = layer(sa, sb);
                        d.push(Gate::Cz);
                        d.push(Gate::Sq { qubit: 0, gate: SqGate::YHalf });
                        d.push(Gate::Sq { qubit: 1, gate: SqGate::XNegHalf });
                        d.push(Gate::Cz);
                        d.extend(free_layer.iter().copied());
                        g.push(u, d, 2);
                    }
                }

                let u = free.dot(&w4);
                let mut d = vec![
                    Gate::Cz,
                    Gate::Sq { qubit: 0, gate: SqGate::YNegHalf },
                    Gate::Sq { qubit: 1, gate: SqGate::YHalf },
                    Gate::Cz,
                    Gate::Sq { qubit: 0, gate: SqGate::YHalf },
                    Gate::Sq { qubit: 1, gate: SqGate::YNegHalf },
                    Gate::Cz,
                ];
                d.extend(free_layer.iter().copied());
                g.push(u, d, 3);
            }
        }
        assert_eq!(g.len(), 11520);
        let id = g.lookup(&eye(4)).expect("identity is an element");
        g.identity = id;
        g
    }
}

/// The enumerated group on `n_qubits` (1 or 2), built once and cached.
pub fn enumerate_group(n_qubits: u8) -> &'static CliffordGroup {
    static SQ: OnceLock<CliffordGroup> = OnceLock::new();
    static TQ: OnceLock<CliffordGroup> = OnceLock::new();
    match n_qubits {
        1 => SQ.get_or_init(CliffordGroup::build_single_qubit),
        2 => TQ.get_or_init(CliffordGroup::build_two_qubit),
        n => panic!("no Clifford enumeration for {n} qubits"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist_up_to_phase, unitarity_defect};

    #[test]
    fn single_qubit_group_has_24_distinct_elements() {
        let g = enumerate_group(1);
        assert_eq!(g.len(), 24);
        for e in g.elements() {
            assert!(unitarity_defect(&e.unitary) < 1e-12);
        }
    }

    #[test]
    fn single_qubit_table_matches_generator_closure() {
        let g = enumerate_group(1);
        // breadth-first closure of {X/2, Y/2}
        let mut seen = std::collections::HashSet::new();
        let mut frontier = vec![eye(2)];
        seen.insert(canon_key(&frontier[0]));
        while let Some(u) = frontier.pop() {
            for gate in [SqGate::XHalf, SqGate::YHalf] {
                let v = gate.unitary().dot(&u);
                if seen.insert(canon_key(&v)) {
                    frontier.push(v);
                }
            }
        }
        assert_eq!(seen.len(), 24);
        for e in g.elements() {
            assert!(seen.contains(&canon_key(&e.unitary)));
        }
    }

    #[test]
    fn two_qubit_group_has_11520_elements_with_mean_cz_exactly_1_5() {
        let g = enumerate_group(2);
        assert_eq!(g.len(), 11520);
        let total: u64 = g.elements().iter().map(|e| e.cz_count as u64).sum();
        assert_eq!(total, 17280); // 11520 * 3 / 2
        let sizes: Vec<usize> = (0..4u8)
            .map(|c| g.elements().iter().filter(|e| e.cz_count == c).count())
            .collect();
        assert_eq!(sizes, vec![576, 5184, 5184, 576]);
    }

    #[test]
    fn decompositions_reproduce_unitaries_up_to_phase() {
        let g = enumerate_group(1);
        for e in g.elements() {
            let mut u = eye(2);
            for gate in &e.decomposition {
                let Gate::Sq { gate, .. } = gate else { unreachable!() };
                u = gate.unitary().dot(&u);
            }
            assert!(dist_up_to_phase(&u, &e.unitary) < 1e-12);
        }
        let g2 = enumerate_group(2);
        for e in g2.elements().iter().step_by(173) {
            let mut u = eye(4);
            for gate in &e.decomposition {
                let step = match gate {
                    Gate::Sq { qubit: 0, gate } => kron(&gate.unitary(), &eye(2)),
                    Gate::Sq { qubit: 1, gate } => kron(&eye(2), &gate.unitary()),
                    Gate::Sq { .. } => unreachable!(),
                    Gate::Cz => cz_unitary(),
                };
                u = step.dot(&u);
            }
            assert!(dist_up_to_phase(&u, &e.unitary) < 1e-11);
        }
    }

    #[test]
    fn compose_and_invert_are_consistent() {
        let g = enumerate_group(1);
        for a in 0..g.len() {
            let inv = g.invert(a);
            assert_eq!(g.compose(a, inv), g.identity_index());
            assert_eq!(g.compose(inv, a), g.identity_index());
        }
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let g = enumerate_group(2);
        for e in g.elements().iter().step_by(911) {
            let mut u = e.unitary.clone();
            canonicalize(&mut u);
            assert!(dist_up_to_phase(&u, &e.unitary) < 1e-14);
            assert_eq!(canon_key(&u), canon_key(&e.unitary));
        }
    }

    #[test]
    fn identity_indices() {
        assert_eq!(enumerate_group(1).identity_index(), 0);
        let g = enumerate_group(2);
        let id = g.identity_index();
        assert!(dist_up_to_phase(&g.element(id).unitary, &eye(4)) < 1e-14);
    }
}
