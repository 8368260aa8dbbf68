//! Plumbing trees of disk bundles over spheres and their exact invariants:
//! intersection forms, Arf invariants, clutching words, Milnor pairing
//! differences and eta ledgers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlumbingError {
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("edge {0}-{1} joins incompatible bundles")]
    InconsistentDimensions(usize, usize),
    #[error("total dimension p+q must be even, got {0}")]
    OddTotalDimension(usize),
    #[error("edge sign must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("equivariant plumbing must be a path")]
    EquivariantNotPath,
    #[error("operation needs a path graph")]
    NotAPath,
    #[error("mod 2 form is not unimodular")]
    NotUnimodular,
    #[error("Arf invariant needs the odd (skew) case")]
    NotSkew,
    #[error("Pontryagin range needs 1 <= s <= t < 2s, got s = {s}, t = {t}")]
    Range { s: i64, t: i64 },
    #[error("paper convention needs a multiple of 8 bundles, got {0}")]
    NotMultipleOfEight(u64),
    #[error("fixed point counts must be strictly increasing in l")]
    CountsNotIncreasing,
    #[error("n must be at least 1")]
    BadEtaDegree,
    #[error("empty tree")]
    Empty,
}

/// A disk bundle `E_v -> S^{base_dim}` with fiber `D^{rank}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub base_dim: usize,
    pub rank: usize,
    pub euler: i64,
    /// Mod 2 quadratic refinement on the core sphere.
    #[serde(default)]
    pub framing_q: u8,
    #[serde(default)]
    pub char_label: String,
    /// Whether the clutching map is the identity (trivial bundle).
    #[serde(default)]
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub v: usize,
    pub w: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlumbingTree {
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub equivariant: bool,
}

impl PlumbingTree {
    /// Chain of `len` copies of the unit disk tangent bundle of `S^{2k+1}`.
    pub fn tangent_chain(len: usize, k: usize) -> Self {
        let d = 2 * k + 1;
        let vertices = (0..len)
            .map(|i| Vertex {
                base_dim: d,
                rank: d,
                euler: 0,
                framing_q: 1,
                char_label: format!("TS{d}#{}", i + 1),
                trivial: false,
            })
            .collect();
        let edges = (1..len).map(|i| Edge { v: i - 1, w: i, sign: 1 }).collect();
        Self { vertices, edges, equivariant: false }
    }

    pub fn trivial_vertex(base_dim: usize, rank: usize) -> Self {
        Self {
            vertices: vec![Vertex {
                base_dim,
                rank,
                euler: 0,
                framing_q: 0,
                char_label: "trivial".into(),
                trivial: true,
            }],
            edges: vec![],
            equivariant: false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![vec![]; self.vertices.len()];
        for e in &self.edges {
            adj[e.v].push(e.w);
            adj[e.w].push(e.v);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn validate(&self) -> Result<(), PlumbingError> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(PlumbingError::Empty);
        }
        if self.edges.len() != n - 1 {
            return Err(PlumbingError::NotATree(format!("{} vertices but {} edges", n, self.edges.len())));
        }
        for e in &self.edges {
            if e.v >= n || e.w >= n || e.v == e.w {
                return Err(PlumbingError::NotATree(format!("bad edge {}-{}", e.v, e.w)));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(PlumbingError::BadSign(e.sign));
            }
            let (a, b) = (&self.vertices[e.v], &self.vertices[e.w]);
            if a.base_dim != b.rank || a.rank != b.base_dim {
                return Err(PlumbingError::InconsistentDimensions(e.v, e.w));
            }
        }
        if self.dfs_order(0).len() != n {
            return Err(PlumbingError::NotATree("disconnected".into()));
        }
        let total = self.vertices[0].base_dim + self.vertices[0].rank;
        if !total.is_multiple_of(2) {
            return Err(PlumbingError::OddTotalDimension(total));
        }
        if self.equivariant && !self.is_path() {
            return Err(PlumbingError::EquivariantNotPath);
        }
        Ok(())
    }

    /// Depth-first order from `root`, children visited by increasing index.
    pub fn dfs_order(&self, root: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut order = vec![];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            order.push(v);
            for &w in adj[v].iter().rev() {
                if !seen[w] {
                    stack.push(w);
                }
            }
        }
        order
    }

    /// Parent of each vertex in the DFS tree rooted at `root`.
    pub fn parents(&self, root: usize) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut parent = vec![None; self.vertices.len()];
        for v in self.dfs_order(root) {
            for &w in &adj[v] {
                if w != root && parent[w].is_none() && parent[v] != Some(w) {
                    parent[w] = Some(v);
                }
            }
        }
        parent
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.v == v || e.w == v).count()
    }

    pub fn is_path(&self) -> bool {
        (0..self.vertices.len()).all(|v| self.degree(v) <= 2)
    }

    /// Vertices of a path graph from its lowest-index endpoint.
    pub fn path_order(&self) -> Result<Vec<usize>, PlumbingError> {
        self.validate()?;
        if !self.is_path() {
            return Err(PlumbingError::NotAPath);
        }
        let start = (0..self.vertices.len()).find(|&v| self.degree(v) <= 1).ok_or(PlumbingError::NotAPath)?;
        Ok(self.dfs_order(start))
    }

    fn middle_is_odd(&self) -> bool {
        ((self.vertices[0].base_dim + self.vertices[0].rank) / 2) % 2 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Skew,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionForm {
    pub matrix: Vec<Vec<i64>>,
    pub symmetry: Symmetry,
}

pub fn intersection_matrix(tree: &PlumbingTree) -> Result<IntersectionForm, PlumbingError> {
    tree.validate()?;
    let n = tree.vertices.len();
    let skew = tree.middle_is_odd();
    let mut m = vec![vec![0i64; n]; n];
    for (i, v) in tree.vertices.iter().enumerate() {
        m[i][i] = if skew { 0 } else { v.euler };
    }
    for e in &tree.edges {
        let s = e.sign as i64;
        m[e.v][e.w] = s;
        m[e.w][e.v] = if skew { -s } else { s };
    }
    Ok(IntersectionForm { matrix: m, symmetry: if skew { Symmetry::Skew } else { Symmetry::Symmetric } })
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereTest {
    pub is_homotopy_sphere: bool,
    pub det: i64,
}

pub fn boundary_sphere_test(tree: &PlumbingTree) -> Result<SphereTest, PlumbingError> {
    let det = determinant(&intersection_matrix(tree)?.matrix);
    Ok(SphereTest { is_homotopy_sphere: det.abs().is_one(), det: det.to_i64().unwrap_or(i64::MAX) })
}

/// Arf invariant of the quadratic refinement `q` of the mod 2 form `b`
/// (symmetric with zero diagonal), by symplectic reduction.
pub fn arf_of_form(b: &[Vec<u8>], q: &[u8]) -> Result<u8, PlumbingError> {
    let n = b.len();
    let bil = |x: &[u8], y: &[u8]| -> u8 {
        let mut s = 0u8;
        for i in 0..n {
            if x[i] & 1 == 1 {
                for j in 0..n {
                    s ^= b[i][j] & y[j] & 1;
                }
            }
        }
        s
    };
    let mut pool: Vec<(Vec<u8>, u8)> = (0..n)
        .map(|i| {
            let mut v = vec![0u8; n];
            v[i] = 1;
            (v, q[i] & 1)
        })
        .collect();
    let mut arf = 0u8;
    while let Some((e, qe)) = pool.pop() {
        let Some(j) = pool.iter().position(|(v, _)| bil(&e, v) == 1) else {
            return Err(PlumbingError::NotUnimodular);
        };
        let (f, qf) = pool.swap_remove(j);
        arf ^= qe & qf;
        for (v, qv) in pool.iter_mut() {
            let alpha = bil(v, &f);
            let beta = bil(v, &e);
            for i in 0..n {
                v[i] ^= (alpha & e[i]) ^ (beta & f[i]);
            }
            *qv ^= (alpha & qe) ^ (beta & qf) ^ (alpha & beta);
        }
    }
    Ok(arf)
}

pub fn arf_invariant(tree: &PlumbingTree) -> Result<u8, PlumbingError> {
    let form = intersection_matrix(tree)?;
    if form.symmetry != Symmetry::Skew {
        return Err(PlumbingError::NotSkew);
    }
    let b: Vec<Vec<u8>> = form.matrix.iter().map(|r| r.iter().map(|x| (x.rem_euclid(2)) as u8).collect()).collect();
    let q: Vec<u8> = tree.vertices.iter().map(|v| v.framing_q & 1).collect();
    arf_of_form(&b, &q)
}

fn subscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

/// Formal clutching word `Φ_m ∘ I ∘ Φ_{m-1} ∘ ... ∘ I ∘ Φ_1` along a path,
/// with identity clutching maps dropped.
pub fn clutching_word(tree: &PlumbingTree) -> Result<String, PlumbingError> {
    let order = tree.path_order()?;
    let mut parts: Vec<String> = vec![];
    for (pos, &v) in order.iter().enumerate().rev() {
        if !tree.vertices[v].trivial {
            parts.push(format!("Φ{}", subscript(pos + 1)));
        }
        if pos > 0 {
            parts.push("I".into());
        }
    }
    if parts.is_empty() {
        parts.push("I".into());
    }
    Ok(parts.join(" ∘ "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilnorPairInput {
    pub s: i64,
    pub t: i64,
    pub ps1: i64,
    pub pt1: i64,
    pub ps2: i64,
    pub pt2: i64,
}

pub fn pontryagin_range_ok(s: i64, t: i64) -> bool {
    1 <= s && s <= t && t < 2 * s
}

/// `p_s(θ1) p_t(θ2) - p_s(θ1') p_t(θ2')`, in units of the nonzero constant `c(s,t)`.
pub fn milnor_ahat_difference(input: &MilnorPairInput) -> Result<i128, PlumbingError> {
    if !pontryagin_range_ok(input.s, input.t) {
        return Err(PlumbingError::Range { s: input.s, t: input.t });
    }
    Ok(input.ps1 as i128 * input.pt1 as i128 - input.ps2 as i128 * input.pt2 as i128)
}

fn pow2_inv(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

/// Local fixed point contribution `2^{-n}`.
pub fn eta_local_contribution(n: u32) -> Result<BigRational, PlumbingError> {
    if n == 0 {
        return Err(PlumbingError::BadEtaDegree);
    }
    Ok(pow2_inv(n))
}

/// Eta invariant of real projective space with its round metric, `-2^{1-n}`.
pub fn eta_rp(n: u32) -> Result<BigRational, PlumbingError> {
    Ok(-eta_local_contribution(n)? * BigInt::from(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountConvention {
    Paper,
    Chain,
}

pub fn fixed_point_count(m_bundles: u64, convention: CountConvention) -> Result<u64, PlumbingError> {
    match convention {
        CountConvention::Paper => {
            if m_bundles == 0 || !m_bundles.is_multiple_of(8) {
                return Err(PlumbingError::NotMultipleOfEight(m_bundles));
            }
            Ok(2 * (m_bundles / 8) + 1)
        }
        CountConvention::Chain => Ok(m_bundles + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaLedger {
    /// Boundary dimension is `4k+1`.
    pub k: u32,
    pub fixed_point_counts: BTreeMap<u64, u64>,
}

impl EtaLedger {
    pub fn n(&self) -> u32 {
        2 * self.k + 1
    }

    pub fn for_lengths(k: u32, lengths: impl IntoIterator<Item = u64>, convention: CountConvention) -> Result<Self, PlumbingError> {
        let mut counts = BTreeMap::new();
        for l in lengths {
            counts.insert(l, fixed_point_count(8 * l, convention)?);
        }
        Ok(Self { k, fixed_point_counts: counts })
    }
}

/// `η = rational + cv_coeff · C_V` with `C_V` a symbolic manifold constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicEta {
    pub rational: BigRational,
    pub cv_coeff: BigRational,
}

impl std::ops::Sub for &SymbolicEta {
    type Output = SymbolicEta;
    fn sub(self, o: &SymbolicEta) -> SymbolicEta {
        SymbolicEta { rational: &self.rational - &o.rational, cv_coeff: &self.cv_coeff - &o.cv_coeff }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaReport {
    pub values: BTreeMap<u64, SymbolicEta>,
    /// Pairs `(l, l')` whose difference vanishes.
    pub collisions: Vec<(u64, u64)>,
    pub distinct: bool,
}

pub fn eta_ledger(ledger: &EtaLedger) -> Result<EtaReport, PlumbingError> {
    let local = eta_local_contribution(ledger.n())?;
    let minus_two = BigRational::from_integer(BigInt::from(-2));
    let values: BTreeMap<u64, SymbolicEta> = ledger
        .fixed_point_counts
        .iter()
        .map(|(&l, &c)| {
            let rational = &minus_two * &local * BigRational::from_integer(BigInt::from(c));
            (l, SymbolicEta { rational, cv_coeff: minus_two.clone() })
        })
        .collect();
    let entries: Vec<(&u64, &SymbolicEta)> = values.iter().collect();
    let mut collisions = vec![];
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let d = entries[i].1 - entries[j].1;
            // the C_V parts cancel identically
            debug_assert!(d.cv_coeff.is_zero());
            if d.rational.is_zero() {
                collisions.push((*entries[i].0, *entries[j].0));
            }
        }
    }
    Ok(EtaReport { distinct: collisions.is_empty(), values, collisions })
}

/// Exact rational as a JSON `{"num": .., "den": ..}` pair.
pub fn rational_json(r: &BigRational) -> serde_json::Value {
    let enc = |b: &BigInt| match b.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(b.to_string()),
    };
    serde_json::json!({ "num": enc(r.numer()), "den": enc(r.denom()) })
}

pub fn eta_report_json(ledger: &EtaLedger, report: &EtaReport) -> serde_json::Value {
    let values: serde_json::Map<String, serde_json::Value> = report
        .values
        .iter()
        .map(|(l, v)| {
            (
                l.to_string(),
                serde_json::json!({
                    "fixed_points": ledger.fixed_point_counts[l],
                    "rational": rational_json(&v.rational),
                    "c_v_coefficient": rational_json(&v.cv_coeff),
                }),
            )
        })
        .collect();
    serde_json::json!({
        "k": ledger.k,
        "n": ledger.n(),
        "local_contribution": rational_json(&pow2_inv(ledger.n())),
        "eta": values,
        "distinct": report.distinct,
        "collisions": report.collisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_tangent_vertex() {
        let t = PlumbingTree::tangent_chain(1, 1);
        assert_eq!(intersection_matrix(&t).unwrap().matrix, vec![vec![0]]);
        let s = boundary_sphere_test(&t).unwrap();
        assert!(!s.is_homotopy_sphere);
        assert_eq!(s.det, 0);
    }

    #[test]
    fn two_chain() {
        let t = PlumbingTree::tangent_chain(2, 1);
        let f = intersection_matrix(&t).unwrap();
        assert_eq!(f.matrix, vec![vec![0, 1], vec![-1, 0]]);
        assert_eq!(f.symmetry, Symmetry::Skew);
        assert_eq!(boundary_sphere_test(&t).unwrap(), SphereTest { is_homotopy_sphere: true, det: 1 });
        assert_eq!(arf_invariant(&t).unwrap(), 1);
        assert_eq!(clutching_word(&t).unwrap(), "Φ₂ ∘ I ∘ Φ₁");
    }

    #[test]
    fn three_and_eight_chains() {
        assert_eq!(boundary_sphere_test(&PlumbingTree::tangent_chain(3, 1)).unwrap().det, 0);
        let s8 = boundary_sphere_test(&PlumbingTree::tangent_chain(8, 1)).unwrap();
        assert!(s8.is_homotopy_sphere);
        assert_eq!(arf_invariant(&PlumbingTree::tangent_chain(8, 1)).unwrap(), 0);
    }

    #[test]
    fn zero_refinement() {
        let mut t = PlumbingTree::tangent_chain(6, 2);
        for v in &mut t.vertices {
            v.framing_q = 0;
        }
        assert_eq!(arf_invariant(&t).unwrap(), 0);
        assert_eq!(arf_invariant(&PlumbingTree::tangent_chain(3, 1)), Err(PlumbingError::NotUnimodular));
    }

    #[test]
    fn words() {
        assert_eq!(clutching_word(&PlumbingTree::trivial_vertex(3, 3)).unwrap(), "I");
        let mut t = PlumbingTree::tangent_chain(4, 1);
        t.vertices[1].trivial = true;
        t.vertices[2].trivial = true;
        assert_eq!(clutching_word(&t).unwrap(), "Φ₄ ∘ I ∘ I ∘ I ∘ Φ₁");
        let star = PlumbingTree {
            vertices: PlumbingTree::tangent_chain(4, 1).vertices,
            edges: vec![Edge { v: 0, w: 1, sign: 1 }, Edge { v: 0, w: 2, sign: 1 }, Edge { v: 0, w: 3, sign: 1 }],
            equivariant: false,
        };
        assert_eq!(clutching_word(&star), Err(PlumbingError::NotAPath));
    }

    #[test]
    fn validation() {
        let mut t = PlumbingTree::tangent_chain(3, 1);
        t.edges.push(Edge { v: 0, w: 2, sign: 1 });
        assert!(matches!(t.validate(), Err(PlumbingError::NotATree(_))));
        let mut u = PlumbingTree::tangent_chain(2, 1);
        u.vertices[1].base_dim = 5;
        assert_eq!(u.validate(), Err(PlumbingError::InconsistentDimensions(0, 1)));
        let mut w = PlumbingTree::tangent_chain(2, 1);
        w.edges[0].sign = 2;
        assert_eq!(w.validate(), Err(PlumbingError::BadSign(2)));
    }

    #[test]
    fn symmetric_case_keeps_euler() {
        let t = PlumbingTree {
            vertices: vec![
                Vertex { base_dim: 4, rank: 4, euler: 2, framing_q: 0, char_label: "a".into(), trivial: false },
                Vertex { base_dim: 4, rank: 4, euler: 2, framing_q: 0, char_label: "b".into(), trivial: false },
            ],
            edges: vec![Edge { v: 0, w: 1, sign: 1 }],
            equivariant: false,
        };
        let f = intersection_matrix(&t).unwrap();
        assert_eq!(f.symmetry, Symmetry::Symmetric);
        assert_eq!(f.matrix, vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(boundary_sphere_test(&t).unwrap().det, 3);
    }

    #[test]
    fn bareiss() {
        assert_eq!(determinant(&[vec![2, 1], vec![1, 2]]), BigInt::from(3));
        assert_eq!(determinant(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]), BigInt::from(-5));
    }

    #[test]
    fn milnor_examples() {
        let m = |ps1, pt1, ps2, pt2| MilnorPairInput { s: 2, t: 3, ps1, pt1, ps2, pt2 };
        assert_eq!(milnor_ahat_difference(&m(3, 4, 3, 4)).unwrap(), 0);
        assert_eq!(milnor_ahat_difference(&m(1, 2, 2, 1)).unwrap(), 0);
        assert_eq!(milnor_ahat_difference(&m(1, 1, 0, 0)).unwrap(), 1);
        let bad = MilnorPairInput { s: 2, t: 4, ps1: 1, pt1: 1, ps2: 0, pt2: 0 };
        assert!(matches!(milnor_ahat_difference(&bad), Err(PlumbingError::Range { .. })));
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta_local_contribution(2).unwrap(), r(1, 4));
        assert_eq!(eta_local_contribution(3).unwrap(), r(1, 8));
        assert_eq!(eta_rp(3).unwrap(), r(-1, 4));
        assert!(eta_local_contribution(0).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(fixed_point_count(8, CountConvention::Paper).unwrap(), 3);
        assert_eq!(fixed_point_count(8, CountConvention::Chain).unwrap(), 9);
        assert!(fixed_point_count(7, CountConvention::Paper).is_err());
    }

    #[test]
    fn ledger_difference() {
        let ledger = EtaLedger::for_lengths(1, [1, 2], CountConvention::Paper).unwrap();
        let rep = eta_ledger(&ledger).unwrap();
        let d = &rep.values[&1] - &rep.values[&2];
        assert_eq!(d.rational, r(1, 2));
        assert!(d.cv_coeff.is_zero());
        assert!(rep.distinct);
        let degenerate = EtaLedger { k: 1, fixed_point_counts: [(1, 5), (2, 5)].into_iter().collect() };
        let rep = eta_ledger(&degenerate).unwrap();
        assert!(!rep.distinct);
        assert_eq!(rep.collisions, vec![(1, 2)]);
    }

    #[test]
    fn json_roundtrip() {
        let t = PlumbingTree::tangent_chain(2, 1);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(PlumbingTree::from_json(&s).unwrap(), t);
        let v = rational_json(&r(-3, 8));
        assert_eq!(v, serde_json::json!({"num": -3, "den": 8}));
    }
}
