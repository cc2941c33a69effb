//! Left-right Cayley complexes over dihedral groups, local views, and spectra.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{check_tnc, DihedralGroup, Element, GeneratorSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("total non-conjugacy fails: {a}·{g} = {g}·{b}")]
    Tnc { a: String, b: String, g: String },
    #[error("A ∪ B generates a subgroup of order {found}, expected {expected}")]
    NotGenerating { found: usize, expected: usize },
    #[error("left and right Cayley graphs share the edge ({0}, {1})")]
    OverlappingEdges(String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertex {
    V0(usize),
    V1(usize),
}

/// A square face, stored by its canonical triple `(g, a, b)`.
/// Its vertices are `g_0, (ag)_1, (gb)_1, (agb)_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Face {
    pub id: usize,
    pub g: Element,
    pub a: Element,
    pub b: Element,
}

#[derive(Clone, Debug)]
pub struct LeftRightCayleyComplex {
    group: DihedralGroup,
    a: GeneratorSet,
    b: GeneratorSet,
    faces: Vec<Face>,
    view0: Vec<Vec<usize>>,
    view1: Vec<Vec<usize>>,
}

impl LeftRightCayleyComplex {
    pub fn build(group: DihedralGroup, a: GeneratorSet, b: GeneratorSet) -> Result<Self, ComplexError> {
        if let Some((x, y, g)) = check_tnc(&group, &a, &b) {
            return Err(ComplexError::Tnc {
                a: x.to_string(),
                b: y.to_string(),
                g: g.to_string(),
            });
        }
        let mut gens = a.elements().to_vec();
        gens.extend_from_slice(b.elements());
        let found = group.generated_subgroup(&gens).len();
        if found != group.order() {
            return Err(ComplexError::NotGenerating {
                found,
                expected: group.order(),
            });
        }

        let key = |t: (Element, Element, Element)| (group.index(t.0), group.index(t.1), group.index(t.2));
        let mut triples = Vec::with_capacity(group.order() * a.len() * b.len() / 2);
        for g in group.enumerate() {
            for &x in a.elements() {
                for &y in b.elements() {
                    let t = (g, x, y);
                    if canonical_triple(&group, t) == t {
                        triples.push(t);
                    }
                }
            }
        }
        triples.sort_by_key(|&t| key(t));
        let faces: Vec<Face> = triples
            .iter()
            .enumerate()
            .map(|(id, &(g, x, y))| Face { id, g, a: x, b: y })
            .collect();
        let lookup: HashMap<(usize, usize, usize), usize> =
            faces.iter().map(|f| (key((f.g, f.a, f.b)), f.id)).collect();
        let face_of = |t| lookup[&key(canonical_triple(&group, t))];

        let mut view0 = Vec::with_capacity(group.order());
        let mut view1 = Vec::with_capacity(group.order());
        for g in group.enumerate() {
            let mut v0 = Vec::with_capacity(a.len() * b.len());
            let mut v1 = Vec::with_capacity(a.len() * b.len());
            for &x in a.elements() {
                for &y in b.elements() {
                    v0.push(face_of((g, x, y)));
                    v1.push(face_of((group.multiply(x, g), group.invert(x), y)));
                }
            }
            view0.push(v0);
            view1.push(v1);
        }
        Ok(Self {
            group,
            a,
            b,
            faces,
            view0,
            view1,
        })
    }

    pub fn group(&self) -> &DihedralGroup {
        &self.group
    }

    pub fn a(&self) -> &GeneratorSet {
        &self.a
    }

    pub fn b(&self) -> &GeneratorSet {
        &self.b
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices_per_side(&self) -> usize {
        self.group.order()
    }

    /// Face ids indexed by `i·|B| + j` for the generator pair `(a_i, b_j)`.
    ///
    /// At `g_0` the pair maps to `{g_0, (a_i g)_1, (g b_j)_1, (a_i g b_j)_0}`;
    /// at `g_1` it maps to `{g_1, (a_i g)_0, (g b_j)_0, (a_i g b_j)_1}`.
    pub fn local_view(&self, v: Vertex) -> &[usize] {
        match v {
            Vertex::V0(g) => &self.view0[g],
            Vertex::V1(g) => &self.view1[g],
        }
    }

    pub fn face_vertices(&self, f: &Face) -> [Vertex; 4] {
        let gr = &self.group;
        let ag = gr.multiply(f.a, f.g);
        let gb = gr.multiply(f.g, f.b);
        let agb = gr.multiply(ag, f.b);
        [
            Vertex::V0(gr.index(f.g)),
            Vertex::V1(gr.index(ag)),
            Vertex::V1(gr.index(gb)),
            Vertex::V0(gr.index(agb)),
        ]
    }

    /// Left Cayley graph `g ~ ag`.
    pub fn left_adjacency(&self) -> Vec<Vec<f64>> {
        self.cayley_adjacency(|g, x| self.group.multiply(x, g), self.a.elements())
    }

    /// Right Cayley graph `g ~ gb`.
    pub fn right_adjacency(&self) -> Vec<Vec<f64>> {
        self.cayley_adjacency(|g, y| self.group.multiply(g, y), self.b.elements())
    }

    fn cayley_adjacency<F: Fn(Element, Element) -> Element>(&self, act: F, gens: &[Element]) -> Vec<Vec<f64>> {
        let m = self.group.order();
        let mut adj = vec![vec![0.0; m]; m];
        for g in self.group.enumerate() {
            for &x in gens {
                adj[self.group.index(g)][self.group.index(act(g, x))] += 1.0;
            }
        }
        adj
    }

    /// Vertex graph of the complex on `V_0 ∪ V_1`, built from its edge set.
    pub fn lrcc_adjacency(&self) -> Vec<Vec<f64>> {
        let m = self.group.order();
        let mut adj = vec![vec![0.0; 2 * m]; 2 * m];
        for g in self.group.enumerate() {
            let i = self.group.index(g);
            for &x in self.a.elements() {
                let j = m + self.group.index(self.group.multiply(x, g));
                adj[i][j] += 1.0;
                adj[j][i] += 1.0;
            }
            for &y in self.b.elements() {
                let j = m + self.group.index(self.group.multiply(g, y));
                adj[i][j] += 1.0;
                adj[j][i] += 1.0;
            }
        }
        adj
    }

    pub fn spectral_report(&self) -> Result<SpectralReport, ComplexError> {
        let left = self.left_adjacency();
        let right = self.right_adjacency();
        let m = self.group.order();
        for i in 0..m {
            for j in 0..m {
                if left[i][j] != 0.0 && right[i][j] != 0.0 {
                    return Err(ComplexError::OverlappingEdges(
                        self.group.element(i).to_string(),
                        self.group.element(j).to_string(),
                    ));
                }
            }
        }
        let combined: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| left[i][j] + right[i][j]).collect())
            .collect();
        let lrcc = self.lrcc_adjacency();

        let left = GraphSpectrum::new(self.a.len(), symmetric_eigenvalues(&left));
        let right = GraphSpectrum::new(self.b.len(), symmetric_eigenvalues(&right));
        let combined = GraphSpectrum::new(self.a.len() + self.b.len(), symmetric_eigenvalues(&combined));
        let lrcc = GraphSpectrum::new(self.a.len() + self.b.len(), symmetric_eigenvalues(&lrcc));

        let ev = &lrcc.eigenvalues;
        let symmetry_error = (0..ev.len())
            .map(|i| (ev[i] + ev[ev.len() - 1 - i]).abs())
            .fold(0.0, f64::max);
        let mut plus_minus: Vec<f64> = combined
            .eigenvalues
            .iter()
            .flat_map(|&l| [l, -l])
            .collect();
        plus_minus.sort_by(|x, y| y.total_cmp(x));
        let double_cover_error = plus_minus
            .iter()
            .zip(ev)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let bound = (left.lambda1 + right.lambda2).min(left.lambda2 + right.lambda1);
        Ok(SpectralReport {
            bound_holds: lrcc.lambda2 <= bound + SPECTRAL_TOLERANCE,
            combined_bound_holds: combined.lambda2 <= bound + SPECTRAL_TOLERANCE,
            left,
            right,
            combined,
            lrcc,
            bound,
            symmetry_error,
            double_cover_error,
        })
    }

    pub fn summary(&self) -> Result<ComplexSummary, ComplexError> {
        Ok(ComplexSummary {
            group: format!("D{}", self.group.n()),
            group_order: self.group.order(),
            a: self.a.to_strings(),
            b: self.b.to_strings(),
            faces: self.faces.len(),
            spectral: self.spectral_report()?,
        })
    }
}

/// Lexicographic minimum of `(g, a, b)` and `(agb, a^-1, b^-1)` under the canonical element order.
pub fn canonical_triple(
    group: &DihedralGroup,
    (g, a, b): (Element, Element, Element),
) -> (Element, Element, Element) {
    let other = (
        group.multiply(group.multiply(a, g), b),
        group.invert(a),
        group.invert(b),
    );
    let key = |t: &(Element, Element, Element)| (group.index(t.0), group.index(t.1), group.index(t.2));
    if key(&other) < key(&(g, a, b)) {
        other
    } else {
        (g, a, b)
    }
}

pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpectrum {
    pub degree: usize,
    /// Sorted in decreasing order.
    pub eigenvalues: Vec<f64>,
    pub lambda1: f64,
    /// Second entry of the decreasing spectrum.
    pub lambda2: f64,
    /// Largest `|λ|` once the trivial eigenvalues `deg` and, if present, `-deg` are removed.
    pub lambda2_abs: f64,
    pub ramanujan: bool,
}

impl GraphSpectrum {
    fn new(degree: usize, eigenvalues: Vec<f64>) -> Self {
        let d = degree as f64;
        let lambda1 = eigenvalues[0];
        let lambda2 = eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY);
        let mut rest: Vec<f64> = eigenvalues[1..].to_vec();
        if let Some(last) = rest.last() {
            if (last + d).abs() < 1e-7 {
                rest.pop();
            }
        }
        let lambda2_abs = rest.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let ramanujan = degree >= 1 && lambda2_abs <= 2.0 * (d - 1.0).sqrt() + SPECTRAL_TOLERANCE;
        Self {
            degree,
            eigenvalues,
            lambda1,
            lambda2,
            lambda2_abs,
            ramanujan,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub left: GraphSpectrum,
    pub right: GraphSpectrum,
    /// `A_A + A_B` on a single copy of the group.
    pub combined: GraphSpectrum,
    pub lrcc: GraphSpectrum,
    /// `min(λ1(left) + λ2(right), λ2(left) + λ1(right))`, i.e. `Δ + min(λ2ᵃ, λ2ᵇ)` when `|A| = |B|`.
    pub bound: f64,
    pub bound_holds: bool,
    pub combined_bound_holds: bool,
    /// `max |λ_i + λ_(m-1-i)|` over the complex's spectrum.
    pub symmetry_error: f64,
    /// Max deviation between the complex's spectrum and `±spec(A_A + A_B)`.
    pub double_cover_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSummary {
    pub group: String,
    pub group_order: usize,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub faces: usize,
    pub spectral: SpectralReport,
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, in decreasing order.
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (row_p, row_q) = (a[p].clone(), a[q].clone());
                for (k, (apk, aqk)) in row_p.into_iter().zip(row_q).enumerate() {
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::sample_tnc_pair;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn d4_complex() -> LeftRightCayleyComplex {
        let g = DihedralGroup::new(4).unwrap();
        let a = GeneratorSet::parse(&g, &["s", "r", "r^3"]).unwrap();
        let b = GeneratorSet::parse(&g, &["sr", "sr^3", "r^2"]).unwrap();
        LeftRightCayleyComplex::build(g, a, b).unwrap()
    }

    fn check_structure(c: &LeftRightCayleyComplex) {
        let m = c.group().order();
        let (da, db) = (c.a().len(), c.b().len());
        assert_eq!(c.num_faces(), da * db * m / 2);
        let mut count0 = vec![0; c.num_faces()];
        let mut count1 = vec![0; c.num_faces()];
        for g in 0..m {
            for (side, counts) in [(Vertex::V0(g), &mut count0), (Vertex::V1(g), &mut count1)] {
                let view = c.local_view(side);
                assert_eq!(view.len(), da * db);
                assert_eq!(view.iter().collect::<HashSet<_>>().len(), da * db);
                for &f in view {
                    assert!(c.face_vertices(&c.faces()[f]).contains(&side));
                    counts[f] += 1;
                }
            }
        }
        assert!(count0.iter().all(|&x| x == 2));
        assert!(count1.iter().all(|&x| x == 2));
        for f in c.faces() {
            let vs = c.face_vertices(f);
            assert_eq!(vs.iter().collect::<HashSet<_>>().len(), 4);
        }
    }

    #[test]
    fn d4_fixture_sets() {
        let c = d4_complex();
        assert_eq!(c.num_faces(), 36);
        check_structure(&c);
    }

    #[test]
    fn d10_fixture_sets() {
        let g = DihedralGroup::new(10).unwrap();
        let a = GeneratorSet::parse(&g, &["sr", "r", "r^3", "r^7", "r^9"]).unwrap();
        let b = GeneratorSet::parse(&g, &["sr^6", "r^2", "r^4", "r^6", "r^8"]).unwrap();
        let c = LeftRightCayleyComplex::build(g, a, b).unwrap();
        assert_eq!(c.num_faces(), 250);
        check_structure(&c);
    }

    #[test]
    fn triple_double_counting() {
        let c = d4_complex();
        let gr = c.group();
        let mut seen = HashMap::new();
        for g in gr.enumerate() {
            for &x in c.a().elements() {
                for &y in c.b().elements() {
                    *seen.entry(canonical_triple(gr, (g, x, y))).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(seen.len(), c.num_faces());
        assert!(seen.values().all(|&v| v == 2));
    }

    #[test]
    fn v0_views_related_by_inverse_pairs() {
        let c = d4_complex();
        let gr = c.group();
        let d = c.b().len();
        for f in c.faces() {
            let [g0, _, _, h0] = c.face_vertices(f);
            let (Vertex::V0(gi), Vertex::V0(hi)) = (g0, h0) else { unreachable!() };
            let at = |v: usize| c.local_view(Vertex::V0(v)).iter().position(|&x| x == f.id).unwrap();
            let (pi, pj) = (at(gi), at(hi));
            let (a1, b1) = (c.a().get(pi / d), c.b().get(pi % d));
            let (a2, b2) = (c.a().get(pj / d), c.b().get(pj % d));
            assert_eq!((a2, b2), (gr.invert(a1), gr.invert(b1)));
        }
    }

    #[test]
    fn rejects_invalid_sets() {
        let g = DihedralGroup::new(4).unwrap();
        let a = GeneratorSet::parse(&g, &["s", "r", "r^3"]).unwrap();
        let b = GeneratorSet::parse(&g, &["s", "r^2"]).unwrap();
        assert!(matches!(
            LeftRightCayleyComplex::build(g, a, b),
            Err(ComplexError::Tnc { .. })
        ));
        let a = GeneratorSet::parse(&g, &["r^2"]).unwrap();
        let b = GeneratorSet::parse(&g, &["s"]).unwrap();
        assert!(matches!(
            LeftRightCayleyComplex::build(g, a, b),
            Err(ComplexError::NotGenerating { found: 4, expected: 8 })
        ));
    }

    #[test]
    fn jacobi_on_known_spectra() {
        // 4-cycle: 2, 0, 0, -2
        let c4 = vec![
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
        ];
        let ev = symmetric_eigenvalues(&c4);
        for (x, y) in ev.iter().zip([2.0, 0.0, 0.0, -2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        // cycle C_n: 2cos(2πk/n)
        let n = 9;
        let mut cyc = vec![vec![0.0; n]; n];
        for i in 0..n {
            cyc[i][(i + 1) % n] = 1.0;
            cyc[(i + 1) % n][i] = 1.0;
        }
        let mut expect: Vec<f64> = (0..n)
            .map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expect.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in symmetric_eigenvalues(&cyc).iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_report_d4() {
        let c = d4_complex();
        let r = c.spectral_report().unwrap();
        assert!((r.left.lambda1 - 3.0).abs() < 1e-9);
        assert!((r.right.lambda1 - 3.0).abs() < 1e-9);
        assert!((r.lrcc.lambda1 - 6.0).abs() < 1e-9);
        assert!(r.symmetry_error < 1e-9);
        assert!(r.double_cover_error < 1e-9);
        assert!(r.bound_holds);
        for adj in [c.left_adjacency(), c.right_adjacency()] {
            for (i, row) in adj.iter().enumerate() {
                assert_eq!(row[i], 0.0);
                assert_eq!(row.iter().sum::<f64>(), 3.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_complexes_are_well_formed(n in 4u32..11, delta in 2usize..4, seed in 0u64..10_000) {
            let g = DihedralGroup::new(n).unwrap();
            prop_assume!(2 * delta < g.order() / 2 + 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if let Ok((a, b)) = sample_tnc_pair(&g, delta, 200, &mut rng) {
                let c = LeftRightCayleyComplex::build(g, a, b).unwrap();
                check_structure(&c);
                let r = c.spectral_report().unwrap();
                prop_assert!(r.symmetry_error < 1e-9);
                prop_assert!(r.combined_bound_holds);
            }
        }
    }
}
