//! Classical binary linear codes and the tensor codes used as local codes.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::BinaryMatrix;

/// Largest dimension accepted by [`ClassicalCode::min_distance_exhaustive`].
pub const EXHAUSTIVE_MAX_K: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid dimensions: k = {k}, n = {n}")]
    InvalidDimensions { k: usize, n: usize },
    #[error("dimension {0} is too large for exhaustive search (max {EXHAUSTIVE_MAX_K}); use the randomized estimator")]
    TooLarge(usize),
    #[error("generator and parity matrices are inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCode {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "G")]
    pub generator: BinaryMatrix,
    #[serde(rename = "H")]
    pub parity: BinaryMatrix,
    /// `None` means not computed, or undefined for a zero-dimensional code.
    pub d: Option<usize>,
}

impl ClassicalCode {
    /// Checks `G·Hᵀ = 0`, full row ranks and `rank G + rank H = n`.
    pub fn new(generator: BinaryMatrix, parity: BinaryMatrix) -> Result<Self, CodeError> {
        let n = generator.cols();
        if parity.cols() != n {
            return Err(CodeError::Inconsistent(format!(
                "block lengths {} and {}",
                n,
                parity.cols()
            )));
        }
        let k = generator.rank();
        if k != generator.rows() || parity.rank() != parity.rows() {
            return Err(CodeError::Inconsistent("rows are not independent".into()));
        }
        if k + parity.rows() != n {
            return Err(CodeError::Inconsistent(format!(
                "rank(G) + rank(H) = {} + {} != {n}",
                k,
                parity.rows()
            )));
        }
        if !generator.mul_transpose(&parity).expect("same width").is_zero() {
            return Err(CodeError::Inconsistent("G·Hᵀ != 0".into()));
        }
        Ok(Self {
            n,
            k,
            generator,
            parity,
            d: None,
        })
    }

    /// `G = [I_k | P]`, `H = [Pᵀ | I_(n-k)]` for a `k × (n-k)` matrix `P`.
    pub fn from_systematic(p: &BinaryMatrix) -> Self {
        let (k, r) = (p.rows(), p.cols());
        let n = k + r;
        let mut g = BinaryMatrix::zeros(k, n);
        let mut h = BinaryMatrix::zeros(r, n);
        for i in 0..k {
            g.set(i, i, true);
            for j in 0..r {
                if p.get(i, j) {
                    g.set(i, k + j, true);
                    h.set(j, i, true);
                }
            }
        }
        for j in 0..r {
            h.set(j, k + j, true);
        }
        Self {
            n,
            k,
            generator: g,
            parity: h,
            d: None,
        }
    }

    /// The code `ker(H)`; dependent rows of `H` are dropped.
    pub fn from_parity(h: &BinaryMatrix) -> Self {
        let generator = h.kernel_basis();
        let parity = generator.kernel_basis();
        Self::new(generator, parity).expect("kernel bases are consistent")
    }

    /// The code spanned by the rows of `G`.
    pub fn from_generator(g: &BinaryMatrix) -> Self {
        let parity = g.kernel_basis();
        let generator = parity.kernel_basis();
        Self::new(generator, parity).expect("kernel bases are consistent")
    }

    /// Uniformly random `P` of shape `k × (n-k)`.
    pub fn random_systematic<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Self, CodeError> {
        if k == 0 || k >= n {
            return Err(CodeError::InvalidDimensions { k, n });
        }
        let mut p = BinaryMatrix::zeros(k, n - k);
        for i in 0..k {
            for j in 0..n - k {
                if rng.gen::<bool>() {
                    p.set(i, j, true);
                }
            }
        }
        Ok(Self::from_systematic(&p))
    }

    pub fn dual(&self) -> Self {
        Self {
            n: self.n,
            k: self.n - self.k,
            generator: self.parity.clone(),
            parity: self.generator.clone(),
            d: None,
        }
    }

    pub fn with_distance(mut self) -> Result<Self, CodeError> {
        self.d = self.min_distance_exhaustive()?;
        Ok(self)
    }

    /// Minimum nonzero codeword weight by Gray-code enumeration of all `2^k` codewords.
    /// Returns `None` for the zero-dimensional code.
    pub fn min_distance_exhaustive(&self) -> Result<Option<usize>, CodeError> {
        if self.k > EXHAUSTIVE_MAX_K {
            return Err(CodeError::TooLarge(self.k));
        }
        if self.k == 0 {
            return Ok(None);
        }
        let mut word = crate::gf2::BitVector::zeros(self.n);
        let mut best = usize::MAX;
        for step in 1u64..(1u64 << self.k) {
            let bit = step.trailing_zeros() as usize;
            word.xor_assign(&self.generator.row(bit));
            best = best.min(word.weight());
        }
        Ok(Some(best))
    }

    pub fn contains(&self, word: &crate::gf2::BitVector) -> bool {
        self.parity.mul_vec(word).is_zero()
    }
}

/// Local code pair with the tensor codes `C0 = C_A ⊗ C_B` and `C1 = C_A^⊥ ⊗ C_B^⊥`.
/// Tensor columns are indexed by `i·n_B + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodePair {
    pub c_a: ClassicalCode,
    pub c_b: ClassicalCode,
    /// Basis of `C0`: Kronecker products of generator rows, row-major.
    pub c0: BinaryMatrix,
    /// Basis of `C1`: Kronecker products of parity rows, row-major.
    pub c1: BinaryMatrix,
}

impl CodePair {
    pub fn new(c_a: ClassicalCode, c_b: ClassicalCode) -> Self {
        let c0 = c_a.generator.kron(&c_b.generator);
        let c1 = c_a.parity.kron(&c_b.parity);
        Self { c_a, c_b, c0, c1 }
    }

    /// Requires both codes to have block length `delta`.
    pub fn with_block_length(c_a: ClassicalCode, c_b: ClassicalCode, delta: usize) -> Result<Self, CodeError> {
        if c_a.n != delta || c_b.n != delta {
            return Err(CodeError::InvalidDimensions {
                k: c_a.n.max(c_b.n),
                n: delta,
            });
        }
        Ok(Self::new(c_a, c_b))
    }

    /// `ρ = k_A / n_A`.
    pub fn rho(&self) -> f64 {
        self.c_a.k as f64 / self.c_a.n as f64
    }

    pub fn dim_c0(&self) -> usize {
        self.c0.rank()
    }

    pub fn dim_c1(&self) -> usize {
        self.c1.rank()
    }
}

/// Greedily replaces rows by `row_i + row_j` while that lowers the maximum row weight
/// or the weight of the row being replaced. The row space is unchanged.
pub fn reduce_basis(basis: &BinaryMatrix) -> BinaryMatrix {
    let mut m = basis.clone();
    loop {
        let mut improved = false;
        for i in 0..m.rows() {
            for j in 0..m.rows() {
                if i == j {
                    continue;
                }
                let candidate = m.row(i).xor(&m.row(j));
                if candidate.weight() < m.row_weight(i) {
                    m.row_words_mut(i).copy_from_slice(candidate.words());
                    improved = true;
                }
            }
        }
        if !improved {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Distance by listing all 2^n words and keeping the codewords.
    fn brute_distance(code: &ClassicalCode) -> Option<usize> {
        (1u32..(1 << code.n))
            .map(|x| BitVector::from_bits(&(0..code.n).map(|i| (x >> i & 1) as u8).collect::<Vec<_>>()))
            .filter(|w| code.contains(w))
            .map(|w| w.weight())
            .min()
    }

    #[test]
    fn systematic_shapes_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = ClassicalCode::random_systematic(1, 3, &mut rng).unwrap();
        assert_eq!((c.generator.rows(), c.parity.rows()), (1, 2));
        assert!(c.generator.mul_transpose(&c.parity).unwrap().is_zero());
        assert!(ClassicalCode::random_systematic(0, 3, &mut rng).is_err());
        assert!(ClassicalCode::random_systematic(3, 3, &mut rng).is_err());
    }

    #[test]
    fn systematic_is_seed_deterministic() {
        let a = ClassicalCode::random_systematic(3, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = ClassicalCode::random_systematic(3, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn literal_parity_examples() {
        let c_a = ClassicalCode::from_parity(&BinaryMatrix::from_rows(&[[1, 0, 0], [1, 1, 1]]));
        assert_eq!(c_a.k, 1);
        assert_eq!(c_a.generator.row(0).to_bits(), vec![0, 1, 1]);
        assert_eq!(c_a.min_distance_exhaustive().unwrap(), Some(2));

        let c_b = ClassicalCode::from_parity(&BinaryMatrix::from_rows(&[[1, 1, 1]]));
        assert_eq!(c_b.min_distance_exhaustive().unwrap(), Some(2));
        let rep = c_b.dual();
        assert_eq!(rep.k, 1);
        assert_eq!(rep.generator.row(0).to_bits(), vec![1, 1, 1]);
        assert_eq!(rep.min_distance_exhaustive().unwrap(), Some(3));
    }

    #[test]
    fn zero_dimensional_distance_is_undefined() {
        let c = ClassicalCode::from_parity(&BinaryMatrix::identity(3));
        assert_eq!(c.k, 0);
        assert_eq!(c.min_distance_exhaustive().unwrap(), None);
    }

    #[test]
    fn too_large_for_enumeration() {
        let c = ClassicalCode::from_parity(&BinaryMatrix::from_rows(&[vec![1u8; 30]]));
        assert_eq!(c.min_distance_exhaustive(), Err(CodeError::TooLarge(29)));
    }

    #[test]
    fn pair_dimensions() {
        let c_a = ClassicalCode::from_parity(&BinaryMatrix::from_rows(&[[1, 0, 0], [1, 1, 1]]));
        let c_b = ClassicalCode::from_parity(&BinaryMatrix::from_rows(&[[1, 1, 1]]));
        let pair = CodePair::with_block_length(c_a, c_b, 3).unwrap();
        assert_eq!(pair.dim_c0(), 2);
        assert_eq!(pair.dim_c1(), 2);
        assert!((pair.rho() - 1.0 / 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a5 = ClassicalCode::random_systematic(3, 5, &mut rng).unwrap();
        let b5 = ClassicalCode::random_systematic(2, 5, &mut rng).unwrap();
        let pair = CodePair::new(a5, b5);
        assert_eq!(pair.dim_c0(), 6);
        assert_eq!(pair.dim_c1(), 6);
    }

    #[test]
    fn json_shape() {
        let c = ClassicalCode::from_systematic(&BinaryMatrix::from_rows(&[[1, 1]])).with_distance().unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["k"], 1);
        assert_eq!(v["d"], 3);
        assert_eq!(v["G"]["data"], serde_json::json!([[1, 1, 1]]));
        let back: ClassicalCode = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn reduce_basis_keeps_row_space() {
        let m = BinaryMatrix::from_rows(&[[1, 1, 1, 1, 0, 0], [1, 1, 1, 0, 1, 0], [1, 1, 0, 0, 0, 1]]);
        let r = reduce_basis(&m);
        assert_eq!(r.rank(), 3);
        assert_eq!(m.vstack(&r).unwrap().rank(), 3);
        assert!(r.row_weights().iter().max() <= m.row_weights().iter().max());
    }

    proptest! {
        #[test]
        fn random_codes_are_consistent(k in 1usize..6, extra in 1usize..5, seed in any::<u64>()) {
            let n = k + extra;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = ClassicalCode::random_systematic(k, n, &mut rng).unwrap();
            prop_assert!(c.generator.mul_transpose(&c.parity).unwrap().is_zero());
            let d = c.dual();
            prop_assert!(d.generator.mul_transpose(&d.parity).unwrap().is_zero());
            prop_assert_eq!(d.k, n - k);
            let dd = d.dual();
            prop_assert_eq!(dd.generator.vstack(&c.generator).unwrap().rank(), k);
            prop_assert_eq!(c.min_distance_exhaustive().unwrap(), brute_distance(&c));
        }

        #[test]
        fn tensor_dimension_and_distance_multiply(ka in 1usize..4, kb in 1usize..4, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ClassicalCode::random_systematic(ka, 4, &mut rng).unwrap();
            let b = ClassicalCode::random_systematic(kb, 4, &mut rng).unwrap();
            let pair = CodePair::new(a.clone(), b.clone());
            prop_assert_eq!(pair.dim_c0(), ka * kb);
            prop_assert_eq!(pair.dim_c1(), (4 - ka) * (4 - kb));
            let c0 = ClassicalCode::from_generator(&pair.c0);
            let da = a.min_distance_exhaustive().unwrap().unwrap();
            let db = b.min_distance_exhaustive().unwrap().unwrap();
            prop_assert_eq!(c0.min_distance_exhaustive().unwrap(), Some(da * db));
        }
    }
}
