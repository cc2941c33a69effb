//! Quantum Tanner codes: CSS assembly from a complex and a local code pair,
//! parameters, logical operators, the five reference fixtures, and bundle IO.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{ClassicalCode, CodeError, CodePair};
use crate::complex::{ComplexError, LeftRightCayleyComplex, Vertex};
use crate::gf2::{BinaryMatrix, Gf2Error, IncrementalBasis};
use crate::groups::{sample_tnc_pair, DihedralGroup, GeneratorSet, GroupError};

#[derive(Debug, Error)]
pub enum QcodeError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("local code lengths ({0}, {1}) do not match generator set sizes ({2}, {3})")]
    LengthMismatch(usize, usize, usize, usize),
    #[error("H_X·H_Zᵀ != 0 under both local-view conventions")]
    Commutation,
    #[error("unknown fixture `{0}`; expected one of {1}")]
    UnknownFixture(String, String),
    #[error("bundle: {0}")]
    Bundle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalViewConvention {
    /// `(i, j)` at `g_1` is the face through the edges labeled `a_i` and `b_j`.
    Natural,
    /// As `Natural` with `a_i` replaced by `a_i^-1`.
    Mirrored,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub group: String,
    pub group_n: u32,
    pub delta_a: usize,
    pub delta_b: usize,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c_a: ClassicalCode,
    pub c_b: ClassicalCode,
    pub local_view: LocalViewConvention,
    pub seed: Option<u64>,
    pub fixture: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub name: String,
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
    pub n: usize,
    pub k: usize,
    /// Rows in `ker(H_Z)` outside `rowspace(H_X)`.
    pub logical_x: BinaryMatrix,
    /// Rows in `ker(H_X)` outside `rowspace(H_Z)`, paired so that `L_X·L_Zᵀ = I`.
    pub logical_z: BinaryMatrix,
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub hx_rows: usize,
    pub hz_rows: usize,
    pub rank_hx: usize,
    pub rank_hz: usize,
    /// Distinct row weights of H_X.
    pub x_weights: Vec<usize>,
    /// Distinct row weights of H_Z.
    pub z_weights: Vec<usize>,
    pub max_row_weight: usize,
    pub max_col_degree_x: usize,
    pub max_col_degree_z: usize,
    /// Max column weight of `[H_X; H_Z]`.
    pub max_qubit_degree: usize,
    /// `4ρ(1-ρ)Δ²`, present for Tanner codes.
    pub qubit_degree_bound: Option<f64>,
    /// `4ρ(1-ρ)n`, reported for comparison with the rank-based k.
    pub counting_k_bound: Option<f64>,
}

impl CssCode {
    /// Computes k and logical bases. Fails unless `H_X·H_Zᵀ = 0`.
    pub fn from_matrices(name: &str, hx: BinaryMatrix, hz: BinaryMatrix) -> Result<Self, QcodeError> {
        if hx.cols() != hz.cols() {
            return Err(Gf2Error::DimensionMismatch("H_X and H_Z widths differ".into()).into());
        }
        if !hx.mul_transpose(&hz)?.is_zero() {
            return Err(QcodeError::Commutation);
        }
        let n = hx.cols();
        let logical_x = logical_basis(&hz, &hx);
        let logical_z = logical_basis(&hx, &hz);
        let k = n - hx.rank() - hz.rank();
        debug_assert_eq!(logical_x.rows(), k);
        let pairing = logical_x.mul_transpose(&logical_z)?;
        let logical_z = pairing.inverse()?.transpose().mul(&logical_z)?;
        Ok(Self {
            name: name.to_string(),
            hx,
            hz,
            n,
            k,
            logical_x,
            logical_z,
            provenance: None,
        })
    }

    pub fn parameters(&self) -> CodeParameters {
        let distinct = |m: &BinaryMatrix| {
            let mut w = m.row_weights();
            w.sort_unstable();
            w.dedup();
            w
        };
        let max_col = |m: &BinaryMatrix| m.col_weights().into_iter().max().unwrap_or(0);
        let stacked = self.hx.vstack(&self.hz).expect("same width");
        let x_weights = distinct(&self.hx);
        let z_weights = distinct(&self.hz);
        let (qubit_degree_bound, counting_k_bound) = match &self.provenance {
            Some(p) => {
                let rho = p.c_a.k as f64 / p.c_a.n as f64;
                let f = 4.0 * rho * (1.0 - rho);
                (Some(f * (p.delta_a * p.delta_b) as f64), Some(f * self.n as f64))
            }
            None => (None, None),
        };
        CodeParameters {
            n: self.n,
            k: self.k,
            rate: self.k as f64 / self.n as f64,
            hx_rows: self.hx.rows(),
            hz_rows: self.hz.rows(),
            rank_hx: self.hx.rank(),
            rank_hz: self.hz.rank(),
            max_row_weight: x_weights.iter().chain(&z_weights).copied().max().unwrap_or(0),
            x_weights,
            z_weights,
            max_col_degree_x: max_col(&self.hx),
            max_col_degree_z: max_col(&self.hz),
            max_qubit_degree: max_col(&stacked),
            qubit_degree_bound,
            counting_k_bound,
        }
    }

    pub fn commutes(&self) -> bool {
        self.hx.mul_transpose(&self.hz).map(|m| m.is_zero()).unwrap_or(false)
    }

    /// `(H_X, L_X)` or `(H_Z, L_Z)` for the given Pauli type of the stabilizers.
    pub fn checks(&self, pauli: Pauli) -> (&BinaryMatrix, &BinaryMatrix) {
        match pauli {
            Pauli::X => (&self.hx, &self.logical_x),
            Pauli::Z => (&self.hz, &self.logical_z),
        }
    }

    pub fn write_bundle(&self, dir: &Path) -> Result<(), QcodeError> {
        fs::create_dir_all(dir)?;
        for (file, m) in [
            ("hx.alist", &self.hx),
            ("hz.alist", &self.hz),
            ("lx.alist", &self.logical_x),
            ("lz.alist", &self.logical_z),
        ] {
            m.write_alist(fs::File::create(dir.join(file))?)?;
        }
        let meta = BundleMeta {
            name: self.name.clone(),
            parameters: self.parameters(),
            provenance: self.provenance.clone(),
        };
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Reads a bundle and re-validates commutation and the logical pairing.
    pub fn read_bundle(dir: &Path) -> Result<Self, QcodeError> {
        let read = |file: &str| -> Result<BinaryMatrix, QcodeError> {
            let f = fs::File::open(dir.join(file))
                .map_err(|e| QcodeError::Bundle(format!("{}: {e}", dir.join(file).display())))?;
            Ok(BinaryMatrix::read_alist(BufReader::new(f))?)
        };
        let meta: BundleMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
        let hx = read("hx.alist")?;
        let hz = read("hz.alist")?;
        let logical_x = read("lx.alist")?;
        let logical_z = read("lz.alist")?;
        let mut code = Self::from_matrices(&meta.name, hx, hz)?;
        if logical_x.rows() != code.k || logical_z.rows() != code.k {
            return Err(QcodeError::Bundle("logical operator count differs from k".into()));
        }
        if !logical_x.mul_transpose(&logical_z)?.eq(&BinaryMatrix::identity(code.k))
            || !code.hz.mul_transpose(&logical_x)?.is_zero()
            || !code.hx.mul_transpose(&logical_z)?.is_zero()
        {
            return Err(QcodeError::Bundle("stored logical operators are invalid".into()));
        }
        code.logical_x = logical_x;
        code.logical_z = logical_z;
        code.provenance = meta.provenance;
        Ok(code)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn other(self) -> Pauli {
        match self {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BundleMeta {
    name: String,
    parameters: CodeParameters,
    provenance: Option<Provenance>,
}

/// Basis of `ker(commuting)` modulo `rowspace(stabilizers)`.
fn logical_basis(commuting: &BinaryMatrix, stabilizers: &BinaryMatrix) -> BinaryMatrix {
    let mut span = IncrementalBasis::from_rows(stabilizers);
    let kernel = commuting.kernel_basis();
    let mut out = Vec::new();
    for r in 0..kernel.rows() {
        let v = kernel.row(r);
        if span.insert(&v) {
            out.push(v);
        }
    }
    BinaryMatrix::from_row_vectors(commuting.cols(), &out)
}

/// Z-checks from `C0` at every `V0` vertex and X-checks from `C1` at every `V1` vertex.
/// Falls back to the mirrored `V1` convention if the natural one does not commute.
pub fn build_tanner_code(
    name: &str,
    complex: &LeftRightCayleyComplex,
    pair: &CodePair,
    seed: Option<u64>,
) -> Result<CssCode, QcodeError> {
    let (da, db) = (complex.a().len(), complex.b().len());
    if pair.c_a.n != da || pair.c_b.n != db {
        return Err(QcodeError::LengthMismatch(pair.c_a.n, pair.c_b.n, da, db));
    }
    let n = complex.num_faces();
    let m = complex.num_vertices_per_side();
    let push_rows = |basis: &BinaryMatrix, view: &dyn Fn(usize) -> Vec<usize>| {
        let mut supports = Vec::with_capacity(m * basis.rows());
        for g in 0..m {
            let faces = view(g);
            for r in 0..basis.rows() {
                supports.push(basis.row(r).iter_ones().map(|p| faces[p]).collect::<Vec<_>>());
            }
        }
        BinaryMatrix::from_supports(n, &supports)
    };
    let hz = push_rows(&pair.c0, &|g| complex.local_view(Vertex::V0(g)).to_vec());

    let gr = complex.group();
    let inverse_pos: Vec<usize> = (0..da)
        .map(|i| complex.a().position(gr.invert(complex.a().get(i))).expect("symmetric set"))
        .collect();
    for convention in [LocalViewConvention::Natural, LocalViewConvention::Mirrored] {
        let hx = push_rows(&pair.c1, &|g| {
            let view = complex.local_view(Vertex::V1(g));
            match convention {
                LocalViewConvention::Natural => view.to_vec(),
                LocalViewConvention::Mirrored => (0..da * db)
                    .map(|p| view[inverse_pos[p / db] * db + p % db])
                    .collect(),
            }
        });
        if !hx.mul_transpose(&hz)?.is_zero() {
            continue;
        }
        let mut code = CssCode::from_matrices(name, hx, hz)?;
        code.provenance = Some(Provenance {
            group: format!("D{}", gr.n()),
            group_n: gr.n(),
            delta_a: da,
            delta_b: db,
            a: complex.a().to_strings(),
            b: complex.b().to_strings(),
            c_a: pair.c_a.clone(),
            c_b: pair.c_b.clone(),
            local_view: convention,
            seed,
            fixture: None,
        });
        return Ok(code);
    }
    Err(QcodeError::Commutation)
}

/// Random instance: TNC generator pair of size `delta` in `D_n` and random systematic
/// local codes of dimensions `k_a`, `k_b`, all drawn from one seeded stream.
pub fn random_tanner_code(n: u32, delta: usize, k_a: usize, k_b: usize, seed: u64) -> Result<CssCode, QcodeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = DihedralGroup::new(n)?;
    let (a, b) = sample_tnc_pair(&group, delta, 1000, &mut rng)?;
    let c_a = ClassicalCode::random_systematic(k_a, delta, &mut rng)?;
    let c_b = ClassicalCode::random_systematic(k_b, delta, &mut rng)?;
    let complex = LeftRightCayleyComplex::build(group, a, b)?;
    let pair = CodePair::new(c_a, c_b);
    build_tanner_code(&format!("D{n}-delta{delta}-seed{seed}"), &complex, &pair, Some(seed))
}

/// Published figures for a fixture, used by the acceptance suite and reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixtureReference {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub weights: &'static [usize],
    pub phenomenological_threshold: f64,
    pub circuit_threshold: f64,
    pub overhead_per_logical: f64,
    pub phenomenological_pl_per_k: f64,
    pub circuit_pl_per_k: f64,
}

/// Generator sets and local check matrices of one fixture.
///
/// Each local matrix `M` (`r × Δ`) is read in systematic form: with `k = Δ - r`,
/// its first `k` columns hold `Pᵀ`, and the code is `G = [I_k | P]`, `H = [Pᵀ | I_r]`.
#[derive(Clone, Copy, Debug)]
pub struct FixtureSpec {
    pub name: &'static str,
    pub group_n: u32,
    pub a: &'static [&'static str],
    pub b: &'static [&'static str],
    pub local_a: &'static [&'static [u8]],
    pub local_b: &'static [&'static [u8]],
    pub reference: FixtureReference,
}

const SMALL_A: &[&[u8]] = &[&[1, 0, 0], &[1, 1, 1]];
const SMALL_B: &[&[u8]] = &[&[1, 1, 1]];

pub const FIXTURES: [FixtureSpec; 5] = [
    FixtureSpec {
        name: "d4-36",
        group_n: 4,
        a: &["s", "r", "r^3"],
        b: &["sr", "sr^3", "r^2"],
        local_a: SMALL_A,
        local_b: SMALL_B,
        reference: FixtureReference {
            n: 36,
            k: 8,
            d: 3,
            weights: &[6],
            phenomenological_threshold: 0.0634,
            circuit_threshold: 0.0038,
            overhead_per_logical: 612.0,
            phenomenological_pl_per_k: 1.71e-5,
            circuit_pl_per_k: 6.52e-4,
        },
    },
    FixtureSpec {
        name: "d6-54",
        group_n: 6,
        a: &["r", "r^3", "r^5"],
        b: &["sr^2", "sr^4", "sr^5"],
        local_a: SMALL_A,
        local_b: SMALL_B,
        reference: FixtureReference {
            n: 54,
            k: 11,
            d: 4,
            weights: &[6],
            phenomenological_threshold: 0.0382,
            circuit_threshold: 0.0056,
            overhead_per_logical: 891.0,
            phenomenological_pl_per_k: 4.1e-6,
            circuit_pl_per_k: 2.38e-4,
        },
    },
    FixtureSpec {
        name: "d8-72",
        group_n: 8,
        a: &["s", "sr^4", "r^4"],
        b: &["sr", "sr^3", "sr^7"],
        local_a: SMALL_A,
        local_b: SMALL_B,
        reference: FixtureReference {
            n: 72,
            k: 14,
            d: 4,
            weights: &[6],
            phenomenological_threshold: 0.0300,
            circuit_threshold: 0.0036,
            overhead_per_logical: 933.0,
            phenomenological_pl_per_k: 1.12e-5,
            circuit_pl_per_k: 4.83e-4,
        },
    },
    FixtureSpec {
        name: "d8-200",
        group_n: 8,
        a: &["sr^6", "r", "r^3", "r^5", "r^7"],
        b: &["sr", "sr^3", "sr^7", "r^2", "r^6"],
        local_a: &[&[1, 0, 1, 0, 1], &[1, 1, 0, 0, 0], &[1, 0, 0, 0, 1]],
        local_b: &[&[1, 1, 1, 1, 1], &[0, 1, 0, 0, 1]],
        reference: FixtureReference {
            n: 200,
            k: 10,
            d: 10,
            weights: &[6, 8, 9, 12],
            phenomenological_threshold: 0.0198,
            circuit_threshold: 0.0059,
            overhead_per_logical: 16464.0,
            phenomenological_pl_per_k: 1.00e-7,
            circuit_pl_per_k: 8.2e-5,
        },
    },
    FixtureSpec {
        name: "d10-250",
        group_n: 10,
        a: &["sr", "r", "r^3", "r^7", "r^9"],
        b: &["sr^6", "r^2", "r^4", "r^6", "r^8"],
        local_a: &[&[1, 1, 1, 0, 1], &[1, 1, 0, 0, 0], &[1, 0, 0, 0, 1]],
        local_b: &[&[1, 1, 1, 0, 0], &[1, 1, 0, 0, 1]],
        reference: FixtureReference {
            n: 250,
            k: 10,
            d: 15,
            weights: &[6, 8, 9, 12],
            phenomenological_threshold: 0.0133,
            circuit_threshold: 0.0040,
            overhead_per_logical: 30870.0,
            phenomenological_pl_per_k: 5.3e-8,
            circuit_pl_per_k: 2.44e-5,
        },
    },
];

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|f| f.name).collect()
}

pub fn fixture_spec(name: &str) -> Result<&'static FixtureSpec, QcodeError> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| QcodeError::UnknownFixture(name.into(), fixture_names().join(", ")))
}

/// Local code from an `r × Δ` check matrix in systematic form (see [`FixtureSpec`]).
pub fn systematic_local_code(rows: &[&[u8]]) -> ClassicalCode {
    let m = BinaryMatrix::from_rows(rows);
    let k = m.cols() - m.rows();
    let cols: Vec<usize> = (0..k).collect();
    ClassicalCode::from_systematic(&m.select_columns(&cols).transpose())
}

impl FixtureSpec {
    pub fn complex(&self) -> Result<LeftRightCayleyComplex, QcodeError> {
        let group = DihedralGroup::new(self.group_n)?;
        let a = GeneratorSet::parse(&group, self.a)?;
        let b = GeneratorSet::parse(&group, self.b)?;
        Ok(LeftRightCayleyComplex::build(group, a, b)?)
    }

    pub fn pair(&self) -> CodePair {
        CodePair::new(systematic_local_code(self.local_a), systematic_local_code(self.local_b))
    }
}

pub fn load_fixture(name: &str) -> Result<CssCode, QcodeError> {
    let spec = fixture_spec(name)?;
    let mut code = build_tanner_code(spec.name, &spec.complex()?, &spec.pair(), None)?;
    if let Some(p) = code.provenance.as_mut() {
        p.fixture = Some(spec.name.to_string());
    }
    Ok(code)
}
