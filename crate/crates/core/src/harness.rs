//! Memory experiments, logical error statistics, pseudo-thresholds, overheads and the
//! distance sweep over random instances.
//!
//! `L_X` is the failure rate of the Z-basis memory (X-type errors, decoded with `H_Z`);
//! `L_Z` is that of the X-basis memory.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::ClassicalCode;
use crate::decoder::{BpOsdDecoder, DecoderConfig, DecoderError, DecodingGraph};
use crate::distance::estimate_distance;
use crate::noise::{build_circuit, build_problem, NoiseError, NoiseKind, NoiseModel, SpaceTimeCheckMatrix};
use crate::qcode::{build_tanner_code, CssCode, Pauli, QcodeError};
use crate::rng::{derive_seed, stream};

/// One-sided 95% normal quantile used for the confidence half-width.
pub const Z_95: f64 = 1.645;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Code(#[from] QcodeError),
    #[error("no sign change of p_L(p) - target(p) on [{lo}, {hi}]: {curve:?}")]
    NoCrossing { lo: f64, hi: f64, curve: Vec<CurvePoint> },
    #[error("invalid search bracket [{0}, {1}]")]
    Bracket(f64, f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Adaptive shot budget: batches run until `target_failures` is reached or `max_shots`
/// would be exceeded. Batches are fixed-size, so counts do not depend on thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotPolicy {
    pub max_shots: usize,
    pub target_failures: usize,
    pub batch: usize,
}

impl Default for ShotPolicy {
    fn default() -> Self {
        Self {
            max_shots: 10_000_000,
            target_failures: 100,
            batch: 1024,
        }
    }
}

impl ShotPolicy {
    /// Exactly `shots` shots, no early stop.
    pub fn fixed(shots: usize) -> Self {
        Self {
            max_shots: shots,
            target_failures: usize::MAX,
            batch: 1024,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub shots: usize,
    pub failures: usize,
    pub osd_calls: usize,
}

impl ComponentCounts {
    pub fn rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.failures as f64 / self.shots as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub code: String,
    pub model: NoiseModel,
    pub x: ComponentCounts,
    pub z: ComponentCounts,
    pub l_x: f64,
    pub l_z: f64,
    pub p_l: f64,
    pub ci: f64,
    pub rounds: usize,
    pub wall_clock_s: f64,
    pub seed: u64,
}

/// `(L_X + L_Z − L_X·L_Z)/N`.
pub fn combined_rate(l_x: f64, l_z: f64, rounds: usize) -> f64 {
    (l_x + l_z - l_x * l_z) / rounds as f64
}

/// `(1.645/√η)·√(η_s·η_f/η²)` with `η_s = η − η_f`.
pub fn binomial_ci(shots: usize, failures: usize) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    let eta = shots as f64;
    let eta_f = failures as f64;
    let eta_s = eta - eta_f;
    Z_95 / eta.sqrt() * (eta_s * eta_f / (eta * eta)).sqrt()
}

/// Probability that at least one of `k` independent copies fails.
pub fn k_copy_rate(p_l: f64, k: usize) -> f64 {
    1.0 - (1.0 - p_l).powi(k as i32)
}

/// Decodes `problem` shot by shot; shot `i` draws from `stream(seed, i)`.
pub fn run_component(
    problem: &SpaceTimeCheckMatrix,
    config: &DecoderConfig,
    policy: &ShotPolicy,
    seed: u64,
) -> Result<ComponentCounts, HarnessError> {
    let graph = Arc::new(DecodingGraph::new(problem.detectors.clone(), &problem.priors)?);
    let template = BpOsdDecoder::new(graph, *config)?;
    let mut counts = ComponentCounts::default();
    let batch = policy.batch.max(1);
    while counts.shots < policy.max_shots && counts.failures < policy.target_failures {
        let size = batch.min(policy.max_shots - counts.shots);
        let start = counts.shots;
        let outcomes: Result<Vec<(bool, bool)>, DecoderError> = (start..start + size)
            .into_par_iter()
            .map_init(
                || template.clone(),
                |decoder, i| {
                    let mut rng = stream(seed, i as u64);
                    let shot = problem.sample_shot(&mut rng);
                    if shot.detectors.is_zero() && shot.logicals.is_zero() {
                        return Ok((false, false));
                    }
                    let out = decoder.decode(&shot.detectors)?;
                    let predicted = problem.logical_action.mul_vec(&out.error);
                    Ok((predicted != shot.logicals, out.osd_used))
                },
            )
            .collect();
        for (failed, osd) in outcomes? {
            counts.failures += failed as usize;
            counts.osd_calls += osd as usize;
        }
        counts.shots += size;
    }
    Ok(counts)
}

/// Runs both memory bases and combines them.
pub fn run_memory(
    code: &CssCode,
    model: &NoiseModel,
    config: &DecoderConfig,
    policy: &ShotPolicy,
    seed: u64,
) -> Result<ExperimentResult, HarnessError> {
    let started = Instant::now();
    let rounds = match model.kind {
        NoiseKind::CodeCapacity => 1,
        _ => model.rounds,
    };
    let x = run_component(&build_problem(code, Pauli::Z, model), config, policy, derive_seed(seed, 0))?;
    let z = run_component(&build_problem(code, Pauli::X, model), config, policy, derive_seed(seed, 1))?;
    let (l_x, l_z) = (x.rate(), z.rate());
    Ok(ExperimentResult {
        code: code.name.clone(),
        model: *model,
        x,
        z,
        l_x,
        l_z,
        p_l: combined_rate(l_x, l_z, rounds),
        ci: binomial_ci(x.shots + z.shots, x.failures + z.failures),
        rounds,
        wall_clock_s: started.elapsed().as_secs_f64(),
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub p_l: f64,
    pub ci: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub kind: NoiseKind,
    pub lo: f64,
    pub hi: f64,
    /// Stop once `hi/lo ≤ 1 + rel_width`.
    pub rel_width: f64,
    pub rounds: usize,
    pub policy: ShotPolicy,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub p_star: f64,
    pub lo: f64,
    pub hi: f64,
    /// Break-even slope: `k` (phenomenological) or `T·k/10` (circuit).
    pub slope: f64,
    pub depth: Option<usize>,
    pub curve: Vec<CurvePoint>,
}

/// Timesteps of one syndrome-extraction cycle of the generated circuit.
pub fn circuit_depth(code: &CssCode) -> usize {
    build_circuit(code, Pauli::Z, 1).cycle_depth()
}

/// Bisection on `log p` for `p_L(p) = slope·p`.
pub fn pseudo_threshold(
    code: &CssCode,
    config: &DecoderConfig,
    search: &ThresholdSearch,
) -> Result<ThresholdResult, HarnessError> {
    if !(search.lo > 0.0 && search.lo < search.hi && search.hi < 0.5) {
        return Err(HarnessError::Bracket(search.lo, search.hi));
    }
    let (slope, depth) = match search.kind {
        NoiseKind::Circuit => {
            let t = circuit_depth(code);
            (t as f64 * code.k as f64 / 10.0, Some(t))
        }
        _ => (code.k as f64, None),
    };
    let mut curve = Vec::new();
    let mut evaluate = |p: f64, step: u64| -> Result<f64, HarnessError> {
        let model = NoiseModel::new(search.kind, p, search.rounds)?;
        let r = run_memory(code, &model, config, &search.policy, derive_seed(search.seed, step))?;
        let target = slope * p;
        curve.push(CurvePoint {
            p,
            p_l: r.p_l,
            ci: r.ci,
            target,
        });
        Ok(r.p_l - target)
    };
    let (mut lo, mut hi) = (search.lo, search.hi);
    let f_lo = evaluate(lo, 0)?;
    let f_hi = evaluate(hi, 1)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(HarnessError::NoCrossing { lo, hi, curve });
    }
    let mut step = 2;
    while hi / lo > 1.0 + search.rel_width {
        let mid = (lo * hi).sqrt();
        if evaluate(mid, step)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        step += 1;
    }
    curve.sort_by(|a, b| a.p.total_cmp(&b.p));
    Ok(ThresholdResult {
        p_star: (lo * hi).sqrt(),
        lo,
        hi,
        slope,
        depth,
        curve,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overhead {
    pub n: usize,
    pub k: usize,
    pub n_anc: usize,
    pub d_x: usize,
    pub d_z: usize,
    pub rounds: usize,
    pub space: usize,
    pub time: usize,
    pub o_st: usize,
    pub per_logical: f64,
}

fn max_row_or_column(h: &crate::gf2::BinaryMatrix) -> usize {
    h.row_weights().into_iter().chain(h.col_weights()).max().unwrap_or(0)
}

/// `O_ST = (n + n_anc)(d_x + d_z)·N`, with one ancilla per stabilizer row.
pub fn overhead(code: &CssCode, rounds: usize) -> Overhead {
    let n_anc = code.hx.rows() + code.hz.rows();
    let (d_x, d_z) = (max_row_or_column(&code.hx), max_row_or_column(&code.hz));
    let space = code.n + n_anc;
    let time = (d_x + d_z) * rounds;
    let o_st = space * time;
    Overhead {
        n: code.n,
        k: code.k,
        n_anc,
        d_x,
        d_z,
        rounds,
        space,
        time,
        o_st,
        per_logical: o_st as f64 / code.k.max(1) as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub groups: Vec<u32>,
    pub deltas: Vec<usize>,
    pub targets: Vec<(usize, usize)>,
    pub instances: usize,
    pub trials: usize,
    /// Random local codes drawn per instance while looking for the target distance.
    pub code_attempts: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub delta: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub attempted: usize,
    pub valid: usize,
    pub max_distance: Option<usize>,
    /// Running maximum after each instance.
    pub history: Vec<Option<usize>>,
}

/// Random systematic `[Δ, k]` code of exact distance `d`, if found within `attempts`.
fn local_code_with_distance<R: Rng + ?Sized>(
    delta: usize,
    k: usize,
    d: usize,
    attempts: usize,
    rng: &mut R,
) -> Option<ClassicalCode> {
    if d > delta - k + 1 {
        return None;
    }
    for _ in 0..attempts {
        let code = ClassicalCode::random_systematic(k, delta, rng).ok()?;
        if code.min_distance_exhaustive().ok().flatten() == Some(d) {
            return code.with_distance().ok();
        }
    }
    None
}

/// Largest estimated quantum distance per `(Δ, d_A, d_B)` cell. Local codes have
/// complementary dimensions `k_A + k_B = Δ`.
pub fn sweep_distances(config: &SweepConfig) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for (ci, &delta) in config.deltas.iter().enumerate() {
        for (ti, &(d_a, d_b)) in config.targets.iter().enumerate() {
            let cell_seed = derive_seed(config.seed, (ci * config.targets.len() + ti) as u64);
            let results: Vec<Option<usize>> = (0..config.instances)
                .into_par_iter()
                .map(|i| sweep_instance(config, delta, d_a, d_b, derive_seed(cell_seed, i as u64)))
                .collect();
            let mut history = Vec::with_capacity(results.len());
            let mut best: Option<usize> = None;
            for r in &results {
                if let Some(d) = *r {
                    best = Some(best.map_or(d, |b| b.max(d)));
                }
                history.push(best);
            }
            cells.push(SweepCell {
                delta,
                d_a,
                d_b,
                attempted: config.instances,
                valid: results.iter().filter(|r| r.is_some()).count(),
                max_distance: best,
                history,
            });
        }
    }
    cells
}

fn sweep_instance(config: &SweepConfig, delta: usize, d_a: usize, d_b: usize, seed: u64) -> Option<usize> {
    use crate::complex::LeftRightCayleyComplex;
    use crate::groups::{sample_tnc_pair, DihedralGroup};

    let mut rng = stream(seed, 0);
    let groups: Vec<u32> = config
        .groups
        .iter()
        .copied()
        .filter(|&n| delta < n as usize && !(n % 2 == 1 && delta % 2 == 1))
        .collect();
    let &n = groups.choose(&mut rng)?;
    let group = DihedralGroup::new(n).ok()?;
    let (a, b) = sample_tnc_pair(&group, delta, 1000, &mut rng).ok()?;
    let k_a = rng.gen_range(1..delta);
    let c_a = local_code_with_distance(delta, k_a, d_a, config.code_attempts, &mut rng)?;
    let c_b = local_code_with_distance(delta, delta - k_a, d_b, config.code_attempts, &mut rng)?;
    let complex = LeftRightCayleyComplex::build(group, a, b).ok()?;
    let pair = crate::codes::CodePair::new(c_a, c_b);
    let code = build_tanner_code("sweep", &complex, &pair, Some(seed)).ok()?;
    if code.k == 0 {
        return None;
    }
    estimate_distance(&code, config.trials, seed).ok().map(|e| e.d_upper)
}

/// One CSV row per experiment, in the published column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub code: String,
    pub model: String,
    pub p: f64,
    pub rounds: usize,
    pub shots_x: usize,
    pub shots_z: usize,
    pub fails_x: usize,
    pub fails_z: usize,
    #[serde(rename = "L_X")]
    pub l_x: f64,
    #[serde(rename = "L_Z")]
    pub l_z: f64,
    #[serde(rename = "p_L")]
    pub p_l: f64,
    pub ci: f64,
    pub seed: u64,
}

impl From<&ExperimentResult> for CsvRecord {
    fn from(r: &ExperimentResult) -> Self {
        Self {
            code: r.code.clone(),
            model: r.model.kind.label().to_string(),
            p: r.model.p,
            rounds: r.rounds,
            shots_x: r.x.shots,
            shots_z: r.z.shots,
            fails_x: r.x.failures,
            fails_z: r.z.failures,
            l_x: r.l_x,
            l_z: r.l_z,
            p_l: r.p_l,
            ci: r.ci,
            seed: r.seed,
        }
    }
}

/// Appends results to `path`, writing the header only when the file is new or empty.
pub fn append_csv(path: &Path, results: &[ExperimentResult]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in results {
        writer.serialize(CsvRecord::from(r))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcode::load_fixture;
    use proptest::prelude::*;

    #[test]
    fn ci_formula() {
        let eta = 10_000usize;
        let f = 250usize;
        let expected = 1.645 / (eta as f64).sqrt() * ((eta - f) as f64 * f as f64 / (eta as f64).powi(2)).sqrt();
        assert_eq!(binomial_ci(eta, f), expected);
        assert_eq!(binomial_ci(100, 0), 0.0);
        let quarter = binomial_ci(4 * eta, 4 * f);
        assert!((quarter * 2.0 - expected).abs() < 1e-15);
    }

    #[test]
    fn combined_rate_formula() {
        assert_eq!(combined_rate(0.1, 0.2, 2), (0.1 + 0.2 - 0.02) / 2.0);
        assert_eq!(combined_rate(0.0, 0.0, 5), 0.0);
    }

    #[test]
    fn k_copy() {
        assert_eq!(k_copy_rate(0.0, 12), 0.0);
        assert!((k_copy_rate(8.0e-7, 10) - 8.0e-6).abs() < 1e-10);
    }

    #[test]
    fn overhead_of_smallest_fixture() {
        let code = load_fixture("d4-36").unwrap();
        let o = overhead(&code, 3);
        assert_eq!(o.n_anc, 32);
        assert_eq!(o.space, 68);
        assert_eq!(o.o_st, 68 * (o.d_x + o.d_z) * 3);
        assert_eq!(o.per_logical, o.o_st as f64 / 8.0);
    }

    #[test]
    fn zero_noise_gives_zero_rate() {
        let code = load_fixture("d4-36").unwrap();
        for kind in [NoiseKind::CodeCapacity, NoiseKind::Phenomenological, NoiseKind::Circuit] {
            let model = NoiseModel::new(kind, 0.0, 2).unwrap();
            let r = run_memory(&code, &model, &DecoderConfig::default(), &ShotPolicy::fixed(64), 3).unwrap();
            assert_eq!(r.p_l, 0.0);
            assert_eq!(r.x.shots, 64);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let code = load_fixture("d4-36").unwrap();
        let model = NoiseModel::new(NoiseKind::Phenomenological, 0.02, 3).unwrap();
        let policy = ShotPolicy {
            max_shots: 2000,
            target_failures: 30,
            batch: 256,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_memory(&code, &model, &DecoderConfig::default(), &policy, 17).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!((a.x, a.z), (b.x, b.z));
        assert!(a.x.failures > 0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/results.csv");
        let code = load_fixture("d4-36").unwrap();
        let model = NoiseModel::new(NoiseKind::CodeCapacity, 0.05, 1).unwrap();
        let r = run_memory(&code, &model, &DecoderConfig::default(), &ShotPolicy::fixed(100), 1).unwrap();
        append_csv(&path, std::slice::from_ref(&r)).unwrap();
        append_csv(&path, std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "code,model,p,rounds,shots_x,shots_z,fails_x,fails_z,L_X,L_Z,p_L,ci,seed"
        );
        let rows = read_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], CsvRecord::from(&r));
    }

    #[test]
    fn sweep_history_is_monotone_and_small_cells_behave() {
        let config = SweepConfig {
            groups: vec![4, 6],
            deltas: vec![3],
            targets: vec![(1, 1), (2, 2)],
            instances: 6,
            trials: 200,
            code_attempts: 200,
            seed: 5,
        };
        let cells = sweep_distances(&config);
        assert_eq!(cells.len(), 2);
        for cell in &cells {
            for w in cell.history.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
        assert_eq!(cells[0].max_distance, Some(1));
    }

    #[test]
    fn threshold_rejects_bad_bracket() {
        let code = load_fixture("d4-36").unwrap();
        let search = ThresholdSearch {
            kind: NoiseKind::Phenomenological,
            lo: 0.2,
            hi: 0.1,
            rel_width: 0.1,
            rounds: 3,
            policy: ShotPolicy::fixed(10),
            seed: 0,
        };
        assert!(matches!(
            pseudo_threshold(&code, &DecoderConfig::default(), &search),
            Err(HarnessError::Bracket(..))
        ));
    }

    proptest! {
        #[test]
        fn combined_rate_is_symmetric_and_bounded(a in 0.0f64..1.0, b in 0.0f64..1.0, n in 1usize..20) {
            let c = combined_rate(a, b, n);
            prop_assert_eq!(c, combined_rate(b, a, n));
            prop_assert!(c * n as f64 <= 1.0 + 1e-12);
            prop_assert!(c * n as f64 >= a.max(b) - 1e-12);
        }

        #[test]
        fn ci_shrinks_with_shots(eta in 10usize..10_000, frac in 0.01f64..0.99) {
            let f = ((eta as f64) * frac) as usize;
            prop_assert!(binomial_ci(4 * eta, 4 * f) <= binomial_ci(eta, f) / 2.0 + 1e-15);
        }
    }
}
