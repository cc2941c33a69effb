//! Scaled min-sum belief propagation with ordered-statistics post-processing.
//!
//! Soft values are log-likelihood ratios `ln(P(e=0)/P(e=1))`; a column is flipped
//! in the hard decision when its LLR is `<= 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BinaryMatrix, BitVector, Gf2Error};

/// LLR magnitude used for columns with prior 0.
const MAX_LLR: f64 = 100.0;

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("syndrome is not in the column space of the check matrix")]
    InconsistentSyndrome,
    #[error("invalid decoder configuration: {0}")]
    Config(String),
    #[error("priors: {0}")]
    Priors(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OsdStrategy {
    /// Information-set solution only.
    Order0,
    /// Also tries every weight-1 and weight-2 pattern on the top-λ non-pivot columns.
    CombinationSweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub alpha: f64,
    /// `None` means the number of columns.
    pub max_iters: Option<usize>,
    pub osd_order: usize,
    pub osd_strategy: OsdStrategy,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            alpha: 0.625,
            max_iters: None,
            osd_order: 9,
            osd_strategy: OsdStrategy::CombinationSweep,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<(), DecoderError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(DecoderError::Config(format!("alpha = {} not in (0, 1]", self.alpha)));
        }
        if self.max_iters == Some(0) {
            return Err(DecoderError::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult {
    pub hard_decision: BitVector,
    pub soft_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub error: BitVector,
    pub bp_converged: bool,
    pub iterations: usize,
    pub osd_used: bool,
}

/// Read-only decoding problem: check matrix, adjacency, and prior LLRs.
#[derive(Debug)]
pub struct DecodingGraph {
    h: BinaryMatrix,
    rank: usize,
    /// Column index of each edge, grouped by check.
    edge_var: Vec<usize>,
    /// `check_start[i]..check_start[i+1]` are the edges of check i.
    check_start: Vec<usize>,
    /// Edge ids incident to each column.
    var_edges: Vec<Vec<usize>>,
    col_supports: Vec<Vec<u32>>,
    prior_llr: Vec<f64>,
}

impl DecodingGraph {
    pub fn new(h: BinaryMatrix, priors: &[f64]) -> Result<Self, DecoderError> {
        if priors.len() != h.cols() {
            return Err(DecoderError::Priors(format!(
                "{} priors for {} columns",
                priors.len(),
                h.cols()
            )));
        }
        if let Some(p) = priors.iter().find(|p| !(0.0..=0.5).contains(*p)) {
            return Err(DecoderError::Priors(format!("prior {p} outside [0, 0.5]")));
        }
        let mut edge_var = Vec::with_capacity(h.nnz());
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut var_edges = vec![Vec::new(); h.cols()];
        for r in 0..h.rows() {
            check_start.push(edge_var.len());
            for c in h.row(r).iter_ones() {
                var_edges[c].push(edge_var.len());
                edge_var.push(c);
            }
        }
        check_start.push(edge_var.len());
        let col_supports = h
            .column_supports()
            .into_iter()
            .map(|c| c.into_iter().map(|r| r as u32).collect())
            .collect();
        Ok(Self {
            rank: h.rank(),
            h,
            edge_var,
            check_start,
            col_supports,
            var_edges,
            prior_llr: priors.iter().map(|&p| llr(p)).collect(),
        })
    }

    fn satisfies(&self, hard: &[bool], syndrome: &BitVector) -> bool {
        (0..self.h.rows()).all(|i| {
            let parity = self.edge_var[self.check_start[i]..self.check_start[i + 1]]
                .iter()
                .fold(false, |acc, &j| acc ^ hard[j]);
            parity == syndrome.get(i)
        })
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.h
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn prior_llr(&self) -> &[f64] {
        &self.prior_llr
    }
}

fn llr(p: f64) -> f64 {
    if p <= 0.0 {
        MAX_LLR
    } else {
        ((1.0 - p) / p).ln().min(MAX_LLR)
    }
}

/// BP+OSD decoder with its own message buffers.
#[derive(Clone, Debug)]
pub struct BpOsdDecoder {
    graph: Arc<DecodingGraph>,
    config: DecoderConfig,
    var_to_check: Vec<f64>,
    check_to_var: Vec<f64>,
}

impl BpOsdDecoder {
    pub fn new(graph: Arc<DecodingGraph>, config: DecoderConfig) -> Result<Self, DecoderError> {
        config.validate()?;
        let edges = graph.edge_var.len();
        Ok(Self {
            graph,
            config,
            var_to_check: vec![0.0; edges],
            check_to_var: vec![0.0; edges],
        })
    }

    pub fn graph(&self) -> &Arc<DecodingGraph> {
        &self.graph
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Parallel-schedule min-sum with check messages scaled by `alpha`. Stops early, with
    /// the same result, once the messages reach a fixed point.
    pub fn bp_decode(&mut self, syndrome: &BitVector) -> BpResult {
        let g = Arc::clone(&self.graph);
        let n = g.h.cols();
        assert_eq!(syndrome.len(), g.h.rows(), "syndrome length");
        let max_iters = self.config.max_iters.unwrap_or(n);
        let alpha = self.config.alpha;

        let mut soft = g.prior_llr.clone();
        let mut hard: Vec<bool> = soft.iter().map(|&l| l <= 0.0).collect();
        let finish = |hard: &[bool], soft: Vec<f64>, converged, iterations| BpResult {
            hard_decision: BitVector::from_bools(hard),
            soft_values: soft,
            converged,
            iterations,
        };
        if g.satisfies(&hard, syndrome) {
            return finish(&hard, soft, true, 0);
        }
        for (e, &j) in g.edge_var.iter().enumerate() {
            self.var_to_check[e] = g.prior_llr[j];
        }
        let mut previous = vec![f64::NAN; self.check_to_var.len()];
        for it in 1..=max_iters {
            for i in 0..g.h.rows() {
                let (lo, hi) = (g.check_start[i], g.check_start[i + 1]);
                let mut sign = syndrome.get(i);
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                for e in lo..hi {
                    let q = self.var_to_check[e];
                    sign ^= q < 0.0;
                    let a = q.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in lo..hi {
                    let q = self.var_to_check[e];
                    let s = sign ^ (q < 0.0);
                    let mag = alpha * if e == arg { min2 } else { min1 };
                    self.check_to_var[e] = if s { -mag } else { mag };
                }
            }
            for j in 0..n {
                let total = g.prior_llr[j] + g.var_edges[j].iter().map(|&e| self.check_to_var[e]).sum::<f64>();
                soft[j] = total;
                hard[j] = total <= 0.0;
                for &e in &g.var_edges[j] {
                    self.var_to_check[e] = total - self.check_to_var[e];
                }
            }
            if g.satisfies(&hard, syndrome) {
                return finish(&hard, soft, true, it);
            }
            if previous == self.check_to_var {
                return finish(&hard, soft, false, max_iters);
            }
            previous.copy_from_slice(&self.check_to_var);
        }
        finish(&hard, soft, false, max_iters)
    }

    /// OSD on the given soft values. The output always satisfies `H·e = s`.
    pub fn osd_postprocess(&self, soft_values: &[f64], syndrome: &BitVector) -> Result<BitVector, DecoderError> {
        let g = &self.graph;
        let h = &g.h;
        let n = h.cols();
        let rows = h.rows();
        let order = reliability_order(soft_values);

        // Greedy information set: scan columns in order, keep those independent of
        // the ones already kept, stop at rank(H).
        let mut echelon = Echelon::new(rows);
        let mut pivots = Vec::with_capacity(g.rank);
        let mut candidates = Vec::new();
        let want = match self.config.osd_strategy {
            OsdStrategy::Order0 => 0,
            OsdStrategy::CombinationSweep => self.config.osd_order,
        };
        for &c in &order {
            if pivots.len() == g.rank {
                if candidates.len() == want {
                    break;
                }
                candidates.push(c);
                continue;
            }
            if echelon.insert(&g.col_supports[c]) {
                pivots.push(c);
            } else if candidates.len() < want {
                candidates.push(c);
            }
        }

        // Reduce [H_I | H_T | s]; the first rank(H) columns are independent.
        let r = pivots.len();
        let width = r + candidates.len() + 1;
        let mut sub = BinaryMatrix::zeros(rows, width);
        for (k, &c) in pivots.iter().chain(&candidates).enumerate() {
            for &row in &g.col_supports[c] {
                sub.set(row as usize, k, true);
            }
        }
        for i in syndrome.iter_ones() {
            sub.set(i, width - 1, true);
        }
        let (reduced, lead) = sub.rref();
        if lead.iter().any(|&c| c == width - 1) {
            return Err(DecoderError::InconsistentSyndrome);
        }
        debug_assert!(lead.iter().take(r).enumerate().all(|(i, &c)| i == c));

        let base: Vec<bool> = (0..r).map(|i| reduced.get(i, width - 1)).collect();
        let to_error = |pivot_bits: &[bool], extra: &[usize]| {
            let mut e = BitVector::zeros(n);
            for (i, &b) in pivot_bits.iter().enumerate() {
                if b {
                    e.set(pivots[i], true);
                }
            }
            for &t in extra {
                e.flip(candidates[t]);
            }
            e
        };
        let mut best = to_error(&base, &[]);
        if candidates.is_empty() {
            return Ok(best);
        }
        let cost = |e: &BitVector| e.iter_ones().map(|j| g.prior_llr[j]).sum::<f64>();
        let mut best_cost = cost(&best);
        let mut try_pattern = |extra: &[usize]| {
            let mut bits = base.clone();
            for &t in extra {
                for (i, b) in bits.iter_mut().enumerate() {
                    if reduced.get(i, r + t) {
                        *b ^= true;
                    }
                }
            }
            let e = to_error(&bits, extra);
            let c = cost(&e);
            if c < best_cost {
                best_cost = c;
                best = e;
            }
        };
        for a in 0..candidates.len() {
            try_pattern(&[a]);
            for b in a + 1..candidates.len() {
                try_pattern(&[a, b]);
            }
        }
        Ok(best)
    }

    /// BP, then OSD if BP does not converge.
    pub fn decode(&mut self, syndrome: &BitVector) -> Result<DecodeResult, DecoderError> {
        let bp = self.bp_decode(syndrome);
        if bp.converged {
            return Ok(DecodeResult {
                error: bp.hard_decision,
                bp_converged: true,
                iterations: bp.iterations,
                osd_used: false,
            });
        }
        let error = self.osd_postprocess(&bp.soft_values, syndrome)?;
        Ok(DecodeResult {
            error,
            bp_converged: false,
            iterations: bp.iterations,
            osd_used: true,
        })
    }

    /// `logical_action · e` for the decoded `e`.
    pub fn decode_to_logical(
        &mut self,
        logical_action: &BinaryMatrix,
        syndrome: &BitVector,
    ) -> Result<BitVector, DecoderError> {
        let e = self.decode(syndrome)?.error;
        Ok(logical_action.mul_vec(&e))
    }
}

/// Row-echelon set of column vectors keyed by lowest set bit, for independence tests.
struct Echelon {
    words: usize,
    lead: Vec<Option<usize>>,
    basis: Vec<Vec<u64>>,
}

impl Echelon {
    fn new(len: usize) -> Self {
        Self {
            words: len.div_ceil(64),
            lead: vec![None; len],
            basis: Vec::new(),
        }
    }

    /// Adds the vector with the given support if independent.
    fn insert(&mut self, support: &[u32]) -> bool {
        let mut v = vec![0u64; self.words];
        for &i in support {
            v[i as usize / 64] ^= 1 << (i % 64);
        }
        let mut w = 0;
        while w < self.words {
            if v[w] == 0 {
                w += 1;
                continue;
            }
            let bit = w * 64 + v[w].trailing_zeros() as usize;
            match self.lead[bit] {
                Some(b) => {
                    for (x, y) in v[w..].iter_mut().zip(&self.basis[b][w..]) {
                        *x ^= y;
                    }
                }
                None => {
                    self.lead[bit] = Some(self.basis.len());
                    self.basis.push(v);
                    return true;
                }
            }
        }
        false
    }
}

/// Column order from most to least likely flipped: ascending LLR, ties by ascending index.
pub fn reliability_order(soft_values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..soft_values.len()).collect();
    order.sort_by(|&a, &b| soft_values[a].total_cmp(&soft_values[b]).then(a.cmp(&b)));
    order
}

impl From<Gf2Error> for DecoderError {
    fn from(e: Gf2Error) -> Self {
        match e {
            Gf2Error::Inconsistent => DecoderError::InconsistentSyndrome,
            other => DecoderError::Config(other.to_string()),
        }
    }
}
