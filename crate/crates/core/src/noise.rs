//! Decoding problems for code-capacity, phenomenological and circuit-level noise.
//!
//! A memory experiment in basis `Z` prepares and reads out the data in the Z basis,
//! so the detectors come from `H_Z` and the observables from `L_Z`; only X-type faults
//! matter. The X-basis experiment is the same with the roles swapped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BinaryMatrix, BitVector};
use crate::qcode::{CssCode, Pauli};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("physical error rate {0} outside [0, 0.5)")]
    Rate(f64),
    #[error("rounds must be at least 1")]
    Rounds,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    CodeCapacity,
    Phenomenological,
    Circuit,
}

impl NoiseKind {
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::CodeCapacity => "capacity",
            NoiseKind::Phenomenological => "phenom",
            NoiseKind::Circuit => "circuit",
        }
    }
}

/// How a two-qubit gate fault is split into flip-relevant mechanisms on (control,
/// target, both).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoQubitNoise {
    /// Three mechanisms with prior p/3 each.
    Split,
    /// Marginals of uniform two-qubit depolarizing noise: 4p/15 each.
    Depolarizing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p: f64,
    pub rounds: usize,
    pub idle_factor: f64,
    pub two_qubit: TwoQubitNoise,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, p: f64, rounds: usize) -> Result<Self, NoiseError> {
        if !(0.0..0.5).contains(&p) {
            return Err(NoiseError::Rate(p));
        }
        if rounds == 0 {
            return Err(NoiseError::Rounds);
        }
        Ok(Self {
            kind,
            p,
            rounds,
            idle_factor: 0.1,
            two_qubit: TwoQubitNoise::Split,
        })
    }

    fn gate_prior(&self) -> f64 {
        match self.two_qubit {
            TwoQubitNoise::Split => self.p / 3.0,
            TwoQubitNoise::Depolarizing => 4.0 * self.p / 15.0,
        }
    }
}

/// Where a column of the space-time matrix comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mechanism {
    Data { qubit: usize, round: usize },
    Measurement { check: usize, round: usize },
    Circuit(Fault),
}

#[derive(Clone, Debug)]
pub struct SpaceTimeCheckMatrix {
    pub memory: Pauli,
    pub kind: NoiseKind,
    pub rounds: usize,
    pub detectors: BinaryMatrix,
    pub logical_action: BinaryMatrix,
    pub priors: Vec<f64>,
    /// Representative mechanism per column.
    pub mechanisms: Vec<Mechanism>,
    /// Number of raw mechanisms merged into each column.
    pub multiplicity: Vec<usize>,
    det_supports: Vec<Vec<u32>>,
    obs_supports: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shot {
    pub detectors: BitVector,
    pub logicals: BitVector,
}

/// XOR of two independent events.
pub fn merge_priors(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Detector support, observable support, prior, representative mechanism, multiplicity.
type Column = (Vec<u32>, Vec<u32>, f64, Mechanism, usize);

impl SpaceTimeCheckMatrix {
    fn from_columns(
        memory: Pauli,
        kind: NoiseKind,
        rounds: usize,
        num_detectors: usize,
        num_observables: usize,
        columns: Vec<Column>,
    ) -> Self {
        let cols = columns.len();
        let mut detectors = BinaryMatrix::zeros(num_detectors, cols);
        let mut logical_action = BinaryMatrix::zeros(num_observables, cols);
        let mut det_supports = Vec::with_capacity(cols);
        let mut obs_supports = Vec::with_capacity(cols);
        let mut priors = Vec::with_capacity(cols);
        let mut mechanisms = Vec::with_capacity(cols);
        let mut multiplicity = Vec::with_capacity(cols);
        for (c, (det, obs, p, mech, mult)) in columns.into_iter().enumerate() {
            for &d in &det {
                detectors.set(d as usize, c, true);
            }
            for &o in &obs {
                logical_action.set(o as usize, c, true);
            }
            det_supports.push(det);
            obs_supports.push(obs);
            priors.push(p);
            mechanisms.push(mech);
            multiplicity.push(mult);
        }
        Self {
            memory,
            kind,
            rounds,
            detectors,
            logical_action,
            priors,
            mechanisms,
            multiplicity,
            det_supports,
            obs_supports,
        }
    }

    pub fn num_columns(&self) -> usize {
        self.priors.len()
    }

    /// Detector and logical signature of one column.
    pub fn column_signature(&self, c: usize) -> (Vec<usize>, Vec<usize>) {
        (
            self.det_supports[c].iter().map(|&d| d as usize).collect(),
            self.obs_supports[c].iter().map(|&o| o as usize).collect(),
        )
    }

    /// Independent Bernoulli draw per column.
    pub fn sample_faults<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.priors
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0 && rng.gen::<f64>() < p)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn outcome(&self, faults: &[usize]) -> Shot {
        let mut detectors = BitVector::zeros(self.detectors.rows());
        let mut logicals = BitVector::zeros(self.logical_action.rows());
        for &c in faults {
            for &d in &self.det_supports[c] {
                detectors.flip(d as usize);
            }
            for &o in &self.obs_supports[c] {
                logicals.flip(o as usize);
            }
        }
        Shot { detectors, logicals }
    }

    pub fn sample_shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Shot {
        self.outcome(&self.sample_faults(rng))
    }

    /// Writes `detectors.alist`, `logicals.alist` and `priors.json` into `dir`.
    pub fn write_bundle(&self, dir: &Path) -> Result<(), NoiseError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("detectors.alist"), self.detectors.to_alist_string())?;
        std::fs::write(dir.join("logicals.alist"), self.logical_action.to_alist_string())?;
        std::fs::write(dir.join("priors.json"), serde_json::to_string(&self.priors)?)?;
        Ok(())
    }
}

pub fn build_code_capacity(code: &CssCode, memory: Pauli, p: f64) -> SpaceTimeCheckMatrix {
    let (h, logical) = code.checks(memory);
    let det = h.column_supports();
    let obs = logical.column_supports();
    let columns = (0..code.n)
        .map(|q| {
            (
                to_u32(&det[q]),
                to_u32(&obs[q]),
                p,
                Mechanism::Data { qubit: q, round: 0 },
                1,
            )
        })
        .collect();
    SpaceTimeCheckMatrix::from_columns(memory, NoiseKind::CodeCapacity, 1, h.rows(), logical.rows(), columns)
}

/// `rounds` noisy rounds followed by one noiseless readout round. Detector `(c, t)` has
/// index `t·rows + c`; data columns come first, ordered by `(t, q)`, then measurement
/// columns ordered by `(t, c)`.
pub fn build_phenomenological(code: &CssCode, memory: Pauli, p: f64, rounds: usize) -> SpaceTimeCheckMatrix {
    let (h, logical) = code.checks(memory);
    let m = h.rows();
    let det = h.column_supports();
    let obs = logical.column_supports();
    let mut columns = Vec::with_capacity((code.n + m) * rounds);
    for t in 0..rounds {
        for q in 0..code.n {
            let d = det[q].iter().map(|&c| (t * m + c) as u32).collect();
            columns.push((d, to_u32(&obs[q]), p, Mechanism::Data { qubit: q, round: t }, 1));
        }
    }
    for t in 0..rounds {
        for c in 0..m {
            let d = vec![(t * m + c) as u32, ((t + 1) * m + c) as u32];
            columns.push((d, Vec::new(), p, Mechanism::Measurement { check: c, round: t }, 1));
        }
    }
    SpaceTimeCheckMatrix::from_columns(
        memory,
        NoiseKind::Phenomenological,
        rounds,
        m * (rounds + 1),
        logical.rows(),
        columns,
    )
}

pub fn build_problem(code: &CssCode, memory: Pauli, model: &NoiseModel) -> SpaceTimeCheckMatrix {
    match model.kind {
        NoiseKind::CodeCapacity => build_code_capacity(code, memory, model.p),
        NoiseKind::Phenomenological => build_phenomenological(code, memory, model.p, model.rounds),
        NoiseKind::Circuit => circuit_to_checkmatrix(&build_circuit(code, memory, model.rounds), model),
    }
}

fn to_u32(v: &[usize]) -> Vec<u32> {
    v.iter().map(|&x| x as u32).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Reset { qubit: usize, basis: Pauli },
    Cnot { control: usize, target: usize },
    /// Appends one bit to the measurement record.
    Measure { qubit: usize, basis: Pauli, record: usize },
    Idle { qubit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    Reset,
    Gate,
    Measure,
    Idle,
}

/// A flip of the memory-relevant type on one or two qubits, right after operation
/// `op` (or right before it, for measurements).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub op: usize,
    pub kind: FaultKind,
    pub qubits: [usize; 2],
    pub two: bool,
    pub prior: f64,
}

impl Fault {
    fn flipped(&self) -> &[usize] {
        if self.two {
            &self.qubits
        } else {
            &self.qubits[..1]
        }
    }
}

/// Syndrome-extraction circuit for a memory experiment. Qubits are numbered data
/// first, then one ancilla per Z check, then one per X check.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub memory: Pauli,
    pub rounds: usize,
    pub num_qubits: usize,
    pub num_data: usize,
    pub z_ancillas: Vec<usize>,
    pub x_ancillas: Vec<usize>,
    /// Operations in execution order with their timestep.
    pub ops: Vec<(usize, Op)>,
    pub num_timesteps: usize,
    pub num_measurements: usize,
    /// Measurement record indices whose parity is deterministic without faults.
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
    pub z_depth: usize,
    pub x_depth: usize,
}

/// Proper edge coloring of a bipartite graph with max-degree colors, by alternating-path
/// recoloring. Edges are processed in the given order. Returns per-edge colors and the
/// number of colors.
pub fn bipartite_edge_coloring(left: usize, right: usize, edges: &[(usize, usize)]) -> (Vec<usize>, usize) {
    let mut degree = vec![0usize; left + right];
    for &(u, v) in edges {
        degree[u] += 1;
        degree[left + v] += 1;
    }
    let colors = degree.iter().copied().max().unwrap_or(0);
    let mut nbr: Vec<Vec<Option<usize>>> = vec![vec![None; colors]; left + right];
    for &(u, v) in edges {
        let v = left + v;
        let a = (0..colors).find(|&c| nbr[u][c].is_none()).expect("free color at left vertex");
        let b = (0..colors).find(|&c| nbr[v][c].is_none()).expect("free color at right vertex");
        if nbr[v][a].is_some() {
            // swap a and b along the path leaving v on color a
            let mut path = Vec::new();
            let (mut x, mut col) = (v, a);
            while let Some(y) = nbr[x][col] {
                path.push((x, y, col));
                x = y;
                col = if col == a { b } else { a };
            }
            for &(x, y, col) in &path {
                nbr[x][col] = None;
                nbr[y][col] = None;
            }
            for &(x, y, col) in &path {
                let swapped = if col == a { b } else { a };
                nbr[x][swapped] = Some(y);
                nbr[y][swapped] = Some(x);
            }
        }
        nbr[u][a] = Some(v);
        nbr[v][a] = Some(u);
    }
    let assigned = edges
        .iter()
        .map(|&(u, v)| (0..colors).find(|&c| nbr[u][c] == Some(left + v)).unwrap())
        .collect();
    (assigned, colors)
}

/// CNOT layers for one check type: `layers[k]` lists `(check, qubit)` pairs.
fn schedule(h: &BinaryMatrix) -> Vec<Vec<(usize, usize)>> {
    let edges: Vec<(usize, usize)> = (0..h.rows())
        .flat_map(|c| h.row(c).iter_ones().map(move |q| (c, q)).collect::<Vec<_>>())
        .collect();
    let (colors, depth) = bipartite_edge_coloring(h.rows(), h.cols(), &edges);
    let mut layers = vec![Vec::new(); depth];
    for (&e, &k) in edges.iter().zip(&colors) {
        layers[k].push(e);
    }
    layers
}

struct CircuitBuilder {
    ops: Vec<(usize, Op)>,
    t: usize,
    records: usize,
}

impl CircuitBuilder {
    /// Emits one timestep: `acted` ops plus idles on every other `active` qubit.
    fn step(&mut self, acted: Vec<Op>, active: &[usize]) {
        let mut busy = std::collections::HashSet::new();
        for op in &acted {
            match *op {
                Op::Cnot { control, target } => {
                    busy.insert(control);
                    busy.insert(target);
                }
                Op::Reset { qubit, .. } | Op::Measure { qubit, .. } | Op::Idle { qubit } => {
                    busy.insert(qubit);
                }
            }
        }
        for op in acted {
            self.ops.push((self.t, op));
        }
        for &q in active {
            if !busy.contains(&q) {
                self.ops.push((self.t, Op::Idle { qubit: q }));
            }
        }
        self.t += 1;
    }

    fn measure(&mut self, qubit: usize, basis: Pauli) -> Op {
        self.records += 1;
        Op::Measure {
            qubit,
            basis,
            record: self.records - 1,
        }
    }
}

/// Each cycle runs a Z-check round then an X-check round; each round resets its
/// ancillas, applies the CNOT layers, and measures. Z checks use data→ancilla CNOTs and
/// Z readout; X checks use ancilla→data CNOTs with |+> preparation and X readout.
pub fn build_circuit(code: &CssCode, memory: Pauli, rounds: usize) -> Circuit {
    let n = code.n;
    let z_ancillas: Vec<usize> = (n..n + code.hz.rows()).collect();
    let x_ancillas: Vec<usize> = (n + code.hz.rows()..n + code.hz.rows() + code.hx.rows()).collect();
    let num_qubits = n + z_ancillas.len() + x_ancillas.len();
    let z_layers = schedule(&code.hz);
    let x_layers = schedule(&code.hx);
    let data: Vec<usize> = (0..n).collect();

    let mut b = CircuitBuilder {
        ops: Vec::new(),
        t: 0,
        records: 0,
    };
    b.step(data.iter().map(|&q| Op::Reset { qubit: q, basis: memory }).collect(), &[]);
    let mut z_records = Vec::with_capacity(rounds);
    let mut x_records = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        for (basis, ancillas, layers, records) in [
            (Pauli::Z, &z_ancillas, &z_layers, &mut z_records),
            (Pauli::X, &x_ancillas, &x_layers, &mut x_records),
        ] {
            let active: Vec<usize> = data.iter().chain(ancillas.iter()).copied().collect();
            b.step(ancillas.iter().map(|&a| Op::Reset { qubit: a, basis }).collect(), &data);
            for layer in layers {
                let ops = layer
                    .iter()
                    .map(|&(c, q)| match basis {
                        Pauli::Z => Op::Cnot {
                            control: q,
                            target: ancillas[c],
                        },
                        Pauli::X => Op::Cnot {
                            control: ancillas[c],
                            target: q,
                        },
                    })
                    .collect();
                b.step(ops, &active);
            }
            let first = b.records;
            let ops = ancillas.iter().map(|&a| b.measure(a, basis)).collect();
            b.step(ops, &data);
            records.push(first);
        }
    }
    let data_first = b.records;
    let ops = data.iter().map(|&q| b.measure(q, memory)).collect();
    b.step(ops, &[]);

    let (h, logical) = code.checks(memory);
    let per_round = match memory {
        Pauli::Z => &z_records,
        Pauli::X => &x_records,
    };
    let mut detectors = Vec::with_capacity(h.rows() * (rounds + 1));
    for t in 0..rounds {
        for c in 0..h.rows() {
            let mut d = vec![per_round[t] + c];
            if t > 0 {
                d.push(per_round[t - 1] + c);
            }
            detectors.push(d);
        }
    }
    for c in 0..h.rows() {
        let mut d = vec![per_round[rounds - 1] + c];
        d.extend(h.row(c).iter_ones().map(|q| data_first + q));
        detectors.push(d);
    }
    let observables = (0..logical.rows())
        .map(|i| logical.row(i).iter_ones().map(|q| data_first + q).collect())
        .collect();
    Circuit {
        memory,
        rounds,
        num_qubits,
        num_data: n,
        z_ancillas,
        x_ancillas,
        ops: b.ops,
        num_timesteps: b.t,
        num_measurements: b.records,
        detectors,
        observables,
        z_depth: z_layers.len(),
        x_depth: x_layers.len(),
    }
}

impl Circuit {
    /// CNOT layers per cycle.
    pub fn cnot_depth(&self) -> usize {
        self.z_depth + self.x_depth
    }

    /// Timesteps per cycle, including preparation and measurement.
    pub fn cycle_depth(&self) -> usize {
        self.cnot_depth() + 4
    }

    pub fn num_ancillas(&self) -> usize {
        self.z_ancillas.len() + self.x_ancillas.len()
    }

    /// One line per operation: `<timestep> <op> <qubits>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(t, op) in &self.ops {
            let _ = match op {
                Op::Reset { qubit, basis } => writeln!(out, "{t} R{basis:?} {qubit}"),
                Op::Cnot { control, target } => writeln!(out, "{t} CX {control} {target}"),
                Op::Measure { qubit, basis, .. } => writeln!(out, "{t} M{basis:?} {qubit}"),
                Op::Idle { qubit } => writeln!(out, "{t} I {qubit}"),
            };
        }
        out
    }

    /// Fault mechanisms attached to operation `i`.
    pub fn op_faults(&self, i: usize, model: &NoiseModel) -> Vec<Fault> {
        let single = |kind, q, prior| Fault {
            op: i,
            kind,
            qubits: [q, q],
            two: false,
            prior,
        };
        match self.ops[i].1 {
            Op::Reset { qubit, .. } => vec![single(FaultKind::Reset, qubit, model.p)],
            Op::Measure { qubit, .. } => vec![single(FaultKind::Measure, qubit, model.p)],
            Op::Idle { qubit } => vec![single(FaultKind::Idle, qubit, model.p * model.idle_factor)],
            Op::Cnot { control, target } => {
                let p = model.gate_prior();
                vec![
                    single(FaultKind::Gate, control, p),
                    single(FaultKind::Gate, target, p),
                    Fault {
                        op: i,
                        kind: FaultKind::Gate,
                        qubits: [control, target],
                        two: true,
                        prior: p,
                    },
                ]
            }
        }
    }

    /// Forward Pauli-frame simulation with the given faults injected. Returns flipped
    /// detectors and observables.
    pub fn simulate(&self, faults: &[Fault]) -> (BitVector, BitVector) {
        let mut at_op: HashMap<usize, Vec<&Fault>> = HashMap::new();
        for f in faults {
            at_op.entry(f.op).or_default().push(f);
        }
        let mut frame = vec![false; self.num_qubits];
        let mut record = vec![false; self.num_measurements];
        for (i, &(_, op)) in self.ops.iter().enumerate() {
            let here = at_op.get(&i);
            let inject = |frame: &mut Vec<bool>, before: bool| {
                for f in here.into_iter().flatten() {
                    if (f.kind == FaultKind::Measure) == before {
                        for &q in f.flipped() {
                            frame[q] ^= true;
                        }
                    }
                }
            };
            inject(&mut frame, true);
            match op {
                Op::Reset { qubit, .. } => frame[qubit] = false,
                Op::Cnot { control, target } => match self.memory {
                    Pauli::Z => frame[target] ^= frame[control],
                    Pauli::X => frame[control] ^= frame[target],
                },
                Op::Measure { qubit, basis, record: m } => {
                    record[m] = basis == self.memory && frame[qubit];
                }
                Op::Idle { .. } => {}
            }
            inject(&mut frame, false);
        }
        let parity = |sets: &[Vec<usize>]| {
            BitVector::from_bools(&sets.iter().map(|s| s.iter().fold(false, |acc, &m| acc ^ record[m])).collect::<Vec<_>>())
        };
        (parity(&self.detectors), parity(&self.observables))
    }
}

/// Detector error model by backward propagation of output sensitivities. Faults with no
/// effect are dropped and faults with identical signatures are merged.
pub fn circuit_to_checkmatrix(circuit: &Circuit, model: &NoiseModel) -> SpaceTimeCheckMatrix {
    let num_det = circuit.detectors.len();
    let num_out = num_det + circuit.observables.len();
    let mut by_record: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_measurements];
    for (o, set) in circuit.detectors.iter().chain(&circuit.observables).enumerate() {
        for &m in set {
            by_record[m].push(o);
        }
    }
    let mut sens = vec![BitVector::zeros(num_out); circuit.num_qubits];
    let mut raw: Vec<(BitVector, Fault)> = Vec::new();
    for i in (0..circuit.ops.len()).rev() {
        let faults = circuit.op_faults(i, model);
        let signature = |sens: &[BitVector], f: &Fault| {
            let mut s = sens[f.qubits[0]].clone();
            if f.two {
                s.xor_assign(&sens[f.qubits[1]]);
            }
            s
        };
        for f in faults.iter().filter(|f| f.kind != FaultKind::Measure) {
            raw.push((signature(&sens, f), *f));
        }
        match circuit.ops[i].1 {
            Op::Reset { qubit, .. } => sens[qubit].clear(),
            Op::Cnot { control, target } => {
                let (src, dst) = match circuit.memory {
                    Pauli::Z => (target, control),
                    Pauli::X => (control, target),
                };
                let s = sens[src].clone();
                sens[dst].xor_assign(&s);
            }
            Op::Measure { qubit, basis, record } => {
                if basis == circuit.memory {
                    for &o in &by_record[record] {
                        sens[qubit].flip(o);
                    }
                }
            }
            Op::Idle { .. } => {}
        }
        for f in faults.iter().filter(|f| f.kind == FaultKind::Measure) {
            raw.push((signature(&sens, f), *f));
        }
    }
    raw.reverse();

    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut columns: Vec<Column> = Vec::new();
    for (sig, fault) in raw {
        if sig.is_zero() {
            continue;
        }
        match index.get(sig.words()) {
            Some(&c) => {
                columns[c].2 = merge_priors(columns[c].2, fault.prior);
                columns[c].4 += 1;
            }
            None => {
                index.insert(sig.words().to_vec(), columns.len());
                let mut det = Vec::new();
                let mut obs = Vec::new();
                for o in sig.iter_ones() {
                    if o < num_det {
                        det.push(o as u32);
                    } else {
                        obs.push((o - num_det) as u32);
                    }
                }
                columns.push((det, obs, fault.prior, Mechanism::Circuit(fault), 1));
            }
        }
    }
    SpaceTimeCheckMatrix::from_columns(
        circuit.memory,
        NoiseKind::Circuit,
        circuit.rounds,
        num_det,
        circuit.observables.len(),
        columns,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcode::load_fixture;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn small() -> CssCode {
        load_fixture("d4-36").unwrap()
    }

    #[test]
    fn phenomenological_shape() {
        let code = small();
        for rounds in [1, 3] {
            let m = build_phenomenological(&code, Pauli::Z, 0.01, rounds);
            assert_eq!(m.num_columns(), code.n * rounds + code.hz.rows() * rounds);
            assert_eq!(m.detectors.rows(), code.hz.rows() * (rounds + 1));
        }
        let zero = build_phenomenological(&code, Pauli::X, 0.0, 1);
        let mut rng = stream(0, 0);
        assert!(zero.sample_faults(&mut rng).is_empty());
        assert!(zero.sample_shot(&mut rng).detectors.is_zero());
    }

    #[test]
    fn measurement_error_flips_two_detectors() {
        let code = small();
        let m = build_phenomenological(&code, Pauli::Z, 0.01, 3);
        let col = code.n * 3 + code.hz.rows() + 5;
        assert_eq!(m.mechanisms[col], Mechanism::Measurement { check: 5, round: 1 });
        let shot = m.outcome(&[col]);
        assert_eq!(shot.detectors.support(), vec![code.hz.rows() + 5, 2 * code.hz.rows() + 5]);
        assert!(shot.logicals.is_zero());
    }

    #[test]
    fn one_round_without_measurement_errors_is_code_capacity() {
        let code = small();
        for memory in [Pauli::X, Pauli::Z] {
            let ph = build_phenomenological(&code, memory, 0.02, 1);
            let cc = build_code_capacity(&code, memory, 0.02);
            let (h, l) = code.checks(memory);
            let data: Vec<usize> = (0..code.n).collect();
            let rows: Vec<usize> = (0..h.rows()).collect();
            assert_eq!(ph.detectors.select_columns(&data).select_rows(&rows), cc.detectors);
            assert_eq!(ph.logical_action.select_columns(&data), cc.logical_action);
            assert_eq!(&cc.detectors, h);
            assert_eq!(&cc.logical_action, l);
        }
    }

    #[test]
    fn merge_rule() {
        assert!((merge_priors(0.1, 0.2) - 0.26).abs() < 1e-15);
        assert_eq!(merge_priors(0.0, 0.3), 0.3);
    }

    #[test]
    fn edge_coloring_uses_max_degree_colors() {
        let code = small();
        for h in [&code.hx, &code.hz] {
            let layers = schedule(h);
            let max_row = h.row_weights().into_iter().max().unwrap();
            let max_col = h.col_weights().into_iter().max().unwrap();
            assert_eq!(layers.len(), max_row.max(max_col));
            let mut seen = 0;
            for layer in &layers {
                let checks: std::collections::HashSet<_> = layer.iter().map(|e| e.0).collect();
                let qubits: std::collections::HashSet<_> = layer.iter().map(|e| e.1).collect();
                assert_eq!(checks.len(), layer.len());
                assert_eq!(qubits.len(), layer.len());
                seen += layer.len();
            }
            assert_eq!(seen, h.nnz());
        }
    }

    #[test]
    fn circuit_structure() {
        let code = small();
        let c = build_circuit(&code, Pauli::Z, 2);
        assert_eq!(c.num_ancillas(), code.hx.rows() + code.hz.rows());
        assert_eq!(c.num_ancillas(), 32);
        assert_eq!(c.detectors.len(), code.hz.rows() * 3);
        let mut t = usize::MAX;
        let mut used = std::collections::HashSet::new();
        for &(step, op) in &c.ops {
            if step != t {
                t = step;
                used.clear();
            }
            let qs = match op {
                Op::Cnot { control, target } => vec![control, target],
                Op::Reset { qubit, .. } | Op::Measure { qubit, .. } | Op::Idle { qubit } => vec![qubit],
            };
            for q in qs {
                assert!(used.insert(q), "qubit {q} used twice at timestep {t}");
            }
        }
        let dx = code.hx.row_weights().into_iter().chain(code.hx.col_weights()).max().unwrap();
        let dz = code.hz.row_weights().into_iter().chain(code.hz.col_weights()).max().unwrap();
        assert!(c.cnot_depth() <= dx + dz);
        assert_eq!(c.to_text().lines().count(), c.ops.len());
    }

    #[test]
    fn noiseless_circuit_has_no_detection_events() {
        let code = small();
        for memory in [Pauli::X, Pauli::Z] {
            let c = build_circuit(&code, memory, 2);
            let (d, o) = c.simulate(&[]);
            assert!(d.is_zero() && o.is_zero());
            let model = NoiseModel::new(NoiseKind::Circuit, 0.0, 2).unwrap();
            let m = circuit_to_checkmatrix(&c, &model);
            assert!(m.priors.iter().all(|&p| p == 0.0));
            assert!(m.sample_shot(&mut stream(1, 0)).detectors.is_zero());
        }
    }

    #[test]
    fn ancilla_flip_before_measurement_is_a_measurement_error() {
        let code = small();
        let c = build_circuit(&code, Pauli::Z, 3);
        let rows = code.hz.rows();
        // the Z-check measurement of check 4 in cycle 1
        let i = c
            .ops
            .iter()
            .position(|&(_, op)| matches!(op, Op::Measure { qubit, basis: Pauli::Z, record } if qubit == c.z_ancillas[4] && record >= rows + code.hx.rows()))
            .unwrap();
        let model = NoiseModel::new(NoiseKind::Circuit, 0.01, 3).unwrap();
        let fault = c.op_faults(i, &model)[0];
        let (d, o) = c.simulate(&[fault]);
        assert_eq!(d.support(), vec![rows + 4, 2 * rows + 4]);
        assert!(o.is_zero());
    }

    #[test]
    fn every_column_matches_forward_injection() {
        let code = small();
        for memory in [Pauli::X, Pauli::Z] {
            let c = build_circuit(&code, memory, 2);
            let model = NoiseModel::new(NoiseKind::Circuit, 0.001, 2).unwrap();
            let m = circuit_to_checkmatrix(&c, &model);
            for col in 0..m.num_columns() {
                let Mechanism::Circuit(f) = m.mechanisms[col] else { panic!() };
                let (d, o) = c.simulate(&[f]);
                assert_eq!((d.support(), o.support()), m.column_signature(col), "column {col}");
            }
            let total: usize = m.multiplicity.iter().sum();
            assert!(total <= (0..c.ops.len()).map(|i| c.op_faults(i, &model).len()).sum());
        }
    }

    #[test]
    fn sampling_frequencies_match_priors() {
        let code = small();
        let m = build_phenomenological(&code, Pauli::Z, 0.05, 1);
        let shots = 100_000;
        let mut counts = vec![0usize; m.num_columns()];
        let mut rng = stream(9, 0);
        for _ in 0..shots {
            for c in m.sample_faults(&mut rng) {
                counts[c] += 1;
            }
        }
        let sigma = (shots as f64 * 0.05 * 0.95).sqrt();
        for &k in &counts {
            assert!((k as f64 - shots as f64 * 0.05).abs() < 4.5 * sigma);
        }
    }

    proptest! {
        #[test]
        fn outcome_is_linear(a in proptest::collection::btree_set(0usize..52, 0..10),
                             b in proptest::collection::btree_set(0usize..52, 0..10)) {
            let m = build_phenomenological(&load_fixture("d4-36").unwrap(), Pauli::X, 0.01, 1);
            prop_assert_eq!(m.num_columns(), 52);
            let sa = m.outcome(&a.iter().copied().collect::<Vec<_>>());
            let sb = m.outcome(&b.iter().copied().collect::<Vec<_>>());
            let sym: Vec<usize> = a.symmetric_difference(&b).copied().collect();
            let sab = m.outcome(&sym);
            prop_assert_eq!(sab.detectors, sa.detectors.xor(&sb.detectors));
            prop_assert_eq!(sab.logicals, sa.logicals.xor(&sb.logicals));
        }

        #[test]
        fn multiple_faults_superpose_in_the_circuit(picks in proptest::collection::vec(0usize..10_000, 1..6)) {
            let code = load_fixture("d4-36").unwrap();
            let c = build_circuit(&code, Pauli::Z, 2);
            let model = NoiseModel::new(NoiseKind::Circuit, 0.001, 2).unwrap();
            let m = circuit_to_checkmatrix(&c, &model);
            let cols: Vec<usize> = picks.iter().map(|&x| x % m.num_columns()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            let faults: Vec<Fault> = cols.iter().map(|&k| match m.mechanisms[k] { Mechanism::Circuit(f) => f, _ => unreachable!() }).collect();
            let (d, o) = c.simulate(&faults);
            let shot = m.outcome(&cols);
            prop_assert_eq!(d, shot.detectors);
            prop_assert_eq!(o, shot.logicals);
        }
    }
}
