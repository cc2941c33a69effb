//! Upper bounds on CSS code distance by random information sets, and an exhaustive
//! low-weight search for small codes.
//!
//! An X-type logical lies in `ker(H_Z)` and anticommutes with some row of `L_Z`;
//! a Z-type logical lies in `ker(H_X)` and anticommutes with some row of `L_X`.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BinaryMatrix, BitVector};
use crate::qcode::{CssCode, Pauli};
use crate::rng::stream;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistanceError {
    #[error("code has no logical operators (k = 0)")]
    NoLogicals,
    #[error("trials must be at least 1")]
    NoTrials,
}

pub fn default_trials(n: usize) -> usize {
    if n <= 100 {
        100_000
    } else {
        1_000_000
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub d_upper: usize,
    /// Support of a logical operator of weight `d_upper`.
    pub witness: Vec<usize>,
    /// First trial that reached `d_upper`.
    pub found_at_trial: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub trials: usize,
    pub seed: u64,
    /// Lightest X-type logical found.
    pub x: ComponentBound,
    /// Lightest Z-type logical found.
    pub z: ComponentBound,
    pub d_upper: usize,
}

/// Whether `support` is a nontrivial logical of the given Pauli type.
pub fn is_logical(code: &CssCode, pauli: Pauli, support: &[usize]) -> bool {
    let w = BitVector::from_support(code.n, support);
    let (commuting, dual_logicals) = match pauli {
        Pauli::X => (&code.hz, &code.logical_z),
        Pauli::Z => (&code.hx, &code.logical_x),
    };
    commuting.mul_vec(&w).is_zero() && !dual_logicals.mul_vec(&w).is_zero()
}

pub fn estimate_distance(code: &CssCode, trials: usize, seed: u64) -> Result<DistanceEstimate, DistanceError> {
    if code.k == 0 {
        return Err(DistanceError::NoLogicals);
    }
    if trials == 0 {
        return Err(DistanceError::NoTrials);
    }
    let x = estimate_component(code, Pauli::X, trials, seed);
    let z = estimate_component(code, Pauli::Z, trials, seed ^ 0x5a5a_5a5a_5a5a_5a5a);
    debug_assert!(is_logical(code, Pauli::X, &x.witness));
    debug_assert!(is_logical(code, Pauli::Z, &z.witness));
    Ok(DistanceEstimate {
        trials,
        seed,
        d_upper: x.d_upper.min(z.d_upper),
        x,
        z,
    })
}

/// Each trial permutes columns at random, row-reduces a basis of the commuting kernel,
/// and keeps the lightest reduced row with nontrivial logical action.
pub fn estimate_component(code: &CssCode, pauli: Pauli, trials: usize, seed: u64) -> ComponentBound {
    let (commuting, dual_logicals) = match pauli {
        Pauli::X => (&code.hz, &code.logical_z),
        Pauli::Z => (&code.hx, &code.logical_x),
    };
    let kernel = commuting.kernel_basis();
    let n = code.n;
    let supports = kernel.row_supports();
    let best = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut permuted = BinaryMatrix::zeros(kernel.rows(), n);
            for (r, sup) in supports.iter().enumerate() {
                for &c in sup {
                    permuted.set(r, perm[c], true);
                }
            }
            let (reduced, _) = permuted.rref();
            let mut inverse = vec![0; n];
            for (c, &p) in perm.iter().enumerate() {
                inverse[p] = c;
            }
            let mut best: Option<(usize, Vec<usize>)> = None;
            for r in 0..reduced.rows() {
                let weight = reduced.row_weight(r);
                if best.as_ref().is_some_and(|(w, _)| *w <= weight) {
                    continue;
                }
                let mut original = BitVector::zeros(n);
                for p in reduced.row(r).iter_ones() {
                    original.set(inverse[p], true);
                }
                if !dual_logicals.mul_vec(&original).is_zero() {
                    best = Some((weight, original.support()));
                }
            }
            let (w, s) = best.expect("kernel rows span a nontrivial logical");
            (w, t, s)
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .expect("at least one trial");
    ComponentBound {
        d_upper: best.0,
        witness: best.2,
        found_at_trial: best.1,
    }
}

/// Lightest nontrivial logical of either type with weight at most `max_weight`,
/// by enumerating every support. Returns `None` if there is none.
pub fn exhaustive_low_weight(code: &CssCode, max_weight: usize) -> Option<(Pauli, Vec<usize>)> {
    for w in 1..=max_weight {
        for pauli in [Pauli::X, Pauli::Z] {
            let mut found = None;
            for_each_support(code.n, w, &mut |s| {
                if found.is_none() && is_logical(code, pauli, s) {
                    found = Some(s.to_vec());
                }
            });
            if let Some(s) = found {
                return Some((pauli, s));
            }
        }
    }
    None
}

fn for_each_support(n: usize, w: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, w: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == w {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, w, cur, f);
            cur.pop();
        }
    }
    rec(0, n, w, &mut Vec::with_capacity(w), f);
}
