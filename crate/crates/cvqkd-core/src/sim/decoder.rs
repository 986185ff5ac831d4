//! Flooding-schedule sum-product decoder.
//!
//! Check updates use the tanh product rule with forward/backward partial
//! products (no division), variable updates are plain sums. Hard decisions
//! map `llr <= 0` to bit 1. Scratch buffers live in the decoder and are
//! reused across frames; one decoder instance serves one worker thread.

use crate::ldpc::CodeView;

/// Messages are clamped into `[-MSG_CLIP, MSG_CLIP]` before the tanh, and
/// tanh products into `+-(1 - PROD_EPS)` before the atanh, which caps check
/// messages near 28.4.
const MSG_CLIP: f64 = 30.0;
const PROD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// True iff the hard decisions satisfy every check (zero syndrome).
    pub converged: bool,
    /// Iterations actually run; 0 when the channel word already satisfies
    /// all checks.
    pub iterations: usize,
}

#[derive(Debug)]
pub struct Decoder {
    n_vars: usize,
    n_checks: usize,
    // CSR by check: edges [check_ptr[c], check_ptr[c+1]) belong to check c.
    check_ptr: Vec<u32>,
    edge_var: Vec<u32>,
    // Edge ids grouped by variable.
    var_ptr: Vec<u32>,
    var_edge: Vec<u32>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    tanh: Vec<f64>,
    totals: Vec<f64>,
    hard: Vec<u8>,
    scratch_fwd: Vec<f64>,
    max_check_degree: usize,
}

impl Decoder {
    /// Builds a decoder from explicit check rows (variable index lists).
    pub fn from_rows(rows: &[Vec<u32>], n_vars: usize) -> Self {
        let n_checks = rows.len();
        let n_edges: usize = rows.iter().map(|r| r.len()).sum();
        let mut check_ptr = Vec::with_capacity(n_checks + 1);
        let mut edge_var = Vec::with_capacity(n_edges);
        check_ptr.push(0u32);
        for row in rows {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len() as u32);
        }
        // Group edge ids by variable with a counting sort.
        let mut var_ptr = vec![0u32; n_vars + 1];
        for &v in &edge_var {
            var_ptr[v as usize + 1] += 1;
        }
        for i in 0..n_vars {
            var_ptr[i + 1] += var_ptr[i];
        }
        let mut cursor = var_ptr.clone();
        let mut var_edge = vec![0u32; n_edges];
        for (e, &v) in edge_var.iter().enumerate() {
            let slot = cursor[v as usize];
            var_edge[slot as usize] = e as u32;
            cursor[v as usize] += 1;
        }
        let max_check_degree = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        Self {
            n_vars,
            n_checks,
            check_ptr,
            edge_var,
            var_ptr,
            var_edge,
            v2c: vec![0.0; n_edges],
            c2v: vec![0.0; n_edges],
            tanh: vec![0.0; n_edges],
            totals: vec![0.0; n_vars],
            hard: vec![0; n_vars],
            scratch_fwd: vec![0.0; max_check_degree + 1],
            max_check_degree,
        }
    }

    pub fn for_view(view: &CodeView) -> Self {
        Self::from_rows(&view.all_rows(), view.total_vars())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn max_check_degree(&self) -> usize {
        self.max_check_degree
    }

    /// Hard decisions of the last decode call.
    pub fn hard_bits(&self) -> &[u8] {
        &self.hard
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        for c in 0..self.n_checks {
            let lo = self.check_ptr[c] as usize;
            let hi = self.check_ptr[c + 1] as usize;
            let mut parity = 0u8;
            for e in lo..hi {
                parity ^= bits[self.edge_var[e] as usize];
            }
            if parity != 0 {
                return false;
            }
        }
        true
    }

    fn harden(&mut self, llrs: &[f64]) {
        for (h, &l) in self.hard.iter_mut().zip(llrs) {
            *h = (l <= 0.0) as u8;
        }
    }

    /// Runs up to `max_iterations` flooding iterations on channel LLRs.
    /// `converged == true` implies the returned hard decisions have zero
    /// syndrome. Non-convergence is a normal outcome, not an error.
    pub fn decode(&mut self, ch_llr: &[f64], max_iterations: usize) -> DecodeOutcome {
        assert_eq!(ch_llr.len(), self.n_vars, "LLR length mismatch");
        self.harden(ch_llr);
        if self.syndrome_ok(&self.hard) {
            return DecodeOutcome {
                converged: true,
                iterations: 0,
            };
        }
        // v2c starts as the channel values.
        for v in 0..self.n_vars {
            let lo = self.var_ptr[v] as usize;
            let hi = self.var_ptr[v + 1] as usize;
            for &e in &self.var_edge[lo..hi] {
                self.v2c[e as usize] = ch_llr[v];
            }
        }
        for iter in 1..=max_iterations {
            self.check_pass();
            self.var_pass(ch_llr);
            let totals = std::mem::take(&mut self.totals);
            self.harden(&totals);
            self.totals = totals;
            if self.syndrome_ok(&self.hard) {
                return DecodeOutcome {
                    converged: true,
                    iterations: iter,
                };
            }
        }
        DecodeOutcome {
            converged: false,
            iterations: max_iterations,
        }
    }

    fn check_pass(&mut self) {
        for e in 0..self.v2c.len() {
            self.tanh[e] = (0.5 * self.v2c[e].clamp(-MSG_CLIP, MSG_CLIP)).tanh();
        }
        for c in 0..self.n_checks {
            let lo = self.check_ptr[c] as usize;
            let hi = self.check_ptr[c + 1] as usize;
            let deg = hi - lo;
            // Forward partial products; backward pass fills messages in place.
            self.scratch_fwd[0] = 1.0;
            for (i, e) in (lo..hi).enumerate() {
                self.scratch_fwd[i + 1] = self.scratch_fwd[i] * self.tanh[e];
            }
            let mut suffix = 1.0;
            for i in (0..deg).rev() {
                let e = lo + i;
                let prod = (self.scratch_fwd[i] * suffix).clamp(-(1.0 - PROD_EPS), 1.0 - PROD_EPS);
                suffix *= self.tanh[e];
                self.c2v[e] = 2.0 * prod.atanh();
            }
        }
    }

    fn var_pass(&mut self, ch_llr: &[f64]) {
        for v in 0..self.n_vars {
            let lo = self.var_ptr[v] as usize;
            let hi = self.var_ptr[v + 1] as usize;
            let mut total = ch_llr[v];
            for &e in &self.var_edge[lo..hi] {
                total += self.c2v[e as usize];
            }
            self.totals[v] = total;
            for &e in &self.var_edge[lo..hi] {
                self.v2c[e as usize] = total - self.c2v[e as usize];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tree-like toy code: two checks chained over three variables,
    /// codewords {000, 111}.
    fn tree_rows() -> Vec<Vec<u32>> {
        vec![vec![0, 1], vec![1, 2]]
    }

    #[test]
    fn saturated_codeword_converges_without_iterating() {
        let mut dec = Decoder::from_rows(&tree_rows(), 3);
        let out = dec.decode(&[30.0, 30.0, 30.0], 50);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert_eq!(dec.hard_bits(), &[0, 0, 0]);
        let out = dec.decode(&[-30.0, -30.0, -30.0], 50);
        assert!(out.converged);
        assert_eq!(dec.hard_bits(), &[1, 1, 1]);
    }

    #[test]
    fn all_zero_llrs_never_converge_with_odd_degree_check() {
        // Add a degree-3 check so the all-ones pattern (hard decision of
        // llr = 0) is not a codeword.
        let rows = vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]];
        let mut dec = Decoder::from_rows(&rows, 3);
        let out = dec.decode(&[0.0, 0.0, 0.0], 25);
        assert!(!out.converged);
        assert_eq!(out.iterations, 25);
    }

    #[test]
    fn corrects_single_weak_bit_on_tree() {
        let mut dec = Decoder::from_rows(&tree_rows(), 3);
        // Bit 1 slightly favours "1" but both neighbours say "0".
        let out = dec.decode(&[8.0, -0.5, 8.0], 50);
        assert!(out.converged);
        assert_eq!(dec.hard_bits(), &[0, 0, 0]);
    }

    #[test]
    fn llr_negation_flips_decisions_on_tree() {
        // One SPA iteration on a cycle-free code is sign-symmetric.
        let rows = tree_rows();
        let llrs = [1.5, -0.7, 2.2];
        let mut a = Decoder::from_rows(&rows, 3);
        a.decode(&llrs, 1);
        let pos: Vec<u8> = a.hard_bits().to_vec();
        let negated: Vec<f64> = llrs.iter().map(|x| -x).collect();
        let mut b = Decoder::from_rows(&rows, 3);
        b.decode(&negated, 1);
        for (x, y) in pos.iter().zip(b.hard_bits()) {
            assert_ne!(x, y);
        }
    }

    #[test]
    fn converged_implies_zero_syndrome() {
        // Hamming (7,4): a loopy code; decode noisy patterns and verify the
        // soundness contract on every converged outcome.
        let rows: Vec<Vec<u32>> = vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]];
        let mut dec = Decoder::from_rows(&rows, 7);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let llrs: Vec<f64> = (0..7).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let out = dec.decode(&llrs, 30);
            if out.converged {
                let bits = dec.hard_bits().to_vec();
                for row in &rows {
                    let parity = row.iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]);
                    assert_eq!(parity, 0);
                }
            }
        }
    }
}
