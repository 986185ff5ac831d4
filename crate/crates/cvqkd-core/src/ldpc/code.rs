//! Circulant lifting of a protograph and the raptor-like rate extension.
//!
//! The lifted core fixes the highest rate; every lower rate in the
//! adaptation range is a view of the same code with extra degree-1 parity
//! symbols appended. Extension row `j` XORs `ext_degree` previously
//! transmitted symbols (core or earlier extension parities) into one new
//! transmitted symbol, drawn deterministically from the code seed, so views
//! of different lengths share all common rows bit for bit.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::protograph::Protograph;

#[derive(Debug, Error)]
pub enum LdpcError {
    #[error("lifting factor {z} too small: {reason}")]
    LiftingTooSmall { z: usize, reason: String },
    #[error(
        "cannot place parallel edge {edge} of cell ({row},{col}) without a 4-cycle; increase z"
    )]
    ParallelEdgeCollision { row: usize, col: usize, edge: usize },
    #[error("trailing block not lower-triangular with unit diagonal at cell ({row},{col})")]
    NotEncodable { row: usize, col: usize },
    #[error("target rate {target} outside achievable [{min_rate}, {max_rate}]")]
    RateOutOfRange {
        target: f64,
        min_rate: f64,
        max_rate: f64,
    },
    #[error("info word length {got}, expected {expected}")]
    InfoLengthMismatch { got: usize, expected: usize },
            #[error("extension degree must be >= 2, got {0}")]
    BadExtensionDegree(usize),
}

/// One lifted cell: all circulant shifts of a base-matrix entry.
#[derive(Debug, Clone)]
struct Cell {
    row: usize,
    col: usize,
    shifts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LiftOptions {
    /// Largest XOR fan-in of an extension parity. Row fan-ins are drawn
    /// from [`EXT_DEGREE_WEIGHTS`] truncated at this value. Fan-in 1
    /// (repetition) must stay in the mix: a check message through a
    /// fan-in-d XOR scales like the d-th power of the channel LLRs, so at
    /// very low rates (tiny per-symbol SNR) only the repetition share can
    /// bootstrap belief propagation.
    pub ext_degree: usize,
    /// Cap on extension rows; `None` sizes the cap so the achievable rate
    /// range reaches down to 0.01.
    pub max_extension: Option<usize>,
}

/// Relative weights of extension fan-ins 1, 2, 3.
pub const EXT_DEGREE_WEIGHTS: [f64; 3] = [0.5, 0.35, 0.15];

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            ext_degree: 3,
            max_extension: None,
        }
    }
}

/// Lifted rate-adaptive code: core parity-check structure plus the seeded
/// extension generator. Immutable once built; shared read-only by workers.
#[derive(Debug)]
pub struct RateAdaptiveCode {
    proto: Protograph,
    z: usize,
    seed: u64,
    cells: Vec<Cell>,
    /// Cells of each check row, for encoding and expansion.
    row_cells: Vec<Vec<usize>>,
    /// Global indices of transmitted core variables, in transmit order
    /// (base-column order, skipping punctured columns).
    transmitted_core: Vec<u32>,
    /// Per-core-variable transmitted flag.
    core_transmitted_mask: Vec<bool>,
    k: usize,
    n_core: usize,
    total_core_vars: usize,
    core_checks: usize,
    ext_degree: usize,
    max_extension: usize,
}

impl RateAdaptiveCode {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Transmitted core block length (punctured columns excluded).
    pub fn n_core(&self) -> usize {
        self.n_core
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_core_vars(&self) -> usize {
        self.total_core_vars
    }

    pub fn core_checks(&self) -> usize {
        self.core_checks
    }

    pub fn max_extension(&self) -> usize {
        self.max_extension
    }

    pub fn max_rate(&self) -> f64 {
        self.k as f64 / self.n_core as f64
    }

    pub fn min_rate(&self) -> f64 {
        self.k as f64 / (self.n_core + self.max_extension) as f64
    }

    pub fn protograph(&self) -> &Protograph {
        &self.proto
    }

    /// Core check rows as (check index, variable indices) in lifted form.
    pub fn core_rows(&self) -> impl Iterator<Item = (usize, Vec<u32>)> + '_ {
        (0..self.core_checks).map(move |chk| {
            let r = chk / self.z;
            let i = chk % self.z;
            let mut vars = Vec::new();
            for &ci in &self.row_cells[r] {
                let cell = &self.cells[ci];
                for &s in &cell.shifts {
                    vars.push((cell.col * self.z + (i + s) % self.z) as u32);
                }
            }
            (chk, vars)
        })
    }

    /// RNG stream for extension row `j`; row streams are independent of each
    /// other and of the shift-selection stream, so any prefix of extension
    /// rows is stable across views.
    fn ext_rng(&self, j: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1 + j as u64);
        rng
    }

    /// The transmitted-pool indices XORed into extension parity `j`. Pool
    /// index `< n_core` is a transmitted core symbol; otherwise it is
    /// extension parity `idx - n_core`. Fan-in first, then the members, all
    /// from the row's own stream.
    fn ext_row_pool_indices(&self, j: usize) -> Vec<u32> {
        let pool = self.n_core + j;
        let mut rng = self.ext_rng(j);
        let take = sample_ext_degree(self.ext_degree, &mut rng).min(pool);
        let mut picked: Vec<u32> = Vec::with_capacity(take);
        while picked.len() < take {
            let cand = rng.gen_range(0..pool) as u32;
            if !picked.contains(&cand) {
                picked.push(cand);
            }
        }
        picked.sort_unstable();
        picked
    }

    /// Maps a transmitted-pool index to a global variable index.
    fn pool_to_global(&self, idx: u32) -> u32 {
        if (idx as usize) < self.n_core {
            self.transmitted_core[idx as usize]
        } else {
            (self.total_core_vars + idx as usize - self.n_core) as u32
        }
    }
}

/// Lifts a protograph with circulant permutations of size `z`.
///
/// Shift selection is a seeded progressive search: parallel edges of one
/// cell must not close length-4 cycles among themselves (hard constraint,
/// construction error if infeasible), and shifts closing length-4 cycles
/// with already-placed cells are avoided greedily.
pub fn lift(
    p: &Protograph,
    z: usize,
    seed: u64,
    opts: &LiftOptions,
) -> Result<RateAdaptiveCode, LdpcError> {
    if z < 2 {
        return Err(LdpcError::LiftingTooSmall {
            z,
            reason: "need z >= 2".into(),
        });
    }
    if z < p.max_multiplicity() as usize {
        return Err(LdpcError::LiftingTooSmall {
            z,
            reason: format!("max multiplicity is {}", p.max_multiplicity()),
        });
    }
    if z < p.z_min {
        return Err(LdpcError::LiftingTooSmall {
            z,
            reason: format!("protograph declares z_min = {}", p.z_min),
        });
    }
    if opts.ext_degree < 2 {
        return Err(LdpcError::BadExtensionDegree(opts.ext_degree));
    }
    let rows = p.rows();
    let cols = p.cols();
    let info = p.info_cols();
    // Trailing square block: lower-triangular, unit diagonal.
    for r in 0..rows {
        for t in 0..rows {
            let c = info + t;
            let m = p.base[r][c];
            let bad = (t == r && m != 1) || (t > r && m != 0);
            if bad {
                return Err(LdpcError::NotEncodable { row: r, col: c });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Cell> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let mult = p.base[r][c] as usize;
            if mult == 0 {
                continue;
            }
            let mut shifts: Vec<usize> = Vec::with_capacity(mult);
            if c == info + r {
                // Diagonal of the trailing block lifts to the identity so the
                // encoder can solve this column directly.
                shifts.push(0);
            } else {
                for edge in 0..mult {
                    let shift = choose_shift(&cells, &shifts, r, c, z, &mut rng).ok_or(
                        LdpcError::ParallelEdgeCollision {
                            row: r,
                            col: c,
                            edge,
                        },
                    )?;
                    shifts.push(shift);
                }
            }
            cells.push(Cell { row: r, col: c, shifts });
        }
    }

    let mut row_cells = vec![Vec::new(); rows];
    for (i, cell) in cells.iter().enumerate() {
        row_cells[cell.row].push(i);
    }

    let total_core_vars = z * cols;
    let mut transmitted_core = Vec::new();
    let mut core_transmitted_mask = vec![false; total_core_vars];
    for c in 0..cols {
        if p.punctured[c] {
            continue;
        }
        for i in 0..z {
            transmitted_core.push((c * z + i) as u32);
            core_transmitted_mask[c * z + i] = true;
        }
    }
    let k = z * info;
    let n_core = transmitted_core.len();
    let max_extension = opts
        .max_extension
        .unwrap_or_else(|| (k as f64 / 0.01).round() as usize - n_core);

    Ok(RateAdaptiveCode {
        proto: p.clone(),
        z,
        seed,
        cells,
        row_cells,
        transmitted_core,
        core_transmitted_mask,
        k,
        n_core,
        total_core_vars,
        core_checks: z * rows,
        ext_degree: opts.ext_degree,
        max_extension,
    })
}

/// Draws an extension fan-in from [`EXT_DEGREE_WEIGHTS`] truncated at
/// `max_degree` and renormalized.
fn sample_ext_degree(max_degree: usize, rng: &mut ChaCha8Rng) -> usize {
    let m = max_degree.min(EXT_DEGREE_WEIGHTS.len());
    let total: f64 = EXT_DEGREE_WEIGHTS[..m].iter().sum();
    let mut u: f64 = rng.gen_range(0.0..total);
    for (i, &w) in EXT_DEGREE_WEIGHTS[..m].iter().enumerate() {
        if u < w {
            return i + 1;
        }
        u -= w;
    }
    m
}

/// Picks the first shift (in seeded shuffled order) that creates no 4-cycle;
/// parallel-edge collisions within `taken` are forbidden outright, cross-cell
/// cycles are minimized if unavoidable. Returns `None` only when every
/// candidate collides with a parallel edge.
fn choose_shift(
    cells: &[Cell],
    taken: &[usize],
    row: usize,
    col: usize,
    z: usize,
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let mut candidates: Vec<usize> = (0..z).collect();
    candidates.shuffle(rng);
    let mut best: Option<(usize, usize)> = None; // (cycle count, shift)
    for &s in &candidates {
        // Two circulants sigma^a, sigma^b between the same node groups close
        // a 4-cycle iff 2(a - b) = 0 mod z.
        if taken
            .iter()
            .any(|&t| (2 * (s + z - t)) % z == 0)
        {
            continue;
        }
        let cycles = new_four_cycles(cells, taken, row, col, s, z);
        if cycles == 0 {
            return Some(s);
        }
        if best.map_or(true, |(c, _)| cycles < c) {
            best = Some((cycles, s));
        }
    }
    best.map(|(_, s)| s)
}

/// Counts 4-cycles a new edge (row, col, shift s) would close with already
/// placed cells: for every column col' sharing `row` and every row' sharing
/// both columns, shifts with `s - s2 + s3 - s4 = 0 mod z` form a cycle.
fn new_four_cycles(
    cells: &[Cell],
    taken_same_cell: &[usize],
    row: usize,
    col: usize,
    s: usize,
    z: usize,
) -> usize {
    let mut count = 0;
    let in_row: Vec<&Cell> = cells
        .iter()
        .filter(|c| c.row == row && c.col != col)
        .collect();
    let in_col: Vec<&Cell> = cells
        .iter()
        .filter(|c| c.col == col && c.row != row)
        .collect();
    for c2 in &in_row {
        for c4 in &in_col {
            // Need the opposite corner (c4.row, c2.col).
            for c3 in cells.iter().filter(|x| x.row == c4.row && x.col == c2.col) {
                for &s2 in &c2.shifts {
                    for &s3 in &c3.shifts {
                        for &s4 in &c4.shifts {
                            if (s + s3 + 2 * z - s2 - s4) % z == 0 {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    // Parallel edges in cells sharing only the row or only the column cannot
    // close a 4-cycle with a single new edge; same-cell pairs are handled by
    // the hard constraint, and `taken_same_cell` pairs with in_row/in_col
    // cells are counted above once this edge joins `cells`.
    let _ = taken_same_cell;
    count
}

/// Parity-check view at one rate: the core plus the first `m_ext` extension
/// rows and columns.
#[derive(Debug, Clone)]
pub struct CodeView {
    code: Arc<RateAdaptiveCode>,
    m_ext: usize,
    /// Transmitted block length `n_core + m_ext`.
    n: usize,
    rate: f64,
    /// Flat pool indices of all extension rows.
    ext_rows: Vec<u32>,
    /// Prefix offsets into `ext_rows`, length `m_ext + 1`.
    ext_offsets: Vec<u32>,
}

impl CodeView {
    pub fn code(&self) -> &RateAdaptiveCode {
        &self.code
    }

    pub fn m_ext(&self) -> usize {
        self.m_ext
    }

    /// Transmitted block length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn k(&self) -> usize {
        self.code.k
    }

    /// All variables of the decoding graph, punctured core columns included.
    pub fn total_vars(&self) -> usize {
        self.code.total_core_vars + self.m_ext
    }

    pub fn total_checks(&self) -> usize {
        self.code.core_checks + self.m_ext
    }

    /// Largest extension fan-in of this code family.
    pub fn max_ext_degree(&self) -> usize {
        self.code.ext_degree
    }

    /// Whether a global variable index is transmitted.
    pub fn is_transmitted(&self, var: usize) -> bool {
        if var < self.code.total_core_vars {
            self.code.core_transmitted_mask[var]
        } else {
            true
        }
    }

    /// Global variable indices in transmit order (length `n`).
    pub fn transmitted_order(&self) -> impl Iterator<Item = u32> + '_ {
        self.code
            .transmitted_core
            .iter()
            .copied()
            .chain((0..self.m_ext).map(|j| (self.code.total_core_vars + j) as u32))
    }

    /// Pool indices of one extension row.
    pub fn ext_row(&self, j: usize) -> &[u32] {
        &self.ext_rows[self.ext_offsets[j] as usize..self.ext_offsets[j + 1] as usize]
    }

    /// Check rows as (check, vars) pairs, extension checks included.
    pub fn all_rows(&self) -> Vec<Vec<u32>> {
        let mut rows: Vec<Vec<u32>> = self.code.core_rows().map(|(_, v)| v).collect();
        for j in 0..self.m_ext {
            let mut vars: Vec<u32> = self
                .ext_row(j)
                .iter()
                .map(|&p| self.code.pool_to_global(p))
                .collect();
            vars.push((self.code.total_core_vars + j) as u32);
            rows.push(vars);
        }
        rows
    }

    /// Syndrome of a full variable assignment; all-zero means codeword.
    pub fn syndrome_weight(&self, full: &[u8]) -> usize {
        assert_eq!(full.len(), self.total_vars());
        let mut weight = 0usize;
        for (_, vars) in self.code.core_rows() {
            let parity = vars.iter().fold(0u8, |acc, &v| acc ^ full[v as usize]);
            weight += parity as usize;
        }
        for j in 0..self.m_ext {
            let mut parity = full[self.code.total_core_vars + j];
            for &p in self.ext_row(j) {
                parity ^= full[self.code.pool_to_global(p) as usize];
            }
            weight += parity as usize;
        }
        weight
    }

    /// Systematic encoding over all graph variables (state and extension
    /// parities included). Use [`encode`] for the transmitted word.
    pub fn encode_full(&self, info: &[u8]) -> Result<Vec<u8>, LdpcError> {
        let code = &*self.code;
        if info.len() != code.k {
            return Err(LdpcError::InfoLengthMismatch {
                got: info.len(),
                expected: code.k,
            });
        }
        let z = code.z;
        let info_cols = code.proto.info_cols();
        let mut full = vec![0u8; self.total_vars()];
        full[..code.k].copy_from_slice(info);
        // Solve trailing columns in order: row t determines column info+t.
        for t in 0..code.proto.rows() {
            let solved_col = info_cols + t;
            let base = solved_col * z;
            for &ci in &code.row_cells[t] {
                let cell = &code.cells[ci];
                if cell.col == solved_col {
                    continue; // the identity diagonal being solved
                }
                let src = cell.col * z;
                for &s in &cell.shifts {
                    for i in 0..z {
                        full[base + i] ^= full[src + (i + s) % z];
                    }
                }
            }
        }
        for j in 0..self.m_ext {
            let mut bit = 0u8;
            for &p in self.ext_row(j) {
                bit ^= full[self.code.pool_to_global(p) as usize];
            }
            full[code.total_core_vars + j] = bit;
        }
        Ok(full)
    }
}

/// Builds the view for `r_target`, appending `round(k / r_target) - n_core`
/// extension rows.
pub fn extend_to_rate(code: &Arc<RateAdaptiveCode>, r_target: f64) -> Result<CodeView, LdpcError> {
    let min_rate = code.min_rate();
    let max_rate = code.max_rate();
    if !(r_target > 0.0) || r_target < min_rate - 1e-12 || r_target > max_rate + 1e-12 {
        return Err(LdpcError::RateOutOfRange {
            target: r_target,
            min_rate,
            max_rate,
        });
    }
    let n = (code.k as f64 / r_target).round() as usize;
    let n = n.clamp(code.n_core, code.n_core + code.max_extension);
    let m_ext = n - code.n_core;
    let d = code.ext_degree;
    let mut ext_rows = Vec::with_capacity(m_ext * d);
    for j in 0..m_ext {
        ext_rows.extend(code.ext_row_pool_indices(j));
    }
    Ok(CodeView {
        code: Arc::clone(code),
        m_ext,
        n,
        rate: code.k as f64 / n as f64,
        ext_rows,
    })
}

/// Systematic codeword over transmitted symbols: first `k` bits are the
/// information word.
pub fn encode(view: &CodeView, info: &[u8]) -> Result<Vec<u8>, LdpcError> {
    let full = view.encode_full(info)?;
    Ok(view
        .transmitted_order()
        .map(|v| full[v as usize])
        .collect())
}
