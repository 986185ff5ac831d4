//! Protograph description and its line-oriented text format.
//!
//! Format (one item per line, `#` starts a comment anywhere):
//!
//! ```text
//! # header: rows cols z_min
//! 5 6 8
//! # one line of edge multiplicities per check row
//! 0 1 1 0 0 0
//! ...
//! punctured: 1          # optional: column indices never transmitted
//! name: ira-r02         # optional label
//! ```
//!
//! Column layout contract: the first `cols - rows` columns are information
//! columns (always transmitted); the trailing `rows x rows` block must be
//! lower-triangular with multiplicity exactly 1 on the diagonal so that
//! lifted codes encode in one sequential pass. The triangular shape is
//! checked when lifting, not when parsing.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtographError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("check row {0} has no edges")]
    EmptyRow(usize),
    #[error("variable column {0} has no edges")]
    EmptyColumn(usize),
    #[error("punctured column index {0} out of range ({1} columns)")]
    PuncturedOutOfRange(usize, usize),
    #[error("information column {0} is punctured; systematic encoding requires it transmitted")]
    PuncturedInfoColumn(usize),
    #[error("design rate {0} outside (0, 1)")]
    BadDesignRate(f64),
    #[error("protograph must have more columns than rows (got {rows}x{cols})")]
    NotEnoughColumns { rows: usize, cols: usize },
}

/// Base matrix of a protograph plus puncturing pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protograph {
    pub name: String,
    /// rows = check types, cols = variable types, entries = multiplicities.
    pub base: Vec<Vec<u32>>,
    /// Per-column flag: punctured columns are part of the code graph but are
    /// never transmitted.
    pub punctured: Vec<bool>,
    /// Smallest lifting factor the file declares itself valid for.
    pub z_min: usize,
}

impl Protograph {
    pub fn rows(&self) -> usize {
        self.base.len()
    }

    pub fn cols(&self) -> usize {
        self.base[0].len()
    }

    /// Number of transmitted variable types.
    pub fn transmitted_cols(&self) -> usize {
        self.punctured.iter().filter(|&&p| !p).count()
    }

    /// Number of information variable types (`cols - rows`); these are the
    /// leading columns.
    pub fn info_cols(&self) -> usize {
        self.cols() - self.rows()
    }

    /// Information bits per transmitted symbol of the lifted core:
    /// `(cols - rows) / transmitted_cols`. Punctured columns carry encoder
    /// state that never reaches the channel, which is how the rate can
    /// exceed the unpunctured `(cols - rows) / cols`.
    pub fn design_rate(&self) -> f64 {
        (self.cols() - self.rows()) as f64 / self.transmitted_cols() as f64
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.base
            .iter()
            .flat_map(|r| r.iter().copied())
            .max()
            .unwrap_or(0)
    }

    fn validate(self) -> Result<Self, ProtographError> {
        let rows = self.rows();
        let cols = self.cols();
        if cols <= rows {
            return Err(ProtographError::NotEnoughColumns { rows, cols });
        }
        for (r, row) in self.base.iter().enumerate() {
            if row.iter().all(|&m| m == 0) {
                return Err(ProtographError::EmptyRow(r));
            }
        }
        for c in 0..cols {
            if self.base.iter().all(|row| row[c] == 0) {
                return Err(ProtographError::EmptyColumn(c));
            }
        }
        for c in 0..self.info_cols() {
            if self.punctured[c] {
                return Err(ProtographError::PuncturedInfoColumn(c));
            }
        }
        let rate = self.design_rate();
        if !(rate > 0.0 && rate < 1.0) {
            return Err(ProtographError::BadDesignRate(rate));
        }
        Ok(self)
    }
}

/// Parses the text format described in the module docs.
pub fn parse_protograph(text: &str) -> Result<Protograph, ProtographError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut base: Vec<Vec<u32>> = Vec::new();
    let mut punctured_idx: Vec<usize> = Vec::new();
    let mut name = String::from("unnamed");

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("punctured:") {
            for tok in rest.split_whitespace() {
                let idx = tok.parse::<usize>().map_err(|_| ProtographError::Parse {
                    line,
                    msg: format!("bad punctured column index '{tok}'"),
                })?;
                punctured_idx.push(idx);
            }
            continue;
        }
        if let Some(rest) = content.strip_prefix("name:") {
            name = rest.trim().to_string();
            continue;
        }
        let nums: Result<Vec<usize>, _> = content
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| ProtographError::Parse {
                    line,
                    msg: format!("expected integer, got '{tok}'"),
                })
            })
            .collect();
        let nums = nums?;
        match header {
            None => {
                if nums.len() != 3 {
                    return Err(ProtographError::Parse {
                        line,
                        msg: format!("header must be 'rows cols z_min', got {} fields", nums.len()),
                    });
                }
                if nums[0] == 0 || nums[1] == 0 {
                    return Err(ProtographError::Parse {
                        line,
                        msg: "rows and cols must be positive".into(),
                    });
                }
                header = Some((nums[0], nums[1], nums[2]));
            }
            Some((rows, cols, _)) => {
                if base.len() == rows {
                    return Err(ProtographError::Parse {
                        line,
                        msg: format!("more than {rows} matrix rows"),
                    });
                }
                if nums.len() != cols {
                    return Err(ProtographError::Parse {
                        line,
                        msg: format!("expected {cols} entries, got {}", nums.len()),
                    });
                }
                base.push(nums.into_iter().map(|m| m as u32).collect());
            }
        }
    }

    let (rows, cols, z_min) = header.ok_or(ProtographError::Parse {
        line: 0,
        msg: "missing header line".into(),
    })?;
    if base.len() != rows {
        return Err(ProtographError::Parse {
            line: 0,
            msg: format!("expected {rows} matrix rows, found {}", base.len()),
        });
    }
    let mut punctured = vec![false; cols];
    for idx in punctured_idx {
        if idx >= cols {
            return Err(ProtographError::PuncturedOutOfRange(idx, cols));
        }
        punctured[idx] = true;
    }
    Protograph {
        name,
        base,
        punctured,
        z_min: z_min.max(2),
    }
    .validate()
}

/// Rate-0.2 core shipped with the crate: one punctured high-degree state
/// column, one information column, and a zigzag parity chain.
pub const DEFAULT_PROTOGRAPH_TEXT: &str = include_str!("../../data/default.pg");

pub fn default_protograph() -> Protograph {
    parse_protograph(DEFAULT_PROTOGRAPH_TEXT).expect("shipped default protograph is valid")
}
