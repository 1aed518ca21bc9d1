//! AND-array partial products and the low/high split.
//!
//! Term `a_i b_j` has weight `i + j` and flat index `i + n*j`, so `a_0 b_0`
//! is 0, `a_1 b_0` is 1 and `a_{n-1} b_{n-1}` is `n*n - 1`.

use crate::dadda::ColumnSet;
use crate::error::{Error, Result};
use crate::netlist::{GateKind, NetId, NetlistBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialProduct {
    pub i: usize,
    pub j: usize,
    pub net: NetId,
}

impl PartialProduct {
    pub fn weight(&self) -> usize {
        self.i + self.j
    }
}

pub fn index_of(n: usize, i: usize, j: usize) -> usize {
    i + n * j
}

/// Weight-indexed columns of partial products, starting at `base_weight`.
#[derive(Clone, Debug)]
pub struct PartialProductMatrix {
    pub n: usize,
    pub base_weight: usize,
    pub columns: Vec<Vec<PartialProduct>>,
}

impl PartialProductMatrix {
    pub fn heights(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    pub fn term_count(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = &PartialProduct> {
        self.columns.iter().flatten()
    }

    pub fn to_columns(&self) -> ColumnSet {
        ColumnSet {
            base_weight: self.base_weight,
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|pp| pp.net).collect())
                .collect(),
        }
    }

    fn slice(&self, lo: usize, hi: usize) -> PartialProductMatrix {
        PartialProductMatrix {
            n: self.n,
            base_weight: lo,
            columns: self.columns[lo - self.base_weight..=hi - self.base_weight].to_vec(),
        }
    }
}

/// Emits the n*n AND2 gates in flat-index order.
pub fn generate_pp(
    n: usize,
    a: &[NetId],
    b: &[NetId],
    builder: &mut NetlistBuilder,
) -> Result<PartialProductMatrix> {
    if n < 2 {
        return Err(Error::Config(format!("operand width must be at least 2, got {n}")));
    }
    if a.len() != n || b.len() != n {
        return Err(Error::Config(format!(
            "expected two {n}-bit operands, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut columns = vec![Vec::new(); 2 * n - 1];
    for j in 0..n {
        for i in 0..n {
            let net = builder.add_gate(GateKind::And2, &[a[i], b[j]])?;
            columns[i + j].push(PartialProduct { i, j, net });
        }
    }
    Ok(PartialProductMatrix {
        n,
        base_weight: 0,
        columns,
    })
}

#[derive(Clone, Debug)]
pub struct Partition {
    /// Weights `0..n`.
    pub part0: PartialProductMatrix,
    /// Weights `n..=2n-2`; weight `2n-1` is left for part1's carry.
    pub part1: PartialProductMatrix,
}

pub fn partition(matrix: &PartialProductMatrix) -> Partition {
    let n = matrix.n;
    Partition {
        part0: matrix.slice(0, n - 1),
        part1: matrix.slice(n, 2 * n - 2),
    }
}
