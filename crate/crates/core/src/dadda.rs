//! Dadda column compression.
//!
//! A column set is reduced stage by stage along the height sequence
//! 2, 3, 4, 6, 9, 13, ... (`d_{j+1} = floor(3 d_j / 2)`). Each stage places
//! the fewest (3,2) and (2,2) counters that bring every column, including
//! carries arriving from the column below in the same stage, down to the
//! stage target. Columns are visited in ascending weight and counters take
//! the oldest nets of a column first.

use serde::Serialize;

use crate::adders::{add_signals, AdderKind};
use crate::error::{Error, Result};
use crate::netlist::{NetId, NetlistBuilder, Signal};

/// Weight-aligned columns of nets; column `i` has weight `base_weight + i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnSet {
    pub base_weight: usize,
    pub columns: Vec<Vec<NetId>>,
}

impl ColumnSet {
    pub fn heights(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    pub fn max_height(&self) -> usize {
        self.columns.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// One past the highest weight the column sum can reach when every net
    /// is 1, i.e. the bit length of `sum(height_w * 2^w)`.
    pub fn value_end(&self) -> usize {
        let mut carry = 0usize;
        let mut end = self.base_weight;
        let mut w = 0;
        while w < self.columns.len() || carry > 0 {
            let t = carry + self.columns.get(w).map_or(0, Vec::len);
            if t & 1 == 1 {
                end = self.base_weight + w + 1;
            }
            carry = t >> 1;
            w += 1;
        }
        end
    }

    /// Weighted sum of the columns under a per-net valuation.
    pub fn weighted_value(&self, value: impl Fn(NetId) -> bool) -> u128 {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&n| (i, n)))
            .filter(|&(_, n)| value(n))
            .map(|(i, _)| 1u128 << (self.base_weight + i))
            .sum()
    }
}

/// Stage targets below `max_height`, largest first.
pub fn dadda_targets(max_height: usize) -> Result<Vec<usize>> {
    if max_height < 2 {
        return Err(Error::Config(format!("column height must be at least 2, got {max_height}")));
    }
    let mut seq = vec![];
    let mut d = 2;
    while d < max_height {
        seq.push(d);
        d = d * 3 / 2;
    }
    seq.reverse();
    Ok(seq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CounterKind {
    #[serde(rename = "(3,2)")]
    Full,
    #[serde(rename = "(2,2)")]
    Half,
}

#[derive(Clone, Debug, Serialize)]
pub struct Placement {
    pub kind: CounterKind,
    /// Weight of the consumed nets and of `sum`; `carry` lands at `weight + 1`.
    pub weight: usize,
    pub inputs: Vec<NetId>,
    pub sum: NetId,
    pub carry: NetId,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub target: usize,
    pub placements: Vec<Placement>,
    pub heights: Vec<usize>,
    pub columns: ColumnSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionSchedule {
    pub initial: ColumnSet,
    pub stages: Vec<Stage>,
}

impl ReductionSchedule {
    pub fn counter_counts(&self) -> (usize, usize) {
        let all = self.stages.iter().flat_map(|s| s.placements.iter());
        all.fold((0, 0), |(f, h), p| match p.kind {
            CounterKind::Full => (f + 1, h),
            CounterKind::Half => (f, h + 1),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization cannot fail")
    }
}

/// Columns of height at most two plus the weight bound of their sum.
#[derive(Clone, Debug)]
pub struct TwoRowResult {
    pub columns: ColumnSet,
    pub value_end: usize,
}

impl TwoRowResult {
    fn row(&self, k: usize) -> Vec<Signal> {
        self.columns
            .columns
            .iter()
            .map(|c| c.get(k).map_or(Signal::Zero, |&n| Signal::Net(n)))
            .collect()
    }

    pub fn row_a(&self) -> Vec<Signal> {
        self.row(0)
    }

    pub fn row_b(&self) -> Vec<Signal> {
        self.row(1)
    }

    /// Lowest and highest occupied weight.
    pub fn span(&self) -> Option<(usize, usize)> {
        let occupied: Vec<usize> = self
            .columns
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| i + self.columns.base_weight)
            .collect();
        Some((*occupied.first()?, *occupied.last()?))
    }
}

pub fn reduce_to_two_rows(
    input: &ColumnSet,
    builder: &mut NetlistBuilder,
) -> Result<(TwoRowResult, ReductionSchedule)> {
    if input.max_height() == 0 {
        return Err(Error::Config("cannot reduce an empty column set".into()));
    }
    let value_end = input.value_end();
    let targets = if input.max_height() <= 2 {
        vec![]
    } else {
        dadda_targets(input.max_height())?
    };
    let mut cols = input.columns.clone();
    let mut stages = Vec::with_capacity(targets.len());
    for &target in &targets {
        let (next, placements) = reduce_stage(&cols, target, builder);
        cols = next;
        let columns = ColumnSet {
            base_weight: input.base_weight,
            columns: cols.clone(),
        };
        stages.push(Stage {
            target,
            placements: placements
                .into_iter()
                .map(|mut p| {
                    p.weight += input.base_weight;
                    p
                })
                .collect(),
            heights: columns.heights(),
            columns,
        });
    }
    let columns = ColumnSet {
        base_weight: input.base_weight,
        columns: cols,
    };
    Ok((
        TwoRowResult {
            columns,
            value_end,
        },
        ReductionSchedule {
            initial: input.clone(),
            stages,
        },
    ))
}

fn reduce_stage(
    cols: &[Vec<NetId>],
    target: usize,
    b: &mut NetlistBuilder,
) -> (Vec<Vec<NetId>>, Vec<Placement>) {
    let mut next: Vec<Vec<NetId>> = vec![Vec::new(); cols.len()];
    let mut carries_in: Vec<NetId> = Vec::new();
    let mut placements = Vec::new();
    let mut w = 0;
    while w < cols.len() || !carries_in.is_empty() {
        let mut pool: Vec<NetId> = cols.get(w).cloned().unwrap_or_default();
        pool.append(&mut carries_in);
        let mut height = pool.len();
        let mut head = 0;
        let mut sums = Vec::new();
        while height > target {
            let net = |s: Signal| s.net().expect("counter inputs are real nets");
            if height - target >= 2 && pool.len() - head >= 3 {
                let ins = &pool[head..head + 3];
                let (s, c) = b.full_adder(ins[0].into(), ins[1].into(), ins[2].into());
                placements.push(Placement {
                    kind: CounterKind::Full,
                    weight: w,
                    inputs: ins.to_vec(),
                    sum: net(s),
                    carry: net(c),
                });
                head += 3;
                height -= 2;
                sums.push(net(s));
                carries_in.push(net(c));
            } else {
                let ins = &pool[head..head + 2];
                let (s, c) = b.half_adder(ins[0].into(), ins[1].into());
                placements.push(Placement {
                    kind: CounterKind::Half,
                    weight: w,
                    inputs: ins.to_vec(),
                    sum: net(s),
                    carry: net(c),
                });
                head += 2;
                height -= 1;
                sums.push(net(s));
                carries_in.push(net(c));
            }
        }
        if next.len() <= w {
            next.resize(w + 1, Vec::new());
        }
        next[w].extend_from_slice(&pool[head..]);
        next[w].extend(sums);
        w += 1;
    }
    (next, placements)
}

/// Final carry-propagate addition of the two rows. Returns one signal per
/// weight from `base_weight` up to (excluding) `value_end`; the adder's
/// carry-out is kept only when it can be nonzero.
pub fn cpa_sum(rows: &TwoRowResult, kind: AdderKind, builder: &mut NetlistBuilder) -> Vec<Signal> {
    let width = rows.value_end.saturating_sub(rows.columns.base_weight);
    let (mut sum, cout) = add_signals(kind, &rows.row_a(), &rows.row_b(), Signal::Zero, builder);
    sum.push(cout);
    sum.resize(width.max(sum.len()), Signal::Zero);
    sum.truncate(width);
    sum
}
