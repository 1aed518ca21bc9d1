//! Static analysis under a unit-gate cost model: area, critical-path depth,
//! gate counts and switching activity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::netlist::{GateKind, Netlist};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCostModel {
    pub area: BTreeMap<GateKind, u64>,
    pub delay: BTreeMap<GateKind, u64>,
}

impl Default for GateCostModel {
    /// Simple gates cost 1, XOR-class gates 2, constants 0.
    fn default() -> Self {
        let cost = |k: GateKind| match k {
            GateKind::Xor2 | GateKind::Xnor2 => 2,
            GateKind::Const0 | GateKind::Const1 => 0,
            _ => 1,
        };
        let table: BTreeMap<GateKind, u64> = GateKind::ALL.iter().map(|&k| (k, cost(k))).collect();
        GateCostModel {
            area: table.clone(),
            delay: table,
        }
    }
}

impl GateCostModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let model: GateCostModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost model serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        for k in GateKind::ALL {
            if !self.area.contains_key(&k) || !self.delay.contains_key(&k) {
                return Err(Error::Config(format!("cost model is missing gate kind {k}")));
            }
        }
        for k in [GateKind::Const0, GateKind::Const1] {
            if self.area[&k] != 0 || self.delay[&k] != 0 {
                return Err(Error::Config(format!("{k} must have zero area and delay")));
            }
        }
        Ok(())
    }

    pub fn area_of(&self, kind: GateKind) -> u64 {
        self.area[&kind]
    }

    pub fn delay_of(&self, kind: GateKind) -> u64 {
        self.delay[&kind]
    }

    /// Short stable digest used to refuse cross-model comparisons.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("cost model serialization cannot fail");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

/// Arrival time of every net: primary inputs at 0, each gate adds its delay
/// to the latest of its inputs.
pub fn arrival_times(netlist: &Netlist, model: &GateCostModel) -> Vec<u64> {
    let mut t = vec![0u64; netlist.input_bit_count()];
    t.reserve(netlist.gates().len());
    for g in netlist.gates() {
        let start = g.inputs().iter().map(|n| t[n.index()]).max().unwrap_or(0);
        t.push(start + model.delay_of(g.kind));
    }
    t
}

/// Longest weighted input-to-output path.
pub fn critical_depth(netlist: &Netlist, model: &GateCostModel) -> u64 {
    let t = arrival_times(netlist, model);
    netlist
        .outputs()
        .iter()
        .flat_map(|b| b.bits.iter())
        .map(|n| t[n.index()])
        .max()
        .unwrap_or(0)
}

pub fn area_units(netlist: &Netlist, model: &GateCostModel) -> u64 {
    netlist.gates().iter().map(|g| model.area_of(g.kind)).sum()
}

pub fn gate_counts(netlist: &Netlist) -> BTreeMap<GateKind, usize> {
    let mut counts: BTreeMap<GateKind, usize> = GateKind::ALL.iter().map(|&k| (k, 0)).collect();
    for g in netlist.gates() {
        *counts.get_mut(&g.kind).unwrap() += 1;
    }
    counts
}

/// Total number of nets (inputs included) whose value differs between the
/// two assignments of each pair, summed over all pairs.
pub fn switching_activity(netlist: &Netlist, pairs: &[(Vec<bool>, Vec<bool>)]) -> Result<u64> {
    let mut total = 0;
    for (before, after) in pairs {
        let x = netlist.evaluate_nets(before)?;
        let y = netlist.evaluate_nets(after)?;
        total += x.iter().zip(&y).filter(|(a, b)| a != b).count() as u64;
    }
    Ok(total)
}

/// Word-level variant of [`switching_activity`]: each assignment is one
/// integer per input bus. Simulates 64 pairs per pass and spreads batches
/// over the rayon pool; the sum is order-independent.
pub fn switching_activity_words(netlist: &Netlist, pairs: &[(Vec<u128>, Vec<u128>)]) -> Result<u64> {
    pairs
        .par_chunks(64)
        .map(|chunk| {
            let before: Vec<Vec<u128>> = chunk.iter().map(|p| p.0.clone()).collect();
            let after: Vec<Vec<u128>> = chunk.iter().map(|p| p.1.clone()).collect();
            let x = netlist.simulate_lanes(&netlist.pack_words(&before)?)?;
            let y = netlist.simulate_lanes(&netlist.pack_words(&after)?)?;
            let mask = if chunk.len() == 64 { !0 } else { (1u64 << chunk.len()) - 1 };
            Ok(x.iter().zip(&y).map(|(a, b)| ((a ^ b) & mask).count_ones() as u64).sum::<u64>())
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{NetlistBuilder, Signal};

    fn default() -> GateCostModel {
        GateCostModel::default()
    }

    #[test]
    fn single_and_is_one_unit() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 2).unwrap();
        let o = b.gate(GateKind::And2, &x);
        b.add_output("y", vec![o]).unwrap();
        let nl = b.finish();
        assert_eq!(critical_depth(&nl, &default()), 1);
        assert_eq!(area_units(&nl, &default()), 1);
    }

    #[test]
    fn not_chain_depth_is_length() {
        for m in 0..6 {
            let mut b = NetlistBuilder::new();
            let mut n = b.add_input("x", 1).unwrap()[0];
            for _ in 0..m {
                n = b.gate(GateKind::Not, &[n]);
            }
            b.add_output("y", vec![n]).unwrap();
            assert_eq!(critical_depth(&b.finish(), &default()), m);
        }
    }

    #[test]
    fn wires_only_has_zero_area() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 4).unwrap();
        b.add_output("y", x).unwrap();
        let nl = b.finish();
        assert_eq!(area_units(&nl, &default()), 0);
        assert_eq!(critical_depth(&nl, &default()), 0);
    }

    #[test]
    fn const_only_has_zero_depth() {
        let mut b = NetlistBuilder::new();
        let z = b.gate(GateKind::Const0, &[]);
        let o = b.gate(GateKind::Const1, &[]);
        b.add_output("y", vec![z, o]).unwrap();
        assert_eq!(critical_depth(&b.finish(), &default()), 0);
    }

    #[test]
    fn full_adder_area() {
        let m = default();
        let mut b = NetlistBuilder::new();
        let x: Vec<Signal> = b.add_input("x", 3).unwrap().into_iter().map(Signal::Net).collect();
        let (s, c) = b.full_adder(x[0], x[1], x[2]);
        let bits = vec![b.materialize(s), b.materialize(c)];
        b.add_output("y", bits).unwrap();
        let nl = b.finish();
        let want = 2 * m.area_of(GateKind::Xor2) + 2 * m.area_of(GateKind::And2) + m.area_of(GateKind::Or2);
        assert_eq!(area_units(&nl, &m), want);
        assert_eq!(want, 7);
    }

    #[test]
    fn not_gate_toggles() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 1).unwrap();
        let o = b.gate(GateKind::Not, &x);
        b.add_output("y", vec![o]).unwrap();
        let nl = b.finish();
        assert_eq!(switching_activity(&nl, &[(vec![false], vec![true])]).unwrap(), 2);
        assert_eq!(switching_activity(&nl, &[(vec![true], vec![true])]).unwrap(), 0);
        assert!(switching_activity(&nl, &[(vec![true], vec![])]).is_err());
        assert_eq!(switching_activity_words(&nl, &[(vec![0], vec![1])]).unwrap(), 2);
    }

    #[test]
    fn cost_model_validation() {
        let mut m = default();
        m.delay.remove(&GateKind::Nor2);
        assert!(m.validate().is_err());
        let mut m = default();
        m.area.insert(GateKind::Const1, 1);
        assert!(m.validate().is_err());
        let text = default().to_json();
        assert_eq!(GateCostModel::from_json(&text).unwrap(), default());
    }
}
