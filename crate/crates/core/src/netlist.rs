//! Typed 1-bit gate graphs.
//!
//! A [`Netlist`] is built once through a [`NetlistBuilder`] and is immutable
//! afterwards. Net ids are dense and assigned in creation order: primary
//! input bits first, then one net per gate. Creation order is therefore a
//! topological order, and every evaluator is a single forward pass.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense identifier of a 1-bit signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "AND2")]
    And2,
    #[serde(rename = "OR2")]
    Or2,
    #[serde(rename = "NAND2")]
    Nand2,
    #[serde(rename = "NOR2")]
    Nor2,
    #[serde(rename = "XOR2")]
    Xor2,
    #[serde(rename = "XNOR2")]
    Xnor2,
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "CONST0")]
    Const0,
    #[serde(rename = "CONST1")]
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::And2,
        GateKind::Or2,
        GateKind::Nand2,
        GateKind::Nor2,
        GateKind::Xor2,
        GateKind::Xnor2,
        GateKind::Not,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And2 => "AND2",
            GateKind::Or2 => "OR2",
            GateKind::Nand2 => "NAND2",
            GateKind::Nor2 => "NOR2",
            GateKind::Xor2 => "XOR2",
            GateKind::Xnor2 => "XNOR2",
            GateKind::Not => "NOT",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    /// Bitwise evaluation over 64 independent lanes. Unused operands are ignored.
    #[inline]
    pub fn eval_lanes(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And2 => a & b,
            GateKind::Or2 => a | b,
            GateKind::Nand2 => !(a & b),
            GateKind::Nor2 => !(a | b),
            GateKind::Xor2 => a ^ b,
            GateKind::Xnor2 => !(a ^ b),
            GateKind::Not => !a,
            GateKind::Const0 => 0,
            GateKind::Const1 => !0,
        }
    }

    #[inline]
    pub fn eval(self, a: bool, b: bool) -> bool {
        self.eval_lanes(a as u64, b as u64) & 1 == 1
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    ins: [NetId; 2],
    pub output: NetId,
}

impl Gate {
    pub fn inputs(&self) -> &[NetId] {
        &self.ins[..self.kind.arity()]
    }
}

/// A named, ordered group of nets (LSB first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bus {
    pub name: String,
    pub bits: Vec<NetId>,
}

impl Bus {
    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    pub(crate) inputs: Vec<Bus>,
    pub(crate) gates: Vec<Gate>,
    pub(crate) outputs: Vec<Bus>,
    pub(crate) meta: BTreeMap<String, String>,
}

impl Netlist {
    pub fn inputs(&self) -> &[Bus] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Bus] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Free-form provenance attached by generators.
    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.insert(key.into(), value.into());
    }

    pub fn input(&self, name: &str) -> Option<&Bus> {
        self.inputs.iter().find(|b| b.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Bus> {
        self.outputs.iter().find(|b| b.name == name)
    }

    pub fn input_bit_count(&self) -> usize {
        self.inputs.iter().map(Bus::width).sum()
    }

    pub fn output_bit_count(&self) -> usize {
        self.outputs.iter().map(Bus::width).sum()
    }

    pub fn net_count(&self) -> usize {
        self.input_bit_count() + self.gates.len()
    }

    /// Mutable access to a gate kind, used for fault injection.
    pub fn set_gate_kind(&mut self, gate: usize, kind: GateKind) -> Result<()> {
        let g = self
            .gates
            .get_mut(gate)
            .ok_or_else(|| Error::Config(format!("gate index {gate} out of range")))?;
        if g.kind.arity() != kind.arity() {
            return Err(Error::Arity {
                kind,
                expected: kind.arity(),
                got: g.kind.arity(),
            });
        }
        g.kind = kind;
        Ok(())
    }

    /// Evaluates every net for one flat input assignment (input bits in
    /// declaration order, LSB first within each bus).
    pub fn evaluate_nets(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        let lanes: Vec<u64> = inputs.iter().map(|&b| b as u64).collect();
        Ok(self.simulate_lanes(&lanes)?.into_iter().map(|w| w & 1 == 1).collect())
    }

    /// Evaluates the primary outputs for one flat input assignment.
    pub fn evaluate(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        let nets = self.evaluate_nets(inputs)?;
        Ok(self
            .outputs
            .iter()
            .flat_map(|b| b.bits.iter().map(|n| nets[n.index()]))
            .collect())
    }

    /// Evaluates all nets over 64 independent lanes at once. `inputs` holds
    /// one word per primary input bit.
    pub fn simulate_lanes(&self, inputs: &[u64]) -> Result<Vec<u64>> {
        let expected = self.input_bit_count();
        if inputs.len() != expected {
            return Err(Error::Evaluation(format!(
                "expected {expected} input bits, got {}",
                inputs.len()
            )));
        }
        let mut values = Vec::with_capacity(self.net_count());
        values.extend_from_slice(inputs);
        for g in &self.gates {
            let a = g.ins[0].index();
            let b = g.ins[1].index();
            // unused operand slots hold NetId(0), which is always defined when
            // the gate has inputs; constant gates ignore both
            let va = values.get(a).copied().unwrap_or(0);
            let vb = values.get(b).copied().unwrap_or(0);
            values.push(g.kind.eval_lanes(va, vb));
        }
        Ok(values)
    }

    /// Evaluates with one integer per input bus, returning one integer per
    /// output bus. Buses wider than 128 bits are rejected.
    pub fn evaluate_words(&self, words: &[u128]) -> Result<Vec<u128>> {
        let lanes = self.pack_words(&[words.to_vec()])?;
        let values = self.simulate_lanes(&lanes)?;
        Ok(self.unpack_outputs(&values, 1).remove(0))
    }

    /// Packs up to 64 word-level assignments into lane words.
    pub fn pack_words(&self, vectors: &[Vec<u128>]) -> Result<Vec<u64>> {
        if vectors.len() > 64 {
            return Err(Error::Evaluation("at most 64 vectors per lane batch".into()));
        }
        let mut lanes = vec![0u64; self.input_bit_count()];
        for (lane, words) in vectors.iter().enumerate() {
            if words.len() != self.inputs.len() {
                return Err(Error::Evaluation(format!(
                    "expected {} input words, got {}",
                    self.inputs.len(),
                    words.len()
                )));
            }
            let mut bit = 0;
            for (bus, &w) in self.inputs.iter().zip(words) {
                if bus.width() > 128 {
                    return Err(Error::Evaluation(format!("bus `{}` wider than 128 bits", bus.name)));
                }
                if bus.width() < 128 && w >> bus.width() != 0 {
                    return Err(Error::Evaluation(format!(
                        "value {w} does not fit in {}-bit bus `{}`",
                        bus.width(),
                        bus.name
                    )));
                }
                for i in 0..bus.width() {
                    lanes[bit] |= (((w >> i) & 1) as u64) << lane;
                    bit += 1;
                }
            }
        }
        Ok(lanes)
    }

    /// Inverse of [`Netlist::pack_words`] for the output buses.
    pub fn unpack_outputs(&self, values: &[u64], lanes: usize) -> Vec<Vec<u128>> {
        (0..lanes)
            .map(|lane| {
                self.outputs
                    .iter()
                    .map(|bus| {
                        bus.bits.iter().enumerate().fold(0u128, |acc, (i, n)| {
                            acc | ((((values[n.index()] >> lane) & 1) as u128) << i)
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Set of nets in the transitive fan-in of `root`, including `root`.
    pub fn fanin_cone(&self, root: NetId) -> HashSet<NetId> {
        let first_gate = self.input_bit_count();
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            if n.index() >= first_gate {
                stack.extend_from_slice(self.gates[n.index() - first_gate].inputs());
            }
        }
        seen
    }
}

/// Either a known constant or a net. Builder helpers fold constants so that
/// generators can pad ragged columns with zeros without emitting gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Zero,
    One,
    Net(NetId),
}

impl Signal {
    pub fn net(self) -> Option<NetId> {
        match self {
            Signal::Net(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Signal::Zero
    }
}

impl From<NetId> for Signal {
    fn from(n: NetId) -> Self {
        Signal::Net(n)
    }
}

#[derive(Clone, Debug, Default)]
pub struct NetlistBuilder {
    inputs: Vec<Bus>,
    gates: Vec<Gate>,
    outputs: Vec<Bus>,
    input_bits: u32,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_input(&mut self, name: &str, width: usize) -> Result<Vec<NetId>> {
        if !self.gates.is_empty() {
            return Err(Error::LateInput);
        }
        if self.inputs.iter().any(|b| b.name == name) {
            return Err(Error::DuplicatePort(name.to_string()));
        }
        let bits: Vec<NetId> = (0..width as u32).map(|i| NetId(self.input_bits + i)).collect();
        self.input_bits += width as u32;
        self.inputs.push(Bus {
            name: name.to_string(),
            bits: bits.clone(),
        });
        Ok(bits)
    }

    pub fn net_count(&self) -> usize {
        self.input_bits as usize + self.gates.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn is_defined(&self, n: NetId) -> bool {
        n.index() < self.net_count()
    }

    /// Appends a primitive gate and returns its output net.
    pub fn add_gate(&mut self, kind: GateKind, inputs: &[NetId]) -> Result<NetId> {
        if inputs.len() != kind.arity() {
            return Err(Error::Arity {
                kind,
                expected: kind.arity(),
                got: inputs.len(),
            });
        }
        if let Some(&bad) = inputs.iter().find(|&&n| !self.is_defined(n)) {
            return Err(Error::UnknownNet(bad));
        }
        let mut ins = [NetId(0); 2];
        ins[..inputs.len()].copy_from_slice(inputs);
        let output = NetId(self.net_count() as u32);
        self.gates.push(Gate { kind, ins, output });
        Ok(output)
    }

    /// Like [`add_gate`](Self::add_gate) for nets this builder produced.
    ///
    /// # Panics
    /// On arity mismatch or foreign nets; both are generator bugs.
    pub fn gate(&mut self, kind: GateKind, inputs: &[NetId]) -> NetId {
        self.add_gate(kind, inputs)
            .unwrap_or_else(|e| panic!("invalid gate construction: {e}"))
    }

    pub fn add_output(&mut self, name: &str, bits: Vec<NetId>) -> Result<()> {
        if self.outputs.iter().any(|b| b.name == name) {
            return Err(Error::DuplicatePort(name.to_string()));
        }
        if let Some(&bad) = bits.iter().find(|&&n| !self.is_defined(n)) {
            return Err(Error::UnknownNet(bad));
        }
        self.outputs.push(Bus {
            name: name.to_string(),
            bits,
        });
        Ok(())
    }

    pub fn finish(self) -> Netlist {
        Netlist {
            inputs: self.inputs,
            gates: self.gates,
            outputs: self.outputs,
            meta: BTreeMap::new(),
        }
    }

    /// Turns a signal into a real net, emitting a CONST gate if needed.
    pub fn materialize(&mut self, s: Signal) -> NetId {
        match s {
            Signal::Net(n) => n,
            Signal::Zero => self.gate(GateKind::Const0, &[]),
            Signal::One => self.gate(GateKind::Const1, &[]),
        }
    }

    pub fn not(&mut self, a: Signal) -> Signal {
        match a {
            Signal::Zero => Signal::One,
            Signal::One => Signal::Zero,
            Signal::Net(n) => Signal::Net(self.gate(GateKind::Not, &[n])),
        }
    }

    pub fn and(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Zero, _) | (_, Signal::Zero) => Signal::Zero,
            (Signal::One, x) | (x, Signal::One) => x,
            (Signal::Net(x), Signal::Net(y)) => Signal::Net(self.gate(GateKind::And2, &[x, y])),
        }
    }

    pub fn or(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::One, _) | (_, Signal::One) => Signal::One,
            (Signal::Zero, x) | (x, Signal::Zero) => x,
            (Signal::Net(x), Signal::Net(y)) => Signal::Net(self.gate(GateKind::Or2, &[x, y])),
        }
    }

    pub fn xor(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Zero, x) | (x, Signal::Zero) => x,
            (Signal::One, x) | (x, Signal::One) => self.not(x),
            (Signal::Net(x), Signal::Net(y)) => Signal::Net(self.gate(GateKind::Xor2, &[x, y])),
        }
    }

    /// `sel ? when1 : when0` as OR2(AND2(sel, when1), AND2(NOT(sel), when0)).
    /// `not_sel` lets a block share one inverter across its multiplexers.
    pub fn mux(&mut self, sel: Signal, not_sel: Signal, when0: Signal, when1: Signal) -> Signal {
        let hi = self.and(sel, when1);
        let lo = self.and(not_sel, when0);
        self.or(hi, lo)
    }

    /// (2,2) counter. Returns `(sum, carry)`.
    pub fn half_adder(&mut self, a: Signal, b: Signal) -> (Signal, Signal) {
        (self.xor(a, b), self.and(a, b))
    }

    /// (3,2) counter. Returns `(sum, carry)`; `c` is the late-arriving input.
    pub fn full_adder(&mut self, a: Signal, b: Signal, c: Signal) -> (Signal, Signal) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, c);
        let g = self.and(a, b);
        let p = self.and(ab, c);
        (sum, self.or(g, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kind: GateKind) -> Netlist {
        let mut b = NetlistBuilder::new();
        let ins = b.add_input("x", kind.arity()).unwrap();
        let o = b.add_gate(kind, &ins).unwrap();
        b.add_output("y", vec![o]).unwrap();
        b.finish()
    }

    #[test]
    fn truth_tables() {
        let reference: [(GateKind, fn(bool, bool) -> bool); 6] = [
            (GateKind::And2, |a, b| a && b),
            (GateKind::Or2, |a, b| a || b),
            (GateKind::Nand2, |a, b| !(a && b)),
            (GateKind::Nor2, |a, b| !(a || b)),
            (GateKind::Xor2, |a, b| a != b),
            (GateKind::Xnor2, |a, b| a == b),
        ];
        for (kind, f) in reference {
            let nl = single(kind);
            for a in [false, true] {
                for b in [false, true] {
                    assert_eq!(nl.evaluate(&[a, b]).unwrap(), vec![f(a, b)], "{kind}");
                }
            }
        }
        let nl = single(GateKind::Not);
        assert_eq!(nl.evaluate(&[false]).unwrap(), vec![true]);
        assert_eq!(nl.evaluate(&[true]).unwrap(), vec![false]);
        assert_eq!(single(GateKind::Const0).evaluate(&[]).unwrap(), vec![false]);
        assert_eq!(single(GateKind::Const1).evaluate(&[]).unwrap(), vec![true]);
    }

    #[test]
    fn and_of_constants() {
        let mut b = NetlistBuilder::new();
        let one = b.gate(GateKind::Const1, &[]);
        let o = b.gate(GateKind::And2, &[one, one]);
        let zero = b.gate(GateKind::Const0, &[]);
        let inv = b.gate(GateKind::Not, &[zero]);
        b.add_output("y", vec![o, inv]).unwrap();
        assert_eq!(b.finish().evaluate(&[]).unwrap(), vec![true, true]);
    }

    #[test]
    fn xor_self_cancels() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 1).unwrap()[0];
        let o = b.gate(GateKind::Xor2, &[x, x]);
        b.add_output("y", vec![o]).unwrap();
        let nl = b.finish();
        for v in [false, true] {
            assert_eq!(nl.evaluate(&[v]).unwrap(), vec![false]);
        }
    }

    #[test]
    fn construction_errors() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 2).unwrap();
        assert!(matches!(
            b.add_gate(GateKind::Not, &x),
            Err(Error::Arity { expected: 1, got: 2, .. })
        ));
        assert!(matches!(
            b.add_gate(GateKind::And2, &[x[0], NetId(7)]),
            Err(Error::UnknownNet(NetId(7)))
        ));
        b.gate(GateKind::And2, &x);
        assert!(matches!(b.add_input("late", 1), Err(Error::LateInput)));
        assert!(matches!(b.add_output("o", vec![NetId(99)]), Err(Error::UnknownNet(_))));
    }

    #[test]
    fn evaluation_rejects_wrong_width() {
        let nl = single(GateKind::And2);
        assert!(nl.evaluate(&[true]).is_err());
        assert!(nl.evaluate(&[true, false, true]).is_err());
        assert!(nl.evaluate_words(&[4]).is_err());
    }

    #[test]
    fn folding_emits_no_gates_for_constants() {
        let mut b = NetlistBuilder::new();
        let x = Signal::Net(b.add_input("x", 1).unwrap()[0]);
        assert_eq!(b.and(x, Signal::Zero), Signal::Zero);
        assert_eq!(b.and(x, Signal::One), x);
        assert_eq!(b.or(Signal::Zero, x), x);
        assert_eq!(b.xor(x, Signal::Zero), x);
        assert_eq!(b.gate_count(), 0);
        let (s, c) = b.full_adder(x, Signal::Zero, Signal::Zero);
        assert_eq!((s, c), (x, Signal::Zero));
        assert_eq!(b.gate_count(), 0);
    }

    #[test]
    fn mux_selects() {
        let mut b = NetlistBuilder::new();
        let ins = b.add_input("i", 3).unwrap();
        let [s, a0, a1] = [ins[0], ins[1], ins[2]].map(Signal::Net);
        let ns = b.not(s);
        let o = b.mux(s, ns, a0, a1);
        let o = b.materialize(o);
        b.add_output("o", vec![o]).unwrap();
        let nl = b.finish();
        for v in 0..8u128 {
            let want = if v & 1 == 1 { (v >> 2) & 1 } else { (v >> 1) & 1 };
            assert_eq!(nl.evaluate_words(&[v]).unwrap(), vec![want]);
        }
    }

    #[test]
    fn lanes_match_scalar() {
        let mut b = NetlistBuilder::new();
        let ins: Vec<Signal> = b.add_input("x", 3).unwrap().into_iter().map(Signal::Net).collect();
        let (s, c) = b.full_adder(ins[0], ins[1], ins[2]);
        let (s, c) = (b.materialize(s), b.materialize(c));
        b.add_output("sc", vec![s, c]).unwrap();
        let nl = b.finish();
        let vectors: Vec<Vec<u128>> = (0..8).map(|v| vec![v]).collect();
        let lanes = nl.pack_words(&vectors).unwrap();
        let values = nl.simulate_lanes(&lanes).unwrap();
        for (v, out) in nl.unpack_outputs(&values, 8).into_iter().enumerate() {
            assert_eq!(out, vec![(v as u32).count_ones() as u128]);
            assert_eq!(out, nl.evaluate_words(&[v as u128]).unwrap());
        }
    }
}
