//! Final-addition building blocks: ripple-carry and carry-lookahead adders,
//! binary to excess-1 converters (BEC, and BECWC with carry out), the
//! multiplexed MBEC selection block and the variable-block hybrid adder.
//!
//! Internally everything works on [`Signal`]s so that missing column bits
//! fold away; the `build_*` functions are the net-level entry points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{NetId, NetlistBuilder, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdderKind {
    Ripple,
    Lookahead,
}

impl std::str::FromStr for AdderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ripple" | "rca" => Ok(AdderKind::Ripple),
            "lookahead" | "cla" => Ok(AdderKind::Lookahead),
            _ => Err(Error::Config(format!("unknown adder `{s}` (expected ripple or lookahead)"))),
        }
    }
}

/// Lookahead group size of the CLA.
pub const CLA_GROUP: usize = 4;

fn nets(sigs: &[NetId]) -> Vec<Signal> {
    sigs.iter().map(|&n| Signal::Net(n)).collect()
}

fn check_widths(x: &[NetId], y: &[NetId]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Config(format!(
            "adder operands differ in width: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Adds two rows (the shorter one is zero-extended) plus a carry-in.
pub fn add_signals(
    kind: AdderKind,
    x: &[Signal],
    y: &[Signal],
    cin: Signal,
    b: &mut NetlistBuilder,
) -> (Vec<Signal>, Signal) {
    let width = x.len().max(y.len());
    let pad = |v: &[Signal]| {
        let mut v = v.to_vec();
        v.resize(width, Signal::Zero);
        v
    };
    let (x, y) = (pad(x), pad(y));
    match kind {
        AdderKind::Ripple => ripple(&x, &y, cin, b),
        AdderKind::Lookahead => lookahead(&x, &y, cin, b),
    }
}

/// In-place Sklansky prefix over (generate, propagate) pairs: afterwards
/// `gen[i]`/`prop[i]` cover bits `0..=i`.
fn gp_prefix(gen: &mut [Signal], prop: &mut [Signal], b: &mut NetlistBuilder) {
    let len = gen.len();
    let mut span = 1;
    while span < len {
        for i in 0..len {
            if (i / span) % 2 == 1 {
                let from = (i / span) * span - 1;
                let t = b.and(prop[i], gen[from]);
                gen[i] = b.or(gen[i], t);
                prop[i] = b.and(prop[i], prop[from]);
            }
        }
        span *= 2;
    }
}

fn ripple(x: &[Signal], y: &[Signal], cin: Signal, b: &mut NetlistBuilder) -> (Vec<Signal>, Signal) {
    let mut c = cin;
    let mut sum = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.iter().zip(y) {
        let (s, co) = b.full_adder(xi, yi, c);
        sum.push(s);
        c = co;
    }
    (sum, c)
}

/// Groups of [`CLA_GROUP`] bits. Inside a group, the generate/propagate
/// terms of every bit prefix are formed in parallel, so each carry is
/// `c_{i+1} = G[i:0] | P[i:0] & c_in` and costs two levels after the group
/// carry-in arrives. Group carries ripple from one group to the next.
fn lookahead(x: &[Signal], y: &[Signal], cin: Signal, b: &mut NetlistBuilder) -> (Vec<Signal>, Signal) {
    let mut c = cin;
    let mut sum = Vec::with_capacity(x.len());
    for (xs, ys) in x.chunks(CLA_GROUP).zip(y.chunks(CLA_GROUP)) {
        let p: Vec<Signal> = xs.iter().zip(ys).map(|(&xi, &yi)| b.xor(xi, yi)).collect();
        let mut gen: Vec<Signal> = xs.iter().zip(ys).map(|(&xi, &yi)| b.and(xi, yi)).collect();
        let mut prop = p.clone();
        gp_prefix(&mut gen, &mut prop, b);
        let group_cin = c;
        let mut carry = group_cin;
        for i in 0..p.len() {
            sum.push(b.xor(p[i], carry));
            let t = b.and(prop[i], group_cin);
            carry = b.or(gen[i], t);
        }
        c = carry;
    }
    (sum, c)
}

pub fn build_rca(
    x: &[NetId],
    y: &[NetId],
    cin: NetId,
    b: &mut NetlistBuilder,
) -> Result<(Vec<NetId>, NetId)> {
    check_widths(x, y)?;
    let (s, c) = ripple(&nets(x), &nets(y), Signal::Net(cin), b);
    Ok((s.into_iter().map(|s| b.materialize(s)).collect(), b.materialize(c)))
}

pub fn build_cla(
    x: &[NetId],
    y: &[NetId],
    cin: NetId,
    b: &mut NetlistBuilder,
) -> Result<(Vec<NetId>, NetId)> {
    check_widths(x, y)?;
    let (s, c) = lookahead(&nets(x), &nets(y), Signal::Net(cin), b);
    Ok((s.into_iter().map(|s| b.materialize(s)).collect(), b.materialize(c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BecVariant {
    Plain,
    WithCarry,
}

/// Excess-1 conversion: `x = b + 1 mod 2^m`, `cy = 1` iff every bit of `b`
/// is set. Bit `i` flips when all lower bits are 1; the all-ones prefixes
/// are formed as a balanced AND tree per bit position.
pub fn bec_signals(bits: &[Signal], b: &mut NetlistBuilder) -> (Vec<Signal>, Signal) {
    let prefixes = and_prefixes(bits, b);
    let mut x = Vec::with_capacity(bits.len());
    for (i, &bit) in bits.iter().enumerate() {
        let lower = if i == 0 { Signal::One } else { prefixes[i - 1] };
        x.push(b.xor(bit, lower));
    }
    let cy = prefixes.last().copied().unwrap_or(Signal::One);
    (x, cy)
}

/// `out[i] = bits[0] & ... & bits[i]`, as a Sklansky-style prefix network.
fn and_prefixes(bits: &[Signal], b: &mut NetlistBuilder) -> Vec<Signal> {
    let mut out = bits.to_vec();
    let mut span = 1;
    while span < out.len() {
        for i in 0..out.len() {
            // in each block of 2*span, the upper half picks up the last
            // prefix of the lower half
            if (i / span) % 2 == 1 {
                let from = (i / span) * span - 1;
                out[i] = b.and(out[i], out[from]);
            }
        }
        span *= 2;
    }
    out
}

pub fn build_bec(
    bits: &[NetId],
    variant: BecVariant,
    b: &mut NetlistBuilder,
) -> Result<(Vec<NetId>, Option<NetId>)> {
    if bits.is_empty() {
        return Err(Error::Config("BEC width must be at least 1".into()));
    }
    let (x, cy) = bec_signals(&nets(bits), b);
    let x = x.into_iter().map(|s| b.materialize(s)).collect();
    let cy = match variant {
        BecVariant::Plain => None,
        BecVariant::WithCarry => Some(b.materialize(cy)),
    };
    Ok((x, cy))
}

/// MBEC block: passes `bits` through when `select` is 0 and their excess-1
/// code when it is 1. The with-carry variant also returns the selected
/// carry: the mux compares `{0, bits}` against `{cy, x}`, the appended 0
/// being a CONST0 net.
pub fn mbec_signals(
    bits: &[Signal],
    select: Signal,
    variant: BecVariant,
    b: &mut NetlistBuilder,
) -> (Vec<Signal>, Option<Signal>) {
    let (x, cy) = bec_signals(bits, b);
    let not_sel = b.not(select);
    let out = bits
        .iter()
        .zip(&x)
        .map(|(&p, &inc)| b.mux(select, not_sel, p, inc))
        .collect();
    let carry = match variant {
        BecVariant::Plain => None,
        BecVariant::WithCarry => {
            let zero = Signal::Net(b.materialize(Signal::Zero));
            Some(b.mux(select, not_sel, zero, cy))
        }
    };
    (out, carry)
}

pub fn build_mbec_block(
    bits: &[NetId],
    select: NetId,
    variant: BecVariant,
    b: &mut NetlistBuilder,
) -> Result<(Vec<NetId>, Option<NetId>)> {
    if bits.is_empty() {
        return Err(Error::Config("MBEC width must be at least 1".into()));
    }
    let (out, carry) = mbec_signals(&nets(bits), Signal::Net(select), variant, b);
    let out = out.into_iter().map(|s| b.materialize(s)).collect();
    Ok((out, carry.map(|c| b.materialize(c))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub width: usize,
    pub variant: BecVariant,
}

/// Block decomposition of the hybrid adder over the upper `n` product bits:
/// a `cla_width`-bit CLA, then MBEC blocks from low to high weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalAdderPlan {
    pub cla_width: usize,
    pub blocks: Vec<BlockSpec>,
}

/// Number of bits part0's sum spills above weight `n - 1`: the bit length of
/// `(n-1) * 2^n + 1` minus `n`, which is the bit length of `n - 1`.
pub fn overflow_width(n: usize) -> usize {
    assert!(n >= 2);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

impl FinalAdderPlan {
    /// CLA over the overflow bits, then with-carry blocks of 4, 8, 16, ...
    /// while the remainder stays at least as wide as the next block, and a
    /// plain terminal block with whatever is left.
    pub fn default_for(n: usize) -> FinalAdderPlan {
        let k = overflow_width(n).min(n);
        let mut rem = n - k;
        let mut size = 4;
        let mut blocks = vec![];
        while rem >= 2 * size {
            blocks.push(BlockSpec {
                width: size,
                variant: BecVariant::WithCarry,
            });
            rem -= size;
            size *= 2;
        }
        if rem > 0 {
            blocks.push(BlockSpec {
                width: rem,
                variant: BecVariant::Plain,
            });
        }
        FinalAdderPlan { cla_width: k, blocks }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let covered = self.cla_width + self.blocks.iter().map(|b| b.width).sum::<usize>();
        if covered != n {
            return Err(Error::Config(format!(
                "plan covers {covered} bits but the upper half has {n}"
            )));
        }
        if self.cla_width == 0 {
            return Err(Error::Config("plan needs a CLA stage of at least 1 bit".into()));
        }
        let last = self.blocks.len().saturating_sub(1);
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.width == 0 {
                return Err(Error::Config(format!("block {i} is empty")));
            }
            if i < last {
                if blk.variant != BecVariant::WithCarry {
                    return Err(Error::Config(format!("non-terminal block {i} must carry out")));
                }
                if blk.width < 4 || !blk.width.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "non-terminal block {i} has width {}, expected a power of two >= 4",
                        blk.width
                    )));
                }
            } else if blk.variant != BecVariant::Plain {
                return Err(Error::Config("terminal block must be plain".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }
}

#[derive(Clone, Debug)]
pub struct HybridOutput {
    /// Upper product bits, weight `n` first.
    pub bits: Vec<Signal>,
    /// Carry out of the CLA stage.
    pub cla_carry: Signal,
    /// Select line of every block, in plan order.
    pub selects: Vec<Signal>,
}

/// Adds part0's overflow bits into part1's sum. The CLA handles the low
/// `cla_width` bits; each MBEC block above is selected by the carry of the
/// stage below it, so no carry ripples through the block bits themselves.
pub fn assemble_hybrid_adder(
    overflow: &[Signal],
    part1: &[Signal],
    plan: &FinalAdderPlan,
    b: &mut NetlistBuilder,
) -> Result<HybridOutput> {
    plan.validate(part1.len())?;
    if overflow.len() != plan.cla_width {
        return Err(Error::Config(format!(
            "CLA stage is {} bits but {} overflow bits were given",
            plan.cla_width,
            overflow.len()
        )));
    }
    let k = plan.cla_width;
    let (mut bits, cla_carry) = add_signals(AdderKind::Lookahead, overflow, &part1[..k], Signal::Zero, b);
    let mut select = cla_carry;
    let mut selects = Vec::with_capacity(plan.blocks.len());
    let mut pos = k;
    for blk in &plan.blocks {
        selects.push(select);
        let (out, carry) = mbec_signals(&part1[pos..pos + blk.width], select, blk.variant, b);
        bits.extend(out);
        if let Some(c) = carry {
            select = c;
        }
        pos += blk.width;
    }
    Ok(HybridOutput {
        bits,
        cla_carry,
        selects,
    })
}
