//! Complete unsigned multipliers: the regular Dadda baseline and the
//! partitioned designs, plus verification against integer multiplication.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adders::{add_signals, assemble_hybrid_adder, overflow_width, AdderKind, FinalAdderPlan};
use crate::dadda::{cpa_sum, reduce_to_two_rows, ReductionSchedule};
use crate::error::{Error, Result};
use crate::netlist::{NetId, Netlist, NetlistBuilder, Signal};
use crate::ppgen::{generate_pp, partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    RegularCla,
    PartitionedCla,
    PartitionedHybrid,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::RegularCla, Variant::PartitionedCla, Variant::PartitionedHybrid];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RegularCla => "regular-cla",
            Variant::PartitionedCla => "partitioned-cla",
            Variant::PartitionedHybrid => "partitioned-hybrid",
        }
    }

    pub fn is_partitioned(self) -> bool {
        self != Variant::RegularCla
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s || v.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// Default adder used to sum each part's two rows.
pub const DEFAULT_PART_ADDER: AdderKind = AdderKind::Lookahead;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierConfig {
    pub n: usize,
    pub variant: Variant,
    /// Hybrid variant only; `None` means [`FinalAdderPlan::default_for`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<FinalAdderPlan>,
    /// Adder that sums each part's two rows (partitioned variants).
    pub part_adder: AdderKind,
}

impl MultiplierConfig {
    pub fn new(n: usize, variant: Variant) -> Self {
        MultiplierConfig {
            n,
            variant,
            plan: None,
            part_adder: DEFAULT_PART_ADDER,
        }
    }

    pub fn with_plan(mut self, plan: FinalAdderPlan) -> Self {
        self.plan = Some(plan);
        self
    }

    pub fn with_part_adder(mut self, kind: AdderKind) -> Self {
        self.part_adder = kind;
        self
    }

    pub fn effective_plan(&self) -> Option<FinalAdderPlan> {
        (self.variant == Variant::PartitionedHybrid)
            .then(|| self.plan.clone().unwrap_or_else(|| FinalAdderPlan::default_for(self.n)))
    }

    pub fn validate(&self) -> Result<()> {
        let min = if self.variant.is_partitioned() { 4 } else { 2 };
        if self.n < min {
            return Err(Error::Config(format!(
                "{} needs n >= {min}, got {}",
                self.variant, self.n
            )));
        }
        if self.plan.is_some() && self.variant != Variant::PartitionedHybrid {
            return Err(Error::Config(format!("{} takes no final adder plan", self.variant)));
        }
        if let Some(plan) = self.effective_plan() {
            plan.validate(self.n)?;
            let k = overflow_width(self.n);
            if plan.cla_width < k {
                return Err(Error::Config(format!(
                    "CLA stage of {} bits cannot absorb {k} overflow bits",
                    plan.cla_width
                )));
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialization cannot fail");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

/// Bookkeeping for the two independent halves of a partitioned design.
#[derive(Clone, Debug)]
pub struct PartInfo {
    pub part0_terms: Vec<NetId>,
    pub part1_terms: Vec<NetId>,
    /// part0's summed row, weights `0..n+k`.
    pub part0_sum: Vec<Signal>,
    /// part1's summed row, weights `n..2n`.
    pub part1_sum: Vec<Signal>,
    /// Index of the first gate of the final (cross-part) adder.
    pub final_stage_gate: usize,
}

#[derive(Clone, Debug)]
pub struct MultiplierNetlist {
    pub netlist: Netlist,
    pub config: MultiplierConfig,
    pub schedules: Vec<ReductionSchedule>,
    pub parts: Option<PartInfo>,
}

impl MultiplierNetlist {
    pub fn product(&self, a: u64, b: u64) -> Result<u128> {
        Ok(self.netlist.evaluate_words(&[a as u128, b as u128])?[0])
    }

    pub fn stage_count(&self) -> usize {
        self.schedules.iter().map(|s| s.stages.len()).max().unwrap_or(0)
    }
}

pub fn build(config: &MultiplierConfig) -> Result<MultiplierNetlist> {
    config.validate()?;
    match config.variant {
        Variant::RegularCla => build_regular(config.n),
        _ => build_partitioned_with(config),
    }
}

fn operands(n: usize) -> Result<(NetlistBuilder, Vec<NetId>, Vec<NetId>)> {
    let mut b = NetlistBuilder::new();
    let a = b.add_input("a", n)?;
    let bb = b.add_input("b", n)?;
    Ok((b, a, bb))
}

fn finish(
    mut b: NetlistBuilder,
    product: Vec<Signal>,
    config: MultiplierConfig,
    schedules: Vec<ReductionSchedule>,
    parts: Option<PartInfo>,
) -> Result<MultiplierNetlist> {
    let bits: Vec<NetId> = product.into_iter().map(|s| b.materialize(s)).collect();
    b.add_output("p", bits)?;
    let mut netlist = b.finish();
    let schedule_json: String = schedules.iter().map(|s| s.to_json()).collect();
    netlist.set_meta("n", config.n.to_string());
    netlist.set_meta("variant", config.variant.name());
    netlist.set_meta("config", serde_json::to_string(&config)?);
    netlist.set_meta("config_digest", config.digest());
    if let Some(plan) = config.effective_plan() {
        netlist.set_meta("plan", serde_json::to_string(&plan)?);
    }
    netlist.set_meta(
        "schedule_digest",
        hex::encode(&Sha256::digest(schedule_json.as_bytes())[..8]),
    );
    Ok(MultiplierNetlist {
        netlist,
        config,
        schedules,
        parts,
    })
}

/// Full-matrix Dadda reduction followed by a CLA over all product bits.
pub fn build_regular(n: usize) -> Result<MultiplierNetlist> {
    let config = MultiplierConfig::new(n, Variant::RegularCla);
    config.validate()?;
    let (mut b, a, bb) = operands(n)?;
    let matrix = generate_pp(n, &a, &bb, &mut b)?;
    let (rows, schedule) = reduce_to_two_rows(&matrix.to_columns(), &mut b)?;
    let mut product = cpa_sum(&rows, AdderKind::Lookahead, &mut b);
    product.resize(2 * n, Signal::Zero);
    finish(b, product, config, vec![schedule], None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinalAdder {
    Cla,
    Hybrid(FinalAdderPlan),
}

pub fn build_partitioned(n: usize, final_adder: FinalAdder) -> Result<MultiplierNetlist> {
    let config = match final_adder {
        FinalAdder::Cla => MultiplierConfig::new(n, Variant::PartitionedCla),
        FinalAdder::Hybrid(plan) => MultiplierConfig::new(n, Variant::PartitionedHybrid).with_plan(plan),
    };
    build(&config)
}

fn build_partitioned_with(config: &MultiplierConfig) -> Result<MultiplierNetlist> {
    let n = config.n;
    let (mut b, a, bb) = operands(n)?;
    let matrix = generate_pp(n, &a, &bb, &mut b)?;
    let parts = partition(&matrix);

    let (rows0, sched0) = reduce_to_two_rows(&parts.part0.to_columns(), &mut b)?;
    let (rows1, sched1) = reduce_to_two_rows(&parts.part1.to_columns(), &mut b)?;
    let sum0 = cpa_sum(&rows0, config.part_adder, &mut b);
    let mut sum1 = cpa_sum(&rows1, config.part_adder, &mut b);
    sum1.resize(n, Signal::Zero);
    debug_assert_eq!(sum0.len(), n + overflow_width(n));

    let final_stage_gate = b.gate_count();
    let mut product = sum0[..n].to_vec();
    let mut overflow = sum0[n..].to_vec();
    let upper = match config.effective_plan() {
        None => {
            let (bits, _) = add_signals(AdderKind::Lookahead, &overflow, &sum1, Signal::Zero, &mut b);
            bits
        }
        Some(plan) => {
            overflow.resize(plan.cla_width, Signal::Zero);
            assemble_hybrid_adder(&overflow, &sum1, &plan, &mut b)?.bits
        }
    };
    product.extend(upper);

    let info = PartInfo {
        part0_terms: parts.part0.terms().map(|t| t.net).collect(),
        part1_terms: parts.part1.terms().map(|t| t.net).collect(),
        part0_sum: sum0,
        part1_sum: sum1,
        final_stage_gate,
    };
    finish(b, product, config.clone(), vec![sched0, sched1], Some(info))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyMode {
    Exhaustive,
    Random { count: u64, seed: u64 },
}

/// Largest operand width for which exhaustive verification is accepted.
pub const MAX_EXHAUSTIVE_WIDTH: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: u64,
    pub b: u64,
    pub got: u128,
    pub want: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub mode: VerifyMode,
    pub cases: u64,
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
}

/// Operand width of a netlist with ports `a[n]`, `b[n]` and `p[2n]`.
pub fn multiplier_width(netlist: &Netlist) -> Result<usize> {
    let (a, b, p) = match (netlist.input("a"), netlist.input("b"), netlist.output("p")) {
        (Some(a), Some(b), Some(p)) => (a, b, p),
        _ => return Err(Error::Malformed("multiplier needs inputs a, b and output p".into())),
    };
    let n = a.width();
    if b.width() != n || p.width() != 2 * n || netlist.inputs().len() != 2 || n == 0 || n > 64 {
        return Err(Error::Malformed(format!(
            "port widths a={}, b={}, p={} do not form an n x n multiplier with n <= 64",
            n,
            b.width(),
            p.width()
        )));
    }
    Ok(n)
}

/// Compares the netlist against `a * b`. Cases are simulated 64 at a time
/// in parallel; the reported counterexample is the first failing case in
/// enumeration order, so the result only depends on the mode.
pub fn verify(netlist: &Netlist, mode: VerifyMode) -> Result<VerifyReport> {
    let n = multiplier_width(netlist)?;
    let a_first = netlist.inputs()[0].name == "a";
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let cases: Vec<(u64, u64)> = match mode {
        VerifyMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_WIDTH {
                return Err(Error::Config(format!(
                    "exhaustive verification of a {n}-bit multiplier means 2^{} cases; \
                     it is limited to n <= {MAX_EXHAUSTIVE_WIDTH}, use random mode instead",
                    2 * n
                )));
            }
            (0..=mask).flat_map(|a| (0..=mask).map(move |b| (a, b))).collect()
        }
        VerifyMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| (rng.gen::<u64>() & mask, rng.gen::<u64>() & mask)).collect()
        }
    };
    let first_failure = cases
        .par_chunks(64)
        .enumerate()
        .map(|(chunk_idx, chunk)| -> Result<Option<(usize, Counterexample)>> {
            let vectors: Vec<Vec<u128>> = chunk
                .iter()
                .map(|&(a, b)| if a_first { vec![a as u128, b as u128] } else { vec![b as u128, a as u128] })
                .collect();
            let values = netlist.simulate_lanes(&netlist.pack_words(&vectors)?)?;
            let outs = netlist.unpack_outputs(&values, chunk.len());
            let p_index = netlist.outputs().iter().position(|o| o.name == "p").unwrap();
            Ok(chunk.iter().zip(outs).enumerate().find_map(|(i, (&(a, b), out))| {
                let want = a as u128 * b as u128;
                let got = out[p_index];
                (got != want).then_some((chunk_idx * 64 + i, Counterexample { a, b, got, want }))
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .min_by_key(|(i, _)| *i)
        .map(|(_, c)| c);
    Ok(VerifyReport {
        n,
        mode,
        cases: cases.len() as u64,
        pass: first_failure.is_none(),
        counterexample: first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::GateKind;

    #[test]
    fn regular_examples() {
        let m = build_regular(8).unwrap();
        assert_eq!(m.stage_count(), 4);
        assert_eq!(m.product(181, 23).unwrap(), 4163);
        assert_eq!(m.product(255, 255).unwrap(), 65025);
        let m2 = build_regular(2).unwrap();
        assert_eq!(m2.product(3, 3).unwrap(), 9);
    }

    #[test]
    fn zero_and_identity() {
        for v in Variant::ALL {
            let m = build(&MultiplierConfig::new(8, v)).unwrap();
            for x in [0u64, 1, 77, 200, 255] {
                assert_eq!(m.product(0, x).unwrap(), 0);
                assert_eq!(m.product(1, x).unwrap(), x as u128);
            }
        }
    }

    #[test]
    fn partitioned_examples() {
        let m = build_partitioned(8, FinalAdder::Hybrid(FinalAdderPlan::default_for(8))).unwrap();
        assert_eq!(m.product(255, 255).unwrap(), 65025);
        let parts = m.parts.as_ref().unwrap();
        assert_eq!(parts.part0_sum.len(), 11);
        assert_eq!(parts.part1_sum.len(), 8);
        // p[7:0] are part0's low bits, wired straight to the output
        let p = &m.netlist.output("p").unwrap().bits;
        for w in 0..8 {
            assert_eq!(Signal::Net(p[w]), parts.part0_sum[w]);
        }
        let m16 = build_partitioned(16, FinalAdder::Cla).unwrap();
        assert_eq!(m16.product(65535, 1).unwrap(), 65535);
    }

    #[test]
    fn partitioned_needs_n4() {
        for v in [Variant::PartitionedCla, Variant::PartitionedHybrid] {
            assert!(matches!(build(&MultiplierConfig::new(2, v)), Err(Error::Config(_))));
            assert!(build(&MultiplierConfig::new(4, v)).is_ok());
        }
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let short = FinalAdderPlan {
            cla_width: 2,
            blocks: vec![crate::adders::BlockSpec {
                width: 6,
                variant: crate::adders::BecVariant::Plain,
            }],
        };
        assert!(build_partitioned(8, FinalAdder::Hybrid(short)).is_err());
        let cfg = MultiplierConfig::new(8, Variant::RegularCla).with_plan(FinalAdderPlan::default_for(8));
        assert!(build(&cfg).is_err());
    }

    #[test]
    fn wider_cla_stage_than_overflow() {
        let plan = FinalAdderPlan {
            cla_width: 4,
            blocks: vec![crate::adders::BlockSpec {
                width: 4,
                variant: crate::adders::BecVariant::Plain,
            }],
        };
        let m = build_partitioned(8, FinalAdder::Hybrid(plan)).unwrap();
        assert!(verify(&m.netlist, VerifyMode::Exhaustive).unwrap().pass);
    }

    #[test]
    fn ripple_part_adder_is_correct() {
        for v in [Variant::PartitionedCla, Variant::PartitionedHybrid] {
            let cfg = MultiplierConfig::new(8, v).with_part_adder(AdderKind::Ripple);
            let m = build(&cfg).unwrap();
            assert!(verify(&m.netlist, VerifyMode::Exhaustive).unwrap().pass);
        }
    }

    #[test]
    fn exhaustive_refused_above_limit() {
        let m = build_regular(12).unwrap();
        let err = verify(&m.netlist, VerifyMode::Exhaustive).unwrap_err();
        assert!(err.to_string().contains("n <= 10"));
    }

    #[test]
    fn fault_injection_is_caught() {
        let mut m = build(&MultiplierConfig::new(8, Variant::PartitionedHybrid)).unwrap();
        let idx = m.netlist.gates().iter().rposition(|g| g.kind == GateKind::Xor2).unwrap();
        m.netlist.set_gate_kind(idx, GateKind::Xnor2).unwrap();
        let r = verify(&m.netlist, VerifyMode::Exhaustive).unwrap();
        assert!(!r.pass);
        let c = r.counterexample.unwrap();
        assert_ne!(c.got, c.want);
        assert_eq!(c.want, c.a as u128 * c.b as u128);
        // first failure in enumeration order is stable
        assert_eq!(verify(&m.netlist, VerifyMode::Exhaustive).unwrap(), r);
    }

    #[test]
    fn random_verification_is_deterministic() {
        let m = build_regular(16).unwrap();
        let mode = VerifyMode::Random { count: 1000, seed: 7 };
        let r = verify(&m.netlist, mode).unwrap();
        assert!(r.pass);
        assert_eq!(r.cases, 1000);
        assert_eq!(verify(&m.netlist, mode).unwrap(), r);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("booth".parse::<Variant>().is_err());
    }

    #[test]
    fn provenance_is_embedded() {
        let m = build(&MultiplierConfig::new(16, Variant::PartitionedHybrid)).unwrap();
        let meta = m.netlist.meta();
        assert_eq!(meta["config_digest"], m.config.digest());
        assert!(meta.contains_key("plan"));
        assert!(meta.contains_key("schedule_digest"));
    }
}
