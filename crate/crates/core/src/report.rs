//! Per-design unit-gate reports and baseline/candidate comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{area_units, critical_depth, gate_counts, switching_activity_words, GateCostModel};
use crate::error::{Error, Result};
use crate::multiplier::multiplier_width;
use crate::netlist::{GateKind, Netlist};

pub const DEFAULT_VECTOR_COUNT: usize = 1000;

/// Seeded stream of independent uniform `(a, b)` transitions. Each pair is
/// two operand assignments; toggles are counted between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorStream {
    pub seed: u64,
    pub count: usize,
}

impl Default for VectorStream {
    fn default() -> Self {
        VectorStream {
            seed: 0,
            count: DEFAULT_VECTOR_COUNT,
        }
    }
}

impl VectorStream {
    pub fn new(seed: u64, count: usize) -> Self {
        VectorStream { seed, count }
    }

    pub fn pairs(&self, n: usize) -> Vec<(Vec<u128>, Vec<u128>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mask = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };
        let mut draw = || vec![rng.gen::<u128>() & mask, rng.gen::<u128>() & mask];
        (0..self.count).map(|_| (draw(), draw())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub design: String,
    pub n: usize,
    pub variant: String,
    pub gate_counts: BTreeMap<GateKind, usize>,
    pub area_units: u64,
    pub depth_units: u64,
    /// `None` when the vector stream is empty.
    pub toggles: Option<u64>,
    pub vectors: VectorStream,
    pub cost_model_digest: String,
    /// Digest over the design's generation settings as recorded in the netlist.
    pub settings_digest: String,
}

impl AnalysisReport {
    pub fn count(&self, kind: GateKind) -> usize {
        self.gate_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn gate_total(&self) -> usize {
        self.gate_counts.values().sum()
    }
}

fn settings_digest(netlist: &Netlist) -> String {
    let canonical = serde_json::to_string(netlist.meta()).expect("meta serialization cannot fail");
    hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
}

/// Analyzes a multiplier netlist (ports `a`, `b`, `p`). `design` is the id
/// used in tables.
pub fn analyze(
    design: &str,
    netlist: &Netlist,
    model: &GateCostModel,
    stream: VectorStream,
) -> Result<AnalysisReport> {
    model.validate()?;
    let n = multiplier_width(netlist)?;
    let toggles = if stream.count == 0 {
        None
    } else {
        Some(switching_activity_words(netlist, &stream.pairs(n))?)
    };
    Ok(AnalysisReport {
        design: design.to_string(),
        n,
        variant: netlist.meta().get("variant").cloned().unwrap_or_default(),
        gate_counts: gate_counts(netlist),
        area_units: area_units(netlist, model),
        depth_units: critical_depth(netlist, model),
        toggles,
        vectors: stream,
        cost_model_digest: model.digest(),
        settings_digest: settings_digest(netlist),
    })
}

/// Deltas are `(baseline - candidate) / candidate * 100`: positive means
/// the baseline is larger (or slower).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    pub n: usize,
    pub area_pct: f64,
    pub depth_pct: f64,
    pub toggles_pct: Option<f64>,
}

pub fn delta_pct(baseline: u64, candidate: u64) -> f64 {
    if baseline == candidate {
        return 0.0;
    }
    (baseline as f64 - candidate as f64) / candidate as f64 * 100.0
}

pub fn compare(baseline: &AnalysisReport, candidate: &AnalysisReport) -> Result<Comparison> {
    if baseline.cost_model_digest != candidate.cost_model_digest {
        return Err(Error::CostModelMismatch);
    }
    if baseline.vectors != candidate.vectors || baseline.n != candidate.n {
        return Err(Error::VectorStreamMismatch);
    }
    let toggles_pct = match (baseline.toggles, candidate.toggles) {
        (Some(b), Some(c)) => Some(delta_pct(b, c)),
        _ => None,
    };
    Ok(Comparison {
        baseline: baseline.design.clone(),
        candidate: candidate.design.clone(),
        n: baseline.n,
        area_pct: delta_pct(baseline.area_units, candidate.area_units),
        depth_pct: delta_pct(baseline.depth_units, candidate.depth_units),
        toggles_pct,
    })
}

pub fn to_csv(reports: &[AnalysisReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Malformed(e.to_string());
    w.write_record([
        "n",
        "variant",
        "and_count",
        "or_count",
        "xor_count",
        "not_count",
        "area_units",
        "depth_units",
        "toggles",
    ])
    .map_err(io)?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            r.variant.clone(),
            (r.count(GateKind::And2) + r.count(GateKind::Nand2)).to_string(),
            (r.count(GateKind::Or2) + r.count(GateKind::Nor2)).to_string(),
            (r.count(GateKind::Xor2) + r.count(GateKind::Xnor2)).to_string(),
            r.count(GateKind::Not).to_string(),
            r.area_units.to_string(),
            r.depth_units.to_string(),
            r.toggles.map(|t| t.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn signed(x: f64) -> String {
    if x > 0.0 {
        format!("+ {x:.2}")
    } else if x < 0.0 {
        format!("- {:.2}", -x)
    } else {
        "0.00".to_string()
    }
}

/// Markdown with one raw-value table and, when there is anything to compare,
/// a baseline-relative table laid out as "Area % | Delay % | Power %".
pub fn to_markdown(reports: &[AnalysisReport], comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    out.push_str("| Design | n | Gates | Area (units) | Delay (units) | Toggles |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for r in reports {
        let t = r.toggles.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.design,
            r.n,
            r.gate_total(),
            r.area_units,
            r.depth_units,
            t
        );
    }
    if !comparisons.is_empty() {
        out.push_str("\nRegular with reference to the partitioned design:\n\n");
        out.push_str("| Multiplier | Baseline | Candidate | Area % | Delay % | Power % |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for c in comparisons {
            let p = c.toggles_pct.map(signed).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "| {n} by {n} | {} | {} | {} | {} | {} |",
                c.baseline,
                c.candidate,
                signed(c.area_pct),
                signed(c.depth_pct),
                p,
                n = c.n
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::{build, MultiplierConfig, Variant};
    use crate::netlist::NetlistBuilder;

    fn design(n: usize, v: Variant) -> Netlist {
        build(&MultiplierConfig::new(n, v)).unwrap().netlist
    }

    #[test]
    fn identical_reports_have_zero_deltas() {
        let nl = design(8, Variant::PartitionedHybrid);
        let r = analyze("x", &nl, &GateCostModel::default(), VectorStream::default()).unwrap();
        let c = compare(&r, &r).unwrap();
        assert_eq!((c.area_pct, c.depth_pct, c.toggles_pct), (0.0, 0.0, Some(0.0)));
    }

    #[test]
    fn empty_stream_reports_absent_toggles() {
        let nl = design(4, Variant::RegularCla);
        let r = analyze("x", &nl, &GateCostModel::default(), VectorStream::new(0, 0)).unwrap();
        assert_eq!(r.toggles, None);
        assert!(r.depth_units > 0);
        assert!(to_csv(&[r]).unwrap().lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn report_is_deterministic() {
        let nl = design(8, Variant::RegularCla);
        let m = GateCostModel::default();
        let s = VectorStream::new(7, 200);
        assert_eq!(analyze("r", &nl, &m, s).unwrap(), analyze("r", &nl, &m, s).unwrap());
    }

    #[test]
    fn repeated_pairs_double_toggles() {
        let nl = design(8, Variant::PartitionedCla);
        let pairs = VectorStream::new(3, 50).pairs(8);
        let once = switching_activity_words(&nl, &pairs).unwrap();
        let twice: Vec<_> = pairs.iter().chain(&pairs).cloned().collect();
        assert_eq!(switching_activity_words(&nl, &twice).unwrap(), 2 * once);
    }

    #[test]
    fn compare_refuses_mismatches() {
        let nl = design(8, Variant::RegularCla);
        let a = analyze("a", &nl, &GateCostModel::default(), VectorStream::default()).unwrap();
        let mut model = GateCostModel::default();
        model.delay.insert(GateKind::Xor2, 3);
        let b = analyze("b", &nl, &model, VectorStream::default()).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::CostModelMismatch)));
        let c = analyze("c", &nl, &GateCostModel::default(), VectorStream::new(1, 1000)).unwrap();
        assert!(matches!(compare(&a, &c), Err(Error::VectorStreamMismatch)));
    }

    #[test]
    fn delta_follows_baseline_over_candidate() {
        assert_eq!(delta_pct(110, 100), 10.0);
        assert_eq!(delta_pct(90, 100), -10.0);
    }

    #[test]
    fn const_only_netlist_has_zero_depth() {
        let mut b = NetlistBuilder::new();
        b.add_input("a", 2).unwrap();
        b.add_input("b", 2).unwrap();
        let z = b.gate(GateKind::Const0, &[]);
        b.add_output("p", vec![z; 4]).unwrap();
        let r = analyze("zero", &b.finish(), &GateCostModel::default(), VectorStream::new(0, 10)).unwrap();
        assert_eq!(r.depth_units, 0);
        assert!(r.toggles.is_some());
    }

    #[test]
    fn markdown_omits_comparison_for_single_design() {
        let nl = design(8, Variant::RegularCla);
        let r = analyze("8/regular-cla", &nl, &GateCostModel::default(), VectorStream::default()).unwrap();
        let md = to_markdown(&[r], &[]);
        assert!(!md.contains("Area %"));
        assert_eq!(md.lines().count(), 3);
    }
}
