//! Versioned JSON interchange format for netlists.
//!
//! ```json
//! {"version":1,
//!  "inputs":[{"name":"a","width":8}, ...],
//!  "gates":[{"kind":"AND2","in":[0,8],"out":16}, ...],
//!  "outputs":[{"name":"p","bits":[16, ...]}]}
//! ```
//!
//! Input bits take ids `0..` in declaration order; gate `i` drives id
//! `input_bits + i`. An optional `meta` object carries provenance strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{GateKind, NetId, Netlist, NetlistBuilder};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InputDecl {
    name: String,
    width: usize,
}

#[derive(Serialize, Deserialize)]
struct GateDecl {
    kind: GateKind,
    #[serde(rename = "in")]
    inputs: Vec<u32>,
    out: u32,
}

#[derive(Serialize, Deserialize)]
struct OutputDecl {
    name: String,
    bits: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct NetlistFile {
    version: u32,
    inputs: Vec<InputDecl>,
    gates: Vec<GateDecl>,
    outputs: Vec<OutputDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    meta: BTreeMap<String, String>,
}

impl Netlist {
    pub fn to_json(&self) -> String {
        let file = NetlistFile {
            version: FORMAT_VERSION,
            inputs: self
                .inputs
                .iter()
                .map(|b| InputDecl {
                    name: b.name.clone(),
                    width: b.width(),
                })
                .collect(),
            gates: self
                .gates
                .iter()
                .map(|g| GateDecl {
                    kind: g.kind,
                    inputs: g.inputs().iter().map(|n| n.0).collect(),
                    out: g.output.0,
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|b| OutputDecl {
                    name: b.name.clone(),
                    bits: b.bits.iter().map(|n| n.0).collect(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let mut s = serde_json::to_string(&file).expect("netlist serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Netlist> {
        let file: NetlistFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                file.version
            )));
        }
        let mut b = NetlistBuilder::new();
        for i in &file.inputs {
            b.add_input(&i.name, i.width)?;
        }
        for (idx, g) in file.gates.iter().enumerate() {
            let expected = b.net_count() as u32;
            if g.out != expected {
                return Err(Error::Malformed(format!(
                    "gate {idx} drives id {} but the next dense id is {expected}",
                    g.out
                )));
            }
            let ins: Vec<NetId> = g.inputs.iter().map(|&i| NetId(i)).collect();
            b.add_gate(g.kind, &ins)?;
        }
        for o in &file.outputs {
            b.add_output(&o.name, o.bits.iter().map(|&i| NetId(i)).collect())?;
        }
        let mut nl = b.finish();
        nl.meta = file.meta;
        Ok(nl)
    }
}
