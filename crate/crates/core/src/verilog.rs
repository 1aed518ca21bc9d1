//! Structural Verilog export: one primitive instance per gate, one wire per
//! net, constants as continuous assigns.

use std::fmt::Write as _;

use crate::netlist::{GateKind, Netlist};

fn primitive(kind: GateKind) -> Option<&'static str> {
    match kind {
        GateKind::And2 => Some("and"),
        GateKind::Or2 => Some("or"),
        GateKind::Nand2 => Some("nand"),
        GateKind::Nor2 => Some("nor"),
        GateKind::Xor2 => Some("xor"),
        GateKind::Xnor2 => Some("xnor"),
        GateKind::Not => Some("not"),
        GateKind::Const0 | GateKind::Const1 => None,
    }
}

fn port_decl(dir: &str, name: &str, width: usize) -> String {
    if width == 1 {
        format!("  {dir} {name};\n")
    } else {
        format!("  {dir} [{}:0] {name};\n", width - 1)
    }
}

pub fn to_verilog(netlist: &Netlist, module: &str) -> String {
    let mut out = String::new();
    let ports: Vec<&str> = netlist
        .inputs()
        .iter()
        .chain(netlist.outputs())
        .map(|bus| bus.name.as_str())
        .collect();
    let _ = writeln!(out, "module {module} ({});", ports.join(", "));
    for bus in netlist.inputs() {
        out.push_str(&port_decl("input", &bus.name, bus.width()));
    }
    for bus in netlist.outputs() {
        out.push_str(&port_decl("output", &bus.name, bus.width()));
    }
    out.push('\n');
    for id in 0..netlist.net_count() {
        let _ = writeln!(out, "  wire n{id};");
    }
    out.push('\n');
    for bus in netlist.inputs() {
        for (i, net) in bus.bits.iter().enumerate() {
            let _ = writeln!(out, "  assign {net} = {}[{i}];", bus.name);
        }
    }
    for (g, gate) in netlist.gates().iter().enumerate() {
        match primitive(gate.kind) {
            Some(prim) => {
                let ins: Vec<String> = gate.inputs().iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "  {prim} g{g} ({}, {});", gate.output, ins.join(", "));
            }
            None => {
                let v = if gate.kind == GateKind::Const1 { 1 } else { 0 };
                let _ = writeln!(out, "  assign {} = 1'b{v};", gate.output);
            }
        }
    }
    for bus in netlist.outputs() {
        for (i, net) in bus.bits.iter().enumerate() {
            let _ = writeln!(out, "  assign {}[{i}] = {net};", bus.name);
        }
    }
    out.push_str("endmodule\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::NetlistBuilder;

    #[test]
    fn small_module_text() {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", 2).unwrap();
        let y = b.gate(GateKind::Xor2, &x);
        let z = b.gate(GateKind::Const1, &[]);
        b.add_output("y", vec![y, z]).unwrap();
        let text = to_verilog(&b.finish(), "top");
        let want = "module top (x, y);
  input [1:0] x;
  output [1:0] y;

  wire n0;
  wire n1;
  wire n2;
  wire n3;

  assign n0 = x[0];
  assign n1 = x[1];
  xor g0 (n2, n0, n1);
  assign n3 = 1'b1;
  assign y[0] = n2;
  assign y[1] = n3;
endmodule
";
        assert_eq!(text, want);
    }
}
