//! Structural Verilog emission: one wire per net, one assign per gate,
//! one always block per flip-flop. Sequential designs get an implicit
//! `clk` port; flip-flops reset to 0 through an `initial` block.

use std::fmt::Write as _;

use super::{GateKind, NetId, Netlist, NetlistError};

/// Emit the netlist as a single structural Verilog module.
pub fn emit_structural_hdl(n: &Netlist) -> Result<String, NetlistError> {
    let order = n.topological_order()?;
    let name = |id: NetId| format!("n{}", id.0);

    let mut ports: Vec<String> = Vec::new();
    if n.has_state() {
        ports.push("clk".to_string());
    }
    for bus in n.input_buses() {
        ports.push(sanitize(&bus.name));
    }
    for i in 0..n.key_inputs().len() {
        ports.push(format!("keyinput{i}"));
    }
    for bus in n.output_buses() {
        ports.push(sanitize(&bus.name));
    }

    let mut out = String::new();
    let _ = writeln!(out, "module {} ({});", sanitize(&n.name), ports.join(", "));
    if n.has_state() {
        let _ = writeln!(out, "  input clk;");
    }
    for bus in n.input_buses() {
        let _ = writeln!(out, "  input [{}:0] {};", bus.width() - 1, sanitize(&bus.name));
    }
    for i in 0..n.key_inputs().len() {
        let _ = writeln!(out, "  input keyinput{i};");
    }
    for bus in n.output_buses() {
        let _ = writeln!(out, "  output [{}:0] {};", bus.width() - 1, sanitize(&bus.name));
    }

    for gate in n.gates() {
        if gate.kind == GateKind::Dff {
            let _ = writeln!(out, "  reg {} = 1'b0;", name(gate.output));
        } else {
            let _ = writeln!(out, "  wire {};", name(gate.output));
        }
    }

    // Port bindings.
    for bus in n.input_buses() {
        for (i, &net) in bus.nets.iter().enumerate() {
            let _ = writeln!(out, "  wire {};", name(net));
            let _ = writeln!(out, "  assign {} = {}[{}];", name(net), sanitize(&bus.name), i);
        }
    }
    for (i, &net) in n.key_inputs().iter().enumerate() {
        let _ = writeln!(out, "  wire {};", name(net));
        let _ = writeln!(out, "  assign {} = keyinput{};", name(net), i);
    }

    for gid in order {
        let gate = n.gate(gid);
        let y = name(gate.output);
        let a = gate.inputs.first().map(|&i| name(i)).unwrap_or_default();
        let b = gate.inputs.get(1).map(|&i| name(i)).unwrap_or_default();
        match gate.kind {
            GateKind::And => _ = writeln!(out, "  assign {y} = {a} & {b};"),
            GateKind::Or => _ = writeln!(out, "  assign {y} = {a} | {b};"),
            GateKind::Nand => _ = writeln!(out, "  assign {y} = ~({a} & {b});"),
            GateKind::Nor => _ = writeln!(out, "  assign {y} = ~({a} | {b});"),
            GateKind::Xor => _ = writeln!(out, "  assign {y} = {a} ^ {b};"),
            GateKind::Xnor => _ = writeln!(out, "  assign {y} = ~({a} ^ {b});"),
            GateKind::Not => _ = writeln!(out, "  assign {y} = ~{a};"),
            GateKind::Buf => _ = writeln!(out, "  assign {y} = {a};"),
            GateKind::Const0 => _ = writeln!(out, "  assign {y} = 1'b0;"),
            GateKind::Const1 => _ = writeln!(out, "  assign {y} = 1'b1;"),
            GateKind::Mux2 => {
                let c = name(gate.inputs[2]);
                let _ = writeln!(out, "  assign {y} = {a} ? {c} : {b};");
            }
            GateKind::Dff => {
                let _ = writeln!(out, "  always @(posedge clk) {y} <= {a};");
            }
        }
    }

    for bus in n.output_buses() {
        for (i, &net) in bus.nets.iter().enumerate() {
            let _ = writeln!(out, "  assign {}[{}] = {};", sanitize(&bus.name), i, name(net));
        }
    }
    let _ = writeln!(out, "endmodule");
    Ok(out)
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.chars().next().map_or(true, |c| c.is_ascii_digit()) {
        format!("m_{s}")
    } else {
        s
    }
}
