//! ISCAS-style BENCH interchange.
//!
//! Emitted files use `INPUT(...)`/`OUTPUT(...)` port lines and one gate per
//! line. Key inputs keep their `keyinput<i>` names so external locking
//! tools recognize them. `MUX2` is lowered to AND/OR/NOT on emit; `DFF` is
//! kept (it is part of the ISCAS89 gate set). Constants are written as
//! `name = CONST0` / `name = CONST1`. Bus grouping and signedness survive a
//! round trip through `# pragma bus` comment lines, which other tools are
//! free to ignore.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Driver, GateKind, NetId, Netlist, NetlistBuilder, NetlistError};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Serialize to BENCH text (UTF-8, LF line endings).
pub fn emit_bench(n: &Netlist) -> Result<String, NetlistError> {
    let order = n.topological_order()?;

    // Net naming: ports get canonical names, internal nets keep their stored
    // names when unique, falling back to n<id>.
    let mut names: Vec<String> = vec![String::new(); n.net_count()];
    let mut used: BTreeSet<String> = BTreeSet::new();
    for bus in n.input_buses() {
        for (i, &net) in bus.nets.iter().enumerate() {
            let name = if bus.width() == 1 {
                sanitize(&bus.name)
            } else {
                format!("{}_{}", sanitize(&bus.name), i)
            };
            names[net.index()] = name.clone();
            used.insert(name);
        }
    }
    for (i, &net) in n.key_inputs().iter().enumerate() {
        let name = format!("keyinput{i}");
        names[net.index()] = name.clone();
        used.insert(name);
    }

    // Output aliases: rename the driven net when possible, else BUFF it.
    let mut aliases: Vec<(String, NetId)> = Vec::new();
    let mut output_names: Vec<(String, NetId)> = Vec::new();
    for bus in n.output_buses() {
        for (i, &net) in bus.nets.iter().enumerate() {
            let alias = if bus.width() == 1 {
                sanitize(&bus.name)
            } else {
                format!("{}_{}", sanitize(&bus.name), i)
            };
            output_names.push((alias.clone(), net));
            let gate_driven = matches!(n.driver(net), Driver::Gate(_));
            if gate_driven && names[net.index()].is_empty() && !used.contains(&alias) {
                names[net.index()] = alias.clone();
                used.insert(alias);
            } else {
                used.insert(alias.clone());
                aliases.push((alias, net));
            }
        }
    }
    for (i, name) in names.iter_mut().enumerate() {
        if name.is_empty() {
            let stored = sanitize(n.net_name(NetId(i as u32)));
            *name = if !stored.is_empty() && !used.contains(&stored) {
                stored
            } else {
                format!("n{i}")
            };
            used.insert(name.clone());
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "# {}", n.name);
    for bus in n.input_buses().iter().filter(|b| b.width() > 1 || b.signed) {
        let _ = writeln!(
            out,
            "# pragma bus input {} {} {}",
            sanitize(&bus.name),
            bus.width(),
            if bus.signed { "signed" } else { "unsigned" }
        );
    }
    for bus in n.output_buses().iter().filter(|b| b.width() > 1 || b.signed) {
        let _ = writeln!(
            out,
            "# pragma bus output {} {} {}",
            sanitize(&bus.name),
            bus.width(),
            if bus.signed { "signed" } else { "unsigned" }
        );
    }
    for bus in n.input_buses() {
        for &net in &bus.nets {
            let _ = writeln!(out, "INPUT({})", names[net.index()]);
        }
    }
    for &net in n.key_inputs() {
        let _ = writeln!(out, "INPUT({})", names[net.index()]);
    }
    for (alias, _) in &output_names {
        let _ = writeln!(out, "OUTPUT({alias})");
    }

    let mut tmp = 0usize;
    for gid in order {
        let gate = n.gate(gid);
        let y = names[gate.output.index()].clone();
        let ins: Vec<&str> = gate.inputs.iter().map(|i| names[i.index()].as_str()).collect();
        match gate.kind {
            GateKind::And => _ = writeln!(out, "{y} = AND({}, {})", ins[0], ins[1]),
            GateKind::Or => _ = writeln!(out, "{y} = OR({}, {})", ins[0], ins[1]),
            GateKind::Nand => _ = writeln!(out, "{y} = NAND({}, {})", ins[0], ins[1]),
            GateKind::Nor => _ = writeln!(out, "{y} = NOR({}, {})", ins[0], ins[1]),
            GateKind::Xor => _ = writeln!(out, "{y} = XOR({}, {})", ins[0], ins[1]),
            GateKind::Xnor => _ = writeln!(out, "{y} = XNOR({}, {})", ins[0], ins[1]),
            GateKind::Not => _ = writeln!(out, "{y} = NOT({})", ins[0]),
            GateKind::Buf => _ = writeln!(out, "{y} = BUFF({})", ins[0]),
            GateKind::Dff => _ = writeln!(out, "{y} = DFF({})", ins[0]),
            GateKind::Const0 => _ = writeln!(out, "{y} = CONST0"),
            GateKind::Const1 => _ = writeln!(out, "{y} = CONST1"),
            GateKind::Mux2 => {
                // y = (s AND in1) OR (NOT s AND in0)
                tmp += 1;
                let ns = format!("{y}_m{tmp}s");
                let a1 = format!("{y}_m{tmp}a");
                let a0 = format!("{y}_m{tmp}b");
                let _ = writeln!(out, "{ns} = NOT({})", ins[0]);
                let _ = writeln!(out, "{a1} = AND({}, {})", ins[0], ins[2]);
                let _ = writeln!(out, "{a0} = AND({ns}, {})", ins[1]);
                let _ = writeln!(out, "{y} = OR({a1}, {a0})");
            }
        }
    }
    for (alias, net) in aliases {
        let _ = writeln!(out, "{alias} = BUFF({})", names[net.index()]);
    }
    Ok(out)
}

/// Parse BENCH text into a netlist.
///
/// Accepts the gate set emitted by [`emit_bench`] plus `BUF`, `INV` and
/// `MUX(s, in0, in1)`. Inputs named `keyinput<i>` become key inputs ordered
/// by index; other ports are grouped by `# pragma bus` comments when
/// present, else each port bit forms its own bus.
pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    struct BusPragma {
        output: bool,
        name: String,
        width: usize,
        signed: bool,
    }
    let mut pragmas: Vec<BusPragma> = Vec::new();
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut gates: Vec<(usize, String, String, Vec<String>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            // `# pragma bus <input|output> <name> <width> <signed|unsigned>`
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() == 6 && toks[0] == "pragma" && toks[1] == "bus" {
                if let (Ok(width), true) =
                    (toks[4].parse::<usize>(), matches!(toks[2], "input" | "output"))
                {
                    pragmas.push(BusPragma {
                        output: toks[2] == "output",
                        name: toks[3].to_string(),
                        width,
                        signed: toks[5] == "signed",
                    });
                }
            }
            continue;
        }
        if let Some(name) = strip_port(line, "INPUT") {
            inputs.push(name.to_string());
            continue;
        }
        if let Some(name) = strip_port(line, "OUTPUT") {
            outputs.push(name.to_string());
            continue;
        }
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| NetlistError::Parse {
            line: lineno,
            msg: "expected `name = GATE(...)`".into(),
        })?;
        let lhs = lhs.trim().to_string();
        let rhs = rhs.trim();
        let (op, args) = match rhs.split_once('(') {
            Some((op, rest)) => {
                let rest = rest.trim_end();
                let inner = rest.strip_suffix(')').ok_or(NetlistError::Parse {
                    line: lineno,
                    msg: "missing `)`".into(),
                })?;
                let args: Vec<String> = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(|a| a.trim().to_string()).collect()
                };
                (op.trim().to_uppercase(), args)
            }
            None => (rhs.to_uppercase(), Vec::new()),
        };
        gates.push((lineno, lhs, op, args));
    }

    let mut nb = NetlistBuilder::new("bench");
    let mut nets: BTreeMap<String, NetId> = BTreeMap::new();

    let mut keys: Vec<(usize, String)> = Vec::new();
    let mut plain_inputs: Vec<String> = Vec::new();
    for name in &inputs {
        match key_index(name) {
            Some(i) => keys.push((i, name.clone())),
            None => plain_inputs.push(name.clone()),
        }
    }
    keys.sort();

    // Pragma-declared input buses claim `name_<i>` members (or the bare name
    // at width 1); leftovers become 1-bit buses.
    for p in pragmas.iter().filter(|p| !p.output) {
        let members: Vec<String> = bus_member_names(&p.name, p.width);
        if members.iter().all(|m| plain_inputs.contains(m)) {
            let ids = nb.input_bus(&p.name, p.width, p.signed);
            for (m, id) in members.iter().zip(ids.iter()) {
                nets.insert(m.clone(), *id);
            }
        }
    }
    for name in &plain_inputs {
        if nets.contains_key(name) {
            continue;
        }
        let ids = nb.input_bus(name, 1, false);
        nets.insert(name.clone(), ids[0]);
    }
    for (_, name) in &keys {
        let id = nb.key_input();
        nets.insert(name.clone(), id);
    }

    let mut lookup = |nb: &mut NetlistBuilder, name: &str| -> NetId {
        if let Some(&id) = nets.get(name) {
            return id;
        }
        let id = nb.fresh_net(name.to_string());
        nets.insert(name.to_string(), id);
        id
    };

    for (lineno, lhs, op, args) in &gates {
        let kind = match op.as_str() {
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "NAND" => GateKind::Nand,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Not,
            "BUF" | "BUFF" => GateKind::Buf,
            "DFF" => GateKind::Dff,
            "MUX" | "MUX2" => GateKind::Mux2,
            "CONST0" | "GND" => GateKind::Const0,
            "CONST1" | "VDD" => GateKind::Const1,
            other => return Err(NetlistError::UnsupportedGate(other.to_string())),
        };
        if kind.arity() != args.len() {
            return Err(NetlistError::Parse {
                line: *lineno,
                msg: format!("{op} expects {} operands, got {}", kind.arity(), args.len()),
            });
        }
        let ins: Vec<NetId> = args.iter().map(|a| lookup(&mut nb, a)).collect();
        let out = lookup(&mut nb, lhs);
        nb.gate_onto(kind, &ins, out);
    }

    let mut out_done: Vec<String> = Vec::new();
    for p in pragmas.iter().filter(|p| p.output) {
        let members = bus_member_names(&p.name, p.width);
        if members.iter().all(|m| outputs.contains(m)) {
            let ids: Vec<NetId> = members
                .iter()
                .map(|m| nets.get(m).copied())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| NetlistError::Parse {
                    line: 0,
                    msg: format!("output bus {} is never driven", p.name),
                })?;
            nb.output_bus(&p.name, &ids, p.signed);
            out_done.extend(members);
        }
    }
    for name in &outputs {
        if out_done.contains(name) {
            continue;
        }
        let id = nets.get(name).copied().ok_or_else(|| NetlistError::Parse {
            line: 0,
            msg: format!("output {name} is never driven"),
        })?;
        nb.output_bus(name, &[id], false);
    }

    nb.finish().map_err(|e| match e {
        NetlistError::Undriven(net) => NetlistError::Parse {
            line: 0,
            msg: format!("net {net} is referenced but never driven"),
        },
        other => other,
    })
}

fn bus_member_names(name: &str, width: usize) -> Vec<String> {
    if width == 1 {
        vec![name.to_string()]
    } else {
        (0..width).map(|i| format!("{name}_{i}")).collect()
    }
}

fn strip_port<'a>(line: &'a str, kw: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(kw)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.trim())
}

fn key_index(name: &str) -> Option<usize> {
    name.strip_prefix("keyinput")?.parse().ok()
}
