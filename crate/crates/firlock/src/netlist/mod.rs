//! Gate-level circuit intermediate representation.
//!
//! A [`Netlist`] is a flat graph of single-output gates over indexed nets.
//! Ports are grouped into named buses, LSB first. Key inputs are a separate
//! ordered port class named `keyinput0..keyinput{p-1}`, matching the naming
//! convention of logic-locking benchmarks.
//!
//! Netlists are immutable once built; construction and all structural
//! transformations go through [`NetlistBuilder`].

mod bench;
mod hdl;
pub mod samples;
mod sim;

pub use bench::{emit_bench, parse_bench};
pub use hdl::emit_structural_hdl;
pub use sim::{simulate_comb, simulate_seq, Simulator};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Identifier of a net (wire) inside one netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

/// Identifier of a gate inside one netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Gate vocabulary. Arity is fixed per kind: `Not`/`Buf`/`Dff` take one
/// input, `Mux2` takes `[select, in0, in1]`, constants take none, everything
/// else takes exactly two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Mux2,
    Const0,
    Const1,
    /// D flip-flop, initial value 0.
    Dff,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buf | GateKind::Dff => 1,
            GateKind::Mux2 => 3,
            GateKind::Const0 | GateKind::Const1 => 0,
            _ => 2,
        }
    }

    pub fn is_state(self) -> bool {
        self == GateKind::Dff
    }
}

/// One gate: a kind, its input nets, and the single net it drives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// Named, ordered (LSB-first) group of port nets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortBus {
    pub name: String,
    pub nets: Vec<NetId>,
    pub signed: bool,
}

impl PortBus {
    pub fn width(&self) -> usize {
        self.nets.len()
    }
}

/// What drives a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Gate(GateId),
    PrimaryInput,
    KeyInput,
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("combinational cycle through net {0}")]
    Cycle(NetId),
    #[error("net {0} has no driver")]
    Undriven(NetId),
    #[error("net {0} has more than one driver")]
    MultiDriven(NetId),
    #[error("gate kind {kind:?} expects {expected} inputs, got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("assignment incomplete: net {0} has no value")]
    IncompleteAssignment(NetId),
    #[error("assignment references unknown net {0}")]
    UnknownNet(NetId),
    #[error("netlist contains state elements; operation is combinational only")]
    HasState,
    #[error("constant propagation conflict: output net {net} is stuck at {folded} but pinned to {pinned}")]
    Conflict {
        net: NetId,
        folded: bool,
        pinned: bool,
    },
    #[error("assignment pins non-port net {0}")]
    NotAPort(NetId),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("input stream length {got} does not match cycle count {cycles}")]
    StreamLength { got: usize, cycles: usize },
}

/// Immutable gate-level netlist.
///
/// Invariants enforced at build time: every net is driven exactly once (by a
/// gate or a port) and gate arities match their kinds. Combinational
/// acyclicity is checked by [`Netlist::topological_order`] and by every
/// operation that needs an evaluation order.
#[derive(Debug, Clone)]
pub struct Netlist {
    pub name: String,
    net_names: Vec<String>,
    gates: Vec<Gate>,
    drivers: Vec<Driver>,
    input_buses: Vec<PortBus>,
    output_buses: Vec<PortBus>,
    key_inputs: Vec<NetId>,
}

impl Netlist {
    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.net_names[id.index()]
    }

    pub fn driver(&self, id: NetId) -> Driver {
        self.drivers[id.index()]
    }

    pub fn input_buses(&self) -> &[PortBus] {
        &self.input_buses
    }

    pub fn output_buses(&self) -> &[PortBus] {
        &self.output_buses
    }

    pub fn input_bus(&self, name: &str) -> Option<&PortBus> {
        self.input_buses.iter().find(|b| b.name == name)
    }

    pub fn output_bus(&self, name: &str) -> Option<&PortBus> {
        self.output_buses.iter().find(|b| b.name == name)
    }

    /// All primary input nets, in bus declaration order.
    pub fn primary_inputs(&self) -> Vec<NetId> {
        self.input_buses.iter().flat_map(|b| b.nets.clone()).collect()
    }

    /// All primary output nets, in bus declaration order.
    pub fn primary_outputs(&self) -> Vec<NetId> {
        self.output_buses.iter().flat_map(|b| b.nets.clone()).collect()
    }

    /// Key input nets, in `keyinput<i>` order.
    pub fn key_inputs(&self) -> &[NetId] {
        &self.key_inputs
    }

    pub fn key_count(&self) -> usize {
        self.key_inputs.len()
    }

    pub fn state_elements(&self) -> Vec<GateId> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind.is_state())
            .map(|(i, _)| GateId(i as u32))
            .collect()
    }

    pub fn has_state(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_state())
    }

    /// Topological order of the gates: every gate appears after the drivers
    /// of all its inputs. DFF outputs are treated as sources, so DFFs come
    /// first and never participate in cycles through their data input.
    pub fn topological_order(&self) -> Result<Vec<GateId>, NetlistError> {
        topological_order(self)
    }
}

/// Topological order of `n`'s gates with DFF outputs treated as sources.
pub fn topological_order(n: &Netlist) -> Result<Vec<GateId>, NetlistError> {
    let mut order = Vec::with_capacity(n.gates.len());
    let mut indegree = vec![0u32; n.gates.len()];
    // consumers[net] = combinational gates reading that net
    let mut consumers: Vec<Vec<u32>> = vec![Vec::new(); n.net_count()];
    for (gi, gate) in n.gates.iter().enumerate() {
        if gate.kind.is_state() {
            continue;
        }
        for &inp in &gate.inputs {
            if let Driver::Gate(d) = n.drivers[inp.index()] {
                if !n.gates[d.index()].kind.is_state() {
                    indegree[gi] += 1;
                    consumers[n.gates[d.index()].output.index()].push(gi as u32);
                }
            }
        }
    }
    let mut ready: Vec<u32> = Vec::new();
    for (gi, gate) in n.gates.iter().enumerate() {
        if gate.kind.is_state() {
            order.push(GateId(gi as u32));
        } else if indegree[gi] == 0 {
            ready.push(gi as u32);
        }
    }
    // Stable order: lowest gate id first.
    ready.sort_unstable();
    let mut queue = std::collections::VecDeque::from(ready);
    while let Some(gi) = queue.pop_front() {
        order.push(GateId(gi));
        for &c in &consumers[n.gates[gi as usize].output.index()] {
            indegree[c as usize] -= 1;
            if indegree[c as usize] == 0 {
                queue.push_back(c);
            }
        }
    }
    if order.len() != n.gates.len() {
        // Some combinational gate never became ready: report a net on a cycle.
        let stuck = n
            .gates
            .iter()
            .enumerate()
            .find(|(gi, g)| !g.kind.is_state() && indegree[*gi] > 0)
            .map(|(_, g)| g.output)
            .unwrap_or(NetId(0));
        return Err(NetlistError::Cycle(stuck));
    }
    Ok(order)
}

/// Partial or complete association from nets to bit values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<NetId, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, net: NetId, value: bool) {
        self.values.insert(net, value);
    }

    pub fn get(&self, net: NetId) -> Option<bool> {
        self.values.get(&net).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NetId, bool)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_complete_over(&self, nets: &[NetId]) -> bool {
        nets.iter().all(|n| self.values.contains_key(n))
    }

    /// Assign `value` (two's complement) to `nets`, LSB first.
    pub fn set_bus_value(&mut self, nets: &[NetId], value: i64) {
        for (i, &n) in nets.iter().enumerate() {
            self.set(n, (value >> i.min(63)) & 1 == 1);
        }
    }

    /// Read `nets` (LSB first) back as an integer; sign-extends when
    /// `signed`. Returns `None` if any bit is unassigned.
    pub fn bus_value(&self, nets: &[NetId], signed: bool) -> Option<i64> {
        let mut v: i64 = 0;
        for (i, &n) in nets.iter().enumerate() {
            if self.get(n)? {
                v |= 1 << i;
            }
        }
        if signed && !nets.is_empty() && nets.len() < 64 {
            let w = nets.len();
            if v >> (w - 1) & 1 == 1 {
                v -= 1 << w;
            }
        }
        Some(v)
    }

    /// Assignment over `nets` taken from the low bits of `bits`, LSB first.
    pub fn from_bits(nets: &[NetId], bits: u64) -> Self {
        let mut a = Assignment::new();
        for (i, &n) in nets.iter().enumerate() {
            a.set(n, (bits >> i.min(63)) & 1 == 1);
        }
        a
    }

    /// Pack the values of `nets` (LSB first) into a word.
    pub fn to_bits(&self, nets: &[NetId]) -> Option<u64> {
        let mut v = 0u64;
        for (i, &n) in nets.iter().enumerate() {
            if self.get(n)? {
                v |= 1 << i;
            }
        }
        Some(v)
    }

    pub fn merged(mut self, other: &Assignment) -> Self {
        for (n, v) in other.iter() {
            self.set(n, v);
        }
        self
    }
}

/// Mutable construction (and re-opening) of netlists.
///
/// The builder hands out fresh nets, enforces single-driver and arity rules
/// eagerly, and freezes into an immutable [`Netlist`] via [`finish`].
/// Constant nets are shared: the first request for a 0 or 1 creates one
/// `Const0`/`Const1` gate and later requests reuse its net.
///
/// [`finish`]: NetlistBuilder::finish
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    name: String,
    net_names: Vec<String>,
    drivers: Vec<Option<Driver>>,
    gates: Vec<Gate>,
    input_buses: Vec<PortBus>,
    output_buses: Vec<PortBus>,
    key_inputs: Vec<NetId>,
    const_nets: [Option<NetId>; 2],
    addsub_blocks: usize,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            net_names: Vec::new(),
            drivers: Vec::new(),
            gates: Vec::new(),
            input_buses: Vec::new(),
            output_buses: Vec::new(),
            key_inputs: Vec::new(),
            const_nets: [None, None],
            addsub_blocks: 0,
        }
    }

    /// Re-open an existing netlist for structural transformation.
    pub fn from_netlist(n: &Netlist) -> Self {
        NetlistBuilder {
            name: n.name.clone(),
            net_names: n.net_names.clone(),
            drivers: n.drivers.iter().map(|&d| Some(d)).collect(),
            gates: n.gates.clone(),
            input_buses: n.input_buses.clone(),
            output_buses: n.output_buses.clone(),
            key_inputs: n.key_inputs.clone(),
            const_nets: {
                let mut c = [None, None];
                for g in &n.gates {
                    match g.kind {
                        GateKind::Const0 if c[0].is_none() => c[0] = Some(g.output),
                        GateKind::Const1 if c[1].is_none() => c[1] = Some(g.output),
                        _ => {}
                    }
                }
                c
            },
            addsub_blocks: 0,
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of adder/subtractor blocks instantiated so far by the
    /// arithmetic builders. Used for structural resource assertions.
    pub fn addsub_blocks(&self) -> usize {
        self.addsub_blocks
    }

    pub(crate) fn count_addsub_block(&mut self) {
        self.addsub_blocks += 1;
    }

    /// Fresh undriven net. The builder panics at `finish` time if it is
    /// still undriven.
    pub fn fresh_net(&mut self, name: impl Into<String>) -> NetId {
        let id = NetId(self.net_names.len() as u32);
        self.net_names.push(name.into());
        self.drivers.push(None);
        id
    }

    fn fresh_auto(&mut self) -> NetId {
        let id = NetId(self.net_names.len() as u32);
        self.net_names.push(format!("n{}", id.0));
        self.drivers.push(None);
        id
    }

    fn set_driver(&mut self, net: NetId, d: Driver) {
        let slot = &mut self.drivers[net.index()];
        assert!(
            slot.is_none(),
            "net {} already driven; single-driver invariant",
            net
        );
        *slot = Some(d);
    }

    /// Declare a primary input bus; returns its nets, LSB first.
    pub fn input_bus(&mut self, name: &str, width: usize, signed: bool) -> Vec<NetId> {
        let nets: Vec<NetId> = (0..width).map(|i| self.fresh_net(format!("{name}_{i}"))).collect();
        for &n in &nets {
            self.set_driver(n, Driver::PrimaryInput);
        }
        self.input_buses.push(PortBus {
            name: name.to_string(),
            nets: nets.clone(),
            signed,
        });
        nets
    }

    /// Append one key input (named `keyinput<i>` globally).
    pub fn key_input(&mut self) -> NetId {
        let idx = self.key_inputs.len();
        let net = self.fresh_net(format!("keyinput{idx}"));
        self.set_driver(net, Driver::KeyInput);
        self.key_inputs.push(net);
        net
    }

    /// Append `count` key inputs, returned LSB first.
    pub fn key_inputs(&mut self, count: usize) -> Vec<NetId> {
        (0..count).map(|_| self.key_input()).collect()
    }

    /// Declare an output bus over already-driven nets.
    pub fn output_bus(&mut self, name: &str, nets: &[NetId], signed: bool) {
        self.output_buses.push(PortBus {
            name: name.to_string(),
            nets: nets.to_vec(),
            signed,
        });
    }

    /// Add a gate driving a fresh net; returns that net.
    pub fn gate(&mut self, kind: GateKind, inputs: &[NetId]) -> NetId {
        assert_eq!(
            kind.arity(),
            inputs.len(),
            "gate {kind:?} arity mismatch: {} inputs",
            inputs.len()
        );
        let out = self.fresh_auto();
        self.gate_onto(kind, inputs, out);
        out
    }

    /// Add a gate driving an existing (undriven) net.
    pub fn gate_onto(&mut self, kind: GateKind, inputs: &[NetId], output: NetId) {
        assert_eq!(kind.arity(), inputs.len());
        let gid = GateId(self.gates.len() as u32);
        self.gates.push(Gate {
            kind,
            inputs: inputs.to_vec(),
            output,
        });
        self.set_driver(output, Driver::Gate(gid));
    }

    /// Shared constant-0 net (created on first use).
    pub fn zero(&mut self) -> NetId {
        if let Some(n) = self.const_nets[0] {
            return n;
        }
        let n = self.gate(GateKind::Const0, &[]);
        self.const_nets[0] = Some(n);
        n
    }

    /// Shared constant-1 net (created on first use).
    pub fn one(&mut self) -> NetId {
        if let Some(n) = self.const_nets[1] {
            return n;
        }
        let n = self.gate(GateKind::Const1, &[]);
        self.const_nets[1] = Some(n);
        n
    }

    pub fn const_bit(&mut self, v: bool) -> NetId {
        if v {
            self.one()
        } else {
            self.zero()
        }
    }

    pub fn not(&mut self, a: NetId) -> NetId {
        self.gate(GateKind::Not, &[a])
    }

    pub fn and(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(GateKind::And, &[a, b])
    }

    pub fn or(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(GateKind::Or, &[a, b])
    }

    pub fn xor(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(GateKind::Xor, &[a, b])
    }

    pub fn xnor(&mut self, a: NetId, b: NetId) -> NetId {
        self.gate(GateKind::Xnor, &[a, b])
    }

    /// `sel ? in1 : in0`
    pub fn mux2(&mut self, sel: NetId, in0: NetId, in1: NetId) -> NetId {
        self.gate(GateKind::Mux2, &[sel, in0, in1])
    }

    /// D flip-flop with initial value 0.
    pub fn dff(&mut self, d: NetId) -> NetId {
        self.gate(GateKind::Dff, &[d])
    }

    /// Redirect every gate input currently reading `from` to read `to`
    /// instead, except inside the gates listed in `skip`.
    /// Port bus references are left untouched.
    pub fn redirect_readers(&mut self, from: NetId, to: NetId, skip: &[GateId]) {
        for (gi, gate) in self.gates.iter_mut().enumerate() {
            if skip.contains(&GateId(gi as u32)) {
                continue;
            }
            for inp in gate.inputs.iter_mut() {
                if *inp == from {
                    *inp = to;
                }
            }
        }
    }

    /// Rewire output bus references from `from` to `to`.
    pub fn redirect_outputs(&mut self, from: NetId, to: NetId) {
        for bus in self.output_buses.iter_mut() {
            for n in bus.nets.iter_mut() {
                if *n == from {
                    *n = to;
                }
            }
        }
    }

    /// Gates currently reading `net`.
    pub fn readers(&self, net: NetId) -> Vec<GateId> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.inputs.contains(&net))
            .map(|(i, _)| GateId(i as u32))
            .collect()
    }

    pub fn key_input_nets(&self) -> &[NetId] {
        &self.key_inputs
    }

    /// Freeze into an immutable netlist. Checks the single-driver invariant
    /// for every net that is referenced by a gate or a port; acyclicity is
    /// left to `topological_order`.
    pub fn finish(self) -> Result<Netlist, NetlistError> {
        let mut referenced = vec![false; self.net_names.len()];
        for g in &self.gates {
            for &i in &g.inputs {
                referenced[i.index()] = true;
            }
        }
        for b in self.input_buses.iter().chain(self.output_buses.iter()) {
            for &n in &b.nets {
                referenced[n.index()] = true;
            }
        }
        for (i, d) in self.drivers.iter().enumerate() {
            if d.is_none() && referenced[i] {
                return Err(NetlistError::Undriven(NetId(i as u32)));
            }
        }
        let drivers: Vec<Driver> = self
            .drivers
            .into_iter()
            .map(|d| d.unwrap_or(Driver::PrimaryInput))
            .collect();
        Ok(Netlist {
            name: self.name,
            net_names: self.net_names,
            gates: self.gates,
            drivers,
            input_buses: self.input_buses,
            output_buses: self.output_buses,
            key_inputs: self.key_inputs,
        })
    }
}

/// Fold all nets implied constant by `partial` (an assignment over primary
/// input and/or output nets) and return the reduced netlist.
///
/// Input pins propagate forward through the gate graph with algebraic
/// single-gate rewrites (`AND(x,1) → BUF(x)`, known MUX select, ...). Output
/// pins never fold logic; they are checked against the folded value and a
/// [`NetlistError::Conflict`] is raised when an output folds to a constant
/// different from its pin, which signals inconsistent oracle data. Gates no
/// longer reachable from an output are dropped, so the gate count never
/// grows. Port order and names are preserved; when every primary input is
/// pinned the surviving logic is a function of the key inputs only.
pub fn propagate_constants(n: &Netlist, partial: &Assignment) -> Result<Netlist, NetlistError> {
    let inputs: std::collections::BTreeSet<NetId> = n.primary_inputs().into_iter().collect();
    let outputs: std::collections::BTreeSet<NetId> = n.primary_outputs().into_iter().collect();
    let mut known: Vec<Option<bool>> = vec![None; n.net_count()];
    for (net, v) in partial.iter() {
        if net.index() >= n.net_count() {
            return Err(NetlistError::UnknownNet(net));
        }
        if !inputs.contains(&net) && !outputs.contains(&net) {
            return Err(NetlistError::NotAPort(net));
        }
        if inputs.contains(&net) {
            known[net.index()] = Some(v);
        }
    }

    let order = topological_order(n)?;

    // Rewritten form of each gate, in terms of ORIGINAL net ids.
    let mut rewritten: Vec<Option<Folded>> = (0..n.gate_count()).map(|_| None).collect();
    for &gid in &order {
        let gate = n.gate(gid);
        if gate.kind.is_state() {
            // State is a propagation barrier: output stays unknown.
            rewritten[gid.index()] = Some(Folded::Gate(gate.kind, gate.inputs.clone()));
            continue;
        }
        let vals: Vec<Option<bool>> = gate.inputs.iter().map(|i| known[i.index()]).collect();
        let folded = fold_gate(gate.kind, &gate.inputs, &vals);
        if let Folded::Const(v) = folded {
            known[gate.output.index()] = Some(v);
        }
        rewritten[gid.index()] = Some(folded);
    }

    // Conflict check on pinned outputs.
    for (net, pinned) in partial.iter() {
        if outputs.contains(&net) && !inputs.contains(&net) {
            if let Some(f) = known[net.index()] {
                if f != pinned {
                    return Err(NetlistError::Conflict {
                        net,
                        folded: f,
                        pinned,
                    });
                }
            }
        }
    }

    // Rebuild: ports keep identity; logic still reachable from an output is
    // re-emitted on demand, which drops dead gates.
    let mut nb = NetlistBuilder::new(n.name.clone());
    let mut map: Vec<Option<NetId>> = vec![None; n.net_count()];
    for bus in n.input_buses() {
        let nets = nb.input_bus(&bus.name, bus.width(), bus.signed);
        for (&old, &new) in bus.nets.iter().zip(nets.iter()) {
            map[old.index()] = Some(new);
        }
    }
    for &k in n.key_inputs() {
        let new = nb.key_input();
        map[k.index()] = Some(new);
    }

    struct Rebuild<'a> {
        n: &'a Netlist,
        known: &'a [Option<bool>],
        rewritten: &'a [Option<Folded>],
        map: Vec<Option<NetId>>,
    }

    impl Rebuild<'_> {
        fn resolve(&mut self, net: NetId, nb: &mut NetlistBuilder) -> NetId {
            if let Some(v) = self.known[net.index()] {
                return nb.const_bit(v);
            }
            if let Some(m) = self.map[net.index()] {
                return m;
            }
            let new = match self.n.driver(net) {
                Driver::Gate(gid) => {
                    match self.rewritten[gid.index()].clone().expect("gate visited") {
                        Folded::Const(v) => nb.const_bit(v),
                        Folded::Wire(w) => self.resolve(w, nb),
                        Folded::Gate(GateKind::Dff, ins) => {
                            // Pre-map the output so state feedback loops
                            // terminate.
                            let out = nb.fresh_net(self.n.net_name(net).to_string());
                            self.map[net.index()] = Some(out);
                            let d = self.resolve(ins[0], nb);
                            nb.gate_onto(GateKind::Dff, &[d], out);
                            return out;
                        }
                        Folded::Gate(kind, ins) => {
                            let new_ins: Vec<NetId> =
                                ins.iter().map(|&i| self.resolve(i, nb)).collect();
                            nb.gate(kind, &new_ins)
                        }
                    }
                }
                // Port nets are pre-mapped, so this arm is unreachable.
                Driver::PrimaryInput | Driver::KeyInput => unreachable!("port net not pre-mapped"),
            };
            self.map[net.index()] = Some(new);
            new
        }
    }

    let mut rb = Rebuild {
        n,
        known: &known,
        rewritten: &rewritten,
        map,
    };
    for bus in n.output_buses() {
        let nets: Vec<NetId> = bus.nets.iter().map(|&o| rb.resolve(o, &mut nb)).collect();
        nb.output_bus(&bus.name, &nets, bus.signed);
    }
    nb.finish()
}

#[derive(Clone)]
enum Folded {
    Const(bool),
    Wire(NetId),
    Gate(GateKind, Vec<NetId>),
}

/// Single-gate rewrite under partially known inputs.
fn fold_gate(kind: GateKind, ins: &[NetId], vals: &[Option<bool>]) -> Folded {
    use Folded::*;
    use GateKind::*;
    let all_known = vals.iter().all(|v| v.is_some());
    match kind {
        Const0 => Const(false),
        Const1 => Const(true),
        Buf => match vals[0] {
            Some(v) => Const(v),
            None => Wire(ins[0]),
        },
        Not => match vals[0] {
            Some(v) => Const(!v),
            None => Gate(Not, ins.to_vec()),
        },
        And | Nand => {
            let inv = kind == Nand;
            if vals.contains(&Some(false)) {
                Const(inv)
            } else if all_known {
                Const(!inv)
            } else if vals[0] == Some(true) {
                unary(inv, ins[1])
            } else if vals[1] == Some(true) {
                unary(inv, ins[0])
            } else {
                Gate(kind, ins.to_vec())
            }
        }
        Or | Nor => {
            let inv = kind == Nor;
            if vals.contains(&Some(true)) {
                Const(!inv)
            } else if all_known {
                Const(inv)
            } else if vals[0] == Some(false) {
                unary(inv, ins[1])
            } else if vals[1] == Some(false) {
                unary(inv, ins[0])
            } else {
                Gate(kind, ins.to_vec())
            }
        }
        Xor | Xnor => {
            let inv = kind == Xnor;
            match (vals[0], vals[1]) {
                (Some(a), Some(b)) => Const((a ^ b) ^ inv),
                (Some(a), None) => unary(a ^ inv, ins[1]),
                (None, Some(b)) => unary(b ^ inv, ins[0]),
                (None, None) => Gate(kind, ins.to_vec()),
            }
        }
        Mux2 => {
            let (s, a, b) = (vals[0], vals[1], vals[2]);
            match s {
                Some(false) => match a {
                    Some(v) => Const(v),
                    None => Wire(ins[1]),
                },
                Some(true) => match b {
                    Some(v) => Const(v),
                    None => Wire(ins[2]),
                },
                None => match (a, b) {
                    (Some(x), Some(y)) if x == y => Const(x),
                    (Some(false), Some(true)) => Wire(ins[0]),
                    (Some(true), Some(false)) => Gate(Not, vec![ins[0]]),
                    _ => Gate(Mux2, ins.to_vec()),
                },
            }
        }
        Dff => Gate(Dff, ins.to_vec()),
    }
}

fn unary(invert: bool, net: NetId) -> Folded {
    if invert {
        Folded::Gate(GateKind::Not, vec![net])
    } else {
        Folded::Wire(net)
    }
}

#[cfg(test)]
mod tests;
