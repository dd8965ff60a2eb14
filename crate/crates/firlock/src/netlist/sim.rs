//! Cycle-accurate netlist simulation.

use super::{topological_order, Assignment, Driver, GateId, GateKind, NetId, Netlist, NetlistError};

/// Reusable evaluation context for one netlist. Caches the topological order
/// and value buffers, so repeated runs avoid re-planning. One simulator per
/// thread of execution; the netlist itself may be shared read-only.
pub struct Simulator<'a> {
    n: &'a Netlist,
    order: Vec<GateId>,
    values: Vec<bool>,
    known: Vec<bool>,
    state: Vec<bool>,
    dffs: Vec<GateId>,
}

impl<'a> Simulator<'a> {
    pub fn new(n: &'a Netlist) -> Result<Self, NetlistError> {
        let order = topological_order(n)?;
        Ok(Simulator {
            n,
            order,
            values: vec![false; n.net_count()],
            known: vec![false; n.net_count()],
            state: Vec::new(),
            dffs: n.state_elements(),
        })
    }

    pub fn netlist(&self) -> &Netlist {
        self.n
    }

    fn load_ports(&mut self, x: &Assignment, k: &Assignment) -> Result<(), NetlistError> {
        self.known.iter_mut().for_each(|b| *b = false);
        for net in self.n.primary_inputs() {
            let v = x
                .get(net)
                .ok_or(NetlistError::IncompleteAssignment(net))?;
            self.values[net.index()] = v;
            self.known[net.index()] = true;
        }
        for &net in self.n.key_inputs() {
            let v = k
                .get(net)
                .ok_or(NetlistError::IncompleteAssignment(net))?;
            self.values[net.index()] = v;
            self.known[net.index()] = true;
        }
        Ok(())
    }

    fn eval_comb(&mut self) {
        for idx in 0..self.order.len() {
            let gid = self.order[idx];
            let gate = self.n.gate(gid);
            if gate.kind.is_state() {
                continue;
            }
            let v = {
                let val = |n: NetId| {
                    debug_assert!(self.known[n.index()], "net {n} read before its driver ran");
                    self.values[n.index()]
                };
                match gate.kind {
                    GateKind::And => val(gate.inputs[0]) & val(gate.inputs[1]),
                    GateKind::Or => val(gate.inputs[0]) | val(gate.inputs[1]),
                    GateKind::Nand => !(val(gate.inputs[0]) & val(gate.inputs[1])),
                    GateKind::Nor => !(val(gate.inputs[0]) | val(gate.inputs[1])),
                    GateKind::Xor => val(gate.inputs[0]) ^ val(gate.inputs[1]),
                    GateKind::Xnor => !(val(gate.inputs[0]) ^ val(gate.inputs[1])),
                    GateKind::Not => !val(gate.inputs[0]),
                    GateKind::Buf => val(gate.inputs[0]),
                    GateKind::Mux2 => {
                        if val(gate.inputs[0]) {
                            val(gate.inputs[2])
                        } else {
                            val(gate.inputs[1])
                        }
                    }
                    GateKind::Const0 => false,
                    GateKind::Const1 => true,
                    GateKind::Dff => unreachable!(),
                }
            };
            self.values[gate.output.index()] = v;
            self.known[gate.output.index()] = true;
        }
    }

    fn collect_outputs(&self) -> Assignment {
        let mut out = Assignment::new();
        for net in self.n.primary_outputs() {
            out.set(net, self.values[net.index()]);
        }
        out
    }

    /// One combinational evaluation. Errors if the netlist holds state.
    pub fn run_comb(&mut self, x: &Assignment, k: &Assignment) -> Result<Assignment, NetlistError> {
        if self.n.has_state() {
            return Err(NetlistError::HasState);
        }
        self.load_ports(x, k)?;
        self.eval_comb();
        Ok(self.collect_outputs())
    }

    /// Reset state elements to 0.
    pub fn reset(&mut self) {
        self.state.clear();
    }

    /// Advance one clock cycle: present `x`/`k`, evaluate, latch DFFs.
    /// Returns the outputs observed during the cycle.
    pub fn step(&mut self, x: &Assignment, k: &Assignment) -> Result<Assignment, NetlistError> {
        if self.state.len() != self.dffs.len() {
            self.state = vec![false; self.dffs.len()];
        }
        self.load_ports(x, k)?;
        for (i, &gid) in self.dffs.iter().enumerate() {
            let out = self.n.gate(gid).output;
            self.values[out.index()] = self.state[i];
            self.known[out.index()] = true;
        }
        self.eval_comb();
        let outputs = self.collect_outputs();
        for (i, &gid) in self.dffs.iter().enumerate() {
            let d = self.n.gate(gid).inputs[0];
            debug_assert!(self.known[d.index()]);
            self.state[i] = self.values[d.index()];
        }
        Ok(outputs)
    }

    /// Value of an arbitrary net after the last evaluation.
    pub fn value(&self, net: NetId) -> Option<bool> {
        if self.known[net.index()] || matches!(self.n.driver(net), Driver::Gate(_)) {
            Some(self.values[net.index()])
        } else {
            None
        }
    }
}

/// Evaluate a purely combinational netlist once.
///
/// `x` must cover every primary input and `k` every key input; the result
/// assigns every primary output. Pure: identical inputs give identical
/// outputs.
pub fn simulate_comb(
    n: &Netlist,
    x: &Assignment,
    k: &Assignment,
) -> Result<Assignment, NetlistError> {
    Simulator::new(n)?.run_comb(x, k)
}

/// Clock a sequential netlist for `cycles` steps with DFFs starting at 0.
///
/// `xs` supplies one input assignment per cycle (`xs.len() == cycles`); the
/// trace of per-cycle output assignments is returned.
pub fn simulate_seq(
    n: &Netlist,
    xs: &[Assignment],
    k: &Assignment,
    cycles: usize,
) -> Result<Vec<Assignment>, NetlistError> {
    if xs.len() != cycles {
        return Err(NetlistError::StreamLength {
            got: xs.len(),
            cycles,
        });
    }
    let mut sim = Simulator::new(n)?;
    sim.reset();
    let mut trace = Vec::with_capacity(cycles);
    for x in xs {
        trace.push(sim.step(x, k)?);
    }
    Ok(trace)
}
