//! Small hand-built circuits used by tests, examples, and demos.

use super::{Netlist, NetlistBuilder};

/// 3-input majority circuit: `y = x0·x1 + x0·x2 + x1·x2`.
pub fn majority3() -> Netlist {
    let mut nb = NetlistBuilder::new("majority3");
    let x = nb.input_bus("x", 3, false);
    let a01 = nb.and(x[0], x[1]);
    let a02 = nb.and(x[0], x[2]);
    let a12 = nb.and(x[1], x[2]);
    let o = nb.or(a01, a02);
    let y = nb.or(o, a12);
    nb.output_bus("y", &[y], false);
    nb.finish().expect("majority3 is well-formed")
}

/// Majority circuit locked with two key gates on separate AND branches:
/// an XNOR for `keyinput0` (secret 1) and an XOR for `keyinput1`
/// (secret 0). The secret key is `k1k0 = 01`.
pub fn locked_majority_split() -> Netlist {
    let mut nb = NetlistBuilder::new("majority3_locked_split");
    let x = nb.input_bus("x", 3, false);
    let k0 = nb.key_input();
    let k1 = nb.key_input();
    let a01 = nb.and(x[0], x[1]);
    let a02 = nb.and(x[0], x[2]);
    let a12 = nb.and(x[1], x[2]);
    let g0 = nb.xnor(k0, a01);
    let g1 = nb.xor(k1, a02);
    let o = nb.or(g0, g1);
    let y = nb.or(o, a12);
    nb.output_bus("y", &[y], false);
    nb.finish().expect("locked majority is well-formed")
}

/// Majority circuit with the two key gates stacked back to back on one
/// branch, so complementing both key bits leaves the function unchanged:
/// both `k1k0 = 01` and `k1k0 = 10` restore the original circuit.
pub fn locked_majority_stacked() -> Netlist {
    let mut nb = NetlistBuilder::new("majority3_locked_stacked");
    let x = nb.input_bus("x", 3, false);
    let k0 = nb.key_input();
    let k1 = nb.key_input();
    let a01 = nb.and(x[0], x[1]);
    let a02 = nb.and(x[0], x[2]);
    let a12 = nb.and(x[1], x[2]);
    let g0 = nb.xnor(k0, a01);
    let g1 = nb.xor(k1, g0);
    let o = nb.or(g1, a02);
    let y = nb.or(o, a12);
    nb.output_bus("y", &[y], false);
    nb.finish().expect("locked majority is well-formed")
}

/// Unkeyed two's-complement adder: `sum = a + b`, exact width.
pub fn adder(width: usize) -> Netlist {
    let mut nb = NetlistBuilder::new(format!("adder{width}"));
    let a = nb.input_bus("a", width, true);
    let b = nb.input_bus("b", width, true);
    let (abus, bbus) = (
        crate::arith::Bus::new(a, true),
        crate::arith::Bus::new(b, true),
    );
    let sum = crate::arith::adder(&mut nb, &abus, &bbus);
    nb.output_bus("sum", sum.nets(), true);
    nb.finish().expect("adder is well-formed")
}

/// One DFF looped through a NOT gate: output alternates 0,1,0,1,...
pub fn toggle() -> Netlist {
    let mut nb = NetlistBuilder::new("toggle");
    let q = nb.fresh_net("q");
    let d = nb.not(q);
    nb.gate_onto(super::GateKind::Dff, &[d], q);
    nb.output_bus("q", &[q], false);
    nb.finish().expect("toggle is well-formed")
}
