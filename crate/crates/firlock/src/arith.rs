//! Parameterized combinational arithmetic builders.
//!
//! All datapaths are two's complement and exact: widths are chosen so that
//! no reachable value overflows, and fixed-width modular adders are used
//! only where the final value provably fits. Ripple-carry adders and a
//! row-accumulating array multiplier keep the structures easy to verify;
//! constant multiplication uses digit-based recoding over shifted copies of
//! the input, so parallel shifts cost no gates.

use thiserror::Error;

use crate::netlist::{GateKind, NetId, NetlistBuilder};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero-width bus")]
    ZeroWidth,
    #[error("bus width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("select bus is {got} bits, expected {want} for {choices} choices")]
    SelectWidth {
        got: usize,
        want: usize,
        choices: usize,
    },
    #[error("constant {0} does not fit in {1} bits (two's complement)")]
    ConstantRange(i64, usize),
    #[error("mux tree needs at least one choice")]
    NoChoices,
}

/// Ordered bundle of nets carrying a two's-complement (or unsigned) word,
/// LSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bus {
    nets: Vec<NetId>,
    signed: bool,
}

impl Bus {
    pub fn new(nets: Vec<NetId>, signed: bool) -> Self {
        assert!(!nets.is_empty(), "bus must have at least one net");
        Bus { nets, signed }
    }

    pub fn width(&self) -> usize {
        self.nets.len()
    }

    pub fn nets(&self) -> &[NetId] {
        &self.nets
    }

    pub fn bit(&self, i: usize) -> NetId {
        self.nets[i]
    }

    pub fn msb(&self) -> NetId {
        *self.nets.last().unwrap()
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }
}

/// Bits needed to hold `v` in two's complement.
pub fn signed_width(v: i64) -> usize {
    if v >= 0 {
        (64 - v.leading_zeros() as usize) + 1
    } else {
        64 - (!v).leading_zeros() as usize + 1
    }
}

fn fits(v: i64, width: usize) -> bool {
    if width >= 64 {
        return true;
    }
    let lo = -(1i64 << (width - 1));
    let hi = (1i64 << (width - 1)) - 1;
    (lo..=hi).contains(&v)
}

/// `⌈log2 n⌉` with `⌈log2 1⌉ = 0`.
pub fn clog2(n: usize) -> usize {
    usize::BITS as usize - n.saturating_sub(1).leading_zeros() as usize
}

/// Constant bus holding `value` in `width` bits, two's complement.
pub fn const_bus(nb: &mut NetlistBuilder, value: i64, width: usize) -> Result<Bus, ArithError> {
    if width == 0 {
        return Err(ArithError::ZeroWidth);
    }
    if !fits(value, width) {
        return Err(ArithError::ConstantRange(value, width));
    }
    let nets = (0..width)
        .map(|i| nb.const_bit((value >> i.min(63)) & 1 == 1))
        .collect();
    Ok(Bus::new(nets, true))
}

pub fn zero_bus(nb: &mut NetlistBuilder, width: usize) -> Bus {
    let z = nb.zero();
    Bus::new(vec![z; width.max(1)], true)
}

/// Rewire `a` to `width` bits: truncate, or extend with the sign bit
/// (signed) / zeros (unsigned). Adds no gates.
pub fn resize(nb: &mut NetlistBuilder, a: &Bus, width: usize) -> Bus {
    let mut nets = a.nets.clone();
    if nets.len() > width {
        nets.truncate(width);
    } else {
        let ext = if a.signed { a.msb() } else { nb.zero() };
        while nets.len() < width {
            nets.push(ext);
        }
    }
    Bus::new(nets, a.signed)
}

/// Multiply by `2^s`: pure rewiring plus shared constant-0 nets; no gates.
pub fn shift_left(nb: &mut NetlistBuilder, a: &Bus, s: usize) -> Bus {
    let z = nb.zero();
    let mut nets = vec![z; s];
    nets.extend_from_slice(&a.nets);
    Bus::new(nets, a.signed)
}

/// Convert to signed without changing the value (unsigned buses gain one
/// zero bit).
fn to_signed(nb: &mut NetlistBuilder, a: &Bus) -> Bus {
    if a.signed {
        a.clone()
    } else {
        let z = nb.zero();
        let mut nets = a.nets.clone();
        nets.push(z);
        Bus::new(nets, true)
    }
}

/// Fixed-width ripple add/sub core: `a + b + cin` (with `b` optionally
/// complemented per bit by XOR with `invert`), modulo `2^width`.
fn ripple(
    nb: &mut NetlistBuilder,
    a: &Bus,
    b: &Bus,
    invert_b: Option<NetId>,
    cin: NetId,
    width: usize,
) -> Bus {
    nb.count_addsub_block();
    let a = resize(nb, a, width);
    let b = resize(nb, b, width);
    let mut carry = cin;
    let mut sum = Vec::with_capacity(width);
    for i in 0..width {
        let bi = match invert_b {
            Some(inv) => nb.xor(b.bit(i), inv),
            None => b.bit(i),
        };
        let axb = nb.xor(a.bit(i), bi);
        let s = nb.xor(axb, carry);
        sum.push(s);
        if i + 1 < width {
            let g = nb.and(a.bit(i), bi);
            let p = nb.and(axb, carry);
            carry = nb.or(g, p);
        }
    }
    Bus::new(sum, true)
}

/// Exact two's-complement sum, width `max(wa, wb) + 1`.
pub fn adder(nb: &mut NetlistBuilder, a: &Bus, b: &Bus) -> Bus {
    let a = to_signed(nb, a);
    let b = to_signed(nb, b);
    let w = a.width().max(b.width()) + 1;
    let zero = nb.zero();
    ripple(nb, &a, &b, None, zero, w)
}

/// Exact two's-complement difference, width `max(wa, wb) + 1`.
pub fn subtractor(nb: &mut NetlistBuilder, a: &Bus, b: &Bus) -> Bus {
    let a = to_signed(nb, a);
    let b = to_signed(nb, b);
    let w = a.width().max(b.width()) + 1;
    let one = nb.one();
    Bus::new(ripple(nb, &a, &b, Some(one), one, w).nets, true)
}

/// `sel == 0` → `a + b`, `sel == 1` → `a − b`; exact, width `max + 1`.
pub fn add_sub_select(nb: &mut NetlistBuilder, sel: NetId, a: &Bus, b: &Bus) -> Bus {
    let a = to_signed(nb, a);
    let b = to_signed(nb, b);
    let w = a.width().max(b.width()) + 1;
    ripple(nb, &a, &b, Some(sel), sel, w)
}

/// Modular (fixed-width) variants used where the final value provably fits.
pub(crate) fn adder_mod(nb: &mut NetlistBuilder, a: &Bus, b: &Bus, width: usize) -> Bus {
    let zero = nb.zero();
    ripple(nb, a, b, None, zero, width)
}

pub(crate) fn subtractor_mod(nb: &mut NetlistBuilder, a: &Bus, b: &Bus, width: usize) -> Bus {
    let one = nb.one();
    ripple(nb, a, b, Some(one), one, width)
}

/// Exact signed product via row accumulation, width `wa + wb`.
///
/// Rows below the multiplier sign bit are masked copies of the sign-extended
/// multiplicand; the sign row is folded in as one final conditional
/// subtraction, keeping everything modulo `2^(wa+wb)` where the true product
/// always fits.
pub fn array_multiplier(nb: &mut NetlistBuilder, a: &Bus, b: &Bus) -> Result<Bus, ArithError> {
    if a.width() == 0 || b.width() == 0 {
        return Err(ArithError::ZeroWidth);
    }
    let a = to_signed(nb, a);
    let b = to_signed(nb, b);
    let n = a.width() + b.width();
    let a_ext = resize(nb, &a, n);
    let mut acc = zero_bus(nb, n);
    let masked_row = |nb: &mut NetlistBuilder, shift: usize, sel: NetId| -> Bus {
        let z = nb.zero();
        let mut nets = vec![z; shift];
        for i in 0..(n - shift) {
            nets.push(nb.and(a_ext.bit(i), sel));
        }
        Bus::new(nets, true)
    };
    for j in 0..b.width() - 1 {
        let row = masked_row(nb, j, b.bit(j));
        acc = adder_mod(nb, &acc, &row, n);
    }
    let sign_row = masked_row(nb, b.width() - 1, b.msb());
    acc = subtractor_mod(nb, &acc, &sign_row, n);
    Ok(acc)
}

/// Signed-digit expansion of a constant: strictly increasing positions with
/// digits in {−1, +1}, reconstructing `Σ digit·2^position = source`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedDigitExpansion {
    pub digits: Vec<(u32, i8)>,
    pub source: i64,
}

impl SignedDigitExpansion {
    pub fn value(&self) -> i64 {
        self.digits
            .iter()
            .map(|&(p, d)| d as i64 * (1i64 << p))
            .sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.digits.len()
    }
}

/// Canonical signed digit recoding: no two adjacent nonzero digits, minimal
/// nonzero-digit count among signed-binary forms. `csd_expand(0)` is empty.
pub fn csd_expand(c: i64) -> SignedDigitExpansion {
    let mut digits = Vec::new();
    let mut n = c;
    let mut pos = 0u32;
    while n != 0 {
        if n & 1 != 0 {
            let d: i8 = if n.rem_euclid(4) == 1 { 1 } else { -1 };
            digits.push((pos, d));
            n -= d as i64;
        }
        n /= 2;
        pos += 1;
    }
    SignedDigitExpansion { digits, source: c }
}

/// Plain binary expansion of a nonnegative constant (digits all +1).
pub fn binary_expand(c: i64) -> SignedDigitExpansion {
    assert!(c >= 0);
    let digits = (0..64)
        .filter(|&p| (c >> p) & 1 == 1)
        .map(|p| (p as u32, 1i8))
        .collect();
    SignedDigitExpansion { digits, source: c }
}

/// Digit recoding used when realizing constant multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recoding {
    #[default]
    Csd,
    Binary,
}

/// Shift-adds realization of `|c|·x`, plus a flag telling the consumer to
/// negate (folded into the consuming adder where possible). Requires
/// `c != 0`; uses exactly `nonzero_digits(|c|) − 1` adder/subtractor blocks.
pub(crate) fn dbr_product(
    nb: &mut NetlistBuilder,
    c: i64,
    x: &Bus,
    recoding: Recoding,
) -> (Bus, bool) {
    assert!(c != 0);
    let mag = c.abs();
    let exp = match recoding {
        Recoding::Csd => csd_expand(mag),
        Recoding::Binary => binary_expand(mag),
    };
    let x = to_signed(nb, x);
    let w = x.width() + signed_width(mag);
    let mut it = exp.digits.iter().rev();
    let &(p_top, d_top) = it.next().expect("nonzero constant has digits");
    debug_assert_eq!(d_top, 1, "most significant digit of |c| is positive");
    let top = shift_left(nb, &x, p_top as usize);
    let mut acc = resize(nb, &top, w);
    for &(p, d) in it {
        let term = shift_left(nb, &x, p as usize);
        acc = if d > 0 {
            adder_mod(nb, &acc, &term, w)
        } else {
            subtractor_mod(nb, &acc, &term, w)
        };
    }
    (acc, c < 0)
}

/// Multiplierless constant multiplication `c·x` built from shifts and
/// adders/subtractors only. For `c > 0` this instantiates exactly
/// `nonzero_digits(c) − 1` add/sub blocks; negative constants are realized
/// as `|c|·x` plus one final subtract-from-zero.
pub fn dbr_const_mul(nb: &mut NetlistBuilder, c: i64, x: &Bus, recoding: Recoding) -> Bus {
    if c == 0 {
        return zero_bus(nb, x.width());
    }
    let (bus, negate) = dbr_product(nb, c, x, recoding);
    if negate {
        let w = bus.width();
        let zero = zero_bus(nb, w);
        subtractor_mod(nb, &zero, &bus, w)
    } else {
        bus
    }
}

/// `choices[sel]`, with out-of-range selects (non-power-of-two counts)
/// clamped to the last choice. `sel` must be `⌈log2 |choices|⌉` bits wide
/// and all choices equally wide.
pub fn mux_tree(nb: &mut NetlistBuilder, sel: &Bus, choices: &[Bus]) -> Result<Bus, ArithError> {
    if choices.is_empty() {
        return Err(ArithError::NoChoices);
    }
    let w = choices[0].width();
    for c in choices {
        if c.width() != w {
            return Err(ArithError::WidthMismatch(w, c.width()));
        }
    }
    let want = clog2(choices.len());
    if choices.len() > 1 && sel.width() != want {
        return Err(ArithError::SelectWidth {
            got: sel.width(),
            want,
            choices: choices.len(),
        });
    }
    let signed = choices[0].signed;
    let mut layer: Vec<Bus> = choices.to_vec();
    // Clamp semantics: missing leaves duplicate the last choice.
    while layer.len() < (1usize << want) {
        layer.push(choices.last().unwrap().clone());
    }
    for level in 0..want {
        let s = sel.bit(level);
        let mut next = Vec::with_capacity(layer.len() / 2);
        for pair in layer.chunks(2) {
            let nets: Vec<NetId> = (0..w)
                .map(|i| nb.mux2(s, pair[0].bit(i), pair[1].bit(i)))
                .collect();
            next.push(Bus::new(nets, signed));
        }
        layer = next;
    }
    let mut out = layer.into_iter().next().unwrap();
    out.signed = signed;
    Ok(out)
}

/// MUX tree over two's-complement constants, `width` bits each.
pub fn mux_tree_consts(
    nb: &mut NetlistBuilder,
    sel: &Bus,
    consts: &[i64],
    width: usize,
) -> Result<Bus, ArithError> {
    let choices: Vec<Bus> = consts
        .iter()
        .map(|&c| const_bus(nb, c, width))
        .collect::<Result<_, _>>()?;
    mux_tree(nb, sel, &choices)
}

/// Single net that is 1 iff `a == b` bitwise.
pub fn equality_comparator(nb: &mut NetlistBuilder, a: &Bus, b: &Bus) -> Result<NetId, ArithError> {
    if a.width() != b.width() {
        return Err(ArithError::WidthMismatch(a.width(), b.width()));
    }
    let mut acc: Option<NetId> = None;
    for i in 0..a.width() {
        let eq = nb.xnor(a.bit(i), b.bit(i));
        acc = Some(match acc {
            Some(prev) => nb.and(prev, eq),
            None => eq,
        });
    }
    Ok(acc.expect("width >= 1"))
}

/// Single net that is 1 iff `(x − k) mod 2^w ∈ [0, cv]` — the wrap-around
/// semantics of fixed-width subtraction followed by unsigned comparison.
pub fn range_comparator(
    nb: &mut NetlistBuilder,
    x: &Bus,
    k: &Bus,
    cv: u64,
) -> Result<NetId, ArithError> {
    if x.width() != k.width() {
        return Err(ArithError::WidthMismatch(x.width(), k.width()));
    }
    let w = x.width();
    // Unsigned fixed-width difference: signedness flags must not widen.
    let xu = Bus::new(x.nets.clone(), false);
    let ku = Bus::new(k.nets.clone(), false);
    let diff = subtractor_mod(nb, &xu, &ku, w);
    if w >= 64 || cv >= (1u64 << w) - 1 {
        return Ok(nb.one());
    }
    // diff <= cv, scanning from the MSB: greater-than accumulates where the
    // constant has a 0 bit and the prefix is still equal.
    let mut gt: Option<NetId> = None;
    let mut eq_prefix: Option<NetId> = None;
    for i in (0..w).rev() {
        let cbit = (cv >> i) & 1 == 1;
        let d = diff.bit(i);
        if cbit {
            let e = eq_prefix;
            eq_prefix = Some(match e {
                Some(p) => nb.and(p, d),
                None => d,
            });
        } else {
            let here = match eq_prefix {
                Some(p) => nb.and(p, d),
                None => d,
            };
            gt = Some(match gt {
                Some(g) => nb.or(g, here),
                None => here,
            });
            let nd = nb.not(d);
            eq_prefix = Some(match eq_prefix {
                Some(p) => nb.and(p, nd),
                None => nd,
            });
        }
    }
    Ok(match gt {
        Some(g) => nb.not(g),
        None => nb.one(),
    })
}

#[cfg(test)]
mod tests;
