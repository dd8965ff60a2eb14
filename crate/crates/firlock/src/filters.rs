//! FIR filter netlist generation and golden software oracles.
//!
//! Three hardware forms are generated from one coefficient set:
//!
//! * direct — input delay line feeding one constant-array multiply
//!   (CAVM) block; a new output every cycle, zero latency.
//! * transposed — one multiple-constant-multiplication (MCM) block on the
//!   live input feeding a register-adder chain; same alignment as direct.
//! * folded — one time-multiplexed constant multiplier (TMCM) shared
//!   across taps by a counter; sample `j` is presented for `n` consecutive
//!   cycles starting at cycle `j·n`, and its output is registered at the end
//!   of the frame, so reading the output bus at cycles `n·(j+1)` decimates
//!   the trace back to the per-sample sequence.
//!
//! The software convolution and the zero-phase frequency response are exact
//! references that never touch the netlist path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    self, adder_mod, clog2, equality_comparator, mux_tree, resize, signed_width, subtractor_mod,
    Bus, Recoding,
};
use crate::netlist::{GateKind, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("filter needs at least one coefficient")]
    Empty,
    #[error("coefficient {0} does not fit in {1} bits (two's complement)")]
    CoefficientRange(i64, u32),
    #[error("input bit-width must be at least 2, got {0}")]
    InputWidth(u32),
    #[error("frequency grid needs at least 2 points")]
    Grid,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Arith(#[from] arith::ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FilterForm {
    #[default]
    Direct,
    Transposed,
    Folded,
}

impl std::str::FromStr for FilterForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(FilterForm::Direct),
            "transposed" => Ok(FilterForm::Transposed),
            "folded" => Ok(FilterForm::Folded),
            other => Err(format!("unknown filter form `{other}`")),
        }
    }
}

/// Coefficient set plus bit-width parameters.
///
/// The JSON schema is `{name, coefficients, mbw, ibw}`; `form` and
/// `block_arch` default and are normally supplied on the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    pub name: String,
    pub coefficients: Vec<i64>,
    pub mbw: u32,
    pub ibw: u32,
    #[serde(default)]
    pub form: FilterForm,
    #[serde(default)]
    pub block_arch: Option<String>,
}

impl FilterSpec {
    pub fn new(name: &str, coefficients: Vec<i64>, mbw: u32, ibw: u32) -> Self {
        FilterSpec {
            name: name.to_string(),
            coefficients,
            mbw,
            ibw,
            form: FilterForm::Direct,
            block_arch: None,
        }
    }

    pub fn taps(&self) -> usize {
        self.coefficients.len()
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if self.coefficients.is_empty() {
            return Err(FilterError::Empty);
        }
        if self.ibw < 2 {
            return Err(FilterError::InputWidth(self.ibw));
        }
        for &c in &self.coefficients {
            if signed_width(c) > self.mbw as usize {
                return Err(FilterError::CoefficientRange(c, self.mbw));
            }
        }
        Ok(())
    }

    /// Output width: `ibw + mbw + ⌈log2 n⌉`, sized so the worst-case sum
    /// of products never overflows.
    pub fn output_width(&self) -> usize {
        self.ibw as usize + self.mbw as usize + clog2(self.taps())
    }
}

/// Exact integer convolution with zero-padded history:
/// `y[j] = Σ_i c[i]·x[j−i]`.
pub fn golden_convolution(c: &[i64], xs: &[i64]) -> Vec<i64> {
    xs.iter()
        .enumerate()
        .map(|(j, _)| {
            c.iter()
                .enumerate()
                .filter(|&(i, _)| i <= j)
                .map(|(i, &ci)| ci * xs[j - i])
                .sum()
        })
        .collect()
}

/// Zero-phase frequency response samples over `[0, π]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyResponse {
    /// `(ω, amplitude)` pairs, strictly increasing in ω.
    pub points: Vec<(f64, f64)>,
    /// Set when the coefficients are neither symmetric nor antisymmetric;
    /// the amplitude is then the magnitude response.
    pub asymmetric: bool,
}

impl FrequencyResponse {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega,amplitude\n");
        for (w, a) in &self.points {
            s.push_str(&format!("{w},{a}\n"));
        }
        s
    }
}

/// Zero-phase frequency response on a uniform grid of `grid_points` points
/// spanning `[0, π]` inclusive.
///
/// Symmetric and antisymmetric coefficient sets get the real amplitude
/// `A(ω)` with the linear-phase factor removed; anything else falls back to
/// the magnitude `|Σ c_i e^{−jωi}|` with the asymmetry flag set.
pub fn zpfr(c: &[i64], grid_points: usize) -> Result<FrequencyResponse, FilterError> {
    if grid_points < 2 {
        return Err(FilterError::Grid);
    }
    let n = c.len();
    let symmetric = (0..n).all(|i| c[i] == c[n - 1 - i]);
    let antisymmetric = !symmetric && (0..n).all(|i| c[i] == -c[n - 1 - i]);
    let mid = (n as f64 - 1.0) / 2.0;
    let mut points = Vec::with_capacity(grid_points);
    for g in 0..grid_points {
        let w = std::f64::consts::PI * g as f64 / (grid_points - 1) as f64;
        let amp = if symmetric {
            c.iter()
                .enumerate()
                .map(|(i, &ci)| ci as f64 * (w * (i as f64 - mid)).cos())
                .sum()
        } else if antisymmetric {
            c.iter()
                .enumerate()
                .map(|(i, &ci)| ci as f64 * (w * (mid - i as f64)).sin())
                .sum()
        } else {
            let re: f64 = c
                .iter()
                .enumerate()
                .map(|(i, &ci)| ci as f64 * (w * i as f64).cos())
                .sum();
            let im: f64 = c
                .iter()
                .enumerate()
                .map(|(i, &ci)| -(ci as f64) * (w * i as f64).sin())
                .sum();
            re.hypot(im)
        };
        points.push((w, amp));
    }
    Ok(FrequencyResponse {
        points,
        asymmetric: !symmetric && !antisymmetric,
    })
}

/// Register a whole bus through DFFs (zero reset).
fn dff_bus(nb: &mut NetlistBuilder, b: &Bus) -> Bus {
    let nets = b.nets().iter().map(|&n| nb.dff(n)).collect();
    Bus::new(nets, b.is_signed())
}

/// Sum of per-tap constant products with the product negations folded into
/// the adder chain; fixed-width modular arithmetic at `width`.
fn sum_products(nb: &mut NetlistBuilder, terms: &[(Bus, bool)], width: usize) -> Bus {
    let mut acc: Option<Bus> = None;
    for (bus, negate) in terms {
        acc = Some(match acc {
            None => {
                if *negate {
                    let z = arith::zero_bus(nb, width);
                    subtractor_mod(nb, &z, bus, width)
                } else {
                    resize(nb, bus, width)
                }
            }
            Some(a) => {
                if *negate {
                    subtractor_mod(nb, &a, bus, width)
                } else {
                    adder_mod(nb, &a, bus, width)
                }
            }
        });
    }
    acc.unwrap_or_else(|| arith::zero_bus(nb, width))
}

/// Plain CAVM block: `Σ c_i·x_i` as DBR shift-adds, exact at `width` bits.
pub(crate) fn cavm_block(
    nb: &mut NetlistBuilder,
    c: &[i64],
    taps: &[Bus],
    width: usize,
) -> Bus {
    let terms: Vec<(Bus, bool)> = c
        .iter()
        .zip(taps.iter())
        .filter(|(&ci, _)| ci != 0)
        .map(|(&ci, x)| arith::dbr_product(nb, ci, x, Recoding::Csd))
        .collect();
    sum_products(nb, &terms, width)
}

/// Parallel direct form: delay line on the input feeding one CAVM block.
pub fn gen_direct(spec: &FilterSpec) -> Result<Netlist, FilterError> {
    gen_direct_with(spec, |nb, taps, width| Ok(cavm_block(nb, &spec.coefficients, taps, width)))
}

/// Direct-form scaffold with a pluggable CAVM implementation, used both for
/// the plain filter and for obfuscated multiplier blocks.
pub fn gen_direct_with(
    spec: &FilterSpec,
    cavm: impl FnOnce(&mut NetlistBuilder, &[Bus], usize) -> Result<Bus, FilterError>,
) -> Result<Netlist, FilterError> {
    spec.validate()?;
    let n = spec.taps();
    let w = spec.output_width();
    let mut nb = NetlistBuilder::new(format!("{}_direct", spec.name));
    let x = Bus::new(nb.input_bus("x", spec.ibw as usize, true), true);
    let mut taps = Vec::with_capacity(n);
    taps.push(x.clone());
    for _ in 1..n {
        let prev = taps.last().unwrap();
        let reg = dff_bus(&mut nb, prev);
        taps.push(reg);
    }
    let y = cavm(&mut nb, &taps, w)?;
    let y = resize(&mut nb, &y, w);
    nb.output_bus("y", y.nets(), true);
    Ok(nb.finish()?)
}

/// Parallel transposed form: MCM products into a register-adder chain.
pub fn gen_transposed(spec: &FilterSpec) -> Result<Netlist, FilterError> {
    gen_transposed_with(spec, |nb, x, width| {
        Ok(spec
            .coefficients
            .iter()
            .map(|&ci| {
                if ci == 0 {
                    (arith::zero_bus(nb, width), false)
                } else {
                    arith::dbr_product(nb, ci, x, Recoding::Csd)
                }
            })
            .collect())
    })
}

/// Transposed-form scaffold with a pluggable MCM implementation producing
/// one `(product, negate)` pair per coefficient.
pub fn gen_transposed_with(
    spec: &FilterSpec,
    mcm: impl FnOnce(&mut NetlistBuilder, &Bus, usize) -> Result<Vec<(Bus, bool)>, FilterError>,
) -> Result<Netlist, FilterError> {
    spec.validate()?;
    let n = spec.taps();
    let w = spec.output_width();
    let mut nb = NetlistBuilder::new(format!("{}_transposed", spec.name));
    let x = Bus::new(nb.input_bus("x", spec.ibw as usize, true), true);
    let products = mcm(&mut nb, &x, w)?;
    assert_eq!(products.len(), n);
    // Register-adder chain, highest tap first:
    //   r[n-1] ← ±p[n-1],  r[i] ← r[i+1] ± p[i],  y = r[1] ± p[0]
    let mut carry: Option<Bus> = None;
    let mut y: Option<Bus> = None;
    for (i, (bus, negate)) in products.into_iter().enumerate().rev() {
        let sum = match (&carry, negate) {
            (None, false) => resize(&mut nb, &bus, w),
            (None, true) => {
                let z = arith::zero_bus(&mut nb, w);
                subtractor_mod(&mut nb, &z, &bus, w)
            }
            (Some(r), false) => adder_mod(&mut nb, r, &bus, w),
            (Some(r), true) => subtractor_mod(&mut nb, r, &bus, w),
        };
        if i == 0 {
            y = Some(sum);
        } else {
            carry = Some(dff_bus(&mut nb, &sum));
        }
    }
    let y = y.expect("n >= 1");
    nb.output_bus("y", y.nets(), true);
    Ok(nb.finish()?)
}

/// Folded realization: counter + TMCM + accumulator + sample registers.
pub fn gen_folded(spec: &FilterSpec) -> Result<Netlist, FilterError> {
    gen_folded_with(spec, |nb, sel, operand, width| {
        let products: Vec<Bus> = spec
            .coefficients
            .iter()
            .map(|&ci| {
                let p = arith::dbr_const_mul(nb, ci, operand, Recoding::Csd);
                resize(nb, &p, width)
            })
            .collect();
        Ok(mux_tree(nb, sel, &products)?)
    })
}

/// Folded scaffold with a pluggable TMCM implementation computing
/// `c_sel·operand`.
pub fn gen_folded_with(
    spec: &FilterSpec,
    tmcm: impl FnOnce(&mut NetlistBuilder, &Bus, &Bus, usize) -> Result<Bus, FilterError>,
) -> Result<Netlist, FilterError> {
    spec.validate()?;
    let n = spec.taps();
    let w = spec.output_width();
    let cb = clog2(n).max(1);
    let mut nb = NetlistBuilder::new(format!("{}_folded", spec.name));
    let x = Bus::new(nb.input_bus("x", spec.ibw as usize, true), true);

    // Up-counter wrapping at n−1; count is the tap index within the frame.
    let count_nets: Vec<_> = (0..cb).map(|i| nb.fresh_net(format!("count_{i}"))).collect();
    let count = Bus::new(count_nets.clone(), false);
    let last_const = arith::const_bus(&mut nb, n as i64 - 1, cb)?;
    let last_u = Bus::new(last_const.nets().to_vec(), false);
    let is_last = equality_comparator(&mut nb, &count, &last_u)?;
    let inc_one = arith::const_bus(&mut nb, 1, cb)?;
    let inc = adder_mod(&mut nb, &count, &Bus::new(inc_one.nets().to_vec(), false), cb);
    let zero = nb.zero();
    for i in 0..cb {
        let next = nb.mux2(is_last, inc.bit(i), zero);
        nb.gate_onto(GateKind::Dff, &[next], count_nets[i]);
    }

    // Sample history: h[t] holds x(j−t) during frame j; h[0] is the live
    // input. The line shifts at the last cycle of each frame.
    let mut hist: Vec<Bus> = vec![x.clone()];
    for t in 1..n {
        let reg_nets: Vec<_> = (0..spec.ibw as usize)
            .map(|i| nb.fresh_net(format!("h{t}_{i}")))
            .collect();
        hist.push(Bus::new(reg_nets, true));
    }
    for t in (1..n).rev() {
        let src = hist[t - 1].clone();
        let cur = hist[t].clone();
        for i in 0..spec.ibw as usize {
            let next = nb.mux2(is_last, cur.bit(i), src.bit(i));
            nb.gate_onto(GateKind::Dff, &[next], cur.bit(i));
        }
    }

    let operand = mux_tree(&mut nb, &count, &hist)?;
    let product = tmcm(&mut nb, &count, &operand, w)?;
    let product = resize(&mut nb, &product, w);

    // Accumulator: restart at count 0, register the full sum at count n−1.
    let acc_nets: Vec<_> = (0..w).map(|i| nb.fresh_net(format!("acc_{i}"))).collect();
    let acc = Bus::new(acc_nets.clone(), true);
    let zero_const = arith::const_bus(&mut nb, 0, cb)?;
    let count_s = Bus::new(count.nets().to_vec(), false);
    let is_first = equality_comparator(&mut nb, &count_s, &Bus::new(zero_const.nets().to_vec(), false))?;
    let added = adder_mod(&mut nb, &acc, &product, w);
    let partial_nets: Vec<_> = (0..w)
        .map(|i| nb.mux2(is_first, added.bit(i), product.bit(i)))
        .collect();
    let partial = Bus::new(partial_nets, true);
    for i in 0..w {
        nb.gate_onto(GateKind::Dff, &[partial.bit(i)], acc_nets[i]);
    }

    // Output register: captures the frame sum at the last cycle and holds it
    // through the following frame.
    let y_nets: Vec<_> = (0..w).map(|i| nb.fresh_net(format!("yr_{i}"))).collect();
    for i in 0..w {
        let next = nb.mux2(is_last, y_nets[i], partial.bit(i));
        nb.gate_onto(GateKind::Dff, &[next], y_nets[i]);
    }
    nb.output_bus("y", &y_nets, true);
    Ok(nb.finish()?)
}

#[cfg(test)]
mod tests;
