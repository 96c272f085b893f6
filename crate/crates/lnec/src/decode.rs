//! Channel simulation and minimum-distance decoding.
//!
//! Transmission runs the per-channel recursion (each output is the kernel
//! combination of the tail's inputs plus that channel's own error symbol).
//! Decoding is an exhaustive coset search out to the code's correction
//! radius at the target; it is an exactness oracle, not a fast decoder.

use serde::Serialize;

use crate::analyze::{min_distance, AnalyzeOpts};
use crate::code::LnecCode;
use crate::exec;
use crate::galois::Elem;
use crate::network::TargetRef;
use crate::{Error, Result};

/// One run of the network: message, error vector, and every channel output.
#[derive(Clone, Debug)]
pub struct Transmission {
    pub message: Vec<Elem>,
    pub error: Vec<Elem>,
    /// Channel outputs in canonical order.
    pub outputs: Vec<Elem>,
}

impl Transmission {
    /// Outputs observed on a node's in-channels.
    pub fn received_at(&self, code: &LnecCode, node: usize) -> Vec<Elem> {
        code.network()
            .ins(node)
            .iter()
            .map(|&e| self.outputs[e])
            .collect()
    }
}

/// Simulates a transmission of message `x` under error vector `z`.
pub fn transmit(code: &LnecCode, x: &[Elem], z: &[Elem]) -> Result<Transmission> {
    let net = code.network();
    let field = code.field();
    let omega = net.rate();
    if x.len() != omega {
        return Err(Error::Dimension(format!(
            "message length {} != rate {omega}",
            x.len()
        )));
    }
    if z.len() != net.n_channels() {
        return Err(Error::Dimension(format!(
            "error vector length {} != {} channels",
            z.len(),
            net.n_channels()
        )));
    }
    for &v in x.iter().chain(z) {
        field.elem(v as u64)?;
    }
    let mut outputs = vec![0 as Elem; net.n_channels()];
    for e in 0..net.n_channels() {
        let tail = net.tail(e);
        let mut u = z[e];
        if tail == net.source() {
            for (i, &xi) in x.iter().enumerate() {
                u = field.add(u, field.mul(code.kernels().source_coeff(net, i, e), xi));
            }
        } else {
            for &d in net.ins(tail) {
                u = field.add(u, field.mul(code.kernels().coeff(net, d, e), outputs[d]));
            }
        }
        outputs[e] = u;

        // The two routes must agree: recursion vs (x z) against the cached
        // extended kernel.
        #[cfg(debug_assertions)]
        {
            let kernel = code.extended_kernel(e);
            let mut via_kernel = 0;
            for (i, &xi) in x.iter().enumerate() {
                via_kernel = field.add(via_kernel, field.mul(xi, kernel[i]));
            }
            for (d, &zd) in z.iter().enumerate() {
                via_kernel = field.add(via_kernel, field.mul(zd, kernel[omega + d]));
            }
            debug_assert_eq!(u, via_kernel, "recursion disagrees with the kernel product");
        }
    }
    Ok(Transmission {
        message: x.to_vec(),
        error: z.to_vec(),
        outputs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeStatus {
    Unique,
    Ambiguous,
    Failure,
}

/// Outcome of minimum-distance decoding at a node.
#[derive(Clone, Debug, Serialize)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    /// The decoded message when the status is `unique`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<Vec<Elem>>,
    /// Minimal error pattern of the unique solution (channel ids) and the
    /// error values on it.
    pub pattern: Vec<String>,
    pub error_values: Vec<Elem>,
    /// Distinct candidate messages at the minimal weight when ambiguous.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Vec<Elem>>,
    /// The search radius that was exhausted.
    pub radius: usize,
    /// Weight at which solutions were found, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DecodeOpts {
    pub analyze: AnalyzeOpts,
    /// Upper bound on the number of (pattern, values) candidates scanned.
    pub search_limit: u128,
}

impl Default for DecodeOpts {
    fn default() -> Self {
        DecodeOpts {
            analyze: AnalyzeOpts::default(),
            search_limit: 10_000_000,
        }
    }
}

/// Number of errors guaranteed correctable at a target: half the minimum
/// distance, rounded down.
pub fn correction_capability(
    code: &LnecCode,
    target: &TargetRef,
    opts: &AnalyzeOpts,
) -> Result<usize> {
    let report = min_distance(code, target, opts)?;
    Ok((report.d_by_size - 1) / 2)
}

/// Minimum-distance decoding at a node: searches error weights from zero up
/// to the correction radius for message/error pairs that reproduce the
/// received vector exactly.
///
/// The minimal-weight solutions decide the status: all agreeing on the
/// message is `unique` (the lexicographically first witness is reported),
/// disagreement is `ambiguous`, and an empty radius is `failure`.
pub fn decode_min_distance(
    code: &LnecCode,
    node: usize,
    received: &[Elem],
    opts: &DecodeOpts,
) -> Result<DecodeResult> {
    let net = code.network();
    let field = code.field();
    let omega = net.rate();
    let target = TargetRef::Node(node);
    if received.len() != net.ins(node).len() {
        return Err(Error::Dimension(format!(
            "received vector length {} != in-degree {} of {}",
            received.len(),
            net.ins(node).len(),
            net.node_id(node)
        )));
    }
    for &v in received {
        field.elem(v as u64)?;
    }

    let view = code.decoding_view(&target)?;
    let f_block = view.message_space();
    let dim = f_block.rank(field);
    if dim < omega {
        return Err(Error::Undecodable(
            net.node_id(node).to_string(),
            dim,
            omega,
        ));
    }
    let radius = correction_capability(code, &target, &opts.analyze)?;

    let n = net.n_channels();
    let q = field.order();
    let mut estimated: u128 = 0;
    for w in 0..=radius {
        let pats = exec::binomial(n as u64, w as u64).unwrap_or(u128::MAX);
        let vals = (q - 1)
            .checked_pow(w as u32)
            .map(u128::from)
            .unwrap_or(u128::MAX);
        estimated = estimated.saturating_add(pats.saturating_mul(vals));
    }
    if estimated > opts.search_limit {
        return Err(Error::SearchSpace {
            estimated,
            limit: opts.search_limit,
        });
    }

    #[cfg(debug_assertions)]
    let cols = view.columns().to_vec();
    for w in 0..=radius {
        let pats = exec::binomial(n as u64, w as u64).unwrap() as u64;
        let vals = (q - 1).pow(w as u32);
        let total = pats * vals;
        // Index = pattern rank * value combinations; nonzero values per
        // pattern channel are encoded base (q - 1).
        let solutions = exec::filter_map_collect(total, |idx| {
            let (pat_rank, mut val_idx) = (idx / vals, idx % vals);
            let pattern = exec::unrank_combination(n, w, pat_rank);
            let mut zvals = Vec::with_capacity(w);
            for _ in 0..w {
                zvals.push((val_idx % (q - 1)) as Elem + 1);
                val_idx /= q - 1;
            }
            // Subtract the pattern's error contribution, then solve for x.
            let mut rhs = received.to_vec();
            for (&e, &zv) in pattern.iter().zip(&zvals) {
                let row = view.row(omega + e);
                for (j, cell) in rhs.iter_mut().enumerate() {
                    *cell = field.sub(*cell, field.mul(zv, row[j]));
                }
            }
            f_block
                .solve_left(&rhs, field)
                .ok()
                .flatten()
                .map(|x| (pattern.clone(), zvals, x))
        });
        if solutions.is_empty() {
            continue;
        }
        let mut messages: Vec<Vec<Elem>> = solutions.iter().map(|(_, _, x)| x.clone()).collect();
        messages.sort();
        messages.dedup();
        let (pattern, zvals, x) = solutions.into_iter().next().expect("nonempty");
        if messages.len() == 1 {
            #[cfg(debug_assertions)]
            {
                // A unique solution must reproduce the received vector.
                let mut z = vec![0 as Elem; n];
                for (&e, &zv) in pattern.iter().zip(&zvals) {
                    z[e] = zv;
                }
                let txm = transmit(code, &x, &z).expect("solution is well-formed");
                let got: Vec<Elem> = cols.iter().map(|&e| txm.outputs[e]).collect();
                debug_assert_eq!(got, received, "solution must reproduce the received vector");
            }
            return Ok(DecodeResult {
                status: DecodeStatus::Unique,
                message: Some(x),
                pattern: pattern
                    .iter()
                    .map(|&e| net.channel_id(e).to_string())
                    .collect(),
                error_values: zvals,
                candidates: Vec::new(),
                radius,
                weight: Some(w),
            });
        }
        return Ok(DecodeResult {
            status: DecodeStatus::Ambiguous,
            message: None,
            pattern: Vec::new(),
            error_values: Vec::new(),
            candidates: messages,
            radius,
            weight: Some(w),
        });
    }
    Ok(DecodeResult {
        status: DecodeStatus::Failure,
        message: None,
        pattern: Vec::new(),
        error_values: Vec::new(),
        candidates: Vec::new(),
        radius,
        weight: None,
    })
}
