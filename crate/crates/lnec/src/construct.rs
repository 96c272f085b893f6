//! Code construction for the four classes.
//!
//! Multicast MDS codes are built directly: for every decoding-capable sink
//! and every full-rank error pattern of its redundancy size, a disjoint path
//! family is fixed and a dynamic cut set walks down it; each channel's
//! kernel is chosen outside the bad subspaces those cuts induce, then
//! normalized to carry a unit in its own error coordinate.
//!
//! Broadcast, dispersion and generic MDS codes come from network transforms:
//! attach helper sinks (broadcast), super-sinks per node collection
//! (dispersion), or split every channel and target the split-node
//! collections (generic), build the inner code there, and restrict its
//! kernels back to the original coordinates.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

#[cfg(debug_assertions)]
use crate::code::{restrict_kernel, Restriction};
use crate::code::{LnecCode, LocalKernels};
use crate::exec;
#[cfg(debug_assertions)]
use crate::galois::member_of_subspace_sum;
use crate::galois::{Elem, Field, FieldSpec, Matrix, RowBasis};
use crate::network::{Channel, EnumLimits, ErrorPattern, Network, PathFamily, PathOrigin};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// How kernel candidates are drawn in the choice step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Enumerate coefficient tuples in lexicographic order.
    Deterministic,
    /// Sample tuples under the seed, falling back to full enumeration so
    /// that exhaustion is still detected exactly.
    Random { seed: u64 },
}

impl Method {
    fn name(&self) -> &'static str {
        match self {
            Method::Deterministic => "deterministic",
            Method::Random { .. } => "random",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Method::Deterministic => None,
            Method::Random { seed } => Some(*seed),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstructOpts {
    pub method: Method,
    pub limits: EnumLimits,
}

impl Default for ConstructOpts {
    fn default() -> Self {
        ConstructOpts {
            method: Method::Deterministic,
            limits: EnumLimits::default(),
        }
    }
}

impl ConstructOpts {
    pub fn with_method(method: Method) -> Self {
        ConstructOpts {
            method,
            ..ConstructOpts::default()
        }
    }
}

/// A constructed code together with its reproducibility manifest.
#[derive(Clone, Debug)]
pub struct Constructed {
    pub code: LnecCode,
    pub manifest: ConstructReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructReport {
    pub kind: String,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub field: FieldSpec,
    pub rate: usize,
    /// Transform stages applied before the final multicast run, outermost
    /// first; empty for a direct multicast construction.
    pub stages: Vec<StageReport>,
    /// The field-size bound that governed the final multicast run.
    pub tight_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_warning: Option<String>,
    /// Path families of the final multicast run, one entry per (sink,
    /// pattern) pair.
    pub pairs: Vec<PairReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub transform: String,
    pub nodes: usize,
    pub channels: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub sink: String,
    pub pattern: Vec<String>,
    pub paths: Vec<PathReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub origin: String,
    pub channels: Vec<String>,
}

/// A coordinate of the extended space, including imaginary channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coord {
    Msg(usize),
    /// The imaginary error channel of a real channel.
    ErrChan(usize),
    /// A real channel (its current extended kernel).
    Chan(usize),
}

struct Pair {
    sink: usize,
    rho: ErrorPattern,
    family: PathFamily,
    /// Predecessor coordinate of each on-family channel.
    pred: BTreeMap<usize, Coord>,
    /// The dynamic cut: always `rate + |rho|` coordinates.
    cut: Vec<Coord>,
}

impl Pair {
    fn proj_width(&self, omega: usize) -> usize {
        omega + self.rho.len()
    }

    /// Projection of a coordinate's extended kernel onto the message block
    /// plus this pair's pattern coordinates.
    fn proj_coord(&self, coord: Coord, omega: usize, ext: &Matrix) -> Vec<Elem> {
        let mut v = vec![0; self.proj_width(omega)];
        match coord {
            Coord::Msg(i) => v[i] = 1,
            Coord::ErrChan(e) => {
                if let Some(p) = self.rho.position(e) {
                    v[omega + p] = 1;
                }
            }
            Coord::Chan(c) => {
                let row = ext.row(c);
                v[..omega].copy_from_slice(&row[..omega]);
                for (p, &e) in self.rho.iter().enumerate() {
                    v[omega + p] = row[omega + e];
                }
            }
        }
        v
    }

    #[cfg(debug_assertions)]
    fn full_coord(&self, coord: Coord, omega: usize, width: usize, ext: &Matrix) -> Vec<Elem> {
        match coord {
            Coord::Msg(i) => {
                let mut v = vec![0; width];
                v[i] = 1;
                v
            }
            Coord::ErrChan(e) => {
                let mut v = vec![0; width];
                v[omega + e] = 1;
                v
            }
            Coord::Chan(c) => ext.row(c).to_vec(),
        }
    }
}

struct MulticastRun {
    code: LnecCode,
    tight_bound: u64,
    warning: Option<String>,
    pairs: Vec<PairReport>,
}

/// Multicast MDS construction on `net` over `spec`.
pub fn multicast_mds(net: &Network, spec: &FieldSpec, opts: &ConstructOpts) -> Result<Constructed> {
    let run = run_multicast(net, spec, opts)?;
    Ok(Constructed {
        code: run.code,
        manifest: ConstructReport {
            kind: "multicast".into(),
            method: opts.method.name().into(),
            seed: opts.method.seed(),
            field: spec.clone(),
            rate: net.rate(),
            stages: Vec::new(),
            tight_bound: run.tight_bound,
            field_warning: run.warning,
            pairs: run.pairs,
        },
    })
}

/// Broadcast MDS construction: for every node below rate, attach a helper
/// sink fed by that node and topped up straight from the source, run the
/// multicast construction there, and restrict the kernels back.
pub fn broadcast_mds(net: &Network, spec: &FieldSpec, opts: &ConstructOpts) -> Result<Constructed> {
    let (aug, _) = broadcast_transform(net)?;
    let inner = run_multicast(&aug, spec, &cascade_opts(opts))?;
    let code = restrict_code(net, &inner.code)?;
    Ok(Constructed {
        code,
        manifest: ConstructReport {
            kind: "broadcast".into(),
            method: opts.method.name().into(),
            seed: opts.method.seed(),
            field: spec.clone(),
            rate: net.rate(),
            stages: vec![stage("helper-sinks", &aug)],
            tight_bound: inner.tight_bound,
            field_warning: inner.warning,
            pairs: inner.pairs,
        },
    })
}

/// Dispersion MDS construction: one super-sink per node collection (all
/// nonempty collections of non-source nodes by default), then the broadcast
/// construction on the augmented network, restricted back.
pub fn dispersion_mds(
    net: &Network,
    spec: &FieldSpec,
    collections: Option<&[Vec<String>]>,
    opts: &ConstructOpts,
) -> Result<Constructed> {
    let cols = resolve_collections(net, collections)?;
    let (aug, _) = dispersion_transform(net, &cols)?;
    let (aug2, _) = broadcast_transform(&aug)?;
    let inner = run_multicast(&aug2, spec, &cascade_opts(opts))?;
    let code = restrict_code(net, &inner.code)?;
    Ok(Constructed {
        code,
        manifest: ConstructReport {
            kind: "dispersion".into(),
            method: opts.method.name().into(),
            seed: opts.method.seed(),
            field: spec.clone(),
            rate: net.rate(),
            stages: vec![stage("super-sinks", &aug), stage("helper-sinks", &aug2)],
            tight_bound: inner.tight_bound,
            field_warning: inner.warning,
            pairs: inner.pairs,
        },
    })
}

/// Generic MDS construction: split every channel by a middle node, build a
/// dispersion MDS code on the split network against exactly the collections
/// of split nodes that mirror channel sets, and pull the kernels back
/// through the splits.
pub fn generic_mds(net: &Network, spec: &FieldSpec, opts: &ConstructOpts) -> Result<Constructed> {
    if net.n_channels() > 12 {
        return Err(Error::SizeGuard(format!(
            "the generic construction targets all 2^n - 1 channel subsets; \
             supported up to 12 channels, got {}",
            net.n_channels()
        )));
    }
    let (split, names) = split_transform(net)?;
    // Collections of split nodes, one per nonempty channel subset.
    let n = net.n_channels();
    let mut family: Vec<Vec<String>> = Vec::with_capacity((1 << n) - 1);
    for size in 1..=n {
        let count = exec::binomial(n as u64, size as u64).unwrap() as u64;
        for r in 0..count {
            let combo = exec::unrank_combination(n, size, r);
            family.push(
                combo
                    .iter()
                    .map(|&e| split_node_id(&split, &names[e].0))
                    .collect(),
            );
        }
    }
    let cols = resolve_collections(&split, Some(&family))?;
    let (aug, _) = dispersion_transform(&split, &cols)?;
    let (aug2, _) = broadcast_transform(&aug)?;
    let inner = run_multicast(&aug2, spec, &cascade_opts(opts))?;
    let code = extract_generic(net, &inner.code, &names)?;
    Ok(Constructed {
        code,
        manifest: ConstructReport {
            kind: "generic".into(),
            method: opts.method.name().into(),
            seed: opts.method.seed(),
            field: spec.clone(),
            rate: net.rate(),
            stages: vec![
                stage("channel-split", &split),
                stage("super-sinks", &aug),
                stage("helper-sinks", &aug2),
            ],
            tight_bound: inner.tight_bound,
            field_warning: inner.warning,
            pairs: inner.pairs,
        },
    })
}

/// Draws every local coefficient uniformly; deterministic under the seed.
pub fn random_code(net: &Network, spec: &FieldSpec, seed: u64) -> Result<LnecCode> {
    let field = Field::new(spec)?;
    let mut rng = SplitMix64::new(seed);
    let mut kernels = LocalKernels::zero(net);
    for node in 0..net.n_nodes() {
        let rows = if node == net.source() {
            net.rate()
        } else {
            net.ins(node).len()
        };
        for r in 0..rows {
            for c in 0..net.outs(node).len() {
                kernels.set_entry(node, r, c, rng.next_below(field.order()) as Elem);
            }
        }
    }
    LnecCode::new(net.clone(), field, kernels)
}

fn stage(name: &str, net: &Network) -> StageReport {
    StageReport {
        transform: name.into(),
        nodes: net.n_nodes(),
        channels: net.n_channels(),
    }
}

/// Inner cascade runs lift the per-call size guard but keep the scan budget.
fn cascade_opts(opts: &ConstructOpts) -> ConstructOpts {
    ConstructOpts {
        method: opts.method,
        limits: EnumLimits::budget(opts.limits.max_patterns),
    }
}

fn origin_name(net: &Network, origin: PathOrigin) -> String {
    match origin {
        PathOrigin::Message(i) => format!("d{}'", i + 1),
        PathOrigin::Error(e) => format!("{}'", net.channel_id(e)),
    }
}

fn run_multicast(net: &Network, spec: &FieldSpec, opts: &ConstructOpts) -> Result<MulticastRun> {
    let field = Field::new(spec)?;
    let omega = net.rate();
    let width = omega + net.n_channels();

    let mut sinks = Vec::new();
    for t in 0..net.n_nodes() {
        if t == net.source() {
            continue;
        }
        let c_t = net.min_cut_node(t)?;
        if c_t >= omega {
            sinks.push((t, c_t - omega));
        }
    }
    if sinks.is_empty() {
        return Err(Error::NoEligibleSink);
    }

    let mut pairs: Vec<Pair> = Vec::new();
    for &(t, delta) in &sinks {
        for rho in net.full_rank_patterns(t, delta, &opts.limits)? {
            let family = net.disjoint_path_family(t, &rho)?;
            let mut pred = BTreeMap::new();
            for path in &family.paths {
                let mut prev = match path.origin {
                    PathOrigin::Message(i) => Coord::Msg(i),
                    PathOrigin::Error(e) => Coord::ErrChan(e),
                };
                for &c in &path.channels {
                    pred.insert(c, prev);
                    prev = Coord::Chan(c);
                }
            }
            let cut: Vec<Coord> = (0..omega)
                .map(Coord::Msg)
                .chain(rho.iter().map(|&e| Coord::ErrChan(e)))
                .collect();
            pairs.push(Pair {
                sink: t,
                rho,
                family,
                pred,
                cut,
            });
        }
    }

    let tight_bound = pairs.len() as u64;
    let warning = if field.order() <= tight_bound {
        Some(format!(
            "field order {} does not exceed the sufficiency bound {}; attempting anyway",
            field.order(),
            tight_bound
        ))
    } else {
        None
    };

    let mut active_at: Vec<Vec<usize>> = vec![Vec::new(); net.n_channels()];
    for (i, p) in pairs.iter().enumerate() {
        for &c in p.pred.keys() {
            active_at[c].push(i);
        }
    }

    let mut rng = opts.method.seed().map(SplitMix64::new);
    let mut ext = Matrix::zero(net.n_channels(), width);
    let mut kernels = LocalKernels::zero(net);

    for e in 0..net.n_channels() {
        let tail = net.tail(e);
        let active = &active_at[e];
        if active.is_empty() {
            ext.set(e, omega + e, 1);
            continue;
        }

        // Base vectors spanning the candidate space: the tail's in-kernels
        // (message indicators at the source) plus this channel's own error
        // indicator.
        let at_source = tail == net.source();
        let in_count = if at_source {
            omega
        } else {
            net.ins(tail).len()
        };
        let base_at = |j: usize, coord: usize| -> Elem {
            if j < in_count {
                if at_source {
                    (coord == j) as Elem
                } else {
                    ext.get(net.ins(tail)[j], coord)
                }
            } else {
                (coord == omega + e) as Elem
            }
        };
        let digits = in_count + 1;

        // Per active pair: the projected bad subspace (the cut minus this
        // channel's predecessor) and the projected base vectors, so each
        // candidate is tested in `rate + delta` dimensions.
        let mut testers = Vec::with_capacity(active.len());
        for &pi in active {
            let pair = &pairs[pi];
            let pw = pair.proj_width(omega);
            let pred = pair.pred[&e];
            debug_assert!(pair.cut.contains(&pred), "predecessor must sit in the cut");
            let mut basis = RowBasis::new(pw);
            for &c in pair.cut.iter().filter(|&&c| c != pred) {
                basis.insert(&pair.proj_coord(c, omega, &ext), &field);
            }
            let proj_base: Vec<Vec<Elem>> = (0..digits)
                .map(|j| {
                    let mut v = vec![0; pw];
                    for (i, cell) in v.iter_mut().enumerate().take(omega) {
                        *cell = base_at(j, i);
                    }
                    for (p, &re) in pair.rho.iter().enumerate() {
                        v[omega + p] = base_at(j, omega + re);
                    }
                    v
                })
                .collect();
            testers.push((pi, basis, proj_base));
        }

        // Returns the first rejecting pair, if any.
        let admissible = |coeffs: &[Elem]| -> Option<usize> {
            for (pi, basis, proj_base) in &testers {
                let pw = proj_base[0].len();
                let mut v = vec![0; pw];
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0 {
                        for (i, cell) in v.iter_mut().enumerate() {
                            *cell = field.add(*cell, field.mul(c, proj_base[j][i]));
                        }
                    }
                }
                let inside = basis.contains(&v, &field);
                #[cfg(debug_assertions)]
                {
                    let mut full = vec![0; width];
                    for (j, &c) in coeffs.iter().enumerate() {
                        if c != 0 {
                            for (i, cell) in full.iter_mut().enumerate() {
                                *cell = field.add(*cell, field.mul(c, base_at(j, i)));
                            }
                        }
                    }
                    debug_assert_eq!(
                        inside,
                        bad_subspace_member(&full, &pairs[*pi], e, omega, width, &ext, net, &field),
                        "projected test must agree with the subspace-sum membership"
                    );
                }
                if inside {
                    return Some(*pi);
                }
            }
            None
        };

        let mut chosen: Option<Vec<Elem>> = None;
        let mut rejections: BTreeMap<usize, u64> = BTreeMap::new();
        let q = field.order();

        if let Some(rng) = rng.as_mut() {
            let attempts = 4 * q.max(16);
            for _ in 0..attempts {
                let coeffs: Vec<Elem> = (0..digits).map(|_| rng.next_below(q) as Elem).collect();
                if coeffs.iter().all(|&c| c == 0) {
                    continue;
                }
                match admissible(&coeffs) {
                    None => {
                        chosen = Some(coeffs);
                        break;
                    }
                    Some(pi) => *rejections.entry(pi).or_default() += 1,
                }
            }
        }
        if chosen.is_none() {
            // Lexicographic sweep; also the exhaustion detector.
            let mut coeffs = vec![0 as Elem; digits];
            'sweep: loop {
                // Advance the odometer (last digit fastest).
                let mut pos = digits;
                loop {
                    if pos == 0 {
                        break 'sweep;
                    }
                    pos -= 1;
                    if (coeffs[pos] as u64) + 1 < q {
                        coeffs[pos] += 1;
                        for d in coeffs.iter_mut().skip(pos + 1) {
                            *d = 0;
                        }
                        break;
                    }
                    coeffs[pos] = 0;
                }
                match admissible(&coeffs) {
                    None => {
                        chosen = Some(coeffs);
                        break 'sweep;
                    }
                    Some(pi) => *rejections.entry(pi).or_default() += 1,
                }
            }
        }

        let Some(coeffs) = chosen else {
            let blocker = rejections
                .iter()
                .max_by_key(|(_, &n)| n)
                .map(|(&pi, _)| pi)
                .expect("at least one pair rejected every candidate");
            let pair = &pairs[blocker];
            return Err(Error::FieldTooSmall {
                order: field.order(),
                sink: net.node_id(pair.sink).to_string(),
                pattern: pair.rho.ids(net).iter().map(|s| s.to_string()).collect(),
                channel: net.channel_id(e).to_string(),
            });
        };

        // Normalize so the kernel carries 1 in its own error coordinate. The
        // candidate's own-coordinate value is exactly the error-indicator
        // coefficient, so scaling keeps the recursion's unit term intact.
        let own = coeffs[digits - 1];
        let scale = if own == 0 { 1 } else { field.inv(own)? };
        let mut row = vec![0 as Elem; width];
        for (j, &c) in coeffs.iter().enumerate() {
            let k = field.mul(scale, c);
            if k != 0 {
                for (i, cell) in row.iter_mut().enumerate() {
                    *cell = field.add(*cell, field.mul(k, base_at(j, i)));
                }
            }
        }
        if own == 0 {
            row[omega + e] = field.add(row[omega + e], 1);
        }
        debug_assert_eq!(
            row[omega + e],
            1,
            "own error coordinate must normalize to 1"
        );
        let col = net
            .outs(tail)
            .iter()
            .position(|&x| x == e)
            .expect("e leaves its tail");
        for (j, &c) in coeffs.iter().enumerate().take(in_count) {
            kernels.set_entry(tail, j, col, field.mul(scale, c));
        }
        for (i, &v) in row.iter().enumerate() {
            ext.set(e, i, v);
        }

        // Walk every touched cut one step down its path.
        for &pi in active {
            let pred = pairs[pi].pred[&e];
            let slot = pairs[pi]
                .cut
                .iter()
                .position(|&c| c == pred)
                .expect("predecessor present in the cut");
            pairs[pi].cut[slot] = Coord::Chan(e);
        }

        #[cfg(debug_assertions)]
        for pair in &pairs {
            let mut b = RowBasis::new(pair.proj_width(omega));
            for &c in &pair.cut {
                b.insert(&pair.proj_coord(c, omega, &ext), &field);
            }
            debug_assert_eq!(
                b.rank(),
                pair.proj_width(omega),
                "cut projections must stay linearly independent"
            );
        }
    }

    let pair_reports = pairs
        .iter()
        .map(|p| PairReport {
            sink: net.node_id(p.sink).to_string(),
            pattern: p.rho.ids(net).iter().map(|s| s.to_string()).collect(),
            paths: p
                .family
                .paths
                .iter()
                .map(|path| PathReport {
                    origin: origin_name(net, path.origin),
                    channels: path
                        .channels
                        .iter()
                        .map(|&c| net.channel_id(c).to_string())
                        .collect(),
                })
                .collect(),
        })
        .collect();

    let code = LnecCode::new(net.clone(), field, kernels)?;
    debug_assert_eq!(
        code.extended_kernels(),
        &ext,
        "recursion must reproduce the kernels chosen by the construction"
    );
    Ok(MulticastRun {
        code,
        tight_bound,
        warning,
        pairs: pair_reports,
    })
}

/// The subspace-sum form of the choice test: membership of the candidate
/// in the keep-restricted cut span plus the complement-restricted local
/// span, evaluated on full-length vectors.
#[cfg(debug_assertions)]
#[allow(clippy::too_many_arguments)]
fn bad_subspace_member(
    candidate: &[Elem],
    pair: &Pair,
    e: usize,
    omega: usize,
    width: usize,
    ext: &Matrix,
    net: &Network,
    field: &Field,
) -> bool {
    let pred = pair.pred[&e];
    let keep_rows: Vec<Vec<Elem>> = pair
        .cut
        .iter()
        .filter(|&&c| c != pred)
        .map(|&c| {
            restrict_kernel(
                &pair.full_coord(c, omega, width, ext),
                omega,
                &pair.rho,
                Restriction::Keep,
            )
        })
        .collect();
    let tail = net.tail(e);
    let mut local: Vec<Vec<Elem>> = Vec::new();
    if tail == net.source() {
        for i in 0..omega {
            let mut v = vec![0; width];
            v[i] = 1;
            local.push(v);
        }
    } else {
        for &d in net.ins(tail) {
            local.push(ext.row(d).to_vec());
        }
    }
    let mut own = vec![0; width];
    own[omega + e] = 1;
    local.push(own);
    let comp_rows: Vec<Vec<Elem>> = local
        .into_iter()
        .map(|v| restrict_kernel(&v, omega, &pair.rho, Restriction::Complement))
        .collect();
    let u = if keep_rows.is_empty() {
        Matrix::zero(0, width)
    } else {
        Matrix::from_rows(keep_rows).expect("keep rows share the width")
    };
    let w = Matrix::from_rows(comp_rows).expect("complement rows share the width");
    member_of_subspace_sum(candidate, &u, &w, field).expect("widths agree")
}

fn fresh_id(used: &mut BTreeSet<String>, base: String) -> String {
    let mut id = base;
    while !used.insert(id.clone()) {
        id.push('~');
    }
    id
}

fn node_ids_set(net: &Network) -> BTreeSet<String> {
    (0..net.n_nodes())
        .map(|i| net.node_id(i).to_string())
        .collect()
}

fn channel_ids_set(net: &Network) -> BTreeSet<String> {
    (0..net.n_channels())
        .map(|e| net.channel_id(e).to_string())
        .collect()
}

fn channel_list(net: &Network) -> Vec<Channel> {
    (0..net.n_channels())
        .map(|e| Channel {
            id: net.channel_id(e).to_string(),
            tail: net.node_id(net.tail(e)).to_string(),
            head: net.node_id(net.head(e)).to_string(),
        })
        .collect()
}

/// Helper-sink transform: every non-source node `t` with min-cut below the
/// rate gets a new sink fed by `C_t` channels from `t` and `rate - C_t`
/// channels straight from the source.
pub fn broadcast_transform(net: &Network) -> Result<(Network, usize)> {
    let omega = net.rate();
    let mut nodes: Vec<String> = (0..net.n_nodes())
        .map(|i| net.node_id(i).to_string())
        .collect();
    let mut channels = channel_list(net);
    let mut used_nodes = node_ids_set(net);
    let mut used_chans = channel_ids_set(net);
    let mut v2 = 0;
    for t in 0..net.n_nodes() {
        if t == net.source() {
            continue;
        }
        let c_t = net.min_cut_node(t)?;
        if c_t >= omega {
            continue;
        }
        v2 += 1;
        let tid = net.node_id(t);
        let helper = fresh_id(&mut used_nodes, format!("{tid}_b"));
        for k in 0..c_t {
            channels.push(Channel {
                id: fresh_id(&mut used_chans, format!("{helper}.{k}")),
                tail: tid.to_string(),
                head: helper.clone(),
            });
        }
        for k in 0..omega - c_t {
            channels.push(Channel {
                id: fresh_id(&mut used_chans, format!("{helper}.s{k}")),
                tail: net.node_id(net.source()).to_string(),
                head: helper.clone(),
            });
        }
        nodes.push(helper);
    }
    let aug = Network::new(nodes, channels, net.node_id(net.source()), omega)?;
    Ok((aug, v2))
}

/// Super-sink transform: one new node per collection, fed by `C_t` channels
/// from each member (cuts measured in the original network).
pub fn dispersion_transform(
    net: &Network,
    collections: &[Vec<usize>],
) -> Result<(Network, Vec<String>)> {
    let mut nodes: Vec<String> = (0..net.n_nodes())
        .map(|i| net.node_id(i).to_string())
        .collect();
    let mut channels = channel_list(net);
    let mut used_nodes = node_ids_set(net);
    let mut used_chans = channel_ids_set(net);
    let cuts: Vec<usize> = (0..net.n_nodes())
        .map(|t| {
            if t == net.source() {
                0
            } else {
                net.min_cut_node(t).unwrap_or(0)
            }
        })
        .collect();
    let mut supers = Vec::with_capacity(collections.len());
    for coll in collections {
        let label = coll
            .iter()
            .map(|&t| net.node_id(t))
            .collect::<Vec<_>>()
            .join("+");
        let super_id = fresh_id(&mut used_nodes, format!("T[{label}]"));
        for &t in coll {
            for k in 0..cuts[t] {
                channels.push(Channel {
                    id: fresh_id(
                        &mut used_chans,
                        format!("{super_id}.{}.{k}", net.node_id(t)),
                    ),
                    tail: net.node_id(t).to_string(),
                    head: super_id.clone(),
                });
            }
        }
        supers.push(super_id.clone());
        nodes.push(super_id);
    }
    let aug = Network::new(nodes, channels, net.node_id(net.source()), net.rate())?;
    Ok((aug, supers))
}

/// Channel-split transform: every channel gains a middle node; returns the
/// split network and, per original channel (canonical order), the ids of
/// its two halves.
pub fn split_transform(net: &Network) -> Result<(Network, Vec<(String, String)>)> {
    let mut nodes: Vec<String> = (0..net.n_nodes())
        .map(|i| net.node_id(i).to_string())
        .collect();
    let mut used_nodes = node_ids_set(net);
    let mut used_chans = BTreeSet::new();
    let mut channels = Vec::with_capacity(2 * net.n_channels());
    let mut names = Vec::with_capacity(net.n_channels());
    for e in 0..net.n_channels() {
        let eid = net.channel_id(e);
        let mid = fresh_id(&mut used_nodes, format!("n_{eid}"));
        let first = fresh_id(&mut used_chans, format!("{eid}_1"));
        let second = fresh_id(&mut used_chans, format!("{eid}_2"));
        channels.push(Channel {
            id: first.clone(),
            tail: net.node_id(net.tail(e)).to_string(),
            head: mid.clone(),
        });
        channels.push(Channel {
            id: second.clone(),
            tail: mid.clone(),
            head: net.node_id(net.head(e)).to_string(),
        });
        nodes.push(mid);
        names.push((first, second));
    }
    let aug = Network::new(nodes, channels, net.node_id(net.source()), net.rate())?;
    Ok((aug, names))
}

fn split_node_id(split: &Network, first_half: &str) -> String {
    let e = split
        .channel_index(first_half)
        .expect("half channel exists");
    split.node_id(split.head(e)).to_string()
}

fn resolve_collections(
    net: &Network,
    collections: Option<&[Vec<String>]>,
) -> Result<Vec<Vec<usize>>> {
    match collections {
        Some(family) => {
            let mut out = Vec::with_capacity(family.len());
            for coll in family {
                if coll.is_empty() {
                    return Err(Error::InvalidTarget("empty collection in family".into()));
                }
                let mut set = BTreeSet::new();
                for id in coll {
                    let t = net.node_index(id)?;
                    if t == net.source() {
                        return Err(Error::InvalidTarget(
                            "collections cannot contain the source".into(),
                        ));
                    }
                    set.insert(t);
                }
                out.push(set.into_iter().collect());
            }
            Ok(out)
        }
        None => {
            if net.n_nodes() > 10 {
                return Err(Error::SizeGuard(format!(
                    "the default dispersion family enumerates all 2^{} - 1 node collections; \
                     supported up to 10 nodes, got {} (pass an explicit collection family)",
                    net.n_nodes() - 1,
                    net.n_nodes()
                )));
            }
            Ok(all_collections(net))
        }
    }
}

/// All nonempty collections of non-source nodes, by ascending size then
/// node-index order.
pub fn all_collections(net: &Network) -> Vec<Vec<usize>> {
    let members: Vec<usize> = (0..net.n_nodes()).filter(|&t| t != net.source()).collect();
    let n = members.len();
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for size in 1..=n {
        let count = exec::binomial(n as u64, size as u64).unwrap() as u64;
        for r in 0..count {
            out.push(
                exec::unrank_combination(n, size, r)
                    .into_iter()
                    .map(|i| members[i])
                    .collect(),
            );
        }
    }
    out
}

/// Restricts a code on an augmented network back to the original: kernels
/// of original nodes keep exactly the rows/columns of original channels.
pub fn restrict_code(net: &Network, augmented: &LnecCode) -> Result<LnecCode> {
    let aug_net = augmented.network();
    let mut kernels = LocalKernels::zero(net);
    for i in 0..net.n_nodes() {
        let j = aug_net.node_index(net.node_id(i))?;
        let rows = if i == net.source() {
            net.rate()
        } else {
            net.ins(i).len()
        };
        if i != net.source() {
            let mine: Vec<&str> = net.ins(i).iter().map(|&d| net.channel_id(d)).collect();
            let theirs: Vec<&str> = aug_net
                .ins(j)
                .iter()
                .map(|&d| aug_net.channel_id(d))
                .collect();
            if mine != theirs {
                return Err(Error::Internal(format!(
                    "transform changed the in-set of node {:?}",
                    net.node_id(i)
                )));
            }
        }
        for (col, &e) in net.outs(i).iter().enumerate() {
            let aug_col = aug_net
                .outs(j)
                .iter()
                .position(|&x| aug_net.channel_id(x) == net.channel_id(e))
                .ok_or_else(|| {
                    Error::Internal(format!(
                        "channel {:?} missing from the augmented network",
                        net.channel_id(e)
                    ))
                })?;
            for r in 0..rows {
                kernels.set_entry(i, r, col, augmented.kernels().node(j).get(r, aug_col));
            }
        }
    }
    let code = LnecCode::new(net.clone(), augmented.field().clone(), kernels)?;
    debug_assert!(
        restriction_matches(net, &code, augmented),
        "restricted kernels must equal the augmented kernels on original coordinates"
    );
    Ok(code)
}

/// Checks that each original channel's extended kernel equals the augmented
/// one restricted to original coordinates.
pub fn restriction_matches(net: &Network, code: &LnecCode, augmented: &LnecCode) -> bool {
    let aug_net = augmented.network();
    let omega = net.rate();
    for e in 0..net.n_channels() {
        let Ok(ae) = aug_net.channel_index(net.channel_id(e)) else {
            return false;
        };
        let full = augmented.extended_kernel(ae);
        let mine = code.extended_kernel(e);
        if mine[..omega] != full[..omega] {
            return false;
        }
        for d in 0..net.n_channels() {
            let Ok(ad) = aug_net.channel_index(net.channel_id(d)) else {
                return false;
            };
            if mine[omega + d] != full[omega + ad] {
                return false;
            }
        }
    }
    true
}

/// Pulls a split-network code back through the channel splits: the original
/// coefficient for an adjacent pair is the product of the two split-side
/// coefficients along the middle node.
fn extract_generic(
    net: &Network,
    split_code: &LnecCode,
    names: &[(String, String)],
) -> Result<LnecCode> {
    let split_net = split_code.network();
    let field = split_code.field().clone();
    let mut kernels = LocalKernels::zero(net);
    for e in 0..net.n_channels() {
        let tail = net.tail(e);
        let e1 = split_net.channel_index(&names[e].0)?;
        let col = net
            .outs(tail)
            .iter()
            .position(|&x| x == e)
            .expect("e leaves its tail");
        if tail == net.source() {
            for i in 0..net.rate() {
                kernels.set_entry(
                    tail,
                    i,
                    col,
                    split_code.kernels().source_coeff(split_net, i, e1),
                );
            }
        } else {
            for (r, &d) in net.ins(tail).iter().enumerate() {
                let d1 = split_net.channel_index(&names[d].0)?;
                let d2 = split_net.channel_index(&names[d].1)?;
                let through = split_code.kernels().coeff(split_net, d1, d2);
                let onward = split_code.kernels().coeff(split_net, d2, e1);
                kernels.set_entry(tail, r, col, field.mul(through, onward));
            }
        }
    }
    let code = LnecCode::new(net.clone(), field, kernels)?;
    debug_assert!(
        generic_extraction_matches(net, &code, split_code, names),
        "extracted kernels must equal the split kernels on first-half coordinates"
    );
    Ok(code)
}

/// Checks the split-network identity behind the generic extraction: each
/// original kernel equals the first-half kernel restricted to message plus
/// first-half coordinates.
pub fn generic_extraction_matches(
    net: &Network,
    code: &LnecCode,
    split_code: &LnecCode,
    names: &[(String, String)],
) -> bool {
    let split_net = split_code.network();
    let omega = net.rate();
    for e in 0..net.n_channels() {
        let Ok(e1) = split_net.channel_index(&names[e].0) else {
            return false;
        };
        let full = split_code.extended_kernel(e1);
        let mine = code.extended_kernel(e);
        if mine[..omega] != full[..omega] {
            return false;
        }
        for d in 0..net.n_channels() {
            let Ok(d1) = split_net.channel_index(&names[d].0) else {
                return false;
            };
            if mine[omega + d] != full[omega + d1] {
                return false;
            }
        }
    }
    true
}

/// Field-size sufficiency bounds per construction kind: the pattern-count
/// form where enumeration is feasible, and the binomial fallback.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSizeReport {
    pub rate: usize,
    pub multicast: KindBounds,
    pub broadcast: KindBounds,
    pub dispersion: KindBounds,
    pub generic: KindBounds,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct KindBounds {
    /// Pattern-count bound; `None` when an enumeration guard tripped.
    pub tight: Option<u128>,
    /// Binomial bound; `None` when it overflows or its enumeration tripped.
    pub loose: Option<u128>,
    /// Smallest supported field order exceeding each bound.
    pub tight_min_field: Option<u64>,
    pub loose_min_field: Option<u64>,
    /// True when a guard forced a fallback.
    pub guarded: bool,
    /// Per-target pattern-count terms of the tight bound, when computed.
    pub terms: Vec<BoundTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundTerm {
    pub target: String,
    pub delta: usize,
    pub patterns: u64,
}

fn supported_order(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_power_of_two() {
        return q.trailing_zeros() <= 16;
    }
    if q >= (1 << 16) {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn min_supported_field(bound: u128) -> Option<u64> {
    if bound >= (1 << 16) {
        return None;
    }
    ((bound as u64 + 1)..=(1 << 16)).find(|&q| supported_order(q))
}

fn finish(mut kb: KindBounds) -> KindBounds {
    kb.tight_min_field = kb.tight.and_then(min_supported_field);
    kb.loose_min_field = kb.loose.and_then(min_supported_field);
    kb
}

/// Tight + loose multicast terms on a network; also the broadcast base.
fn multicast_bounds(net: &Network, limits: &EnumLimits) -> Result<KindBounds> {
    let omega = net.rate();
    let mut kb = KindBounds::default();
    let mut tight: Option<u128> = Some(0);
    let mut loose: Option<u128> = Some(0);
    for t in 0..net.n_nodes() {
        if t == net.source() {
            continue;
        }
        let c_t = net.min_cut_node(t)?;
        if c_t < omega {
            continue;
        }
        let delta = c_t - omega;
        loose = loose
            .zip(exec::binomial(net.n_channels() as u64, delta as u64))
            .and_then(|(l, b)| l.checked_add(b));
        match net.full_rank_patterns(t, delta, limits) {
            Ok(pats) => {
                kb.terms.push(BoundTerm {
                    target: net.node_id(t).to_string(),
                    delta,
                    patterns: pats.len() as u64,
                });
                tight = tight.map(|x| x + pats.len() as u128);
            }
            Err(Error::SizeGuard(_)) => {
                kb.guarded = true;
                tight = None;
            }
            Err(e) => return Err(e),
        }
    }
    kb.tight = tight;
    kb.loose = loose;
    Ok(kb)
}

/// Field-size bounds for all four construction kinds at the network's rate.
pub fn field_size_bounds(net: &Network, limits: &EnumLimits) -> Result<FieldSizeReport> {
    let omega = net.rate();
    let multicast = finish(multicast_bounds(net, limits)?);

    // Broadcast adds one unit per node below rate.
    let v2 = (0..net.n_nodes())
        .filter(|&t| t != net.source())
        .filter(|&t| net.min_cut_node(t).unwrap_or(0) < omega)
        .count() as u128;
    let broadcast = finish(KindBounds {
        tight: multicast.tight.map(|t| t + v2),
        loose: multicast.loose.and_then(|l| l.checked_add(v2)),
        guarded: multicast.guarded,
        terms: multicast.terms.clone(),
        ..KindBounds::default()
    });

    // Dispersion: computed on the super-sink network over all collections.
    // The transformed network easily exceeds the raw size guard, so its
    // enumerations are bounded by the scan budget instead.
    let inner_limits = EnumLimits::budget(limits.max_patterns);
    let dispersion = if net.n_nodes() > 10 {
        KindBounds {
            guarded: true,
            ..KindBounds::default()
        }
    } else {
        let cols = all_collections(net);
        let (aug, supers) = dispersion_transform(net, &cols)?;
        let mut kb = KindBounds::default();
        let mut tight: Option<u128> = Some(0);
        let mut loose: Option<u128> = Some(0);
        let mut v3: u128 = 0;
        let width = aug.n_channels() as u64;
        for super_id in &supers {
            let t = aug.node_index(super_id)?;
            let c = aug.min_cut_node(t)?;
            if c < omega {
                v3 += 1;
                continue;
            }
            let delta = c - omega;
            loose = loose
                .zip(exec::binomial(width, delta as u64))
                .and_then(|(l, b)| l.checked_add(b));
            match aug.full_rank_patterns(t, delta, &inner_limits) {
                Ok(pats) => {
                    kb.terms.push(BoundTerm {
                        target: super_id.clone(),
                        delta,
                        patterns: pats.len() as u64,
                    });
                    tight = tight.map(|x| x + pats.len() as u128);
                }
                Err(Error::SizeGuard(_)) => {
                    kb.guarded = true;
                    tight = None;
                }
                Err(e) => return Err(e),
            }
        }
        kb.tight = tight.map(|t| t + v3);
        kb.loose = loose.and_then(|l| l.checked_add(v3));
        finish(kb)
    };

    // Generic: binomial-only bound on the split network over all of its
    // node collections; enumerating those collections is itself guarded.
    let (split, _) = split_transform(net)?;
    let generic = if split.n_nodes() > 17 {
        KindBounds {
            guarded: true,
            ..KindBounds::default()
        }
    } else {
        let mut kb = KindBounds::default();
        let cols = all_collections(&split);
        let sum_cuts: u128 = cols
            .iter()
            .flat_map(|c| c.iter())
            .map(|&t| split.min_cut_node(t).unwrap_or(0) as u128)
            .sum();
        let width = (2 * net.n_channels()) as u128 + sum_cuts;
        let mut loose: Option<u128> = Some(0);
        let mut below: u128 = 0;
        for coll in &cols {
            let c = split.min_cut_nodes(coll)?;
            if c < omega {
                below += 1;
                continue;
            }
            let delta = (c - omega) as u64;
            loose = loose
                .zip(
                    u64::try_from(width)
                        .ok()
                        .and_then(|w| exec::binomial(w, delta)),
                )
                .and_then(|(l, b)| l.checked_add(b));
        }
        kb.loose = loose.and_then(|l| l.checked_add(below));
        finish(kb)
    };

    Ok(FieldSizeReport {
        rate: omega,
        multicast,
        broadcast,
        dispersion,
        generic,
    })
}
