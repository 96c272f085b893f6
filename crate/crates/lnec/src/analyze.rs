//! Exact verification: regularity classification, brute-force minimum
//! distances (computed three ways and reported side by side), Singleton
//! bound slack, and MDS certification for each of the four code classes.
//!
//! This module is the oracle side of the crate: everything is exhaustive
//! within explicit size guards, and nothing here trusts the construction.

use serde::Serialize;

use crate::code::LnecCode;
use crate::exec;
use crate::galois::RowBasis;
use crate::network::{ErrorPattern, Target, TargetRef};
use crate::{Error, Result};

/// Guards and optional explicit target families for the exhaustive checks.
#[derive(Clone, Debug)]
pub struct AnalyzeOpts {
    /// Cap on the distance search weight; mandatory when the network has
    /// more than `max_channels_for_distance` channels.
    pub max_weight: Option<usize>,
    /// Explicit node collections for the dispersion-level checks; default
    /// is every nonempty collection, guarded by node count.
    pub collections: Option<Vec<Vec<String>>>,
    /// Explicit channel sets for the generic-level checks; default is every
    /// nonempty subset, guarded by channel count.
    pub channel_sets: Option<Vec<Vec<String>>>,
    pub max_nodes_for_collections: usize,
    pub max_channels_for_sets: usize,
    pub max_channels_for_distance: usize,
}

impl Default for AnalyzeOpts {
    fn default() -> Self {
        AnalyzeOpts {
            max_weight: None,
            collections: None,
            channel_sets: None,
            max_nodes_for_collections: 10,
            max_channels_for_sets: 12,
            max_channels_for_distance: 20,
        }
    }
}

/// The four regularity levels. The higher flags are `None` when their
/// exhaustive family was guarded away.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityClass {
    pub regular: bool,
    pub strongly_regular: bool,
    pub strongly_sup_regular: Option<bool>,
    pub channel_regular: Option<bool>,
    /// Per-node evidence: min-cut and message-space dimension.
    pub node_dims: Vec<NodeDim>,
    /// First failing collection / channel set, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collection_failure: Option<TargetDim>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_set_failure: Option<TargetDim>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeDim {
    pub node: String,
    pub cut: usize,
    pub dim_phi: usize,
    pub required: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetDim {
    pub target: Target,
    pub cut: usize,
    pub dim_phi: usize,
    pub required: usize,
}

impl RegularityClass {
    pub fn flag(&self, kind: MdsKind) -> Option<bool> {
        match kind {
            MdsKind::Multicast => Some(self.regular),
            MdsKind::Broadcast => Some(self.strongly_regular),
            MdsKind::Dispersion => self.strongly_sup_regular,
            MdsKind::Generic => self.channel_regular,
        }
    }
}

fn dim_phi(code: &LnecCode, target: &TargetRef) -> Result<usize> {
    Ok(code
        .decoding_view(target)?
        .message_space()
        .rank(code.field()))
}

/// Classifies a code against the four regularity levels.
pub fn classify(code: &LnecCode, opts: &AnalyzeOpts) -> Result<RegularityClass> {
    let net = code.network();
    let omega = net.rate();

    let mut regular = true;
    let mut strongly_regular = true;
    let mut node_dims = Vec::new();
    for t in 0..net.n_nodes() {
        if t == net.source() {
            continue;
        }
        let cut = net.min_cut_node(t)?;
        let dim = dim_phi(code, &TargetRef::Node(t))?;
        let required = omega.min(cut);
        node_dims.push(NodeDim {
            node: net.node_id(t).to_string(),
            cut,
            dim_phi: dim,
            required,
        });
        if cut >= omega && dim != omega {
            regular = false;
        }
        if dim != required {
            strongly_regular = false;
        }
    }

    let collections = collection_family(code, opts)?;
    let mut collection_failure = None;
    let strongly_sup_regular = match collections {
        None => None,
        Some(cols) => {
            let fail = exec::find_first_map(cols.len() as u64, |i| {
                let coll = &cols[i as usize];
                let tref = TargetRef::Nodes(coll.clone());
                let cut = net.min_cut_nodes(coll).ok()?;
                let dim = dim_phi(code, &tref).ok()?;
                (dim != omega.min(cut)).then_some((tref, cut, dim))
            });
            match fail {
                None => Some(true),
                Some((tref, cut, dim)) => {
                    collection_failure = Some(TargetDim {
                        target: net.target_of(&tref),
                        cut,
                        dim_phi: dim,
                        required: omega.min(cut),
                    });
                    Some(false)
                }
            }
        }
    };

    let sets = channel_set_family(code, opts)?;
    let mut channel_set_failure = None;
    let channel_regular = match sets {
        None => None,
        Some(sets) => {
            let fail = exec::find_first_map(sets.len() as u64, |i| {
                let set = &sets[i as usize];
                let tref = TargetRef::Channels(set.clone());
                let cut = net.min_cut_channel_set(set).ok()?;
                let dim = dim_phi(code, &tref).ok()?;
                (dim != omega.min(cut)).then_some((tref, cut, dim))
            });
            match fail {
                None => Some(true),
                Some((tref, cut, dim)) => {
                    channel_set_failure = Some(TargetDim {
                        target: net.target_of(&tref),
                        cut,
                        dim_phi: dim,
                        required: omega.min(cut),
                    });
                    Some(false)
                }
            }
        }
    };

    let class = RegularityClass {
        regular,
        strongly_regular,
        strongly_sup_regular,
        channel_regular,
        node_dims,
        collection_failure,
        channel_set_failure,
    };

    // The implication chain must be monotone; a violation means the
    // classifier itself is broken, not the code under test.
    if class.channel_regular == Some(true) {
        assert_ne!(
            class.strongly_sup_regular,
            Some(false),
            "channel-regular implies sup-regular"
        );
    }
    if class.strongly_sup_regular == Some(true) {
        assert!(
            class.strongly_regular,
            "sup-regular implies strongly regular"
        );
    }
    if class.strongly_regular {
        assert!(class.regular, "strongly regular implies regular");
    }
    Ok(class)
}

fn collection_family(code: &LnecCode, opts: &AnalyzeOpts) -> Result<Option<Vec<Vec<usize>>>> {
    let net = code.network();
    if let Some(family) = &opts.collections {
        let mut out = Vec::with_capacity(family.len());
        for coll in family {
            match net.resolve_target(&Target::Nodes(coll.clone()))? {
                TargetRef::Nodes(v) => out.push(v),
                _ => unreachable!(),
            }
        }
        return Ok(Some(out));
    }
    if net.n_nodes() > opts.max_nodes_for_collections {
        return Ok(None);
    }
    Ok(Some(crate::construct::all_collections(net)))
}

fn channel_set_family(code: &LnecCode, opts: &AnalyzeOpts) -> Result<Option<Vec<Vec<usize>>>> {
    let net = code.network();
    if let Some(family) = &opts.channel_sets {
        let mut out = Vec::with_capacity(family.len());
        for set in family {
            match net.resolve_target(&Target::Channels(set.clone()))? {
                TargetRef::Channels(v) => out.push(v),
                _ => unreachable!(),
            }
        }
        return Ok(Some(out));
    }
    let n = net.n_channels();
    if n > opts.max_channels_for_sets {
        return Ok(None);
    }
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for size in 1..=n {
        let count = exec::binomial(n as u64, size as u64).unwrap() as u64;
        for r in 0..count {
            out.push(exec::unrank_combination(n, size, r));
        }
    }
    Ok(Some(out))
}

/// A minimum-distance report for one target. The three routes to the
/// distance (smallest intersecting pattern size, smallest pattern rank,
/// smallest error-space dimension) are computed independently and reported
/// side by side; [`DistanceReport::consistent`] checks their agreement.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub target: Target,
    #[serde(rename = "C")]
    pub cut: usize,
    #[serde(rename = "dimPhi")]
    pub dim_phi: usize,
    /// The distance by smallest intersecting pattern size; the value `d`.
    #[serde(rename = "d")]
    pub d_by_size: usize,
    pub d_by_rank: usize,
    pub d_by_dim: usize,
    /// The Singleton bound for this target.
    pub bound: usize,
    /// `bound - d`; nonnegative whenever the code satisfies the relevant
    /// regularity hypothesis.
    pub slack: i64,
    /// Lexicographically first pattern achieving the distance.
    pub witness: Vec<String>,
}

impl DistanceReport {
    /// True iff the three distance forms agree.
    pub fn consistent(&self) -> bool {
        self.d_by_size == self.d_by_rank && self.d_by_size == self.d_by_dim
    }
}

/// Brute-force minimum distance of a code at a target.
///
/// Ascends by pattern weight until some error space meets the message space
/// nontrivially, then scans that weight exhaustively for the rank and
/// dimension forms. Errors out when the message space is trivial (the
/// distance is undefined) or when the weight cap is exceeded.
pub fn min_distance(
    code: &LnecCode,
    target: &TargetRef,
    opts: &AnalyzeOpts,
) -> Result<DistanceReport> {
    let net = code.network();
    let n = net.n_channels();
    if n > opts.max_channels_for_distance && opts.max_weight.is_none() {
        return Err(Error::SizeGuard(format!(
            "distance scan over {n} channels needs an explicit weight cap \
             (networks above {} channels)",
            opts.max_channels_for_distance
        )));
    }
    let view = code.decoding_view(target)?;
    if view.n_cols() == 0 {
        return Err(Error::DistanceUndefined(net.describe_target(target)));
    }
    let phi = view.message_space();
    let dim = phi.rank(code.field());
    if dim == 0 {
        return Err(Error::DistanceUndefined(net.describe_target(target)));
    }
    let cut = net.min_cut(target)?;
    let omega = net.rate();

    let phi_basis = RowBasis::from_rows(phi.cols(), phi.iter_rows(), code.field());
    let intersects = |rho: &ErrorPattern| -> bool {
        // rank(delta) + rank(phi) > rank(stack), reusing the reduced phi.
        let delta = view.error_space(rho);
        let rd = delta.rank(code.field());
        let mut stack = phi_basis.clone();
        let mut rs = dim;
        for row in delta.iter_rows() {
            if stack.insert(row, code.field()) {
                rs += 1;
            }
        }
        rd + dim > rs
    };

    let max_k = opts.max_weight.unwrap_or(n).min(n);
    let mut found: Option<(usize, ErrorPattern)> = None;
    for k in 1..=max_k {
        let count = exec::binomial(n as u64, k as u64).unwrap_or(u128::MAX);
        let count = u64::try_from(count)
            .map_err(|_| Error::SizeGuard(format!("C({n},{k}) overflows the scan budget")))?;
        let hit = exec::find_first_map(count, |r| {
            let rho = ErrorPattern::from_indices(net, exec::unrank_combination(n, k, r))
                .expect("indices in range");
            intersects(&rho).then_some(rho)
        });
        if let Some(rho) = hit {
            found = Some((k, rho));
            break;
        }
    }
    let Some((d_size, witness)) = found else {
        return Err(Error::DistanceExceedsCap { cap: max_k });
    };

    // All intersecting patterns at the found weight; smaller weights were
    // exhausted above, so this weight carries the rank/dim minima.
    let count = exec::binomial(n as u64, d_size as u64).unwrap() as u64;
    let extremes = exec::filter_map_collect(count, |r| {
        let rho = ErrorPattern::from_indices(net, exec::unrank_combination(n, d_size, r))
            .expect("indices in range");
        if !intersects(&rho) {
            return None;
        }
        let rank = net.pattern_rank(&rho, target).ok()?;
        let dim_delta = view.error_space(&rho).rank(code.field());
        Some((rank, dim_delta))
    });
    let d_by_rank = extremes
        .iter()
        .map(|&(r, _)| r)
        .min()
        .expect("witness is present");
    let d_by_dim = extremes
        .iter()
        .map(|&(_, d)| d)
        .min()
        .expect("witness is present");

    let bound = if cut >= omega {
        (cut - omega + 1) as i64
    } else {
        1
    };
    Ok(DistanceReport {
        target: net.target_of(target),
        cut,
        dim_phi: dim,
        d_by_size: d_size,
        d_by_rank,
        d_by_dim,
        bound: bound as usize,
        slack: bound - d_size as i64,
        witness: witness.ids(net).iter().map(|s| s.to_string()).collect(),
    })
}

/// Asserts the Singleton bound on already-computed reports. For codes whose
/// regularity hypothesis holds a negative slack is an internal-consistency
/// failure; for other codes the slack is informational only.
pub fn singleton_check(reports: &[DistanceReport], hypothesis_holds: bool) -> Vec<i64> {
    let slacks: Vec<i64> = reports.iter().map(|r| r.slack).collect();
    if hypothesis_holds {
        for r in reports {
            assert!(
                r.slack >= 0,
                "Singleton bound violated at {:?}: d = {} exceeds bound {}",
                r.target,
                r.d_by_size,
                r.bound
            );
        }
    }
    slacks
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MdsKind {
    Multicast,
    Broadcast,
    Dispersion,
    Generic,
}

impl MdsKind {
    pub const ALL: [MdsKind; 4] = [
        MdsKind::Multicast,
        MdsKind::Broadcast,
        MdsKind::Dispersion,
        MdsKind::Generic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MdsKind::Multicast => "multicast",
            MdsKind::Broadcast => "broadcast",
            MdsKind::Dispersion => "dispersion",
            MdsKind::Generic => "generic",
        }
    }
}

/// A certification verdict. `Unknown` means a size guard prevented the
/// exhaustive check; it is never a false positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertOutcome {
    Certified,
    NotMds { reason: String },
    Unknown { reason: String },
}

impl CertOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, CertOutcome::Certified)
    }
}

impl Serialize for CertOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CertOutcome::Certified => s.serialize_bool(true),
            CertOutcome::NotMds { .. } => s.serialize_bool(false),
            CertOutcome::Unknown { .. } => s.serialize_str("unknown"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    pub kind: MdsKind,
    pub outcome: CertOutcome,
    pub regularity: RegularityClass,
    /// Distance reports for every target the kind requires (where defined).
    pub reports: Vec<DistanceReport>,
}

/// Distance targets a kind must meet with zero slack. Targets whose min-cut
/// is zero are skipped: no message reaches them, their distance is
/// undefined, and the bound's derivation needs a nonempty cut.
fn kind_targets(
    code: &LnecCode,
    kind: MdsKind,
    opts: &AnalyzeOpts,
) -> Result<Option<Vec<TargetRef>>> {
    let net = code.network();
    let omega = net.rate();
    let mut out = Vec::new();
    match kind {
        MdsKind::Multicast => {
            for t in 0..net.n_nodes() {
                if t != net.source() && net.min_cut_node(t)? >= omega {
                    out.push(TargetRef::Node(t));
                }
            }
        }
        MdsKind::Broadcast => {
            for t in 0..net.n_nodes() {
                if t != net.source() && net.min_cut_node(t)? >= 1 {
                    out.push(TargetRef::Node(t));
                }
            }
        }
        MdsKind::Dispersion => match collection_family(code, opts)? {
            None => return Ok(None),
            Some(cols) => {
                for coll in cols {
                    if net.min_cut_nodes(&coll)? >= 1 {
                        out.push(TargetRef::Nodes(coll));
                    }
                }
            }
        },
        MdsKind::Generic => match channel_set_family(code, opts)? {
            None => return Ok(None),
            Some(sets) => {
                for set in sets {
                    if net.min_cut_channel_set(&set)? >= 1 {
                        out.push(TargetRef::Channels(set));
                    }
                }
            }
        },
    }
    Ok(Some(out))
}

/// Certifies a code against one MDS definition: the kind's regularity flag
/// must hold and every relevant target must meet its Singleton bound with
/// equality.
pub fn certify_mds(code: &LnecCode, kind: MdsKind, opts: &AnalyzeOpts) -> Result<Certification> {
    let regularity = classify(code, opts)?;
    let flag = regularity.flag(kind);
    if flag == Some(false) {
        return Ok(Certification {
            kind,
            outcome: CertOutcome::NotMds {
                reason: format!("{} regularity fails", kind.name()),
            },
            regularity,
            reports: Vec::new(),
        });
    }

    let targets = kind_targets(code, kind, opts)?;
    let (mut reports, mut outcome) = (Vec::new(), CertOutcome::Certified);
    match targets {
        None => {
            outcome = CertOutcome::Unknown {
                reason: "target family exceeds the size guard; pass an explicit family".into(),
            };
        }
        Some(targets) => {
            for tref in &targets {
                match min_distance(code, tref, opts) {
                    Ok(report) => {
                        if report.slack != 0 && outcome.is_certified() {
                            outcome = CertOutcome::NotMds {
                                reason: format!(
                                    "distance {} differs from bound {} at {}",
                                    report.d_by_size,
                                    report.bound,
                                    code.network().describe_target(tref)
                                ),
                            };
                        }
                        reports.push(report);
                    }
                    Err(Error::DistanceUndefined(t)) => {
                        // Regularity already vouched for the message space,
                        // so a trivial one here is a genuine failure.
                        if outcome.is_certified() {
                            outcome = CertOutcome::NotMds {
                                reason: format!("no message reaches {t}"),
                            };
                        }
                    }
                    Err(Error::SizeGuard(reason)) => {
                        if outcome.is_certified() {
                            outcome = CertOutcome::Unknown { reason };
                        }
                    }
                    Err(Error::DistanceExceedsCap { cap }) => {
                        if outcome.is_certified() {
                            outcome = CertOutcome::Unknown {
                                reason: format!("distance search capped at weight {cap}"),
                            };
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
            if outcome.is_certified() && flag.is_none() {
                outcome = CertOutcome::Unknown {
                    reason: "regularity family exceeds the size guard".into(),
                };
            }
        }
    }
    Ok(Certification {
        kind,
        outcome,
        regularity,
        reports,
    })
}

/// The aggregate report the CLI prints: regularity, per-target distances,
/// and one verdict per MDS kind.
#[derive(Clone, Debug, Serialize)]
pub struct CodeReport {
    pub regularity: RegularityClass,
    pub targets: Vec<TargetRecord>,
    pub verdicts: Verdicts,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub multicast: CertOutcome,
    pub broadcast: CertOutcome,
    pub dispersion: CertOutcome,
    pub generic: CertOutcome,
}

/// A per-target record: either a full distance report or the reason the
/// distance is undefined.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum TargetRecord {
    Distance(DistanceReport),
    Undefined {
        target: Target,
        #[serde(rename = "C")]
        cut: usize,
        #[serde(rename = "dimPhi")]
        dim_phi: usize,
        #[serde(rename = "d")]
        d: Option<usize>,
    },
}

/// Full analysis: classification, distances at the requested targets (all
/// non-source nodes by default), and all four MDS verdicts.
pub fn full_report(
    code: &LnecCode,
    extra_targets: &[Target],
    opts: &AnalyzeOpts,
) -> Result<CodeReport> {
    let net = code.network();
    let mut trefs: Vec<TargetRef> = Vec::new();
    for t in 0..net.n_nodes() {
        if t != net.source() {
            trefs.push(TargetRef::Node(t));
        }
    }
    for t in extra_targets {
        let r = net.resolve_target(t)?;
        if !trefs.contains(&r) {
            trefs.push(r);
        }
    }
    let mut targets = Vec::with_capacity(trefs.len());
    for tref in &trefs {
        match min_distance(code, tref, opts) {
            Ok(rep) => targets.push(TargetRecord::Distance(rep)),
            Err(Error::DistanceUndefined(_)) => targets.push(TargetRecord::Undefined {
                target: net.target_of(tref),
                cut: net.min_cut(tref)?,
                dim_phi: dim_phi(code, tref)?,
                d: None,
            }),
            Err(e) => return Err(e),
        }
    }
    let verdicts = Verdicts {
        multicast: certify_mds(code, MdsKind::Multicast, opts)?.outcome,
        broadcast: certify_mds(code, MdsKind::Broadcast, opts)?.outcome,
        dispersion: certify_mds(code, MdsKind::Dispersion, opts)?.outcome,
        generic: certify_mds(code, MdsKind::Generic, opts)?.outcome,
    };
    Ok(CodeReport {
        regularity: classify(code, opts)?,
        targets,
        verdicts,
    })
}
