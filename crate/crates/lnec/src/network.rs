//! The single-source acyclic network model: topology validation, the
//! canonical upstream-to-downstream channel order, the three min-cut notions
//! (node, node collection, channel set), error-pattern ranks via source-side
//! graph surgery, and channel-disjoint path families.
//!
//! Channels are stored in canonical order after validation; that order
//! indexes every vector and matrix coordinate in the crate. Parallel
//! channels are allowed, self-loops and channels into the source are not.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::exec;
use crate::galois::FieldSpec;
use crate::{Error, Result};

/// A unit-capacity channel as declared in a network file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    source: String,
    rate: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<FieldSpec>,
    nodes: Vec<String>,
    channels: Vec<Channel>,
}

#[derive(Clone, Debug)]
struct Chan {
    id: String,
    tail: usize,
    head: usize,
}

/// A validated network. Channel indices used throughout the crate are
/// positions in the canonical order.
#[derive(Clone, Debug)]
pub struct Network {
    node_ids: Vec<String>,
    source: usize,
    rate: usize,
    chans: Vec<Chan>,
    /// Canonical index -> position in the declared channel list.
    decl_of_canon: Vec<usize>,
    ins: Vec<Vec<usize>>,
    outs: Vec<Vec<usize>>,
    field: Option<FieldSpec>,
}

impl Network {
    pub fn new(
        nodes: Vec<String>,
        channels: Vec<Channel>,
        source: &str,
        rate: usize,
    ) -> Result<Network> {
        Network::build(nodes, channels, source, rate, None)
    }

    fn build(
        nodes: Vec<String>,
        channels: Vec<Channel>,
        source: &str,
        rate: usize,
        field: Option<FieldSpec>,
    ) -> Result<Network> {
        if rate == 0 {
            return Err(Error::InvalidNetwork("rate must be >= 1".into()));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidNetwork("no nodes declared".into()));
        }
        let mut node_index = BTreeMap::new();
        for (i, id) in nodes.iter().enumerate() {
            if node_index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node id {id:?}")));
            }
        }
        let source_idx = *node_index
            .get(source)
            .ok_or_else(|| Error::UnknownNode(source.to_string()))?;

        let mut seen_chan = BTreeSet::new();
        let mut decl: Vec<Chan> = Vec::with_capacity(channels.len());
        for c in &channels {
            if !seen_chan.insert(c.id.clone()) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate channel id {:?}",
                    c.id
                )));
            }
            let tail = *node_index
                .get(&c.tail)
                .ok_or_else(|| Error::UnknownNode(c.tail.clone()))?;
            let head = *node_index
                .get(&c.head)
                .ok_or_else(|| Error::UnknownNode(c.head.clone()))?;
            if tail == head {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop on channel {:?}",
                    c.id
                )));
            }
            if head == source_idx {
                return Err(Error::InvalidNetwork(format!(
                    "channel {:?} enters the source node",
                    c.id
                )));
            }
            decl.push(Chan {
                id: c.id.clone(),
                tail,
                head,
            });
        }

        // Canonical order: Kahn's algorithm over channels, where a channel
        // becomes ready once every channel into its tail is emitted. Ties are
        // broken by channel id, so the order is a deterministic linear
        // extension of the paths-precede relation.
        let n = decl.len();
        let mut into_node = vec![0usize; nodes.len()];
        for c in &decl {
            into_node[c.head] += 1;
        }
        let mut out_by_node: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, c) in decl.iter().enumerate() {
            out_by_node[c.tail].push(i);
        }
        let mut remaining: Vec<usize> = decl.iter().map(|c| into_node[c.tail]).collect();
        let mut ready: BTreeSet<(String, usize)> = decl
            .iter()
            .enumerate()
            .filter(|(_, c)| into_node[c.tail] == 0)
            .map(|(i, c)| (c.id.clone(), i))
            .collect();
        let mut canon_of_decl = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        while let Some(entry) = ready.iter().next().cloned() {
            ready.remove(&entry);
            let (_, i) = entry;
            canon_of_decl[i] = order.len();
            order.push(i);
            for &j in &out_by_node[decl[i].head] {
                remaining[j] -= 1;
                if remaining[j] == 0 {
                    ready.insert((decl[j].id.clone(), j));
                }
            }
        }
        if order.len() < n {
            let leftover: Vec<usize> = (0..n).filter(|&i| canon_of_decl[i] == usize::MAX).collect();
            return Err(Error::CycleDetected(witness_cycle(&decl, &leftover)));
        }

        let chans: Vec<Chan> = order.iter().map(|&i| decl[i].clone()).collect();
        let mut ins: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut outs: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (k, c) in chans.iter().enumerate() {
            ins[c.head].push(k);
            outs[c.tail].push(k);
        }

        Ok(Network {
            node_ids: nodes,
            source: source_idx,
            rate,
            chans,
            decl_of_canon: order,
            ins,
            outs,
            field,
        })
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let file: NetworkFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidNetwork(format!("bad network JSON: {e}")))?;
        Network::build(
            file.nodes,
            file.channels,
            &file.source,
            file.rate,
            file.field,
        )
    }

    pub fn to_json(&self) -> String {
        // Serialize channels in their declared order.
        let mut by_decl: Vec<(usize, Channel)> = self
            .chans
            .iter()
            .enumerate()
            .map(|(k, c)| {
                (
                    self.decl_of_canon[k],
                    Channel {
                        id: c.id.clone(),
                        tail: self.node_ids[c.tail].clone(),
                        head: self.node_ids[c.head].clone(),
                    },
                )
            })
            .collect();
        by_decl.sort_by_key(|(d, _)| *d);
        let file = NetworkFile {
            source: self.node_ids[self.source].clone(),
            rate: self.rate,
            field: self.field.clone(),
            nodes: self.node_ids.clone(),
            channels: by_decl.into_iter().map(|(_, c)| c).collect(),
        };
        serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    /// The same topology at a different information rate.
    pub fn with_rate(&self, rate: usize) -> Result<Network> {
        if rate == 0 {
            return Err(Error::InvalidNetwork("rate must be >= 1".into()));
        }
        let mut net = self.clone();
        net.rate = rate;
        Ok(net)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn n_channels(&self) -> usize {
        self.chans.len()
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.node_ids[i]
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.node_ids
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Channel id at a canonical position.
    pub fn channel_id(&self, k: usize) -> &str {
        &self.chans[k].id
    }

    pub fn channel_index(&self, id: &str) -> Result<usize> {
        self.chans
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownChannel(id.to_string()))
    }

    pub fn tail(&self, k: usize) -> usize {
        self.chans[k].tail
    }

    pub fn head(&self, k: usize) -> usize {
        self.chans[k].head
    }

    /// In-channels of a node, ascending in canonical order.
    pub fn ins(&self, node: usize) -> &[usize] {
        &self.ins[node]
    }

    pub fn outs(&self, node: usize) -> &[usize] {
        &self.outs[node]
    }

    /// Channel ids in canonical (upstream-to-downstream) order.
    pub fn canonical_channel_ids(&self) -> Vec<&str> {
        self.chans.iter().map(|c| c.id.as_str()).collect()
    }

    pub fn default_field(&self) -> Option<&FieldSpec> {
        self.field.as_ref()
    }

    pub fn set_default_field(&mut self, spec: Option<FieldSpec>) {
        self.field = spec;
    }

    pub fn resolve_target(&self, target: &Target) -> Result<TargetRef> {
        match target {
            Target::Node(id) => {
                let t = self.node_index(id)?;
                if t == self.source {
                    return Err(Error::InvalidTarget(
                        "the source is not a valid target".into(),
                    ));
                }
                Ok(TargetRef::Node(t))
            }
            Target::Nodes(ids) => {
                if ids.is_empty() {
                    return Err(Error::InvalidTarget("empty node collection".into()));
                }
                let mut set = BTreeSet::new();
                for id in ids {
                    let t = self.node_index(id)?;
                    if t == self.source {
                        return Err(Error::InvalidTarget(
                            "the source cannot be part of a target collection".into(),
                        ));
                    }
                    set.insert(t);
                }
                Ok(TargetRef::Nodes(set.into_iter().collect()))
            }
            Target::Channels(ids) => {
                if ids.is_empty() {
                    return Err(Error::InvalidTarget("empty channel set".into()));
                }
                let mut set = BTreeSet::new();
                for id in ids {
                    set.insert(self.channel_index(id)?);
                }
                Ok(TargetRef::Channels(set.into_iter().collect()))
            }
        }
    }

    pub fn describe_target(&self, target: &TargetRef) -> String {
        match target {
            TargetRef::Node(t) => format!("node {}", self.node_ids[*t]),
            TargetRef::Nodes(ts) => format!(
                "nodes {{{}}}",
                ts.iter()
                    .map(|&t| self.node_ids[t].as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            TargetRef::Channels(cs) => format!(
                "channels {{{}}}",
                cs.iter()
                    .map(|&c| self.chans[c].id.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }

    pub fn target_of(&self, tref: &TargetRef) -> Target {
        match tref {
            TargetRef::Node(t) => Target::Node(self.node_ids[*t].clone()),
            TargetRef::Nodes(ts) => {
                Target::Nodes(ts.iter().map(|&t| self.node_ids[t].clone()).collect())
            }
            TargetRef::Channels(cs) => {
                Target::Channels(cs.iter().map(|&c| self.chans[c].id.clone()).collect())
            }
        }
    }

    /// Min-cut capacity between the source and a non-source node; 0 when the
    /// node is unreachable.
    pub fn min_cut_node(&self, t: usize) -> Result<usize> {
        if t == self.source {
            return Err(Error::InvalidTarget(
                "min-cut to the source is undefined".into(),
            ));
        }
        Ok(AuxGraph::from_network(self).max_flow(self.source, t))
    }

    /// Min-cut capacity between the source and a collection of non-source
    /// nodes, via the auxiliary super-sink network.
    pub fn min_cut_nodes(&self, ts: &[usize]) -> Result<usize> {
        if ts.is_empty() {
            return Err(Error::InvalidTarget("empty node collection".into()));
        }
        if ts.contains(&self.source) {
            return Err(Error::InvalidTarget(
                "collection contains the source".into(),
            ));
        }
        Ok(AuxGraph::from_network(self).min_cut_to_nodes(self.source, ts))
    }

    /// Min-cut capacity between the source and a set of channels, via the
    /// channel-splitting auxiliary network.
    pub fn min_cut_channel_set(&self, channels: &[usize]) -> Result<usize> {
        if channels.is_empty() {
            return Err(Error::InvalidTarget("empty channel set".into()));
        }
        let mut g = AuxGraph::from_network(self);
        let mids: Vec<usize> = channels.iter().map(|&c| g.split_tagged(c)).collect();
        Ok(g.min_cut_to_nodes(self.source, &mids))
    }

    pub fn min_cut(&self, target: &TargetRef) -> Result<usize> {
        match target {
            TargetRef::Node(t) => self.min_cut_node(*t),
            TargetRef::Nodes(ts) => self.min_cut_nodes(ts),
            TargetRef::Channels(cs) => self.min_cut_channel_set(cs),
        }
    }

    /// Rank of an error pattern with respect to a target: the pattern's
    /// channels are deleted, a fresh source is wired to their head nodes,
    /// and the min-cut from that source to the target is returned.
    pub fn pattern_rank(&self, rho: &ErrorPattern, target: &TargetRef) -> Result<usize> {
        if rho.is_empty() {
            return Ok(0);
        }
        let mut g = AuxGraph::without_channels(self, rho);
        let s_rho = g.add_node();
        for &e in rho.iter() {
            g.add_arc(s_rho, self.head(e), 1, Some(e));
        }
        match target {
            TargetRef::Node(t) => {
                if *t == self.source {
                    return Err(Error::InvalidTarget(
                        "rank with respect to the source".into(),
                    ));
                }
                Ok(g.max_flow(s_rho, *t))
            }
            TargetRef::Nodes(ts) => Ok(g.min_cut_to_nodes(s_rho, ts)),
            TargetRef::Channels(cs) => {
                let mids: Vec<usize> = cs.iter().map(|&c| g.split_tagged(c)).collect();
                Ok(g.min_cut_to_nodes(s_rho, &mids))
            }
        }
    }

    /// All error patterns of the given size whose rank with respect to `t`
    /// equals their size. Size 0 yields exactly the empty pattern.
    pub fn full_rank_patterns(
        &self,
        t: usize,
        size: usize,
        limits: &EnumLimits,
    ) -> Result<Vec<ErrorPattern>> {
        if size == 0 {
            return Ok(vec![ErrorPattern::empty()]);
        }
        let n = self.n_channels();
        if size > limits.max_size || n > limits.max_channels {
            return Err(Error::SizeGuard(format!(
                "pattern enumeration over {n} channels at size {size} exceeds the default \
                 guard (size <= {}, channels <= {}); pass an explicit override to proceed",
                limits.max_size, limits.max_channels
            )));
        }
        let count = exec::binomial(n as u64, size as u64)
            .filter(|&c| c <= limits.max_patterns as u128)
            .ok_or_else(|| {
                Error::SizeGuard(format!(
                    "C({n},{size}) patterns exceed the enumeration budget {}",
                    limits.max_patterns
                ))
            })? as u64;
        let target = TargetRef::Node(t);
        Ok(exec::filter_map_collect(count, |r| {
            let combo = exec::unrank_combination(n, size, r);
            let rho = ErrorPattern { chans: combo };
            match self.pattern_rank(&rho, &target) {
                Ok(rank) if rank == size => Some(rho),
                _ => None,
            }
        }))
    }

    /// A family of `rate + |rho|` channel-disjoint paths into `t`: one per
    /// message coordinate, plus one per pattern channel that enters the
    /// network on that channel.
    pub fn disjoint_path_family(&self, t: usize, rho: &ErrorPattern) -> Result<PathFamily> {
        if t == self.source {
            return Err(Error::InvalidTarget("paths to the source".into()));
        }
        let omega = self.rate;
        let c_t = self.min_cut_node(t)?;
        if c_t < omega {
            return Err(Error::Infeasible(format!(
                "node {} has min-cut {} below rate {}",
                self.node_ids[t], c_t, omega
            )));
        }
        if rho.len() != c_t - omega {
            return Err(Error::Infeasible(format!(
                "pattern size {} != redundancy {} of node {}",
                rho.len(),
                c_t - omega,
                self.node_ids[t]
            )));
        }

        let mut g = AuxGraph::from_network(self);
        let mut mid_of = BTreeMap::new();
        for &e in rho.iter() {
            mid_of.insert(e, g.split_tagged(e));
        }
        let super_src = g.add_node();
        let msg_arc = g.arcs.len();
        g.add_arc(super_src, self.source, omega as u32, None);
        let mut err_arc_of = BTreeMap::new();
        for &e in rho.iter() {
            err_arc_of.insert(g.arcs.len(), e);
            g.add_arc(super_src, mid_of[&e], 1, None);
        }

        let want = omega + rho.len();
        let mut flow = g.to_flow();
        let got = flow.max_flow(super_src, t);
        if got < want {
            return Err(Error::Infeasible(format!(
                "need {} disjoint paths to {}, flow admits only {}",
                want, self.node_ids[t], got
            )));
        }

        let raw = flow.decompose(super_src, t);
        assert_eq!(
            raw.len(),
            want,
            "unit decomposition must produce one path per supply unit"
        );
        let mut msg_count = 0;
        let mut paths = Vec::with_capacity(want);
        for arc_path in raw {
            let first = arc_path[0];
            let origin = if first == msg_arc * 2 {
                let o = PathOrigin::Message(msg_count);
                msg_count += 1;
                o
            } else {
                PathOrigin::Error(err_arc_of[&(first / 2)])
            };
            let mut channels = Vec::new();
            for &a in &arc_path[1..] {
                if let Some(c) = g.arcs[a / 2].3 {
                    if channels.last() != Some(&c) {
                        channels.push(c);
                    }
                }
            }
            if let PathOrigin::Error(e) = origin {
                assert_eq!(
                    channels.first(),
                    Some(&e),
                    "error path must pass through its channel"
                );
            }
            paths.push(FamilyPath { origin, channels });
        }
        assert_eq!(
            msg_count, omega,
            "family must contain one path per message coordinate"
        );

        // Channel-disjointness across the family.
        let mut used = BTreeSet::new();
        for p in &paths {
            for &c in &p.channels {
                assert!(
                    used.insert(c),
                    "family paths share channel {}",
                    self.chans[c].id
                );
            }
        }
        Ok(PathFamily { paths })
    }
}

/// Finds channels forming a directed cycle among the given (unsortable)
/// channels, for the rejection diagnostic.
fn witness_cycle(decl: &[Chan], leftover: &[usize]) -> Vec<String> {
    let mut out_arcs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in leftover {
        out_arcs.entry(decl[i].tail).or_default().push(i);
    }
    // Walk forward from any leftover channel; within leftover channels every
    // walk eventually revisits a node.
    let start = leftover[0];
    let mut seen_at: BTreeMap<usize, usize> = BTreeMap::new();
    let mut path: Vec<usize> = vec![start];
    seen_at.insert(decl[start].tail, 0);
    let mut node = decl[start].head;
    loop {
        if let Some(&pos) = seen_at.get(&node) {
            return path[pos..].iter().map(|&i| decl[i].id.clone()).collect();
        }
        seen_at.insert(node, path.len());
        let next = out_arcs
            .get(&node)
            .and_then(|v| v.first())
            .copied()
            .expect("leftover subgraph has no sinks");
        path.push(next);
        node = decl[next].head;
    }
}

/// An analysis or decoding target, as written in files and CLI flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Node(String),
    Nodes(Vec<String>),
    Channels(Vec<String>),
}

/// A resolved target: indices are node indices for `Node`/`Nodes` and
/// canonical channel indices for `Channels`, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TargetRef {
    Node(usize),
    Nodes(Vec<usize>),
    Channels(Vec<usize>),
}

/// A set of channels on which errors may occur, as sorted canonical indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ErrorPattern {
    chans: Vec<usize>,
}

impl ErrorPattern {
    pub fn empty() -> Self {
        ErrorPattern { chans: Vec::new() }
    }

    pub fn from_indices(net: &Network, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for i in indices {
            if i >= net.n_channels() {
                return Err(Error::UnknownChannel(format!("#{i}")));
            }
            set.insert(i);
        }
        Ok(ErrorPattern {
            chans: set.into_iter().collect(),
        })
    }

    pub fn from_ids<'a>(net: &Network, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for id in ids {
            set.insert(net.channel_index(id)?);
        }
        Ok(ErrorPattern {
            chans: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.chans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chans.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.chans.iter()
    }

    pub fn contains(&self, chan: usize) -> bool {
        self.chans.binary_search(&chan).is_ok()
    }

    /// Position of a channel inside the pattern, when present.
    pub fn position(&self, chan: usize) -> Option<usize> {
        self.chans.binary_search(&chan).ok()
    }

    pub fn ids<'n>(&self, net: &'n Network) -> Vec<&'n str> {
        self.chans.iter().map(|&c| net.channel_id(c)).collect()
    }
}

/// Guards for exhaustive pattern enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumLimits {
    pub max_size: usize,
    pub max_channels: usize,
    /// Upper bound on the number of subsets actually scanned.
    pub max_patterns: u64,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_size: 6,
            max_channels: 40,
            max_patterns: 20_000_000,
        }
    }
}

impl EnumLimits {
    /// Lifts the size/channel guards but keeps a scan budget.
    pub fn budget(max_patterns: u64) -> Self {
        EnumLimits {
            max_size: usize::MAX,
            max_channels: usize::MAX,
            max_patterns,
        }
    }
}

/// Where a family path enters the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrigin {
    /// Carries the i-th message coordinate from the source.
    Message(usize),
    /// Carries the error of the given channel and passes through it.
    Error(usize),
}

#[derive(Clone, Debug)]
pub struct FamilyPath {
    pub origin: PathOrigin,
    /// Channels in path order (canonical indices).
    pub channels: Vec<usize>,
}

/// Channel-disjoint paths from the message coordinates and the pattern
/// channels to a single target node.
#[derive(Clone, Debug)]
pub struct PathFamily {
    pub paths: Vec<FamilyPath>,
}

impl PathFamily {
    pub fn message_paths(&self) -> impl Iterator<Item = &FamilyPath> {
        self.paths
            .iter()
            .filter(|p| matches!(p.origin, PathOrigin::Message(_)))
    }

    pub fn error_paths(&self) -> impl Iterator<Item = &FamilyPath> {
        self.paths
            .iter()
            .filter(|p| matches!(p.origin, PathOrigin::Error(_)))
    }
}

/// A scratch flow graph: network nodes plus any auxiliary nodes, arcs with
/// integer capacities, and an optional channel tag per arc.
struct AuxGraph {
    n: usize,
    /// (from, to, capacity, channel tag)
    arcs: Vec<(usize, usize, u32, Option<usize>)>,
}

impl AuxGraph {
    fn from_network(net: &Network) -> Self {
        let arcs = net
            .chans
            .iter()
            .enumerate()
            .map(|(k, c)| (c.tail, c.head, 1, Some(k)))
            .collect();
        AuxGraph {
            n: net.n_nodes(),
            arcs,
        }
    }

    fn without_channels(net: &Network, skip: &ErrorPattern) -> Self {
        let arcs = net
            .chans
            .iter()
            .enumerate()
            .filter(|(k, _)| !skip.contains(*k))
            .map(|(k, c)| (c.tail, c.head, 1, Some(k)))
            .collect();
        AuxGraph {
            n: net.n_nodes(),
            arcs,
        }
    }

    fn add_node(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32, tag: Option<usize>) {
        self.arcs.push((from, to, cap, tag));
    }

    /// Splits the unique arc tagged with `chan` by a fresh middle node,
    /// tagging both halves, and returns the middle node.
    fn split_tagged(&mut self, chan: usize) -> usize {
        let idx = self
            .arcs
            .iter()
            .position(|a| a.3 == Some(chan))
            .expect("split target must be present exactly once");
        let mid = self.add_node();
        let (from, to, cap, tag) = self.arcs[idx];
        self.arcs[idx] = (from, mid, cap, tag);
        self.add_arc(mid, to, cap, tag);
        mid
    }

    fn to_flow(&self) -> FlowNet {
        let mut f = FlowNet::new(self.n);
        for &(from, to, cap, _) in &self.arcs {
            f.add_arc(from, to, cap);
        }
        f
    }

    fn max_flow(&self, s: usize, t: usize) -> usize {
        self.to_flow().max_flow(s, t)
    }

    /// Min-cut from `s` to a node collection: a super-sink fed from each
    /// target by an arc whose capacity is that target's own min-cut from `s`.
    fn min_cut_to_nodes(&self, s: usize, targets: &[usize]) -> usize {
        if targets.len() == 1 {
            return self.max_flow(s, targets[0]);
        }
        let caps: Vec<u32> = targets
            .iter()
            .map(|&t| self.max_flow(s, t) as u32)
            .collect();
        let mut f = FlowNet::new(self.n + 1);
        let sink = self.n;
        for &(from, to, cap, _) in &self.arcs {
            f.add_arc(from, to, cap);
        }
        for (&t, &c) in targets.iter().zip(&caps) {
            if c > 0 {
                f.add_arc(t, sink, c);
            }
        }
        f.max_flow(s, sink)
    }
}

/// Max-flow with BFS augmenting paths. Arcs come in forward/reverse pairs:
/// arc `2i` is the i-th forward arc, `2i + 1` its residual reverse.
struct FlowNet {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        let i = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.to.push(from);
        self.cap.push(0);
        self.adj[from].push(i);
        self.adj[to].push(i + 1);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut total = 0usize;
        loop {
            let mut prev_arc = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if !seen[v] && self.cap[a] > 0 {
                        seen[v] = true;
                        prev_arc[v] = a;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = u32::MAX;
            let mut v = t;
            while v != s {
                let a = prev_arc[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = prev_arc[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck as usize;
        }
    }

    /// Peels the computed flow into unit paths of arc indices from `s`
    /// (possible because the graph is acyclic).
    fn decompose(&mut self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let flow_on = |cap: &[u32], a: usize| cap[a ^ 1];
        let mut paths = Vec::new();
        loop {
            let mut node = s;
            let mut path = Vec::new();
            while let Some(&a) = self.adj[node]
                .iter()
                .find(|&&a| a % 2 == 0 && flow_on(&self.cap, a) > 0)
            {
                self.cap[a ^ 1] -= 1;
                self.cap[a] += 1;
                path.push(a);
                node = self.to[a];
            }
            if path.is_empty() {
                return paths;
            }
            assert_eq!(node, t, "flow path must terminate at the sink");
            paths.push(path);
        }
    }
}
