//! Small example networks used across tests, benches, and documentation.

use crate::code::LocalKernels;
use crate::network::{Channel, Network};

fn ch(id: &str, tail: &str, head: &str) -> Channel {
    Channel {
        id: id.into(),
        tail: tail.into(),
        head: head.into(),
    }
}

/// Three parallel two-hop branches from `s` to `t` (rate 1): `s -> ri -> t`
/// with channels `ei1 = s->ri` and `ei2 = ri->t`. Min-cut to `t` is 3.
pub fn three_path() -> Network {
    let nodes = ["s", "r1", "r2", "r3", "t"].map(String::from).to_vec();
    let channels = vec![
        ch("e11", "s", "r1"),
        ch("e12", "r1", "t"),
        ch("e21", "s", "r2"),
        ch("e22", "r2", "t"),
        ch("e31", "s", "r3"),
        ch("e32", "r3", "t"),
    ];
    Network::new(nodes, channels, "s", 1).expect("fixture is valid")
}

/// The two-sink butterfly at rate 2: outer branches `s -> a -> t1` and
/// `s -> b -> t2`, plus a shared middle branch through `c` feeding both
/// sinks. Both sinks have min-cut 2, the pair {t1, t2} has min-cut 3 (the
/// two sinks jointly see all three source-side branches), and no internal
/// node reaches min-cut 2.
pub fn butterfly() -> Network {
    let nodes = ["s", "a", "b", "c", "t1", "t2"].map(String::from).to_vec();
    let channels = vec![
        ch("sa", "s", "a"),
        ch("sb", "s", "b"),
        ch("sc", "s", "c"),
        ch("at1", "a", "t1"),
        ch("bt2", "b", "t2"),
        ch("ct1", "c", "t1"),
        ch("ct2", "c", "t2"),
    ];
    Network::new(nodes, channels, "s", 2).expect("fixture is valid")
}

/// Butterfly plus a dead-end node `x` hanging off `a`. The stub channel lies
/// on no path to any decoding-capable node, so multicast constructions leave
/// it carrying a pure error symbol and `x` (min-cut 1 < rate 2) cannot
/// receive anything: a multicast MDS code here is not broadcast MDS.
pub fn butterfly_with_stub() -> Network {
    let nodes = ["s", "a", "b", "c", "t1", "t2", "x"]
        .map(String::from)
        .to_vec();
    let channels = vec![
        ch("sa", "s", "a"),
        ch("sb", "s", "b"),
        ch("sc", "s", "c"),
        ch("at1", "a", "t1"),
        ch("ax", "a", "x"),
        ch("bt2", "b", "t2"),
        ch("ct1", "c", "t1"),
        ch("ct2", "c", "t2"),
    ];
    Network::new(nodes, channels, "s", 2).expect("fixture is valid")
}

/// Two disjoint two-hop branches: `s -> a -> t`, `s -> b -> t`.
pub fn diamond(rate: usize) -> Network {
    let nodes = ["s", "a", "b", "t"].map(String::from).to_vec();
    let channels = vec![
        ch("sa", "s", "a"),
        ch("at", "a", "t"),
        ch("sb", "s", "b"),
        ch("bt", "b", "t"),
    ];
    Network::new(nodes, channels, "s", rate).expect("fixture is valid")
}

/// A two-hop chain `s -> a -> t` at rate 1.
pub fn chain2() -> Network {
    let nodes = ["s", "a", "t"].map(String::from).to_vec();
    let channels = vec![ch("e1", "s", "a"), ch("e2", "a", "t")];
    Network::new(nodes, channels, "s", 1).expect("fixture is valid")
}

/// `n` parallel unit channels from `s` straight to `t`.
pub fn parallel(n: usize, rate: usize) -> Network {
    let nodes = ["s", "t"].map(String::from).to_vec();
    let channels = (1..=n).map(|i| ch(&format!("p{i}"), "s", "t")).collect();
    Network::new(nodes, channels, "s", rate).expect("fixture is valid")
}

/// A single channel `s -> t` at rate 1.
pub fn single_channel() -> Network {
    parallel(1, 1)
}

/// Local kernels with every coefficient set to 1 (valid over any field).
/// On [`three_path`] this yields the rate-1 repetition-style code whose
/// minimum distance at `t` is 3.
pub fn all_ones_kernels(net: &Network) -> LocalKernels {
    let mut k = LocalKernels::zero(net);
    for node in 0..net.n_nodes() {
        let rows = if node == net.source() {
            net.rate()
        } else {
            net.ins(node).len()
        };
        let cols = net.outs(node).len();
        for r in 0..rows {
            for c in 0..cols {
                k.set_entry(node, r, c, 1);
            }
        }
    }
    k
}
