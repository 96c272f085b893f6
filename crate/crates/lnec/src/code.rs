//! Code representation: local encoding kernels per node, the derived
//! extended global kernels, the transfer-matrix cross-check, decoding views
//! per target, and the message/error spaces they induce.
//!
//! Coordinates of extended kernels are indexed as: the first `rate`
//! positions are the imaginary message channels, followed by one position
//! per real channel in canonical order. Every channel's kernel carries a 1
//! in its own error coordinate, and 0 in the coordinate of any channel that
//! is not upstream of it.

use serde::{Deserialize, Serialize};

use crate::galois::{Elem, Field, FieldSpec, Matrix};
use crate::network::{ErrorPattern, Network, TargetRef};
use crate::{Error, Result};

/// All local encoding kernels. Node `i`'s kernel has one row per in-channel
/// (for the source: one row per message coordinate) and one column per
/// out-channel, both in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalKernels {
    mats: Vec<Matrix>,
}

impl LocalKernels {
    pub fn zero(net: &Network) -> Self {
        let mats = (0..net.n_nodes())
            .map(|i| {
                let rows = if i == net.source() {
                    net.rate()
                } else {
                    net.ins(i).len()
                };
                Matrix::zero(rows, net.outs(i).len())
            })
            .collect();
        LocalKernels { mats }
    }

    pub fn node(&self, i: usize) -> &Matrix {
        &self.mats[i]
    }

    pub fn set_entry(&mut self, node: usize, row: usize, col: usize, v: Elem) {
        self.mats[node].set(row, col, v);
    }

    /// Coefficient for the adjacent channel pair `(d, e)`; zero unless
    /// `head(d) = tail(e)`.
    pub fn coeff(&self, net: &Network, d: usize, e: usize) -> Elem {
        let node = net.tail(e);
        if net.head(d) != node {
            return 0;
        }
        let row = net
            .ins(node)
            .iter()
            .position(|&x| x == d)
            .expect("d enters tail(e)");
        let col = net
            .outs(node)
            .iter()
            .position(|&x| x == e)
            .expect("e leaves tail(e)");
        self.mats[node].get(row, col)
    }

    /// Coefficient pairing the i-th message coordinate with a source
    /// out-channel.
    pub fn source_coeff(&self, net: &Network, msg: usize, e: usize) -> Elem {
        let s = net.source();
        debug_assert_eq!(net.tail(e), s);
        let col = net
            .outs(s)
            .iter()
            .position(|&x| x == e)
            .expect("e leaves the source");
        self.mats[s].get(msg, col)
    }

    fn validate(&self, net: &Network, field: &Field) -> Result<()> {
        if self.mats.len() != net.n_nodes() {
            return Err(Error::Dimension("kernel count != node count".into()));
        }
        for (i, m) in self.mats.iter().enumerate() {
            let rows = if i == net.source() {
                net.rate()
            } else {
                net.ins(i).len()
            };
            if m.rows() != rows || m.cols() != net.outs(i).len() {
                return Err(Error::Dimension(format!(
                    "kernel at node {} is {}x{}, expected {}x{}",
                    net.node_id(i),
                    m.rows(),
                    m.cols(),
                    rows,
                    net.outs(i).len()
                )));
            }
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    field.elem(m.get(r, c) as u64)?;
                }
            }
        }
        Ok(())
    }
}

/// Computes every channel's extended kernel by the downstream recursion:
/// sum the tail node's weighted in-kernels, plus the channel's own error
/// indicator. Returned matrix has one row per channel (canonical order) of
/// length `rate + |E|`.
pub fn extend_kernels(net: &Network, field: &Field, kernels: &LocalKernels) -> Result<Matrix> {
    kernels.validate(net, field)?;
    let omega = net.rate();
    let width = omega + net.n_channels();
    let mut ext = Matrix::zero(net.n_channels(), width);
    for e in 0..net.n_channels() {
        let node = net.tail(e);
        let mut row = vec![0 as Elem; width];
        if node == net.source() {
            for i in 0..omega {
                row[i] = kernels.source_coeff(net, i, e);
            }
        } else {
            for &d in net.ins(node) {
                let k = kernels.coeff(net, d, e);
                if k != 0 {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = field.add(*cell, field.mul(k, ext.get(d, j)));
                    }
                }
            }
        }
        row[omega + e] = field.add(row[omega + e], 1);
        for (j, v) in row.into_iter().enumerate() {
            ext.set(e, j, v);
        }
    }
    Ok(ext)
}

/// The closed-form route to the same kernels: assemble the source block and
/// the strictly upper-triangular channel-to-channel system matrix, invert
/// `I - F` by back-substitution, and multiply. Exists as an independent
/// cross-check of [`extend_kernels`]; returns the same row-per-channel
/// layout.
pub fn transfer_matrix(net: &Network, field: &Field, kernels: &LocalKernels) -> Result<Matrix> {
    kernels.validate(net, field)?;
    let omega = net.rate();
    let n = net.n_channels();
    let mut sys = Matrix::zero(n, n);
    for e in 0..n {
        if net.tail(e) == net.source() {
            continue;
        }
        for &d in net.ins(net.tail(e)) {
            debug_assert!(d < e, "system matrix must be strictly upper triangular");
            sys.set(d, e, kernels.coeff(net, d, e));
        }
    }
    // inv[.][c] solves (I - F) x = unit_c; x_d = b_d + sum_{j>d} F[d][j] x_j.
    let mut inv = Matrix::zero(n, n);
    for c in 0..n {
        let mut x = vec![0 as Elem; n];
        for d in (0..n).rev() {
            let mut v = if d == c { 1 } else { 0 };
            for j in d + 1..n {
                let f = sys.get(d, j);
                if f != 0 {
                    v = field.add(v, field.mul(f, x[j]));
                }
            }
            x[d] = v;
        }
        for d in 0..n {
            inv.set(d, c, x[d]);
        }
    }
    let mut source_block = Matrix::zero(omega, n);
    for &e in net.outs(net.source()) {
        for i in 0..omega {
            source_block.set(i, e, kernels.source_coeff(net, i, e));
        }
    }
    let top = source_block.mul(&inv, field)?;
    let mut out = Matrix::zero(n, omega + n);
    for e in 0..n {
        for i in 0..omega {
            out.set(e, i, top.get(i, e));
        }
        for d in 0..n {
            out.set(e, omega + d, inv.get(d, e));
        }
    }
    Ok(out)
}

/// An LNEC code: a network, a field, the local kernels, and the cached
/// extended kernels (one row per channel).
#[derive(Clone, Debug)]
pub struct LnecCode {
    net: Network,
    field: Field,
    kernels: LocalKernels,
    ext: Matrix,
}

impl LnecCode {
    pub fn new(net: Network, field: Field, kernels: LocalKernels) -> Result<Self> {
        let ext = extend_kernels(&net, &field, &kernels)?;
        Ok(LnecCode {
            net,
            field,
            kernels,
            ext,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn kernels(&self) -> &LocalKernels {
        &self.kernels
    }

    /// One row per channel: that channel's extended kernel.
    pub fn extended_kernels(&self) -> &Matrix {
        &self.ext
    }

    pub fn extended_kernel(&self, e: usize) -> &[Elem] {
        self.ext.row(e)
    }

    /// Column-selects the cached kernels for a target: the in-channels of a
    /// node, of every node in a collection, or an explicit channel set.
    pub fn decoding_view(&self, target: &TargetRef) -> Result<DecodingView> {
        let cols: Vec<usize> = match target {
            TargetRef::Node(t) => self.net.ins(*t).to_vec(),
            TargetRef::Nodes(ts) => {
                let mut v: Vec<usize> = ts
                    .iter()
                    .flat_map(|&t| self.net.ins(t).iter().copied())
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            TargetRef::Channels(cs) => cs.clone(),
        };
        let omega = self.net.rate();
        let width = omega + self.net.n_channels();
        let mut mat = Matrix::zero(width, cols.len());
        for (j, &e) in cols.iter().enumerate() {
            for d in 0..width {
                mat.set(d, j, self.ext.get(e, d));
            }
        }
        Ok(DecodingView { omega, cols, mat })
    }

    pub fn to_json(&self) -> String {
        let file = CodeFile::from_code(self);
        serde_json::to_string_pretty(&file).expect("code serialization cannot fail")
    }

    /// Extended kernels as JSON records, one per channel in canonical
    /// coordinate order.
    pub fn extended_kernels_json(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            channel: &'a str,
            vector: &'a [Elem],
        }
        let rows: Vec<Row> = (0..self.net.n_channels())
            .map(|e| Row {
                channel: self.net.channel_id(e),
                vector: self.ext.row(e),
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("kernel serialization cannot fail")
    }

    pub fn from_json(net: &Network, text: &str) -> Result<LnecCode> {
        let file: CodeFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidNetwork(format!("bad code JSON: {e}")))?;
        file.into_code(net)
    }
}

/// The matrix of kernels observed by one target, split into the message
/// block (top `rate` rows) and the error block (one row per channel).
#[derive(Clone, Debug)]
pub struct DecodingView {
    omega: usize,
    cols: Vec<usize>,
    mat: Matrix,
}

impl DecodingView {
    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Canonical channel indices of the view's columns.
    pub fn columns(&self) -> &[usize] {
        &self.cols
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// Row of the full view: 0..rate are message coordinates, then channels.
    pub fn row(&self, coord: usize) -> &[Elem] {
        self.mat.row(coord)
    }

    /// The message block, whose row space is the target's message space.
    pub fn message_space(&self) -> Matrix {
        let rows = (0..self.omega).map(|i| self.mat.row(i).to_vec()).collect();
        Matrix::from_rows(rows).expect("rows share the view width")
    }

    /// Rows of the error block selected by a pattern, whose row space is the
    /// pattern's error space with respect to the target.
    pub fn error_space(&self, rho: &ErrorPattern) -> Matrix {
        if rho.is_empty() {
            return Matrix::zero(0, self.n_cols());
        }
        let rows = rho
            .iter()
            .map(|&e| self.mat.row(self.omega + e).to_vec())
            .collect();
        Matrix::from_rows(rows).expect("rows share the view width")
    }
}

/// Coordinate restrictions of an extended kernel by an error pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restriction {
    /// Drop every coordinate outside the message block and the pattern.
    Project,
    /// Keep length, zeroing coordinates outside the message block and pattern.
    Keep,
    /// Keep length, zeroing the message block and pattern coordinates.
    Complement,
}

pub fn restrict_kernel(
    kernel: &[Elem],
    omega: usize,
    rho: &ErrorPattern,
    kind: Restriction,
) -> Vec<Elem> {
    match kind {
        Restriction::Project => {
            let mut v = Vec::with_capacity(omega + rho.len());
            v.extend_from_slice(&kernel[..omega]);
            v.extend(rho.iter().map(|&e| kernel[omega + e]));
            v
        }
        Restriction::Keep => {
            let mut v = vec![0; kernel.len()];
            v[..omega].copy_from_slice(&kernel[..omega]);
            for &e in rho.iter() {
                v[omega + e] = kernel[omega + e];
            }
            v
        }
        Restriction::Complement => {
            let mut v = kernel.to_vec();
            for x in v[..omega].iter_mut() {
                *x = 0;
            }
            for &e in rho.iter() {
                v[omega + e] = 0;
            }
            v
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    node: String,
    rows: Vec<String>,
    cols: Vec<String>,
    entries: Vec<Vec<Elem>>,
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    field: FieldSpec,
    kernels: Vec<KernelFile>,
}

impl CodeFile {
    fn from_code(code: &LnecCode) -> CodeFile {
        let net = code.network();
        let kernels = (0..net.n_nodes())
            .map(|i| {
                let rows = if i == net.source() {
                    (1..=net.rate()).map(|k| format!("d{k}'")).collect()
                } else {
                    net.ins(i)
                        .iter()
                        .map(|&d| net.channel_id(d).to_string())
                        .collect()
                };
                let cols = net
                    .outs(i)
                    .iter()
                    .map(|&e| net.channel_id(e).to_string())
                    .collect();
                let m = code.kernels.node(i);
                let entries = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
                KernelFile {
                    node: net.node_id(i).to_string(),
                    rows,
                    cols,
                    entries,
                }
            })
            .collect();
        CodeFile {
            field: code.field.spec().clone(),
            kernels,
        }
    }

    fn into_code(self, net: &Network) -> Result<LnecCode> {
        let field = Field::new(&self.field)?;
        let mut kernels = LocalKernels::zero(net);
        let mut seen = vec![false; net.n_nodes()];
        for kf in &self.kernels {
            let i = net.node_index(&kf.node)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate kernel for node {:?}",
                    kf.node
                )));
            }
            let want_rows: Vec<String> = if i == net.source() {
                (1..=net.rate()).map(|k| format!("d{k}'")).collect()
            } else {
                net.ins(i)
                    .iter()
                    .map(|&d| net.channel_id(d).to_string())
                    .collect()
            };
            let want_cols: Vec<String> = net
                .outs(i)
                .iter()
                .map(|&e| net.channel_id(e).to_string())
                .collect();
            if kf.rows != want_rows || kf.cols != want_cols {
                return Err(Error::Dimension(format!(
                    "kernel rows/cols for node {:?} must follow canonical order {:?} x {:?}",
                    kf.node, want_rows, want_cols
                )));
            }
            if kf.entries.len() != want_rows.len() {
                return Err(Error::Dimension(format!(
                    "kernel for node {:?} has {} rows, expected {}",
                    kf.node,
                    kf.entries.len(),
                    want_rows.len()
                )));
            }
            for (r, row) in kf.entries.iter().enumerate() {
                if row.len() != want_cols.len() {
                    return Err(Error::Dimension(format!(
                        "kernel row {} for node {:?} has {} entries, expected {}",
                        r,
                        kf.node,
                        row.len(),
                        want_cols.len()
                    )));
                }
                for (c, &v) in row.iter().enumerate() {
                    field.elem(v as u64)?;
                    kernels.set_entry(i, r, c, v);
                }
            }
        }
        for i in 0..net.n_nodes() {
            if !seen[i] && !net.outs(i).is_empty() {
                return Err(Error::InvalidNetwork(format!(
                    "missing kernel for node {:?}",
                    net.node_id(i)
                )));
            }
        }
        LnecCode::new(net.clone(), field, kernels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rng::SplitMix64;

    fn unit(width: usize, at: usize) -> Vec<Elem> {
        let mut v = vec![0; width];
        v[at] = 1;
        v
    }

    #[test]
    fn zero_kernels_collapse_to_indicators() {
        let net = fixtures::three_path();
        let field = Field::prime(5).unwrap();
        let ext = extend_kernels(&net, &field, &LocalKernels::zero(&net)).unwrap();
        let width = 1 + net.n_channels();
        for e in 0..net.n_channels() {
            assert_eq!(ext.row(e), &unit(width, 1 + e)[..]);
        }
    }

    #[test]
    fn single_channel_one_step_recursion() {
        let net = fixtures::single_channel();
        let field = Field::prime(3).unwrap();
        let mut k = LocalKernels::zero(&net);
        k.set_entry(net.source(), 0, 0, 1);
        let ext = extend_kernels(&net, &field, &k).unwrap();
        assert_eq!(ext.row(0), &[1, 1]);
    }

    #[test]
    fn three_path_all_ones_kernels() {
        let net = fixtures::three_path();
        let field = Field::prime(5).unwrap();
        let ext = extend_kernels(&net, &field, &fixtures::all_ones_kernels(&net)).unwrap();
        let width = 1 + net.n_channels();
        for i in 1..=3 {
            let e1 = net.channel_index(&format!("e{i}1")).unwrap();
            let e2 = net.channel_index(&format!("e{i}2")).unwrap();
            let mut want = vec![0 as Elem; width];
            want[0] = 1;
            want[1 + e1] = 1;
            want[1 + e2] = 1;
            assert_eq!(ext.row(e2), &want[..], "branch {i}");
        }
    }

    #[test]
    fn transfer_matrix_zero_kernels() {
        let net = fixtures::butterfly();
        let field = Field::prime(3).unwrap();
        let k = LocalKernels::zero(&net);
        assert_eq!(
            transfer_matrix(&net, &field, &k).unwrap(),
            extend_kernels(&net, &field, &k).unwrap()
        );
    }

    #[test]
    fn transfer_matrix_chain_by_hand() {
        let net = fixtures::chain2();
        let field = Field::prime(7).unwrap();
        let k = fixtures::all_ones_kernels(&net);
        let ext = transfer_matrix(&net, &field, &k).unwrap();
        // Second channel carries message + first error + its own error.
        assert_eq!(ext.row(1), &[1, 1, 1]);
        assert_eq!(ext, extend_kernels(&net, &field, &k).unwrap());
    }

    #[test]
    fn transfer_matrix_matches_recursion_on_random_codes() {
        let mut rng = SplitMix64::new(0xc0de);
        for net in [
            fixtures::three_path(),
            fixtures::butterfly(),
            fixtures::diamond(2),
        ] {
            for field in [Field::prime(5).unwrap(), Field::binary(4).unwrap()] {
                for _ in 0..10 {
                    let mut k = LocalKernels::zero(&net);
                    for i in 0..net.n_nodes() {
                        let rows = if i == net.source() {
                            net.rate()
                        } else {
                            net.ins(i).len()
                        };
                        for r in 0..rows {
                            for c in 0..net.outs(i).len() {
                                k.set_entry(i, r, c, rng.next_below(field.order()) as Elem);
                            }
                        }
                    }
                    assert_eq!(
                        extend_kernels(&net, &field, &k).unwrap(),
                        transfer_matrix(&net, &field, &k).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn own_coordinate_is_one_and_non_upstream_zero() {
        let net = fixtures::butterfly();
        let field = Field::prime(3).unwrap();
        let ext = extend_kernels(&net, &field, &fixtures::all_ones_kernels(&net)).unwrap();
        let omega = net.rate();
        for e in 0..net.n_channels() {
            assert_eq!(ext.get(e, omega + e), 1, "own error coordinate");
            for d in 0..net.n_channels() {
                if d != e && ext.get(e, omega + d) != 0 {
                    // d must be upstream of e: its head must reach tail(e).
                    assert!(d < e, "nonzero coordinate from downstream channel");
                }
            }
        }
    }

    #[test]
    fn decoding_views_and_spaces() {
        let net = fixtures::three_path();
        let field = Field::prime(5).unwrap();
        let code = LnecCode::new(net.clone(), field, fixtures::all_ones_kernels(&net)).unwrap();
        let t = net.node_index("t").unwrap();

        let view = code.decoding_view(&TargetRef::Node(t)).unwrap();
        assert_eq!(view.n_cols(), 3);
        let phi = view.message_space();
        assert_eq!(phi.row(0), &[1, 1, 1]);
        assert_eq!(phi.rank(code.field()), 1);

        let rho = ErrorPattern::from_ids(&net, ["e11"]).unwrap();
        let delta = view.error_space(&rho);
        assert_eq!(delta.row(0), &[1, 0, 0]);

        // Single-channel view is that channel's kernel.
        let e11 = net.channel_index("e11").unwrap();
        let cview = code.decoding_view(&TargetRef::Channels(vec![e11])).unwrap();
        assert_eq!(cview.n_cols(), 1);
        let col: Vec<Elem> = (0..1 + net.n_channels()).map(|d| cview.row(d)[0]).collect();
        assert_eq!(col, code.extended_kernel(e11));

        // All source-side channels: message block is all ones.
        let outs: Vec<usize> = net.outs(net.source()).to_vec();
        let oview = code.decoding_view(&TargetRef::Channels(outs)).unwrap();
        assert_eq!(oview.message_space().row(0), &[1, 1, 1]);
    }

    #[test]
    fn butterfly_pair_view_has_four_columns() {
        let net = fixtures::butterfly();
        let field = Field::prime(3).unwrap();
        let code = LnecCode::new(net.clone(), field, fixtures::all_ones_kernels(&net)).unwrap();
        let t1 = net.node_index("t1").unwrap();
        let t2 = net.node_index("t2").unwrap();
        let view = code.decoding_view(&TargetRef::Nodes(vec![t1, t2])).unwrap();
        assert_eq!(view.n_cols(), 4);
    }

    #[test]
    fn restriction_identities() {
        let net = fixtures::three_path();
        let field = Field::prime(5).unwrap();
        let code =
            LnecCode::new(net.clone(), field.clone(), fixtures::all_ones_kernels(&net)).unwrap();
        let omega = net.rate();
        let full = ErrorPattern::from_indices(&net, 0..net.n_channels()).unwrap();
        let rho = ErrorPattern::from_ids(&net, ["e11"]).unwrap();
        for e in 0..net.n_channels() {
            let v = code.extended_kernel(e);
            for pat in [&full, &rho] {
                let keep = restrict_kernel(v, omega, pat, Restriction::Keep);
                let comp = restrict_kernel(v, omega, pat, Restriction::Complement);
                let sum: Vec<Elem> = keep
                    .iter()
                    .zip(&comp)
                    .map(|(&a, &b)| field.add(a, b))
                    .collect();
                assert_eq!(sum, v, "keep + complement must reassemble the kernel");
            }
            assert_eq!(restrict_kernel(v, omega, &full, Restriction::Keep), v);
            assert!(restrict_kernel(v, omega, &full, Restriction::Complement)
                .iter()
                .all(|&x| x == 0));
        }
        // Projection example: branch-1 end kernel over (message, e11).
        let e12 = net.channel_index("e12").unwrap();
        let proj = restrict_kernel(code.extended_kernel(e12), omega, &rho, Restriction::Project);
        assert_eq!(proj, vec![1, 1]);
    }

    #[test]
    fn code_json_round_trip() {
        let net = fixtures::butterfly();
        let field = Field::prime(3).unwrap();
        let code = LnecCode::new(net.clone(), field, fixtures::all_ones_kernels(&net)).unwrap();
        let text = code.to_json();
        let back = LnecCode::from_json(&net, &text).unwrap();
        assert_eq!(back.extended_kernels(), code.extended_kernels());
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn code_json_rejects_wrong_shapes() {
        let net = fixtures::single_channel();
        let field = Field::prime(3).unwrap();
        let code = LnecCode::new(net.clone(), field, fixtures::all_ones_kernels(&net)).unwrap();
        let text = code.to_json().replace("d1'", "d9'");
        assert!(LnecCode::from_json(&net, &text).is_err());
    }
}
