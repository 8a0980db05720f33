//! Reverse-mode differentiation over vector-valued nodes.
//!
//! Nodes are evaluated eagerly as they are recorded, so decisions that depend on forward values
//! (free-running decoding) can be taken while the graph is being built.

use super::params::{Gradients, ModelParams, Slot};

pub(crate) type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Input,
    /// A row of a parameter matrix (embedding lookup).
    Row(Slot, usize),
    /// `W x + b`.
    Affine {
        w: Slot,
        b: Slot,
        x: NodeId,
    },
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Concat(Vec<NodeId>),
    Slice {
        x: NodeId,
        start: usize,
    },
    /// `x · softmax(logits)[1]` for a two-way logit vector.
    ScaleByProb {
        x: NodeId,
        logits: NodeId,
    },
    /// `-log softmax(logits)[class]`, a scalar.
    Nll {
        logits: NodeId,
        class: usize,
    },
    /// `Σ w_k · x_k` over scalar nodes.
    WeightedSum(Vec<(NodeId, f64)>),
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Tape {
    values: Vec<Vec<f64>>,
    ops: Vec<Op>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Two-way softmax, max-shifted.
pub(crate) fn softmax2(l: &[f64]) -> [f64; 2] {
    let m = l[0].max(l[1]);
    let (a, b) = ((l[0] - m).exp(), (l[1] - m).exp());
    let s = a + b;
    [a / s, b / s]
}

impl Tape {
    fn push(&mut self, op: Op, value: Vec<f64>) -> NodeId {
        self.ops.push(op);
        self.values.push(value);
        self.values.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.values[id]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn input(&mut self, v: Vec<f64>) -> NodeId {
        self.push(Op::Input, v)
    }

    pub fn zeros(&mut self, n: usize) -> NodeId {
        self.input(vec![0.0; n])
    }

    pub fn row(&mut self, p: &ModelParams, slot: Slot, r: usize) -> NodeId {
        let v = p.tensor(slot).row(r).to_vec();
        self.push(Op::Row(slot, r), v)
    }

    pub fn affine(&mut self, p: &ModelParams, w: Slot, b: Slot, x: NodeId) -> NodeId {
        let wt = p.tensor(w);
        let bias = &p.tensor(b).data;
        let xv = &self.values[x];
        debug_assert_eq!(wt.cols, xv.len(), "{w:?} expects {} inputs", wt.cols);
        let out = (0..wt.rows)
            .map(|r| {
                let row = wt.row(r);
                bias[r] + row.iter().zip(xv).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        self.push(Op::Affine { w, b, x }, out)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.values[a]
            .iter()
            .zip(&self.values[b])
            .map(|(x, y)| x + y)
            .collect();
        self.push(Op::Add(a, b), v)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.values[a]
            .iter()
            .zip(&self.values[b])
            .map(|(x, y)| x * y)
            .collect();
        self.push(Op::Mul(a, b), v)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.values[a].iter().map(|x| x.tanh()).collect();
        self.push(Op::Tanh(a), v)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.values[a].iter().map(|&x| sigmoid(x)).collect();
        self.push(Op::Sigmoid(a), v)
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let v = parts
            .iter()
            .flat_map(|&p| self.values[p].iter().copied())
            .collect();
        self.push(Op::Concat(parts.to_vec()), v)
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.values[x][start..start + len].to_vec();
        self.push(Op::Slice { x, start }, v)
    }

    pub fn scale_by_prob(&mut self, x: NodeId, logits: NodeId) -> NodeId {
        let p = softmax2(&self.values[logits])[1];
        let v = self.values[x].iter().map(|a| a * p).collect();
        self.push(Op::ScaleByProb { x, logits }, v)
    }

    pub fn nll(&mut self, logits: NodeId, class: usize) -> NodeId {
        let l = &self.values[logits];
        let m = l[0].max(l[1]);
        let lse = m + ((l[0] - m).exp() + (l[1] - m).exp()).ln();
        let v = vec![lse - l[class]];
        self.push(Op::Nll { logits, class }, v)
    }

    pub fn weighted_sum(&mut self, terms: Vec<(NodeId, f64)>) -> NodeId {
        let v = terms.iter().map(|&(n, w)| w * self.values[n][0]).sum();
        self.push(Op::WeightedSum(terms), vec![v])
    }

    /// Accumulates d(Σ seeds)/dθ into `grads`. Each seed is a scalar node with upstream 1.
    pub fn backward(&self, seeds: &[NodeId], params: &ModelParams, grads: &mut Gradients) {
        let mut g: Vec<Option<Vec<f64>>> = vec![None; self.values.len()];
        for &s in seeds {
            g[s] = Some(vec![1.0]);
        }
        fn acc(g: &mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &mut Vec<f64> {
            g[id].get_or_insert_with(|| vec![0.0; len])
        }
        for id in (0..self.ops.len()).rev() {
            let Some(gy) = g[id].take() else { continue };
            let y = &self.values[id];
            match &self.ops[id] {
                Op::Input => {}
                Op::Row(slot, r) => {
                    let cols = params.tensor(*slot).cols;
                    let dst = &mut grads.slot_mut(*slot)[r * cols..(r + 1) * cols];
                    for (d, v) in dst.iter_mut().zip(&gy) {
                        *d += v;
                    }
                }
                Op::Affine { w, b, x } => {
                    let wt = params.tensor(*w);
                    let xv = &self.values[*x];
                    {
                        let gw = grads.slot_mut(*w);
                        for (r, &gr) in gy.iter().enumerate() {
                            if gr == 0.0 {
                                continue;
                            }
                            let dst = &mut gw[r * wt.cols..(r + 1) * wt.cols];
                            for (d, xc) in dst.iter_mut().zip(xv) {
                                *d += gr * xc;
                            }
                        }
                    }
                    for (d, v) in grads.slot_mut(*b).iter_mut().zip(&gy) {
                        *d += v;
                    }
                    let gx = acc(&mut g, *x, xv.len());
                    for (r, &gr) in gy.iter().enumerate() {
                        if gr == 0.0 {
                            continue;
                        }
                        for (d, wv) in gx.iter_mut().zip(wt.row(r)) {
                            *d += gr * wv;
                        }
                    }
                }
                Op::Add(a, b) => {
                    for n in [*a, *b] {
                        for (d, v) in acc(&mut g, n, gy.len()).iter_mut().zip(&gy) {
                            *d += v;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.values[*a], &self.values[*b]);
                    for (d, (v, o)) in acc(&mut g, *a, gy.len()).iter_mut().zip(gy.iter().zip(bv)) {
                        *d += v * o;
                    }
                    for (d, (v, o)) in acc(&mut g, *b, gy.len()).iter_mut().zip(gy.iter().zip(av)) {
                        *d += v * o;
                    }
                }
                Op::Tanh(a) => {
                    for (d, (v, t)) in acc(&mut g, *a, gy.len()).iter_mut().zip(gy.iter().zip(y)) {
                        *d += v * (1.0 - t * t);
                    }
                }
                Op::Sigmoid(a) => {
                    for (d, (v, s)) in acc(&mut g, *a, gy.len()).iter_mut().zip(gy.iter().zip(y)) {
                        *d += v * s * (1.0 - s);
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.values[p].len();
                        for (d, v) in acc(&mut g, p, n).iter_mut().zip(&gy[off..off + n]) {
                            *d += v;
                        }
                        off += n;
                    }
                }
                Op::Slice { x, start } => {
                    let n = self.values[*x].len();
                    for (d, v) in acc(&mut g, *x, n)[*start..].iter_mut().zip(&gy) {
                        *d += v;
                    }
                }
                Op::ScaleByProb { x, logits } => {
                    let p = softmax2(&self.values[*logits])[1];
                    let xv = &self.values[*x];
                    let dp: f64 = gy.iter().zip(xv).map(|(a, b)| a * b).sum();
                    for (d, v) in acc(&mut g, *x, xv.len()).iter_mut().zip(&gy) {
                        *d += v * p;
                    }
                    let dl = dp * p * (1.0 - p);
                    let gl = acc(&mut g, *logits, 2);
                    gl[0] -= dl;
                    gl[1] += dl;
                }
                Op::Nll { logits, class } => {
                    let sm = softmax2(&self.values[*logits]);
                    let gl = acc(&mut g, *logits, 2);
                    for k in 0..2 {
                        gl[k] += gy[0] * (sm[k] - f64::from(u8::from(k == *class)));
                    }
                }
                Op::WeightedSum(terms) => {
                    for &(n, w) in terms {
                        acc(&mut g, n, 1)[0] += gy[0] * w;
                    }
                }
            }
        }
    }
}
