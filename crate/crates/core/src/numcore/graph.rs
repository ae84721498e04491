use std::borrow::Cow;

use super::Tensor;
use crate::{Error, Real, Result};

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op<T> {
    Leaf,
    EmbedSum { table: Var, ids: Vec<usize> },
    EmbedSeq { table: Var, ids: Vec<usize> },
    Conv1d { input: Var, kernels: Var, bias: Var },
    Relu(Var),
    MaxPool { input: Var, argmax: Vec<usize> },
    Concat(Vec<Var>),
    Affine { input: Var, weights: Var, bias: Var },
    Dot(Var, Var),
    Mse { preds: Vec<Var>, targets: Vec<T> },
    Scale(Var, T),
}

#[derive(Debug, Clone)]
struct Node<'a, T: Clone> {
    shape: Vec<usize>,
    value: Cow<'a, [T]>,
    op: Op<T>,
    requires_grad: bool,
}

/// Record of evaluated operations. Nodes are appended in evaluation order,
/// which is also a topological order for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct Graph<'a, T: Clone> {
    nodes: Vec<Node<'a, T>>,
}

/// Gradients of one scalar loss with respect to every node that needs them.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T> Gradients<T> {
    pub fn get(&self, var: Var) -> Option<&[T]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }
}

fn shape_err(msg: String) -> Error {
    Error::Shape(msg)
}

impl<'a, T: Real> Graph<'a, T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(
        &mut self,
        shape: Vec<usize>,
        value: Cow<'a, [T]>,
        op: Op<T>,
        requires_grad: bool,
    ) -> Var {
        debug_assert_eq!(shape.iter().product::<usize>(), value.len());
        self.nodes.push(Node {
            shape,
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// Borrows a tensor as a leaf. Gradients are tracked if the tensor's
    /// `requires_grad` flag is set.
    pub fn leaf(&mut self, tensor: &'a Tensor<T>) -> Var {
        self.push(
            tensor.shape().to_vec(),
            Cow::Borrowed(tensor.values()),
            Op::Leaf,
            tensor.requires_grad,
        )
    }

    /// Borrows a tensor as a differentiable leaf regardless of its flag.
    pub fn param(&mut self, tensor: &'a Tensor<T>) -> Var {
        let v = self.leaf(tensor);
        self.nodes[v.0].requires_grad = true;
        v
    }

    /// Owned constant vector.
    pub fn input(&mut self, values: Vec<T>) -> Var {
        self.push(vec![values.len()], Cow::Owned(values), Op::Leaf, false)
    }

    pub fn value(&self, var: Var) -> &[T] {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> &[usize] {
        &self.nodes[var.0].shape
    }

    /// Value of a one-element node.
    pub fn scalar(&self, var: Var) -> Result<T> {
        match *self.value(var) {
            [x] => Ok(x),
            ref v => Err(shape_err(format!(
                "expected a scalar, found {} values",
                v.len()
            ))),
        }
    }

    fn matrix_dims(&self, var: Var, what: &str) -> Result<(usize, usize)> {
        match *self.shape(var) {
            [r, c] => Ok((r, c)),
            ref s => Err(shape_err(format!("{what} must be 2-d, got {s:?}"))),
        }
    }

    fn check_ids(ids: &[usize], rows: usize) -> Result<()> {
        match ids.iter().find(|&&i| i >= rows) {
            Some(i) => Err(Error::OutOfRange(format!(
                "embedding id {i} outside table of {rows} rows"
            ))),
            None => Ok(()),
        }
    }

    /// Sum of the selected rows of a `V x e` table; an empty id list gives
    /// the zero vector.
    pub fn embedding_sum(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (rows, e) = self.matrix_dims(table, "embedding table")?;
        Self::check_ids(ids, rows)?;
        let t = self.value(table);
        let mut out = vec![T::zero(); e];
        for &i in ids {
            for (o, &x) in out.iter_mut().zip(&t[i * e..(i + 1) * e]) {
                *o += x;
            }
        }
        let rg = self.needs(&[table]);
        Ok(self.push(
            vec![e],
            Cow::Owned(out),
            Op::EmbedSum {
                table,
                ids: ids.to_vec(),
            },
            rg,
        ))
    }

    /// Stacks the selected rows into an `L x e` matrix.
    pub fn embedding_seq(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (rows, e) = self.matrix_dims(table, "embedding table")?;
        Self::check_ids(ids, rows)?;
        let t = self.value(table);
        let out: Vec<T> = ids
            .iter()
            .flat_map(|&i| t[i * e..(i + 1) * e].iter().copied())
            .collect();
        let rg = self.needs(&[table]);
        Ok(self.push(
            vec![ids.len(), e],
            Cow::Owned(out),
            Op::EmbedSeq {
                table,
                ids: ids.to_vec(),
            },
            rg,
        ))
    }

    /// Valid, stride-1 convolution of an `L x e` input with `f` kernels of
    /// shape `w x e`: `out[p, j] = bias[j] + sum_{a,b} in[p+a, b] k[j, a, b]`.
    pub fn conv1d(&mut self, input: Var, kernels: Var, bias: Var) -> Result<Var> {
        let (len, e) = self.matrix_dims(input, "conv input")?;
        let (f, w, ke) = match *self.shape(kernels) {
            [f, w, ke] => (f, w, ke),
            ref s => return Err(shape_err(format!("conv kernels must be 3-d, got {s:?}"))),
        };
        if ke != e {
            return Err(shape_err(format!("kernel depth {ke} != input width {e}")));
        }
        if self.shape(bias) != [f] {
            return Err(shape_err(format!(
                "conv bias {:?} != [{f}]",
                self.shape(bias)
            )));
        }
        if len < w {
            return Err(shape_err(format!(
                "input length {len} shorter than kernel width {w}"
            )));
        }
        let positions = len - w + 1;
        let (x, k, b) = (self.value(input), self.value(kernels), self.value(bias));
        let mut out = Vec::with_capacity(positions * f);
        for p in 0..positions {
            let window = &x[p * e..(p + w) * e];
            for j in 0..f {
                let kj = &k[j * w * e..(j + 1) * w * e];
                let mut acc = b[j];
                for (&xv, &kv) in window.iter().zip(kj) {
                    acc += xv * kv;
                }
                out.push(acc);
            }
        }
        let rg = self.needs(&[input, kernels, bias]);
        Ok(self.push(
            vec![positions, f],
            Cow::Owned(out),
            Op::Conv1d {
                input,
                kernels,
                bias,
            },
            rg,
        ))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out: Vec<T> = self.value(x).iter().map(|&v| v.max(T::zero())).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.needs(&[x]);
        self.push(shape, Cow::Owned(out), Op::Relu(x), rg)
    }

    /// Column-wise maximum of a `P x f` matrix. Ties resolve to the lowest
    /// position, which is also where the gradient goes.
    pub fn max_pool_over_time(&mut self, x: Var) -> Result<Var> {
        let (p, f) = self.matrix_dims(x, "pool input")?;
        if p == 0 {
            return Err(shape_err("max-pool over zero positions".into()));
        }
        let v = self.value(x);
        let mut argmax = vec![0usize; f];
        let mut out = v[..f].to_vec();
        for row in 1..p {
            for j in 0..f {
                let cand = v[row * f + j];
                if cand > out[j] {
                    out[j] = cand;
                    argmax[j] = row;
                }
            }
        }
        let rg = self.needs(&[x]);
        Ok(self.push(
            vec![f],
            Cow::Owned(out),
            Op::MaxPool { input: x, argmax },
            rg,
        ))
    }

    /// Flattened concatenation in argument order.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Empty("concat inputs"));
        }
        let out: Vec<T> = parts
            .iter()
            .flat_map(|&p| self.value(p).iter().copied())
            .collect();
        let rg = self.needs(parts);
        Ok(self.push(
            vec![out.len()],
            Cow::Owned(out),
            Op::Concat(parts.to_vec()),
            rg,
        ))
    }

    /// `weights . input + bias` with `weights` of shape `b x a`.
    pub fn affine(&mut self, input: Var, weights: Var, bias: Var) -> Result<Var> {
        let (rows, cols) = self.matrix_dims(weights, "affine weights")?;
        let a = self.value(input).len();
        if cols != a || self.value(bias).len() != rows {
            return Err(shape_err(format!(
                "affine: weights {rows}x{cols}, input {a}, bias {}",
                self.value(bias).len()
            )));
        }
        let (x, w, b) = (self.value(input), self.value(weights), self.value(bias));
        let out: Vec<T> = (0..rows)
            .map(|i| {
                let mut acc = b[i];
                for (&wv, &xv) in w[i * cols..(i + 1) * cols].iter().zip(x) {
                    acc += wv * xv;
                }
                acc
            })
            .collect();
        let rg = self.needs(&[input, weights, bias]);
        Ok(self.push(
            vec![rows],
            Cow::Owned(out),
            Op::Affine {
                input,
                weights,
                bias,
            },
            rg,
        ))
    }

    pub fn dot(&mut self, u: Var, x: Var) -> Result<Var> {
        let (a, b) = (self.value(u), self.value(x));
        if a.len() != b.len() {
            return Err(shape_err(format!(
                "dot of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        let mut acc = T::zero();
        for (&p, &q) in a.iter().zip(b) {
            acc += p * q;
        }
        let rg = self.needs(&[u, x]);
        Ok(self.push(vec![], Cow::Owned(vec![acc]), Op::Dot(u, x), rg))
    }

    /// `(1/n) sum (y_i - yhat_i)^2` over scalar predictions.
    pub fn mse_loss(&mut self, preds: &[Var], targets: &[T]) -> Result<Var> {
        if preds.is_empty() {
            return Err(Error::Empty("mse predictions"));
        }
        if preds.len() != targets.len() {
            return Err(shape_err(format!(
                "{} predictions for {} targets",
                preds.len(),
                targets.len()
            )));
        }
        let mut acc = T::zero();
        for (&p, &y) in preds.iter().zip(targets) {
            let r = self.scalar(p)? - y;
            acc += r * r;
        }
        let loss = acc / T::from_count(preds.len());
        let rg = self.needs(preds);
        Ok(self.push(
            vec![],
            Cow::Owned(vec![loss]),
            Op::Mse {
                preds: preds.to_vec(),
                targets: targets.to_vec(),
            },
            rg,
        ))
    }

    pub fn scale(&mut self, x: Var, alpha: T) -> Var {
        let out: Vec<T> = self.value(x).iter().map(|&v| v * alpha).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.needs(&[x]);
        self.push(shape, Cow::Owned(out), Op::Scale(x, alpha), rg)
    }

    /// Activation pattern of every non-smooth operation: which ReLU inputs
    /// are positive and which row each max-pool column selected. Two
    /// evaluations with equal signatures lie in the same smooth piece.
    pub fn kink_signature(&self) -> Vec<usize> {
        let mut sig = Vec::new();
        for node in &self.nodes {
            match &node.op {
                Op::Relu(x) => {
                    sig.extend(self.value(*x).iter().map(|&v| usize::from(v > T::zero())))
                }
                Op::MaxPool { argmax, .. } => sig.extend(argmax),
                _ => {}
            }
        }
        sig
    }

    /// Reverse pass from a scalar `loss`. Each recorded operation at or
    /// before `loss` is visited once, newest first.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).len() != 1 {
            return Err(shape_err(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<T>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![T::one()]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            {
                #[allow(clippy::type_complexity)]
                let mut acc = |var: Var, f: &mut dyn FnMut(&mut [T])| {
                    let n = &self.nodes[var.0];
                    if n.requires_grad {
                        let slot =
                            grads[var.0].get_or_insert_with(|| vec![T::zero(); n.value.len()]);
                        f(slot);
                    }
                };
                match &node.op {
                    Op::Leaf => {}
                    Op::EmbedSum { table, ids } => {
                        let e = g.len();
                        acc(*table, &mut |tg| {
                            for &i in ids {
                                for (t, &gv) in tg[i * e..(i + 1) * e].iter_mut().zip(&g) {
                                    *t += gv;
                                }
                            }
                        });
                    }
                    Op::EmbedSeq { table, ids } => {
                        let e = self.shape(*table)[1];
                        acc(*table, &mut |tg| {
                            for (pos, &i) in ids.iter().enumerate() {
                                let src = &g[pos * e..(pos + 1) * e];
                                for (t, &gv) in tg[i * e..(i + 1) * e].iter_mut().zip(src) {
                                    *t += gv;
                                }
                            }
                        });
                    }
                    Op::Conv1d {
                        input,
                        kernels,
                        bias,
                    } => {
                        let (f, w, e) = match *self.shape(*kernels) {
                            [f, w, e] => (f, w, e),
                            _ => unreachable!("checked in forward"),
                        };
                        let positions = node.shape[0];
                        let x = self.value(*input);
                        let k = self.value(*kernels);
                        acc(*bias, &mut |bg| {
                            for p in 0..positions {
                                for j in 0..f {
                                    bg[j] += g[p * f + j];
                                }
                            }
                        });
                        acc(*kernels, &mut |kg| {
                            for p in 0..positions {
                                let window = &x[p * e..(p + w) * e];
                                for j in 0..f {
                                    let gv = g[p * f + j];
                                    for (kv, &xv) in
                                        kg[j * w * e..(j + 1) * w * e].iter_mut().zip(window)
                                    {
                                        *kv += gv * xv;
                                    }
                                }
                            }
                        });
                        acc(*input, &mut |xg| {
                            for p in 0..positions {
                                for j in 0..f {
                                    let gv = g[p * f + j];
                                    let kj = &k[j * w * e..(j + 1) * w * e];
                                    for (xv, &kv) in xg[p * e..(p + w) * e].iter_mut().zip(kj) {
                                        *xv += gv * kv;
                                    }
                                }
                            }
                        });
                    }
                    Op::Relu(x) => {
                        let xv = self.value(*x);
                        acc(*x, &mut |xg| {
                            for ((d, &v), &gv) in xg.iter_mut().zip(xv).zip(&g) {
                                if v > T::zero() {
                                    *d += gv;
                                }
                            }
                        });
                    }
                    Op::MaxPool { input, argmax } => {
                        let f = argmax.len();
                        acc(*input, &mut |xg| {
                            for (j, &row) in argmax.iter().enumerate() {
                                xg[row * f + j] += g[j];
                            }
                        });
                    }
                    Op::Concat(parts) => {
                        let mut offset = 0;
                        for &p in parts {
                            let n = self.value(p).len();
                            let src = &g[offset..offset + n];
                            acc(p, &mut |pg| {
                                for (d, &gv) in pg.iter_mut().zip(src) {
                                    *d += gv;
                                }
                            });
                            offset += n;
                        }
                    }
                    Op::Affine {
                        input,
                        weights,
                        bias,
                    } => {
                        let x = self.value(*input);
                        let w = self.value(*weights);
                        let cols = x.len();
                        acc(*bias, &mut |bg| {
                            for (d, &gv) in bg.iter_mut().zip(&g) {
                                *d += gv;
                            }
                        });
                        acc(*weights, &mut |wg| {
                            for (i, &gv) in g.iter().enumerate() {
                                for (d, &xv) in wg[i * cols..(i + 1) * cols].iter_mut().zip(x) {
                                    *d += gv * xv;
                                }
                            }
                        });
                        acc(*input, &mut |xg| {
                            for (i, &gv) in g.iter().enumerate() {
                                for (d, &wv) in xg.iter_mut().zip(&w[i * cols..(i + 1) * cols]) {
                                    *d += gv * wv;
                                }
                            }
                        });
                    }
                    Op::Dot(u, x) => {
                        let gv = g[0];
                        let (uv, xv) = (self.value(*u), self.value(*x));
                        acc(*u, &mut |ug| {
                            for (d, &v) in ug.iter_mut().zip(xv) {
                                *d += gv * v;
                            }
                        });
                        acc(*x, &mut |xg| {
                            for (d, &v) in xg.iter_mut().zip(uv) {
                                *d += gv * v;
                            }
                        });
                    }
                    Op::Mse { preds, targets } => {
                        let scale = g[0] * T::from_count(2) / T::from_count(preds.len());
                        for (&p, &y) in preds.iter().zip(targets) {
                            let r = self.value(p)[0] - y;
                            acc(p, &mut |pg| pg[0] += scale * r);
                        }
                    }
                    Op::Scale(x, alpha) => {
                        acc(*x, &mut |xg| {
                            for (d, &gv) in xg.iter_mut().zip(&g) {
                                *d += gv * *alpha;
                            }
                        });
                    }
                }
            }
            if node.requires_grad && matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
            }
        }
        // Only leaves keep their gradients; interior buffers were consumed.
        Ok(Gradients { grads })
    }
}
