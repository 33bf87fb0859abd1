//! Deep Galerkin Method (DGM) network with exact spatial derivatives and a
//! hand-written reverse pass.
//!
//! Derivatives are carried as jets: for a list of input directions
//! `dirs = [i_1, …, i_D]` every hidden vector holds `C = 1 + 2D` channels,
//! channel 0 the value, channel `1 + k` the first derivative along `dirs[k]`
//! and channel `1 + D + k` the second derivative along `dirs[k]`.

use std::ops::Range;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

mod checkpoint;
mod jet;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
use jet::*;

const GATES: [&str; 4] = ["g", "z", "r", "h"];

/// Network parameters, stored flat in declaration order:
/// `W_in, b_in, (V^★, W^★, b^★ for ★ = g, z, r, h) per layer, W_out, b_out`.
/// Matrices are row-major with one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct DgmParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub width: usize,
    pub depth: usize,
    pub theta: Vec<f64>,
}

/// A named parameter block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub range: Range<usize>,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy)]
struct GateOffsets {
    v: usize,
    w: usize,
    b: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    w_in: usize,
    b_in: usize,
    gates: Vec<[GateOffsets; 4]>,
    w_out: usize,
    b_out: usize,
    len: usize,
}

fn layout(in_dim: usize, out_dim: usize, width: usize, depth: usize) -> Layout {
    let mut at = 0;
    let mut take = |n: usize| {
        let o = at;
        at += n;
        o
    };
    let w_in = take(width * in_dim);
    let b_in = take(width);
    let gates = (0..depth)
        .map(|_| {
            [0; 4].map(|_| GateOffsets {
                v: take(width * in_dim),
                w: take(width * width),
                b: take(width),
            })
        })
        .collect();
    let w_out = take(out_dim * width);
    let b_out = take(out_dim);
    Layout {
        w_in,
        b_in,
        gates,
        w_out,
        b_out,
        len: at,
    }
}

/// Number of parameters of a DGM network.
pub fn param_count(in_dim: usize, out_dim: usize, width: usize, depth: usize) -> usize {
    layout(in_dim, out_dim, width, depth).len
}

/// Xavier-uniform weights (bound `√(6 / (fan_in + fan_out))`) and zero
/// biases, drawn in declaration order from a seeded ChaCha8 stream.
pub fn init_dgm(in_dim: usize, out_dim: usize, width: usize, depth: usize, seed: u64) -> Result<DgmParams> {
    if in_dim == 0 || out_dim == 0 || width == 0 {
        return Err(Error::Shape(format!(
            "network dimensions must be positive (in {in_dim}, out {out_dim}, width {width})"
        )));
    }
    let mut p = DgmParams {
        in_dim,
        out_dim,
        width,
        depth,
        theta: vec![0.0; param_count(in_dim, out_dim, width, depth)],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for b in p.blocks() {
        if b.cols == 1 {
            continue;
        }
        // V blocks see the input (fan_in = in_dim) and feed `width` units
        let bound = (6.0 / (b.cols + b.rows) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        for x in &mut p.theta[b.range] {
            *x = dist.sample(&mut rng);
        }
    }
    Ok(p)
}

/// Outputs and spatial derivatives at one point. Spatial coordinates are the
/// first `in_dim - 1` inputs; the last input is time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub u: Vec<f64>,
    /// `grad_x[m][i] = ∂u_m/∂x_i`, `None` for masked-out components.
    pub grad_x: Vec<Option<Vec<f64>>>,
    /// `lap_x[m] = Σ_i ∂²u_m/∂x_i²`.
    pub lap_x: Vec<Option<f64>>,
}

impl DgmParams {
    fn layout(&self) -> Layout {
        layout(self.in_dim, self.out_dim, self.width, self.depth)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn spatial_dim(&self) -> usize {
        self.in_dim - 1
    }

    /// Blocks in declaration order. Biases have `cols == 1`.
    pub fn blocks(&self) -> Vec<Block> {
        let l = self.layout();
        let (w, i, o) = (self.width, self.in_dim, self.out_dim);
        let mut out = vec![
            Block {
                name: "W_in".into(),
                range: l.w_in..l.w_in + w * i,
                rows: w,
                cols: i,
            },
            Block {
                name: "b_in".into(),
                range: l.b_in..l.b_in + w,
                rows: w,
                cols: 1,
            },
        ];
        for (layer, gates) in l.gates.iter().enumerate() {
            for (g, off) in GATES.iter().zip(gates) {
                let n = layer + 1;
                out.push(Block {
                    name: format!("V^{g},{n}"),
                    range: off.v..off.v + w * i,
                    rows: w,
                    cols: i,
                });
                out.push(Block {
                    name: format!("W^{g},{n}"),
                    range: off.w..off.w + w * w,
                    rows: w,
                    cols: w,
                });
                out.push(Block {
                    name: format!("b^{g},{n}"),
                    range: off.b..off.b + w,
                    rows: w,
                    cols: 1,
                });
            }
        }
        out.push(Block {
            name: "W_out".into(),
            range: l.w_out..l.w_out + o * w,
            rows: o,
            cols: w,
        });
        out.push(Block {
            name: "b_out".into(),
            range: l.b_out..l.b_out + o,
            rows: o,
            cols: 1,
        });
        out
    }

    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 || self.width == 0 {
            return Err(Error::Shape("network dimensions must be positive".into()));
        }
        let want = param_count(self.in_dim, self.out_dim, self.width, self.depth);
        if self.theta.len() != want {
            return Err(Error::Shape(format!(
                "expected {want} parameters, found {}",
                self.theta.len()
            )));
        }
        for b in self.blocks() {
            if self.theta[b.range].iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("non-finite entry in block {}", b.name)));
            }
        }
        Ok(())
    }

    fn check_input(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.in_dim {
            return Err(Error::Shape(format!(
                "input of length {} for a network with in_dim {}",
                y.len(),
                self.in_dim
            )));
        }
        Ok(())
    }

    /// Network output `U(y)`.
    pub fn forward(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_input(y)?;
        let tape = Tape::forward(self, &self.layout(), y, &[]);
        Ok(tape.output().value_row())
    }

    /// Output, spatial gradient and spatial Laplacian, exact to round-off.
    /// Derivatives are reported for the components selected by
    /// `component_mask` (an empty mask selects all of them).
    pub fn forward_with_space_derivs(&self, y: &[f64], component_mask: &[bool]) -> Result<EvalResult> {
        self.check_input(y)?;
        if !component_mask.is_empty() && component_mask.len() != self.out_dim {
            return Err(Error::Shape(format!(
                "component mask of length {} for {} outputs",
                component_mask.len(),
                self.out_dim
            )));
        }
        let want = |m: usize| component_mask.is_empty() || component_mask[m];
        let d = self.spatial_dim();
        let dirs: Vec<usize> = (0..d).collect();
        let jet = self.jet(y, &dirs)?;
        Ok(EvalResult {
            u: (0..self.out_dim).map(|m| jet.value(m)).collect(),
            grad_x: (0..self.out_dim)
                .map(|m| want(m).then(|| (0..d).map(|k| jet.d1(m, k)).collect()))
                .collect(),
            lap_x: (0..self.out_dim).map(|m| want(m).then(|| jet.laplacian(m))).collect(),
        })
    }

    /// Output jet along the given input directions.
    pub fn jet(&self, y: &[f64], dirs: &[usize]) -> Result<OutputJet> {
        self.check_input(y)?;
        if let Some(&bad) = dirs.iter().find(|&&i| i >= self.in_dim) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.in_dim,
            });
        }
        Ok(Tape::forward(self, &self.layout(), y, dirs).output())
    }
}

/// Network outputs with their directional derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputJet {
    pub out_dim: usize,
    pub ndir: usize,
    /// Channel-major: `data[c * out_dim + m]`.
    pub data: Vec<f64>,
}

impl OutputJet {
    pub fn zeros(out_dim: usize, ndir: usize) -> Self {
        Self {
            out_dim,
            ndir,
            data: vec![0.0; (1 + 2 * ndir) * out_dim],
        }
    }

    pub fn value(&self, m: usize) -> f64 {
        self.data[m]
    }

    pub fn d1(&self, m: usize, k: usize) -> f64 {
        self.data[(1 + k) * self.out_dim + m]
    }

    pub fn d2(&self, m: usize, k: usize) -> f64 {
        self.data[(1 + self.ndir + k) * self.out_dim + m]
    }

    /// Sum of second derivatives over all directions.
    pub fn laplacian(&self, m: usize) -> f64 {
        (0..self.ndir).map(|k| self.d2(m, k)).sum()
    }

    pub fn value_mut(&mut self, m: usize) -> &mut f64 {
        &mut self.data[m]
    }

    pub fn d1_mut(&mut self, m: usize, k: usize) -> &mut f64 {
        &mut self.data[(1 + k) * self.out_dim + m]
    }

    pub fn d2_mut(&mut self, m: usize, k: usize) -> &mut f64 {
        &mut self.data[(1 + self.ndir + k) * self.out_dim + m]
    }

    fn value_row(&self) -> Vec<f64> {
        self.data[..self.out_dim].to_vec()
    }
}

/// A loss that is a sum over independent groups of points. Each group's
/// term may depend on the output jets of all its points.
pub trait GroupLoss: Sync {
    fn groups(&self) -> usize;

    /// Inputs of the points in group `g`.
    fn points(&self, g: usize) -> Vec<Vec<f64>>;

    /// Jet directions used for group `g`.
    fn directions(&self, g: usize) -> &[usize];

    /// Number of separately reported loss components.
    fn components(&self) -> usize {
        1
    }

    /// Component that group `g` contributes to.
    fn component(&self, _g: usize) -> usize {
        0
    }

    /// Value of group `g`'s term. When `cot` is given, also writes its
    /// derivative with respect to every output jet channel (zeroed on entry).
    fn eval(&self, g: usize, jets: &[OutputJet], cot: Option<&mut [OutputJet]>) -> f64;
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Loss total, its per-component split and (optionally) the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub total: f64,
    pub components: Vec<f64>,
    pub grad: Vec<f64>,
}

fn check_dirs(p: &DgmParams, dirs: &[usize]) -> Result<()> {
    match dirs.iter().find(|&&i| i >= p.in_dim) {
        Some(&bad) => Err(Error::IndexOutOfRange {
            index: bad,
            len: p.in_dim,
        }),
        None => Ok(()),
    }
}

fn group_jets(p: &DgmParams, lay: &Layout, loss: &impl GroupLoss, g: usize) -> Result<Vec<Tape>> {
    let dirs = loss.directions(g);
    check_dirs(p, dirs)?;
    loss.points(g)
        .iter()
        .map(|y| {
            p.check_input(y)?;
            Ok(Tape::forward(p, lay, y, dirs))
        })
        .collect()
}

fn finish(loss: &impl GroupLoss, parts: Vec<(usize, f64)>) -> (f64, Vec<f64>) {
    let mut comps = vec![CompensatedSum::default(); loss.components()];
    let mut total = CompensatedSum::default();
    for (c, v) in parts {
        comps[c].add(v);
        total.add(v);
    }
    (total.value(), comps.iter().map(CompensatedSum::value).collect())
}

/// Evaluates a group loss without gradients.
pub fn loss_value(p: &DgmParams, loss: &impl GroupLoss) -> Result<LossEval> {
    let lay = p.layout();
    let parts: Vec<Result<(usize, f64)>> = (0..loss.groups())
        .into_par_iter()
        .map(|g| {
            let jets: Vec<OutputJet> = group_jets(p, &lay, loss, g)?.iter().map(Tape::output).collect();
            let v = loss.eval(g, &jets, None);
            if !v.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: 0,
                    sample: Some(g),
                });
            }
            Ok((loss.component(g), v))
        })
        .collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let (total, components) = finish(loss, parts);
    Ok(LossEval {
        total,
        components,
        grad: Vec::new(),
    })
}

/// Loss value and its gradient with respect to every parameter.
///
/// Groups are processed in parallel. With `reproducible` the per-group
/// contributions are summed in group order, so results do not depend on
/// the thread count.
pub fn loss_gradient(p: &DgmParams, loss: &impl GroupLoss, reproducible: bool) -> Result<LossEval> {
    let lay = p.layout();
    let group = |g: usize| -> Result<(usize, f64, Vec<f64>)> {
        let tapes = group_jets(p, &lay, loss, g)?;
        let jets: Vec<OutputJet> = tapes.iter().map(Tape::output).collect();
        let mut cot: Vec<OutputJet> = jets.iter().map(|j| OutputJet::zeros(j.out_dim, j.ndir)).collect();
        let value = loss.eval(g, &jets, Some(&mut cot));
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: 0,
                sample: Some(g),
            });
        }
        let mut grad = vec![0.0; p.len()];
        for (t, c) in tapes.iter().zip(&cot) {
            t.backward(p, &lay, &c.data, &mut grad);
        }
        Ok((loss.component(g), value, grad))
    };

    let (parts, grad) = if reproducible {
        let results: Vec<Result<(usize, f64, Vec<f64>)>> = (0..loss.groups()).into_par_iter().map(group).collect();
        let mut parts = Vec::with_capacity(results.len());
        let mut grad = vec![0.0; p.len()];
        for r in results {
            let (c, v, g) = r?;
            parts.push((c, v));
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        (parts, grad)
    } else {
        let zero = || (Vec::new(), vec![0.0; p.len()]);
        (0..loss.groups())
            .into_par_iter()
            .map(group)
            .try_fold(zero, |(mut parts, mut grad), r| {
                let (c, v, g) = r?;
                parts.push((c, v));
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b;
                }
                Ok::<_, Error>((parts, grad))
            })
            .try_reduce(zero, |(mut p1, mut g1), (p2, g2)| {
                p1.extend(p2);
                for (a, b) in g1.iter_mut().zip(&g2) {
                    *a += b;
                }
                Ok((p1, g1))
            })?
    };
    for b in p.blocks() {
        if grad[b.range.clone()].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { block: b.name });
        }
    }
    let (total, components) = finish(loss, parts);
    Ok(LossEval {
        total,
        components,
        grad,
    })
}

/// Forward cache of one point.
struct Tape {
    y: Vec<f64>,
    dirs: Vec<usize>,
    c: usize,
    w: usize,
    /// `pre0, s0`, then per layer `g_pre, g, z_pre, z, r_pre, r, x, h_pre, h, s`.
    buf: Vec<f64>,
    out: Vec<f64>,
}

const PER_LAYER: usize = 10;
const G_PRE: usize = 0;
const G: usize = 1;
const Z_PRE: usize = 2;
const Z: usize = 3;
const R_PRE: usize = 4;
const R: usize = 5;
const X: usize = 6;
const H_PRE: usize = 7;
const H: usize = 8;
const S: usize = 9;

impl Tape {
    fn slot(&self, i: usize) -> Range<usize> {
        let n = self.c * self.w;
        i * n..(i + 1) * n
    }

    fn layer_slot(&self, layer: usize, which: usize) -> Range<usize> {
        self.slot(2 + layer * PER_LAYER + which)
    }

    /// `S^ℓ` for `ℓ = 0..=depth`.
    fn s_slot(&self, layer: usize) -> Range<usize> {
        if layer == 0 {
            self.slot(1)
        } else {
            self.layer_slot(layer - 1, S)
        }
    }

    fn forward(p: &DgmParams, lay: &Layout, y: &[f64], dirs: &[usize]) -> Tape {
        let w = p.width;
        let nd = dirs.len();
        let c = 1 + 2 * nd;
        let n = c * w;
        let th = &p.theta;
        let mut t = Tape {
            y: y.to_vec(),
            dirs: dirs.to_vec(),
            c,
            w,
            buf: vec![0.0; (2 + PER_LAYER * p.depth) * n],
            out: vec![0.0; c * p.out_dim],
        };

        {
            let (pre, rest) = t.buf.split_at_mut(n);
            input_affine(&th[lay.w_in..], &th[lay.b_in..lay.b_in + w], y, dirs, w, pre);
            tanh_forward(pre, &mut rest[..n], nd, w);
        }
        for (layer, off) in lay.gates.iter().enumerate() {
            let base = (2 + layer * PER_LAYER) * n;
            let (before, cur) = t.buf.split_at_mut(base);
            let s_prev = &before[before.len() - n..];
            let (cur, _) = cur.split_at_mut(PER_LAYER * n);
            let mut slots: Vec<&mut [f64]> = cur.chunks_mut(n).collect();

            for (gi, which) in [(0, G_PRE), (1, Z_PRE), (2, R_PRE)] {
                let o = off[gi];
                let pre = &mut *slots[which];
                input_affine(&th[o.v..], &th[o.b..o.b + w], y, dirs, w, pre);
                add_matvec(&th[o.w..o.w + w * w], s_prev, w, w, c, pre);
            }
            for (pre, out) in [(G_PRE, G), (Z_PRE, Z), (R_PRE, R)] {
                let (a, b) = two_slots(&mut slots, pre, out);
                tanh_forward(a, b, nd, w);
            }
            {
                let (r, x) = two_slots(&mut slots, R, X);
                hadamard(s_prev, r, x, nd, w);
            }
            {
                let o = off[3];
                let (x, pre) = two_slots(&mut slots, X, H_PRE);
                input_affine(&th[o.v..], &th[o.b..o.b + w], y, dirs, w, pre);
                add_matvec(&th[o.w..o.w + w * w], x, w, w, c, pre);
            }
            {
                let (a, b) = two_slots(&mut slots, H_PRE, H);
                tanh_forward(a, b, nd, w);
            }
            // S = H - G ⊙ H + Z ⊙ S_prev
            let mut s_new = vec![0.0; n];
            {
                let mut tmp = vec![0.0; n];
                hadamard(slots[G], slots[H], &mut tmp, nd, w);
                hadamard(slots[Z], s_prev, &mut s_new, nd, w);
                for ((s, h), gh) in s_new.iter_mut().zip(slots[H].iter()).zip(&tmp) {
                    *s += h - gh;
                }
            }
            slots[S].copy_from_slice(&s_new);
        }

        let s_last = t.s_slot(p.depth);
        let mut out = vec![0.0; c * p.out_dim];
        for ch in 0..c {
            for m in 0..p.out_dim {
                let row = &th[lay.w_out + m * w..lay.w_out + (m + 1) * w];
                let s = &t.buf[s_last.start + ch * w..s_last.start + (ch + 1) * w];
                out[ch * p.out_dim + m] = dot(row, s) + if ch == 0 { th[lay.b_out + m] } else { 0.0 };
            }
        }
        t.out = out;
        t
    }

    fn output(&self) -> OutputJet {
        OutputJet {
            out_dim: self.out.len() / self.c,
            ndir: self.dirs.len(),
            data: self.out.clone(),
        }
    }

    /// Accumulates `∂(Σ dout · out)/∂θ` into `grad`.
    fn backward(&self, p: &DgmParams, lay: &Layout, dout: &[f64], grad: &mut [f64]) {
        let (w, c, nd) = (self.w, self.c, self.dirs.len());
        let n = c * w;
        let th = &p.theta;
        let y = &self.y;
        let dirs = &self.dirs;

        // output layer
        let s_last = &self.buf[self.s_slot(p.depth)];
        let mut ds = vec![0.0; n];
        for ch in 0..c {
            for m in 0..p.out_dim {
                let g = dout[ch * p.out_dim + m];
                if g == 0.0 {
                    continue;
                }
                let row = lay.w_out + m * w;
                axpy(g, &s_last[ch * w..(ch + 1) * w], &mut grad[row..row + w]);
                axpy(g, &th[row..row + w], &mut ds[ch * w..(ch + 1) * w]);
                if ch == 0 {
                    grad[lay.b_out + m] += g;
                }
            }
        }

        let mut d_pre = vec![0.0; n];
        let mut d_a = vec![0.0; n];
        let mut d_b = vec![0.0; n];
        for layer in (0..p.depth).rev() {
            let off = &lay.gates[layer];
            let sl = |which| &self.buf[self.layer_slot(layer, which)];
            let s_prev = &self.buf[self.s_slot(layer)];
            let mut ds_prev = vec![0.0; n];

            // S = H - G ⊙ H + Z ⊙ S_prev
            let mut dh = ds.clone();
            let mut dg = vec![0.0; n];
            d_a.iter_mut().for_each(|x| *x = 0.0);
            d_b.iter_mut().for_each(|x| *x = 0.0);
            hadamard_back(sl(G), sl(H), &ds, &mut d_a, &mut d_b, nd, w);
            for i in 0..n {
                dg[i] -= d_a[i];
                dh[i] -= d_b[i];
            }
            let mut dz = vec![0.0; n];
            hadamard_back(sl(Z), s_prev, &ds, &mut dz, &mut ds_prev, nd, w);

            // H = tanh(V^h y + W^h X + b^h)
            tanh_backward(sl(H_PRE), sl(H), &dh, &mut d_pre, nd, w);
            let mut dx = vec![0.0; n];
            gate_param_grads(off[3], &d_pre, sl(X), y, dirs, w, c, grad);
            add_matvec_t(&th[off[3].w..off[3].w + w * w], &d_pre, w, w, c, &mut dx);

            // X = S_prev ⊙ R
            let mut dr = vec![0.0; n];
            hadamard_back(s_prev, sl(R), &dx, &mut ds_prev, &mut dr, nd, w);

            for (gi, pre, out, d) in [(0, G_PRE, G, &dg), (1, Z_PRE, Z, &dz), (2, R_PRE, R, &dr)] {
                tanh_backward(sl(pre), sl(out), d, &mut d_pre, nd, w);
                gate_param_grads(off[gi], &d_pre, s_prev, y, dirs, w, c, grad);
                add_matvec_t(&th[off[gi].w..off[gi].w + w * w], &d_pre, w, w, c, &mut ds_prev);
            }
            ds = ds_prev;
        }

        // S^0 = tanh(W_in y + b_in)
        let pre0 = &self.buf[self.slot(0)];
        let s0 = &self.buf[self.slot(1)];
        tanh_backward(pre0, s0, &ds, &mut d_pre, nd, w);
        input_param_grads(lay.w_in, lay.b_in, &d_pre, y, dirs, w, grad);
    }
}

fn two_slots<'a>(slots: &'a mut [&mut [f64]], a: usize, b: usize) -> (&'a [f64], &'a mut [f64]) {
    debug_assert!(a < b);
    let (lo, hi) = slots.split_at_mut(b);
    (&*lo[a], &mut *hi[0])
}

#[allow(clippy::too_many_arguments)]
fn gate_param_grads(
    off: GateOffsets,
    d_pre: &[f64],
    s_in: &[f64],
    y: &[f64],
    dirs: &[usize],
    w: usize,
    c: usize,
    grad: &mut [f64],
) {
    input_param_grads(off.v, off.b, d_pre, y, dirs, w, grad);
    outer_acc(d_pre, s_in, w, w, c, &mut grad[off.w..off.w + w * w]);
}

/// Gradient of `V · y_jet + b` with respect to `V` and `b`.
fn input_param_grads(v: usize, b: usize, d_pre: &[f64], y: &[f64], dirs: &[usize], w: usize, grad: &mut [f64]) {
    let in_dim = y.len();
    for i in 0..w {
        let g0 = d_pre[i];
        grad[b + i] += g0;
        let row = v + i * in_dim;
        for (col, yc) in y.iter().enumerate() {
            grad[row + col] += g0 * yc;
        }
        for (k, &dir) in dirs.iter().enumerate() {
            grad[row + dir] += d_pre[(1 + k) * w + i];
        }
    }
}
