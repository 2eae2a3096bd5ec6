//! Minimal 1-D layers with hand-written backward passes.
//!
//! Activations are `(batch, channels, length)` tensors stored row-major.
//! Every layer caches what its backward pass needs during `forward`, and
//! `backward` accumulates parameter gradients and returns the input gradient.

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub data: Vec<T>,
    pub batch: usize,
    pub channels: usize,
    pub len: usize,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(batch: usize, channels: usize, len: usize) -> Self {
        Self {
            data: vec![T::zero(); batch * channels * len],
            batch,
            channels,
            len,
        }
    }

    pub fn from_vec(data: Vec<T>, batch: usize, channels: usize, len: usize) -> Self {
        assert_eq!(data.len(), batch * channels * len, "tensor shape");
        Self {
            data,
            batch,
            channels,
            len,
        }
    }

    #[inline]
    pub fn row(&self, b: usize, c: usize) -> &[T] {
        let o = (b * self.channels + c) * self.len;
        &self.data[o..o + self.len]
    }

    #[inline]
    pub fn row_mut(&mut self, b: usize, c: usize) -> &mut [T] {
        let o = (b * self.channels + c) * self.len;
        &mut self.data[o..o + self.len]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        (self.batch, self.channels, self.len) == (other.batch, other.channels, other.len)
    }
}

/// Trainable values with their accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub value: Vec<T>,
    pub grad: Vec<T>,
}

impl<T: Real> Param<T> {
    pub fn new(value: Vec<T>) -> Self {
        let grad = vec![T::zero(); value.len()];
        Self { value, grad }
    }

    /// Uniform in `±1/√fan_in`.
    pub fn uniform(n: usize, fan_in: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).unwrap();
        Self::new((0..n).map(|_| T::lit(dist.sample(rng))).collect())
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = T::zero());
    }
}

pub const KERNEL: usize = 5;
const PAD: usize = KERNEL / 2;

/// Length-preserving convolution with zero padding.
#[derive(Debug, Clone)]
pub struct Conv1d<T> {
    pub cin: usize,
    pub cout: usize,
    /// `[cout][cin][KERNEL]`
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Real> Conv1d<T> {
    pub fn new(cin: usize, cout: usize, rng: &mut impl Rng) -> Self {
        let fan_in = cin * KERNEL;
        Self {
            cin,
            cout,
            weight: Param::uniform(cout * cin * KERNEL, fan_in, rng),
            bias: Param::uniform(cout, fan_in, rng),
            input: None,
        }
    }

    pub fn forward(&mut self, x: Tensor<T>) -> Tensor<T> {
        assert_eq!(x.channels, self.cin, "conv input channels");
        let l = x.len;
        let mut y = Tensor::zeros(x.batch, self.cout, l);
        for b in 0..x.batch {
            for co in 0..self.cout {
                let out = y.row_mut(b, co);
                out.iter_mut().for_each(|v| *v = self.bias.value[co]);
                for ci in 0..self.cin {
                    let inp = x.row(b, ci);
                    let w = &self.weight.value[(co * self.cin + ci) * KERNEL..][..KERNEL];
                    for (k, &wk) in w.iter().enumerate() {
                        // out[p] += w[k] * in[p + k - PAD]
                        let (o_lo, i_lo) = if k < PAD { (PAD - k, 0) } else { (0, k - PAD) };
                        let Some(n) = l.checked_sub(o_lo.max(i_lo)) else {
                            continue;
                        };
                        for (o, i) in out[o_lo..o_lo + n].iter_mut().zip(&inp[i_lo..i_lo + n]) {
                            *o += wk * *i;
                        }
                    }
                }
            }
        }
        self.input = Some(x);
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self.input.as_ref().expect("forward before backward");
        let l = x.len;
        let mut dx = Tensor::zeros(x.batch, self.cin, l);
        for b in 0..x.batch {
            for co in 0..self.cout {
                let g = dy.row(b, co);
                self.bias.grad[co] += g.iter().fold(T::zero(), |s, v| s + *v);
                for ci in 0..self.cin {
                    let inp = x.row(b, ci);
                    let base = (co * self.cin + ci) * KERNEL;
                    for k in 0..KERNEL {
                        let (o_lo, i_lo) = if k < PAD { (PAD - k, 0) } else { (0, k - PAD) };
                        let Some(n) = l.checked_sub(o_lo.max(i_lo)) else {
                            continue;
                        };
                        let g = &g[o_lo..o_lo + n];
                        let mut acc = T::zero();
                        for (gv, iv) in g.iter().zip(&inp[i_lo..i_lo + n]) {
                            acc += *gv * *iv;
                        }
                        self.weight.grad[base + k] += acc;
                        let wk = self.weight.value[base + k];
                        let dxr = &mut dx.row_mut(b, ci)[i_lo..i_lo + n];
                        for (d, gv) in dxr.iter_mut().zip(g) {
                            *d += wk * *gv;
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param<T>; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

/// Per-channel normalization over batch and length.
#[derive(Debug, Clone)]
pub struct BatchNorm1d<T> {
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub momentum: T,
    pub eps: T,
    xhat: Option<Tensor<T>>,
    inv_std: Vec<T>,
    trained: bool,
}

impl<T: Real> BatchNorm1d<T> {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Param::new(vec![T::one(); channels]),
            beta: Param::new(vec![T::zero(); channels]),
            running_mean: vec![T::zero(); channels],
            running_var: vec![T::one(); channels],
            momentum: T::lit(0.1),
            eps: T::lit(1e-5),
            xhat: None,
            inv_std: vec![T::zero(); channels],
            trained: false,
        }
    }

    /// Batch statistics when `train`, running averages otherwise.
    pub fn forward(&mut self, mut x: Tensor<T>, train: bool) -> Tensor<T> {
        let c_n = x.channels;
        let count = x.batch * x.len;
        let nf = T::from_count(count);
        for c in 0..c_n {
            let (mean, inv_std) = if train {
                let mut s = T::zero();
                for b in 0..x.batch {
                    s += x.row(b, c).iter().fold(T::zero(), |a, v| a + *v);
                }
                let mean = s / nf;
                let mut ss = T::zero();
                for b in 0..x.batch {
                    ss += x.row(b, c).iter().fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean));
                }
                let var = ss / nf;
                let unbiased = if count > 1 { ss / T::from_count(count - 1) } else { var };
                let m = self.momentum;
                self.running_mean[c] = (T::one() - m) * self.running_mean[c] + m * mean;
                self.running_var[c] = (T::one() - m) * self.running_var[c] + m * unbiased;
                (mean, T::one() / (var + self.eps).sqrt())
            } else {
                (self.running_mean[c], T::one() / (self.running_var[c] + self.eps).sqrt())
            };
            self.inv_std[c] = inv_std;
            for b in 0..x.batch {
                x.row_mut(b, c).iter_mut().for_each(|v| *v = (*v - mean) * inv_std);
            }
        }
        self.trained = train;
        let mut y = x.clone();
        self.xhat = Some(x);
        for c in 0..c_n {
            let (g, be) = (self.gamma.value[c], self.beta.value[c]);
            for b in 0..y.batch {
                y.row_mut(b, c).iter_mut().for_each(|v| *v = g * *v + be);
            }
        }
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let xhat = self.xhat.as_ref().expect("forward before backward");
        let nf = T::from_count(xhat.batch * xhat.len);
        let mut dx = Tensor::zeros(xhat.batch, xhat.channels, xhat.len);
        for c in 0..xhat.channels {
            let (mut sum_dy, mut sum_dy_xhat) = (T::zero(), T::zero());
            for b in 0..xhat.batch {
                for (g, xh) in dy.row(b, c).iter().zip(xhat.row(b, c)) {
                    sum_dy += *g;
                    sum_dy_xhat += *g * *xh;
                }
            }
            self.beta.grad[c] += sum_dy;
            self.gamma.grad[c] += sum_dy_xhat;
            let k = self.gamma.value[c] * self.inv_std[c];
            for b in 0..xhat.batch {
                let (g, xh) = (dy.row(b, c), xhat.row(b, c));
                let d = dx.row_mut(b, c);
                for p in 0..d.len() {
                    d[p] = if self.trained {
                        k * (g[p] - (sum_dy + xh[p] * sum_dy_xhat) / nf)
                    } else {
                        k * g[p]
                    };
                }
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param<T>; 2] {
        [&mut self.gamma, &mut self.beta]
    }
}

#[derive(Debug, Clone, Default)]
pub struct Relu {
    mask: Vec<bool>,
}

impl Relu {
    pub fn forward<T: Real>(&mut self, mut x: Tensor<T>) -> Tensor<T> {
        self.mask = x.data.iter().map(|v| *v > T::zero()).collect();
        x.data.iter_mut().for_each(|v| *v = v.max(T::zero()));
        x
    }

    pub fn backward<T: Real>(&self, mut dy: Tensor<T>) -> Tensor<T> {
        for (d, m) in dy.data.iter_mut().zip(&self.mask) {
            if !m {
                *d = T::zero();
            }
        }
        dy
    }
}

/// Window 2, stride 2; the first maximum wins ties.
#[derive(Debug, Clone, Default)]
pub struct MaxPool2 {
    argmax: Vec<usize>,
    in_len: usize,
}

impl MaxPool2 {
    pub fn forward<T: Real>(&mut self, x: &Tensor<T>) -> Tensor<T> {
        assert!(x.len % 2 == 0, "pooling needs an even length");
        let half = x.len / 2;
        let mut y = Tensor::zeros(x.batch, x.channels, half);
        self.argmax = Vec::with_capacity(y.data.len());
        self.in_len = x.len;
        for (r, out) in y.data.chunks_mut(half).enumerate() {
            let inp = &x.data[r * x.len..(r + 1) * x.len];
            for (p, o) in out.iter_mut().enumerate() {
                let (a, b) = (inp[2 * p], inp[2 * p + 1]);
                let pick = if b > a { 1 } else { 0 };
                *o = if pick == 1 { b } else { a };
                self.argmax.push(r * x.len + 2 * p + pick);
            }
        }
        y
    }

    pub fn backward<T: Real>(&self, dy: &Tensor<T>) -> Tensor<T> {
        let mut dx = Tensor::zeros(dy.batch, dy.channels, self.in_len);
        for (g, &idx) in dy.data.iter().zip(&self.argmax) {
            dx.data[idx] += *g;
        }
        dx
    }
}

/// Nearest-neighbour upsampling by 2.
pub fn upsample2<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let mut y = Tensor::zeros(x.batch, x.channels, x.len * 2);
    for (o, v) in y.data.chunks_mut(2).zip(&x.data) {
        o[0] = *v;
        o[1] = *v;
    }
    y
}

pub fn upsample2_backward<T: Real>(dy: &Tensor<T>) -> Tensor<T> {
    let mut dx = Tensor::zeros(dy.batch, dy.channels, dy.len / 2);
    for (d, g) in dx.data.iter_mut().zip(dy.data.chunks(2)) {
        *d = g[0] + g[1];
    }
    dx
}

/// Channel concatenation `[a, b]`.
pub fn concat<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    assert!(a.batch == b.batch && a.len == b.len, "concat shapes");
    let mut y = Tensor::zeros(a.batch, a.channels + b.channels, a.len);
    let (sa, sb) = (a.channels * a.len, b.channels * b.len);
    for n in 0..a.batch {
        let o = n * (sa + sb);
        y.data[o..o + sa].copy_from_slice(&a.data[n * sa..(n + 1) * sa]);
        y.data[o + sa..o + sa + sb].copy_from_slice(&b.data[n * sb..(n + 1) * sb]);
    }
    y
}

/// Splits a concatenation gradient back into its two parts.
pub fn split<T: Real>(dy: &Tensor<T>, first_channels: usize) -> (Tensor<T>, Tensor<T>) {
    let cb = dy.channels - first_channels;
    let mut a = Tensor::zeros(dy.batch, first_channels, dy.len);
    let mut b = Tensor::zeros(dy.batch, cb, dy.len);
    let (sa, sb) = (first_channels * dy.len, cb * dy.len);
    for n in 0..dy.batch {
        let o = n * (sa + sb);
        a.data[n * sa..(n + 1) * sa].copy_from_slice(&dy.data[o..o + sa]);
        b.data[n * sb..(n + 1) * sb].copy_from_slice(&dy.data[o + sa..o + sa + sb]);
    }
    (a, b)
}

/// Fully connected layer on flattened `(channels·len)` features.
#[derive(Debug, Clone)]
pub struct Linear<T> {
    pub inputs: usize,
    pub outputs: usize,
    /// `[outputs][inputs]`
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Real> Linear<T> {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        Self {
            inputs,
            outputs,
            weight: Param::uniform(inputs * outputs, inputs, rng),
            bias: Param::uniform(outputs, inputs, rng),
            input: None,
        }
    }

    /// Output has shape `(batch, outputs, 1)`.
    pub fn forward(&mut self, x: Tensor<T>) -> Tensor<T> {
        let n_in = x.channels * x.len;
        assert_eq!(n_in, self.inputs, "linear input size");
        let mut y = Tensor::zeros(x.batch, self.outputs, 1);
        for b in 0..x.batch {
            let inp = &x.data[b * n_in..(b + 1) * n_in];
            for o in 0..self.outputs {
                let w = &self.weight.value[o * n_in..(o + 1) * n_in];
                y.data[b * self.outputs + o] =
                    w.iter().zip(inp).fold(self.bias.value[o], |s, (a, c)| s + *a * *c);
            }
        }
        self.input = Some(x);
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self.input.as_ref().expect("forward before backward");
        let n_in = self.inputs;
        let mut dx = Tensor::zeros(x.batch, x.channels, x.len);
        for b in 0..x.batch {
            let inp = &x.data[b * n_in..(b + 1) * n_in];
            for o in 0..self.outputs {
                let g = dy.data[b * self.outputs + o];
                self.bias.grad[o] += g;
                let wg = &mut self.weight.grad[o * n_in..(o + 1) * n_in];
                for (w, i) in wg.iter_mut().zip(inp) {
                    *w += g * *i;
                }
                let w = &self.weight.value[o * n_in..(o + 1) * n_in];
                for (d, wv) in dx.data[b * n_in..(b + 1) * n_in].iter_mut().zip(w) {
                    *d += g * *wv;
                }
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param<T>; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(lr: T) -> Self {
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// Updates every parameter from its gradient; the order of `params` must
    /// be the same on every call.
    pub fn step(&mut self, params: &mut [&mut Param<T>]) {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![T::zero(); p.value.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let c1 = T::one() - self.beta1.powi(self.step);
        let c2 = T::one() - self.beta2.powi(self.step);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                m[i] = self.beta1 * m[i] + (T::one() - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (T::one() - self.beta2) * g * g;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p.value[i] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, b: usize, c: usize, l: usize) -> Tensor<f64> {
        let d = Uniform::new(-1.0, 1.0).unwrap();
        Tensor::from_vec((0..b * c * l).map(|_| d.sample(rng)).collect(), b, c, l)
    }

    /// `Σ w ⊙ f(x)` with fixed random weights `w`; returns (loss, dL/dy = w).
    fn probe(y: &Tensor<f64>, w: &[f64]) -> f64 {
        y.data.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// Relative error with an absolute floor for finite-difference noise.
    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / (a.abs().max(b.abs()) + 1e-4)
    }

    /// Checks input and parameter gradients of `layer` by central differences.
    fn check<L>(
        layer: &mut L,
        x: Tensor<f64>,
        fwd: impl Fn(&mut L, Tensor<f64>) -> Tensor<f64>,
        bwd: impl Fn(&mut L, &Tensor<f64>) -> Tensor<f64>,
        params: impl Fn(&mut L) -> Vec<&mut Param<f64>>,
        rng: &mut ChaCha8Rng,
    ) {
        let y = fwd(layer, x.clone());
        let d = Uniform::new(-1.0, 1.0).unwrap();
        let w: Vec<f64> = (0..y.data.len()).map(|_| d.sample(rng)).collect();
        params(layer).into_iter().for_each(|p| p.zero_grad());
        let mut dy = y.clone();
        dy.data.copy_from_slice(&w);
        let dx = bwd(layer, &dy);
        let h = 1e-6;
        for i in 0..x.data.len() {
            let mut xp = x.clone();
            xp.data[i] += h;
            let mut xm = x.clone();
            xm.data[i] -= h;
            let num = (probe(&fwd(layer, xp), &w) - probe(&fwd(layer, xm), &w)) / (2.0 * h);
            assert!(rel_err(dx.data[i], num) < 1e-4, "input {i}: {} vs {num}", dx.data[i]);
        }
        let n_params = params(layer).len();
        for pi in 0..n_params {
            let len = params(layer)[pi].value.len();
            for i in 0..len {
                let analytic = params(layer)[pi].grad[i];
                params(layer)[pi].value[i] += h;
                let lp = probe(&fwd(layer, x.clone()), &w);
                params(layer)[pi].value[i] -= 2.0 * h;
                let lm = probe(&fwd(layer, x.clone()), &w);
                params(layer)[pi].value[i] += h;
                let num = (lp - lm) / (2.0 * h);
                assert!(rel_err(analytic, num) < 1e-4, "param {pi}[{i}]: {analytic} vs {num}");
            }
        }
    }

    #[test]
    fn conv_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut conv = Conv1d::<f64>::new(3, 2, &mut rng);
        let x = rand_tensor(&mut rng, 2, 3, 7);
        check(&mut conv, x, |l, x| l.forward(x), |l, d| l.backward(d), |l| l.params_mut().into_iter().collect(), &mut rng);
    }

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut conv = Conv1d::<f64>::new(2, 3, &mut rng);
        let x = rand_tensor(&mut rng, 1, 2, 6);
        let y = conv.forward(x.clone());
        for co in 0..3 {
            for p in 0..6i64 {
                let mut s = conv.bias.value[co];
                for ci in 0..2 {
                    for k in 0..5i64 {
                        let q = p + k - 2;
                        if (0..6).contains(&q) {
                            s += conv.weight.value[(co * 2 + ci) * 5 + k as usize] * x.row(0, ci)[q as usize];
                        }
                    }
                }
                assert!((y.row(0, co)[p as usize] - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn batchnorm_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut bn = BatchNorm1d::<f64>::new(3);
        bn.gamma.value = vec![1.3, -0.7, 0.4];
        bn.beta.value = vec![0.1, 0.2, -0.3];
        let x = rand_tensor(&mut rng, 3, 3, 4);
        check(&mut bn, x.clone(), |l, x| l.forward(x, true), |l, d| l.backward(d), |l| l.params_mut().into_iter().collect(), &mut rng);
        check(&mut bn, x, |l, x| l.forward(x, false), |l, d| l.backward(d), |l| l.params_mut().into_iter().collect(), &mut rng);
    }

    #[test]
    fn batchnorm_normalizes_and_tracks_running_stats() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut bn = BatchNorm1d::<f64>::new(2);
        let x = rand_tensor(&mut rng, 4, 2, 8);
        let y = bn.forward(x.clone(), true);
        for c in 0..2 {
            let vals: Vec<f64> = (0..4).flat_map(|b| y.row(b, c).to_vec()).collect();
            let mean = vals.iter().sum::<f64>() / 32.0;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 32.0;
            assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-3);
        }
        for _ in 0..200 {
            bn.forward(x.clone(), true);
        }
        let train = bn.forward(x.clone(), true);
        let eval = bn.forward(x, false);
        // unbiased running variance differs from the batch variance by 32/31
        for (a, b) in train.data.iter().zip(&eval.data) {
            assert!((a - b).abs() < 0.05);
        }
    }

    #[test]
    fn relu_pool_upsample_concat_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = rand_tensor(&mut rng, 2, 2, 6);
        let mut relu = Relu::default();
        check(&mut relu, x.clone(), |l, x| l.forward(x), |l, d| l.backward(d.clone()), |_| vec![], &mut rng);
        let mut pool = MaxPool2::default();
        check(&mut pool, x.clone(), |l, x| l.forward(&x), |l, d| l.backward(d), |_| vec![], &mut rng);
        let mut unit = ();
        check(&mut unit, x.clone(), |_, x| upsample2(&x), |_, d| upsample2_backward(d), |_| vec![], &mut rng);
        let other = rand_tensor(&mut rng, 2, 3, 6);
        let c = concat(&x, &other);
        let (a, b) = split(&c, 2);
        assert_eq!((a, b), (x, other));
    }

    #[test]
    fn linear_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut fc = Linear::<f64>::new(8, 3, &mut rng);
        let x = rand_tensor(&mut rng, 2, 2, 4);
        check(&mut fc, x, |l, x| l.forward(x), |l, d| l.backward(d), |l| l.params_mut().into_iter().collect(), &mut rng);
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut p = Param::new(vec![0.3f64, -1.2, 4.0]);
        let before = p.value.clone();
        let mut adam = Adam::new(1e-3);
        for _ in 0..10 {
            adam.step(&mut [&mut p]);
        }
        assert_eq!(p.value, before);
        p.grad = vec![1.0, -1.0, 0.0];
        adam.step(&mut [&mut p]);
        // first nonzero step moves by about lr against the gradient sign
        assert!(p.value[0] < before[0] && p.value[1] > before[1] && p.value[2] == before[2]);
    }

    #[test]
    fn init_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let conv = Conv1d::<f64>::new(4, 6, &mut rng);
        let bound = 1.0 / 20f64.sqrt();
        assert!(conv.weight.value.iter().all(|w| w.abs() <= bound));
    }
}
