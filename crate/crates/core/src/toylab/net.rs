use rand::Rng;

use super::nn::{concat, split, upsample2, upsample2_backward, BatchNorm1d, Conv1d, Linear, MaxPool2, Param, Relu, Tensor};
use crate::scalar::Real;

pub const ENCODER_CHANNELS: [usize; 4] = [4, 6, 8, 8];
pub const DECODER_CHANNELS: [usize; 5] = [8, 8, 8, 6, 4];
pub const HEAD_HIDDEN: usize = 4;

/// What the network emits per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// `dim` values from the fully connected head.
    Vector { dim: usize },
    /// `channels × width` values from the decoder.
    Image { channels: usize },
}

/// Conv, batch-norm, ReLU.
#[derive(Debug, Clone)]
struct ConvBlock<T> {
    conv: Conv1d<T>,
    bn: BatchNorm1d<T>,
    relu: Relu,
}

impl<T: Real> ConvBlock<T> {
    fn new(cin: usize, cout: usize, rng: &mut impl Rng) -> Self {
        Self {
            conv: Conv1d::new(cin, cout, rng),
            bn: BatchNorm1d::new(cout),
            relu: Relu::default(),
        }
    }

    fn forward(&mut self, x: Tensor<T>, train: bool) -> Tensor<T> {
        let y = self.conv.forward(x);
        let y = self.bn.forward(y, train);
        self.relu.forward(y)
    }

    fn backward(&mut self, dy: Tensor<T>) -> Tensor<T> {
        let d = self.relu.backward(dy);
        let d = self.bn.backward(&d);
        self.conv.backward(&d)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut Param<T>> {
        self.conv.params_mut().into_iter().chain(self.bn.params_mut())
    }
}

#[derive(Debug, Clone)]
enum Head<T> {
    Vector {
        fc1: Linear<T>,
        relu: Relu,
        fc2: Linear<T>,
    },
    Image {
        blocks: Vec<ConvBlock<T>>,
        out: Conv1d<T>,
    },
}

/// Encoder of four `(conv, BN, ReLU, max-pool)` blocks followed by either a
/// `FC, ReLU, FC` head or a decoder that mirrors the encoder with skip
/// connections: `(concat except first, conv, BN, ReLU, upsample except
/// last)` and a final conv.
#[derive(Debug, Clone)]
pub struct TinyNet<T> {
    width: usize,
    kind: OutputKind,
    encoder: Vec<ConvBlock<T>>,
    pools: Vec<MaxPool2>,
    head: Head<T>,
}

impl<T: Real> TinyNet<T> {
    /// `width` must be divisible by 16.
    pub fn new(width: usize, kind: OutputKind, rng: &mut impl Rng) -> Self {
        assert!(width >= 16 && width % 16 == 0, "width must be a multiple of 16");
        let mut cin = 1;
        let mut encoder = Vec::new();
        for &c in &ENCODER_CHANNELS {
            encoder.push(ConvBlock::new(cin, c, rng));
            cin = c;
        }
        let bottleneck = ENCODER_CHANNELS[3] * width / 16;
        let head = match kind {
            OutputKind::Vector { dim } => Head::Vector {
                fc1: Linear::new(bottleneck, HEAD_HIDDEN, rng),
                relu: Relu::default(),
                fc2: Linear::new(HEAD_HIDDEN, dim, rng),
            },
            OutputKind::Image { channels } => {
                let mut blocks = Vec::new();
                let mut cin = ENCODER_CHANNELS[3];
                for (k, &c) in DECODER_CHANNELS.iter().enumerate() {
                    let skip = if k == 0 { 0 } else { ENCODER_CHANNELS[4 - k] };
                    blocks.push(ConvBlock::new(cin + skip, c, rng));
                    cin = c;
                }
                Head::Image {
                    blocks,
                    out: Conv1d::new(cin, channels, rng),
                }
            }
        };
        Self {
            width,
            kind,
            encoder,
            pools: vec![MaxPool2::default(); 4],
            head,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn kind(&self) -> OutputKind {
        self.kind
    }

    /// Values per sample in the output.
    pub fn output_size(&self) -> usize {
        match self.kind {
            OutputKind::Vector { dim } => dim,
            OutputKind::Image { channels } => channels * self.width,
        }
    }

    /// `images` holds `batch` line images of `width` values. The output is
    /// `(batch, dim, 1)` or `(batch, channels, width)`.
    pub fn forward(&mut self, images: &[T], batch: usize, train: bool) -> Tensor<T> {
        let mut x = Tensor::from_vec(images.to_vec(), batch, 1, self.width);
        let mut skips = Vec::with_capacity(4);
        for (block, pool) in self.encoder.iter_mut().zip(&mut self.pools) {
            let a = block.forward(x, train);
            x = pool.forward(&a);
            skips.push(a);
        }
        match &mut self.head {
            Head::Vector { fc1, relu, fc2 } => {
                let h = relu.forward(fc1.forward(x));
                fc2.forward(h)
            }
            Head::Image { blocks, out } => {
                let last = blocks.len() - 1;
                for (k, block) in blocks.iter_mut().enumerate() {
                    if k > 0 {
                        x = concat(&x, &skips[4 - k]);
                    }
                    x = block.forward(x, train);
                    if k < last {
                        x = upsample2(&x);
                    }
                }
                out.forward(x)
            }
        }
    }

    /// Backpropagates `dy` (same shape as the last output) and accumulates
    /// parameter gradients.
    pub fn backward(&mut self, dy: &Tensor<T>) {
        let mut skip_grads: Vec<Option<Tensor<T>>> = vec![None; 4];
        let mut d = match &mut self.head {
            Head::Vector { fc1, relu, fc2 } => {
                let d = fc2.backward(dy);
                fc1.backward(&relu.backward(d))
            }
            Head::Image { blocks, out } => {
                let mut d = out.backward(dy);
                let last = blocks.len() - 1;
                for (k, block) in blocks.iter_mut().enumerate().rev() {
                    if k < last {
                        d = upsample2_backward(&d);
                    }
                    d = block.backward(d);
                    if k > 0 {
                        let (a, b) = split(&d, DECODER_CHANNELS[k - 1]);
                        skip_grads[4 - k] = Some(b);
                        d = a;
                    }
                }
                d
            }
        };
        for k in (0..4).rev() {
            let mut da = self.pools[k].backward(&d);
            if let Some(s) = &skip_grads[k] {
                for (a, b) in da.data.iter_mut().zip(&s.data) {
                    *a += *b;
                }
            }
            d = self.encoder[k].backward(da);
        }
    }

    /// All trainable parameters in a fixed order.
    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut out: Vec<&mut Param<T>> = self.encoder.iter_mut().flat_map(|b| b.params_mut()).collect();
        match &mut self.head {
            Head::Vector { fc1, fc2, .. } => {
                out.extend(fc1.params_mut());
                out.extend(fc2.params_mut());
            }
            Head::Image { blocks, out: conv } => {
                out.extend(blocks.iter_mut().flat_map(|b| b.params_mut()));
                out.extend(conv.params_mut());
            }
        }
        out
    }

    pub fn zero_grad(&mut self) {
        self.params_mut().into_iter().for_each(|p| p.zero_grad());
    }

    pub fn parameter_count(&mut self) -> usize {
        self.params_mut().iter().map(|p| p.value.len()).sum()
    }
}
