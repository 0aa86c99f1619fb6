use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{accumulate_input_grad, accumulate_weight_grad, affine, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

/// What the final layer(s) of a network produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// One state value `v(s)`.
    ScalarValue,
    /// `Q(s, a)` for every action.
    ActionValues,
    /// Unnormalised action preferences (softmax logits).
    ActionPreferences,
    /// Separate value (width 1) and advantage (width |A|) layers on a shared
    /// trunk, recombined by [`dueling_combine`].
    Dueling,
}

impl HeadKind {
    /// Number of trailing layers that belong to the head.
    pub fn head_layers(self) -> usize {
        match self {
            HeadKind::Dueling => 2,
            _ => 1,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            HeadKind::ScalarValue => 0,
            HeadKind::ActionValues => 1,
            HeadKind::ActionPreferences => 2,
            HeadKind::Dueling => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => HeadKind::ScalarValue,
            1 => HeadKind::ActionValues,
            2 => HeadKind::ActionPreferences,
            3 => HeadKind::Dueling,
            other => return Err(Error::Format(format!("unknown head kind {other}"))),
        })
    }
}

/// One fully connected layer. `weights` is `output_width x input_width`,
/// row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(spec: LayerSpec, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if spec.input_width == 0 || spec.output_width == 0 {
            return Err(Error::Shape(format!("zero-width layer {spec:?}")));
        }
        if weights.len() != spec.input_width * spec.output_width
            || bias.len() != spec.output_width
        {
            return Err(Error::Shape(format!(
                "layer {spec:?} got {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            spec,
            weights,
            bias,
        })
    }

    /// Uniform fan-in initialisation: `sqrt(6 / fan_in)` for ReLU layers,
    /// `sqrt(1 / fan_in)` for linear output layers. Biases start at zero.
    pub fn init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Result<Self> {
        let fan_in = spec.input_width as f64;
        let bound = match spec.activation {
            Activation::Relu => (6.0 / fan_in).sqrt(),
            Activation::Identity => (1.0 / fan_in).sqrt(),
        };
        let weights = (0..spec.input_width * spec.output_width)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self::new(spec, weights, vec![0.0; spec.output_width])
    }
}

/// Activations recorded by a forward pass, consumed by [`MlpNetwork::backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    generation: u64,
    input: Matrix,
    /// Post-ReLU output of every trunk layer.
    trunk: Vec<Matrix>,
    /// Raw outputs of the head layer(s).
    heads: Vec<Matrix>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.input.rows()
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn trunk_activations(&self) -> &[Matrix] {
        &self.trunk
    }

    pub fn head_outputs(&self) -> &[Matrix] {
        &self.heads
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Per-parameter gradients, laid out exactly like [`MlpNetwork::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// Weight and bias slices in parameter order.
    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub fn global_norm(&self) -> f64 {
        self.slices()
            .flat_map(|s| s.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().flat_map(|s| s.iter()).all(|g| g.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|g| *g *= factor);
        }
    }

    /// Rescales in place so the global L2 norm is at most `max_norm`.
    /// Returns the norm before clipping.
    pub fn clip_to_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
        norm
    }

    fn matches(&self, net: &MlpNetwork) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.bias.len() == l.bias.len())
    }
}

/// Global-norm clipping that leaves the input untouched.
pub fn clip_gradients(grads: &Gradients, max_norm: f64) -> Gradients {
    let mut out = grads.clone();
    out.clip_to_norm(max_norm);
    out
}

/// `q[a] = value + advantages[a] - mean(advantages)`.
pub fn dueling_combine(value: f64, advantages: &[f64]) -> Result<Vec<f64>> {
    if advantages.is_empty() {
        return Err(Error::Shape("dueling head needs at least one advantage".into()));
    }
    // Shifted mean: exact when all advantages are equal.
    let pivot = advantages[0];
    let mean_offset =
        advantages.iter().map(|a| a - pivot).sum::<f64>() / advantages.len() as f64;
    Ok(advantages
        .iter()
        .map(|a| value + ((a - pivot) - mean_offset))
        .collect())
}

/// A ReLU trunk followed by a head (one layer, or two for [`HeadKind::Dueling`]).
#[derive(Clone, Debug, PartialEq)]
pub struct MlpNetwork {
    head: HeadKind,
    layers: Vec<Dense>,
    /// Bumped whenever parameters change; stale caches are rejected.
    generation: u64,
}

impl MlpNetwork {
    /// Randomly initialised network with the given hidden widths.
    pub fn new<R: Rng + ?Sized>(
        input_width: usize,
        hidden: &[usize],
        head: HeadKind,
        num_actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut specs = Vec::new();
        let mut width = input_width;
        for &h in hidden {
            specs.push(LayerSpec {
                input_width: width,
                output_width: h,
                activation: Activation::Relu,
            });
            width = h;
        }
        let head_widths: &[usize] = match head {
            HeadKind::ScalarValue => &[1],
            HeadKind::ActionValues | HeadKind::ActionPreferences => &[num_actions],
            HeadKind::Dueling => &[1, num_actions],
        };
        for &w in head_widths {
            specs.push(LayerSpec {
                input_width: width,
                output_width: w,
                activation: Activation::Identity,
            });
        }
        let layers = specs
            .into_iter()
            .map(|s| Dense::init(s, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(head, layers)
    }

    /// Builds a network from explicit layers, checking every shape invariant.
    pub fn from_layers(head: HeadKind, layers: Vec<Dense>) -> Result<Self> {
        let n_head = head.head_layers();
        if layers.len() < n_head {
            return Err(Error::Shape(format!(
                "{head:?} head needs {n_head} final layer(s), got {} layers",
                layers.len()
            )));
        }
        let trunk_len = layers.len() - n_head;
        for (i, l) in layers.iter().enumerate() {
            if l.spec.input_width == 0 || l.spec.output_width == 0 {
                return Err(Error::Shape(format!("layer {i} has zero width")));
            }
            let want = if i < trunk_len {
                Activation::Relu
            } else {
                Activation::Identity
            };
            if l.spec.activation != want {
                return Err(Error::Shape(format!(
                    "layer {i} must use {want:?} activation"
                )));
            }
        }
        for i in 1..trunk_len {
            if layers[i - 1].spec.output_width != layers[i].spec.input_width {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} but layer {i} expects {}",
                    i - 1,
                    layers[i - 1].spec.output_width,
                    layers[i].spec.input_width
                )));
            }
        }
        let feature_width = if trunk_len == 0 {
            layers[0].spec.input_width
        } else {
            layers[trunk_len - 1].spec.output_width
        };
        for (i, l) in layers[trunk_len..].iter().enumerate() {
            if l.spec.input_width != feature_width {
                return Err(Error::Shape(format!(
                    "head layer {i} expects {} features, trunk gives {feature_width}",
                    l.spec.input_width
                )));
            }
        }
        let heads = &layers[trunk_len..];
        match head {
            HeadKind::ScalarValue if heads[0].spec.output_width != 1 => {
                return Err(Error::Shape("scalar value head must have width 1".into()))
            }
            HeadKind::Dueling if heads[0].spec.output_width != 1 => {
                return Err(Error::Shape("dueling value branch must have width 1".into()))
            }
            _ => {}
        }
        Ok(Self {
            head,
            layers,
            generation: 0,
        })
    }

    pub fn head(&self) -> HeadKind {
        self.head
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    /// Mutable access to the parameters; invalidates outstanding caches.
    pub fn layers_mut(&mut self) -> &mut [Dense] {
        self.generation += 1;
        &mut self.layers
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    fn trunk_len(&self) -> usize {
        self.layers.len() - self.head.head_layers()
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].spec.input_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map(|l| l.spec.output_width).unwrap_or(0)
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Overwrites all parameters with those of `other` (same architecture).
    pub fn copy_from(&mut self, other: &MlpNetwork) -> Result<()> {
        if self.head != other.head
            || self.layers.len() != other.layers.len()
            || self.layers.iter().zip(&other.layers).any(|(a, b)| a.spec != b.spec)
        {
            return Err(Error::Shape("cannot copy between different architectures".into()));
        }
        for (dst, src) in self.layers.iter_mut().zip(&other.layers) {
            dst.weights.copy_from_slice(&src.weights);
            dst.bias.copy_from_slice(&src.bias);
        }
        self.generation += 1;
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "input width {} does not match network input {}",
                input.cols(),
                self.input_width()
            )));
        }
        Ok(())
    }

    fn run(&self, input: &Matrix) -> (Vec<Matrix>, Vec<Matrix>) {
        let trunk_len = self.trunk_len();
        let mut trunk: Vec<Matrix> = Vec::with_capacity(trunk_len);
        for layer in &self.layers[..trunk_len] {
            let prev = trunk.last().unwrap_or(input);
            let mut z = affine(prev, &layer.weights, &layer.bias);
            z.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
            trunk.push(z);
        }
        let features = trunk.last().unwrap_or(input);
        let heads = self.layers[trunk_len..]
            .iter()
            .map(|l| affine(features, &l.weights, &l.bias))
            .collect();
        (trunk, heads)
    }

    fn combine(&self, mut heads: Vec<Matrix>) -> Matrix {
        match self.head {
            HeadKind::Dueling => {
                let adv = heads.pop().expect("dueling advantage branch");
                let value = &heads[0];
                let mut q = Matrix::zeros(adv.rows(), adv.cols());
                for i in 0..adv.rows() {
                    let row = dueling_combine(value.get(i, 0), adv.row(i))
                        .expect("advantage width checked at construction");
                    q.row_mut(i).copy_from_slice(&row);
                }
                q
            }
            _ => heads.pop().expect("head layer"),
        }
    }

    /// Batched forward pass keeping the activations needed for `backward`.
    pub fn forward_batch(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(input)?;
        let (trunk, heads) = self.run(input);
        let out = self.combine(heads.clone());
        Ok((
            out,
            ForwardCache {
                generation: self.generation,
                input: input.clone(),
                trunk,
                heads,
            },
        ))
    }

    /// Batched forward pass without a cache.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let (_, heads) = self.run(input);
        Ok(self.combine(heads))
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let (out, cache) = self.forward_batch(&Matrix::row_vector(input))?;
        Ok((out.into_vec(), cache))
    }

    /// Single-sample prediction.
    pub fn predict_one(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict(&Matrix::row_vector(input))?.into_vec())
    }

    /// Gradient of `sum(output ⊙ output_grad)` with respect to every parameter.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &Matrix) -> Result<Gradients> {
        if cache.generation != self.generation
            || cache.input.cols() != self.input_width()
            || cache.heads.len() != self.head.head_layers()
        {
            return Err(Error::Usage(
                "forward cache does not belong to the current network parameters".into(),
            ));
        }
        let n = cache.input.rows();
        if output_grad.rows() != n || output_grad.cols() != self.output_width() {
            return Err(Error::Shape(format!(
                "output gradient is {}x{}, expected {n}x{}",
                output_grad.rows(),
                output_grad.cols(),
                self.output_width()
            )));
        }

        let trunk_len = self.trunk_len();
        let mut grads = Gradients::zeros_like(self);

        let head_grads: Vec<Matrix> = match self.head {
            HeadKind::Dueling => {
                let a = output_grad.cols();
                let mut dv = Matrix::zeros(n, 1);
                let mut dadv = Matrix::zeros(n, a);
                for i in 0..n {
                    let row = output_grad.row(i);
                    let sum: f64 = row.iter().sum();
                    dv.set(i, 0, sum);
                    let mean = sum / a as f64;
                    for (dst, g) in dadv.row_mut(i).iter_mut().zip(row) {
                        *dst = g - mean;
                    }
                }
                vec![dv, dadv]
            }
            _ => vec![output_grad.clone()],
        };

        let features = cache.trunk.last().unwrap_or(&cache.input);
        let mut dfeat = Matrix::zeros(n, features.cols());
        for (k, dz) in head_grads.iter().enumerate() {
            let li = trunk_len + k;
            let layer = &self.layers[li];
            accumulate_weight_grad(dz, features, &mut grads.layers[li].weights);
            column_sums(dz, &mut grads.layers[li].bias);
            if trunk_len > 0 {
                accumulate_input_grad(dz, &layer.weights, &mut dfeat);
            }
        }

        let mut upstream = dfeat;
        for li in (0..trunk_len).rev() {
            let act = &cache.trunk[li];
            for (g, &h) in upstream.data_mut().iter_mut().zip(act.data()) {
                if h <= 0.0 {
                    *g = 0.0;
                }
            }
            let x = if li == 0 {
                &cache.input
            } else {
                &cache.trunk[li - 1]
            };
            accumulate_weight_grad(&upstream, x, &mut grads.layers[li].weights);
            column_sums(&upstream, &mut grads.layers[li].bias);
            if li > 0 {
                let mut dx = Matrix::zeros(n, x.cols());
                accumulate_input_grad(&upstream, &self.layers[li].weights, &mut dx);
                upstream = dx;
            }
        }
        Ok(grads)
    }

    /// Parameter slices in the same order as [`Gradients::slices`].
    pub(crate) fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.generation += 1;
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub(crate) fn check_gradients(&self, grads: &Gradients) -> Result<()> {
        if !grads.matches(self) {
            return Err(Error::Shape("gradients do not match network shape".into()));
        }
        Ok(())
    }
}

fn column_sums(m: &Matrix, out: &mut [f64]) {
    for i in 0..m.rows() {
        for (o, v) in out.iter_mut().zip(m.row(i)) {
            *o += v;
        }
    }
}
