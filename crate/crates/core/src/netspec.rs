//! Shape and parameter calculator for the region (DA) and baseline (BL)
//! U-net descriptions. Nothing here executes a network.
//!
//! Conventions: inputs are single-channel; upsampling is an exact x2 that
//! keeps channels, and its output is concatenated with the matching
//! contracting-path output, so the first convolution of an expanding block
//! sees `below + skip` channels. Parameters count convolution and dense
//! weights plus biases (batch-norm statistics excluded):
//!
//! ```text
//! conv k x k, c_in -> c_out:  k*k*c_in*c_out + c_out
//! dense n_in -> n_out:        n_in*n_out + n_out
//! residual block:             two 3x3 convs (+ 1x1 projection if c_in != c_out)
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    MaxPool,
    Upsample,
    ResidualBlock,
    Dense,
    SoftmaxHead,
    PrescaleConv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub filter: usize,
    pub stride: usize,
    pub channels_in: usize,
    pub channels_out: usize,
}

impl LayerSpec {
    pub fn conv(filter: usize, channels_in: usize, channels_out: usize) -> Self {
        Self {
            kind: LayerKind::Conv,
            filter,
            stride: 1,
            channels_in,
            channels_out,
        }
    }

    pub fn residual(channels_in: usize, channels_out: usize) -> Self {
        Self {
            kind: LayerKind::ResidualBlock,
            filter: 3,
            stride: 1,
            channels_in,
            channels_out,
        }
    }

    pub fn prescale(filter: usize, stride: usize, channels_in: usize, channels_out: usize) -> Self {
        Self {
            kind: LayerKind::PrescaleConv,
            filter,
            stride,
            channels_in,
            channels_out,
        }
    }

    pub fn maxpool(channels: usize) -> Self {
        Self {
            kind: LayerKind::MaxPool,
            filter: 2,
            stride: 2,
            channels_in: channels,
            channels_out: channels,
        }
    }

    pub fn upsample(channels: usize) -> Self {
        Self {
            kind: LayerKind::Upsample,
            filter: 2,
            stride: 2,
            channels_in: channels,
            channels_out: channels,
        }
    }

    pub fn dense(n_in: usize, n_out: usize) -> Self {
        Self {
            kind: LayerKind::Dense,
            filter: 1,
            stride: 1,
            channels_in: n_in,
            channels_out: n_out,
        }
    }

    pub fn softmax_head(n_in: usize, classes: usize) -> Self {
        Self {
            kind: LayerKind::SoftmaxHead,
            filter: 1,
            stride: 1,
            channels_in: n_in,
            channels_out: classes,
        }
    }

    pub fn parameters(&self) -> usize {
        let conv = |k: usize, ci: usize, co: usize| k * k * ci * co + co;
        match self.kind {
            LayerKind::Conv | LayerKind::PrescaleConv => conv(self.filter, self.channels_in, self.channels_out),
            LayerKind::ResidualBlock => {
                let projection = if self.channels_in != self.channels_out {
                    conv(1, self.channels_in, self.channels_out)
                } else {
                    0
                };
                conv(self.filter, self.channels_in, self.channels_out)
                    + conv(self.filter, self.channels_out, self.channels_out)
                    + projection
            }
            LayerKind::Dense | LayerKind::SoftmaxHead => self.channels_in * self.channels_out + self.channels_out,
            LayerKind::MaxPool | LayerKind::Upsample => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetName {
    Da,
    Bl,
    Custom,
}

impl fmt::Display for NetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetName::Da => "DA",
            NetName::Bl => "BL",
            NetName::Custom => "custom",
        })
    }
}

/// A U-net: optional prescaling, contracting blocks each followed by a max
/// pool, bottom layers, expanding blocks each preceded by an upsample, and
/// output layers. `expanding[i]` mirrors `contracting[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub name: NetName,
    pub input_side: usize,
    pub input_channels: usize,
    pub prescale: Option<LayerSpec>,
    pub contracting: Vec<Vec<LayerSpec>>,
    pub bottom: Vec<LayerSpec>,
    pub expanding: Vec<Vec<LayerSpec>>,
    pub output: Vec<LayerSpec>,
    /// Auxiliary classifier attached after the last max pool.
    pub aux: Vec<LayerSpec>,
}

/// How a U-net block is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStyle {
    /// `n` plain 3x3 convolutions.
    Plain,
    /// `n` residual blocks.
    Residual,
}

fn block(style: BlockStyle, n: usize, c_in: usize, c_out: usize) -> Vec<LayerSpec> {
    (0..n)
        .map(|i| {
            let ci = if i == 0 { c_in } else { c_out };
            match style {
                BlockStyle::Plain => LayerSpec::conv(3, ci, c_out),
                BlockStyle::Residual => LayerSpec::residual(ci, c_out),
            }
        })
        .collect()
}

impl NetSpec {
    /// Symmetric U-net whose contracting block `i` has `layers[i]` layers and
    /// `base * 2^i` channels; the bottom has `2 * last` channels built from
    /// `bottom_layers` layers.
    pub fn unet(
        name: NetName,
        input_side: usize,
        prescale: Option<LayerSpec>,
        style: BlockStyle,
        layers: &[usize],
        bottom_layers: usize,
        base: usize,
    ) -> Self {
        let mut c = prescale.map_or(1, |p| p.channels_out);
        let mut contracting = Vec::new();
        for (i, &n) in layers.iter().enumerate() {
            let out = base << i;
            contracting.push(block(style, n, c, out));
            c = out;
        }
        let bottom = if layers.is_empty() {
            Vec::new()
        } else {
            block(style, bottom_layers, c, 2 * c)
        };
        let mut below = bottom.last().map_or(c, |l| l.channels_out);
        let mut expanding: Vec<Vec<LayerSpec>> = vec![Vec::new(); layers.len()];
        for i in (0..layers.len()).rev() {
            let out = base << i;
            expanding[i] = block(style, layers[i], below + out, out);
            below = out;
        }
        let output = if layers.is_empty() {
            Vec::new()
        } else {
            vec![LayerSpec::conv(3, below, 1), LayerSpec::conv(3, 1, 1)]
        };
        Self {
            name,
            input_side,
            input_channels: 1,
            prescale,
            contracting,
            bottom,
            expanding,
            output,
            aux: Vec::new(),
        }
    }

    /// Region network: 160 px input, blocks of 4, 4, 2 and 2 convolutions
    /// from 32 channels, and four 2-way softmax heads on a 512-node dense
    /// layer after the last pool.
    pub fn da() -> Self {
        let mut net = Self::unet(NetName::Da, 160, None, BlockStyle::Plain, &[4, 4, 2, 2], 2, 32);
        let flat = 10 * 10 * 256;
        net.aux = vec![LayerSpec::dense(flat, 512)];
        net.aux.extend((0..4).map(|_| LayerSpec::softmax_head(512, 2)));
        net
    }

    /// Baseline network: 320 px input, 5x5 stride-2 prescaling, five blocks
    /// of three residual blocks.
    pub fn bl() -> Self {
        Self::unet(
            NetName::Bl,
            320,
            Some(LayerSpec::prescale(5, 2, 1, 32)),
            BlockStyle::Residual,
            &[3, 3, 3, 3, 3],
            3,
            32,
        )
    }

    /// No blocks at all: input shape passes through.
    pub fn identity(input_side: usize) -> Self {
        Self::unet(NetName::Custom, input_side, None, BlockStyle::Plain, &[], 0, 32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.contracting.len() != self.expanding.len() {
            return Err(shape_error(
                "spec",
                format!(
                    "{} contracting vs {} expanding blocks",
                    self.contracting.len(),
                    self.expanding.len()
                ),
            ));
        }
        let all = self
            .prescale
            .iter()
            .chain(self.contracting.iter().flatten())
            .chain(&self.bottom)
            .chain(self.expanding.iter().flatten())
            .chain(&self.output)
            .chain(&self.aux);
        for l in all {
            if l.filter == 0 || l.stride == 0 || l.channels_in == 0 || l.channels_out == 0 {
                return Err(shape_error("spec", format!("non-positive layer field in {l:?}")));
            }
        }
        if self.input_side == 0 {
            return Err(shape_error("input", "input side must be positive".into()));
        }
        Ok(())
    }
}

fn shape_error(stage: &str, msg: String) -> Error {
    Error::Shape {
        stage: stage.to_string(),
        msg,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub side: usize,
    pub channels: usize,
}

fn run_layers(stage: &str, layers: &[LayerSpec], mut channels: usize) -> Result<usize> {
    for l in layers {
        if l.channels_in != channels {
            return Err(shape_error(
                stage,
                format!("layer expects {} channels, receives {channels}", l.channels_in),
            ));
        }
        channels = l.channels_out;
    }
    Ok(channels)
}

fn halve(stage: &str, side: usize, stride: usize) -> Result<usize> {
    if side % stride != 0 {
        return Err(shape_error(stage, format!("side {side} not divisible by stride {stride}")));
    }
    Ok(side / stride)
}

/// Spatial side and channel count after the input, the prescaling, every
/// contracting block, the bottom, every expanding block and the output.
/// Contracting stages are named `down1..`, expanding ones `up1..` so that
/// `upK` mirrors `downK`.
pub fn compute_shapes(spec: &NetSpec) -> Result<Vec<Stage>> {
    spec.validate()?;
    let mut stages = Vec::new();
    let mut push = |name: String, side, channels| stages.push(Stage { name, side, channels });
    let mut side = spec.input_side;
    let mut channels = spec.input_channels;
    push("input".into(), side, channels);
    if let Some(p) = &spec.prescale {
        channels = run_layers("prescale", std::slice::from_ref(p), channels)?;
        side = halve("prescale", side, p.stride)?;
        push("prescale".into(), side, channels);
    }
    let mut skips = Vec::new();
    for (i, layers) in spec.contracting.iter().enumerate() {
        let name = format!("down{}", i + 1);
        channels = run_layers(&name, layers, channels)?;
        push(name.clone(), side, channels);
        skips.push(channels);
        side = halve(&name, side, 2)?;
    }
    if !spec.contracting.is_empty() {
        let pooled = side * side * channels;
        if let Some(first) = spec.aux.first() {
            if first.channels_in != pooled {
                return Err(shape_error(
                    "aux",
                    format!("dense layer expects {} inputs, pool yields {pooled}", first.channels_in),
                ));
            }
        }
        channels = run_layers("bottom", &spec.bottom, channels)?;
        push("bottom".into(), side, channels);
    }
    for (i, layers) in spec.expanding.iter().enumerate().rev() {
        let name = format!("up{}", i + 1);
        side *= 2;
        channels = run_layers(&name, layers, channels + skips[i])?;
        push(name, side, channels);
    }
    if !spec.output.is_empty() {
        channels = run_layers("output", &spec.output, channels)?;
        push("output".into(), side, channels);
    }
    Ok(stages)
}

/// Number of auxiliary softmax heads.
pub fn count_aux_heads(spec: &NetSpec) -> usize {
    spec.aux.iter().filter(|l| l.kind == LayerKind::SoftmaxHead).count()
}

pub fn count_parameters(spec: &NetSpec) -> usize {
    spec.prescale
        .iter()
        .chain(spec.contracting.iter().flatten())
        .chain(&spec.bottom)
        .chain(spec.expanding.iter().flatten())
        .chain(&spec.output)
        .chain(&spec.aux)
        .map(LayerSpec::parameters)
        .sum()
}

/// Aligned stage table.
pub fn format_table(stages: &[Stage]) -> String {
    let mut out = format!("{:<10} {:>6} {:>9}\n", "stage", "side", "channels");
    for s in stages {
        out.push_str(&format!("{:<10} {:>6} {:>9}\n", s.name, s.side, s.channels));
    }
    out
}

/// One `stage,side,channels` line per stage.
pub fn format_machine(stages: &[Stage]) -> String {
    stages
        .iter()
        .map(|s| format!("{},{},{}\n", s.name, s.side, s.channels))
        .collect()
}
