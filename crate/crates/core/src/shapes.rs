//! Shape propagation through a layer list describing the appearance
//! network. No tensors are involved; this only checks that a declared
//! architecture produces the output sizes it claims.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv,
    MaxPool,
    Residual,
    Dense,
    Normalize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    /// Square kernel size; unused by dense and normalize layers.
    #[serde(default)]
    pub kernel: Option<u32>,
    #[serde(default = "one")]
    pub stride: u32,
    /// Output channels, or output width for dense layers. Pooling and
    /// normalization keep their input size when this is absent.
    #[serde(default)]
    pub output_channels: Option<u32>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Spatial { channels: u32, height: u32, width: u32 },
    Flat { width: u32 },
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Spatial { channels, height, width } => write!(f, "{channels}x{height}x{width}"),
            Shape::Flat { width } => write!(f, "{width}"),
        }
    }
}

impl LayerSpec {
    fn spatial(name: &str, kind: LayerKind, kernel: u32, stride: u32, channels: Option<u32>) -> Self {
        Self {
            name: name.to_string(),
            kind,
            kernel: Some(kernel),
            stride,
            output_channels: channels,
        }
    }

    pub fn conv(name: &str, kernel: u32, stride: u32, channels: u32) -> Self {
        Self::spatial(name, LayerKind::Conv, kernel, stride, Some(channels))
    }

    pub fn residual(name: &str, kernel: u32, stride: u32, channels: u32) -> Self {
        Self::spatial(name, LayerKind::Residual, kernel, stride, Some(channels))
    }

    pub fn max_pool(name: &str, kernel: u32, stride: u32) -> Self {
        Self::spatial(name, LayerKind::MaxPool, kernel, stride, None)
    }

    pub fn dense(name: &str, width: u32) -> Self {
        Self {
            name: name.to_string(),
            kind: LayerKind::Dense,
            kernel: None,
            stride: 1,
            output_channels: Some(width),
        }
    }

    pub fn normalize(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: LayerKind::Normalize,
            kernel: None,
            stride: 1,
            output_channels: None,
        }
    }

    /// Output shape for `input` under same padding.
    pub fn apply(&self, input: Shape) -> Result<Shape> {
        let invalid = |msg: String| Error::InvalidSpec(format!("{}: {msg}", self.name));
        if self.stride == 0 {
            return Err(invalid("stride must be at least 1".into()));
        }
        if self.output_channels == Some(0) {
            return Err(invalid("output size must be positive".into()));
        }
        match self.kind {
            LayerKind::Conv | LayerKind::Residual | LayerKind::MaxPool => {
                let Shape::Spatial { channels, height, width } = input else {
                    return Err(invalid(format!("needs a spatial input, got {input}")));
                };
                let kernel = self.kernel.ok_or_else(|| invalid("kernel size missing".into()))?;
                if kernel == 0 {
                    return Err(invalid("kernel size must be positive".into()));
                }
                if self.kind != LayerKind::MaxPool && kernel % 2 == 0 {
                    return Err(invalid(format!("kernel {kernel} is not odd")));
                }
                let out_channels = match (self.kind, self.output_channels) {
                    (LayerKind::MaxPool, None) => channels,
                    (LayerKind::MaxPool, Some(c)) if c != channels => {
                        return Err(invalid(format!("pooling cannot change channels {channels} -> {c}")))
                    }
                    (_, Some(c)) => c,
                    (_, None) => return Err(invalid("output channels missing".into())),
                };
                Ok(Shape::Spatial {
                    channels: out_channels,
                    height: height.div_ceil(self.stride),
                    width: width.div_ceil(self.stride),
                })
            }
            LayerKind::Dense => {
                let width = self
                    .output_channels
                    .ok_or_else(|| invalid("dense output width missing".into()))?;
                Ok(Shape::Flat { width })
            }
            LayerKind::Normalize => match self.output_channels {
                None => Ok(input),
                Some(_) => Err(invalid("normalization keeps its input size".into())),
            },
        }
    }
}

/// Output shape after each layer.
pub fn propagate_shapes(layers: &[LayerSpec], input: Shape) -> Result<Vec<Shape>> {
    if layers.is_empty() {
        return Err(Error::InvalidSpec("layer list is empty".into()));
    }
    if let Shape::Spatial { channels, height, width } = input {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidSpec(format!("input shape {input} has a zero extent")));
        }
    }
    let mut shape = input;
    layers
        .iter()
        .map(|l| {
            shape = l.apply(shape)?;
            Ok(shape)
        })
        .collect()
}

/// Input of the appearance network: 3 x 128 x 64 crops.
pub const DESCRIPTOR_INPUT: Shape = Shape::Spatial {
    channels: 3,
    height: 128,
    width: 64,
};

/// The wide residual network producing 128-dimensional unit descriptors:
/// two convolutions, a max pool, six residual blocks, a dense projection
/// and batch plus l2 normalization.
pub fn descriptor_network() -> Vec<LayerSpec> {
    vec![
        LayerSpec::conv("Conv 1", 3, 1, 32),
        LayerSpec::conv("Conv 2", 3, 1, 32),
        LayerSpec::max_pool("Max Pool 3", 3, 2),
        LayerSpec::residual("Residual 4", 3, 1, 32),
        LayerSpec::residual("Residual 5", 3, 1, 32),
        LayerSpec::residual("Residual 6", 3, 2, 64),
        LayerSpec::residual("Residual 7", 3, 1, 64),
        LayerSpec::residual("Residual 8", 3, 2, 128),
        LayerSpec::residual("Residual 9", 3, 1, 128),
        LayerSpec::dense("Dense 10", 128),
        LayerSpec::normalize("Batch and l2 normalization"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(c: u32, h: u32, w: u32) -> Shape {
        Shape::Spatial { channels: c, height: h, width: w }
    }

    #[test]
    fn single_layer_examples() {
        let net = descriptor_network();
        assert_eq!(net[0].apply(DESCRIPTOR_INPUT).unwrap(), sp(32, 128, 64));
        assert_eq!(net[2].apply(sp(32, 128, 64)).unwrap(), sp(32, 64, 32));
        assert_eq!(net[7].apply(sp(64, 32, 16)).unwrap(), sp(128, 16, 8));
        assert_eq!(net[9].apply(sp(128, 16, 8)).unwrap(), Shape::Flat { width: 128 });
        assert_eq!(net[10].apply(Shape::Flat { width: 128 }).unwrap(), Shape::Flat { width: 128 });
    }

    #[test]
    fn odd_sizes_round_up() {
        let l = LayerSpec::conv("c", 3, 2, 8);
        assert_eq!(l.apply(sp(3, 7, 5)).unwrap(), sp(8, 4, 3));
    }

    #[test]
    fn invalid_specs() {
        assert!(propagate_shapes(&[], DESCRIPTOR_INPUT).is_err());
        assert!(LayerSpec::conv("c", 3, 0, 8).apply(DESCRIPTOR_INPUT).is_err());
        assert!(LayerSpec::conv("c", 2, 1, 8).apply(DESCRIPTOR_INPUT).is_err());
        assert!(LayerSpec::conv("c", 3, 1, 8).apply(Shape::Flat { width: 4 }).is_err());
        let mut pool = LayerSpec::max_pool("p", 3, 2);
        pool.output_channels = Some(5);
        assert!(pool.apply(DESCRIPTOR_INPUT).is_err());
        let mut dense = LayerSpec::dense("d", 4);
        dense.output_channels = None;
        assert!(dense.apply(DESCRIPTOR_INPUT).is_err());
    }

    #[test]
    fn propagation_composes() {
        let net = descriptor_network();
        let whole = propagate_shapes(&net, DESCRIPTOR_INPUT).unwrap();
        for split in 1..net.len() {
            let head = propagate_shapes(&net[..split], DESCRIPTOR_INPUT).unwrap();
            let tail = propagate_shapes(&net[split..], *head.last().unwrap()).unwrap();
            let joined: Vec<Shape> = head.into_iter().chain(tail).collect();
            assert_eq!(joined, whole);
        }
    }

    #[test]
    fn json_roundtrip() {
        let net = descriptor_network();
        let text = serde_json::to_string(&net).unwrap();
        let back: Vec<LayerSpec> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, net);
        let minimal: LayerSpec = serde_json::from_str(r#"{"name": "p", "kind": "max_pool", "kernel": 3, "stride": 2}"#).unwrap();
        assert_eq!(minimal, LayerSpec::max_pool("p", 3, 2));
    }
}
