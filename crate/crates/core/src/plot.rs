//! Plot descriptions for Q-Q and P-P plots with testing bands.
//!
//! A [`PlotSpec`] holds plotted coordinates after the axis transforms. When
//! differencing is on, layer values are kept undifferenced and the reference
//! values are stored alongside, so the differenced view is derived on demand
//! and the original values are never modified.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::band::{expected_points, TestingBand};
use crate::distributions::Family;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisTransform {
    Identity,
    /// `x -> -log10(x)`: small probabilities plot to the top and right.
    Log10Reversed,
}

impl AxisTransform {
    pub fn apply(self, v: f64) -> Result<f64> {
        match self {
            AxisTransform::Identity => Ok(v),
            AxisTransform::Log10Reversed => {
                if v > 0.0 {
                    Ok(-libm::log10(v))
                } else {
                    Err(Error::TransformDomain { value: v })
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub color: String,
    pub point_size: f64,
    pub line_width: f64,
    pub opacity: f64,
}

impl Style {
    pub fn new(color: &str) -> Self {
        Self {
            color: color.to_string(),
            point_size: 2.5,
            line_width: 1.5,
            opacity: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Band {
        x: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        style: Style,
    },
    Line {
        x: Vec<f64>,
        y: Vec<f64>,
        style: Style,
    },
    Points {
        x: Vec<f64>,
        y: Vec<f64>,
        label: String,
        style: Style,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub layers: Vec<Layer>,
    pub x_transform: AxisTransform,
    pub y_transform: AxisTransform,
    /// Per-rank values subtracted from every y-value when set.
    pub difference: Option<Vec<f64>>,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

/// Palette cycled over overlaid samples.
pub const SERIES_COLORS: [&str; 6] = [
    "#1f4e9c", "#c0392b", "#27803b", "#8e44ad", "#d35400", "#2c3e50",
];

impl PlotSpec {
    /// A spec with no layers.
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            layers: Vec::new(),
            x_transform: AxisTransform::Identity,
            y_transform: AxisTransform::Identity,
            difference: None,
            x_label: String::new(),
            y_label: String::new(),
            width,
            height,
        }
    }

    /// Y-values as displayed: differenced when a reference is present.
    pub fn display_y(&self, y: &[f64]) -> Vec<f64> {
        match &self.difference {
            Some(r) => y.iter().zip(r).map(|(a, b)| a - b).collect(),
            None => y.to_vec(),
        }
    }

    /// The same plot without differencing; layer values are untouched.
    pub fn undifferenced(&self) -> Self {
        Self {
            difference: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// P-P plot instead of Q-Q.
    pub pp: bool,
    pub difference: bool,
    pub log10: bool,
    pub width: u32,
    pub height: u32,
    pub labels: Vec<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            pp: false,
            difference: false,
            log10: false,
            width: 640,
            height: 640,
            labels: Vec::new(),
        }
    }
}

fn transform_all(t: AxisTransform, v: &[f64]) -> Result<Vec<f64>> {
    v.iter().map(|&x| t.apply(x)).collect()
}

/// Builds the plot of one or more samples against a band.
///
/// All samples share the band's x-coordinates per rank, so every sample must
/// have the band's size unless the band was built for an effective number
/// of tests, in which case each sample gets its own plotting positions.
pub fn make_plot(
    samples: &[&[f64]],
    band: &TestingBand,
    options: &PlotOptions,
) -> Result<PlotSpec> {
    let t = if options.log10 {
        AxisTransform::Log10Reversed
    } else {
        AxisTransform::Identity
    };
    let dist = band.distribution;
    let (band_x, band_lo, band_hi) = if options.pp {
        (
            band.expected_prob.clone(),
            band.prob_lower.clone(),
            band.prob_upper.clone(),
        )
    } else {
        (
            band.expected.clone(),
            band.lower.clone(),
            band.upper.clone(),
        )
    };
    let band_x = transform_all(t, &band_x)?;
    // band endpoints at the edges of the support stay infinite under -log10
    let edge = |v: f64| -> Result<f64> {
        if options.log10 && v == 0.0 && options.pp {
            Ok(f64::INFINITY)
        } else {
            t.apply(v)
        }
    };
    let band_lo: Vec<f64> = band_lo.iter().map(|&v| edge(v)).collect::<Result<_>>()?;
    let band_hi: Vec<f64> = band_hi.iter().map(|&v| edge(v)).collect::<Result<_>>()?;

    let mut layers = alloc::vec![Layer::Band {
        x: band_x.clone(),
        lower: band_lo,
        upper: band_hi,
        style: Style {
            opacity: 0.35,
            ..Style::new("#9db7d5")
        },
    }];
    layers.push(Layer::Line {
        x: band_x.clone(),
        y: band_x.clone(),
        style: Style::new("#555555"),
    });

    for (s, sample) in samples.iter().enumerate() {
        if !band.effective_n && sample.len() != band.n {
            return Err(Error::LengthMismatch {
                expected: band.n,
                got: sample.len(),
            });
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let x = if band.effective_n && sample.len() != band.n {
            let probs = expected_points(sample.len(), crate::band::ExpectedMode::Median);
            let raw: Vec<f64> = if options.pp {
                probs
            } else {
                probs.iter().map(|&p| dist.quantile(p)).collect()
            };
            transform_all(t, &raw)?
        } else {
            band_x.clone()
        };
        let raw_y: Vec<f64> = if options.pp {
            sorted.iter().map(|&v| dist.cdf(v)).collect()
        } else {
            sorted
        };
        let y = transform_all(t, &raw_y)?;
        let label = options
            .labels
            .get(s)
            .cloned()
            .unwrap_or_else(|| alloc::format!("sample {}", s + 1));
        let color = SERIES_COLORS[s % SERIES_COLORS.len()];
        layers.push(Layer::Points {
            x,
            y,
            label,
            style: Style::new(color),
        });
    }

    let (x_label, y_label) = axis_labels(options, dist.family());
    Ok(PlotSpec {
        layers,
        x_transform: t,
        y_transform: t,
        difference: options.difference.then(|| band_x.clone()),
        x_label,
        y_label,
        width: options.width,
        height: options.height,
    })
}

fn axis_labels(options: &PlotOptions, family: Family) -> (String, String) {
    let (mut x, mut y) = if options.pp {
        (
            String::from("expected probability"),
            String::from("observed probability"),
        )
    } else {
        (
            alloc::format!("expected {} quantile", family.name()),
            String::from("observed quantile"),
        )
    };
    if options.log10 {
        x = alloc::format!("-log10 {x}");
        y = alloc::format!("-log10 {y}");
    }
    if options.difference {
        y = alloc::format!("{y} minus expected");
    }
    (x, y)
}
