//! End-to-end saliency computation for one image.
//!
//! The stages are exposed separately so callers can reuse the lattice
//! output across fusion modes: [`Pipeline::prepare`] (resize, gamma,
//! opponent transform, wavelet decomposition), [`Pipeline::conspicuity`]
//! (lattice runs) and [`Pipeline::integrate`] (fusion, channel combination,
//! normalization, smoothing and upsampling).

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::color::{gamma_correct, resize_max_side, to_opponent, Channel, RgbImage, DEFAULT_GAMMA};
use crate::integrate::{
    argmax_plane, combine_channels, fuse, shift_to_nonnegative, smooth, znorm, ChannelCombine, Diagnostics, Fusion,
    SaliencyMap,
};
use crate::plane::{Boundary, Plane};
use crate::v1dyn::{build_kernels, conspicuity, ConspicuityResponse, CouplingKernels, LatticeParams};
use crate::wavelet::{decompose, split_on_off, WaveletPyramid};
use crate::{invalid, Result};

/// Called after every lattice step with the channel, the ON (`true`) or OFF
/// polarity, the state and its `g_x`.
pub type StepObserver<'a> = dyn FnMut(Channel, bool, &crate::v1dyn::LatticeState, &[f64]) + 'a;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PipelineConfig {
    /// Working resolution: the larger image side after resizing.
    pub max_side: usize,
    pub gamma: f64,
    pub wavelet_boundary: Boundary,
    pub lattice: LatticeParams,
    pub fusion: Fusion,
    pub channel_combine: ChannelCombine,
    /// Smoothing width in degrees of visual angle.
    pub sigma_deg: f64,
    /// Pixels per degree of the original image.
    pub ppd: f64,
    pub smooth: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_side: 128,
            gamma: DEFAULT_GAMMA,
            wavelet_boundary: Boundary::Mirror,
            lattice: LatticeParams::default(),
            fusion: Fusion::Inverse,
            channel_combine: ChannelCombine::SqrtSum,
            sigma_deg: 1.0,
            ppd: 32.0,
            smooth: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_side < 8 {
            return Err(invalid("max_side must be at least 8"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma must be positive"));
        }
        if !(self.ppd > 0.0 && self.ppd.is_finite()) {
            return Err(invalid("ppd must be positive"));
        }
        if !(self.sigma_deg > 0.0 && self.sigma_deg.is_finite()) {
            return Err(invalid("sigma_deg must be positive"));
        }
        self.lattice.validate()
    }
}

/// Working-resolution wavelet input of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub original_dims: (usize, usize),
    pub working_dims: (usize, usize),
    /// `working / original` along each axis.
    pub scale: f64,
    /// One pyramid per channel in [`Channel::ALL`] order.
    pub pyramids: [WaveletPyramid; 3],
}

/// Lattice output of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConspicuity {
    pub channel: Channel,
    /// `Ŝ_{sθ}` in lattice plane order.
    pub planes: Vec<Plane>,
    /// Raw wavelet residual of the channel.
    pub residual: Plane,
}

/// Lattice output of all three channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Conspicuity {
    pub original_dims: (usize, usize),
    pub scale: f64,
    pub channels: [ChannelConspicuity; 3],
    /// Lattice runs actually performed (identical inputs share one run).
    pub simulations: usize,
}

/// Result of integrating one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// Final map at the original image size.
    pub saliency: SaliencyMap,
    /// Final map at the working size, before upsampling.
    pub working: Plane,
    /// `z(Ŝ_o)` per channel at the working size, in [`Channel::ALL`] order.
    pub channel_maps: [Plane; 3],
    pub diagnostics: Diagnostics,
}

/// Lattice responses keyed by their input, reused across channels and
/// images. Grey images feed both chromatic channels all-zero pyramids, so
/// a shared cache saves most of their lattice work.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    entries: Vec<(Vec<Plane>, Vec<Plane>)>,
    limit: usize,
}

impl Default for ResponseCache {
    /// Room for the runs of one image.
    fn default() -> Self {
        Self::with_limit(6)
    }
}

impl ResponseCache {
    /// Keeps at most `limit` responses; older entries are dropped first.
    pub fn with_limit(limit: usize) -> Self {
        Self {
            entries: Vec::new(),
            limit,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn get(&self, input: &[Plane]) -> Option<&Vec<Plane>> {
        self.entries.iter().find(|(k, _)| k.as_slice() == input).map(|(_, v)| v)
    }

    fn insert(&mut self, input: Vec<Plane>, response: Vec<Plane>) {
        if self.limit == 0 {
            return;
        }
        if self.entries.len() >= self.limit {
            self.entries.remove(0);
        }
        self.entries.push((input, response));
    }
}

/// Configured pipeline with kernel tables built once.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    kernels: BTreeMap<usize, CouplingKernels>,
}

fn pyramid_planes(p: &WaveletPyramid) -> Vec<Plane> {
    p.bands.iter().flat_map(|b| b.iter().cloned()).collect()
}

impl Pipeline {
    /// Validates `config` and tabulates the kernels for full-size images.
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let scales = crate::wavelet::num_scales(config.max_side)?;
        let mut kernels = BTreeMap::new();
        kernels.insert(scales, Self::build(&config, scales));
        Ok(Self { config, kernels })
    }

    fn build(config: &PipelineConfig, scales: usize) -> CouplingKernels {
        build_kernels(scales, &config.lattice.lambda, &config.lattice.rules)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Kernel tables for `scales`; built on the fly for unusual sizes.
    pub fn kernels(&self, scales: usize) -> Cow<'_, CouplingKernels> {
        match self.kernels.get(&scales) {
            Some(k) => Cow::Borrowed(k),
            None => Cow::Owned(Self::build(&self.config, scales)),
        }
    }

    /// Resize, gamma, opponent transform and wavelet decomposition.
    pub fn prepare(&self, img: &RgbImage) -> Result<Prepared> {
        let resized = resize_max_side(img, self.config.max_side)?;
        let corrected = gamma_correct(&resized.image, self.config.gamma)?;
        let opp = to_opponent(&corrected);
        let b = self.config.wavelet_boundary;
        Ok(Prepared {
            original_dims: resized.original_dims,
            working_dims: resized.image.dims(),
            scale: resized.scale,
            pyramids: [
                decompose(opp.channel(Channel::ALL[0]), b)?,
                decompose(opp.channel(Channel::ALL[1]), b)?,
                decompose(opp.channel(Channel::ALL[2]), b)?,
            ],
        })
    }

    /// ON/OFF lattice runs for all channels.
    pub fn conspicuity(&self, prepared: &Prepared, cache: &mut ResponseCache) -> Result<Conspicuity> {
        self.conspicuity_observed(prepared, cache, &mut |_, _, _, _| {})
    }

    /// [`Pipeline::conspicuity`] with a per-step observer receiving the
    /// channel, the ON (`true`) or OFF polarity, and the run's state and
    /// `g_x`. Runs served from the cache are not observed.
    pub fn conspicuity_observed(
        &self,
        prepared: &Prepared,
        cache: &mut ResponseCache,
        observer: &mut StepObserver<'_>,
    ) -> Result<Conspicuity> {
        let scales = prepared.pyramids[0].num_scales();
        let kernels = self.kernels(scales);
        let params = &self.config.lattice;
        let mut simulations = 0;
        let mut channels = Vec::with_capacity(3);
        for (c, pyr) in Channel::ALL.iter().zip(&prepared.pyramids) {
            let planes = pyramid_planes(pyr);
            let (on, off): (Vec<Plane>, Vec<Plane>) = planes.iter().map(split_on_off).unzip();
            let mut rates = [Vec::new(), Vec::new()];
            for (k, input) in [on, off].into_iter().enumerate() {
                let polarity = k == 0;
                rates[k] = match cache.get(&input) {
                    Some(r) => r.clone(),
                    None => {
                        let r = crate::v1dyn::simulate_observed(&input, &kernels, params, &mut |s, g| {
                            observer(*c, polarity, s, g)
                        })?;
                        simulations += 1;
                        cache.insert(input, r.clone());
                        r
                    }
                };
            }
            let [mean_rate_on, mean_rate_off] = rates;
            let response = ConspicuityResponse {
                mean_rate_on,
                mean_rate_off,
            };
            channels.push(ChannelConspicuity {
                channel: *c,
                planes: conspicuity(&response),
                residual: pyr.residual.clone(),
            });
        }
        let channels: [ChannelConspicuity; 3] = channels.try_into().expect("three channels");
        Ok(Conspicuity {
            original_dims: prepared.original_dims,
            scale: prepared.scale,
            channels,
            simulations,
        })
    }

    /// Fusion, channel combination, z-normalization, smoothing and
    /// upsampling back to the original size.
    pub fn integrate(&self, consp: &Conspicuity, fusion: Fusion) -> Result<Output> {
        let cfg = &self.config;
        let mut diagnostics = Diagnostics::default();
        let mut shifted = Vec::with_capacity(3);
        for ch in &consp.channels {
            if fusion == Fusion::Argmax {
                diagnostics.argmax_planes.push(argmax_plane(&ch.planes));
            }
            shifted.push(shift_to_nonnegative(&fuse(fusion, &ch.planes, &ch.residual)?));
        }
        let channel_maps = [znorm(&shifted[0]).map, znorm(&shifted[1]).map, znorm(&shifted[2]).map];
        let (l, rg, by) = (&shifted[0], &shifted[1], &shifted[2]);
        let combined = combine_channels(rg, by, l, cfg.channel_combine)?;
        diagnostics.clamped_pixels = combined.clamped;
        let normalized = znorm(&combined.map);
        diagnostics.degenerate_map = normalized.degenerate;
        let working = if cfg.smooth {
            // σ is given for the original image; the working map is smaller.
            let s = smooth(&normalized.map, cfg.sigma_deg, cfg.ppd * consp.scale)?;
            diagnostics.smoothing_skipped = s.skipped;
            s.map
        } else {
            normalized.map
        };
        let (ow, oh) = consp.original_dims;
        let values = if working.dims() == (ow, oh) {
            working.clone()
        } else {
            working.resize_bilinear(ow, oh)
        };
        Ok(Output {
            saliency: SaliencyMap {
                values,
                fusion,
                smoothed: cfg.smooth && !diagnostics.smoothing_skipped,
                sigma_deg: cfg.sigma_deg,
            },
            working,
            channel_maps,
            diagnostics,
        })
    }

    /// All stages with the configured fusion mode.
    pub fn run(&self, img: &RgbImage, cache: &mut ResponseCache) -> Result<Output> {
        let prepared = self.prepare(img)?;
        let consp = self.conspicuity(&prepared, cache)?;
        self.integrate(&consp, self.config.fusion)
    }
}
