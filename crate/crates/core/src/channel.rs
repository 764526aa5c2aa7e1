//! Spatial and beamspace channel models.
//!
//! A uniform linear array with half-wavelength spacing sees a path arriving
//! from spatial direction `ψ ∈ [-0.5, 0.5)` through the steering vector
//! `a(ψ)`, whose entries are `exp(-j2πψm)/√N` over the centred index set
//! `m = p - (N-1)/2`. The lens array applies the spatial DFT `U` whose rows
//! are `a(ψ̄_n)ᴴ` for the grid `ψ̄_n = (n - (N+1)/2)/N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::rng::complex_normal;
use crate::{CMatrix, CVector, Error, Result};

/// Line-of-sight or scattered path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    LineOfSight,
    NonLineOfSight,
}

/// One propagation path: complex gain `β` and spatial direction `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: Complex64,
    pub spatial_direction: f64,
    pub kind: PathKind,
}

/// Spatial-domain channel of one single-antenna user.
#[derive(Debug, Clone)]
pub struct SpatialChannel {
    paths: Vec<PathComponent>,
    vector: CVector,
    num_antennas: usize,
}

impl SpatialChannel {
    /// Assembles `h = √(N/(L+1)) Σ_i β_i a(ψ_i)` from a path list whose first
    /// entry is the LoS path.
    pub fn from_paths(paths: Vec<PathComponent>, num_antennas: usize) -> Result<Self> {
        if num_antennas == 0 {
            return Err(invalid("number of antennas must be positive"));
        }
        match paths.first() {
            None => return Err(invalid("a channel needs at least the LoS path")),
            Some(p) if p.kind != PathKind::LineOfSight => {
                return Err(invalid("path 0 must be the LoS path"))
            }
            _ => {}
        }
        if paths[1..].iter().any(|p| p.kind == PathKind::LineOfSight) {
            return Err(invalid("only path 0 may be LoS"));
        }
        if let Some(p) = paths
            .iter()
            .find(|p| !(-0.5..0.5).contains(&p.spatial_direction))
        {
            return Err(invalid(format!(
                "spatial direction {} outside [-0.5, 0.5)",
                p.spatial_direction
            )));
        }
        let scale = (num_antennas as f64 / paths.len() as f64).sqrt();
        let mut vector = CVector::zeros(num_antennas);
        for p in &paths {
            vector += steering_vector(p.spatial_direction, num_antennas)? * p.gain;
        }
        vector *= Complex64::new(scale, 0.0);
        Ok(Self {
            paths,
            vector,
            num_antennas,
        })
    }

    pub fn paths(&self) -> &[PathComponent] {
        &self.paths
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Number of NLoS paths `L`.
    pub fn num_nlos(&self) -> usize {
        self.paths.len() - 1
    }

    /// Spatial component `c_i = β_i a(ψ_i)` (without the `√(N/(L+1))` factor).
    pub fn component(&self, i: usize) -> CVector {
        let p = &self.paths[i];
        steering_vector(p.spatial_direction, self.num_antennas).expect("N validated") * p.gain
    }
}

/// How path directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionModel {
    /// Uniform on `[-0.5, 0.5)`.
    #[default]
    Uniform,
    /// Uniform over the `N` lens grid directions.
    OnGrid,
}

/// Parameters of the Saleh-Valenzuela generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGenConfig {
    pub num_antennas: usize,
    pub num_nlos: usize,
    pub los_variance: f64,
    pub nlos_variance: f64,
    pub directions: DirectionModel,
}

impl ChannelGenConfig {
    /// One LoS path with unit variance and `num_nlos` NLoS paths with
    /// variance `10^-0.5`, directions uniform.
    pub fn new(num_antennas: usize, num_nlos: usize) -> Self {
        Self {
            num_antennas,
            num_nlos,
            los_variance: 1.0,
            nlos_variance: 10f64.powf(-0.5),
            directions: DirectionModel::Uniform,
        }
    }
}

/// Draws one user channel.
pub fn generate_spatial_channel<R: Rng + ?Sized>(
    cfg: &ChannelGenConfig,
    rng: &mut R,
) -> Result<SpatialChannel> {
    let n = cfg.num_antennas;
    if n == 0 {
        return Err(invalid("number of antennas must be positive"));
    }
    if !(cfg.los_variance >= 0.0 && cfg.nlos_variance >= 0.0) {
        return Err(invalid("path gain variances must be non-negative"));
    }
    let mut paths = Vec::with_capacity(cfg.num_nlos + 1);
    for i in 0..=cfg.num_nlos {
        let (kind, variance) = if i == 0 {
            (PathKind::LineOfSight, cfg.los_variance)
        } else {
            (PathKind::NonLineOfSight, cfg.nlos_variance)
        };
        let gain = complex_normal(rng, variance);
        let spatial_direction = match cfg.directions {
            DirectionModel::Uniform => rng.random_range(-0.5..0.5),
            DirectionModel::OnGrid => grid_direction(rng.random_range(1..=n), n),
        };
        paths.push(PathComponent {
            gain,
            spatial_direction,
            kind,
        });
    }
    SpatialChannel::from_paths(paths, n)
}

/// Steering vector `a(ψ)` of an `n`-element half-wavelength ULA.
pub fn steering_vector(psi: f64, n: usize) -> Result<CVector> {
    if n == 0 {
        return Err(invalid("steering vector needs N >= 1"));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let centre = (n as f64 - 1.0) / 2.0;
    Ok(CVector::from_fn(n, |p, _| {
        let m = p as f64 - centre;
        Complex64::from_polar(norm, -2.0 * PI * psi * m)
    }))
}

/// Lens grid direction `ψ̄_n = (n - (N+1)/2)/N` for 1-based `n`.
pub fn grid_direction(n: usize, num_antennas: usize) -> f64 {
    let nn = num_antennas as f64;
    (n as f64 - (nn + 1.0) / 2.0) / nn
}

/// `Υ(x) = sin(Nπx) / (N sin(πx))`.
///
/// At the removable singularities `x ∈ ℤ` the analytic limit
/// `(-1)^{x(N-1)}` is returned.
pub fn dirichlet_kernel(x: f64, n: usize) -> f64 {
    let nn = n as f64;
    let den = (PI * x).sin();
    if den.abs() < 1e-12 {
        let k = x.round() as i64;
        return if (k * (n as i64 - 1)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
    }
    (nn * PI * x).sin() / (nn * den)
}

/// The lens array DFT `U` and its grid directions.
#[derive(Debug, Clone)]
pub struct BeamspaceTransform {
    matrix: CMatrix,
    grid_directions: Vec<f64>,
}

impl BeamspaceTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("beamspace transform needs N >= 1"));
        }
        let grid_directions: Vec<f64> = (1..=n).map(|i| grid_direction(i, n)).collect();
        let mut matrix = DMatrix::zeros(n, n);
        for (row, &psi) in grid_directions.iter().enumerate() {
            let a = steering_vector(psi, n)?;
            for (col, v) in a.iter().enumerate() {
                matrix[(row, col)] = v.conj();
            }
        }
        Ok(Self {
            matrix,
            grid_directions,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn grid_directions(&self) -> &[f64] {
        &self.grid_directions
    }

    pub fn num_antennas(&self) -> usize {
        self.grid_directions.len()
    }

    /// `U v` for an arbitrary spatial vector.
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.num_antennas() {
            return Err(Error::DimensionMismatch {
                expected: self.num_antennas(),
                actual: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

/// Builds `U` for `n` antennas.
pub fn build_beamspace_transform(n: usize) -> Result<BeamspaceTransform> {
    BeamspaceTransform::new(n)
}

/// Beamspace channel `h̃ = U h` with its components `c̃_i = U c_i`.
#[derive(Debug, Clone)]
pub struct BeamspaceChannel {
    vector: CVector,
    components: Vec<CVector>,
}

impl BeamspaceChannel {
    /// Wraps an explicit beamspace vector as a single-component channel.
    pub fn from_vector(vector: CVector) -> Self {
        let components = vec![vector.clone()];
        Self { vector, components }
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn components(&self) -> &[CVector] {
        &self.components
    }

    pub fn num_antennas(&self) -> usize {
        self.vector.len()
    }
}

/// Transforms a spatial channel into beamspace.
pub fn to_beamspace(h: &SpatialChannel, t: &BeamspaceTransform) -> Result<BeamspaceChannel> {
    if h.num_antennas() != t.num_antennas() {
        return Err(Error::DimensionMismatch {
            expected: t.num_antennas(),
            actual: h.num_antennas(),
        });
    }
    let vector = t.apply(h.vector())?;
    let components = (0..h.paths().len())
        .map(|i| t.apply(&h.component(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamspaceChannel { vector, components })
}

/// Closed-form beamspace component `β Υ(ψ̄_n − ψ)` for every beam.
pub fn component_closed_form(path: &PathComponent, n: usize) -> CVector {
    CVector::from_fn(n, |i, _| {
        path.gain * dirichlet_kernel(grid_direction(i + 1, n) - path.spatial_direction, n)
    })
}
