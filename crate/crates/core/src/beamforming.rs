//! Linear beamforming over time extensions and numerical decodability checks.
//!
//! Every alliance transmits along one moment-curve vector; a receiver decodes
//! when its desired direction stays outside the span of the interference it
//! hears.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::members;
use crate::error::{Error, Result};
use crate::generalized::{compute_e_max, derive_generalized_unchecked, UnitFraction};
use crate::graph::{alignment_sets, build_message_graph};
use crate::model::{AllianceSpec, GeneralizedAllianceSpec, TopologyMatrix};

/// Channel magnitudes are drawn from this range, with a random sign.
pub const CHANNEL_RANGE: (f64, f64) = (0.5, 2.0);
/// Resampling budget for degenerate channel draws.
pub const MAX_RESAMPLES: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-9;

/// `n` moment-curve vectors (1, x, x², …) of length `l` at nodes x = 1..=n.
/// Any `min(n, l)` of them are linearly independent.
pub fn build_vectors(n: usize, l: usize) -> Vec<DVector<f64>> {
    (1..=n)
        .map(|m| {
            let x = m as f64;
            DVector::from_iterator(l, (0..l).scan(1.0, |p, _| {
                let v = *p;
                *p *= x;
                Some(v)
            }))
        })
        .collect()
}

/// Beamforming group of every message, plus the number of groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    #[serde(serialize_with = "crate::bits::ser_indices")]
    pub groups: Vec<usize>,
    pub group_count: usize,
}

impl Assignment {
    pub fn new(groups: Vec<usize>) -> Self {
        let group_count = groups.iter().max().map_or(0, |g| g + 1);
        Self {
            groups,
            group_count,
        }
    }

    pub fn from_spec(s: &AllianceSpec) -> Self {
        Self {
            groups: s.alliance_of(),
            group_count: s.len(),
        }
    }

    pub fn from_generalized(s: &GeneralizedAllianceSpec) -> Self {
        Self {
            groups: s.alliance_of(),
            group_count: s.len(),
        }
    }

    /// Groups are the alignment sets of `t`.
    pub fn from_alignment(t: &TopologyMatrix) -> Self {
        let p = alignment_sets(&build_message_graph(t));
        Self {
            groups: (0..t.k()).map(|m| p.set_of(m)).collect(),
            group_count: p.len(),
        }
    }

    /// Largest number of distinct groups any receiver hears besides its own message.
    pub fn max_heard_groups(&self, t: &TopologyMatrix) -> usize {
        (0..t.k())
            .map(|r| {
                let mut g: Vec<usize> = members(t.interferers(r)).map(|m| self.groups[m]).collect();
                g.sort_unstable();
                g.dedup();
                g.len()
            })
            .max()
            .unwrap_or(0)
    }

    fn check(&self, t: &TopologyMatrix) -> Result<()> {
        if self.groups.len() != t.k() {
            return Err(Error::InconsistentAssignment {
                message: self.groups.len().min(t.k()) + 1,
            });
        }
        if let Some(m) = self.groups.iter().position(|&g| g >= self.group_count) {
            return Err(Error::InconsistentAssignment { message: m + 1 });
        }
        Ok(())
    }
}

/// Per-group beamformers and one channel draw.
#[derive(Clone, Debug)]
pub struct BeamformingPlan {
    pub slots: usize,
    pub vectors: Vec<DVector<f64>>,
    /// `channels[i][k]` is nonzero exactly when receiver `i` hears transmitter `k`.
    pub channels: Vec<Vec<f64>>,
}

impl BeamformingPlan {
    /// Samples a channel for every link of `t`.
    pub fn sample(
        t: &TopologyMatrix,
        assignment: &Assignment,
        slots: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        assignment.check(t)?;
        if slots == 0 {
            return Err(Error::InvalidParameter("at least one time slot is needed".into()));
        }
        let k = t.k();
        let mut channels = vec![vec![0.0; k]; k];
        for (i, row) in channels.iter_mut().enumerate() {
            for j in 0..k {
                if t.get(i, j) {
                    row[j] = sample_channel(rng)?;
                }
            }
        }
        Ok(Self {
            slots,
            vectors: build_vectors(assignment.group_count, slots),
            channels,
        })
    }
}

fn sample_channel(rng: &mut impl Rng) -> Result<f64> {
    for _ in 0..MAX_RESAMPLES {
        let magnitude = rng.gen_range(CHANNEL_RANGE.0..=CHANNEL_RANGE.1);
        let h = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
        if h.is_finite() && h.abs() >= CHANNEL_RANGE.0 {
            return Ok(h);
        }
    }
    Err(Error::DegenerateChannel {
        attempts: MAX_RESAMPLES,
    })
}

/// What receiver `i` observes: its desired direction and the interference directions.
#[derive(Clone, Debug)]
pub struct ReceivedSpace {
    pub desired: DVector<f64>,
    pub interference: Vec<DVector<f64>>,
}

pub fn simulate_receive(
    t: &TopologyMatrix,
    assignment: &Assignment,
    plan: &BeamformingPlan,
    receiver: usize,
) -> Result<ReceivedSpace> {
    assignment.check(t)?;
    if receiver >= t.k() {
        return Err(Error::IndexOutOfRange {
            index: receiver + 1,
            k: t.k(),
        });
    }
    let row = &plan.channels[receiver];
    let desired = &plan.vectors[assignment.groups[receiver]] * row[receiver];
    let interference = members(t.interferers(receiver))
        .map(|k| &plan.vectors[assignment.groups[k]] * row[k])
        .collect();
    Ok(ReceivedSpace {
        desired,
        interference,
    })
}

/// Separation of the desired direction from the interference span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    /// Smallest singular value of [orthonormal interference basis | unit desired direction].
    pub margin: f64,
    /// Distance of the (unnormalized) desired direction from the interference span.
    pub residual: f64,
    pub interference_rank: usize,
}

/// Measures how far the desired direction is from the interference span.
pub fn separation(space: &ReceivedSpace) -> Separation {
    let l = space.desired.len();
    let basis = orthonormal_basis(&space.interference, l);
    let rank = basis.ncols();
    let projection = if rank == 0 {
        DVector::zeros(l)
    } else {
        &basis * (basis.transpose() * &space.desired)
    };
    let residual = (&space.desired - projection).norm();
    let margin = if rank >= l {
        0.0
    } else {
        let norm = space.desired.norm();
        let unit = if norm > 0.0 {
            &space.desired / norm
        } else {
            space.desired.clone()
        };
        let stacked = DMatrix::from_fn(l, rank + 1, |i, j| {
            if j < rank {
                basis[(i, j)]
            } else {
                unit[i]
            }
        });
        stacked
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    Separation {
        margin,
        residual,
        interference_rank: rank,
    }
}

fn orthonormal_basis(vectors: &[DVector<f64>], l: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(l, 0);
    }
    let a = DMatrix::from_columns(vectors);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-10 * top && s > 0.0)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(l, keep.len(), |i, j| u[(i, keep[j])])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeConfig {
    /// Time extension length L; `None` uses E_M + 1.
    pub slots: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            slots: None,
            trials: 10,
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceiverReport {
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub receiver: usize,
    pub separable: bool,
    /// Worst margin over all trials.
    pub margin: f64,
    /// Worst residual over all trials.
    pub residual: f64,
    pub interference_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeReport {
    pub slots: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub e_max: usize,
    pub receivers: Vec<ReceiverReport>,
    pub all_separable: bool,
    /// 1/L when every receiver decodes in every trial.
    pub achieved_dof: Option<UnitFraction>,
}

impl DecodeReport {
    pub fn failing(&self) -> impl Iterator<Item = &ReceiverReport> {
        self.receivers.iter().filter(|r| !r.separable)
    }

    pub fn worst_margin(&self) -> f64 {
        self.receivers.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Samples channels `trials` times and checks every receiver each time.
///
/// `e_max` is the interference multiplicity the assignment was built for;
/// it sets the default extension length.
pub fn verify_decodability(
    t: &TopologyMatrix,
    assignment: &Assignment,
    e_max: usize,
    config: &DecodeConfig,
) -> Result<DecodeReport> {
    assignment.check(t)?;
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let slots = config.slots.unwrap_or(e_max + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut receivers: Vec<ReceiverReport> = (0..t.k())
        .map(|receiver| ReceiverReport {
            receiver,
            separable: true,
            margin: f64::INFINITY,
            residual: f64::INFINITY,
            interference_rank: 0,
        })
        .collect();
    for _ in 0..config.trials {
        let plan = BeamformingPlan::sample(t, assignment, slots, &mut rng)?;
        for report in receivers.iter_mut() {
            let space = simulate_receive(t, assignment, &plan, report.receiver)?;
            let s = separation(&space);
            report.margin = report.margin.min(s.margin);
            report.residual = report.residual.min(s.residual);
            report.interference_rank = report.interference_rank.max(s.interference_rank);
            report.separable &= s.margin > config.tol;
        }
    }
    let all_separable = receivers.iter().all(|r| r.separable);
    Ok(DecodeReport {
        slots,
        trials: config.trials,
        seed: config.seed,
        tol: config.tol,
        e_max,
        receivers,
        all_separable,
        achieved_dof: all_separable.then_some(UnitFraction(slots)),
    })
}

/// Verifies a plain spec against the topology it should derive.
pub fn verify_spec(t: &TopologyMatrix, s: &AllianceSpec, config: &DecodeConfig) -> Result<DecodeReport> {
    verify_generalized(t, &GeneralizedAllianceSpec::from_plain(s), config)
}

/// Verifies a generalized spec; E_M comes from the spec.
pub fn verify_generalized(
    t: &TopologyMatrix,
    s: &GeneralizedAllianceSpec,
    config: &DecodeConfig,
) -> Result<DecodeReport> {
    if s.k() != t.k() || derive_generalized_unchecked(s) != *t {
        return Err(Error::SpecTopologyMismatch);
    }
    verify_decodability(t, &Assignment::from_generalized(s), compute_e_max(s), config)
}

/// Verifies with the alignment sets as groups.
pub fn verify_alignment(t: &TopologyMatrix, config: &DecodeConfig) -> Result<DecodeReport> {
    let a = Assignment::from_alignment(t);
    let e = a.max_heard_groups(t);
    verify_decodability(t, &a, e, config)
}
