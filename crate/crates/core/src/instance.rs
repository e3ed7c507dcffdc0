//! Instance representation: ordered arms, target k, gaps, and the dyadic
//! arm-group decomposition that all hardness analytics are built on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arm::{ArmSpec, Dist};
use crate::error::{Error, Result};
use crate::rng::{derive_stream_id, RngStream};

/// Relative tolerance used to resolve float jitter at group-interval edges.
const LEVEL_SNAP_TOL: f64 = 1e-12;

/// Accuracy level of round `r`: 2^-r.
#[inline]
pub fn epsilon_r(r: u32) -> f64 {
    0.5f64.powi(r as i32)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub arms: Vec<ArmSpec>,
    pub k: usize,
    pub permutation_seed: Option<u64>,
}

/// Per-level arm groups: `groups_large[r]` holds top-k arms with gap in
/// `(2^-(r+1), 2^-r]`, `groups_small[r]` the arms outside the top k.
#[derive(Clone, Debug, Default)]
pub struct ArmGroupDecomposition {
    pub groups_large: BTreeMap<u32, Vec<usize>>,
    pub groups_small: BTreeMap<u32, Vec<usize>>,
    pub gaps: Vec<f64>,
    pub max_level: u32,
}

impl ArmGroupDecomposition {
    pub fn count_large(&self, r: u32) -> usize {
        self.groups_large.get(&r).map_or(0, Vec::len)
    }

    pub fn count_small(&self, r: u32) -> usize {
        self.groups_small.get(&r).map_or(0, Vec::len)
    }

    /// |G^large_{>= r}|
    pub fn count_large_ge(&self, r: u32) -> usize {
        self.groups_large
            .range(r..)
            .map(|(_, v)| v.len())
            .sum()
    }

    /// |G^small_{>= r}|
    pub fn count_small_ge(&self, r: u32) -> usize {
        self.groups_small
            .range(r..)
            .map(|(_, v)| v.len())
            .sum()
    }
}

/// Group level of a gap: the unique r >= 1 with gap in `(2^-(r+1), 2^-r]`.
/// Values within relative tolerance of a power of two snap onto it first.
pub fn level_of_gap(gap: f64) -> u32 {
    debug_assert!(gap > 0.0 && gap <= 0.5 + 1e-9);
    let l2 = -gap.log2();
    let s = l2.round();
    if s >= 1.0 && (gap - 0.5f64.powi(s as i32)).abs() <= LEVEL_SNAP_TOL * gap {
        return s as u32;
    }
    (l2.floor() as u32).max(1)
}

impl Instance {
    pub fn new(arms: Vec<ArmSpec>, k: usize) -> Result<Self> {
        let inst = Instance {
            arms,
            k,
            permutation_seed: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.arms.len();
        if n == 0 {
            return Err(Error::validation("instance has no arms"));
        }
        if self.k == 0 {
            return Err(Error::validation("k = 0 is outside the model"));
        }
        if self.k > n {
            return Err(Error::validation(format!("k = {} > {} arms", self.k, n)));
        }
        for (i, arm) in self.arms.iter().enumerate() {
            if arm.id != i {
                return Err(Error::validation(format!(
                    "arm at position {} has id {}",
                    i, arm.id
                )));
            }
            arm.validate()?;
        }
        if self.k < n {
            let (mu_k, mu_k1) = self.boundary_means();
            if !(mu_k > mu_k1) {
                return Err(Error::validation(format!(
                    "tie at the k/k+1 boundary: mu_[k] = {}, mu_[k+1] = {}",
                    mu_k, mu_k1
                )));
            }
        }
        Ok(())
    }

    /// Arm ids sorted by (mean desc, id asc).
    fn sorted_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.arms.len()).collect();
        ids.sort_by(|&a, &b| {
            self.arms[b]
                .mean()
                .partial_cmp(&self.arms[a].mean())
                .unwrap()
                .then(a.cmp(&b))
        });
        ids
    }

    /// (mu_[k], mu_[k+1]); requires k < n.
    fn boundary_means(&self) -> (f64, f64) {
        let ids = self.sorted_ids();
        (
            self.arms[ids[self.k - 1]].mean(),
            self.arms[ids[self.k]].mean(),
        )
    }

    /// The k arm ids with the largest true means, interior ties broken by
    /// lower id.
    pub fn top_k_set(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let mut top: Vec<usize> = self.sorted_ids()[..self.k].to_vec();
        top.sort_unstable();
        Ok(top)
    }

    /// Gap of one arm: distance its mean must move to change the top-k set.
    pub fn gap(&self, arm_id: usize) -> Result<f64> {
        self.validate()?;
        if self.k == self.arms.len() {
            return Err(Error::validation(
                "gaps are undefined for k = n (no k/k+1 boundary)",
            ));
        }
        let (mu_k, mu_k1) = self.boundary_means();
        let mu = self.arms[arm_id].mean();
        Ok(if mu >= mu_k { mu - mu_k1 } else { mu_k - mu })
    }

    pub fn decompose_groups(&self) -> Result<ArmGroupDecomposition> {
        self.validate()?;
        if self.k >= self.arms.len() {
            return Err(Error::validation(
                "group decomposition requires k < n",
            ));
        }
        let (mu_k, mu_k1) = self.boundary_means();
        let mut d = ArmGroupDecomposition {
            gaps: vec![0.0; self.arms.len()],
            ..Default::default()
        };
        for arm in &self.arms {
            let mu = arm.mean();
            let (gap, large) = if mu >= mu_k {
                (mu - mu_k1, true)
            } else {
                (mu_k - mu, false)
            };
            let level = level_of_gap(gap);
            d.gaps[arm.id] = gap;
            d.max_level = d.max_level.max(level);
            let groups = if large {
                &mut d.groups_large
            } else {
                &mut d.groups_small
            };
            groups.entry(level).or_default().push(arm.id);
        }
        Ok(d)
    }

    /// Uniformly random reordering (Fisher-Yates). Returns the permuted
    /// instance (arms relabeled by position) and the map new id -> old id.
    pub fn permute(&self, seed: u64) -> (Instance, Vec<usize>) {
        let n = self.arms.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = RngStream::new(seed, derive_stream_id(seed, &[0x70_65_72_6d]));
        for i in (1..n).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            order.swap(i, j);
        }
        let arms = order
            .iter()
            .enumerate()
            .map(|(new_id, &old_id)| ArmSpec {
                id: new_id,
                dist: self.arms[old_id].dist,
            })
            .collect();
        (
            Instance {
                arms,
                k: self.k,
                permutation_seed: Some(seed),
            },
            order,
        )
    }

    pub fn true_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.mean()).collect()
    }
}

// ---------------------------------------------------------------------------
// Instance file schema

#[derive(Serialize, Deserialize)]
struct ArmFile {
    dist: String,
    mean: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    k: usize,
    arms: Vec<ArmFile>,
    #[serde(default)]
    permutation_seed: Option<u64>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let mut arms = Vec::with_capacity(file.arms.len());
        for (id, a) in file.arms.iter().enumerate() {
            let dist = match a.dist.as_str() {
                "gaussian" => Dist::GaussianUnitVar { mean: a.mean },
                "bernoulli" => Dist::Bernoulli { mean: a.mean },
                other => {
                    return Err(Error::validation(format!(
                        "arm {}: unknown dist {:?}",
                        id, other
                    )))
                }
            };
            arms.push(ArmSpec { id, dist });
        }
        let mut inst = Instance::new(arms, file.k)?;
        inst.permutation_seed = file.permutation_seed;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            k: self.k,
            arms: self
                .arms
                .iter()
                .map(|a| ArmFile {
                    dist: match a.dist {
                        Dist::GaussianUnitVar { .. } => "gaussian".into(),
                        Dist::Bernoulli { .. } => "bernoulli".into(),
                    },
                    mean: a.mean(),
                })
                .collect(),
            permutation_seed: self.permutation_seed,
        };
        serde_json::to_string_pretty(&file).expect("instance serialization")
    }
}
