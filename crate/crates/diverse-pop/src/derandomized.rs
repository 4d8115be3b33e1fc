//! Derandomised variant: `1 + w_i` shades of grey per colour.
//!
//! For positive integer weights, the `1/w_i` coin is replaced by a shade
//! counter. An agent at shade `> 0` that meets a same-colour agent at shade
//! `> 0` steps its shade down by one; an agent at shade `0` that meets any
//! agent at shade `> 0` adopts that agent's colour `j` at full shade `w_j`.
//! All randomness lives in the scheduling, never in the update.
//!
//! Storing a shade costs `ceil(log2(1 + w_i))` extra bits ([`shade_bits`]).
//! Binary metrics apply through [`project_to_binary`], which maps shade 0 to
//! light and every positive shade to dark.

use crate::protocol::{ColourId, Configuration, ExactKernel, Move, SimRng, WeightTable};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

/// Counts per `(colour, shade)` class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadedConfiguration {
    /// `counts[colour][shade]` with shade in `0..=w_colour`.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
    pub step: u64,
}

impl ShadedConfiguration {
    /// Every agent starts at the full shade `w_i` of its colour.
    pub fn full_shade(per_colour: &[u64], weights: &WeightTable) -> Result<Self> {
        let int_weights = integer_slot_weights(weights)?;
        if per_colour.len() != int_weights.len() {
            return Err(Error::BadConfig(format!(
                "{} colour counts for a table with {} slots",
                per_colour.len(),
                int_weights.len()
            )));
        }
        let counts = per_colour
            .iter()
            .zip(&int_weights)
            .map(|(&c, &w)| {
                let mut v = vec![0u64; w as usize + 1];
                *v.last_mut().expect("w >= 1") = c;
                v
            })
            .collect::<Vec<_>>();
        let n = per_colour.iter().sum();
        Ok(Self { counts, n, step: 0 })
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let n = counts.iter().flat_map(|v| v.iter()).sum();
        Self { counts, n, step: 0 }
    }

    /// Agents of colour `i` at any positive shade.
    pub fn positive_shade(&self, colour: usize) -> u64 {
        self.counts[colour].iter().skip(1).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flat_map(|v| v.iter()).sum()
    }

    pub fn validate(&self, weights: &WeightTable) -> Result<()> {
        let int_weights = integer_slot_weights(weights)?;
        if self.counts.len() != int_weights.len() {
            return Err(Error::BadConfig("shaded configuration and weight table disagree on colour count".into()));
        }
        for (i, (v, &w)) in self.counts.iter().zip(&int_weights).enumerate() {
            if v.len() != w as usize + 1 {
                return Err(Error::BadConfig(format!(
                    "colour {} has {} shade levels but weight {}",
                    i,
                    v.len(),
                    w
                )));
            }
        }
        if self.total() != self.n {
            return Err(Error::InvariantViolation {
                step: self.step,
                reason: format!("shaded counts sum to {} but n = {}", self.total(), self.n),
            });
        }
        Ok(())
    }
}

fn integer_slot_weights(weights: &WeightTable) -> Result<Vec<u64>> {
    // the derandomised engine does not support removed colour slots;
    // active colours must be exactly the slots
    if weights.num_active() != weights.num_slots() {
        return Err(Error::BadConfig(
            "derandomised engine requires a weight table without removed colours".into(),
        ));
    }
    weights.integer_weights()
}

/// What one derandomised tick did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ShadedMove {
    /// An agent of this colour stepped from `from_shade` to `from_shade - 1`.
    ReduceShade { colour: ColourId, from_shade: u32 },
    /// A shade-0 agent of `from` adopted `to` at full shade.
    Adopt { from: ColourId, to: ColourId },
    Stay,
}

impl ShadedMove {
    pub fn apply(self, config: &mut ShadedConfiguration, weights_full: &[u64]) {
        match self {
            ShadedMove::ReduceShade { colour, from_shade } => {
                let c = colour.index();
                config.counts[c][from_shade as usize] -= 1;
                config.counts[c][from_shade as usize - 1] += 1;
            }
            ShadedMove::Adopt { from, to } => {
                config.counts[from.index()][0] -= 1;
                let full = weights_full[to.index()] as usize;
                config.counts[to.index()][full] += 1;
            }
            ShadedMove::Stay => {}
        }
    }

    /// The move's image under the dark/light projection.
    pub fn project(self) -> Move {
        match self {
            ShadedMove::ReduceShade { colour, from_shade: 1 } => Move::DarkToLight(colour),
            ShadedMove::ReduceShade { .. } => Move::Stay,
            ShadedMove::Adopt { from, to } => Move::LightToDark { from, to },
            ShadedMove::Stay => Move::Stay,
        }
    }
}

/// Derandomised engine with the integer weights validated once.
#[derive(Clone, Debug)]
pub struct DerandomizedEngine {
    int_weights: Vec<u64>,
}

impl DerandomizedEngine {
    pub fn new(weights: &WeightTable) -> Result<Self> {
        Ok(Self { int_weights: integer_slot_weights(weights)? })
    }

    pub fn full_shade_weight(&self, colour: usize) -> u64 {
        self.int_weights[colour]
    }

    /// One tick; scheduling is the only random input.
    pub fn step(&self, config: &mut ShadedConfiguration, rng: &mut SimRng) -> Result<ShadedMove> {
        let n = config.n;
        if n < 2 {
            return Err(Error::NoPartner);
        }
        step_inner(config, &self.int_weights, rng)
    }
}

/// One derandomised tick; scheduling is the only random input.
pub fn step_derandomized(
    config: &mut ShadedConfiguration,
    weights: &WeightTable,
    rng: &mut SimRng,
) -> Result<ShadedMove> {
    let n = config.n;
    if n < 2 {
        return Err(Error::NoPartner);
    }
    let int_weights = integer_slot_weights(weights)?;
    step_inner(config, &int_weights, rng)
}

#[inline]
fn step_inner(
    config: &mut ShadedConfiguration,
    int_weights: &[u64],
    rng: &mut SimRng,
) -> Result<ShadedMove> {
    let n = config.n;
    // scheduled agent's class
    let mut r = rng.below(n);
    let mut u_colour = usize::MAX;
    let mut u_shade = 0usize;
    'outer: for (i, per_shade) in config.counts.iter().enumerate() {
        for (s, &c) in per_shade.iter().enumerate() {
            if r < c {
                u_colour = i;
                u_shade = s;
                break 'outer;
            }
            r -= c;
        }
    }
    debug_assert!(u_colour != usize::MAX);

    let mv = if u_shade > 0 {
        // same colour, positive shade, excluding u itself
        let same = config.positive_shade(u_colour) - 1;
        if rng.below(n - 1) < same {
            ShadedMove::ReduceShade { colour: ColourId(u_colour as u32), from_shade: u_shade as u32 }
        } else {
            ShadedMove::Stay
        }
    } else {
        // adopt the partner's colour if the partner has positive shade
        let mut r2 = rng.below(n - 1);
        let mut target = usize::MAX;
        for j in 0..config.counts.len() {
            let pos = config.positive_shade(j);
            if r2 < pos {
                target = j;
                break;
            }
            r2 -= pos;
        }
        if target != usize::MAX {
            ShadedMove::Adopt { from: ColourId(u_colour as u32), to: ColourId(target as u32) }
        } else {
            ShadedMove::Stay
        }
    };

    mv.apply(config, int_weights);
    config.step += 1;
    Ok(mv)
}

/// Exact one-step law of the shaded counts, by class-pair enumeration.
pub fn enumerate_shaded_kernel(
    config: &ShadedConfiguration,
    weights: &WeightTable,
) -> Result<Vec<(ShadedMove, BigRational)>> {
    if config.n < 2 {
        return Err(Error::NoPartner);
    }
    config.validate(weights)?;
    let n = config.n;
    let pairs = BigInt::from(n) * BigInt::from(n - 1);
    let mut out: std::collections::BTreeMap<ShadedMove, BigRational> = Default::default();
    let k = config.counts.len();
    for i in 0..k {
        for s in 0..config.counts[i].len() {
            let cnt_u = config.counts[i][s];
            if cnt_u == 0 {
                continue;
            }
            let mv_and_mass: Vec<(ShadedMove, u64)> = if s > 0 {
                let same = config.positive_shade(i) - 1;
                vec![
                    (ShadedMove::ReduceShade { colour: ColourId(i as u32), from_shade: s as u32 }, same),
                    (ShadedMove::Stay, (n - 1) - same),
                ]
            } else {
                let mut v: Vec<(ShadedMove, u64)> = Vec::new();
                let mut rest = n - 1;
                for j in 0..k {
                    let pos = config.positive_shade(j);
                    if pos > 0 {
                        v.push((
                            ShadedMove::Adopt { from: ColourId(i as u32), to: ColourId(j as u32) },
                            pos,
                        ));
                        rest -= pos;
                    }
                }
                v.push((ShadedMove::Stay, rest));
                v
            };
            for (mv, partners) in mv_and_mass {
                if partners == 0 {
                    continue;
                }
                let p = BigRational::new(
                    BigInt::from(cnt_u) * BigInt::from(partners),
                    pairs.clone(),
                );
                *out.entry(mv).or_insert_with(BigRational::zero) += p;
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// The shaded kernel pushed through the dark/light projection.
pub fn projected_kernel_exact(
    config: &ShadedConfiguration,
    weights: &WeightTable,
) -> Result<ExactKernel> {
    let shaded = enumerate_shaded_kernel(config, weights)?;
    let mut map: std::collections::BTreeMap<Move, BigRational> = Default::default();
    for (mv, p) in shaded {
        *map.entry(mv.project()).or_insert_with(BigRational::zero) += p;
    }
    Ok(ExactKernel { outcomes: map.into_iter().collect() })
}

/// Collapses shades to the binary configuration: `A_i` = positive shades,
/// `a_i` = shade zero. Population and step are preserved.
pub fn project_to_binary(config: &ShadedConfiguration) -> Configuration {
    let dark: Vec<u64> = (0..config.counts.len()).map(|i| config.positive_shade(i)).collect();
    let light: Vec<u64> = config.counts.iter().map(|v| v[0]).collect();
    Configuration { step: config.step, dark_counts: dark, light_counts: light, n: config.n }
}

/// Extra memory an agent needs for the shade of colour weight `w`.
pub fn shade_bits(w: u64) -> u32 {
    let levels = w + 1; // shades 0..=w
    64 - (levels - 1).leading_zeros()
}

impl Serialize for ShadedConfiguration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<[u64; 3]> = self
            .counts
            .iter()
            .enumerate()
            .flat_map(|(i, v)| {
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(move |(s, &c)| [i as u64, s as u64, c])
            })
            .collect();
        let mut st = serializer.serialize_struct("ShadedConfiguration", 3)?;
        st.serialize_field("step", &self.step)?;
        st.serialize_field("counts", &triples)?;
        st.serialize_field("n", &self.n)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ShadedConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            step: u64,
            counts: Vec<[u64; 3]>,
            n: u64,
        }
        let raw = Raw::deserialize(deserializer)?;
        let colours = raw.counts.iter().map(|t| t[0] + 1).max().unwrap_or(0) as usize;
        let mut counts = vec![Vec::new(); colours];
        for [colour, shade, count] in raw.counts {
            let v = &mut counts[colour as usize];
            if v.len() <= shade as usize {
                v.resize(shade as usize + 1, 0);
            }
            v[shade as usize] = count;
        }
        Ok(Self { counts, n: raw.n, step: raw.step })
    }
}
