//! Counter-based deterministic RNG for reproducible simulation.
//!
//! Every stream is identified by a `(seed, stream_id)` pair and produces the
//! same sequence on every platform. Streams for different trials and arms are
//! derived by hashing, so they can be consumed independently and in parallel
//! without coordination.

/// Weyl increment, 2^64 / golden ratio.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Hash a seed together with a list of stream labels into a stream id.
pub fn derive_stream_id(seed: u64, labels: &[u64]) -> u64 {
    let mut acc = mix64(seed ^ GOLDEN);
    for &l in labels {
        acc = mix64(acc.wrapping_add(GOLDEN) ^ mix64(l));
    }
    acc
}

/// A counter-based random stream: the n-th output is a pure function of
/// `(seed, stream_id, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream {
            key: mix64(seed ^ mix64(stream_id)),
            counter: 0,
        }
    }

    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline(always)]
    pub fn next_open01(&mut self) -> f64 {
        // 53 bits, offset by half an ulp so 0 and 1 are excluded
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw via the inverse CDF.
    #[inline(always)]
    pub fn next_standard_normal(&mut self) -> f64 {
        normal_inv_cdf(self.next_open01())
    }

    /// Uniform integer in `[0, n)` by rejection, bias-free.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

/// One independent stream per arm of a trial, so adaptive sampling order
/// cannot perturb any other arm's sequence.
pub struct ArmStreams {
    streams: Vec<RngStream>,
}

impl ArmStreams {
    pub fn new(master_seed: u64, trial_index: u64, n_arms: usize) -> Self {
        ArmStreams {
            streams: (0..n_arms)
                .map(|a| {
                    RngStream::new(
                        master_seed,
                        derive_stream_id(master_seed, &[trial_index, a as u64]),
                    )
                })
                .collect(),
        }
    }

    #[inline(always)]
    pub fn arm(&mut self, arm_id: usize) -> &mut RngStream {
        &mut self.streams[arm_id]
    }
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9). Chosen over rejection methods so that one
/// uniform draw maps to exactly one normal draw on every platform.
pub fn normal_inv_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}
