//! Inverse-transform samplers for the distribution families the benchmark
//! models use: exponential, triangular, and uniform, plus a degenerate
//! constant used by validation models.
//!
//! Every sampler consumes exactly one uniform and is monotone in it, which
//! is what lets antithetic complements induce negative correlation and
//! common random numbers stay synchronized when model parameters change.
//! Acceptance-rejection is deliberately absent: it would consume a variable
//! number of draws per sample and break stream alignment.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rng::RandomStream;

#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("invalid distribution parameters: {0}")]
    Params(String),
    #[error("u must lie strictly in (0,1), got {0}")]
    UniformOutOfRange(f64),
    #[error("cannot parse distribution literal `{0}`: {1}")]
    Parse(String, String),
}

/// A sampling distribution over non-negative time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    /// Exponential with the given mean.
    Expo { mean: f64 },
    /// Triangular over [min, max] with the given mode.
    Tria { min: f64, mode: f64, max: f64 },
    /// Uniform over [low, high].
    Unif { low: f64, high: f64 },
    /// Point mass. Still consumes one draw so stream alignment is uniform
    /// across route variants.
    Const { value: f64 },
}

impl Distribution {
    pub fn expo(mean: f64) -> Result<Self, DistError> {
        if !mean.is_finite() || mean <= 0.0 {
            return Err(DistError::Params(format!("EXPO mean must be > 0, got {mean}")));
        }
        Ok(Distribution::Expo { mean })
    }

    pub fn tria(min: f64, mode: f64, max: f64) -> Result<Self, DistError> {
        if !(min <= mode && mode <= max && min < max)
            || !min.is_finite()
            || !mode.is_finite()
            || !max.is_finite()
        {
            return Err(DistError::Params(format!(
                "TRIA requires min <= mode <= max and min < max, got ({min},{mode},{max})"
            )));
        }
        Ok(Distribution::Tria { min, mode, max })
    }

    pub fn unif(low: f64, high: f64) -> Result<Self, DistError> {
        if !low.is_finite() || !high.is_finite() || low >= high {
            return Err(DistError::Params(format!(
                "UNIF requires low < high, got ({low},{high})"
            )));
        }
        Ok(Distribution::Unif { low, high })
    }

    pub fn constant(value: f64) -> Result<Self, DistError> {
        if !value.is_finite() || value < 0.0 {
            return Err(DistError::Params(format!(
                "CONST value must be >= 0, got {value}"
            )));
        }
        Ok(Distribution::Const { value })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Expo { mean } => mean,
            Distribution::Tria { min, mode, max } => (min + mode + max) / 3.0,
            Distribution::Unif { low, high } => (low + high) / 2.0,
            Distribution::Const { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Expo { mean } => mean * mean,
            Distribution::Tria { min, mode, max } => {
                (min * min + mode * mode + max * max - min * mode - min * max - mode * max) / 18.0
            }
            Distribution::Unif { low, high } => (high - low) * (high - low) / 12.0,
            Distribution::Const { .. } => 0.0,
        }
    }

    /// The inverse CDF evaluated at `u`, strictly increasing in `u` for the
    /// non-degenerate families.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64, DistError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(DistError::UniformOutOfRange(u));
        }
        Ok(match *self {
            // -mean*ln(1-u) rather than -mean*ln(u): increasing in u, so
            // antithetic semantics match the other families.
            Distribution::Expo { mean } => -mean * (1.0 - u).ln(),
            Distribution::Tria { min, mode, max } => {
                let break_u = (mode - min) / (max - min);
                if u < break_u {
                    min + (u * (max - min) * (mode - min)).sqrt()
                } else {
                    max - ((1.0 - u) * (max - min) * (max - mode)).sqrt()
                }
            }
            Distribution::Unif { low, high } => low + u * (high - low),
            Distribution::Const { value } => value,
        })
    }

    /// Draws one sample: exactly one uniform from `stream`, mapped through
    /// [`Distribution::inverse_cdf`].
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        let u = stream.next_uniform();
        self.inverse_cdf(u).expect("stream uniforms are in (0,1)")
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Expo { mean } => write!(f, "EXPO({mean})"),
            Distribution::Tria { min, mode, max } => write!(f, "TRIA({min},{mode},{max})"),
            Distribution::Unif { low, high } => write!(f, "UNIF({low},{high})"),
            Distribution::Const { value } => write!(f, "CONST({value})"),
        }
    }
}

/// Parses literals of the form `EXPO(13)`, `TRIA(1,3,6)`, `UNIF(0.1,0.6)`,
/// `CONST(5)` as they appear in model config files.
impl FromStr for Distribution {
    type Err = DistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let err = |reason: &str| DistError::Parse(s.to_string(), reason.to_string());
        let open = text.find('(').ok_or_else(|| err("missing `(`"))?;
        if !text.ends_with(')') {
            return Err(err("missing `)`"));
        }
        let name = text[..open].trim().to_ascii_uppercase();
        let args: Vec<f64> = text[open + 1..text.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(&format!("bad number: {e}")))?;
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(&format!("expected {n} argument(s), got {}", args.len())))
            }
        };
        match name.as_str() {
            "EXPO" => {
                arity(1)?;
                Distribution::expo(args[0])
            }
            "TRIA" => {
                arity(3)?;
                Distribution::tria(args[0], args[1], args[2])
            }
            "UNIF" => {
                arity(2)?;
                Distribution::unif(args[0], args[1])
            }
            "CONST" => {
                arity(1)?;
                Distribution::constant(args[0])
            }
            other => Err(err(&format!("unknown family `{other}`"))),
        }
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomStream, StreamMode, StreamSeed};
    use proptest::prelude::*;

    #[test]
    fn expo_median_is_mean_ln2() {
        let d = Distribution::expo(13.0).unwrap();
        let x = d.inverse_cdf(0.5).unwrap();
        assert!((x - 9.010913347279288).abs() < 1e-12, "{x}");
    }

    #[test]
    fn tria_known_points() {
        let sym = Distribution::tria(0.0, 1.0, 2.0).unwrap();
        assert!((sym.inverse_cdf(0.5).unwrap() - 1.0).abs() < 1e-15);

        let skewed = Distribution::tria(0.0, 1.0, 4.0).unwrap();
        // u = (mode-min)/(max-min) is the CDF breakpoint.
        assert!((skewed.inverse_cdf(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((skewed.inverse_cdf(0.5).unwrap() - 1.550510257216822).abs() < 1e-12);
    }

    // Independent oracle: invert the triangular CDF by bisection instead of
    // the closed form, and check both agree.
    fn tria_cdf(min: f64, mode: f64, max: f64, x: f64) -> f64 {
        if x <= min {
            0.0
        } else if x <= mode {
            (x - min) * (x - min) / ((max - min) * (mode - min))
        } else if x < max {
            1.0 - (max - x) * (max - x) / ((max - min) * (max - mode))
        } else {
            1.0
        }
    }

    fn tria_quantile_bisect(min: f64, mode: f64, max: f64, u: f64) -> f64 {
        let (mut lo, mut hi) = (min, max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tria_cdf(min, mode, max, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn tria_closed_form_matches_bisection_oracle() {
        let d = Distribution::tria(0.0, 1.0, 4.0).unwrap();
        for i in 1..40 {
            let u = i as f64 / 40.0;
            let closed = d.inverse_cdf(u).unwrap();
            let oracle = tria_quantile_bisect(0.0, 1.0, 4.0, u);
            assert!((closed - oracle).abs() < 1e-9, "u={u}: {closed} vs {oracle}");
        }
    }

    #[test]
    fn unif_affine_map() {
        let d = Distribution::unif(2.0, 6.0).unwrap();
        assert_eq!(d.inverse_cdf(0.25).unwrap(), 3.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(Distribution::expo(0.0).is_err());
        assert!(Distribution::expo(-1.0).is_err());
        assert!(Distribution::tria(1.0, 0.5, 2.0).is_err());
        assert!(Distribution::tria(1.0, 1.0, 1.0).is_err());
        assert!(Distribution::unif(2.0, 2.0).is_err());
        assert!(Distribution::constant(-1.0).is_err());
    }

    #[test]
    fn invalid_u_rejected() {
        let d = Distribution::expo(1.0).unwrap();
        assert!(d.inverse_cdf(0.0).is_err());
        assert!(d.inverse_cdf(1.0).is_err());
        assert!(d.inverse_cdf(-0.3).is_err());
        assert!(d.inverse_cdf(f64::NAN).is_err());
    }

    #[test]
    fn sample_consumes_exactly_one_draw() {
        let d = Distribution::tria(1.0, 3.0, 6.0).unwrap();
        let mut stream = RandomStream::new(StreamSeed(9), StreamMode::Direct);
        for expected in 1..=10u64 {
            d.sample(&mut stream);
            assert_eq!(stream.draw_count(), expected);
        }
    }

    #[test]
    fn sample_replay_is_deterministic() {
        let d = Distribution::expo(2.0).unwrap();
        let mut a = RandomStream::new(StreamSeed(4), StreamMode::Direct);
        let mut b = RandomStream::new(StreamSeed(4), StreamMode::Direct);
        for _ in 0..20 {
            assert_eq!(d.sample(&mut a).to_bits(), d.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn antithetic_samples_antimonotone() {
        let d = Distribution::expo(1.0).unwrap();
        let mut direct = RandomStream::new(StreamSeed(11), StreamMode::Direct);
        let mut anti = RandomStream::new(StreamSeed(11), StreamMode::Antithetic);
        for _ in 0..1000 {
            let u = direct.next_uniform();
            let x = d.inverse_cdf(u).unwrap();
            let x_anti = d.sample(&mut anti);
            // Complemented uniform lands on the other side of the median.
            if u > 0.5 {
                assert!(x > x_anti);
            } else {
                assert!(x < x_anti);
            }
        }
    }

    #[test]
    fn moments_match_analytic_within_three_se() {
        let cases = [
            Distribution::expo(13.0).unwrap(),
            Distribution::tria(1.0, 3.0, 6.0).unwrap(),
            Distribution::unif(0.1, 0.6).unwrap(),
        ];
        for (i, d) in cases.iter().enumerate() {
            let mut stream = RandomStream::new(StreamSeed(500 + i as u64), StreamMode::Direct);
            let n = 1_000_000usize;
            let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
            let mu = d.mean();
            for _ in 0..n {
                let x = d.sample(&mut stream);
                s1 += x;
                let c = x - mu;
                s2 += c * c;
                s4 += c * c * c * c;
            }
            let nf = n as f64;
            let mean = s1 / nf;
            let var = s2 / nf;
            let m4 = s4 / nf;
            let se_mean = (d.variance() / nf).sqrt();
            let se_var = ((m4 - var * var) / nf).sqrt();
            assert!(
                (mean - d.mean()).abs() < 3.0 * se_mean,
                "{d}: mean {mean} vs {}",
                d.mean()
            );
            assert!(
                (var - d.variance()).abs() < 3.0 * se_var,
                "{d}: var {var} vs {}",
                d.variance()
            );
        }
        // The spec-level bound on the EXPO(13) mean at this sample size.
        let mut stream = RandomStream::new(StreamSeed(42), StreamMode::Direct);
        let d = Distribution::expo(13.0).unwrap();
        let mean = (0..1_000_000).map(|_| d.sample(&mut stream)).sum::<f64>() / 1e6;
        assert!((mean - 13.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn parse_literals() {
        assert_eq!(
            "EXPO(13)".parse::<Distribution>().unwrap(),
            Distribution::expo(13.0).unwrap()
        );
        assert_eq!(
            "TRIA(1, 3, 6)".parse::<Distribution>().unwrap(),
            Distribution::tria(1.0, 3.0, 6.0).unwrap()
        );
        assert_eq!(
            "UNIF(0.1,0.6)".parse::<Distribution>().unwrap(),
            Distribution::unif(0.1, 0.6).unwrap()
        );
        assert!("GAMMA(2,3)".parse::<Distribution>().is_err());
        assert!("EXPO(13".parse::<Distribution>().is_err());
        assert!("EXPO(1,2)".parse::<Distribution>().is_err());
    }

    proptest! {
        #[test]
        fn inverse_cdf_monotone_in_u(
            mean in 0.1f64..50.0,
            a in 0.0f64..10.0,
            mode_frac in 0.0f64..1.0,
            width in 0.1f64..10.0,
            u1 in 0.001f64..0.999,
            u2 in 0.001f64..0.999,
        ) {
            let (lo, hi) = if u1 < u2 { (u1, u2) } else { (u2, u1) };
            prop_assume!(lo < hi);
            let dists = [
                Distribution::expo(mean).unwrap(),
                Distribution::tria(a, a + mode_frac * width, a + width).unwrap(),
                Distribution::unif(a, a + width).unwrap(),
            ];
            for d in dists {
                let x_lo = d.inverse_cdf(lo).unwrap();
                let x_hi = d.inverse_cdf(hi).unwrap();
                prop_assert!(x_lo < x_hi, "{d} not increasing: F^-1({lo})={x_lo}, F^-1({hi})={x_hi}");
            }
        }

        #[test]
        fn samples_respect_support(
            a in 0.0f64..10.0,
            mode_frac in 0.0f64..1.0,
            width in 0.1f64..10.0,
            u in 0.001f64..0.999,
        ) {
            let tria = Distribution::tria(a, a + mode_frac * width, a + width).unwrap();
            let x = tria.inverse_cdf(u).unwrap();
            prop_assert!(x >= a && x <= a + width);
            let unif = Distribution::unif(a, a + width).unwrap();
            let y = unif.inverse_cdf(u).unwrap();
            prop_assert!(y >= a && y <= a + width);
            let expo = Distribution::expo(1.0 + a).unwrap();
            prop_assert!(expo.inverse_cdf(u).unwrap() >= 0.0);
        }
    }
}
