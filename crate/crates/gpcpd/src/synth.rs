//! Seeded generation of piecewise-stationary GP sample paths with planted
//! covariance changes. Segments are sampled independently (structural-break
//! semantics) and white observation noise is added afterwards.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::Series;
use crate::kernels::KernelSpec;
use crate::linalg::{cholesky, SymMatrix};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    /// First (1-based) index governed by this segment's kernel.
    pub start: usize,
    pub kernel: KernelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub total_length: usize,
    pub segments: Vec<SegmentSpec>,
    /// White observation noise added to the sampled signal.
    pub noise_variance: f64,
    /// When present, the start of segment `i + 1` is redrawn uniformly from
    /// the open interval `intervals[i]`.
    pub cp_draw_intervals: Option<Vec<(usize, usize)>>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.total_length == 0 {
            return Err(Error::invalid("scenario", "total_length must be >= 1"));
        }
        if self.segments.is_empty() || self.segments[0].start != 1 {
            return Err(Error::invalid("scenario", "first segment must start at 1"));
        }
        let mut prev = 0usize;
        for s in &self.segments {
            s.kernel.validate()?;
            if s.start <= prev {
                return Err(Error::invalid(
                    "scenario",
                    "segment starts must be strictly increasing",
                ));
            }
            if s.start > self.total_length {
                return Err(Error::invalid("scenario", "segment start beyond end"));
            }
            prev = s.start;
        }
        if !(self.noise_variance >= 0.0) {
            return Err(Error::invalid("scenario", "noise_variance must be >= 0"));
        }
        if let Some(intervals) = &self.cp_draw_intervals {
            if intervals.len() != self.segments.len() - 1 {
                return Err(Error::invalid(
                    "scenario",
                    "need one draw interval per change point",
                ));
            }
            let mut prev_hi = 1usize;
            for &(lo, hi) in intervals {
                if lo + 1 >= hi || lo < 1 || hi > self.total_length {
                    return Err(Error::invalid(
                        "scenario",
                        format!("interval ({lo}, {hi}) is empty or out of range"),
                    ));
                }
                if lo < prev_hi {
                    return Err(Error::invalid("scenario", "intervals must be disjoint"));
                }
                prev_hi = hi;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    LenChange,
    VarChange,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "LEN_CHANGE" => Ok(Preset::LenChange),
            "VAR_CHANGE" => Ok(Preset::VarChange),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// The two synthetic setups: 400 points, two change points drawn from
/// (75, 125) and (275, 325), observation noise 0.1. LEN_CHANGE switches the
/// length scale 3 -> 20 -> 1 at unit signal variance; VAR_CHANGE switches
/// the signal variance 1 -> 4 -> 0.3 at length scale 3.
pub fn preset(which: Preset, seed: u64) -> ScenarioSpec {
    let seg = |start: usize, sv: f64, l: f64| SegmentSpec {
        start,
        kernel: KernelSpec {
            family: crate::kernels::KernelFamily::Rbf,
            signal_variance: sv,
            length_scale: l,
            noise_variance: 0.0,
        },
    };
    let segments = match which {
        Preset::LenChange => vec![seg(1, 1.0, 3.0), seg(100, 1.0, 20.0), seg(300, 1.0, 1.0)],
        Preset::VarChange => vec![seg(1, 1.0, 3.0), seg(100, 4.0, 3.0), seg(300, 0.3, 3.0)],
    };
    ScenarioSpec {
        total_length: 400,
        segments,
        noise_variance: 0.1,
        cp_draw_intervals: Some(vec![(75, 125), (275, 325)]),
        seed,
    }
}

/// Samples a piecewise GP path. Each segment's latent signal is drawn from
/// a zero-mean GP with that segment's kernel (noise-free), independently of
/// the other segments; white noise of variance `spec.noise_variance` is
/// added last. Deterministic given `spec.seed`.
pub fn sample_piecewise_gp(spec: &ScenarioSpec) -> Result<(Series, Vec<usize>)> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed);

    let mut starts: Vec<usize> = spec.segments.iter().map(|s| s.start).collect();
    if let Some(intervals) = &spec.cp_draw_intervals {
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            starts[i + 1] = rng.gen_range(lo + 1..hi);
        }
    }
    let true_cps: Vec<usize> = starts[1..].to_vec();

    let mut values = Vec::with_capacity(spec.total_length);
    for (i, seg) in spec.segments.iter().enumerate() {
        let start = starts[i];
        let end = if i + 1 < starts.len() {
            starts[i + 1] - 1
        } else {
            spec.total_length
        };
        let len = end + 1 - start;
        // Latent signal only; the kernel's own noise field is ignored here.
        let cov = SymMatrix::from_fn(len, |a, b| seg.kernel.value_at_lag(a as f64 - b as f64))?;
        let f = cholesky(&cov)?;
        let z: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        values.extend(f.lower_times(&z)?);
    }
    if spec.noise_variance > 0.0 {
        let sd = spec.noise_variance.sqrt();
        for v in &mut values {
            let e: f64 = rng.sample(StandardNormal);
            *v += sd * e;
        }
    }
    Ok((Series::new(values)?, true_cps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_the_documented_shape() {
        let s = preset(Preset::LenChange, 1);
        assert_eq!(s.total_length, 400);
        assert_eq!(s.noise_variance, 0.1);
        let ls: Vec<f64> = s.segments.iter().map(|g| g.kernel.length_scale).collect();
        assert_eq!(ls, vec![3.0, 20.0, 1.0]);
        assert!(s.segments.iter().all(|g| g.kernel.signal_variance == 1.0));

        let s = preset(Preset::VarChange, 1);
        let vs: Vec<f64> = s.segments.iter().map(|g| g.kernel.signal_variance).collect();
        assert_eq!(vs, vec![1.0, 4.0, 0.3]);
        assert!(s.segments.iter().all(|g| g.kernel.length_scale == 3.0));
    }

    #[test]
    fn unknown_preset_name_errors() {
        assert!("SOMETHING_ELSE".parse::<Preset>().is_err());
        assert!(matches!("len_change".parse::<Preset>(), Ok(Preset::LenChange)));
    }

    #[test]
    fn sampling_is_deterministic_and_cps_stay_in_intervals() {
        let spec = preset(Preset::VarChange, 99);
        let (a, cps_a) = sample_piecewise_gp(&spec).unwrap();
        let (b, cps_b) = sample_piecewise_gp(&spec).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(cps_a, cps_b);
        assert_eq!(a.len(), 400);
        assert!(cps_a[0] > 75 && cps_a[0] < 125);
        assert!(cps_a[1] > 275 && cps_a[1] < 325);
    }

    #[test]
    fn near_iid_segment_has_unit_sample_variance() {
        let spec = ScenarioSpec {
            total_length: 1000,
            segments: vec![SegmentSpec {
                start: 1,
                kernel: KernelSpec::rbf(1.0, 1e-3, 0.0).unwrap(),
            }],
            noise_variance: 0.0,
            cp_draw_intervals: None,
            seed: 12345,
        };
        let (x, cps) = sample_piecewise_gp(&spec).unwrap();
        assert!(cps.is_empty());
        let n = x.len() as f64;
        let mean: f64 = x.values().iter().sum::<f64>() / n;
        let var: f64 = x.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(
            (0.85..=1.15).contains(&var),
            "sample variance {var} outside [0.85, 1.15]"
        );
    }

    #[test]
    fn identical_segments_decorrelate_across_the_boundary() {
        // Two independent halves: the empirical cross-covariance at the
        // boundary should be near zero on average over seeds.
        let kern = KernelSpec::rbf(1.0, 5.0, 0.0).unwrap();
        let mut acc = 0.0;
        let seeds = 200;
        for seed in 0..seeds {
            let spec = ScenarioSpec {
                total_length: 40,
                segments: vec![
                    SegmentSpec { start: 1, kernel: kern },
                    SegmentSpec { start: 21, kernel: kern },
                ],
                noise_variance: 0.0,
                cp_draw_intervals: None,
                seed,
            };
            let (x, _) = sample_piecewise_gp(&spec).unwrap();
            acc += x.values()[19] * x.values()[20];
        }
        let mean_cross = acc / seeds as f64;
        // Under one stationary draw this would be near k(1) ~ 0.98.
        assert!(
            mean_cross.abs() < 0.25,
            "boundary covariance {mean_cross} should be near zero"
        );
    }
}
