//! Monte-Carlo ball averages `(A_r f)(X)`.

use crate::hyp::{sample_ball, sample_ball_focused, ModelPoint};
use crate::par::{stream_rng, Exec};
use crate::stats::{from_batch_means, Estimate, DEFAULT_BATCHES};

/// Where to concentrate samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    Uniform,
    /// Importance sampling towards the boundary direction with this angle.
    Focused(f64),
}

/// Ball average of `f` over `B(center, r)` with `n` samples split into
/// independent batches; batch `b` draws from stream `stream_base + b`.
#[allow(clippy::too_many_arguments)]
pub fn ball_average<F>(
    center: ModelPoint,
    r: f64,
    n: usize,
    sampling: Sampling,
    seed: u64,
    stream_base: u64,
    exec: Exec,
    f: F,
) -> Estimate
where
    F: Fn(ModelPoint) -> f64 + Sync + Send,
{
    let batches = DEFAULT_BATCHES;
    let per = (n / batches).max(1);
    let means = exec.map(batches, |b| {
        let mut rng = stream_rng(seed, stream_base + b as u64);
        let mut acc = 0.0;
        for _ in 0..per {
            acc += match sampling {
                Sampling::Uniform => f(sample_ball(center, r, &mut rng)),
                Sampling::Focused(th) => {
                    let (p, w) = sample_ball_focused(center, r, th, &mut rng);
                    w * f(p)
                }
            };
        }
        acc / per as f64
    });
    from_batch_means(&means)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_average_exactly() {
        let c = ModelPoint::new(0.1, 50.0).unwrap();
        {
            let s = Sampling::Uniform;
            let e = ball_average(c, 2.0, 2000, s, 1, 0, Exec::Sequential, |_| 3.0);
            assert_eq!(e.mean, 3.0);
        }
    }

    #[test]
    fn height_is_harmonic() {
        // y is harmonic, so its ball average is the value at the center
        let c = ModelPoint::new(0.0, 5.0).unwrap();
        let e = ball_average(
            c,
            1.0,
            400_000,
            Sampling::Uniform,
            2,
            0,
            Exec::Parallel,
            |p| p.y(),
        );
        assert!((e.mean - 5.0).abs() < 4.0 * e.se + 1e-9, "{e:?}");
    }
}
