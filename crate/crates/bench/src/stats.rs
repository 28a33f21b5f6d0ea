use std::time::{Duration, Instant};

/// Summary of per-iteration wall times, in microseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean_us: f64,
    pub median_us: f64,
    pub p99_us: f64,
}

/// Nearest-rank percentile of sorted data, `p` in `(0, 100]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn summarize(samples_ns: &[u64]) -> Summary {
    assert!(!samples_ns.is_empty(), "no samples");
    let mut us: Vec<f64> = samples_ns.iter().map(|&ns| ns as f64 / 1e3).collect();
    us.sort_by(f64::total_cmp);
    let n = us.len();
    let median_us = if n % 2 == 1 {
        us[n / 2]
    } else {
        0.5 * (us[n / 2 - 1] + us[n / 2])
    };
    Summary {
        mean_us: us.iter().sum::<f64>() / n as f64,
        median_us,
        p99_us: percentile(&us, 99.0),
    }
}

/// Runs `body` `warmup` times untimed, then `iterations` times timed.
pub fn time_iterations<F: FnMut(usize)>(warmup: usize, iterations: usize, mut body: F) -> Vec<u64> {
    for i in 0..warmup {
        body(i);
    }
    (0..iterations)
        .map(|i| {
            let start = Instant::now();
            body(i);
            start.elapsed().as_nanos() as u64
        })
        .collect()
}

/// Smallest nonzero step observed between consecutive monotonic clock reads.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..1000 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}
