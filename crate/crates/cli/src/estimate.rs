/// Projected wall time, seconds, of `n_simulations * n_iterations` runs of `n_steps` each.
pub fn cmd_estimate(step_time_s: f64, n_steps: usize, n_simulations: u64, n_iterations: u64) -> f64 {
    step_time_s * n_steps as f64 * n_simulations as f64 * n_iterations as f64
}

/// `dd:hh:mm:ss`, rounded to the nearest second. Days widen past 99.
pub fn format_dhms(seconds: f64) -> String {
    let total = seconds.max(0.0).round() as u64;
    let (d, rem) = (total / 86_400, total % 86_400);
    format!("{:02}:{:02}:{:02}:{:02}", d, rem / 3600, rem % 3600 / 60, rem % 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run() {
        assert_eq!(format_dhms(cmd_estimate(0.1, 1700, 1, 1)), "00:00:02:50");
    }

    #[test]
    fn zero_simulations() {
        assert_eq!(cmd_estimate(0.37, 17_000, 0, 10), 0.0);
        assert_eq!(format_dhms(0.0), "00:00:00:00");
    }

    #[test]
    fn long_campaign() {
        // 1000 runs x 10 iterations of 1700 steps at 0.05 s
        assert_eq!(format_dhms(cmd_estimate(0.05, 1700, 1000, 10)), "09:20:06:40");
        assert_eq!(format_dhms(86_400.0 * 123.0 + 61.0), "123:00:01:01");
    }
}
