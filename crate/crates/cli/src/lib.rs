//! Command-line front end: scenario files and the verification battery.

pub mod battery;
pub mod scenario;

/// Exit status for a run whose checks all pass.
pub const EXIT_PASS: i32 = 0;
/// Exit status for failed checks or runtime errors.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that overrides `--jobs`.
pub const JOBS_ENV: &str = "SPECTRAL_BOUNDS_JOBS";

/// The worker count: the environment variable wins over the flag.
pub fn resolve_jobs(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, String> {
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{JOBS_ENV} must be a positive integer, got {v:?}")),
        },
        None => Ok(flag),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_flag() {
        assert_eq!(resolve_jobs(Some(4), Some("2")), Ok(Some(2)));
        assert_eq!(resolve_jobs(Some(4), None), Ok(Some(4)));
        assert_eq!(resolve_jobs(None, Some(" ")), Ok(None));
        assert!(resolve_jobs(Some(4), Some("zero")).is_err());
        assert!(resolve_jobs(None, Some("0")).is_err());
    }
}
