use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: u32,
    pub tv: f64,
    pub ci: [f64; 2],
    /// Values at or below this level are treated as noise.
    pub floor: f64,
    pub used: bool,
}

impl RatePoint {
    pub fn new(n: u32, tv: f64, ci: [f64; 2], floor: f64) -> Self {
        Self { n, tv, ci, floor, used: false }
    }
}

/// Log-linear fit `ln TV(n) = a + n ln theta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub theta_hat: f64,
    /// `exp(slope +- 1.96 se)`; degenerate when the fit is exact.
    pub theta_ci: [f64; 2],
    pub theta_bound: Option<f64>,
    pub slack: f64,
    /// `theta_hat <= theta_bound * slack`.
    pub within_bound: Option<bool>,
}

/// Least squares on `ln TV` against `n`, using only points strictly above their noise floor.
pub fn fit_rate(mut points: Vec<RatePoint>, theta_bound: Option<f64>, slack: f64) -> Result<RateFit> {
    for p in &mut points {
        p.used = p.tv > p.floor && p.tv > 0.0 && p.tv.is_finite();
    }
    let used: Vec<(f64, f64)> = points.iter().filter(|p| p.used).map(|p| (p.n as f64, p.tv.ln())).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientSignal(format!(
            "{} of {} points lie above the noise floor; at least 3 are needed",
            used.len(),
            points.len()
        )));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSignal("all usable points share one n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = used.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (k - 2.0) / sxx).sqrt();
    let theta_hat = slope.exp();
    Ok(RateFit {
        points,
        slope,
        intercept,
        theta_hat,
        theta_ci: [(slope - 1.96 * se).exp(), (slope + 1.96 * se).exp()],
        theta_bound,
        slack,
        within_bound: theta_bound.map(|b| theta_hat <= b * slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let points = (2..=8).map(|n| RatePoint::new(n, 0.7f64.powi(n as i32), [0.0, 1.0], 0.0)).collect();
        let fit = fit_rate(points, Some(0.75), 1.0).unwrap();
        assert!((fit.theta_hat - 0.7).abs() < 1e-6);
        assert!((fit.intercept).abs() < 1e-9);
        assert_eq!(fit.within_bound, Some(true));
        assert!(fit.theta_ci[1] - fit.theta_ci[0] < 1e-6);
    }

    #[test]
    fn noise_only_is_rejected() {
        let points = (2..=8).map(|n| RatePoint::new(n, 0.01, [0.0, 0.02], 0.01)).collect();
        assert!(matches!(fit_rate(points, None, 1.0), Err(Error::InsufficientSignal(_))));
    }

    #[test]
    fn points_below_floor_are_skipped() {
        let mut points: Vec<RatePoint> =
            (1..=4).map(|n| RatePoint::new(n, 0.5f64.powi(n as i32), [0.0, 1.0], 0.05)).collect();
        points.push(RatePoint::new(5, 0.04, [0.0, 1.0], 0.05));
        let fit = fit_rate(points, None, 1.0).unwrap();
        assert!((fit.theta_hat - 0.5).abs() < 1e-9);
        assert_eq!(fit.points.iter().filter(|p| p.used).count(), 4);
        assert_eq!(fit.within_bound, None);
    }
}
