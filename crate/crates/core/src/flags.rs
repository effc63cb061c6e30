//! Parsers for the compact command-line value syntaxes.

use thiserror::Error;

use crate::curves::db_grid;
use crate::model::{HardcoreLaneModel, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlagError {
    #[error("expected `λ:c` pairs separated by commas, got {0:?}")]
    LaneSyntax(String),
    #[error("expected `lo:hi:n` with lo < hi and n ≥ 2, got {0:?}")]
    RangeSyntax(String),
    #[error("lane {index}: {source}")]
    Lane { index: usize, source: ModelError },
}

/// Parses `λ:c,λ:c,…` into lane models, in order.
pub fn parse_lane_params(text: &str) -> Result<Vec<HardcoreLaneModel>, FlagError> {
    let syntax = || FlagError::LaneSyntax(text.to_string());
    if text.trim().is_empty() {
        return Err(syntax());
    }
    text.split(',')
        .enumerate()
        .map(|(index, pair)| {
            let (l, c) = pair.trim().split_once(':').ok_or_else(syntax)?;
            let lambda: f64 = l.trim().parse().map_err(|_| syntax())?;
            let c: f64 = c.trim().parse().map_err(|_| syntax())?;
            HardcoreLaneModel::from_intensity(lambda, c)
                .map_err(|source| FlagError::Lane { index, source })
        })
        .collect()
}

/// Parses `lo:hi:n` (decibels) into `n` thresholds on the linear scale.
pub fn parse_db_range(text: &str) -> Result<Vec<f64>, FlagError> {
    let syntax = || FlagError::RangeSyntax(text.to_string());
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(syntax());
    };
    let lo: f64 = lo.parse().map_err(|_| syntax())?;
    let hi: f64 = hi.parse().map_err(|_| syntax())?;
    let n: usize = n.parse().map_err(|_| syntax())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && (2..=1_000_000).contains(&n)) {
        return Err(syntax());
    }
    Ok(db_grid(lo, hi, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanes() {
        let m = parse_lane_params("0.0248:7.10, 0.0218:11.05,0.0205:14.82").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[1].c(), 11.05);
        assert!(matches!(
            parse_lane_params("0.1"),
            Err(FlagError::LaneSyntax(_))
        ));
        assert!(matches!(
            parse_lane_params(""),
            Err(FlagError::LaneSyntax(_))
        ));
        assert!(matches!(
            parse_lane_params("0.1:1,0.1:20"),
            Err(FlagError::Lane { index: 1, .. })
        ));
    }

    #[test]
    fn db_ranges() {
        let g = parse_db_range("-10:20:61").unwrap();
        assert_eq!(g.len(), 61);
        assert!((g[0] - 0.1).abs() < 1e-15);
        for bad in ["1:1:5", "0:10", "0:10:1", "a:1:3", "0:inf:4"] {
            assert!(parse_db_range(bad).is_err(), "{bad}");
        }
    }
}
