use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub n0: usize,
    pub n_max: usize,
    /// Cap for dense SVD/LU sections; diagonal sections are cheap and ignore it.
    pub dense_n_max: usize,
    pub rel_tol: f64,
    pub growth_threshold: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n0: 32, n_max: 4096, dense_n_max: 1024, rel_tol: 1e-3, growth_threshold: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub solve_tol: f64,
    pub series_tol: f64,
    pub id_tol: f64,
    pub eq_tol: f64,
    pub ge_tol: f64,
    pub defect_eps: f64,
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solve_tol: 1e-10,
            series_tol: 1e-10,
            id_tol: 1e-11,
            eq_tol: 1e-10,
            ge_tol: 1e-6,
            defect_eps: 1e-8,
            quad_tol: 1e-8,
        }
    }
}

/// Settings for the models that live on intervals rather than in a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntervalConfig {
    /// Gauss nodes on [0,1] for the momentum model.
    pub nodes: usize,
    /// Half-width `L` of the box `[y−L, y+L]` for the point interaction.
    pub delta_half_width: f64,
    /// Coarsest mesh width; each further level halves it.
    pub delta_h0: f64,
    pub delta_levels: usize,
}

impl Default for IntervalConfig {
    fn default() -> Self {
        IntervalConfig { nodes: 128, delta_half_width: 20.0, delta_h0: 0.1, delta_levels: 3 }
    }
}

/// Rectangle `[re0,re1] x [im0,im1]` sampled on an `n_re x n_im` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub re0: f64,
    pub re1: f64,
    pub n_re: usize,
    pub im0: f64,
    pub im1: f64,
    pub n_im: usize,
}

impl Grid {
    pub fn new(re: (f64, f64, usize), im: (f64, f64, usize)) -> Grid {
        Grid { re0: re.0, re1: re.1, n_re: re.2, im0: im.0, im1: im.1, n_im: im.2 }
    }

    /// Parses `re0:re1:nRe,im0:im1:nIm`. A missing imaginary part means the real axis.
    pub fn parse(src: &str) -> Result<Grid> {
        let axis = |s: &str| -> Result<(f64, f64, usize)> {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::parse(src, "axis must be lo:hi:count"));
            }
            let lo = parts[0].trim().parse::<f64>().map_err(|_| Error::parse(src, "bad axis bound"))?;
            let hi = parts[1].trim().parse::<f64>().map_err(|_| Error::parse(src, "bad axis bound"))?;
            let n = parts[2].trim().parse::<usize>().map_err(|_| Error::parse(src, "bad axis count"))?;
            Ok((lo, hi, n))
        };
        let (re, im) = match src.split_once(',') {
            Some((a, b)) => (axis(a)?, axis(b)?),
            None => (axis(src)?, (0.0, 0.0, 1)),
        };
        Ok(Grid::new(re, im))
    }

    fn coord(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Grid points in row-major order (imaginary index outer, real index inner).
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for j in 0..self.n_im {
            let im = Self::coord(self.im0, self.im1, self.n_im, j);
            for k in 0..self.n_re {
                out.push(Complex64::new(Self::coord(self.re0, self.re1, self.n_re, k), im));
            }
        }
        out
    }

    pub fn spacing(&self) -> (f64, f64) {
        let d = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo).abs() / (n - 1) as f64 } else { 0.0 };
        (d(self.re0, self.re1, self.n_re), d(self.im0, self.im1, self.n_im))
    }

    pub fn validate(&self, min_count: usize) -> Result<()> {
        if self.n_re < min_count || self.n_im < min_count {
            return Err(Error::InvalidConfig(format!(
                "grid counts must be >= {min_count} per axis (got {}x{})",
                self.n_re, self.n_im
            )));
        }
        if ![self.re0, self.re1, self.im0, self.im1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("grid bounds must be finite".into()));
        }
        Ok(())
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new((-1.0, 1.0, 21), (-1.0, 1.0, 21))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub truncation: Truncation,
    pub tolerances: Tolerances,
    /// Number of basis vectors probed by the equivalence test.
    pub eq_probes: usize,
    pub grid: Grid,
    pub interval: IntervalConfig,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: Truncation::default(),
            tolerances: Tolerances::default(),
            eq_probes: 64,
            grid: Grid::default(),
            interval: IntervalConfig::default(),
            output: None,
            seed: 0x5eed,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let all = [
            ("solve_tol", t.solve_tol),
            ("series_tol", t.series_tol),
            ("id_tol", t.id_tol),
            ("eq_tol", t.eq_tol),
            ("ge_tol", t.ge_tol),
            ("defect_eps", t.defect_eps),
            ("quad_tol", t.quad_tol),
            ("rel_tol", self.truncation.rel_tol),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be a positive finite number")));
            }
        }
        let tr = &self.truncation;
        if tr.n0 == 0 || tr.n0 > tr.n_max {
            return Err(Error::InvalidConfig(format!("need 0 < n0 <= n_max (n0={}, n_max={})", tr.n0, tr.n_max)));
        }
        if tr.dense_n_max < tr.n0 {
            return Err(Error::InvalidConfig("dense_n_max must be >= n0".into()));
        }
        if !(tr.growth_threshold > 1.0) {
            return Err(Error::InvalidConfig("growth_threshold must exceed 1".into()));
        }
        let d = &self.interval;
        if !(d.delta_h0 > 0.0 && d.delta_h0 < d.delta_half_width) || d.delta_levels < 2 || d.nodes < 2 {
            return Err(Error::InvalidConfig("interval: need 0 < delta_h0 < delta_half_width, delta_levels >= 2, nodes >= 2".into()));
        }
        if self.eq_probes == 0 {
            return Err(Error::InvalidConfig("eq_probes must be positive".into()));
        }
        self.grid.validate(2)
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Largest section size used for dense work.
    pub(crate) fn dense_cap(&self) -> usize {
        self.truncation.dense_n_max.min(self.truncation.n_max)
    }

    /// Fixed truncation for solves, identities and branch handles.
    pub(crate) fn working_n(&self) -> usize {
        (self.truncation.n0 * 8).min(self.dense_cap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::default();
        cfg.tolerances.solve_tol = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.truncation.n0 = 8192;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.grid.n_im = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_roundtrip_with_partial_input() {
        let cfg = RunConfig::from_json(r#"{"truncation":{"n0":16},"seed":7}"#).unwrap();
        assert_eq!(cfg.truncation.n0, 16);
        assert_eq!(cfg.truncation.n_max, 4096);
        assert_eq!(cfg.seed, 7);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn grid_parsing() {
        let g = Grid::parse("-0.5:1.5:41,-0.5:0.5:21").unwrap();
        assert_eq!((g.n_re, g.n_im), (41, 21));
        let pts = g.points();
        assert_eq!(pts.len(), 41 * 21);
        assert_eq!(pts[0], Complex64::new(-0.5, -0.5));
        assert_eq!(pts[40], Complex64::new(1.5, -0.5));
        let axis = Grid::parse("-10:10:201").unwrap();
        assert_eq!(axis.points().len(), 201);
        assert!(Grid::parse("1:2").is_err());
    }
}
