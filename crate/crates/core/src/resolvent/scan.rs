use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PairContext, Status};
use crate::config::{Grid, RunConfig};
use crate::error::Result;
use crate::operator::{CertMethod, CoefficientOperator};
use crate::report::fmt_f64;
use crate::scale::ScaleFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInfo {
    pub from: String,
    pub to: String,
    pub certificate: CertMethod,
    #[serde(with = "crate::report::inf_as_null")]
    pub norm_bound: f64,
}

impl PairInfo {
    pub fn label(&self) -> String {
        format!("({},{})", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStatus {
    pub status: Status,
    pub c_low: f64,
    pub d_high: f64,
    pub witness_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub lambda: Complex64,
    /// One entry per pair, in the order of `SpectrumMap::pairs`.
    pub statuses: Vec<PairStatus>,
    pub union_resolvent: bool,
}

impl ScanCell {
    /// Whether every pair gave a definite answer.
    pub fn conclusive(&self) -> bool {
        self.union_resolvent || self.statuses.iter().all(|s| s.status != Status::Inconclusive)
    }
}

/// Status of `λ` for `(E,F)` next to that of `λ̄` for `(F^×,E^×)` under `X†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub cell: usize,
    pub pair: usize,
    pub status: Status,
    pub dual_status: Status,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMap {
    pub operator: String,
    pub family: Vec<String>,
    pub grid: Option<Grid>,
    pub pairs: Vec<PairInfo>,
    pub cells: Vec<ScanCell>,
    pub duality: Option<Vec<DualityRow>>,
}

impl SpectrumMap {
    /// Grid points that lie in the union resolvent set.
    pub fn resolvent_points(&self) -> Vec<Complex64> {
        self.cells.iter().filter(|c| c.union_resolvent).map(|c| c.lambda).collect()
    }

    /// Indices of pairs that are `resolvent` at some point.
    pub fn contributing_pairs(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&p| self.cells.iter().any(|c| c.statuses[p].status == Status::Resolvent))
            .collect()
    }

    pub fn duality_agrees(&self) -> Option<bool> {
        self.duality.as_ref().map(|rows| rows.iter().all(|r| r.agree))
    }

    /// One row per `λ` per pair.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "pair", "status", "c_low", "d_high", "defect"])?;
        for cell in &self.cells {
            for (info, s) in self.pairs.iter().zip(&cell.statuses) {
                let defect = match s.status {
                    Status::Resolvent => "0".to_string(),
                    Status::RegularDefect(d) => d.to_string(),
                    _ => String::new(),
                };
                w.write_record([
                    fmt_f64(cell.lambda.re),
                    fmt_f64(cell.lambda.im),
                    info.label(),
                    s.status.to_string(),
                    fmt_f64(s.c_low),
                    fmt_f64(s.d_high),
                    defect,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `re, im, union_resolvent` for plotting.
    pub fn write_plot_data(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "status"])?;
        for cell in &self.cells {
            let status = if cell.union_resolvent {
                "resolvent"
            } else if cell.conclusive() {
                "spectrum"
            } else {
                "inconclusive"
            };
            w.write_record([fmt_f64(cell.lambda.re), fmt_f64(cell.lambda.im), status.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pair_status(ctx: &PairContext, lambda: Complex64, cfg: &RunConfig) -> Result<PairStatus> {
    let c = ctx.classify(lambda, cfg)?;
    Ok(PairStatus { status: c.status, c_low: c.c_low(), d_high: c.d_high(), witness_n: c.witness_n() })
}

/// Runs `f` over `0..len` on scoped threads; results come back in index order.
fn par_map<T: Send>(len: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(len.max(1));
    if threads <= 1 {
        return (0..len).map(&f).collect();
    }
    let f = &f;
    let chunks: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| s.spawn(move || (t..len).step_by(threads).map(f).collect::<Result<Vec<T>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut parts: Vec<std::vec::IntoIter<T>> = Vec::with_capacity(threads);
    for c in chunks {
        parts.push(c?.into_iter());
    }
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        out.push(parts[i % threads].next().expect("chunk length"));
    }
    Ok(out)
}

pub fn union_spectrum_scan(x: &CoefficientOperator, family: &ScaleFamily, grid: &Grid, cfg: &RunConfig) -> Result<SpectrumMap> {
    let mut map = union_spectrum_scan_with(x, family, &grid.points(), cfg)?;
    map.grid = Some(*grid);
    Ok(map)
}

/// Union scan over an arbitrary list of points.
pub fn union_spectrum_scan_with(x: &CoefficientOperator, family: &ScaleFamily, points: &[Complex64], cfg: &RunConfig) -> Result<SpectrumMap> {
    crate::linalg::init();
    let spaces = family.spaces();
    let pair_idx = family.admissible_pairs();
    let contexts: Vec<PairContext> = pair_idx.iter().map(|&(i, j)| PairContext::new(x, &spaces[i], &spaces[j], cfg)).collect::<Result<_>>()?;
    let pairs = contexts
        .iter()
        .map(|c| PairInfo {
            from: c.e.label().into(),
            to: c.f.label().into(),
            certificate: c.certificate.method,
            norm_bound: c.certificate.norm_bound,
        })
        .collect();
    let cells = par_map(points.len(), |k| {
        let statuses = contexts.iter().map(|c| pair_status(c, points[k], cfg)).collect::<Result<Vec<_>>>()?;
        let union_resolvent = statuses.iter().any(|s| s.status == Status::Resolvent);
        Ok(ScanCell { lambda: points[k], statuses, union_resolvent })
    })?;

    let duality = if family.closed_under_duality() && !family.is_empty() {
        let xa = x.adjoint();
        let dual_contexts: Vec<PairContext> = pair_idx
            .iter()
            .map(|&(i, j)| PairContext::new(&xa, &spaces[j].dual(), &spaces[i].dual(), cfg))
            .collect::<Result<_>>()?;
        let rows = par_map(points.len(), |k| {
            dual_contexts
                .iter()
                .enumerate()
                .map(|(p, c)| {
                    let status = cells[k].statuses[p].status;
                    let dual_status = c.classify(points[k].conj(), cfg)?.status;
                    Ok(DualityRow { cell: k, pair: p, status, dual_status, agree: status == dual_status })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        Some(rows.into_iter().flatten().collect())
    } else {
        None
    };

    Ok(SpectrumMap {
        operator: x.name.clone(),
        family: spaces.iter().map(|s| s.label().to_string()).collect(),
        grid: None,
        pairs,
        cells,
        duality,
    })
}
