use std::io::Write;

use super::record::{fmt_float, least_squares_slope};
use super::{run, ExperimentConfig, RunRecord};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two runs side by side. Ratios are `b / a`.
#[derive(Clone, Debug)]
pub struct Comparison<T> {
    pub a: RunRecord<T>,
    pub b: RunRecord<T>,
    pub final_error_ratio: f64,
    pub final_disagreement_ratio: f64,
}

fn ratio(b: f64, a: f64) -> f64 {
    if a == b {
        1.0
    } else {
        b / a
    }
}

/// Runs both configurations concurrently.
pub fn compare<T: Real>(a: &ExperimentConfig<T>, b: &ExperimentConfig<T>) -> Result<Comparison<T>> {
    let (ra, rb) = rayon::join(|| run(a), || run(b));
    let (a, b) = (ra?, rb?);
    Ok(Comparison {
        final_error_ratio: ratio(b.summary.final_error, a.summary.final_error),
        final_disagreement_ratio: ratio(b.summary.final_disagreement, a.summary.final_disagreement),
        a,
        b,
    })
}

impl<T: Real> Comparison<T> {
    /// Rows at steps logged by both runs, columns prefixed `a_` / `b_`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        const COLS: [&str; 6] = [
            "error_l2",
            "bound",
            "gamma",
            "disagreement",
            "mean_dist",
            "k_min",
        ];
        writeln!(
            out,
            "# rewb-compare-v1 a={} b={}",
            self.a.summary.config_hash, self.b.summary.config_hash
        )?;
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain(
                COLS.iter()
                    .flat_map(|c| [format!("a_{c}"), format!("b_{c}")]),
            )
            .collect();
        writeln!(out, "{}", header.join(","))?;
        let mut j = 0;
        for ra in &self.a.rows {
            while j < self.b.rows.len() && self.b.rows[j].t < ra.t {
                j += 1;
            }
            let Some(rb) = self.b.rows.get(j).filter(|rb| rb.t == ra.t) else {
                continue;
            };
            write!(out, "{}", ra.t)?;
            let pairs = [
                (ra.error_l2, rb.error_l2),
                (ra.bound, rb.bound),
                (ra.gamma, rb.gamma),
                (ra.disagreement, rb.disagreement),
                (ra.mean_dist, rb.mean_dist),
                (ra.k_min, rb.k_min),
            ];
            for (x, y) in pairs {
                write!(out, ",{},{}", fmt_float(x.as_f64()), fmt_float(y.as_f64()))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub const RATE_FIT_MIN_ROWS: usize = 100;

/// Scaled-error diagnostics over the last decade of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub delta: f64,
    /// First logged step of the tail (`t ≥ t_last / 10`).
    pub tail_start: u64,
    pub tail_rows: usize,
    /// `sup (t+1)^δ · max_i ‖x_i(t) − θ*(t)‖` over the tail.
    pub tail_sup: f64,
    /// Raw `max_i ‖x_i(t) − θ*(t)‖` supremum over the tail.
    pub tail_sup_unscaled: f64,
    /// Scaled series never increases between consecutive tail rows.
    pub non_increasing: bool,
    /// Fraction of consecutive tail pairs that do not increase.
    pub non_increasing_fraction: f64,
    /// Least-squares slope of the log scaled series against `ln(t+1)`.
    pub log_slope: f64,
    /// Scaled value at the end of the tail divided by the one at its start.
    pub end_to_start: f64,
}

pub fn rate_fit<T: Real>(record: &RunRecord<T>, delta: f64) -> Result<RateFit> {
    let rows = &record.rows;
    if rows.len() < RATE_FIT_MIN_ROWS {
        return Err(Error::TooFewRows {
            rows: rows.len(),
            min: RATE_FIT_MIN_ROWS,
        });
    }
    let t_last = record.last().t;
    let tail: Vec<(u64, f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= t_last / 10)
        .map(|r| {
            let raw = r.max_agent_error.as_f64();
            (r.t, raw, (r.t as f64 + 1.0).powf(delta) * raw)
        })
        .collect();
    let pairs = tail.len().saturating_sub(1).max(1);
    let non_inc = tail.windows(2).filter(|p| p[1].2 <= p[0].2).count();
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|p| p.2 > 0.0)
        .map(|p| ((p.0 as f64 + 1.0).ln(), p.2.ln()))
        .collect();
    Ok(RateFit {
        delta,
        tail_start: tail[0].0,
        tail_rows: tail.len(),
        tail_sup: tail.iter().map(|p| p.2).fold(0.0, f64::max),
        tail_sup_unscaled: tail.iter().map(|p| p.1).fold(0.0, f64::max),
        non_increasing: non_inc == tail.len().saturating_sub(1),
        non_increasing_fraction: non_inc as f64 / pairs as f64,
        log_slope: least_squares_slope(&pts).unwrap_or(f64::NAN),
        end_to_start: tail[tail.len() - 1].2 / tail[0].2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;

    fn cfg() -> ExperimentConfig<f64> {
        let mut c = ExperimentConfig::new(Digraph::bidirectional_ring(6).unwrap(), 3);
        c.attack.s = 0.2;
        c.params.s = 0.2;
        c.horizon = 1000;
        c.stride = 5;
        c
    }

    #[test]
    fn self_comparison_is_unity() {
        let c = cfg();
        let cmp = compare(&c, &c).unwrap();
        assert_eq!(cmp.final_error_ratio, 1.0);
        assert_eq!(cmp.final_disagreement_ratio, 1.0);
        let mut buf = Vec::new();
        cmp.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2 + 201);
    }

    #[test]
    fn zero_delta_is_raw_error() {
        let r = run(&cfg()).unwrap();
        let fit = rate_fit(&r, 0.0).unwrap();
        assert_eq!(fit.tail_sup, fit.tail_sup_unscaled);
        assert_eq!(fit.tail_start, 100);
    }

    #[test]
    fn too_few_rows() {
        let mut c = cfg();
        c.stride = 100;
        let r = run(&c).unwrap();
        assert!(matches!(rate_fit(&r, 0.0), Err(Error::TooFewRows { .. })));
    }
}
