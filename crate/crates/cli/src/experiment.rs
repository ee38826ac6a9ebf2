//! Quality, counter, CDF and image experiments, emitted as CSV.

use std::fmt::Write;

use anyhow::{ensure, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use rqrcp_core::{
    jacobi_svd, qr_blocked, qr_presorted, qrcp_blas2, qrcp_blocked, rqrcp, rsrqrcp, scaling_cdf,
    ssrqrcp, trqrcp_unchecked, tuxv, CommCounters, DenseMatrix, SketchConfig, TuxvOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Qrcp2,
    Qrcp3,
    Qr,
    /// Unpivoted QR after sorting columns by norm.
    Presorted,
    Ssrqrcp,
    Rqrcp,
    Rsrqrcp,
    Trqrcp,
    Tuxv,
    Svd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qrcp2 => "qrcp2",
            Algorithm::Qrcp3 => "qrcp3",
            Algorithm::Qr => "qr",
            Algorithm::Presorted => "presorted",
            Algorithm::Ssrqrcp => "ssrqrcp",
            Algorithm::Rqrcp => "rqrcp",
            Algorithm::Rsrqrcp => "rsrqrcp",
            Algorithm::Trqrcp => "trqrcp",
            Algorithm::Tuxv => "tuxv",
            Algorithm::Svd => "svd",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            Algorithm::Ssrqrcp
                | Algorithm::Rqrcp
                | Algorithm::Rsrqrcp
                | Algorithm::Trqrcp
                | Algorithm::Tuxv
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub rank: usize,
    pub block: usize,
    pub pad: usize,
    pub seed: u64,
    pub reps: usize,
}

/// A rank-`k` approximant and what it cost.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub approx: DenseMatrix,
    pub achieved_rank: usize,
    pub counters: CommCounters,
}

/// Runs one algorithm at rank `k`. Rank limits of the truncated algorithms
/// are lifted: the caller chose `k` explicitly.
pub fn run_once(
    a: &DenseMatrix,
    alg: Algorithm,
    k: usize,
    b: usize,
    p: usize,
    seed: u64,
) -> Result<Outcome> {
    let m = a.rows();
    let bk = b.clamp(1, k.max(1));
    let cfg = SketchConfig::new(b, p, seed);
    let pivoted = |f: rqrcp_core::PivotedFactorization| Outcome {
        approx: f.approximation(m, k),
        achieved_rank: f.achieved_rank,
        counters: f.counters,
    };
    Ok(match alg {
        Algorithm::Qrcp2 => pivoted(qrcp_blas2(a, k)?),
        Algorithm::Qrcp3 => pivoted(qrcp_blocked(a, k, bk)?),
        Algorithm::Qr => pivoted(qr_blocked(a, k, bk)?),
        Algorithm::Presorted => pivoted(qr_presorted(a, k, bk)?),
        Algorithm::Ssrqrcp => pivoted(ssrqrcp(a, k, p, seed)?),
        Algorithm::Rqrcp => pivoted(rqrcp(a, k, &cfg)?),
        Algorithm::Rsrqrcp => pivoted(rsrqrcp(a, k, &cfg)?),
        Algorithm::Trqrcp => {
            let f = trqrcp_unchecked(a, k, &cfg)?;
            Outcome {
                approx: f.approximation(k),
                achieved_rank: f.achieved_rank,
                counters: f.counters,
            }
        }
        Algorithm::Tuxv => {
            let opts = TuxvOptions {
                unchecked_rank: true,
                ..TuxvOptions::default()
            };
            let t = tuxv(a, k, &cfg, opts)?;
            Outcome {
                approx: t.approximation(),
                achieved_rank: t.rank(),
                counters: t.counters,
            }
        }
        Algorithm::Svd => Outcome {
            approx: jacobi_svd(a)?.truncated(k),
            achieved_rank: k,
            counters: CommCounters::default(),
        },
    })
}

pub fn rel_frob_error(a: &DenseMatrix, approx: &DenseMatrix) -> Result<f64> {
    let norm = a.frob_norm();
    let err = a.sub(approx)?.frob_norm();
    Ok(if norm == 0.0 { err } else { err / norm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityRecord {
    pub rank: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub reps: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// `{b, 2b, …}` up to `kmax`, or just `kmax` when it is below `b`.
pub fn rank_grid(b: usize, kmax: usize) -> Vec<usize> {
    if b == 0 || kmax < b {
        return vec![kmax];
    }
    (1..=kmax / b).map(|i| i * b).collect()
}

/// Lower median: the `⌈n/2⌉`-th smallest value.
pub fn lower_median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Error statistics at each rank. Randomized algorithms run `reps` times
/// with seeds `seed, seed+1, …` in parallel; results are gathered in seed
/// order, so the output does not depend on scheduling.
pub fn run_quality(
    a: &DenseMatrix,
    spec: &ExperimentSpec,
    ranks: &[usize],
) -> Result<Vec<QualityRecord>> {
    ensure!(spec.reps >= 1, "repetitions must be at least 1");
    let reps = if spec.algorithm.is_randomized() {
        spec.reps
    } else {
        1
    };
    let svd = if spec.algorithm == Algorithm::Svd {
        Some(jacobi_svd(a)?)
    } else {
        None
    };
    ranks
        .iter()
        .map(|&k| {
            let mut errs: Vec<f64> = match &svd {
                Some(s) => vec![rel_frob_error(a, &s.truncated(k))?],
                None => (0..reps as u64)
                    .into_par_iter()
                    .map(|i| {
                        let seed = spec.seed.wrapping_add(i);
                        let out = run_once(a, spec.algorithm, k, spec.block, spec.pad, seed)?;
                        rel_frob_error(a, &out.approx)
                    })
                    .collect::<Result<_>>()?,
            };
            let median = lower_median(&mut errs);
            Ok(QualityRecord {
                rank: k,
                algorithm: spec.algorithm,
                seed: spec.seed,
                reps,
                min: errs[0],
                median,
                max: errs[errs.len() - 1],
            })
        })
        .collect()
}

/// `#`-prefixed lines recording the command, the version and every parameter.
pub fn spec_header(command: &str, params: &[(&str, String)]) -> String {
    let mut out = format!(
        "# rqrcp {command}\n# version={}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in params {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

pub fn quality_csv(header: &str, records: &[QualityRecord]) -> String {
    let mut out = String::from(header);
    out.push_str("rank,algorithm,seed,reps,min,median,max\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.9e},{:.9e},{:.9e}",
            r.rank,
            r.algorithm.name(),
            r.seed,
            r.reps,
            r.min,
            r.median,
            r.max
        );
    }
    out
}

pub fn run_counters(a: &DenseMatrix, spec: &ExperimentSpec) -> Result<CommCounters> {
    Ok(run_once(
        a,
        spec.algorithm,
        spec.rank,
        spec.block,
        spec.pad,
        spec.seed,
    )?
    .counters)
}

pub fn counters_csv(header: &str, rows: &[(Algorithm, CommCounters)]) -> String {
    let mut out = String::from(header);
    out.push_str("algorithm,trailing_passes,blas2_volume,blas3_volume\n");
    for (alg, c) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            alg.name(),
            c.trailing_passes,
            c.blas2_volume,
            c.blas3_volume
        );
    }
    out
}

/// Grid of `P(φ < τ)` for every `(ℓ, τ)` pair.
pub fn emit_cdf_table(header: &str, ls: &[usize], taus: &[f64]) -> Result<String> {
    let mut out = String::from(header);
    out.push_str("l,tau,cdf\n");
    for &l in ls {
        for &tau in taus {
            let _ = writeln!(out, "{l},{tau},{:.10}", scaling_cdf(l, tau)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub tuxv: Outcome,
    pub tuxv_error: f64,
    pub presorted: Outcome,
    pub presorted_error: f64,
}

/// Rank-`k` reconstructions of a grayscale image by TUXV and by presorted QR.
pub fn run_image(img: &DenseMatrix, k: usize, cfg: &SketchConfig) -> Result<ImageReport> {
    let tuxv = run_once(
        img,
        Algorithm::Tuxv,
        k,
        cfg.block_size,
        cfg.padding,
        cfg.seed,
    )?;
    let presorted = run_once(
        img,
        Algorithm::Presorted,
        k,
        cfg.block_size,
        cfg.padding,
        cfg.seed,
    )?;
    Ok(ImageReport {
        tuxv_error: rel_frob_error(img, &tuxv.approx)?,
        presorted_error: rel_frob_error(img, &presorted.approx)?,
        tuxv,
        presorted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rqrcp_core::synth::decay;

    fn spec(algorithm: Algorithm, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            algorithm,
            rank: 16,
            block: 4,
            pad: 4,
            seed: 9,
            reps,
        }
    }

    #[test]
    fn grid_and_median() {
        assert_eq!(rank_grid(8, 30), vec![8, 16, 24]);
        assert_eq!(rank_grid(8, 5), vec![5]);
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(lower_median(&mut [3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn svd_rows_follow_the_tail_of_the_spectrum() {
        let a = decay(24, 20, 0.7, 1);
        let recs = run_quality(&a, &spec(Algorithm::Svd, 5), &[4, 8, 12]).unwrap();
        let sigma = jacobi_svd(&a).unwrap();
        for r in &recs {
            let want = sigma.tail_norm(r.rank) / a.frob_norm();
            assert!((r.median - want).abs() <= 1e-10);
            assert_eq!(r.reps, 1);
        }
        assert!(recs.windows(2).all(|w| w[1].median <= w[0].median));
    }

    #[test]
    fn full_rank_is_exact_for_every_algorithm() {
        let a = rqrcp_core::giid(20, 16, 2);
        for alg in Algorithm::value_variants() {
            let out = run_once(&a, *alg, 16, 4, 4, 3).unwrap();
            assert!(
                rel_frob_error(&a, &out.approx).unwrap() <= 1e-10,
                "{}",
                alg.name()
            );
        }
    }

    #[test]
    fn decay_ordering() {
        let a = decay(64, 64, 0.8, 5);
        let med = |alg| run_quality(&a, &spec(alg, 21), &[16]).unwrap()[0].median;
        let (svd, t, r, pre) = (
            med(Algorithm::Svd),
            med(Algorithm::Tuxv),
            med(Algorithm::Rqrcp),
            med(Algorithm::Presorted),
        );
        assert!(svd <= t && t <= r * 1.05 && r <= pre, "{svd} {t} {r} {pre}");
    }

    #[test]
    fn quality_is_deterministic_across_runs() {
        let a = decay(40, 30, 0.9, 7);
        let s = spec(Algorithm::Rqrcp, 12);
        assert_eq!(
            run_quality(&a, &s, &[4, 8]).unwrap(),
            run_quality(&a, &s, &[4, 8]).unwrap()
        );
    }

    #[test]
    fn cdf_table_rows() {
        let t = emit_cdf_table("", &[4, 8], &[0.125, 0.25, 1e6]).unwrap();
        let rows: Vec<&str> = t.lines().skip(1).collect();
        assert_eq!(rows.len(), 6);
        let v: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 0.0030).abs() <= 0.0001);
        let far: f64 = rows[2].split(',').nth(2).unwrap().parse().unwrap();
        assert!(far > 0.999999);
    }

    #[test]
    fn counters_for_qr_have_no_matrix_vector_traffic() {
        let a = rqrcp_core::giid(64, 64, 1);
        let c = run_counters(
            &a,
            &ExperimentSpec {
                rank: 64,
                ..spec(Algorithm::Qr, 1)
            },
        )
        .unwrap();
        assert_eq!(c.blas2_volume, 0);
        let c = run_counters(
            &a,
            &ExperimentSpec {
                rank: 64,
                ..spec(Algorithm::Qrcp2, 1)
            },
        )
        .unwrap();
        assert_eq!(c.trailing_passes, 64);
    }
}
