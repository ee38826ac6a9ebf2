//! Synthetic matrix descriptors such as `decay:128x96,ratio=0.8`,
//! `giid:64x48` and `kahan:96,c=0.285`.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use rqrcp_core::{synth, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthSpec {
    Decay { m: usize, n: usize, ratio: f64 },
    Giid { m: usize, n: usize },
    Kahan { n: usize, c: f64 },
}

impl SynthSpec {
    pub fn build(&self, seed: u64) -> Result<DenseMatrix> {
        Ok(match *self {
            SynthSpec::Decay { m, n, ratio } => synth::decay(m, n, ratio, seed),
            SynthSpec::Giid { m, n } => synth::giid(m, n, seed),
            SynthSpec::Kahan { n, c } => synth::kahan(n, c)?,
        })
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthSpec::Decay { m, n, ratio } => write!(f, "decay:{m}x{n},ratio={ratio}"),
            SynthSpec::Giid { m, n } => write!(f, "giid:{m}x{n}"),
            SynthSpec::Kahan { n, c } => write!(f, "kahan:{n},c={c}"),
        }
    }
}

impl FromStr for SynthSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| anyhow!("expected kind:params, got {s:?}"))?;
        let mut parts = rest.split(',');
        let size = parts.next().unwrap_or_default();
        let mut ratio = None;
        let mut c = None;
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value, got {kv:?}"))?;
            let v: f64 = v.parse().with_context(|| format!("bad value in {kv:?}"))?;
            match k {
                "ratio" => ratio = Some(v),
                "c" => c = Some(v),
                _ => bail!("unknown parameter {k:?}"),
            }
        }
        let dims = |size: &str| -> Result<(usize, usize)> {
            let (m, n) = size
                .split_once('x')
                .ok_or_else(|| anyhow!("expected MxN, got {size:?}"))?;
            Ok((m.parse()?, n.parse()?))
        };
        match kind {
            "decay" => {
                let (m, n) = dims(size)?;
                let ratio = ratio.unwrap_or(0.8);
                ensure!(ratio > 0.0 && ratio <= 1.0, "ratio must be in (0, 1]");
                Ok(SynthSpec::Decay { m, n, ratio })
            }
            "giid" => {
                let (m, n) = dims(size)?;
                Ok(SynthSpec::Giid { m, n })
            }
            "kahan" => Ok(SynthSpec::Kahan {
                n: size
                    .parse()
                    .with_context(|| format!("bad order {size:?}"))?,
                c: c.unwrap_or(0.285),
            }),
            other => bail!("unknown matrix kind {other:?}"),
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).with_context(|| format!("bad hex seed {s:?}")),
        None => s.parse().with_context(|| format!("bad seed {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip() {
        for s in ["decay:128x96,ratio=0.8", "giid:64x48", "kahan:96,c=0.285"] {
            assert_eq!(s.parse::<SynthSpec>().unwrap().to_string(), s);
        }
        assert!("blob:4x4".parse::<SynthSpec>().is_err());
        assert!("decay:4".parse::<SynthSpec>().is_err());
        assert!("decay:4x4,ratio=2".parse::<SynthSpec>().is_err());
        assert!("giid:4x4,q=1".parse::<SynthSpec>().is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0x2A").unwrap(), 42);
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn decay_spectrum_is_recovered() {
        let a = SynthSpec::Decay {
            m: 16,
            n: 16,
            ratio: 0.5,
        }
        .build(3)
        .unwrap();
        let s = rqrcp_core::jacobi_svd(&a).unwrap();
        for (i, sigma) in s.sigma.iter().enumerate() {
            let want = 0.5f64.powi(i as i32);
            assert!((sigma - want).abs() <= 1e-8 * want);
        }
    }

    #[test]
    fn kahan_is_upper_triangular() {
        let k = SynthSpec::Kahan { n: 12, c: 0.285 }.build(0).unwrap();
        assert!((0..12).all(|i| (0..i).all(|j| k[(i, j)] == 0.0)));
    }
}
