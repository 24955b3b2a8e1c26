//! Result tables. Floats use `%.10g` formatting so output is stable across
//! platforms and runs.

use std::io::Write;

use crate::analysis::Theorem1;
use crate::error::Result;

use super::config::Scheme;

pub const RESULTS_HEADER: &str =
    "scheme,channel,mod_order,alpha,snr_db,frames,bits,bit_errors,ber,wrap_rate_tx,bound_pl,bound_mnl,bound_msl,bound_max,redraws";
pub const BOUNDS_HEADER: &str = "mod_order,alpha,snr_db,sigma_h1_sq,bound_pl,bound_mnl,bound_msl,bound_max";

/// C-style `%.10g`.
pub fn fmt_g10(x: f64) -> String {
    const P: i32 = 10;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub channel: String,
    pub mod_order: u32,
    pub alpha: f64,
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub wrap_rate_tx: f64,
    pub bounds: Option<Theorem1>,
    pub redraws: u64,
    /// Standard error of the BER estimated from per-frame error rates
    /// (errors inside a frame share one channel draw).
    pub frame_stderr: f64,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    /// `sqrt(p (1 - p) / bits)`, treating bits as independent.
    pub fn binomial_stderr(&self) -> f64 {
        let p = self.ber();
        (p * (1.0 - p) / self.bits as f64).sqrt()
    }

    pub fn bound_max(&self) -> f64 {
        self.bounds.map_or(f64::NAN, |b| b.max())
    }

    fn fields(&self) -> Vec<String> {
        let b = |f: fn(&Theorem1) -> f64| self.bounds.as_ref().map_or(f64::NAN, f);
        vec![
            self.scheme.as_str().to_string(),
            self.channel.clone(),
            self.mod_order.to_string(),
            fmt_g10(self.alpha),
            fmt_g10(self.snr_db),
            self.frames.to_string(),
            self.bits.to_string(),
            self.bit_errors.to_string(),
            fmt_g10(self.ber()),
            fmt_g10(self.wrap_rate_tx),
            fmt_g10(b(|t| t.pl)),
            fmt_g10(b(|t| t.mnl)),
            fmt_g10(b(|t| t.msl)),
            fmt_g10(b(|t| t.max())),
            self.redraws.to_string(),
        ]
    }
}

pub fn sort_records(records: &mut [BerRecord]) {
    records.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.snr_db.total_cmp(&b.snr_db)));
}

fn write_table<W: Write>(out: W, header: &str, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header.split(','))?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows sorted by `(alpha, snr_db)`.
pub fn write_results<W: Write>(out: W, records: &[BerRecord]) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    write_table(out, RESULTS_HEADER, sorted.iter().map(BerRecord::fields))
}

pub fn results_csv(records: &[BerRecord]) -> String {
    let mut buf = Vec::new();
    write_results(&mut buf, records).expect("in-memory write");
    String::from_utf8(buf).expect("ascii")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub mod_order: u32,
    pub alpha: f64,
    pub snr_db: f64,
    pub sigma_h1_sq: f64,
    pub bounds: Theorem1,
}

pub fn write_bounds<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    write_table(
        out,
        BOUNDS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.mod_order.to_string(),
                fmt_g10(r.alpha),
                fmt_g10(r.snr_db),
                fmt_g10(r.sigma_h1_sq),
                fmt_g10(r.bounds.pl),
                fmt_g10(r.bounds.mnl),
                fmt_g10(r.bounds.msl),
                fmt_g10(r.bounds.max()),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g10_matches_printf() {
        let cases = [
            (0.0, "0"),
            (30.0, "30"),
            (0.6, "0.6"),
            (0.6000000000000001, "0.6"),
            (1.0 / 3.0, "0.3333333333"),
            (2.0 / 3.0 * 1e-5, "6.666666667e-06"),
            (1e-4, "0.0001"),
            (1234567890.0, "1234567890"),
            (12345678901.0, "1.23456789e+10"),
            (-0.0244, "-0.0244"),
            (1e100, "1e+100"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g10(x), want, "{x}");
        }
    }

    fn record(alpha: f64, snr: f64) -> BerRecord {
        BerRecord {
            scheme: Scheme::OddmThp,
            channel: "eva".into(),
            mod_order: 4,
            alpha,
            snr_db: snr,
            frames: 10,
            bits: 1000,
            bit_errors: 25,
            wrap_rate_tx: 0.125,
            bounds: Some(Theorem1 { pl: 0.01, mnl: 0.02, msl: 1e-7 }),
            redraws: 0,
            frame_stderr: 0.0,
        }
    }

    #[test]
    fn results_layout_and_order() {
        let rows = vec![record(2.0, 30.0), record(1.0, 30.0), record(1.0, 20.0), record(2.0, 20.0)];
        let csv = results_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(lines[1], "oddm-thp,eva,4,1,20,10,1000,25,0.025,0.125,0.01,0.02,1e-07,0.02,0");
        assert!(lines[2].starts_with("oddm-thp,eva,4,1,30,"));
        assert!(lines[4].starts_with("oddm-thp,eva,4,2,30,"));
    }

    #[test]
    fn missing_bounds_are_nan() {
        let mut r = record(1.0, 10.0);
        r.bounds = None;
        assert!(results_csv(&[r]).lines().nth(1).unwrap().ends_with(",nan,nan,nan,nan,0"));
    }

    proptest! {
        #[test]
        fn g10_roundtrips_to_ten_digits(x in -1e12f64..1e12) {
            let s = fmt_g10(x);
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-10 * x.abs().max(1e-300));
            prop_assert!(s.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).count() <= 10 + 3);
        }
    }
}
