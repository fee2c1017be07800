use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Tag written into every JSONL record.
pub const RECORD_SCHEMA: &str = "privopt.iteration/1";

/// One row of run output. `x` is the agents' variables concatenated in agent
/// order. `p_e` is present only when a paired plaintext run exists and `g_e`
/// only when a reference optimum is known.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub x: Vec<T>,
    pub lambda: Vec<T>,
    pub p_e: Option<T>,
    pub g_e: Option<T>,
    pub eps: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{v:.*}", (11 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn rounded(v: f64) -> f64 {
    format_sig(v).parse().unwrap_or(v)
}

#[derive(Serialize)]
struct JsonRecord {
    schema: &'static str,
    k: usize,
    x: Vec<f64>,
    lambda: Vec<f64>,
    #[serde(rename = "P_e")]
    p_e: Option<f64>,
    #[serde(rename = "G_e")]
    g_e: Option<f64>,
    eps: f64,
}

/// Writes records as CSV (`k, x_1..x_N, lambda_1..lambda_m, P_e, G_e, eps`,
/// empty cells for absent metrics) or as one JSON object per line.
pub fn write_records<T: Real, W: Write>(
    mut out: W,
    format: OutputFormat,
    records: &[IterationRecord<T>],
    x_len: usize,
    lambda_len: usize,
) -> io::Result<()> {
    let opt = |v: Option<T>| v.map_or(String::new(), |v| format_sig(v.as_f64()));
    match format {
        OutputFormat::Csv => {
            let mut header = vec!["k".to_string()];
            header.extend((1..=x_len).map(|i| format!("x_{i}")));
            header.extend((1..=lambda_len).map(|i| format!("lambda_{i}")));
            header.extend(["P_e", "G_e", "eps"].map(String::from));
            writeln!(out, "{}", header.join(","))?;
            for r in records {
                let mut row = vec![r.k.to_string()];
                row.extend(r.x.iter().chain(&r.lambda).map(|v| format_sig(v.as_f64())));
                row.push(opt(r.p_e));
                row.push(opt(r.g_e));
                row.push(format_sig(r.eps.as_f64()));
                writeln!(out, "{}", row.join(","))?;
            }
        }
        OutputFormat::Jsonl => {
            for r in records {
                let rec = JsonRecord {
                    schema: RECORD_SCHEMA,
                    k: r.k,
                    x: r.x.iter().map(|v| rounded(v.as_f64())).collect(),
                    lambda: r.lambda.iter().map(|v| rounded(v.as_f64())).collect(),
                    p_e: r.p_e.map(|v| rounded(v.as_f64())),
                    g_e: r.g_e.map(|v| rounded(v.as_f64())),
                    eps: rounded(r.eps.as_f64()),
                };
                serde_json::to_writer(&mut out, &rec)?;
                writeln!(out)?;
            }
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.575), "0.575");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(-2.0), "-2");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(9.9999999999995), "10");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn csv_leaves_missing_metrics_empty() {
        let records = vec![IterationRecord {
            k: 1,
            x: vec![0.5, 0.25],
            lambda: vec![2.0],
            p_e: None,
            g_e: Some(0.125),
            eps: 1e-3,
        }];
        let mut buf = Vec::new();
        write_records(&mut buf, OutputFormat::Csv, &records, 2, 1).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,x_1,x_2,lambda_1,P_e,G_e,eps\n1,0.5,0.25,2,,0.125,0.001\n"
        );
    }

    #[test]
    fn jsonl_carries_schema_and_nulls() {
        let records = vec![IterationRecord {
            k: 3,
            x: vec![1.0 / 3.0],
            lambda: vec![],
            p_e: Some(0.0),
            g_e: None,
            eps: 0.5,
        }];
        let mut buf = Vec::new();
        write_records(&mut buf, OutputFormat::Jsonl, &records, 1, 0).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(
            line,
            format!("{{\"schema\":\"{RECORD_SCHEMA}\",\"k\":3,\"x\":[0.333333333333],\"lambda\":[],\"P_e\":0.0,\"G_e\":null,\"eps\":0.5}}\n")
        );
    }
}
