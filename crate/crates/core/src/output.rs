//! Serialisation of step records and the run summary.
//!
//! Both formats open with a units line (a `#` comment for CSV, a
//! `{"units": ...}` object for JSON lines) followed by one row per
//! increment. Floating values carry 9 significant digits.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::driver::{LoadingProgram, StepRecord};
use crate::error::{Error, Result};
use crate::return_map::{Material, Mode};
use crate::surface::yield_f;

pub const CSV_HEADER: &str = "step,eps11,eps22,eps33,gam12,gam13,gam23,sig11,sig22,sig33,sig12,sig13,sig23,xi,rho,theta,kappa,qh,qs,xia,mode,iters";

pub const UNITS: &str =
    "stress and HW coordinates in MPa, strain dimensionless, shear strains engineering, theta in rad";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json-lines" => Ok(Format::JsonLines),
            _ => Err(Error::Validation(format!("unknown output format `{s}`"))),
        }
    }
}

/// `%.9g`-style formatting.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (8 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    format_sig9(x).parse().unwrap_or(x)
}

/// One output row, as written and as read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub step: usize,
    pub eps11: f64,
    pub eps22: f64,
    pub eps33: f64,
    pub gam12: f64,
    pub gam13: f64,
    pub gam23: f64,
    pub sig11: f64,
    pub sig22: f64,
    pub sig33: f64,
    pub sig12: f64,
    pub sig13: f64,
    pub sig23: f64,
    pub xi: f64,
    pub rho: f64,
    pub theta: f64,
    pub kappa: f64,
    pub qh: f64,
    pub qs: f64,
    pub xia: f64,
    pub mode: Mode,
    pub iters: usize,
}

impl Row {
    /// Row of a record, without rounding.
    pub fn from_record(r: &StepRecord) -> Self {
        let e = r.eps.to_engineering();
        let s = r.sigma.0;
        Row {
            step: r.step,
            eps11: e[0],
            eps22: e[1],
            eps33: e[2],
            gam12: e[3],
            gam13: e[4],
            gam23: e[5],
            sig11: s[0],
            sig22: s[1],
            sig33: s[2],
            sig12: s[3],
            sig13: s[4],
            sig23: s[5],
            xi: r.hw.xi,
            rho: r.hw.rho,
            theta: r.hw.theta,
            kappa: r.kappa,
            qh: r.qh,
            qs: r.qs,
            xia: r.xia,
            mode: r.mode,
            iters: r.iterations,
        }
    }

    fn floats_mut(&mut self) -> [&mut f64; 19] {
        [
            &mut self.eps11,
            &mut self.eps22,
            &mut self.eps33,
            &mut self.gam12,
            &mut self.gam13,
            &mut self.gam23,
            &mut self.sig11,
            &mut self.sig22,
            &mut self.sig33,
            &mut self.sig12,
            &mut self.sig13,
            &mut self.sig23,
            &mut self.xi,
            &mut self.rho,
            &mut self.theta,
            &mut self.kappa,
            &mut self.qh,
            &mut self.qs,
            &mut self.xia,
        ]
    }

    pub fn rounded(mut self) -> Self {
        for v in self.floats_mut() {
            *v = round_sig9(*v);
        }
        self
    }

    pub fn mean_stress(&self) -> f64 {
        (self.sig11 + self.sig22 + self.sig33) / 3.0
    }

    fn csv_line(&self) -> String {
        let mut row = self.clone();
        let mut fields = vec![self.step.to_string()];
        fields.extend(row.floats_mut().into_iter().map(|v| format_sig9(*v)));
        fields.push(self.mode.name().to_string());
        fields.push(self.iters.to_string());
        fields.join(",")
    }
}

fn io_error(path: &str, e: impl fmt::Display) -> Error {
    Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    }
}

/// Writes `records` to `out`. `path` only labels I/O errors.
pub fn write_records<W: Write + ?Sized>(records: &[StepRecord], format: Format, out: &mut W, path: &str) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Validation("no records to write".into()));
    }
    let mut buf = String::new();
    match format {
        Format::Csv => {
            buf.push_str(&format!("# units: {UNITS}\n{CSV_HEADER}\n"));
            for r in records {
                buf.push_str(&Row::from_record(r).csv_line());
                buf.push('\n');
            }
        }
        Format::JsonLines => {
            let units = serde_json::json!({ "units": UNITS });
            buf.push_str(&units.to_string());
            buf.push('\n');
            for r in records {
                let row = Row::from_record(r).rounded();
                buf.push_str(&serde_json::to_string(&row).map_err(|e| io_error(path, e))?);
                buf.push('\n');
            }
        }
    }
    out.write_all(buf.as_bytes()).map_err(|e| io_error(path, e))?;
    out.flush().map_err(|e| io_error(path, e))
}

/// Serialises to a string.
pub fn records_to_string(records: &[StepRecord], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    write_records(records, format, &mut buf, "<memory>")?;
    Ok(String::from_utf8(buf).expect("output is UTF-8"))
}

/// Reads rows written by [`write_records`] in CSV format.
pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    let first = text.lines().find(|l| !l.starts_with('#'));
    if first != Some(CSV_HEADER) {
        return Err(Error::Parse {
            line: 0,
            message: "missing or unexpected CSV header".into(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .deserialize::<Row>()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads rows written by [`write_records`] in JSON-lines format.
pub fn read_json_lines(text: &str) -> Result<Vec<Row>> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// First increment integrated by the apex corrector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApexOnset {
    pub step: usize,
    pub phase: usize,
    pub phase_step: usize,
    pub phase_increments: usize,
}

impl ApexOnset {
    /// Position inside its phase, in percent.
    pub fn percent_of_phase(&self) -> f64 {
        100.0 * self.phase_step as f64 / self.phase_increments as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub label: String,
    pub increments: usize,
    pub final_mean_stress: f64,
    pub final_kappa: f64,
    pub modes: BTreeMap<Mode, usize>,
    /// Largest yield-function value over the accepted states.
    pub max_f: f64,
    pub apex_onset: Option<ApexOnset>,
}

impl Summary {
    pub fn new(program: &LoadingProgram, records: &[StepRecord], material: &Material) -> Self {
        let mut modes: BTreeMap<Mode, usize> = Mode::ALL.iter().map(|m| (*m, 0)).collect();
        let mut max_f = f64::NEG_INFINITY;
        for r in records {
            *modes.entry(r.mode).or_default() += 1;
            max_f = max_f.max(yield_f(&r.hw, r.kappa, &material.params));
        }
        let apex_onset = records.iter().find(|r| r.mode == Mode::ApexReturn).map(|r| ApexOnset {
            step: r.step,
            phase: r.phase,
            phase_step: r.phase_step,
            phase_increments: program.steps[r.phase].increments,
        });
        let last = records.last();
        Summary {
            label: program.label.clone(),
            increments: records.len(),
            final_mean_stress: last.map_or(0.0, StepRecord::mean_stress),
            final_kappa: last.map_or(0.0, |r| r.kappa),
            modes,
            max_f,
            apex_onset,
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scenario={} increments={} final_mean_stress={} final_kappa={} modes=",
            self.label,
            self.increments,
            format_sig9(self.final_mean_stress),
            format_sig9(self.final_kappa)
        )?;
        let hist: Vec<String> = self.modes.iter().map(|(m, n)| format!("{}:{n}", m.name())).collect();
        write!(f, "{} max_f={}", hist.join(","), format_sig9(self.max_f))?;
        match self.apex_onset {
            Some(a) => write!(
                f,
                " apex_onset=step {} (phase {} increment {}/{}, {:.1}%)",
                a.step,
                a.phase + 1,
                a.phase_step,
                a.phase_increments,
                a.percent_of_phase()
            ),
            None => write!(f, " apex_onset=none"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{run_program, Scenario};
    use crate::return_map::Tolerances;
    use proptest::prelude::*;

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (-8.0, "-8"),
            (2.9489958317544525, "2.94899583"),
            (5.107810611907552, "5.10781061"),
            (1e-4, "0.0001"),
            (1.23456789012e-5, "1.23456789e-05"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (9.9999999999, "10"),
            (0.5, "0.5"),
            (1e300, "1e+300"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    proptest! {
        #[test]
        fn sig9_keeps_nine_digits(x in -1e6f64..1e6, scale in -12i32..6) {
            let v = x * 10f64.powi(scale);
            let back: f64 = format_sig9(v).parse().unwrap();
            prop_assert!((back - v).abs() <= 5e-9 * v.abs());
        }
    }

    fn run(s: Scenario, n: usize) -> (LoadingProgram, Vec<StepRecord>, Material) {
        let material = Material::new(s.params()).unwrap();
        let tol = Tolerances::for_params(&material.params);
        let program = s.program(n);
        let records = run_program(&program, &material, &tol).unwrap();
        (program, records, material)
    }

    #[test]
    fn one_elastic_record() {
        let (_, records, _) = run(Scenario::HydrostaticTension, 200);
        let text = records_to_string(&records[..1], Format::Csv).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].ends_with(",Elastic,0"), "{}", lines[1]);
        assert!(text.starts_with("# units:"));
    }

    #[test]
    fn empty_records_are_rejected() {
        assert!(matches!(records_to_string(&[], Format::Csv), Err(Error::Validation(_))));
    }

    #[test]
    fn csv_round_trip() {
        let (_, records, _) = run(Scenario::ConfinedTension, 50);
        let rows = read_csv(&records_to_string(&records, Format::Csv).unwrap()).unwrap();
        assert_eq!(rows.len(), records.len());
        for (row, r) in rows.iter().zip(&records) {
            assert_eq!(*row, Row::from_record(r).rounded());
        }
    }

    #[test]
    fn json_round_trip() {
        let (_, records, _) = run(Scenario::HydrostaticSoftening, 30);
        let text = records_to_string(&records, Format::JsonLines).unwrap();
        assert!(text.lines().next().unwrap().contains("units"));
        let rows = read_json_lines(&text).unwrap();
        let csv_rows = read_csv(&records_to_string(&records, Format::Csv).unwrap()).unwrap();
        assert_eq!(rows, csv_rows);
    }

    #[test]
    fn hydrostatic_xi_column() {
        let (_, records, _) = run(Scenario::HydrostaticTension, 200);
        let rows = read_csv(&records_to_string(&records, Format::Csv).unwrap()).unwrap();
        for row in rows {
            assert!((row.xi - 3f64.sqrt() * row.sig11).abs() <= 1e-8 * row.xi.abs().max(1.0));
        }
    }

    #[test]
    fn reader_rejects_foreign_header() {
        assert!(read_csv("a,b\n1,2\n").is_err());
        let bad = format!("{CSV_HEADER}\n1,x\n");
        assert!(matches!(read_csv(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn summary_of_hydrostatic_run() {
        let (program, records, material) = run(Scenario::HydrostaticTension, 200);
        let s = Summary::new(&program, &records, &material);
        assert!((s.final_mean_stress - 2.9489958317544525).abs() < 1e-6);
        assert_eq!(s.modes[&Mode::SmoothReturn], 0);
        assert_eq!(s.modes.values().sum::<usize>(), 200);
        assert!(s.max_f <= 1e-9);
        let onset = s.apex_onset.unwrap();
        assert_eq!(onset.phase, 0);
        let line = s.to_string();
        assert!(line.contains("ApexReturn:"), "{line}");
        assert!(line.contains("final_mean_stress=2.9489958"), "{line}");
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json-lines".parse::<Format>().unwrap(), Format::JsonLines);
        assert!("xml".parse::<Format>().is_err());
    }
}
