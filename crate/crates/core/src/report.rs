//! Machine-readable report files.
//!
//! Floats are always written with six decimal places so that identical
//! inputs give byte-identical files.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::sim::SimReport;
use crate::solver::{Diagnostic, SteadyStateReport};
use crate::state_space::StateSpace;

/// Pretty JSON formatter that prints every float as `{:.6}`.
struct FixedDecimals<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDecimals<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.6}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` as pretty JSON with fixed six-place floats.
pub fn to_fixed_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDecimals(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[derive(Serialize)]
struct SolveJson<'a> {
    pi: &'a [f64],
    #[serde(rename = "L_per_type")]
    l_per_type: &'a [f64],
    #[serde(rename = "L_total")]
    l_total: f64,
    flow_ratio: &'a [Option<f64>],
    p_full: f64,
    diagnostics: SolveDiagnostics<'a>,
}

#[derive(Serialize)]
struct SolveDiagnostics<'a> {
    iterations: usize,
    residual: String,
    warnings: &'a [Diagnostic],
}

/// JSON document for a steady-state solve.
pub fn steady_state_json(report: &SteadyStateReport) -> String {
    to_fixed_json(&SolveJson {
        pi: &report.pi,
        l_per_type: &report.l_per_type,
        l_total: report.l_total,
        flow_ratio: &report.flow_ratio,
        p_full: report.p_full,
        diagnostics: SolveDiagnostics {
            iterations: report.iterations,
            // six decimals would print 0.000000
            residual: format!("{:.3e}", report.residual),
            warnings: &report.diagnostics,
        },
    })
}

#[derive(Serialize)]
struct SimJson<'a> {
    empirical_pi: &'a [f64],
    #[serde(rename = "L_per_type")]
    l_per_type: &'a [f64],
    #[serde(rename = "L_total")]
    l_total: f64,
    cycles: u64,
    warmup: u64,
    seed: u64,
    generator: &'a str,
    tv_distance: Option<f64>,
}

/// JSON document for a simulation run.
pub fn simulation_json(report: &SimReport) -> String {
    to_fixed_json(&SimJson {
        empirical_pi: &report.empirical_pi,
        l_per_type: &report.l_per_type,
        l_total: report.l_total,
        cycles: report.cycles,
        warmup: report.warmup,
        seed: report.seed,
        generator: report.generator,
        tv_distance: report.tv_distance,
    })
}

/// Distribution over states as CSV: `n_1..n_T,probability`.
pub fn distribution_csv<W: Write>(space: &StateSpace, pi: &[f64], mut out: W) -> io::Result<()> {
    let mut header: Vec<String> = (1..=space.types()).map(|t| format!("n_{t}")).collect();
    header.push("probability".into());
    writeln!(out, "{}", header.join(","))?;
    for (s, p) in space.states().iter().zip(pi) {
        let mut cells: Vec<String> = s.counts().iter().map(|n| n.to_string()).collect();
        cells.push(format!("{p:.6}"));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
