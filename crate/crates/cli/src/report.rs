//! Subcommands and their text reports.

use std::fmt::Write as _;
use std::time::Instant;

use ptwall_core::classlat::KClass;
use ptwall_core::quasipoly::Value;
use ptwall_core::rat::show;
use ptwall_core::ratgen::{gf_expand, scalar_text};
use ptwall_core::wallcoeffs::{coeff_s, coeff_u, coeff_utilde, distinct_orderings};
use ptwall_core::wallcross::{
    apply_insertion, dt_wallcross, eq_residual, pt_series, pt_value, recursion_sum,
    InsertionFunctional, Memo, NoMemo, PtOptions, PtSeries, Scenario,
};
use ptwall_core::Q;

use crate::scenario::{Loaded, Query};
use crate::{CliError, SharedMemo};

/// Subcommand selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Wallcross,
    Ptgen,
    Expand,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Wallcross => "wallcross",
            Command::Ptgen => "ptgen",
            Command::Expand => "expand",
            Command::Verify => "verify",
        }
    }
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    pub n_max: i64,
    pub truncation: Option<u32>,
    pub no_memo: bool,
    pub oracle: bool,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            n_max: 10,
            truncation: None,
            no_memo: false,
            oracle: false,
            timing: false,
        }
    }
}

/// Points past the recursion start checked by `verify`.
const VERIFY_SPAN: i64 = 6;
/// Width of the widened sheaf ranges checked by `verify --oracle`.
const ORACLE_MARGIN: i64 = 6;

type Outcome = Result<String, CliError>;

/// Loads `text`, runs `cmd` and returns the report. Timing lines go to stderr.
pub fn run(text: &str, cmd: Command, opts: &Options) -> Outcome {
    let loaded = crate::scenario::load(text, opts.truncation)?;
    let jobs = jobs(&loaded, cmd)?;
    let memo = SharedMemo::new();
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| {
                let (sc, memo) = (&loaded.scenario, &memo);
                s.spawn(move || {
                    let t = Instant::now();
                    let out = if opts.no_memo {
                        job.run(sc, &NoMemo, cmd, opts)
                    } else {
                        job.run(sc, memo, cmd, opts)
                    };
                    (out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut out = String::new();
    writeln!(out, "ptwall {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "scenario sha256 {}", loaded.hash).unwrap();
    writeln!(out, "command {}", cmd.name()).unwrap();
    let ring = loaded.scenario.ring().truncation();
    if ring > 0 {
        writeln!(out, "truncation {ring}").unwrap();
    }
    for (job, (res, secs)) in jobs.iter().zip(results) {
        if opts.timing {
            eprintln!("timing {}: {secs:.3} s", job.title);
        }
        writeln!(out, "\n== {}", job.title).unwrap();
        out.push_str(&res.map_err(|e| annotate(e, &job.title))?);
    }
    Ok(out)
}

fn annotate(e: CliError, title: &str) -> CliError {
    match e {
        CliError::Validation(m) => CliError::Validation(format!("{title}: {m}")),
        CliError::Certification(m) => CliError::Certification(format!("{title}: {m}")),
    }
}

struct Job {
    title: String,
    query: Query,
}

fn jobs(loaded: &Loaded, cmd: Command) -> Result<Vec<Job>, CliError> {
    let wanted = |q: &Query| match cmd {
        Command::Coeffs => matches!(q, Query::Coeffs { .. }),
        Command::Wallcross => matches!(q, Query::Wallcross { .. }),
        Command::Ptgen | Command::Expand => matches!(q, Query::PtGen { .. }),
        Command::Verify => !matches!(q, Query::PtGen { .. }),
    };
    let mut out: Vec<Job> = loaded
        .queries
        .iter()
        .enumerate()
        .filter(|(_, q)| wanted(q))
        .map(|(i, q)| Job {
            title: format!("query[{i}] {}", q.op()),
            query: q.clone(),
        })
        .collect();
    let all_classes = match cmd {
        Command::Verify => true,
        Command::Ptgen | Command::Expand => out.is_empty(),
        _ => false,
    };
    if all_classes {
        let mut classes: Vec<Job> = loaded
            .scenario
            .dt
            .keys()
            .map(|beta| Job {
                title: format!("class {beta:?}"),
                query: Query::PtGen {
                    beta: beta.clone(),
                    insertion: None,
                },
            })
            .collect();
        if cmd == Command::Verify {
            classes.append(&mut out);
        }
        out = classes;
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!(
            "scenario has no queries for `{}`",
            cmd.name()
        )));
    }
    Ok(out)
}

impl Job {
    fn run<M: Memo + Sync>(
        &self,
        sc: &Scenario,
        memo: &M,
        cmd: Command,
        opts: &Options,
    ) -> Outcome {
        match (&self.query, cmd) {
            (
                Query::Coeffs {
                    classes,
                    tau,
                    tau_tilde,
                },
                _,
            ) => coeffs(classes, tau, tau_tilde, cmd),
            (
                Query::Wallcross {
                    beta,
                    ns,
                    omega,
                    width,
                },
                _,
            ) => wallcross(sc, beta, ns, omega, *width, cmd),
            (Query::PtGen { beta, .. }, Command::Verify) => verify(sc, memo, beta, opts),
            (Query::PtGen { beta, insertion }, Command::Expand) => {
                let series = pt_series(sc, memo, beta, &PtOptions::default())?;
                expand(sc, &series, insertion.as_ref(), opts.n_max)
            }
            (Query::PtGen { beta, insertion }, _) => {
                let series = pt_series(sc, memo, beta, &PtOptions::default())?;
                ptgen(sc, &series, insertion.as_ref())
            }
        }
    }
}

fn class_list(classes: &[KClass]) -> String {
    classes
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn coeffs(
    classes: &[KClass],
    tau: &ptwall_core::stability::PairSlope,
    tau_tilde: &ptwall_core::stability::PairSlope,
    cmd: Command,
) -> Outcome {
    let mut out = String::new();
    let lie = coeff_utilde(classes, tau, tau_tilde)?;
    if cmd == Command::Verify {
        writeln!(out, "word sum primitive for {}: ok", class_list(classes)).unwrap();
        return Ok(out);
    }
    writeln!(out, "classes {}", class_list(classes)).unwrap();
    writeln!(out, "word | S | U | Utilde").unwrap();
    for w in distinct_orderings(classes) {
        let s = coeff_s(&w, tau, tau_tilde)?;
        let u = coeff_u(&w, tau, tau_tilde)?;
        let ut = lie.0.get(&w).cloned().unwrap_or_default();
        writeln!(
            out,
            "{} | {s} | {} | {}",
            class_list(&w),
            show(&u),
            show(&ut)
        )
        .unwrap();
    }
    Ok(out)
}

fn wallcross(
    sc: &Scenario,
    beta: &[i64],
    ns: &[i64],
    omega: &[Q],
    width: i64,
    cmd: Command,
) -> Outcome {
    let mut out = String::new();
    let omega_text = omega.iter().map(show).collect::<Vec<_>>().join(",");
    writeln!(out, "class {beta:?} to omega ({omega_text}), width {width}").unwrap();
    for &n in ns {
        let w = dt_wallcross(sc, beta, n, omega, width)?;
        if cmd == Command::Verify {
            writeln!(
                out,
                "n = {n}: {} terms, {} nonzero: ok",
                w.enumerated, w.nonzero
            )
            .unwrap();
        } else {
            writeln!(
                out,
                "n = {n}: {}  ({} terms, {} nonzero)",
                w.value.text(),
                w.enumerated,
                w.nonzero
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn certificate_text(series: &PtSeries) -> String {
    let c = &series.certificate;
    let mut out = String::new();
    writeln!(
        out,
        "zero for n <= {}, recursion from {}, tail from {}",
        c.vanish_below, c.recursion_start, c.tail_start
    )
    .unwrap();
    writeln!(
        out,
        "period {} (bound {}), order {}, degrees {:?}",
        c.period, c.period_bound, c.order, c.degrees
    )
    .unwrap();
    writeln!(
        out,
        "sampled {}..{}, extrapolated {}..{}",
        c.sampled.0, c.sampled.1, c.extrapolated.0, c.extrapolated.1
    )
    .unwrap();
    let poles = c
        .poles
        .iter()
        .map(|(l, o)| format!("{l} order {o}"))
        .collect::<Vec<_>>();
    writeln!(
        out,
        "poles: {}",
        if poles.is_empty() {
            "none".into()
        } else {
            poles.join(", ")
        }
    )
    .unwrap();
    writeln!(
        out,
        "values in kernel of R: {}",
        if c.kernel_of_r { "yes" } else { "no" }
    )
    .unwrap();
    out
}

fn ptgen(sc: &Scenario, series: &PtSeries, insertion: Option<&InsertionFunctional>) -> Outcome {
    let mut out = certificate_text(series);
    out.push_str("generating function:\n");
    out.push_str(&series.gf.text());
    if let Some(f) = insertion {
        let scalar = apply_insertion(f, &series.gf, sc.ring())?;
        writeln!(out, "with insertion: {}", scalar_text(&scalar)).unwrap();
    }
    Ok(out)
}

fn expand(
    sc: &Scenario,
    series: &PtSeries,
    insertion: Option<&InsertionFunctional>,
    n_max: i64,
) -> Outcome {
    let mut out = String::new();
    match insertion {
        Some(f) => {
            let scalar = apply_insertion(f, &series.gf, sc.ring())?;
            for (n, v) in gf_expand(&scalar, n_max) {
                writeln!(out, "{n} {}", show(&v)).unwrap();
            }
        }
        None => {
            for (n, v) in gf_expand(&series.gf, n_max) {
                writeln!(out, "{n} {}", v.text()).unwrap();
            }
        }
    }
    Ok(out)
}

fn fail(msg: String) -> CliError {
    CliError::Certification(msg)
}

fn verify<M: Memo>(sc: &Scenario, memo: &M, beta: &[i64], opts: &Options) -> Outcome {
    let series = pt_series(sc, memo, beta, &PtOptions::default())?;
    let c = &series.certificate;
    let mut out = certificate_text(&series);
    let top = c.degrees.iter().copied().max().unwrap_or(0) as u32 + 1;
    if !series.gf.denominator_divides(c.period_bound, top) {
        return Err(fail(format!(
            "denominator does not divide (1-q^{})^{top}",
            c.period_bound
        )));
    }
    writeln!(
        out,
        "denominator divides (1-q^{})^{top}: ok",
        c.period_bound
    )
    .unwrap();
    let span = c.recursion_start..c.recursion_start + VERIFY_SPAN;
    for n in span.clone() {
        let v = series.gf.coefficient(n);
        if !eq_residual(sc, memo, beta, n, &v)?.is_zero() {
            return Err(fail(format!(
                "stable-pair identity fails at n = {n} for value {}",
                v.text()
            )));
        }
        let fresh = pt_value(sc, &NoMemo, beta, n)?;
        if fresh != v {
            return Err(fail(format!(
                "uncached recursion gives {} at n = {n}, series gives {}",
                fresh.text(),
                v.text()
            )));
        }
    }
    writeln!(
        out,
        "identity and uncached recursion on {}..{}: ok",
        span.start,
        span.end - 1
    )
    .unwrap();
    if opts.oracle {
        for n in span.clone() {
            recursion_sum(sc, memo, beta, n, ORACLE_MARGIN)?;
            let id = dt_wallcross(sc, beta, n, sc.geometry().omega(), 2)?;
            let dt = sc.dt_value(beta, n)?;
            if id.value != dt {
                return Err(fail(format!(
                    "identity wall-crossing changes the DT value at n = {n}: {} vs {}",
                    id.value.text(),
                    dt.text()
                )));
            }
        }
        writeln!(
            out,
            "widened recursion (margin {ORACLE_MARGIN}) and identity wall-crossing on {}..{}: ok",
            span.start,
            span.end - 1
        )
        .unwrap();
    }
    Ok(out)
}
