//! CSV and report emission. Numeric fields carry 17 significant digits, so
//! doubles round-trip exactly and identical runs are byte-identical.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use gsf_core::gsf::{embed_delta, eval, GPoint};
use gsf_core::mollifier::standard_mollifier;
use gsf_core::ring::{drho_pow, Ctx, GenNum};
use gsf_core::scenarios::{Check, ScenarioOutput};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_scenario(out_dir: &Path, name: &str, out: &ScenarioOutput) -> io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let series = &out.series;
    let ctx = &series.ctx;

    let mut path_csv = String::new();
    let mut header = String::from("epsilon,t");
    for d in 0..series.dim {
        write!(header, ",y{}", d + 1).unwrap();
    }
    for d in 0..series.dim {
        write!(header, ",dy{}", d + 1).unwrap();
    }
    path_csv.push_str(&header);
    path_csv.push('\n');
    for i in 0..ctx.len() {
        for (k, &t) in series.times.iter().enumerate() {
            path_csv.push_str(&fmt_f64(ctx.eps(i)));
            path_csv.push(',');
            path_csv.push_str(&fmt_f64(t));
            for d in 0..series.dim {
                path_csv.push(',');
                path_csv.push_str(&fmt_f64(series.states[i][k][d]));
            }
            for d in 0..series.dim {
                path_csv.push(',');
                path_csv.push_str(&fmt_f64(series.derivs[i][k][d]));
            }
            path_csv.push('\n');
        }
    }
    std::fs::write(out_dir.join(format!("{name}_path.csv")), path_csv)?;

    let mut ev_csv = String::from("epsilon,event_time,crossing_id\n");
    let mut events = series.events.clone();
    events.sort_by(|a, b| (a.0, a.2).cmp(&(b.0, b.2)).then(a.1.total_cmp(&b.1)));
    for (i, t, id) in &events {
        ev_csv.push_str(&fmt_f64(ctx.eps(*i)));
        ev_csv.push(',');
        ev_csv.push_str(&fmt_f64(*t));
        ev_csv.push(',');
        write!(ev_csv, "{id}").unwrap();
        ev_csv.push('\n');
    }
    std::fs::write(out_dir.join(format!("{name}_events.csv")), ev_csv)?;

    std::fs::write(
        out_dir.join("report.txt"),
        render_report(name, &out.checks, 0),
    )?;
    Ok(())
}

pub fn render_report(name: &str, checks: &[Check], seed: u64) -> String {
    let mut s = String::new();
    writeln!(s, "scenario = {name}").unwrap();
    writeln!(s, "seed = {seed}").unwrap();
    for c in checks {
        writeln!(
            s,
            "check={} status={} value={:.6e} tol={:.1e} note={}",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.value,
            c.tol,
            c.note
        )
        .unwrap();
    }
    writeln!(
        s,
        "overall = {}",
        if checks.iter().all(|c| c.pass) {
            "pass"
        } else {
            "FAIL"
        }
    )
    .unwrap();
    s
}

pub enum ExportError {
    Unknown,
    Io(io::Error),
    Build(String),
}

impl From<io::Error> for ExportError {
    fn from(e: io::Error) -> Self {
        ExportError::Io(e)
    }
}

pub fn write_embed_export(
    out_dir: &Path,
    ctx: &Ctx,
    what: &str,
    samples: usize,
    x_max: f64,
    b_exponent: f64,
) -> Result<PathBuf, ExportError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{what}.csv"));
    match what {
        "mollifier" => {
            let m = standard_mollifier();
            let mut csv = String::from("x,mu,mu_prime\n");
            for (x, v, d) in m.sample_rows(samples) {
                csv.push_str(&fmt_f64(x));
                csv.push(',');
                csv.push_str(&fmt_f64(v));
                csv.push(',');
                csv.push_str(&fmt_f64(d));
                csv.push('\n');
            }
            std::fs::write(&path, csv)?;
        }
        "delta" | "heaviside" | "delta_compose_delta" => {
            let b = drho_pow(ctx, -b_exponent);
            let tree = match what {
                "delta" => embed_delta(&b).map_err(|e| ExportError::Build(e.to_string()))?,
                "heaviside" => gsf_core::gsf::embed_heaviside(&b)
                    .map_err(|e| ExportError::Build(e.to_string()))?,
                _ => {
                    let d = embed_delta(&b).map_err(|e| ExportError::Build(e.to_string()))?;
                    d.compose(vec![d.clone()])
                }
            };
            let mut csv = String::from("epsilon,x,f_eps_of_x\n");
            for i in 0..ctx.len() {
                for k in 0..samples {
                    let x = -x_max + 2.0 * x_max * k as f64 / (samples - 1) as f64;
                    let v = eval(&tree, &GPoint::scalar(GenNum::constant(ctx, x))).at(i);
                    csv.push_str(&fmt_f64(ctx.eps(i)));
                    csv.push(',');
                    csv.push_str(&fmt_f64(x));
                    csv.push(',');
                    csv.push_str(&fmt_f64(v));
                    csv.push('\n');
                }
            }
            std::fs::write(&path, csv)?;
        }
        _ => return Err(ExportError::Unknown),
    }
    Ok(path)
}
