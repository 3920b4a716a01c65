use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use symquant::freelie::{bch, z_sym};
use symquant::graphs::{weight_mc, zero_weight_predicate, ColoredGraph, ZeroVerdict};
use symquant::hc::{hc_projection_uea, hc_restrict, validate_iwasawa, weyl_invariance_check, weyl_matrices, IwasawaData};
use symquant::io::{load_algebra, linear_expr, Model};
use symquant::lie::vector_name;
use symquant::poly::Poly;
use symquant::polyops::invariant_subspace;
use symquant::rat::{fmt_q, parse_q};
use symquant::starprod::{character_sigma_stable, e_series, star_cf};
use symquant::trace::{density_series, DensityKind};
use symquant::uea::{duflo_relation_check, rouviere_sharp, star_dk};
use symquant::{Error, Q};

#[derive(Parser)]
#[command(name = "symquant", version, about = "Exact quantization of symmetric pairs")]
struct Cli {
    /// Also write the report as JSON.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an algebra file and report the decomposition.
    Validate { file: String },
    /// Bases of S(p)^k by degree.
    Invariants {
        file: String,
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Baker-Campbell-Hausdorff series in the Lyndon basis.
    Bch {
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Z = (1/2) log(e^X e^2Y e^X).
    Zsym {
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Star product on S(g) transported from U(g).
    StarDk {
        file: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Product on invariants through U(g)/U(g)k.
    StarRou {
        file: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "zero")]
        lambda: String,
    },
    /// Order-4 product from the E function.
    StarCf {
        file: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "zero")]
        lambda: String,
    },
    /// E_lambda(X, Y) truncated at the given order.
    ESeries {
        file: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value = "zero")]
        lambda: String,
    },
    /// Harish-Chandra projection with the file's Iwasawa data.
    HcProject {
        file: String,
        #[arg(long)]
        p: String,
    },
    /// Monte-Carlo weight of a graph file.
    GraphWeight {
        file: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the two sides of the Duflo relation up to a degree.
    DufloCheck {
        file: String,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value = "zero")]
        lambda: String,
    },
    /// Character of an invariant at f with a sigma-stable polarization.
    Char {
        file: String,
        #[arg(long)]
        p: String,
        /// f in g*, comma-separated file coordinates.
        #[arg(long)]
        at: String,
        /// Polarization vectors over the file basis, separated by ';'.
        #[arg(long)]
        polarization: String,
    },
    /// Density series specialized to the pair.
    Densities {
        file: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
}

enum Item {
    Exact(String),
    Float { value: f64, error: f64 },
}

struct Report {
    command: Vec<String>,
    digest: Sha256,
    results: Vec<(String, Item)>,
}

impl Report {
    fn exact(&mut self, label: &str, v: impl Into<String>) {
        self.results.push((label.into(), Item::Exact(v.into())));
    }

    fn read(&mut self, path: &str) -> Result<String, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        self.digest.update(text.as_bytes());
        Ok(text)
    }

    fn model(&mut self, path: &str) -> Result<Model, Error> {
        self.read(path)?;
        load_algebra(path)?.model()
    }
}

fn q_str(c: &Q) -> String {
    fmt_q(c)
}

fn run(cmd: Cmd, r: &mut Report) -> Result<(), Error> {
    match cmd {
        Cmd::Validate { file } => {
            let m = r.model(&file)?;
            let pair = &m.pair;
            r.exact("name", pair.def.name.clone());
            r.exact("dim g", pair.dim().to_string());
            r.exact("dim k", pair.nk.to_string());
            r.exact("dim p", pair.np.to_string());
            r.exact("p basis", pair.p_names().join(", "));
            r.exact("k basis", pair.names[pair.np..].join(", "));
            let trk = pair.tr_k();
            r.exact("tr_k", trk.lambda.iter().map(q_str).collect::<Vec<_>>().join(", "));
            if m.raw.get("iwasawa").is_some() {
                let rep = validate_iwasawa(&IwasawaData::from_json(pair, &m.raw)?)?;
                r.exact("iwasawa", format!("valid (p0 {}, k0 {}, n+ {})", rep.dim_p0, rep.dim_k0, rep.dim_n_plus));
            }
        }
        Cmd::Invariants { file, degree } => {
            let m = r.model(&file)?;
            for d in 1..=degree {
                let basis = invariant_subspace(&m.pair, d);
                let names: Vec<String> = basis.iter().map(|p| p.fmt_with(&m.pair.p_names())).collect();
                r.exact(&format!("degree {d}"), format!("[{}]", names.join("; ")));
            }
        }
        Cmd::Bch { order } => r.exact("bch", bch(order)?.to_string()),
        Cmd::Zsym { order } => r.exact("z_sym", z_sym(order)?.to_string()),
        Cmd::StarDk { file, f, g } => {
            let m = r.model(&file)?;
            let out = star_dk(&m.pair, &m.parse_g(&f)?, &m.parse_g(&g)?)?;
            r.exact("f * g", out.fmt_with(&m.pair.names));
        }
        Cmd::StarRou { file, p, q, lambda } => {
            let m = r.model(&file)?;
            let out = rouviere_sharp(&m.pair, &m.parse_p(&p)?, &m.parse_p(&q)?, &m.character(&lambda)?)?;
            r.exact("P # Q", m.express(&out, 8));
        }
        Cmd::StarCf { file, p, q, lambda } => {
            let m = r.model(&file)?;
            let out = star_cf(&m.pair, &m.parse_p(&p)?, &m.parse_p(&q)?, &m.character(&lambda)?)?;
            r.exact("P *_CF Q", m.express(&out.value, 8));
            r.exact("truncated", out.truncated.to_string());
        }
        Cmd::ESeries { file, order, lambda } => {
            let m = r.model(&file)?;
            let e = e_series(&m.pair, &m.character(&lambda)?, order)?;
            let np = m.pair.np;
            let names: Vec<String> = (1..=np).map(|i| format!("x{i}")).chain((1..=np).map(|i| format!("y{i}"))).collect();
            r.exact("coordinates", m.pair.p_names().join(", "));
            r.exact("E", e.fmt_with(&names));
        }
        Cmd::HcProject { file, p } => {
            let m = r.model(&file)?;
            let data = IwasawaData::from_json(&m.pair, &m.raw)?;
            validate_iwasawa(&data)?;
            let names: Vec<String> =
                data.p0.iter().map(|v| vector_name(&m.pair.to_file(v), &m.pair.def.basis)).collect();
            let f = m.parse_p(&p)?;
            let restricted = hc_restrict(&data, &f, true)?;
            r.exact("restriction", restricted.fmt_with(&names));
            r.exact("uea projection", hc_projection_uea(&data, &f)?.fmt_with(&names));
            let weyl = weyl_matrices(&m.raw)?;
            if !weyl.is_empty() {
                r.exact("weyl invariant", weyl_invariance_check(&data, &[restricted], &weyl)?.to_string());
            }
        }
        Cmd::GraphWeight { file, samples, seed } => {
            let text = r.read(&file)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let g = ColoredGraph::from_json(&v)?;
            let verdict = zero_weight_predicate(&g);
            r.exact("predicate", format!("{verdict:?}"));
            match verdict {
                ZeroVerdict::Zero(_) => r.exact("weight", "0"),
                ZeroVerdict::Unknown => {
                    let w = weight_mc(&g, samples, seed)?;
                    r.results.push(("weight".into(), Item::Float { value: w.value, error: w.std_error }));
                }
            }
        }
        Cmd::DufloCheck { file, degree, lambda } => {
            let m = r.model(&file)?;
            let rep = duflo_relation_check(&m.pair, &m.character(&lambda)?, degree);
            r.exact("degree", rep.degree.to_string());
            r.exact("left dim", rep.left_dim.to_string());
            r.exact("right dim", rep.right_dim.to_string());
            r.exact("equal", rep.equal.to_string());
        }
        Cmd::Char { file, p, at, polarization } => {
            let m = r.model(&file)?;
            let f: Vec<Q> = at.split(',').map(|s| parse_q(s.trim())).collect::<Result<_, _>>()?;
            let b: Vec<Vec<Q>> =
                polarization.split(';').map(|s| linear_expr(&m.pair.def.basis, s)).collect::<Result<_, _>>()?;
            let chi = character_sigma_stable(&m.pair, &m.parse_p(&p)?, &f, &b)?;
            r.exact("chi", q_str(&chi));
        }
        Cmd::Densities { file, order } => {
            let m = r.model(&file)?;
            for (label, kind) in [("J^(1/2)", DensityKind::JHalf), ("q^(1/2)", DensityKind::QHalf)] {
                let s = density_series(&m.pair, kind, order)?;
                let names = if kind.on_p() { m.pair.p_names() } else { m.pair.names.clone() };
                let poly: Poly = s.eval(&m.pair, kind.on_p());
                r.exact(label, s.to_string());
                r.exact(&format!("{label} on the pair"), poly.fmt_with(&names));
            }
        }
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn to_json(r: Report, ms: f64) -> Value {
    let results: Vec<Value> = r
        .results
        .iter()
        .map(|(l, v)| match v {
            Item::Exact(s) => json!({"label": l, "exact": s}),
            Item::Float { value, error } => json!({"label": l, "value": value, "error": error}),
        })
        .collect();
    json!({
        "command": r.command,
        "inputs_digest": format!("sha256:{}", hex(&r.digest.finalize())),
        "results": results,
        "timing_ms": ms,
    })
}

/// Input and usage problems exit 1; failed validations exit 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::UnknownName(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut digest = Sha256::new();
    digest.update(argv[1..].join("\0").as_bytes());
    let mut report = Report { command: argv[1..].to_vec(), digest, results: Vec::new() };
    let start = Instant::now();
    if let Err(e) = run(cli.cmd, &mut report) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    for (label, item) in &report.results {
        match item {
            Item::Exact(s) => println!("{label}: {s}"),
            Item::Float { value, error } => println!("{label}: {value:.6} +- {error:.6}"),
        }
    }
    if let Some(path) = cli.json {
        let text = serde_json::to_string_pretty(&to_json(report, ms)).expect("report serializes");
        if let Err(e) = std::fs::write(&path, text) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
