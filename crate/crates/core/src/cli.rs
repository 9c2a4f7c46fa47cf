//! The `syncorr` command line.
//!
//! Every verb parses and validates its flags before any numerics run. Output
//! is one record per line; exit status 0 means success or membership, 2 a
//! certified non-member (or a violated inclusion), 3 an inconclusive result
//! and 1 a usage or validation error.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{
    check_inclusion, iterate_reduction, recombine, reduce_dimension, sample_ranked_triple_with,
    CheckOptions, Ensemble, InclusionReport, Proposition, RankedTriple,
};
use crate::point::{CorrPoint3, MarginalVec};
use crate::realize::{realize_hull_point, verify_realization};
use crate::record::{parse_vec, parse_vec3, Precision, Record};
use crate::rng;
use crate::slices::{
    correlation_tensor, slice_membership, slice_mesh, two_experiment_slice, write_mesh,
    HullCertificate, MeshMeta,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NON_MEMBER: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

fn vec_arg(name: &'static str, short: Option<char>, help: &'static str) -> Arg {
    let a = Arg::new(name)
        .long(name)
        .value_name("X,Y,Z")
        .allow_hyphen_values(true)
        .help(help);
    match short {
        Some(c) => a.short(c),
        None => a,
    }
}

fn r_arg() -> Arg {
    vec_arg("r", Some('r'), "marginal vector").required(true)
}

fn p_arg() -> Arg {
    vec_arg("p", Some('p'), "correlation point (w12,w13,w23)").required(true)
}

fn eps_arg(default: &'static str) -> Arg {
    Arg::new("eps")
        .long("eps")
        .value_parser(value_parser!(f64))
        .default_value(default)
        .help("membership tolerance")
}

fn seed_arg() -> Arg {
    Arg::new("seed")
        .long("seed")
        .value_parser(value_parser!(u64))
        .required(true)
        .help("random seed")
}

fn usize_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_parser(value_parser!(usize))
        .help(help)
}

fn ensemble_arg() -> Arg {
    Arg::new("ensemble")
        .long("ensemble")
        .value_parser(["haar", "mixed"])
        .default_value("haar")
        .help("projection sampling ensemble")
}

pub fn command() -> Command {
    Command::new("syncorr")
        .about("Slices, certificates and realizations of three-experiment synchronous correlations")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("human")
                .long("human")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("print 6 significant digits"),
        )
        .subcommand(
            Command::new("member")
                .about("decide membership of a point in a slice")
                .arg(r_arg())
                .arg(p_arg())
                .arg(eps_arg("1e-7")),
        )
        .subcommand(
            Command::new("realize")
                .about("certify a point and build a verified realization")
                .arg(r_arg())
                .arg(p_arg())
                .arg(eps_arg("1e-7")),
        )
        .subcommand(
            Command::new("sample")
                .about("stream trace triples of random projections")
                .arg(usize_arg("d", "dimension").short('d').required(true))
                .arg(
                    Arg::new("n")
                        .short('n')
                        .long("ranks")
                        .value_name("N1,N2,N3")
                        .required(true)
                        .help("projection ranks"),
                )
                .arg(
                    Arg::new("trials")
                        .short('N')
                        .long("trials")
                        .value_parser(value_parser!(usize))
                        .required(true)
                        .help("number of samples"),
                )
                .arg(seed_arg())
                .arg(ensemble_arg())
                .arg(
                    Arg::new("triples")
                        .long("triples")
                        .action(ArgAction::SetTrue)
                        .help("print the projections instead of trace triples"),
                ),
        )
        .subcommand(
            Command::new("reduce")
                .about("reduce serialized projection triples by one dimension")
                .arg(
                    Arg::new("input")
                        .long("input")
                        .short('i')
                        .value_parser(value_parser!(PathBuf))
                        .help("read records from FILE instead of stdin"),
                )
                .arg(
                    Arg::new("pair")
                        .long("pair")
                        .value_name("A,B")
                        .help("experiments to reduce along (1-based)"),
                )
                .arg(
                    Arg::new("all")
                        .long("all")
                        .action(ArgAction::SetTrue)
                        .conflicts_with("pair")
                        .help("reduce repeatedly and print the terminal triples"),
                ),
        )
        .subcommand(
            Command::new("check")
                .about("Monte-Carlo check of an inclusion statement")
                .arg(
                    Arg::new("prop")
                        .long("prop")
                        .required(true)
                        .value_parser([
                            "typeI",
                            "typeI-swap",
                            "typeII",
                            "typeII-swap",
                            "typeIII",
                            "two-exp",
                            "slice",
                            "all",
                        ])
                        .help("statement to check"),
                )
                .arg(usize_arg("n", "rank n"))
                .arg(usize_arg("k", "rank offset k"))
                .arg(usize_arg("kp", "rank offset k'"))
                .arg(usize_arg("n1", "first rank"))
                .arg(usize_arg("n2", "second rank"))
                .arg(usize_arg("n3", "third rank"))
                .arg(usize_arg("d", "dimension"))
                .arg(usize_arg("max-d", "largest dimension for --prop all"))
                .arg(usize_arg("trials", "samples per case").default_value("10000"))
                .arg(usize_arg("max-iter", "hull solver iterations").default_value("10000"))
                .arg(seed_arg())
                .arg(eps_arg("1e-6"))
                .arg(ensemble_arg()),
        )
        .subcommand(
            Command::new("tensor")
                .about("print the 36 entries of the correlation tensor")
                .arg(r_arg())
                .arg(p_arg()),
        )
        .subcommand(
            Command::new("mesh")
                .about("export boundary points of a slice")
                .arg(r_arg())
                .arg(usize_arg("res", "number of directions").default_value("2000"))
                .arg(
                    Arg::new("output")
                        .short('o')
                        .long("output")
                        .value_parser(value_parser!(PathBuf))
                        .required(true)
                        .help("output file"),
                )
                .arg(eps_arg("1e-7"))
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_parser(value_parser!(u64))
                        .default_value("0")
                        .help("recorded in the metadata; the mesh itself is deterministic"),
                ),
        )
        .subcommand(
            Command::new("two-exp")
                .about("trace range of two projections with marginals r1, r2")
                .arg(vec_arg("r", Some('r'), "marginals r1,r2").required(true)),
        )
}

/// Runs the command line on `args` (including the program name).
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let prec = if matches.get_flag("human") {
        Precision::Human
    } else {
        Precision::Full
    };
    let (verb, sub) = matches.subcommand().expect("subcommand required");
    let mut out = Vec::new();
    let status = dispatch(verb, sub, prec, stdin, &mut out);
    let _ = stdout.write_all(&out);
    match status {
        Ok(code) => code,
        Err(e) => {
            let mut cmd = command();
            let usage = cmd
                .find_subcommand_mut(verb)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            let _ = writeln!(stderr, "error: {e}\n\n{usage}");
            EXIT_USAGE
        }
    }
}

fn dispatch(
    verb: &str,
    m: &ArgMatches,
    prec: Precision,
    stdin: &mut dyn BufRead,
    out: &mut Vec<u8>,
) -> Result<i32> {
    match verb {
        "member" => member(m, prec, out, false),
        "realize" => member(m, prec, out, true),
        "sample" => sample(m, prec, out),
        "reduce" => reduce(m, prec, stdin, out),
        "check" => check(m, prec, out),
        "tensor" => tensor(m, prec, out),
        "mesh" => mesh(m, out),
        "two-exp" => two_exp(m, prec, out),
        _ => unreachable!("clap rejects unknown verbs"),
    }
}

fn emit(out: &mut Vec<u8>, rec: &Record) {
    writeln!(out, "{rec}").expect("writing to memory");
}

fn vec3(m: &ArgMatches, name: &str) -> Result<[f64; 3]> {
    let v = parse_vec3(m.get_one::<String>(name).expect("required"))?;
    if v.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("-{name} must be finite")));
    }
    Ok(v)
}

fn marginals(m: &ArgMatches) -> Result<MarginalVec> {
    let r = MarginalVec(vec3(m, "r")?);
    if !r.in_unit_cube() {
        return Err(Error::InvalidArgument(format!("-r {:?} outside [0,1]^3", r.0)));
    }
    Ok(r)
}

fn eps(m: &ArgMatches) -> Result<f64> {
    let e = *m.get_one::<f64>("eps").expect("defaulted");
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::InvalidArgument(format!("--eps {e} must be positive")));
    }
    Ok(e)
}

fn ensemble(m: &ArgMatches) -> Ensemble {
    m.get_one::<String>("ensemble")
        .expect("defaulted")
        .parse()
        .expect("clap restricts values")
}

fn verdict_code(h: &HullCertificate) -> i32 {
    match h {
        HullCertificate::Member { .. } => EXIT_OK,
        HullCertificate::NonMember { .. } => EXIT_NON_MEMBER,
        HullCertificate::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

fn member(m: &ArgMatches, prec: Precision, out: &mut Vec<u8>, realize: bool) -> Result<i32> {
    let r = marginals(m)?;
    let p = CorrPoint3(vec3(m, "p")?);
    let eps = eps(m)?;
    let cert = slice_membership(&r, &p, eps)?;
    for rec in cert.to_records(prec) {
        emit(out, &rec);
    }
    let code = verdict_code(&cert.hull);
    if !realize || code != EXIT_OK {
        return Ok(code);
    }
    let residual = match &cert.hull {
        HullCertificate::Member { residual, .. } => *residual,
        _ => unreachable!(),
    };
    let real = realize_hull_point(&cert)?;
    let report = verify_realization(&real, &r, &p, (residual + 1e-12).max(1e-9));
    emit(out, &real.to_record(prec));
    emit(out, &report.to_record(prec));
    Ok(if report.passed() { EXIT_OK } else { EXIT_USAGE })
}

fn sample(m: &ArgMatches, prec: Precision, out: &mut Vec<u8>) -> Result<i32> {
    let d = *m.get_one::<usize>("d").expect("required");
    let ranks = parse_ranks(m.get_one::<String>("n").expect("required"))?;
    let trials = *m.get_one::<usize>("trials").expect("required");
    let seed = *m.get_one::<u64>("seed").expect("required");
    let ens = ensemble(m);
    let triples = m.get_flag("triples");
    // validate before fanning out
    sample_ranked_triple_with(&mut rng::seeded(seed), d, ranks, ens)?;
    let records: Vec<Record> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let rt = sample_ranked_triple_with(&mut rng::stream(seed, i as u64), d, ranks, ens)?;
            Ok(if triples {
                rt.to_record(prec)
            } else {
                Record::new("triple")
                    .field("trial", i.to_string())
                    .field("w", prec.vec(&rt.trace_triple().0))
            })
        })
        .collect::<Result<_>>()?;
    for rec in &records {
        emit(out, rec);
    }
    Ok(EXIT_OK)
}

fn parse_ranks(s: &str) -> Result<[usize; 3]> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("rank {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    <[usize; 3]>::try_from(v).map_err(|v| Error::Parse(format!("expected 3 ranks, got {}", v.len())))
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("--pair {s:?}: expected two of 1,2,3"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if !(1..=3).contains(&a) || !(1..=3).contains(&b) || a == b {
        return Err(bad());
    }
    Ok((a - 1, b - 1))
}

fn reduce(
    m: &ArgMatches,
    prec: Precision,
    stdin: &mut dyn BufRead,
    out: &mut Vec<u8>,
) -> Result<i32> {
    let pair = m.get_one::<String>("pair").map(|s| parse_pair(s)).transpose()?;
    let all = m.get_flag("all");
    let text = match m.get_one::<PathBuf>("input") {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?,
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::InvalidArgument(format!("stdin: {e}")))?;
            s
        }
    };
    let triples: Vec<RankedTriple> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| RankedTriple::from_record(&Record::parse(l)?))
        .collect::<Result<_>>()?;
    if triples.is_empty() {
        return Err(Error::Parse("no ranked_triple records in input".into()));
    }
    for rt in &triples {
        if all {
            let terminals = iterate_reduction(rt)?;
            let combined = recombine(&terminals, rt.d());
            let t = rt.trace_triple().0;
            let residual = (0..3).map(|k| (t[k] - combined[k]).abs()).fold(0.0, f64::max);
            emit(
                out,
                &Record::new("reduction")
                    .field("d", rt.d().to_string())
                    .field("terminals", terminals.len().to_string())
                    .field("residual", prec.num(residual)),
            );
            for (w, child) in &terminals {
                emit(out, &child.to_record(prec).field("weight", prec.num(*w)));
            }
            continue;
        }
        let ranks = rt.ranks();
        let pair = match pair {
            Some(p) => p,
            None => *rt
                .reducible_pairs()
                .iter()
                .min_by_key(|&&(a, b)| (ranks[a] + ranks[b], a, b))
                .ok_or_else(|| {
                    Error::Precondition(format!("no pair of ranks {ranks:?} sums below d"))
                })?,
        };
        let step = reduce_dimension(rt, pair)?;
        emit(
            out,
            &step
                .to_record(prec)
                .field("residual", prec.num(step.residual(rt))),
        );
        for (role, child) in [("decremented", &step.decremented), ("retained", &step.retained)] {
            if let Some(c) = child {
                emit(out, &c.to_record(prec).field("role", role));
            }
        }
    }
    Ok(EXIT_OK)
}

fn need(m: &ArgMatches, name: &str) -> Result<usize> {
    m.get_one::<usize>(name)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this proposition")))
}

fn proposition(m: &ArgMatches, name: &str) -> Result<Proposition> {
    let d = need(m, "d")?;
    let p = match name {
        "typeI" => Proposition::TypeI { n: need(m, "n")?, d },
        "typeI-swap" => Proposition::TypeISwap { n: need(m, "n")?, d },
        "typeII" => Proposition::TypeII {
            n: need(m, "n")?,
            k: need(m, "k")?,
            d,
        },
        "typeII-swap" => Proposition::TypeIISwap {
            n: need(m, "n")?,
            k: need(m, "k")?,
            d,
        },
        "typeIII" => Proposition::TypeIII {
            n: need(m, "n")?,
            k: need(m, "k")?,
            kp: need(m, "kp")?,
            d,
        },
        "two-exp" => Proposition::TwoExp {
            n1: need(m, "n1")?,
            n2: need(m, "n2")?,
            d,
        },
        "slice" => Proposition::Slice {
            ranks: [need(m, "n1")?, need(m, "n2")?, need(m, "n3")?],
            d,
        },
        _ => unreachable!("clap restricts values"),
    };
    p.validate()?;
    Ok(p)
}

fn check(m: &ArgMatches, prec: Precision, out: &mut Vec<u8>) -> Result<i32> {
    let name = m.get_one::<String>("prop").expect("required");
    let props = if name == "all" {
        Proposition::admissible(need(m, "max-d")?)
    } else {
        vec![proposition(m, name)?]
    };
    let opts = CheckOptions {
        trials: *m.get_one::<usize>("trials").expect("defaulted"),
        seed: *m.get_one::<u64>("seed").expect("required"),
        eps: eps(m)?,
        ensemble: ensemble(m),
        max_iter: *m.get_one::<usize>("max-iter").expect("defaulted"),
    };
    let mut code = EXIT_OK;
    for p in &props {
        let report: InclusionReport = check_inclusion(p, &opts)?;
        let mut rec = report.to_record(prec);
        // wall time would break byte-identical output
        rec.fields.retain(|(k, _)| k != "wall_time");
        emit(out, &rec);
        if report.violations > 0 {
            code = EXIT_NON_MEMBER;
        } else if report.inconclusive > 0 && code == EXIT_OK {
            code = EXIT_INCONCLUSIVE;
        }
    }
    Ok(code)
}

fn tensor(m: &ArgMatches, prec: Precision, out: &mut Vec<u8>) -> Result<i32> {
    let r = marginals(m)?;
    let w = CorrPoint3(vec3(m, "p")?);
    let t = correlation_tensor(&r, &w);
    for x in 0..3 {
        for y in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    emit(
                        out,
                        &Record::new("entry")
                            .field("x", (x + 1).to_string())
                            .field("y", (y + 1).to_string())
                            .field("a", i.to_string())
                            .field("b", j.to_string())
                            .field("value", prec.num(t.get(x, y, i, j))),
                    );
                }
            }
        }
    }
    emit(
        out,
        &Record::new("tensor")
            .field("min_entry", prec.num(t.min_entry()))
            .field("synchrony_defect", prec.num(t.synchrony_defect()))
            .field("normalization_defect", prec.num(t.normalization_defect())),
    );
    Ok(EXIT_OK)
}

fn mesh(m: &ArgMatches, out: &mut Vec<u8>) -> Result<i32> {
    let r = marginals(m)?;
    let res = *m.get_one::<usize>("res").expect("defaulted");
    let path = m.get_one::<PathBuf>("output").expect("required");
    let meta = MeshMeta {
        r: r.0,
        resolution: res,
        eps: eps(m)?,
        seed: *m.get_one::<u64>("seed").expect("defaulted"),
    };
    let points = slice_mesh(&r, res)?;
    write_mesh(path, &points, &meta)?;
    emit(
        out,
        &Record::new("mesh")
            .field("points", points.len().to_string())
            .field("file", path.display().to_string()),
    );
    Ok(EXIT_OK)
}

fn two_exp(m: &ArgMatches, prec: Precision, out: &mut Vec<u8>) -> Result<i32> {
    let v = parse_vec(m.get_one::<String>("r").expect("required"))?;
    let [r1, r2] = <[f64; 2]>::try_from(v)
        .map_err(|v| Error::Parse(format!("expected r1,r2, got {} values", v.len())))?;
    let (lo, hi) = two_experiment_slice(r1, r2)?;
    writeln!(out, "[{},{}]", prec.num(lo), prec.num(hi)).expect("writing to memory");
    Ok(EXIT_OK)
}
