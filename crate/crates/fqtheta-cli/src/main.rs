//! Command-line driver for the finite theta and descent engine: runs the
//! verification suites against their predicted outcomes, prints dual-pair
//! multiplicity tables, and maintains the on-disk group cache.
//!
//! Exit codes: 0 all binding checks pass, 1 binding failure, 2 configuration
//! error, 3 resource-guard refusal.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fqtheta::cache::{clear_cache, default_cache_dir, list_entries, realize_cached};
use fqtheta::classfun::irr_small;
use fqtheta::descent::{
    characters_equal, transfer_identity_check, verify_main_theorem, Assertion, DescentCase,
};
use fqtheta::classfun::{ClassFunction, Group};
use fqtheta::forms::{standard_space, Tower};
use fqtheta::groups::GroupKind;
use fqtheta::scalars::{make_field, psi_pair};
use fqtheta::theta::{dual_pair_ctx, induction_compat_check};
use fqtheta::unipotent::{base_theta_sl2, build_sp_unipotent, LabeledRep};
use fqtheta::{Error, DEFAULT_ORDER_BOUND};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_REFUSED: u8 = 3;

#[derive(Parser)]
#[command(name = "fqtheta", version, about = "Exact theta/descent verification over small finite fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verification cases and report every assertion.
    Verify(VerifyArgs),
    /// Print the multiplicity table of a dual pair over built representations.
    Table(TableArgs),
    /// Inspect or clear the on-disk group cache.
    Cache(CacheArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    All,
    BOdd,
    BEven,
    Fj,
    Transfer,
    Induction,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strictness {
    Binding,
    Informative,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which case to run.
    #[arg(long, value_enum, default_value_t = CaseArg::All)]
    case: CaseArg,
    /// Flag depth parameter; sizes beyond 1 are refused by the order guard.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Field sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
    q: Vec<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Refuse groups whose projected order exceeds this bound.
    #[arg(long, default_value_t = DEFAULT_ORDER_BOUND)]
    order_bound: u64,
    /// Refuse oscillator carriers larger than this dimension.
    #[arg(long, default_value_t = 1 << 20)]
    carrier_bound: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Force every cell binding or informative, overriding the defaults
    /// (Bessel binding at q in {3,5}; FJ and the instance checks binding at
    /// q = 5 only).
    #[arg(long, value_enum)]
    strict: Option<Strictness>,
}

#[derive(Args)]
struct TableArgs {
    /// Dual pair as big:small, e.g. sp4:o2minus or sl2:o1plus.
    #[arg(long)]
    pair: String,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORDER_BOUND)]
    order_bound: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CacheArgs {
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    op: CacheOp,
}

#[derive(Subcommand)]
enum CacheOp {
    /// Deterministic listing of cached group files.
    List,
    /// Remove every cached group file.
    Clear,
    /// Entry count and total size.
    Stat,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Table(a) => cmd_table(a),
        Cmd::Cache(a) => cmd_cache(a),
    };
    ExitCode::from(code)
}

/// One (case, q) verification cell.
struct Cell {
    case: &'static str,
    q: u64,
    binding: bool,
    /// None when the instance is unavailable at this field size.
    pass: Option<bool>,
    assertions: Vec<Assertion>,
    details: Vec<String>,
    timings: Vec<(String, f64)>,
}

fn binding_default(case: &'static str, q: u64) -> bool {
    match case {
        "B-odd" | "B-even" => q == 3 || q == 5,
        _ => q == 5,
    }
}

fn cmd_verify(a: VerifyArgs) -> u8 {
    if let Some(n) = a.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("warning: thread pool already initialized");
        }
    }
    let cache = a.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let cases: Vec<CaseArg> = match a.case {
        CaseArg::All => vec![
            CaseArg::BOdd,
            CaseArg::BEven,
            CaseArg::Fj,
            CaseArg::Transfer,
            CaseArg::Induction,
        ],
        c => vec![c],
    };
    for &q in &a.q {
        if make_field(q).is_err() {
            eprintln!("unsupported field size q = {q}");
            return EXIT_CONFIG;
        }
    }
    let mut cells: Vec<Cell> = Vec::new();
    for &q in &a.q {
        for &case in &cases {
            let (label, built): (&'static str, Result<Cell, Error>) = match case {
                CaseArg::BOdd | CaseArg::BEven | CaseArg::Fj => {
                    let dc = match case {
                        CaseArg::BOdd => DescentCase::BesselOdd,
                        CaseArg::BEven => DescentCase::BesselEven,
                        _ => DescentCase::FourierJacobi,
                    };
                    let label = dc.label();
                    let r = verify_main_theorem(
                        dc,
                        a.k,
                        q,
                        Some(&cache),
                        a.order_bound,
                        a.carrier_bound,
                    )
                    .map(|rep| Cell {
                        case: label,
                        q,
                        binding: false,
                        pass: Some(rep.pass),
                        assertions: rep.assertions,
                        details: Vec::new(),
                        timings: rep.timings,
                    });
                    (label, r)
                }
                CaseArg::Transfer => (
                    "transfer",
                    transfer_identity_check(q, a.order_bound).map(|rep| Cell {
                        case: "transfer",
                        q,
                        binding: false,
                        pass: rep.pass,
                        assertions: Vec::new(),
                        details: rep.details,
                        timings: Vec::new(),
                    }),
                ),
                CaseArg::Induction => (
                    "induction",
                    induction_compat_check(q, Some(&cache), a.order_bound).map(|rep| Cell {
                        case: "induction",
                        q,
                        binding: false,
                        pass: rep.pass,
                        assertions: Vec::new(),
                        details: rep.details,
                        timings: Vec::new(),
                    }),
                ),
                CaseArg::All => unreachable!(),
            };
            match built {
                Ok(mut cell) => {
                    cell.binding = match a.strict {
                        Some(Strictness::Binding) => true,
                        Some(Strictness::Informative) => false,
                        None => binding_default(label, q),
                    };
                    cells.push(cell);
                }
                Err(Error::OrderBound { what, projected, bound }) => {
                    eprintln!(
                        "refused: {what} would need order {projected} > bound {bound} \
                         (beyond desk scale)"
                    );
                    return EXIT_REFUSED;
                }
                Err(Error::CarrierBound { needed, bound }) => {
                    eprintln!("refused: carrier dimension {needed} > bound {bound}");
                    return EXIT_REFUSED;
                }
                Err(e) => {
                    eprintln!("error in {label} at q = {q}: {e}");
                    return EXIT_FAIL;
                }
            }
        }
    }
    emit_cells(&cells, a.format);
    let binding_fail = cells
        .iter()
        .any(|c| c.binding && c.pass == Some(false));
    if binding_fail {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

fn emit_cells(cells: &[Cell], format: Format) {
    match format {
        Format::Text => {
            for c in cells {
                let status = match c.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "UNAVAILABLE",
                };
                let mode = if c.binding { "binding" } else { "informative" };
                println!("[{} q={}] {} ({})", c.case, c.q, status, mode);
                for s in &c.assertions {
                    println!(
                        "  {} {}: predicted {}, computed {}",
                        if s.pass { "ok  " } else { "FAIL" },
                        s.name,
                        s.predicted,
                        s.computed
                    );
                }
                for d in &c.details {
                    println!("  note {d}");
                }
            }
            let failed: Vec<String> = cells
                .iter()
                .filter(|c| c.pass == Some(false))
                .map(|c| format!("{} q={}", c.case, c.q))
                .collect();
            if failed.is_empty() {
                println!("all cells pass");
            } else {
                println!("failing cells: {}", failed.join(", "));
            }
        }
        Format::Json => {
            let cells_json: Vec<serde_json::Value> = cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "case": c.case,
                        "q": c.q,
                        "binding": c.binding,
                        "pass": c.pass,
                        "assertions": c.assertions,
                        "details": c.details,
                    })
                })
                .collect();
            let timings: Vec<serde_json::Value> = cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "case": c.case,
                        "q": c.q,
                        "steps": c.timings,
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "schema_version": 1,
                "cells": cells_json,
                "timings": timings,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Csv => {
            println!("case,q,binding,assertion,predicted,computed,pass");
            for c in cells {
                if c.assertions.is_empty() {
                    let status = match c.pass {
                        Some(true) => "true",
                        Some(false) => "false",
                        None => "unavailable",
                    };
                    println!("{},{},{},instance,,,{}", c.case, c.q, c.binding, status);
                }
                for s in &c.assertions {
                    println!(
                        "{},{},{},{},{},{},{}",
                        c.case,
                        c.q,
                        c.binding,
                        s.name,
                        s.predicted.replace(',', ";"),
                        s.computed.replace(',', ";"),
                        s.pass
                    );
                }
            }
        }
    }
}

fn small_tower(token: &str) -> Option<(Tower, usize)> {
    match token {
        "o1plus" => Some((Tower::OOddPlus, 1)),
        "o1minus" => Some((Tower::OOddMinus, 1)),
        "o2plus" => Some((Tower::OEvenPlus, 2)),
        "o2minus" => Some((Tower::OEvenMinus, 2)),
        _ => None,
    }
}

fn cmd_table(a: TableArgs) -> u8 {
    match table_impl(&a) {
        Ok(code) => code,
        Err(Error::OrderBound { what, projected, bound }) => {
            eprintln!("refused: {what} would need order {projected} > bound {bound}");
            EXIT_REFUSED
        }
        Err(Error::CarrierBound { needed, bound }) => {
            eprintln!("refused: carrier dimension {needed} > bound {bound}");
            EXIT_REFUSED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

fn table_impl(a: &TableArgs) -> Result<u8, Error> {
    let Some((big_tok, small_tok)) = a.pair.split_once(':') else {
        eprintln!("--pair must look like big:small, e.g. sp4:o2minus");
        return Ok(EXIT_CONFIG);
    };
    let Some((small_tower, small_dim)) = small_tower(small_tok) else {
        eprintln!("unknown orthogonal side {small_tok:?} (o1plus|o1minus|o2plus|o2minus)");
        return Ok(EXIT_CONFIG);
    };
    let big_dim = match big_tok {
        "sp4" => 4,
        "sl2" => 2,
        _ => {
            eprintln!("unknown symplectic side {big_tok:?} (sp4|sl2)");
            return Ok(EXIT_CONFIG);
        }
    };
    let f = match make_field(a.q) {
        Ok(f) => f,
        Err(_) => {
            eprintln!("unsupported field size q = {}", a.q);
            return Ok(EXIT_CONFIG);
        }
    };
    let cache = a.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let (psi, psi2) = psi_pair(&f);
    let realize_tower = |tower, dim| -> Result<Group, Error> {
        let space = standard_space(&f, tower, dim)?;
        Ok(Group::new(realize_cached(
            Some(&cache),
            &space,
            GroupKind::Isometry,
            a.order_bound,
        )?))
    };
    let small = realize_tower(small_tower, small_dim)?;
    let big = realize_tower(Tower::Sp, big_dim)?;
    let rows: Vec<LabeledRep> = if big_tok == "sp4" {
        let o2m = realize_tower(Tower::OEvenMinus, 2)?;
        vec![build_sp_unipotent(&psi, &o2m, &big)?]
    } else {
        let (alpha, beta) = base_theta_sl2(&psi, &psi2, &big)?;
        vec![alpha, beta]
    };
    let cols = irr_small(&small)?;
    let triv = ClassFunction::trivial(small.clone());
    let sgn = ClassFunction::sign_det(small.clone());
    let col_labels: Vec<String> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if characters_equal(c, &triv).unwrap_or(false) {
                "triv".to_string()
            } else if characters_equal(c, &sgn).unwrap_or(false) {
                "sgn".to_string()
            } else {
                format!("chi{i}[dim {}]", c.dim().map(|d| d.to_string()).unwrap_or_default())
            }
        })
        .collect();
    let ctx = dual_pair_ctx(&psi, &small, &big)?;
    let mut matrix: Vec<Vec<i64>> = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut line = Vec::with_capacity(cols.len());
        for col in &cols {
            line.push(ctx.multiplicity(col, &row.rep)?);
        }
        matrix.push(line);
    }
    match a.format {
        Format::Text => {
            println!("pair {} at q = {}", a.pair, a.q);
            println!("{:24} {}", "", col_labels.join("  "));
            for (row, line) in rows.iter().zip(&matrix) {
                let vals: Vec<String> = line
                    .iter()
                    .zip(&col_labels)
                    .map(|(m, l)| format!("{m:>width$}", width = l.len()))
                    .collect();
                println!("{:24} {}", row.label, vals.join("  "));
            }
        }
        Format::Csv => {
            println!("rep,{}", col_labels.join(","));
            for (row, line) in rows.iter().zip(&matrix) {
                let vals: Vec<String> = line.iter().map(|m| m.to_string()).collect();
                println!("{},{}", row.label, vals.join(","));
            }
        }
        Format::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .zip(&matrix)
                .map(|(row, line)| {
                    let values: serde_json::Map<String, serde_json::Value> = col_labels
                        .iter()
                        .cloned()
                        .zip(line.iter().map(|&m| serde_json::json!(m)))
                        .collect();
                    serde_json::json!({ "rep": row.label, "multiplicities": values })
                })
                .collect();
            let doc = serde_json::json!({
                "schema_version": 1,
                "pair": a.pair,
                "q": a.q,
                "rows": rows_json,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_cache(a: CacheArgs) -> u8 {
    let dir = a.cache_dir.unwrap_or_else(default_cache_dir);
    let listed = match list_entries(&dir) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("cache error: {e}");
            return EXIT_FAIL;
        }
    };
    match a.op {
        CacheOp::List => {
            for e in &listed {
                let flag = if e.stale { "  STALE" } else { "" };
                println!("{}  {} bytes{}", e.name, e.bytes, flag);
            }
        }
        CacheOp::Stat => {
            let total: u64 = listed.iter().map(|e| e.bytes).sum();
            let stale = listed.iter().filter(|e| e.stale).count();
            println!(
                "{} entries, {} bytes total, {} stale, dir {}",
                listed.len(),
                total,
                stale,
                dir.display()
            );
        }
        CacheOp::Clear => match clear_cache(&dir) {
            Ok(n) => println!("removed {n} entries"),
            Err(e) => {
                eprintln!("cache error: {e}");
                return EXIT_FAIL;
            }
        },
    }
    EXIT_OK
}
