use crate::Outcome;
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use cycdiag::algebra::{render, Chain, Coefficient};
use cycdiag::cohomology::{cohomology_basis, power_op, CochainClass, Normalization};
use cycdiag::diagonal::{
    bare_term, pair_of_term, pair_term, r3_block_coefficient, DiagonalEngine, MuSign, OmegaPair, UTerm,
};
use cycdiag::simplicial::{AugSimplicialSet, Cell};
use cycdiag::straightening::{count_straightenings, enumerate_straightenings, Straightening, StraighteningTable};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Composed,
    Direct,
    Blocks,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Formula,
    Differential,
}

impl From<SignArg> for MuSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Formula => MuSign::Formula,
            SignArg::Differential => MuSign::Differential,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    #[value(alias = "s3")]
    Standard,
    #[value(alias = "s9")]
    Reciprocal,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Standard => Normalization::Standard,
            NormArg::Reciprocal => Normalization::Reciprocal,
        }
    }
}

#[derive(Args, Debug)]
pub struct CoproductArgs {
    #[arg(long)]
    pub r: u32,
    /// Preset name (3, 5a..5d) or a JSON table file.
    #[arg(long)]
    pub straightening: Option<String>,
    /// JSON file, `-` for stdin, or a builder such as `simplex(3)`, `boundary(4)`, `rp2`.
    #[arg(long)]
    pub complex: String,
    #[arg(long)]
    pub q: i64,
    /// Cell name, vertex list `0,1,2`, or `dim:index`.
    #[arg(long)]
    pub cell: String,
    /// Power of ρ applied to the dual generator.
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    #[arg(long, value_enum, default_value_t = Method::Composed)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = SignArg::Formula)]
    pub sign: SignArg,
    /// Attach the sign ledger of every contributing pair.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct CoefficientArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub straightening: Option<String>,
    /// Dimension of the simplex.
    #[arg(long, allow_hyphen_values = true)]
    pub n: i32,
    /// Comma-separated, nondecreasing.
    #[arg(long, default_value = "")]
    pub u: String,
    /// Comma-separated letters in 0..r.
    #[arg(long, default_value = "")]
    pub a: String,
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct PowerArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub straightening: Option<String>,
    #[arg(long)]
    pub complex: String,
    #[arg(long, allow_hyphen_values = true)]
    pub i: i64,
    /// Cohomological dimension of the input classes; all dimensions when omitted.
    #[arg(long)]
    pub dim: Option<i32>,
    /// Index of the basis class; all classes when omitted.
    #[arg(long)]
    pub class: Option<usize>,
    #[arg(long, value_enum, default_value_t = NormArg::Standard)]
    pub normalization: NormArg,
}

#[derive(Args, Debug)]
pub struct StraighteningsArgs {
    #[arg(long)]
    pub r: u32,
    /// Require duality (the default).
    #[arg(long, conflicts_with = "all")]
    pub duality: bool,
    /// Drop the duality requirement.
    #[arg(long)]
    pub all: bool,
    /// Print every table.
    #[arg(long)]
    pub list: bool,
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
}

pub fn load_straightening(r: u32, arg: Option<&str>) -> Result<Straightening> {
    let st = match arg {
        None => Straightening::default_for(r)?,
        Some(name) if Straightening::preset_names().contains(&name) => Straightening::preset(name)?,
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading straightening {path}"))?;
            let table: StraighteningTable = serde_json::from_str(&text).context("parsing straightening table")?;
            Straightening::from_table(&table)?
        }
    };
    if st.r() != r {
        bail!("straightening is for r = {}, not r = {r}", st.r());
    }
    Ok(st)
}

pub fn engine(r: u32, st: Option<&str>) -> Result<DiagonalEngine> {
    if r == 2 {
        if st.is_some() {
            bail!("r = 2 takes no straightening");
        }
        return Ok(DiagonalEngine::for_r(2)?);
    }
    Ok(DiagonalEngine::new(load_straightening(r, st)?))
}

pub fn load_complex(arg: &str) -> Result<AugSimplicialSet> {
    let x = if arg == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
        AugSimplicialSet::from_json(&text)?
    } else if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
        AugSimplicialSet::from_json(&text)?
    } else {
        AugSimplicialSet::builder(arg).map_err(|e| anyhow!("{arg} is neither a file nor a builder: {e}"))?
    };
    x.validate()?;
    Ok(x)
}

fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.trim_matches(|c| c == '[' || c == ']' || c == '(' || c == ')')
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u32>().with_context(|| format!("bad entry {t:?}")))
        .collect()
}

pub fn find_cell(x: &AugSimplicialSet, id: &str) -> Result<Cell> {
    if let Some(c) = x.find(id) {
        return Ok(c);
    }
    if let Some((d, i)) = id.split_once(':') {
        if let (Ok(dim), Ok(index)) = (d.trim().parse::<i32>(), i.trim().parse::<u32>()) {
            if (index as usize) < x.count(dim) {
                return Ok(Cell { dim, index });
            }
        }
    }
    if let Ok(v) = parse_list(id) {
        if let Some(c) = x.find_vertices(&v) {
            return Ok(c);
        }
    }
    bail!("no cell {id:?} in the complex")
}

pub fn cell_json(x: &AugSimplicialSet, c: Cell) -> Value {
    let d = x.data(c);
    json!({ "name": d.name, "dim": c.dim, "index": c.index, "vertices": d.vertices })
}

fn ledger_json(engine: &DiagonalEngine, p: &OmegaPair) -> Result<Value> {
    let mut entry = json!({ "u": p.u, "a": p.a, "n": p.n });
    if engine.r() > 2 {
        let (nu, ledger) = engine.nu_traced(p)?;
        entry["nu"] = json!(render(&nu));
        entry["s"] = json!(ledger.s);
        entry["s_total"] = json!(ledger.s_total());
        entry["steps"] = serde_json::to_value(&ledger.steps)?;
        entry["base"] = serde_json::to_value(&ledger.base)?;
    }
    if engine.r() == 3 {
        entry["block_rule"] = json!(r3_block_coefficient(p));
    }
    Ok(entry)
}

pub fn coproduct(args: &CoproductArgs) -> Result<Outcome> {
    let engine = engine(args.r, args.straightening.as_deref())?;
    let x = load_complex(&args.complex)?;
    let cell = find_cell(&x, &args.cell)?;
    let sign = MuSign::from(args.sign);
    let r = engine.r();
    let n = cell.dim;
    let q = if args.q < 0 { None } else { Some(args.q as usize) };
    let universal: Chain<UTerm> = match (q, args.method) {
        (None, _) => Chain::zero(),
        (Some(q), Method::Composed) => (*engine.mu_universal(n, q, args.j)?).clone(),
        (Some(q), Method::Direct) => {
            if !args.j.is_multiple_of(r) {
                bail!("the direct formula computes j = 0 only");
            }
            if r == 2 {
                bail!("the direct formula needs an odd prime");
            }
            (*engine.mu_direct_universal(n, q)?).clone()
        }
        (Some(q), Method::Blocks) => {
            if !args.j.is_multiple_of(r) {
                bail!("the block rule computes j = 0 only");
            }
            engine.mu_r3_blocks_universal(n, q)?
        }
    };
    let factor = Coefficient::from(sign.factor(r, n, q.unwrap_or(0)));
    // group universal terms by the cells they land on
    let mut grouped: BTreeMap<Vec<Cell>, (Coefficient, Vec<UTerm>)> = BTreeMap::new();
    for (t, c) in universal.iter() {
        let Some(cells) = t.iter().map(|keep| x.face_keep(cell, keep)).collect::<Option<Vec<Cell>>>() else {
            continue;
        };
        let e = grouped.entry(cells).or_insert((Coefficient::from(0), vec![]));
        e.0 += *c * factor;
        e.1.push(t.clone());
    }
    let mut terms = vec![];
    for (cells, (c, sources)) in &grouped {
        if *c == Coefficient::from(0) {
            continue;
        }
        let mut term = json!({
            "factors": cells.iter().map(|&f| cell_json(&x, f)).collect::<Vec<_>>(),
            "coefficient": render(c),
        });
        if args.trace {
            let mut ledgers = vec![];
            for t in sources {
                if let Some(p) = pair_of_term(t, n, r) {
                    ledgers.push(ledger_json(&engine, &p)?);
                }
            }
            term["ledger"] = json!(ledgers);
        }
        terms.push(term);
    }
    let summary = format!(
        "μ(ρ^{} e_{} ⊗ {}) on r = {r}: {} terms ({} on the universal simplex)",
        args.j,
        args.q,
        x.name(cell),
        terms.len(),
        universal.len()
    );
    let json = json!({
        "r": r,
        "straightening": engine.psi().straightening().and_then(|s| s.name()),
        "q": args.q,
        "j": args.j,
        "method": format!("{:?}", args.method).to_lowercase(),
        "sign": format!("{:?}", args.sign).to_lowercase(),
        "cell": cell_json(&x, cell),
        "terms": terms,
        "stats": { "universal_terms": universal.len(), "terms": grouped.len() },
    });
    Ok(Outcome { json, summary, passed: true })
}

pub fn coefficient(args: &CoefficientArgs) -> Result<Outcome> {
    let engine = engine(args.r, args.straightening.as_deref())?;
    let r = engine.r();
    let p = OmegaPair::new(parse_list(&args.u)?, parse_list(&args.a)?, args.n)?;
    p.check_letters(r)?;
    let composed = engine.coefficient_composed(&p, 0)?;
    let mut json = json!({
        "r": r,
        "straightening": engine.psi().straightening().and_then(|s| s.name()),
        "pair": { "u": p.u, "a": p.a, "n": p.n },
        "ordered": p.is_ordered(),
        "word": p.word().to_string(),
        "term": pair_term(&p, r).map(|(_, t)| t).unwrap_or_else(|| bare_term(&p, r)),
        "composed": render(&composed),
    });
    let mut agree = true;
    if r > 2 {
        let direct = engine.coefficient_direct(&p)?;
        json["direct"] = json!(render(&direct));
        agree &= direct == composed || !p.is_ordered();
    }
    if r == 3 {
        let blocks = r3_block_coefficient(&p).unwrap_or(0);
        json["blocks"] = json!(blocks);
    }
    if args.trace {
        json["ledger"] = ledger_json(&engine, &p)?;
    }
    let summary = format!("coefficient of ({:?}, {:?}) on Δ^{}: {}", p.u, p.a, p.n, render(&composed));
    Ok(Outcome { json, summary, passed: agree })
}

fn class_json(h: &cycdiag::cohomology::ReducedComplex, c: &CochainClass) -> Value {
    json!({
        "dim": c.dim,
        "internal_degree": -(c.dim as i64 + 1),
        "values": c.values,
        "coordinates": h.coordinates(c),
        "zero_class": h.is_coboundary(c),
    })
}

pub fn power(args: &PowerArgs) -> Result<Outcome> {
    let engine = engine(args.r, args.straightening.as_deref())?;
    let x = load_complex(&args.complex)?;
    let p = engine.r() as u64;
    let h = cohomology_basis(&x, p)?;
    let dims: Vec<i32> = match args.dim {
        Some(d) => vec![d],
        None => (-1..=x.top_dim()).collect(),
    };
    let mut rows = vec![];
    for dim in dims {
        let basis = h.basis(dim);
        let chosen: Vec<(usize, CochainClass)> = match args.class {
            Some(k) => vec![(k, h.generator(dim, k)?)],
            None => basis.into_iter().enumerate().collect(),
        };
        for (k, g) in chosen {
            let out = power_op(&engine, &x, args.i, &g, args.normalization.into())?;
            rows.push(json!({
                "class": k,
                "input": class_json(&h, &g),
                "output": class_json(&h, &out.output),
                "stats": { "q": out.q, "cells": out.cells, "universal_terms": out.universal_terms },
            }));
        }
    }
    let nonzero = rows.iter().filter(|r| r["output"]["zero_class"] == json!(false)).count();
    let summary = format!("P^{} on {} classes: {} nonzero", args.i, rows.len(), nonzero);
    let json = json!({
        "r": p,
        "i": args.i,
        "normalization": format!("{:?}", args.normalization).to_lowercase(),
        "betti": h.bettis(),
        "results": rows,
    });
    Ok(Outcome { json, summary, passed: true })
}

pub fn straightenings(args: &StraighteningsArgs) -> Result<Outcome> {
    let duality = !args.all;
    let count = count_straightenings(args.r, duality)?;
    let mut json = json!({ "r": args.r, "duality": duality, "count": count.to_string() });
    if args.list {
        let all = enumerate_straightenings(args.r, duality, args.cap)?;
        let tables: Vec<StraighteningTable> = all.iter().map(|s| s.to_table()).collect();
        json["straightenings"] = serde_json::to_value(tables)?;
    }
    let summary = format!("{count} cyclic straightenings for r = {}{}", args.r, if duality { " with duality" } else { "" });
    Ok(Outcome { json, summary, passed: true })
}
