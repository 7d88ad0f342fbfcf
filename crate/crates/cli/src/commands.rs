use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use scengen::casestudy::{
    amortized_extraction, run_grid, unpruned_counts, BuiltScenario, CaseStudy, ExperimentRow,
    GridOptions,
};
use scengen::format::{save_sg, save_tuple, SavedFactor};
use scengen::sample::{ratio_to_f64, walk_stats, Cursor, RandomEnumeration};
use scengen::{
    compute_safe_set, count_paths, draw_indices, explore, split_ranges, ExploreLimits,
    SamplePolicy, SynthError, TraceIndex, TracePrefix, TraceSource,
};
use serde::Serialize;

use crate::error::CliError;
use crate::records::{RecordWriter, TraceRecord};
use crate::source::{check_text, compile_file, has_errors, open_generator, read_text};
use crate::{
    CheckArgs, CountArgs, EnumerateArgs, ExtractArgs, GridArgs, RankArgs, SampleArgs, StatsArgs,
    SynthArgs, WalkArgs,
};

/// Traces unranked per parallel batch.
const BATCH: usize = 4096;

pub struct Env {
    pub memory_limit: usize,
    pub limits: ExploreLimits,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build(compiled: scengen::dsl::Compiled, limits: ExploreLimits) -> Result<BuiltScenario, CliError> {
    let start = std::time::Instant::now();
    let synth = compiled.synthesize(limits).map_err(|(i, source)| CliError::Synth {
        factor: i,
        members: compiled.factors[i].members.join(" & "),
        source,
    })?;
    let reused = synth.iter().filter(|f| f.reused).count();
    Ok(BuiltScenario {
        factors: synth.into_iter().map(|f| f.sg).collect(),
        compiled,
        reused,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn synth(a: &SynthArgs, env: &Env) -> Result<(), CliError> {
    let compiled = compile_file(&a.spec, a.scenario.as_deref())?;
    let built = build(compiled, env.limits)?;
    let mut tables = Vec::with_capacity(built.factors.len());
    if let Some(h) = a.tables {
        for sg in &built.factors {
            let mut idx = TraceIndex::with_memory_limit(sg.clone(), env.memory_limit);
            idx.extend(h)?;
            tables.push(idx.tables().clone());
        }
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "scenario {}: {} factor(s), {} reused, input space {}",
        built.compiled.scenario,
        built.factors.len(),
        built.reused,
        built.input_space()
    )?;
    writeln!(out, "factor\tstates\tedges\tpruned_states\tpruned_edges\talphabet\tmembers")?;
    for (i, (sg, f)) in built.factors.iter().zip(&built.compiled.factors).enumerate() {
        writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}",
            sg.num_states(),
            sg.num_edges(),
            sg.pruned_states(),
            sg.pruned_edges(),
            sg.alphabet_size(),
            f.members.join(" & ")
        )?;
    }
    let format = |source| CliError::Format {
        path: a.output.clone(),
        source,
    };
    if built.factors.len() == 1 {
        save_sg(&a.output, &built.factors[0], tables.first()).map_err(format)?;
    } else {
        let saved: Vec<SavedFactor<'_>> = built
            .factors
            .iter()
            .zip(&built.compiled.factors)
            .enumerate()
            .map(|(i, (sg, f))| SavedFactor {
                sg: sg.as_ref(),
                tables: tables.get(i),
                members: f.members.clone(),
            })
            .collect();
        save_tuple(&a.output, &saved).map_err(format)?;
    }
    writeln!(out, "wrote {}", a.output.display())?;
    Ok(())
}

pub fn count(a: &CountArgs, env: &Env) -> Result<(), CliError> {
    let mut src = open_generator(&a.generator, env.memory_limit)?;
    src.prepare(a.horizon.max())?;
    let mut out = io::stdout().lock();
    writeln!(out, "horizon,nb_traces")?;
    for h in a.horizon.values() {
        writeln!(out, "{h},{}", src.count(h)?)?;
    }
    Ok(())
}

pub fn extract(a: &ExtractArgs, env: &Env) -> Result<(), CliError> {
    let mut src = open_generator(&a.generator, env.memory_limit)?;
    src.prepare(a.horizon)?;
    let p = src.unrank(&a.index, a.horizon)?;
    let mut w = RecordWriter::new(io::stdout().lock(), a.format, src.schema(), a.horizon)?;
    w.write(&a.index, &p)?;
    w.finish()
}

/// Unranks `(horizon, index)` pairs in parallel, writing them in order.
fn write_batches<W: Write>(
    src: &dyn TraceSource,
    items: &[(usize, BigUint)],
    w: &mut RecordWriter<W>,
) -> Result<(), CliError> {
    for chunk in items.chunks(BATCH) {
        let traces: Vec<TracePrefix> = chunk
            .par_iter()
            .map(|(h, i)| src.unrank(i, *h))
            .collect::<Result<_, _>>()?;
        for ((_, i), p) in chunk.iter().zip(&traces) {
            w.write(i, p)?;
        }
    }
    Ok(())
}

pub fn sample(a: &SampleArgs, env: &Env) -> Result<(), CliError> {
    let mut src = open_generator(&a.generator, env.memory_limit)?;
    let horizons = a.horizon.to_spec().map_err(CliError::Usage)?;
    let policy = SamplePolicy {
        horizons,
        seed: a.seed,
        with_replacement: !a.without_replacement,
    };
    let items = draw_indices(src.as_mut(), &policy, a.count)?;
    let mut w = RecordWriter::new(output(a.output.as_deref())?, a.format, src.schema(), a.horizon.max())?;
    write_batches(src.as_ref(), &items, &mut w)?;
    w.finish()
}

fn read_cursor(path: &Path) -> Result<Option<Cursor>, CliError> {
    match std::fs::read_to_string(path) {
        Ok(t) if t.trim().is_empty() => Ok(None),
        Ok(t) => Ok(Some(serde_json::from_str(&t)?)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(path, e)),
    }
}

pub fn enumerate(a: &EnumerateArgs, env: &Env) -> Result<(), CliError> {
    let mut src = open_generator(&a.generator, env.memory_limit)?;
    src.prepare(a.horizon)?;
    let src = src.as_ref();
    let resumed = match &a.cursor {
        Some(p) => read_cursor(p)?,
        None => None,
    };
    let mut e = match resumed {
        Some(c) => {
            if a.start.is_some() || a.end.is_some() || a.shard.is_some() {
                return Err(CliError::Usage(
                    "the cursor file already fixes the range; drop --start, --end and --shard".into(),
                ));
            }
            if c.horizon != a.horizon || c.seed != a.seed {
                return Err(CliError::Usage(format!(
                    "the cursor file was written for horizon {} and seed {}",
                    c.horizon, c.seed
                )));
            }
            RandomEnumeration::resume(src, &c)?
        }
        None => {
            let n = src.count(a.horizon)?;
            let (start, end) = match a.shard {
                Some((j, k)) => split_ranges(&n, k).swap_remove(j),
                None => (
                    a.start.clone().unwrap_or_else(BigUint::zero),
                    a.end.clone().unwrap_or(n),
                ),
            };
            RandomEnumeration::over_range(src, a.horizon, a.seed, start, end)?
        }
    };
    let mut w = RecordWriter::new(output(a.output.as_deref())?, a.format, src.schema(), a.horizon)?;
    let mut left = a.limit;
    loop {
        let take = left.map_or(BATCH, |l| l.min(BATCH as u64) as usize);
        let items: Vec<(usize, BigUint)> = (0..take)
            .map_while(|_| e.next_index())
            .map(|i| (a.horizon, i))
            .collect();
        if items.is_empty() {
            break;
        }
        write_batches(src, &items, &mut w)?;
        if let Some(l) = left.as_mut() {
            *l -= items.len() as u64;
        }
    }
    w.finish()?;
    if let Some(p) = &a.cursor {
        let json = serde_json::to_string_pretty(&e.cursor())?;
        std::fs::write(p, json + "\n").map_err(|err| CliError::io(p, err))?;
    }
    eprintln!("{} remaining", e.remaining());
    Ok(())
}

pub fn rank(a: &RankArgs, env: &Env) -> Result<(), CliError> {
    let mut src = open_generator(&a.generator, env.memory_limit)?;
    let reader: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(BufReader::new(File::open(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdin().lock()),
    };
    let mut records = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TraceRecord = serde_json::from_str(&line).map_err(|e| CliError::Record {
            line: k + 1,
            reason: e.to_string(),
        })?;
        let p = r.to_prefix(src.schema()).map_err(|reason| CliError::Record {
            line: k + 1,
            reason,
        })?;
        records.push(p);
    }
    src.prepare(records.iter().map(TracePrefix::len).max().unwrap_or(0))?;
    let mut out = io::stdout().lock();
    for p in &records {
        writeln!(out, "{}", src.rank(p)?)?;
    }
    Ok(())
}

fn selectivity(num: &BigUint, den: &BigUint) -> Option<f64> {
    (!den.is_zero()).then(|| ratio_to_f64(&Ratio::new(num.clone(), den.clone())))
}

pub fn stats(a: &StatsArgs, env: &Env) -> Result<(), CliError> {
    let hs = a.horizon.values();
    let hmax = a.horizon.max();
    let built = build(compile_file(&a.spec, a.scenario.as_deref())?, env.limits)?;
    let synth_err = |source: SynthError| CliError::Synth {
        factor: 0,
        members: built.compiled.scenario.clone(),
        source,
    };
    let unpruned = unpruned_counts(&built.compiled, &hs, env.limits).map_err(synth_err)?;
    let baseline: Vec<BigUint> = match &a.baseline {
        Some(name) => {
            let b = build(compile_file(&a.spec, Some(name))?, env.limits)?;
            let mut t = b.tuple();
            t.prepare(hmax)?;
            hs.iter().map(|&h| t.count(h)).collect::<Result<_, _>>()?
        }
        None => {
            let space = built.compiled.schema().input_space_size();
            hs.iter().map(|&h| space.pow(h as u32)).collect()
        }
    };
    let mut tuple = built.tuple();
    tuple.prepare(hmax)?;
    let mut w = csv::Writer::from_writer(output(a.output.as_deref())?);
    w.write_record([
        "horizon",
        "nb_traces",
        "extraction_us_nondeterministic",
        "constraint_selectivity",
        "sg_selectivity",
    ])?;
    for (k, &h) in hs.iter().enumerate() {
        let n = tuple.count(h)?;
        let secs = amortized_extraction(&built, h, a.extractions, a.seed)?;
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        w.write_record([
            h.to_string(),
            n.to_string(),
            format!("{:.3}", secs * 1e6),
            opt(selectivity(&n, &baseline[k])),
            opt(selectivity(&n, &unpruned[k])),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct WalkReport {
    horizon: usize,
    walks: usize,
    deadlocks: usize,
    deadlock_fraction: f64,
    mean_deadlock_step: Option<f64>,
    /// Generator prefixes over unpruned paths, as `num/den`.
    sg_selectivity_exact: String,
    sg_selectivity: f64,
}

pub fn walk(a: &WalkArgs, env: &Env) -> Result<(), CliError> {
    let compiled = compile_file(&a.spec, a.scenario.as_deref())?;
    let mut graphs = Vec::with_capacity(compiled.factors.len());
    let (mut num, mut den) = (BigUint::one(), BigUint::one());
    for (i, f) in compiled.factors.iter().enumerate() {
        let err = |source| CliError::Synth {
            factor: i,
            members: f.members.join(" & "),
            source,
        };
        let g = explore(f.monitor.as_ref(), env.limits).map_err(err)?;
        den *= count_paths(&g, a.horizon);
        num *= match scengen::sg::prune(&g, &compute_safe_set(&g)) {
            Ok(p) => count_paths(&p, a.horizon),
            Err(SynthError::NoTraces) => BigUint::zero(),
            Err(e) => return Err(err(e)),
        };
        graphs.push(g);
    }
    let refs: Vec<_> = graphs.iter().collect();
    let s = walk_stats(&refs, a.horizon, a.walks, a.seed);
    let exact = if den.is_zero() {
        Ratio::new_raw(BigUint::zero(), BigUint::one())
    } else {
        Ratio::new(num, den)
    };
    let report = WalkReport {
        horizon: a.horizon,
        walks: s.walks,
        deadlocks: s.deadlocks,
        deadlock_fraction: s.deadlock_fraction(),
        mean_deadlock_step: s.mean_deadlock_step,
        sg_selectivity_exact: format!("{}/{}", exact.numer(), exact.denom()),
        sg_selectivity: ratio_to_f64(&exact),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

pub fn grid(a: &GridArgs, env: &Env) -> Result<(), CliError> {
    let case: CaseStudy = a.case;
    let sgs = if a.sgs.is_empty() {
        case.sg_numbers()
    } else {
        a.sgs.clone()
    };
    let opts = GridOptions {
        extractions: a.extractions,
        seed: a.seed,
        limits: env.limits,
        parallel: true,
    };
    let rows = run_grid(case, &sgs, &a.horizon.values(), &opts)?;
    let mut w = csv::Writer::from_writer(output(a.output.as_deref())?);
    w.write_record(ExperimentRow::HEADER)?;
    for r in &rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Returns whether the file is free of errors.
pub fn check(a: &CheckArgs) -> Result<bool, CliError> {
    let mut clean = true;
    for path in &a.specs {
        let diags = check_text(&read_text(path)?);
        for d in &diags {
            eprintln!("{}:{d}", path.display());
        }
        if has_errors(&diags) {
            clean = false;
        } else {
            println!("{}: ok", path.display());
        }
    }
    Ok(clean)
}

pub fn print_diagnostics(path: &Path, diags: &[scengen::dsl::Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", path.display());
    }
}
