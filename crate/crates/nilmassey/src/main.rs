//! Command-line driver: randomized suites for the structural matrix lemmas,
//! scenario verification with JSON reports, deterministic generated suites,
//! and expansion of cyclic action shorthand into full tables.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nilmassey::action::{make_cyclic_action, ActionSpec};
use nilmassey::coeffs::Modulus;
use nilmassey::cohomology::{na_twist, x_power_cocycle};
use nilmassey::magnus::{check_context, GroupElt, SeriesDto};
use nilmassey::massey::phi_cocycle;
use nilmassey::scenario::{
    parse_file, random_group_element, random_scalar_cocycle, run_file, run_generated, Profile,
};
use nilmassey::unipotent::{bracket_entry, build_a, build_b, phi, UniCoset, UniMatrix};

#[derive(Parser)]
#[command(
    name = "nilmassey",
    version,
    about = "Massey products and lifting obstructions in free nilpotent coefficient groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized checks of the structural unipotent-matrix lemmas
    CheckLemmas(CheckLemmasArgs),
    /// Run every scenario in a JSON file and emit an obstruction report
    Verify(VerifyArgs),
    /// Generate a seeded scenario suite, run it, and emit the report
    RandomSuite(RandomSuiteArgs),
    /// Expand cyclic shorthand (d, c, gamma) into a full action table
    MakeAction(MakeActionArgs),
}

#[derive(Args)]
struct CheckLemmasArgs {
    /// Inclusive truncation range, e.g. "3..6", or a single value "4"
    #[arg(long, default_value = "3..6")]
    n: String,
    /// Comma-separated coefficient moduli; configurations with gcd(m, n!) > 1
    /// are skipped, and a modulus unusable for every n in range is rejected
    #[arg(long, default_value = "25,49,121")]
    m: String,
    /// Random draws per lemma and configuration
    #[arg(long, default_value_t = 500)]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario file to run
    #[arg(long)]
    scenarios: PathBuf,
    /// Report destination; "-" streams to standard output
    #[arg(long, default_value = "-")]
    out: String,
    /// Seed recorded in the report for replay bookkeeping
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RandomSuiteArgs {
    /// Number of scenarios to generate
    #[arg(long)]
    count: usize,
    /// Generator seed; the full report is a deterministic function of it
    #[arg(long)]
    seed: u64,
    /// Scenario family: "default" or "nontrivial-h2"
    #[arg(long, default_value = "default")]
    profile: String,
    /// Report destination; "-" streams to standard output
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct MakeActionArgs {
    /// Order of the acting cyclic group
    #[arg(long)]
    d: usize,
    /// Character value on the chosen generator; must satisfy c^d = 1 mod m
    #[arg(long)]
    c: u64,
    /// Truncation level of the coefficient group
    #[arg(long)]
    n: usize,
    /// Coefficient modulus
    #[arg(long)]
    m: u64,
    /// Conjugator written as a word in x, y (capitals are inverses),
    /// e.g. "xyXY" for the commutator [x, y]
    #[arg(long, default_value = "xyXY")]
    gamma_word: String,
    /// Conjugator as inline series JSON; overrides --gamma-word
    #[arg(long)]
    gamma_json: Option<String>,
    /// Destination; "-" streams to standard output
    #[arg(long, default_value = "-")]
    out: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CheckLemmas(args) => cmd_check_lemmas(args),
        Command::Verify(args) => cmd_verify(args),
        Command::RandomSuite(args) => cmd_random_suite(args),
        Command::MakeAction(args) => cmd_make_action(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_out(out: &str, text: &str) -> Result<(), String> {
    if out == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(out, text).map_err(|e| format!("{out}: {e}"))
    }
}

// ---------------------------------------------------------------------------
// check-lemmas

struct LemmaResult {
    name: &'static str,
    configs: usize,
    trials: u64,
    failure: Option<String>,
}

fn parse_range(text: &str) -> Result<(usize, usize), String> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid truncation range '{text}'"))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        Ok((parse_one(lo)?, parse_one(hi)?))
    } else {
        let v = parse_one(text)?;
        Ok((v, v))
    }
}

fn cmd_check_lemmas(args: CheckLemmasArgs) -> Result<ExitCode, String> {
    let (lo, hi) = parse_range(&args.n)?;
    if lo < 3 {
        return Err(format!(
            "truncation order must be at least 3, got {lo}; order-2 products need no defining system"
        ));
    }
    if hi < lo {
        return Err(format!("empty truncation range {lo}..{hi}"));
    }
    let mut moduli = Vec::new();
    for part in args.m.split(',') {
        let m: u64 = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid modulus '{}'", part.trim()))?;
        let md = Modulus::new(m).map_err(|e| e.to_string())?;
        // A modulus that fails for even the smallest n in range can never be
        // exercised; reject it up front instead of silently skipping it.
        check_context(lo, &md).map_err(|e| format!("--m {m}: {e}"))?;
        moduli.push(md);
    }

    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for n in lo..=hi {
        for md in &moduli {
            match check_context(n, md) {
                Ok(()) => pairs.push((n, md.clone())),
                Err(_) => skipped.push((n, md.get())),
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let results = vec![
        lemma_power_scaling(&pairs, args.trials, &mut rng),
        lemma_frame_structure(&pairs, args.trials, &mut rng),
        lemma_commutator_image(&pairs, args.trials, &mut rng),
        lemma_corner_bracket(&pairs, args.trials, &mut rng),
        lemma_entry_coboundary(&pairs, args.trials, &mut rng),
    ];

    let mut failed = 0usize;
    for r in &results {
        match &r.failure {
            None => println!(
                "PASS {:<28} {} trials x {} configs",
                r.name, r.trials, r.configs
            ),
            Some(w) => {
                failed += 1;
                println!("FAIL {:<28} {}", r.name, w);
            }
        }
    }
    if !skipped.is_empty() {
        let list: Vec<String> = skipped
            .iter()
            .map(|(n, m)| format!("(n={n}, m={m})"))
            .collect();
        println!(
            "note: skipped {} configurations where gcd(m, n!) > 1: {}",
            skipped.len(),
            list.join(" ")
        );
    }
    if failed == 0 {
        println!("all lemmas hold");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} lemma(s) failed");
        Ok(ExitCode::from(1))
    }
}

fn random_frame(n: usize, md: &Modulus, rng: &mut ChaCha8Rng) -> UniMatrix {
    let mut m = UniMatrix::identity(n, md.clone()).expect("validated dimension");
    for j in 2..=n + 1 {
        m.set_entry(1, j, rng.gen_range(0..md.get()));
    }
    for i in 2..=n {
        m.set_entry(i, n + 1, rng.gen_range(0..md.get()));
    }
    m
}

fn random_full(n: usize, md: &Modulus, rng: &mut ChaCha8Rng) -> UniMatrix {
    let mut m = UniMatrix::identity(n, md.clone()).expect("validated dimension");
    for i in 1..=n {
        for j in i + 1..=n + 1 {
            m.set_entry(i, j, rng.gen_range(0..md.get()));
        }
    }
    m
}

/// Entries of A^N and B^N scale as N^(j-i) times the parent entry.
fn lemma_power_scaling(pairs: &[(usize, Modulus)], trials: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    const NAME: &str = "power-entry-scaling";
    for (n, md) in pairs {
        let built = build_a(*n, md).and_then(|a| build_b(*n, md).map(|b| (a, b)));
        let (a, b) = match built {
            Ok(pair) => pair,
            Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={}: {e}", md.get())),
        };
        for trial in 0..trials {
            let power: u64 = rng.gen_range(1..=150);
            for (label, mat) in [("A", &a), ("B", &b)] {
                let mut acc = UniMatrix::identity(*n, md.clone()).expect("validated dimension");
                for _ in 0..power {
                    acc = acc.mul(mat);
                }
                for i in 1..=*n {
                    for j in i + 1..=*n + 1 {
                        let want = md.mul(md.pow(power, (j - i) as u64), mat.entry(i, j));
                        if acc.entry(i, j) != want {
                            return fail(
                                NAME,
                                pairs,
                                trials,
                                format!(
                                    "n={n} m={} trial {trial}: entry ({i},{j}) of {label}^{power} is {}, want {want}",
                                    md.get(),
                                    acc.entry(i, j)
                                ),
                            );
                        }
                    }
                }
            }
        }
    }
    pass(NAME, pairs, trials)
}

/// The first-row/last-column subgroup is normal in the corner quotient and
/// contains the image of B in its center.
fn lemma_frame_structure(pairs: &[(usize, Modulus)], trials: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    const NAME: &str = "frame-subgroup-structure";
    for (n, md) in pairs {
        let b = match build_b(*n, md) {
            Ok(b) => UniCoset::from_matrix(&b),
            Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={}: {e}", md.get())),
        };
        for trial in 0..trials {
            let f1 = UniCoset::from_matrix(&random_frame(*n, md, rng));
            let f2 = UniCoset::from_matrix(&random_frame(*n, md, rng));
            let u = UniCoset::from_matrix(&random_full(*n, md, rng));
            let ctx = |claim: &str, pos: Option<(usize, usize)>| {
                let at = pos
                    .map(|(i, j)| format!(" at entry ({i},{j})"))
                    .unwrap_or_default();
                format!("n={n} m={} trial {trial}: {claim}{at}", md.get())
            };
            let prod = f1.mul(&f2);
            if !prod.in_v() {
                return fail(NAME, pairs, trials, ctx("product left the subgroup", prod.first_entry_outside_v()));
            }
            let inv = f1.inv();
            if !inv.in_v() {
                return fail(NAME, pairs, trials, ctx("inverse left the subgroup", inv.first_entry_outside_v()));
            }
            let conj = u.mul(&f1).mul(&u.inv());
            if !conj.in_v() {
                return fail(NAME, pairs, trials, ctx("conjugate left the subgroup", conj.first_entry_outside_v()));
            }
            let comm = b.mul(&f1).mul(&b.inv()).mul(&f1.inv());
            if !comm.is_identity() {
                return fail(NAME, pairs, trials, ctx("B failed to centralize a subgroup element", None));
            }
        }
    }
    pass(NAME, pairs, trials)
}

/// Images of commutator-subgroup elements land in the first-row/last-column
/// subgroup of the corner quotient.
fn lemma_commutator_image(pairs: &[(usize, Modulus)], trials: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    const NAME: &str = "commutator-image-in-frame";
    for (n, md) in pairs {
        for trial in 0..trials {
            let w1 = random_group_element(*n, md, rng);
            let w2 = random_group_element(*n, md, rng);
            let w3 = random_group_element(*n, md, rng);
            let w4 = random_group_element(*n, md, rng);
            let gamma = w1.commutator(&w2).mul(&w3.commutator(&w4));
            let image = match phi(&gamma) {
                Ok(c) => c,
                Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={} trial {trial}: {e}", md.get())),
            };
            if !image.in_v() {
                let (i, j) = image.first_entry_outside_v().expect("support witness");
                return fail(
                    NAME,
                    pairs,
                    trials,
                    format!(
                        "n={n} m={} trial {trial}: image entry ({i},{j}) = {} outside the first row and last column",
                        md.get(),
                        image.rep().entry(i, j)
                    ),
                );
            }
        }
    }
    pass(NAME, pairs, trials)
}

/// For C with first-row/last-column coset support, [B, C] is supported on
/// the corner alone and its corner entry is a_{2,n+1}(C) - a_{1,n}(C).
fn lemma_corner_bracket(pairs: &[(usize, Modulus)], trials: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    const NAME: &str = "corner-bracket-formula";
    for (n, md) in pairs {
        let b = match build_b(*n, md) {
            Ok(b) => b,
            Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={}: {e}", md.get())),
        };
        let binv = b.inv();
        for trial in 0..trials {
            let c = random_frame(*n, md, rng);
            let bracket = b.mul(&c).mul(&binv).mul(&c.inv());
            for i in 1..=*n {
                for j in i + 1..=*n + 1 {
                    if (i, j) == (1, *n + 1) {
                        continue;
                    }
                    if bracket.entry(i, j) != 0 {
                        return fail(
                            NAME,
                            pairs,
                            trials,
                            format!(
                                "n={n} m={} trial {trial}: [B,C] entry ({i},{j}) = {}, expected 0 off the corner",
                                md.get(),
                                bracket.entry(i, j)
                            ),
                        );
                    }
                }
            }
            let want = md.sub(c.entry(2, *n + 1), c.entry(1, *n));
            let corner = bracket.entry(1, *n + 1);
            if corner != want {
                return fail(
                    NAME,
                    pairs,
                    trials,
                    format!(
                        "n={n} m={} trial {trial}: corner of [B,C] is {corner}, want a_(2,n+1) - a_(1,n) = {want}",
                        md.get()
                    ),
                );
            }
            match bracket_entry(&c) {
                Ok(r) if r.value == want => {}
                Ok(r) => {
                    return fail(
                        NAME,
                        pairs,
                        trials,
                        format!(
                            "n={n} m={} trial {trial}: helper reported corner {}, direct product gives {want}",
                            md.get(),
                            r.value
                        ),
                    )
                }
                Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={} trial {trial}: {e}", md.get())),
            }
        }
    }
    pass(NAME, pairs, trials)
}

/// Coboundaries of entry functions of a twisted cocycle expand as minus the
/// weighted convolution of the flanking entries.
fn lemma_entry_coboundary(pairs: &[(usize, Modulus)], trials: u64, rng: &mut ChaCha8Rng) -> LemmaResult {
    const NAME: &str = "entry-coboundary-expansion";
    for (n, md) in pairs {
        let x = GroupElt::gen_x(*n, md.clone()).expect("context checked");
        let y = GroupElt::gen_y(*n, md.clone()).expect("context checked");
        let spec = match make_cyclic_action(2, md.get() - 1, &x.commutator(&y), *n, md.clone()) {
            Ok(s) => s,
            Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={}: {e}", md.get())),
        };
        let order = spec.group().order();
        for trial in 0..trials {
            let theta = (|| {
                let t = random_scalar_cocycle(&spec, rng);
                let q0 = x_power_cocycle(&spec, &t, *n)?;
                let beta = random_group_element(*n, md, rng);
                let q = na_twist(&spec, &q0, &beta)?;
                phi_cocycle(&spec, &q)
            })();
            let theta = match theta {
                Ok(t) => t,
                Err(e) => return fail(NAME, pairs, trials, format!("n={n} m={} trial {trial}: {e}", md.get())),
            };
            let entry = |g: usize, i: usize, j: usize| theta[g].rep().entry(i, j);
            for g in 0..order {
                let cg = spec.chi().eval(g);
                for h in 0..order {
                    let gh = spec.group().mul(g, h);
                    for i in 1..=*n {
                        for j in i + 1..=*n + 1 {
                            if (i, j) == (1, *n + 1) {
                                continue;
                            }
                            let weighted = md.mul(md.pow(cg, (j - i) as u64), entry(h, i, j));
                            let lhs = md.add(md.sub(weighted, entry(gh, i, j)), entry(g, i, j));
                            let mut conv = 0u64;
                            for r in i + 1..j {
                                let term = md.mul(
                                    entry(g, i, r),
                                    md.mul(md.pow(cg, (j - r) as u64), entry(h, r, j)),
                                );
                                conv = md.add(conv, term);
                            }
                            if lhs != md.neg(conv) {
                                return fail(
                                    NAME,
                                    pairs,
                                    trials,
                                    format!(
                                        "n={n} m={} trial {trial}: entry ({i},{j}) at group pair ({g},{h}): coboundary {lhs}, convolution {}",
                                        md.get(),
                                        md.neg(conv)
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    pass(NAME, pairs, trials)
}

fn pass(name: &'static str, pairs: &[(usize, Modulus)], trials: u64) -> LemmaResult {
    LemmaResult {
        name,
        configs: pairs.len(),
        trials,
        failure: None,
    }
}

fn fail(name: &'static str, pairs: &[(usize, Modulus)], trials: u64, witness: String) -> LemmaResult {
    LemmaResult {
        name,
        configs: pairs.len(),
        trials,
        failure: Some(witness),
    }
}

// ---------------------------------------------------------------------------
// verify / random-suite

fn report_exit(report: &nilmassey::scenario::ReportFile) -> ExitCode {
    let ok = report
        .results
        .iter()
        .all(|r| r.theorem_holds && r.cochain_identity_holds && r.failures.is_empty());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let text = fs::read_to_string(&args.scenarios)
        .map_err(|e| format!("{}: {e}", args.scenarios.display()))?;
    let file = parse_file(&text).map_err(|e| e.to_string())?;
    let report = run_file(&file, args.seed).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write_out(&args.out, &format!("{json}\n"))?;
    Ok(report_exit(&report))
}

fn cmd_random_suite(args: RandomSuiteArgs) -> Result<ExitCode, String> {
    let profile = Profile::parse(&args.profile).map_err(|e| e.to_string())?;
    let report = run_generated(args.count, args.seed, profile).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write_out(&args.out, &format!("{json}\n"))?;
    Ok(report_exit(&report))
}

// ---------------------------------------------------------------------------
// make-action

fn gamma_from_word(word: &str, n: usize, md: &Modulus) -> Result<GroupElt, String> {
    let x = GroupElt::gen_x(n, md.clone()).map_err(|e| e.to_string())?;
    let y = GroupElt::gen_y(n, md.clone()).map_err(|e| e.to_string())?;
    let mut out = GroupElt::one(n, md.clone());
    for ch in word.chars() {
        let factor = match ch {
            'x' => x.clone(),
            'y' => y.clone(),
            'X' => x.inv(),
            'Y' => y.inv(),
            other => return Err(format!("invalid letter '{other}' in conjugator word (use x, y, X, Y)")),
        };
        out = out.mul(&factor);
    }
    Ok(out)
}

fn cmd_make_action(args: MakeActionArgs) -> Result<ExitCode, String> {
    let md = Modulus::new(args.m).map_err(|e| e.to_string())?;
    check_context(args.n, &md).map_err(|e| e.to_string())?;
    let gamma = match &args.gamma_json {
        Some(json) => {
            let dto: SeriesDto = serde_json::from_str(json).map_err(|e| format!("--gamma-json: {e}"))?;
            GroupElt::from_json(&dto).map_err(|e| e.to_string())?
        }
        None => gamma_from_word(&args.gamma_word, args.n, &md)?,
    };
    let spec: ActionSpec =
        make_cyclic_action(args.d, args.c, &gamma, args.n, md).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&spec.to_json()).map_err(|e| e.to_string())?;
    write_out(&args.out, &format!("{json}\n"))?;
    Ok(ExitCode::SUCCESS)
}
