//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use clap::Parser;
use common::{closure, event_masks, mask, masks, minimal, Model};
use stopsigma::cli::{run, Cli};
use stopsigma::fixtures::{fig1, FIG1_JSON};
use stopsigma::generate::InstanceRng;
use stopsigma::instance::{
    parse_instance, serialize_instance, to_rational, Instance, ParseOptions,
};
use stopsigma::render::{render_ascii, render_dot};
use stopsigma::stopped::{stopped_layers, verify_theorem1_with};
use stopsigma::{
    atoms_of, gen_instance, gen_non_stopping_time, generate_sigma, is_adapted, is_stopping_time,
    sigma_of_tau, stopped_atoms, stopped_sigma_bruteforce, stopping_process, verify_prop3,
    verify_structure, BlockRule, EnumerationBound, Filtration, GenConfig, Partition, Rational,
    StoppingTime,
};

const INSTANCES: u64 = 1000;
const BOUND: EnumerationBound = EnumerationBound::DEFAULT;

type Outcome = Result<String, String>;

struct Generated {
    f: Filtration<Rational>,
    tau: StoppingTime<Rational>,
    model: Model,
}

fn corpus() -> Vec<Generated> {
    let base = GenConfig::default();
    (0..INSTANCES)
        .map(|i| {
            let (f, tau) = gen_instance::<Rational>(&base.for_iteration(i)).expect("generator");
            let model = Model::new(&f, &tau);
            Generated { f, tau, model }
        })
        .collect()
}

fn labelled(f: &Filtration<i64>, blocks: &[&[&str]]) -> BTreeSet<u32> {
    blocks
        .iter()
        .map(|b| mask(&f.space().event(b.iter().copied()).expect("known labels")))
        .collect()
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn cli_stdout(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(args).expect("arguments parse");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(cli, &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (f, tau) = fig1();
    let result = stopped_atoms(&tau, &f).map_err(|e| e.to_string())?;
    let expected = labelled(
        &f,
        &[
            &["w1", "w2"],
            &["w3"],
            &["w4"],
            &["w5", "w6"],
            &["w7"],
            &["w8"],
        ],
    );
    ensure(masks(&result.atoms) == expected, || {
        format!("A_tau = {}", f.space().show_partition(&result.atoms))
    })?;

    let sigma_tau = sigma_of_tau(&tau, &f).map_err(|e| e.to_string())?;
    let expected = labelled(
        &f,
        &[&["w1", "w2"], &["w5", "w6"], &["w3", "w4", "w7", "w8"]],
    );
    ensure(masks(&sigma_tau) == expected, || {
        format!("A(sigma(tau)) = {}", f.space().show_partition(&sigma_tau))
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("fig1.json");
    std::fs::write(&path, FIG1_JSON).map_err(|e| e.to_string())?;
    let path = path.to_str().expect("utf-8 path");
    let (code, out) = cli_stdout(&["stopsigma", "atoms", path, "--time", "1"]);
    ensure(
        code == 0 && out == "{{w1,w2},{w3,w4},{w5,w6,w7,w8}}\n",
        || format!("atoms --time 1 gave exit {code}, {out:?}"),
    )?;
    let (code, out) = cli_stdout(&["stopsigma", "atoms", path, "--stopped"]);
    ensure(
        code == 0 && out == "{{w1,w2},{w3},{w4},{w5,w6},{w7},{w8}}\n",
        || format!("atoms --stopped gave exit {code}, {out:?}"),
    )?;

    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "fig1 atoms of F_1, F_tau and sigma(tau) exact ({elapsed:.2?})"
    ))
}

fn criterion_2(corpus: &[Generated]) -> Outcome {
    let start = Instant::now();
    for (i, g) in corpus.iter().enumerate() {
        let result = stopped_atoms(&g.tau, &g.f).map_err(|e| format!("instance {i}: {e}"))?;
        let bruteforce = stopped_sigma_bruteforce(&g.tau, &g.f, BOUND)
            .map_err(|e| format!("instance {i}: {e}"))?;
        let generated = generate_sigma(&result.atoms, BOUND).map_err(|e| e.to_string())?;
        ensure(generated == bruteforce, || {
            format!("instance {i}: sigma(A_tau) differs from F_tau")
        })?;
        let atoms = atoms_of(&bruteforce).map_err(|e| e.to_string())?;
        ensure(atoms == result.atoms, || {
            format!("instance {i}: atoms of F_tau differ from A_tau")
        })?;
        ensure(event_masks(bruteforce.events()) == g.model.f_tau(), || {
            format!("instance {i}: brute-force F_tau disagrees with the reference model")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{} instances, 0 failures ({elapsed:.2?})",
        corpus.len()
    ))
}

fn criterion_3(corpus: &[Generated]) -> Outcome {
    for (i, g) in corpus.iter().enumerate() {
        let result = stopped_atoms(&g.tau, &g.f).map_err(|e| e.to_string())?;
        let f_tau = g.model.f_tau();
        for a in masks(&result.atoms) {
            ensure(f_tau.contains(&a), || {
                format!("instance {i}: atom {a:#b} not in F_tau")
            })?;
            let smaller = f_tau.iter().find(|&&b| b != 0 && b != a && b & a == b);
            ensure(smaller.is_none(), || {
                format!("instance {i}: atom {a:#b} contains {:#b}", smaller.unwrap())
            })?;
        }
        ensure(masks(&result.atoms) == minimal(&f_tau), || {
            format!("instance {i}: A_tau is not the set of minimal elements")
        })?;
    }
    Ok(format!(
        "{} instances, every atom minimal in F_tau",
        corpus.len()
    ))
}

fn criterion_4(corpus: &[Generated]) -> Outcome {
    let mut strict = 0;
    for (i, g) in corpus.iter().enumerate() {
        let report = verify_prop3(&g.tau, &g.f, BOUND).map_err(|e| e.to_string())?;
        ensure(report.included, || {
            format!("instance {i}: sigma(tau) not inside F_tau")
        })?;
        ensure(g.model.sigma_tau().is_subset(&g.model.f_tau()), || {
            format!("instance {i}: reference sigma(tau) not inside F_tau")
        })?;
        strict += usize::from(report.strict);
    }

    let (f, tau) = fig1();
    let model = Model::new(&f, &tau);
    let sigma_tau = model.sigma_tau();
    let f_tau = model.f_tau();
    ensure(sigma_tau.len() == 8 && f_tau.len() == 64, || {
        format!(
            "fig1 reference sizes {} and {}",
            sigma_tau.len(),
            f_tau.len()
        )
    })?;
    let report = verify_prop3(&tau, &f, BOUND).map_err(|e| e.to_string())?;
    ensure(
        report.strict && report.sigma_tau_events == 8 && report.stopped_events == 64,
        || format!("fig1 report {report:?}"),
    )?;
    Ok(format!(
        "inclusion on {} instances ({strict} strict); fig1 8 vs 64 events",
        corpus.len()
    ))
}

fn criterion_5(corpus: &[Generated]) -> Outcome {
    for (i, g) in corpus.iter().enumerate() {
        let result = stopped_atoms(&g.tau, &g.f).map_err(|e| e.to_string())?;
        let report = verify_structure(&result.per_time, &g.tau, g.f.len());
        ensure(report.passed(), || format!("instance {i}:\n{report}"))?;
        for (k, layer) in result.per_time.iter().enumerate() {
            ensure(mask(&layer.union(g.f.len())) == g.model.equal_to(k), || {
                format!(
                    "instance {i}: layer {} does not cover {{tau = t}}",
                    layer.time
                )
            })?;
        }
    }
    Ok(format!(
        "{} instances, layers disjoint and covering",
        corpus.len()
    ))
}

fn criterion_6(corpus: &[Generated]) -> Outcome {
    let mut disagreements = Vec::new();
    for (i, g) in corpus.iter().enumerate() {
        let stopping = is_stopping_time(&g.tau, &g.f)
            .map_err(|e| e.to_string())?
            .is_valid();
        let adapted = is_adapted(
            &stopping_process(&g.tau, &g.f).map_err(|e| e.to_string())?,
            &g.f,
        )
        .map_err(|e| e.to_string())?;
        if !(stopping && adapted && g.model.is_stopping() && g.model.process_adapted()) {
            disagreements.push(format!("valid {i}"));
        }
    }

    let base = GenConfig::default();
    let mut perturbed = 0;
    let mut iteration = 0;
    while perturbed < 200 && iteration < 10 * INSTANCES {
        let config = base.for_iteration(iteration);
        iteration += 1;
        let f = stopsigma::gen_filtration::<Rational>(&config).map_err(|e| e.to_string())?;
        let Some(tau) = gen_non_stopping_time(&config, &f).map_err(|e| e.to_string())? else {
            continue;
        };
        perturbed += 1;
        let model = Model::new(&f, &tau);
        let stopping = is_stopping_time(&tau, &f)
            .map_err(|e| e.to_string())?
            .is_valid();
        let adapted = is_adapted(&stopping_process(&tau, &f).map_err(|e| e.to_string())?, &f)
            .map_err(|e| e.to_string())?;
        if stopping || adapted || model.is_stopping() || model.process_adapted() {
            disagreements.push(format!("perturbed {iteration}"));
        }
    }
    ensure(perturbed >= 100, || {
        format!("only {perturbed} perturbed instances")
    })?;
    ensure(disagreements.is_empty(), || {
        format!("disagreements: {disagreements:?}")
    })?;

    let (f, tau) = fig1();
    let process = stopping_process(&tau, &f).map_err(|e| e.to_string())?;
    let w3 = f.space().index_of("w3").expect("w3");
    let w5 = f.space().index_of("w5").expect("w5");
    ensure(
        process.path(w5) == [1, 1, 0, 0] && process.path(w3) == [1, 1, 1, 0],
        || format!("paths w5 {:?}, w3 {:?}", process.path(w5), process.path(w3)),
    )?;
    Ok(format!(
        "{} valid and {perturbed} perturbed instances agree; fig1 paths match",
        corpus.len()
    ))
}

fn random_partition(rng: &mut InstanceRng) -> Partition {
    let n = 1 + rng.below(12);
    let k = 1 + rng.below(n);
    let labels: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
    Partition::from_labels(&labels).expect("labels form a partition")
}

fn criterion_7(corpus: &[Generated]) -> Outcome {
    let mut rng = InstanceRng::new(7);
    for i in 0..500 {
        let p = random_partition(&mut rng);
        let sigma = generate_sigma(&p, BOUND).map_err(|e| e.to_string())?;
        let back = atoms_of(&sigma).map_err(|e| e.to_string())?;
        ensure(back == p, || {
            format!("partition {i}: {p:?} came back as {back:?}")
        })?;
        let reference = closure(p.universe(), &masks(&p).into_iter().collect::<Vec<_>>());
        ensure(event_masks(sigma.events()) == reference, || {
            format!("partition {i}: generated sigma-algebra differs from the closure")
        })?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = GenConfig::default();
    for i in 0..100u64 {
        let config = base.for_iteration(5000 + i);
        let (filtration, tau) = gen_instance::<Rational>(&config).map_err(|e| e.to_string())?;
        let instance = Instance {
            filtration,
            tau: Some(tau),
            generator: Some(stopsigma::instance::GeneratorInfo::new(config)),
        };
        let text = serialize_instance(&instance).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("instance-{i}.json"));
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        let read = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let parsed =
            parse_instance(&read, ParseOptions { strict: true }).map_err(|e| e.to_string())?;
        ensure(parsed.instance == instance, || {
            format!("instance file {i} changed on reparse")
        })?;
        ensure(
            serialize_instance(&parsed.instance).map_err(|e| e.to_string())? == text,
            || format!("instance file {i} serializes differently"),
        )?;
    }

    let (f, tau) = fig1();
    let (rf, rtau) = to_rational(&f, Some(&tau)).map_err(|e| e.to_string())?;
    for g in corpus.iter().take(100) {
        ensure(
            render_ascii(&g.f, Some(&g.tau)) == render_ascii(&g.f, Some(&g.tau)),
            || "ascii render differs between runs".into(),
        )?;
        ensure(
            render_dot(&g.f, Some(&g.tau)) == render_dot(&g.f, Some(&g.tau)),
            || "dot render differs between runs".into(),
        )?;
    }
    let rtau = rtau.expect("fig1 has tau");
    ensure(
        render_ascii(&rf, Some(&rtau)) == render_ascii(&f, Some(&tau)),
        || "fig1 render depends on the time type".into(),
    )?;
    Ok("500 partitions, 100 instance files, 101 instances render identically twice".into())
}

fn harness_self_check(corpus: &[Generated]) -> Outcome {
    let mut caught = 0;
    let mut intersecting = 0;
    for g in corpus {
        let cumulative = verify_theorem1_with(&g.tau, &g.f, BOUND, BlockRule::Cumulative)
            .map_err(|e| e.to_string())?;
        let layers =
            stopped_layers(&g.tau, &g.f, BlockRule::Cumulative).map_err(|e| e.to_string())?;
        let structure = verify_structure(&layers, &g.tau, g.f.len());
        if !cumulative.passed() || !structure.passed() {
            caught += 1;
        }
        let report = verify_theorem1_with(&g.tau, &g.f, BOUND, BlockRule::Intersecting)
            .map_err(|e| e.to_string())?;
        intersecting += usize::from(!report.passed());
    }
    ensure(caught > 0, || "the cumulative mutant went unnoticed".into())?;
    Ok(format!(
        "cumulative mutant caught on {caught} instances; intersecting rule failed on {intersecting}"
    ))
}

fn coverage(corpus: &[Generated]) -> String {
    let mut infinity = 0;
    let mut single = 0;
    let mut sizes = [0usize; 2];
    for g in corpus {
        let result = stopped_atoms(&g.tau, &g.f).expect("valid instance");
        let nonempty: Vec<_> = result
            .per_time
            .iter()
            .filter(|l| !l.blocks.is_empty())
            .collect();
        infinity += usize::from(nonempty.iter().any(|l| l.time.is_infinite()));
        single += usize::from(nonempty.len() == 1);
        sizes[0] = sizes[0].max(g.f.len());
        sizes[1] = sizes[1].max(g.f.axis().len());
    }
    format!(
        "coverage: {infinity} instances with a nonempty infinity layer, {single} stopped at a single time, \
         up to {} outcomes and {} times",
        sizes[0], sizes[1]
    )
}

fn main() {
    let start = Instant::now();
    let corpus = corpus();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 fig1 golden values", criterion_1()),
        ("2 constructive vs brute-force F_tau", criterion_2(&corpus)),
        ("3 minimality of A_tau", criterion_3(&corpus)),
        ("4 sigma(tau) inside F_tau", criterion_4(&corpus)),
        ("5 layer structure", criterion_5(&corpus)),
        ("6 stopping time vs adapted X^tau", criterion_6(&corpus)),
        ("7 roundtrips and stable rendering", criterion_7(&corpus)),
        ("harness mutant detection", harness_self_check(&corpus)),
    ];

    let mut failed = 0;
    for (name, outcome) in &criteria {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{}", coverage(&corpus));
    println!(
        "{} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
