//! Acceptance run: eleven criteria, one PASS/FAIL line each.
//!
//! Built with `harness = false` so the report prints on every run, not only
//! on failure. The process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specgraph::category::{
    amalgamate, cofinality_probe, factor_by_type, fraisse_check, fraisse_prefix, intertwine, lax_fraisse_check,
    random_morphism_onto, random_object, CategoryName, CategorySpec,
};
use specgraph::clique::{clique_map, membership};
use specgraph::fan::{classify_fan_limit, fan_check, FanLimitKind, FanProperty};
use specgraph::generators::{generate, GeneratorName};
use specgraph::poset::spectrum_report;
use specgraph::sample::{random_cover, random_cosurjective, random_graph, random_monotone_path_sequence, CoverOptions};
use specgraph::sequence::ModificationOutcome;
use specgraph::{enumerate_morphisms, Graph, Guarantee, MorphProperty, Morphism, SearchOptions, Sequence, Verdict, Witness};

use MorphProperty::*;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("edge-splitting law", edge_splitting_law),
        ("ideal closure", ideal_closure),
        ("clique functor laws", clique_functor_laws),
        ("monotone iff edge-reflective on paths", monotone_iff_edge_reflective),
        ("type factorization matches search", type_factorization),
        ("amalgamation squares", amalgamation),
        ("Fraisse builders certify", builders),
        ("negative controls", negative_controls),
        ("spectrum reports", spectrum_reports),
        ("co-bijective modification of path sequences", modification),
        ("intertwining ladders", intertwining),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn graph_strategy(max: usize) -> impl Strategy<Value = Graph> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        edges.push((a, b));
                    }
                    k += 1;
                }
            }
            Graph::with_indices(n, &edges).unwrap()
        })
    })
}

fn edge_splitting_law() -> Result<String, String> {
    let config = Config {
        cases: 200,
        failure_persistence: None,
        rng_algorithm: RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let wanted = [CoBijective, Monotone, EdgeWitnessing, StarRefining];
    runner
        .run(&graph_strategy(8), |g| {
            let m = Morphism::edge_split(&Arc::new(g));
            for p in wanted {
                prop_assert!(m.check(p), "{p} fails on {:?}", m.cod().edges());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("200 random graphs, all four properties hold".into())
}

/// A morphism onto `target` in the ambient class, satisfying `extra` too.
fn sample_in(rng: &mut ChaCha8Rng, target: &Arc<Graph>, ambient: MorphProperty, extra: Option<MorphProperty>) -> Option<Morphism> {
    let edges = target.edge_count();
    for attempt in 0..2000 {
        let m = match (ambient, attempt % 3) {
            (CoSurjective, 0) => random_cosurjective(rng, target, 6),
            _ => {
                let copies = if matches!(extra, Some(AntiInjective | StrictlyAntiInjective)) { (2, 3) } else { (1, 2) };
                let opts = CoverOptions {
                    copies,
                    extra: rng.gen_range(0..=2 * edges + 1),
                    edge_p: rng.gen_range(0.1..0.9),
                    overlapping_only: rng.gen_bool(0.5),
                    witness_edges: matches!(ambient, EdgeSurjective) || rng.gen_bool(0.3),
                };
                random_cover(rng, target, &opts)
            }
        };
        if m.check(ambient) && extra.is_none_or(|p| m.check(p)) {
            return Some(m);
        }
    }
    None
}

fn ideal_closure() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // (ideal, the class it is an ideal in, extra requirement on members)
    let cases = [
        (AntiInjective, CoInjective),
        (StrictlyAntiInjective, CoInjective),
        (StarRefining, CoSurjective),
        (EdgeWitnessing, EdgeSurjective),
    ];
    let mut pairs = 0;
    for k in 0..500 {
        let (ideal, ambient) = cases[k % cases.len()];
        let n = rng.gen_range(1..=4);
        let g = Arc::new(random_graph(&mut rng, n, 0.5));
        // post ∘ member and member ∘ pre, with member ∈ ideal.
        let post = sample_in(&mut rng, &g, ambient, None).ok_or("no ambient sample")?;
        let member = sample_in(&mut rng, post.dom(), ambient, Some(ideal)).ok_or_else(|| format!("no {ideal} sample"))?;
        let pre = sample_in(&mut rng, member.dom(), ambient, None).ok_or("no ambient sample")?;
        let left = Morphism::compose(&post, &member).map_err(|e| e.to_string())?;
        let right = Morphism::compose(&member, &pre).map_err(|e| e.to_string())?;
        ensure!(left.check(ideal), "{ideal} lost after post-composition (pair {k})");
        ensure!(right.check(ideal), "{ideal} lost after pre-composition (pair {k})");
        pairs += 1;
    }
    Ok(format!("{pairs} triples, both compositions stay in the ideal"))
}

fn clique_functor_laws() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(1..=5);
        let g = Arc::new(random_graph(&mut rng, n, 0.5));
        let m1 = random_cosurjective(&mut rng, &g, 5);
        let m2 = random_cosurjective(&mut rng, m1.dom(), 5);
        if m1.dom().len() > 5 || m2.dom().len() > 5 {
            continue;
        }
        let whole = clique_map(&Morphism::compose(&m1, &m2).unwrap()).map_err(|e| e.to_string())?;
        let parts = Morphism::compose(&clique_map(&m1).unwrap(), &clique_map(&m2).unwrap()).unwrap();
        ensure!(whole == parts, "functoriality fails on pair {done}");
        for m in [&m1, &m2] {
            let lhs = Morphism::compose(m, &membership(m.dom()).unwrap()).unwrap();
            let rhs = Morphism::compose(&membership(m.cod()).unwrap(), &clique_map(m).unwrap()).unwrap();
            ensure!(lhs.pairs() == rhs.pairs() && lhs == rhs, "naturality fails on pair {done}");
        }
        done += 1;
    }
    Ok("200 composable pairs, functoriality and naturality exact".into())
}

fn monotone_iff_edge_reflective() -> Result<String, String> {
    // Brute force over images: each domain vertex gets nothing or a clique of
    // the codomain path; edge-preservation is left to the constructor.
    let mut instances = 0;
    for cod_len in 1..=3 {
        let cod = Arc::new(Graph::path(cod_len));
        let mut options: Vec<Vec<usize>> = vec![vec![]];
        options.extend((0..cod_len).map(|i| vec![i]));
        options.extend((0..cod_len.saturating_sub(1)).map(|i| vec![i, i + 1]));
        for dom_len in 1..=5 {
            let dom = Arc::new(Graph::path(dom_len));
            let mut choice = vec![0usize; dom_len];
            let mut by_search = 0;
            let mut by_brute = 0;
            loop {
                let pairs = choice.iter().enumerate().flat_map(|(g, &c)| options[c].iter().map(move |&h| (h, g)));
                if let Ok(m) = Morphism::new(dom.clone(), cod.clone(), pairs) {
                    if m.check(CoBijective) {
                        by_brute += 1;
                        ensure!(
                            m.check(Monotone) == m.check(EdgeReflective),
                            "disagreement on {:?}",
                            m.pairs()
                        );
                    }
                }
                // Odometer over image choices.
                let mut i = 0;
                while i < dom_len {
                    choice[i] += 1;
                    if choice[i] < options.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == dom_len {
                    break;
                }
            }
            by_search += enumerate_morphisms(&dom, &cod, &[CoBijective], &SearchOptions::default())
                .map_err(|e| e.to_string())?
                .len();
            ensure!(by_search == by_brute, "search finds {by_search}, brute force {by_brute} ({dom_len} onto {cod_len})");
            instances += by_brute;
        }
    }
    Ok(format!("{instances} co-bijective relations, checks agree on all"))
}

fn a_morphisms(dom: &Arc<Graph>, cod: &Arc<Graph>) -> Vec<Morphism> {
    let a = CategorySpec::get(CategoryName::A);
    let opts = SearchOptions {
        accept: Some(Arc::new(move |m: &Morphism| a.contains_morphism(m))),
        ..SearchOptions::default()
    };
    enumerate_morphisms(dom, cod, &CategorySpec::get(CategoryName::A).search_properties(), &opts).unwrap()
}

fn type_factorization() -> Result<String, String> {
    let paths: Vec<Arc<Graph>> = (0..=5).map(|n| Arc::new(Graph::path(n.max(1)))).collect();
    let mut between: HashMap<(usize, usize), Vec<Morphism>> = HashMap::new();
    for p in 1..=5 {
        for q in 1..=5 {
            between.insert((p, q), a_morphisms(&paths[p], &paths[q]));
        }
    }
    let (mut cospans, mut factoring) = (0, 0);
    for r in 1..=3 {
        let onto_r: Vec<&Morphism> = (1..=5).flat_map(|p| between[&(p, r)].iter()).collect();
        for big in &onto_r {
            for small in &onto_r {
                cospans += 1;
                let ours = factor_by_type(big, small).map_err(|e| e.to_string())?;
                let brute = between[&(small.dom().len(), big.dom().len())]
                    .iter()
                    .any(|phi| Morphism::compose(big, phi).is_ok_and(|c| c == **small));
                ensure!(ours.is_some() == brute, "disagreement: ours {}, search {brute}", ours.is_some());
                if let Some(phi) = ours {
                    factoring += 1;
                    ensure!(Morphism::compose(big, &phi).is_ok_and(|c| c == **small), "returned factor does not compose");
                    ensure!(
                        CategorySpec::get(CategoryName::A).contains_morphism(&phi),
                        "returned factor outside the category"
                    );
                }
            }
        }
    }
    Ok(format!("{cospans} cospans, {factoring} factor, all agree with search"))
}

fn amalgamation() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sizes = Vec::new();
    for cat in [CategoryName::D, CategoryName::A, CategoryName::X, CategoryName::L] {
        let spec = CategorySpec::get(cat);
        let mut largest = 0;
        for k in 0..100 {
            let g = random_object(cat, &mut rng);
            let f = random_morphism_onto(cat, &g, &mut rng, 2).map_err(|e| e.to_string())?;
            let h = random_morphism_onto(cat, &g, &mut rng, 2).map_err(|e| e.to_string())?;
            let am = amalgamate(&spec, &f, &h).map_err(|e| format!("{cat} cospan {k}: {e}"))?;
            let top = Morphism::compose(&f, &am.left).unwrap();
            let bottom = Morphism::compose(&h, &am.right).unwrap();
            ensure!(top == bottom, "{cat} cospan {k}: square does not commute");
            ensure!(spec.contains_object(&am.apex), "{cat} cospan {k}: apex outside the category");
            ensure!(
                spec.contains_morphism(&am.left) && spec.contains_morphism(&am.right),
                "{cat} cospan {k}: leg outside the category"
            );
            largest = largest.max(am.apex.len());
        }
        sizes.push(format!("{cat} max apex {largest}"));
    }
    Ok(format!("100 cospans each; {}", sizes.join(", ")))
}

fn builders() -> Result<String, String> {
    let mut notes = Vec::new();
    for (cat, steps) in [(CategoryName::D, 8), (CategoryName::A, 6), (CategoryName::X, 5), (CategoryName::L, 5)] {
        let spec = CategorySpec::get(cat);
        let built = fraisse_prefix(&spec, steps, 0, 2).map_err(|e| format!("{cat}: {e}"))?;
        let s = &built.sequence;
        ensure!(s.last() == steps, "{cat}: {} levels", s.last());
        ensure!(built.log.iter().all(|r| r.verified), "{cat}: unverified absorption");
        for (k, rec) in built.log.iter().enumerate() {
            let c = s.composite(rec.level, rec.resolved_at).unwrap();
            ensure!(
                Morphism::compose(&built.requests[k], &built.factors[k]).is_ok_and(|x| x == *c),
                "{cat}: request {k} is not factored"
            );
        }
        let lax = lax_fraisse_check(&spec, s, steps).map_err(|e| e.to_string())?;
        ensure!(lax.holds() && lax.witness().is_some(), "{cat} lax check: {}", lax.label());
        if cat == CategoryName::D {
            let strict = fraisse_check(&spec, s, steps).map_err(|e| e.to_string())?;
            ensure!(strict.holds(), "D strict check: {}", strict.label());
        }
        notes.push(format!("{cat}{steps} top level {}", s.graph(steps).len()));
    }
    Ok(notes.join(", "))
}

/// A vertex whose strict preimage under `m` has at most one element.
fn thin_vertex(m: &Morphism) -> Option<usize> {
    (0..m.cod().len()).find(|&h| (0..m.dom().len()).filter(|&g| m.image_of(g).ones().eq([h])).count() <= 1)
}

fn negative_controls() -> Result<String, String> {
    let x = CategorySpec::get(CategoryName::X);
    let nasty = generate(GeneratorName::NastyFan, 5, &BTreeMap::new()).map_err(|e| e.to_string())?;
    for lens in [[2, 2, 2], [3, 3, 3]] {
        let target = Arc::new(Graph::fan(&lens));
        let v = cofinality_probe(&x, &nasty, &target, 5, 5_000_000).map_err(|e| e.to_string())?;
        ensure!(v.fails(), "nasty fan against {lens:?}: {}", v.label());
    }

    let clique = generate(GeneratorName::CliqueIteration, 5, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let v = clique.has_subsequence_in(StrictlyAntiInjective.into(), 5).map_err(|e| e.to_string())?;
    let Verdict::FailsOnPrefix {
        witness: Witness::Guarantee { guarantee, evidence },
    } = &v
    else {
        return Err(format!("clique iteration: expected a guarantee certificate, got {}", v.label()));
    };
    ensure!(matches!(guarantee, Guarantee::Never { .. }), "clique iteration: wrong guarantee");
    ensure!(!evidence.is_empty(), "clique iteration: empty certificate");
    for (m, n, _) in evidence {
        let c = clique.composite(*m, *n).unwrap();
        ensure!(thin_vertex(c).is_some(), "certificate ({m}, {n}) has no singleton strict preimage");
    }
    // Every composite of the prefix carries such a vertex.
    for m in 0..5 {
        for n in m + 1..=5 {
            ensure!(thin_vertex(clique.composite(m, n).unwrap()).is_some(), "composite {m}..{n} is strictly anti-injective");
        }
    }

    let fail = generate(GeneratorName::ModificationFail, 5, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let out = fail.cobijective_modification().map_err(|e| e.to_string())?;
    ensure!(matches!(out, ModificationOutcome::NoModification { .. }), "modification_fail was modified");
    Ok("nasty fan misses both fan targets at levels 0..5, clique iteration has singleton strict preimages, modification_fail refuses".into())
}

fn spectrum_reports() -> Result<String, String> {
    let none = BTreeMap::new();
    let gen = |g: GeneratorName, n: usize| generate(g, n, &none).unwrap();

    let arc = spectrum_report(&gen(GeneratorName::ArcDyadic, 5), 5);
    ensure!(arc.connected.holds() && arc.hausdorff.holds() && arc.perfect.holds(), "arc: {arc:?}");

    let cantor = spectrum_report(&gen(GeneratorName::CantorDoubling, 5), 5);
    ensure!(
        matches!(cantor.connected, Verdict::FailsOnPrefix { witness: Witness::Level { .. } | Witness::Apart { .. } }),
        "cantor connectedness: {:?}",
        cantor.connected
    );
    ensure!(cantor.hausdorff.holds() && cantor.perfect.holds(), "cantor: {cantor:?}");

    let circle = spectrum_report(&gen(GeneratorName::CycleRoots, 4), 4);
    ensure!(circle.connected.holds() && circle.hausdorff.holds(), "circle: {circle:?}");

    let cf = classify_fan_limit(&gen(GeneratorName::CantorFan, 4), 4).map_err(|e| e.to_string())?;
    ensure!(cf.kind == FanLimitKind::CantorFanEvidence, "cantor fan: {:?}", cf.kind);

    let lelek = gen(GeneratorName::Lelek, 5);
    let lf = classify_fan_limit(&lelek, 5).map_err(|e| e.to_string())?;
    ensure!(lf.kind == FanLimitKind::LelekEvidence, "lelek: {:?}", lf.kind);
    // End-density is reached from every level that has two levels below it
    // in the prefix, checked directly on composites. Single steps are not
    // end-dense at the root, so the last level needs the declared stride.
    for m in 0..4 {
        let reached = (m + 1..=5).any(|n| fan_check(lelek.composite(m, n).unwrap(), FanProperty::EndDense).unwrap_or(false));
        ensure!(reached, "lelek: no end-dense composite out of level {m}");
    }
    let ed = lelek.has_subsequence_in(FanProperty::EndDense.into(), 5).map_err(|e| e.to_string())?;
    ensure!(ed.holds(), "lelek end-dense subsequence: {}", ed.label());
    Ok("arc, Cantor set, circle, Cantor fan and Lelek fan evidence as expected".into())
}

fn modification() -> Result<String, String> {
    let a = CategorySpec::get(CategoryName::A);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut transfers = 0;
    for k in 0..100 {
        let levels = rng.gen_range(2..=6);
        let s: Sequence = random_monotone_path_sequence(&mut rng, levels, 7);
        let out = s.cobijective_modification().map_err(|e| format!("sequence {k}: {e}"))?;
        let Some(m) = out.modified() else {
            return Err(format!("sequence {k}: no modification"));
        };
        let t = &m.sequence;
        ensure!(t.last() + 1 >= s.last(), "sequence {k}: only {} levels kept", t.last());
        for n in 0..=t.last() {
            ensure!(a.contains_object(t.graph(n)), "sequence {k}: level {n} is not a path");
        }
        for n in 0..t.last() {
            ensure!(a.contains_morphism(t.step(n)), "sequence {k}: step {n}: {:?}", a.morphism_violation(t.step(n)));
        }
        for i in 0..t.last() {
            for j in i + 1..=t.last() {
                if s.composite(i, j).unwrap().check(StarRefining) {
                    ensure!(t.composite(i, j).unwrap().check(StarRefining), "sequence {k}: star-refinement {i}..{j} lost");
                    transfers += 1;
                }
            }
        }
    }
    Ok(format!("100 sequences modified into A, {transfers} star-refining composites carried over"))
}

fn intertwining() -> Result<String, String> {
    let d = CategorySpec::get(CategoryName::D);
    let s1 = fraisse_prefix(&d, 8, 1, 2).map_err(|e| e.to_string())?.sequence;
    let s2 = fraisse_prefix(&d, 8, 2, 2).map_err(|e| e.to_string())?.sequence;
    let ladder = intertwine(&d, &s1, &s2, 3, false).map_err(|e| e.to_string())?;
    ensure!(ladder.depth() >= 3, "D ladder depth {}", ladder.depth());
    for w in ladder.rungs.windows(2) {
        let s = if w[1].from_sequence == 1 { &s1 } else { &s2 };
        let c = s.composite(w[0].to_level, w[1].from_level).unwrap();
        ensure!(Morphism::compose(&w[0].morphism, &w[1].morphism).is_ok_and(|x| x == *c), "D rung does not commute");
    }

    let a = CategorySpec::get(CategoryName::A);
    let t1 = fraisse_prefix(&a, 6, 1, 2).map_err(|e| e.to_string())?.sequence;
    let t2 = fraisse_prefix(&a, 6, 2, 2).map_err(|e| e.to_string())?.sequence;
    let lax = intertwine(&a, &t1, &t2, 2, true).map_err(|e| e.to_string())?;
    ensure!(lax.depth() >= 2, "A ladder depth {}", lax.depth());
    for w in lax.rungs.windows(2) {
        let s = if w[1].from_sequence == 1 { &t1 } else { &t2 };
        let c = s.composite(w[0].to_level, w[1].from_level).unwrap();
        ensure!(
            Morphism::compose(&w[0].morphism, &w[1].morphism).is_ok_and(|x| x.is_subrelation_of(c)),
            "A rung is not inside the composite"
        );
    }
    Ok(format!("D exact depth {}, A lax depth {}", ladder.depth(), lax.depth()))
}
