//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{exhaustive_vertices, random_bounded_system};
use dofbench::dmc::{self, DmcSpec};
use dofbench::geometry::{enumerate_vertices, region_subset, regions_equal};
use dofbench::model::UserId;
use dofbench::rational::{rat, Pq};
use dofbench::regions::{gap_report, inner_region, outer_region, FamilyTag, ScenarioFamily};
use dofbench::schemes::{self, SchemeId, SchemeParams};
use dofbench::sim::{self, SnrSweep};
use dofbench::{Csit, Execution, Rational, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.1}s, budget {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn fmt(v: &[Rational]) -> String {
    v.iter().map(|d| Pq(d).to_string()).collect::<Vec<_>>().join(", ")
}

/// Runs every seed and checks decoding and the exact DoF tuple.
fn sweep(params: &SchemeParams, seeds: u64, expected: &[Rational]) -> Result<(), String> {
    let report = schemes::verify_seeds(params, 0, seeds, Execution::Parallel).map_err(|e| e.to_string())?;
    check(report.observed == expected, || {
        format!("{} {}: dof ({}) != ({})", params.scheme, params.describe(), fmt(&report.observed), fmt(expected))
    })?;
    check(report.passed(), || report.summary_line())
}

fn product_superposition() -> Outcome {
    let start = Instant::now();
    for t in [2i64, 5, 10, 15, 30] {
        let params = SchemeParams::new(SchemeId::ProductSuperposition, t as usize, None, None).map_err(|e| e.to_string())?;
        sweep(&params, 1000, &[rat(1, t), rat(t - 1, t)])?;
    }
    within(start.elapsed(), 5)?;
    Ok(format!("T in {{2,5,10,15,30}}, 1000 seeds each, {:.2}s", start.elapsed().as_secs_f64()))
}

fn delayed_three_phase() -> Outcome {
    let start = Instant::now();
    for (t, tp) in [(5i64, 10usize), (15, 30), (15, 15)] {
        let params = SchemeParams::new(SchemeId::Delayed3Phase, t as usize, Some(tp), None).map_err(|e| e.to_string())?;
        // (2/3)(1 + 1/T), (2/3)(1 - 2/T)
        sweep(&params, 100, &[rat(2 * (t + 1), 3 * t), rat(2 * (t - 2), 3 * t)])?;
    }
    within(start.elapsed(), 30)?;
    Ok(format!("(32/45, 26/45) at T=15 among 3 settings, {:.2}s", start.elapsed().as_secs_f64()))
}

fn mat_super_symbols() -> Outcome {
    for tp in [1usize, 5, 10] {
        let params = SchemeParams::new(SchemeId::MatStatic, tp, Some(tp), None).map_err(|e| e.to_string())?;
        sweep(&params, 100, &[rat(2, 3), rat(2, 3)])?;
    }
    for t in [4i64, 10] {
        let params = SchemeParams::new(SchemeId::MatDynamic, t as usize, None, None).map_err(|e| e.to_string())?;
        let d = rat(2 * (t - 2), 3 * t);
        sweep(&params, 100, &[d.clone(), d])?;
    }
    Ok("static 2/3 for T' in {1,5,10}; dynamic 1/3 and 8/15 for T in {4,10}".into())
}

fn hybrid_perfect_none() -> Outcome {
    let mut worst = 0.0f64;
    for ms in [1usize, 2] {
        for t in [5i64, 10] {
            let params = SchemeParams::new(SchemeId::HybridPn, t as usize, None, Some(ms)).map_err(|e| e.to_string())?;
            let mut expected = vec![rat(1, t); ms];
            expected.push(rat(t - 1, t));
            let report = schemes::verify_seeds(&params, 0, 1000, Execution::Parallel).map_err(|e| e.to_string())?;
            check(report.observed == expected, || format!("m'={ms} T={t}: dof ({})", fmt(&report.observed)))?;
            check(report.passed(), || report.summary_line())?;
            let zf = report.max_zf_residual.ok_or("no zero-forcing residual recorded")?;
            check(zf < 1e-9, || format!("zero-forcing residual {zf:e}"))?;
            worst = worst.max(zf);
        }
    }
    Ok(format!("m' in {{1,2}}, T in {{5,10}}, max ZF residual {worst:.1e}"))
}

fn hybrid_pd_two_phase() -> Outcome {
    for t in [2i64, 15, 30] {
        let params = SchemeParams::new(SchemeId::HybridPd2Phase, t as usize, None, None).map_err(|e| e.to_string())?;
        let expected = [rat(2 * t - 1, 2 * t), rat(t - 1, 2 * t)];
        let ranks = Execution::Parallel.map_range(0..1000, |seed| {
            let tr = schemes::run(&params, seed).map_err(|e| e.to_string())?;
            let rec = tr.receiver(UserId::Static(0)).ok_or("missing static receiver")?;
            let full = rec.solves.iter().filter(|s| s.unknowns > 1).all(|s| s.rank == 2);
            Ok::<_, String>((tr.decode_ok(), tr.dof() == expected, full))
        });
        for (seed, r) in ranks.into_iter().enumerate() {
            let (ok, dof, full) = r?;
            check(ok && dof && full, || format!("T={t} seed {seed}: decode_ok={ok} dof_match={dof} full_rank={full}"))?;
        }
    }
    Ok("T in {2,15,30}, 1000 seeds, every 2x2 solve full rank".into())
}

fn family(tag: FamilyTag, ms: usize, md: usize, ts: usize, td: usize) -> Result<ScenarioFamily, String> {
    let (cs, cd) = match tag {
        FamilyTag::NoCsit => (Csit::None, Csit::None),
        FamilyTag::HybridPerfectNone => (Csit::Perfect, Csit::None),
        FamilyTag::HybridPerfectDelayed => (Csit::Perfect, Csit::Delayed),
        _ => (Csit::Delayed, Csit::Delayed),
    };
    let cfg = ScenarioConfig::new(ms, md, ts, td, cs, cd).map_err(|e| e.to_string())?;
    ScenarioFamily::new(tag, cfg).map_err(|e| e.to_string())
}

fn region_geometry() -> Outcome {
    let start = Instant::now();
    for ms in [1usize, 2] {
        for md in [1usize, 2] {
            let f = family(FamilyTag::NoCsit, ms, md, 20, 10)?;
            let n = inner_region(&f).map_err(|e| e.to_string())?.region.vertices.len();
            check(n == (ms + 1) * (md + 1), || format!("no-CSIT ({ms},{md}) has {n} vertices"))?;
        }
    }
    let mut checked = 0;
    for t in [4usize, 10, 15, 30] {
        for ts in [t, 2 * t] {
            for ms in [1usize, 2] {
                for md in [1usize, 2] {
                    let mut families = vec![
                        family(FamilyTag::NoCsit, ms, md, ts, t)?,
                        family(FamilyTag::DelayedAll, ms, md, ts, t)?,
                        family(FamilyTag::HybridPerfectNone, ms, md, ts, t)?,
                        family(FamilyTag::HybridPerfectDelayed, ms, md, ts, t)?,
                        family(FamilyTag::DelayedDynamicOnly, 0, md, t, t)?,
                    ];
                    if ts == t && md == 1 {
                        families.push(family(FamilyTag::DelayedStaticOnly, ms, 0, ts, t)?);
                    }
                    for f in families {
                        let inner = inner_region(&f).map_err(|e| e.to_string())?;
                        let outer = outer_region(&f).map_err(|e| e.to_string())?;
                        let sub = region_subset(&inner.region, &outer).map_err(|e| e.to_string())?;
                        check(sub.holds, || format!("{} {:?}: inner not inside outer, witness {:?}", f.tag, f.cfg, sub.witness))?;
                        checked += 1;
                    }
                }
            }
        }
    }
    let f = ScenarioFamily::new(
        FamilyTag::NoCsit,
        ScenarioConfig::new(1, 1, 10, 10, Csit::None, Csit::None).and_then(|c| c.aligned()).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let inner = inner_region(&f).map_err(|e| e.to_string())?;
    let outer = outer_region(&f).map_err(|e| e.to_string())?;
    check(regions_equal(&inner.region, &outer).map_err(|e| e.to_string())?, || "aligned no-CSIT regions differ".into())?;
    within(start.elapsed(), 10)?;
    Ok(format!("vertex counts, {checked} subset checks, aligned equality, {:.2}s", start.elapsed().as_secs_f64()))
}

fn gap_claims() -> Outcome {
    let ones = vec![rat(1, 1), rat(1, 1)];
    for t in [5i64, 15, 30] {
        let f = family(FamilyTag::HybridPerfectDelayed, 1, 1, 2 * t as usize, t as usize)?;
        let g = gap_report(&f, &ones).map_err(|e| e.to_string())?;
        check(g.gap == rat(1, t) && g.outer_max == rat(3, 2), || {
            format!("T={t}: inner {} outer {} gap {}", Pq(&g.inner_max), Pq(&g.outer_max), Pq(&g.gap))
        })?;
    }
    let mut gaps = Vec::new();
    for t in [5usize, 10, 15, 30] {
        let f = family(FamilyTag::DelayedAll, 1, 1, 2 * t, t)?;
        gaps.push(gap_report(&f, &ones).map_err(|e| e.to_string())?.gap);
    }
    check(gaps.windows(2).all(|w| w[1] <= w[0]), || format!("delayed gaps not nonincreasing: ({})", fmt(&gaps)))?;
    Ok(format!("hybrid gap 1/T; delayed gaps ({}) for T in {{5,10,15,30}}", fmt(&gaps)))
}

fn polytope_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let dim = rng.random_range(1..=4);
        let extra = rng.random_range(0..=(12 - 2 * dim).min(6));
        let hs = random_bounded_system(&mut rng, dim, extra);
        let got = enumerate_vertices(&hs, dim).map_err(|e| e.to_string())?;
        check(got == exhaustive_vertices(&hs, dim), || format!("case {case} (D={dim}) differs from oracle"))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("200 random systems, D <= 4, {:.2}s", start.elapsed().as_secs_f64()))
}

fn noisy_slope() -> Outcome {
    let start = Instant::now();
    let params = SchemeParams::new(SchemeId::ProductSuperposition, 10, None, None).map_err(|e| e.to_string())?;
    let sweep = SnrSweep::new(vec![40.0, 60.0], 2000, 17).map_err(|e| e.to_string())?;
    let table = sim::rate_estimate(&params, &sweep, Execution::Parallel).map_err(|e| e.to_string())?;
    let report = sim::slope_report(&params, &table).map_err(|e| e.to_string())?;
    let slope = report.slopes[1];
    check((slope - 0.9).abs() <= 0.05, || format!("dynamic slope {slope:.4}"))?;
    within(start.elapsed(), 120)?;
    Ok(format!("dynamic slope {slope:.4} (target 0.9 +- 0.05), {:.2}s", start.elapsed().as_secs_f64()))
}

fn random_binary_spec<R: Rng>(rng: &mut R) -> Result<DmcSpec, String> {
    let stage = |rng: &mut R| -> Vec<Vec<f64>> {
        (0..2)
            .map(|_| {
                let p: f64 = rng.random();
                vec![p, 1.0 - p]
            })
            .collect()
    };
    let s = (0..2).map(|_| stage(rng)).collect();
    let d = (0..2).map(|_| stage(rng)).collect();
    DmcSpec::new(2, s, d).map_err(|e| e.to_string())
}

fn dmc_region() -> Outcome {
    let identity = DmcSpec::new(2, vec![dmc::identity(2)], vec![dmc::identity(2)]).map_err(|e| e.to_string())?;
    let res = dmc::degraded_message_region(&identity, 2, 2, 1.0 / 16.0, Execution::Parallel).map_err(|e| e.to_string())?;
    let best = res.frontier.iter().map(|p| p.r0 + p.r1).fold(0.0, f64::max);
    check(best >= 0.95, || format!("identity frontier sum {best:.4}"))?;
    let mut violations = res.dpi_violations;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let spec = random_binary_spec(&mut rng)?;
        let coarse = dmc::degraded_message_region(&spec, 2, 2, 1.0 / 8.0, Execution::Parallel).map_err(|e| e.to_string())?;
        let fine = dmc::degraded_message_region(&spec, 2, 2, 1.0 / 16.0, Execution::Parallel).map_err(|e| e.to_string())?;
        check(dmc::frontier_dominated(&coarse.frontier, &fine.frontier, 1e-12), || {
            format!("random spec {k}: coarse frontier not dominated")
        })?;
        violations += coarse.dpi_violations + fine.dpi_violations;
    }
    check(violations == 0, || format!("{violations} data-processing violations"))?;
    Ok(format!("identity R0+R1 = {best:.4}; 20 random specs refine monotonically; 0 DPI violations"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("product superposition exact DoF", product_superposition),
        ("delayed-CSIT three-phase exact DoF", delayed_three_phase),
        ("MAT over super-symbols", mat_super_symbols),
        ("hybrid perfect/none zero-forcing", hybrid_perfect_none),
        ("hybrid perfect/delayed two-phase", hybrid_pd_two_phase),
        ("region geometry", region_geometry),
        ("gap claims", gap_claims),
        ("polytope oracle equivalence", polytope_oracle),
        ("noisy DoF slope", noisy_slope),
        ("DMC degraded-message-set region", dmc_region),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
