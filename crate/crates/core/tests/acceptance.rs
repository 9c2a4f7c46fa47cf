//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use syncorr::elliptope::{elliptope_from_s2, realize_s2_point, S2Point};
use syncorr::matcore::trace_triple;
use syncorr::oracle::{
    check_inclusion, reduce_dimension, sample_ranked_triple_with, CheckOptions, Ensemble,
    Proposition,
};
use syncorr::point::{CorrPoint3, MarginalVec};
use syncorr::realize::{evaluate_correlation, realize_hull_point, DIMENSION_BOUND};
use syncorr::rng::stream;
use syncorr::slices::{
    fibonacci_sphere, read_mesh, slice_membership, slice_support, HullCertificate,
    SliceCertificate,
};

use common::{dot, dset_support_upper, elliptope_volume_mc, random_marginals, random_member, unit};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion_1() -> Outcome {
    let bad_forward: usize = (0..100_000u64)
        .into_par_iter()
        .filter(|&i| {
            let rt = sample_ranked_triple_with(&mut stream(101, i), 2, [1, 1, 1], Ensemble::Haar)
                .unwrap();
            let q = elliptope_from_s2(&S2Point(rt.trace_triple().0));
            !q.sylvester(1e-9)
        })
        .count();
    let worst_back = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let q = common::uniform_elliptope(&mut stream(102, i));
            let [a, b, c] = realize_s2_point(&q).unwrap();
            let t = trace_triple(&a, &b, &c).unwrap().0;
            let want = q.0.map(|v| (v + 1.0) / 4.0);
            (0..3).map(|k| (t[k] - want[k]).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        bad_forward == 0 && worst_back <= 1e-10,
        format!("sylvester failures {bad_forward}/100000, worst Pauli trace error {worst_back:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut cases = Vec::new();
    for d in 1..=6 {
        for n1 in 0..=d {
            for n2 in 0..=d {
                cases.push(Proposition::TwoExp { n1, n2, d });
            }
        }
    }
    let mut outside = 0;
    let mut worst_gap: f64 = 0.0;
    for (i, p) in cases.iter().enumerate() {
        let rep = check_inclusion(
            p,
            &CheckOptions {
                trials: 10_000,
                seed: 200 + i as u64,
                ensemble: Ensemble::Mixed,
                ..CheckOptions::default()
            },
        )
        .unwrap();
        let r = rep.range.unwrap();
        outside += rep.violations;
        worst_gap = worst_gap
            .max(r.empirical_min - r.lower)
            .max(r.upper - r.empirical_max);
    }
    outcome(
        outside == 0 && worst_gap <= 5e-3,
        format!(
            "{} cases, {outside} samples outside, worst endpoint gap {worst_gap:.2e}",
            cases.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let worst = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(301, i);
            let d = rng.random_range(2..=8);
            let (ranks, pair) = loop {
                let ranks = [0; 3].map(|_| rng.random_range(0..=d));
                let pairs: Vec<_> = [(0, 1), (0, 2), (1, 2)]
                    .into_iter()
                    .filter(|&(a, b)| ranks[a] + ranks[b] < d)
                    .collect();
                if !pairs.is_empty() {
                    break (ranks, pairs[rng.random_range(0..pairs.len())]);
                }
            };
            let ens = if i % 2 == 0 { Ensemble::Haar } else { Ensemble::Mixed };
            let rt = sample_ranked_triple_with(&mut rng, d, ranks, ens).unwrap();
            reduce_dimension(&rt, pair).unwrap().residual(&rt)
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-10, format!("10000 reductions, worst residual {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let props = Proposition::admissible(8);
    let mut violations = 0;
    let mut inconclusive = 0;
    let mut max_outward: f64 = 0.0;
    for (i, p) in props.iter().enumerate() {
        for ensemble in [Ensemble::Haar, Ensemble::Mixed] {
            let rep = check_inclusion(
                p,
                &CheckOptions {
                    trials: 10_000,
                    seed: 400 + i as u64,
                    ensemble,
                    ..CheckOptions::default()
                },
            )
            .unwrap();
            violations += rep.violations;
            inconclusive += rep.inconclusive;
            max_outward = max_outward.max(rep.max_outward);
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} cases x 2 ensembles x 10000 samples, {violations} violations, \
             {inconclusive} inconclusive, max outward {max_outward:.2e}",
            props.len()
        ),
    )
}

/// Realizes a member certificate and checks it against `(r, p)`.
fn realize_and_check(cert: &SliceCertificate) -> Result<(), String> {
    let real = realize_hull_point(cert).map_err(|e| e.to_string())?;
    if real.total_dim() > DIMENSION_BOUND {
        return Err(format!("dimension {}", real.total_dim()));
    }
    let t = evaluate_correlation(&real);
    let m = t.marginals();
    let w = t.w();
    let err = (0..3)
        .map(|k| (m[k] - cert.r.0[k]).abs().max((w[k] - cert.p.0[k]).abs()))
        .fold(0.0, f64::max);
    if err > 1e-9 {
        return Err(format!("reproduction error {err:.2e}"));
    }
    let defect = t
        .synchrony_defect()
        .max(t.normalization_defect())
        .max((-t.min_entry()).max(0.0));
    if defect > 1e-12 {
        return Err(format!("tensor defect {defect:.2e}"));
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let failures: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = stream(501, i);
            let r = MarginalVec([0; 3].map(|_| rng.random_range(0.0..=1.0)));
            let p = CorrPoint3(random_member(&mut rng, &r));
            let cert = slice_membership(&r, &p, 1e-10).unwrap();
            if !cert.is_member() {
                return Some(format!("#{i}: {}", cert.hull.verdict()));
            }
            realize_and_check(&cert).err().map(|e| format!("#{i}: {e}"))
        })
        .collect();
    outcome(
        failures.is_empty(),
        format!("1000 points, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn criterion_6() -> Outcome {
    let directions = fibonacci_sphere(1000);
    let failures: Vec<String> = (0..100u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let r = random_marginals(&mut stream(601, i));
            let directions = &directions;
            (0..directions.len()).filter_map(move |j| {
                let s = slice_support(&r, directions[j]).unwrap();
                let cert = slice_membership(&r, &CorrPoint3(s.point), 1e-6).unwrap();
                if !cert.is_member() {
                    return Some(format!("r={:?} dir {j}: {}", r.0, cert.hull.verdict()));
                }
                realize_and_check(&cert)
                    .err()
                    .map(|e| format!("r={:?} dir {j}: {e}", r.0))
            })
        })
        .collect();
    outcome(
        failures.is_empty(),
        format!("100000 boundary points, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn criterion_7() -> Outcome {
    let failures: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = stream(701, i);
            let r = random_marginals(&mut rng);
            let c = unit(&mut rng);
            let s = slice_support(&r, c).unwrap();
            let delta = rng.random_range(1e-3..=5e-2);
            let p = CorrPoint3([0, 1, 2].map(|k| s.point[k] + delta * c[k]));
            let cert = slice_membership(&r, &p, 1e-6).unwrap();
            let HullCertificate::NonMember { direction, margin } = cert.hull else {
                return Some(format!("#{i}: {}", cert.hull.verdict()));
            };
            // re-verify with dual upper bounds on each body's support
            let bound = cert
                .bodies
                .iter()
                .map(|b| dset_support_upper(b, direction))
                .fold(f64::NEG_INFINITY, f64::max);
            let verified = dot(direction, cert.p_std.0) - bound;
            let norm = dot(direction, direction).sqrt();
            if !(verified > 0.0 && (norm - 1.0).abs() < 1e-12 && margin <= delta + 1e-12) {
                return Some(format!(
                    "#{i}: claimed {margin:.3e}, re-verified {verified:.3e}, offset {delta:.3e}"
                ));
            }
            None
        })
        .collect();
    outcome(
        failures.is_empty(),
        format!("1000 outside points, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn criterion_8() -> Outcome {
    let (vol_e, sigma) = elliptope_volume_mc(&mut stream(801, 0), 4_000_000);
    let closed = std::f64::consts::PI.powi(2) / 2.0;
    let oracle_ok = (vol_e - closed).abs() <= 4.0 * sigma;
    let reference = closed / 64.0;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.xyz");
    let args = [
        "syncorr",
        "mesh",
        "-r",
        "0.5,0.5,0.5",
        "--res",
        "2000",
        "-o",
        path.to_str().unwrap(),
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = syncorr::cli::run(args, &mut std::io::empty(), &mut out, &mut err);
    let mesh = read_mesh(&path).unwrap_or_default();
    let r = MarginalVec([0.5; 3]);
    let mesh_ok = code == 0
        && mesh.len() == 2000
        && mesh
            .par_iter()
            .all(|p| slice_membership(&r, &CorrPoint3(*p), 1e-5).unwrap().is_member());

    let samples = 1_000_000u64;
    let hits = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = stream(802, i);
            let p = [0; 3].map(|_| rng.random_range(0.0..=0.5));
            slice_membership(&r, &CorrPoint3(p), 1e-7)
                .unwrap()
                .is_member()
        })
        .count();
    let vol = hits as f64 / samples as f64 * 0.125;
    let rel = (vol - reference).abs() / reference;
    outcome(
        oracle_ok && mesh_ok && rel <= 0.02,
        format!(
            "elliptope oracle {vol_e:.5} +- {sigma:.1e} (pi^2/2 = {closed:.5}), mesh {} points, \
             slice volume {vol:.6} vs {reference:.6} ({:.2}%)",
            mesh.len(),
            100.0 * rel
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 8] = [
        ("elliptope characterization", criterion_1, 30.0),
        ("two-projection trace range", criterion_2, 60.0),
        ("dimension reduction identity", criterion_3, 60.0),
        ("type I/II/III inclusions", criterion_4, 600.0),
        ("hull point realization round trip", criterion_5, 120.0),
        ("closedness consistency", criterion_6, f64::INFINITY),
        ("non-membership soundness", criterion_7, f64::INFINITY),
        ("half slice volume", criterion_8, f64::INFINITY),
    ];
    let mut all = true;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let passed = o.passed && secs <= *limit;
        all &= passed;
        let budget = if limit.is_finite() {
            format!(" (limit {limit:.0} s)")
        } else {
            String::new()
        };
        println!(
            "criterion {}: {} {name}: {}; {secs:.1} s{budget}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
