//! Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
//! budget. Exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use fractal_oam::channel::{build_free_space, ingest_matrix, to_oam_domain, CMatrix};
use fractal_oam::exec::Exec;
use fractal_oam::field::{accumulated_phase, evaluate, Excitation, FieldMethod};
use fractal_oam::geometry::{make_grid, GridIndex, Point3, UcaLayout, Wavelength};
use fractal_oam::harness::{
    build_channel, run_sweep, ConfigFile, ExperimentConfig, SweepParam, SweepSpec,
};
use fractal_oam::metrics::{ber_analytic, ber_monte_carlo, LinkModel};
use fractal_oam::modem::{
    demodulate, detect, propagate, transmit, unitarity_error, Constellation, NoiseSpec,
    PowerAllocation, SymbolVector, UnitDftPair,
};
use fractal_oam::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(sets: &[&str]) -> ExperimentConfig {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    ConfigFile::from_toml_str("", &sets)
        .and_then(|f| f.resolve())
        .expect("acceptance config")
}

fn lam1() -> Wavelength {
    Wavelength::new(1.0).unwrap()
}

fn criterion_1() -> Outcome {
    let grid = make_grid(10.0, 30.0, 75.0).unwrap();
    let centers = grid.enumerate_centers(2, 3);
    let expected = [
        (25.0, 14.43),
        (25.0, -14.43),
        (-25.0, 14.43),
        (-25.0, -14.43),
        (0.0, 28.87),
        (0.0, -28.87),
    ];
    let mut worst: f64 = 0.0;
    for (x, y) in expected {
        let d = centers
            .iter()
            .map(|(_, p)| ((p.x - x).abs().max((p.y - y).abs())).max((p.z - 75.0).abs()))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    let rr = grid.rr_bound();
    outcome(
        worst <= 0.01 && (rr - 9.62).abs() <= 0.01,
        format!("worst center offset {worst:.4} mm, rr_bound {rr:.4} mm"),
    )
}

fn criterion_2() -> Outcome {
    let rr = make_grid(1.0, 150.0, 1000.0).unwrap().rr_bound();
    outcome(
        (rr - 2.566).abs() <= 5e-4 && rr <= 2.57,
        format!("rr_bound {rr:.5} lambda"),
    )
}

fn criterion_3() -> Outcome {
    let (rt, z) = (150.0, 1000.0);
    let uca = UcaLayout::transmit(rt, 6).unwrap();
    let grid = make_grid(1.0, rt, z).unwrap();
    let centers = grid.enumerate_centers(1, 2);
    let scale = 1.0 / (4.0 * PI * z);
    let ring = 0.5 * grid.cell_radius();
    let field =
        |s: &Excitation, p: Point3, m| evaluate(&uca, s, lam1(), p.to_cylindrical(), m).unwrap();

    let mut approx_worst: f64 = 0.0;
    let mut exact_worst: f64 = 0.0;
    let mut exact_where = (0, GridIndex::ORIGIN);
    let mut exact_fail = 0;
    for l in 1..=5 {
        let s = Excitation::mode(l, 6, 1.0);
        for &(idx, c) in &centers {
            approx_worst = approx_worst.max(field(&s, c, FieldMethod::Approx).norm() / scale);
            let at_center = field(&s, c, FieldMethod::Exact).norm();
            let peak = (0..720)
                .map(|i| {
                    let t = TAU * i as f64 / 720.0;
                    let p = Point3::new(c.x + ring * t.cos(), c.y + ring * t.sin(), z);
                    field(&s, p, FieldMethod::Exact).norm()
                })
                .fold(0.0, f64::max);
            let ratio = at_center / peak;
            if ratio > 0.05 {
                exact_fail += 1;
            }
            if ratio > exact_worst {
                exact_worst = ratio;
                exact_where = (l, idx);
            }
        }
    }
    let cases = 5 * centers.len();
    outcome(
        approx_worst <= 1e-12 && exact_worst <= 0.05,
        format!(
            "approx max |E|/(lambda/4piz) {approx_worst:.2e} (limit 1e-12); exact max center/ring-peak {:.2}% at l={} (m,n)=({},{}), {exact_fail}/{cases} cases above 5%",
            100.0 * exact_worst,
            exact_where.0,
            exact_where.1.m,
            exact_where.1.n
        ),
    )
}

fn criterion_4() -> Outcome {
    let (rt, z) = (150.0, 1000.0);
    let uca = UcaLayout::transmit(rt, 6).unwrap();
    let grid = make_grid(1.0, rt, z).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for idx in [
        GridIndex::new(1, 1),
        GridIndex::new(0, 2),
        GridIndex::new(-1, 1),
    ] {
        let c = grid.center(idx);
        for l in [1usize, 2] {
            let s = Excitation::mode(l, 6, 1.0);
            let acc = accumulated_phase(
                |p| evaluate(&uca, &s, lam1(), p.to_cylindrical(), FieldMethod::Exact).unwrap(),
                c,
                0.3 * grid.cell_radius(),
                720,
            );
            let err = (acc - TAU * l as f64).abs();
            worst = worst.max(err);
            parts.push(format!("({},{}) l={l}: {:.4} rad", idx.m, idx.n, acc));
        }
    }
    outcome(
        worst <= 1e-2,
        format!("max error {worst:.2e} rad; {}", parts.join(", ")),
    )
}

fn criterion_5() -> Outcome {
    let pair = UnitDftPair::new(6, 6);
    let u = unitarity_error(&pair.idft).max(unitarity_error(&pair.dft));
    let cfg = config(&[]);
    let h = build_channel(&cfg).unwrap();
    let oam = to_oam_domain(&h, &pair).unwrap();
    let p = PowerAllocation::uniform(6, 1.0);
    let mut wrong = 0;
    for v in 0u32..64 {
        let bits: Vec<bool> = (0..6).map(|b| v >> b & 1 == 1).collect();
        let x = SymbolVector::bpsk(&bits);
        let s = transmit(&x, &p, &pair).unwrap();
        let r = propagate(&s, &h, &NoiseSpec::noiseless()).unwrap();
        let y = demodulate(&r, &pair).unwrap();
        if detect(&y, &oam, &p, Constellation::Bpsk).unwrap().bits() != bits {
            wrong += 1;
        }
    }
    outcome(
        u <= 1e-12 && wrong == 0,
        format!(
            "unitarity error {u:.1e}; {wrong}/64 BPSK vectors misdetected (aligned exact channel)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (gamma, seed) in [(1.0, 101u64), (2.0, 102), (4.0, 103)] {
        let g = 0.5;
        let h = ingest_matrix(CMatrix::identity(6, 6) * Complex64::new(g, 0.0)).unwrap();
        let link = LinkModel::new(h, PowerAllocation::uniform(6, 1.0), g * g / gamma);
        let mc = ber_monte_carlo(&link, 1_000_000, seed, Exec::default()).unwrap();
        let analytic = ber_analytic(&[gamma; 6]).unwrap();
        let z = (mc.probability - analytic).abs() / mc.std_error;
        pass &= z <= 3.0;
        parts.push(format!(
            "gamma={gamma}: mc {:.5e} vs {analytic:.5e} ({z:.2} se)",
            mc.probability
        ));
    }
    outcome(pass, parts.join("; "))
}

fn capacities(cfg: &ExperimentConfig, param: SweepParam, values: &str) -> (Vec<f64>, Vec<f64>) {
    let spec = SweepSpec::parse(param, values).unwrap();
    let table = run_sweep(cfg, &spec, Exec::default()).unwrap();
    let key = match param {
        SweepParam::Snr => "snr_db",
        SweepParam::GridIndex => "m",
        p => p.name(),
    };
    (
        table.column(key).unwrap(),
        table.column("capacity").unwrap(),
    )
}

const TREND_BASE: [&str; 4] = [
    "link.channel=approx",
    "transmit.radius=1500",
    "link.distance=10000",
    "receive.radius=16.7",
];

fn with_base<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    TREND_BASE
        .iter()
        .copied()
        .chain(extra.iter().copied())
        .collect()
}

fn criterion_7() -> Outcome {
    let snr = "0:2:30";
    let run = |scheme: &str, m: i64, n: i64| {
        let scheme = format!("transmit.scheme={scheme}");
        let index = format!("receive.grid_index=[{m},{n}]");
        let cfg = config(&with_base(&[scheme.as_str(), index.as_str()]));
        capacities(&cfg, SweepParam::Snr, snr).1
    };
    let above = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x > y);
    let (fa, na) = (run("fractal", 0, 0), run("normal", 0, 0));
    let (f22, n22) = (run("fractal", 2, 2), run("normal", 2, 2));
    let (f25, f52) = (run("fractal", 2, 5), run("fractal", 5, 2));
    let (n25, n52) = (run("normal", 2, 5), run("normal", 5, 2));
    let a = above(&fa, &na);
    let b = above(&f22, &n22);
    let c = above(&f25, &f52) && above(&n25, &n52);
    let last = fa.len() - 1;
    outcome(
        a && b && c,
        format!(
            "(a) {a} (b) {b} (c) {c}; at 30 dB: fractal aligned {:.3}, normal aligned {:.3}, fractal (2,2) {:.3}, normal (2,2) {:.3}, fractal (2,5)/(5,2) {:.3}/{:.3}, normal (2,5)/(5,2) {:.3}/{:.3} bit/s/Hz",
            fa[last], na[last], f22[last], n22[last], f25[last], f52[last], n25[last], n52[last]
        ),
    )
}

fn interior_argmax(v: &[f64]) -> (usize, bool) {
    let i = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best });
    (i, i > 0 && i + 1 < v.len())
}

fn criterion_8() -> Outcome {
    // R_r from 0.0257λ to 2.57λ in 100 steps; 2.57λ sits just above the bound.
    let cfg = config(&with_base(&["receive.allow_oversize=true"]));
    let (rr, cap) = capacities(&cfg, SweepParam::ReceiveRadius, "0.257:0.257:25.7");
    let (i, a) = interior_argmax(&cap);
    let cfg = config(&with_base(&["receive.radius=12.83"]));
    let (rt, cap_t) = capacities(&cfg, SweepParam::TransmitRadius, "5:5:3000");
    let (j, b) = interior_argmax(&cap_t);
    outcome(
        a && b,
        format!(
            "R_r sweep max {:.3} at {:.3} lambda of ({:.4}, {:.2}]; R_t sweep max {:.3} at {:.1} lambda of [{:.1}, {:.1}]",
            cap[i],
            rr[i] / 10.0,
            rr[0] / 10.0,
            rr[rr.len() - 1] / 10.0,
            cap_t[j],
            rt[j] / 10.0,
            rt[0] / 10.0,
            rt[rt.len() - 1] / 10.0
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut min_margin = f64::INFINITY;
    let mut worst = (0.0, 0, 0);
    for (m, n) in [(2i64, 2i64), (2, 5), (5, 2)] {
        let index = format!("receive.grid_index=[{m},{n}]");
        let run = |scheme: &str| {
            let scheme = format!("transmit.scheme={scheme}");
            let cfg = config(&with_base(&[
                scheme.as_str(),
                index.as_str(),
                "sweep.tie_receive_radius=0.25",
            ]));
            capacities(&cfg, SweepParam::Distance, "100:100:15000")
        };
        let (z, fractal) = run("fractal");
        let (_, normal) = run("normal");
        for ((z, f), nrm) in z.iter().zip(&fractal).zip(&normal) {
            if *z >= 9000.0 {
                let margin = f - nrm;
                pass &= margin > 0.0;
                if margin < min_margin {
                    min_margin = margin;
                    worst = (z / 10.0, m, n);
                }
            }
        }
    }
    outcome(
        pass,
        format!(
            "z in [900, 1500] of a 10:10:1500 lambda sweep; min fractal-normal margin {min_margin:.3} bit/s/Hz at z={} lambda, (m,n)=({},{})",
            worst.0, worst.1, worst.2
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        PropConfig {
            cases: 100,
            failure_persistence: None,
            ..PropConfig::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    let worst = std::cell::Cell::new((0.0f64, 0.0f64));
    let strategy = (
        0.5..40.0f64,
        0.1..5.0f64,
        -30.0..30.0f64,
        -30.0..30.0f64,
        1.0..4.0f64,
        0.0..TAU,
    );
    let result = runner.run(&strategy, |(rt, rr, cx, cy, zf, offset)| {
        let rho_max = (cx * cx + cy * cy).sqrt() + rr;
        let z = 1000.0 * rho_max.max(rt) * zf;
        let tx = UcaLayout::transmit(rt, 6).unwrap();
        let rx = UcaLayout::new(rr, 6, Point3::new(cx, cy, z))
            .unwrap()
            .with_angular_offset(offset);
        let exact = build_free_space(&tx, &rx, lam1(), FieldMethod::Exact).unwrap();
        let approx = build_free_space(&tx, &rx, lam1(), FieldMethod::Approx).unwrap();
        let ratios: Vec<Complex64> = exact
            .entries()
            .iter()
            .zip(approx.entries().iter())
            .map(|(e, a)| e / a)
            .collect();
        let common = ratios.iter().sum::<Complex64>().arg();
        let (mut mag, mut phase) = (0.0f64, 0.0f64);
        for r in &ratios {
            mag = mag.max((r.norm() - 1.0).abs());
            phase = phase.max((r * Complex64::from_polar(1.0, -common)).arg().abs());
        }
        let w = worst.get();
        worst.set((w.0.max(mag), w.1.max(phase)));
        prop_assert!(mag <= 0.01, "magnitude deviation {mag}");
        prop_assert!(phase <= 1e-2, "phase deviation {phase}");
        Ok(())
    });
    let (mag, phase) = worst.get();
    outcome(
        result.is_ok(),
        format!(
            "100 geometries; worst |mag ratio - 1| {mag:.2e}, worst residual phase {phase:.2e} rad{}",
            result.err().map(|e| format!("; {e}")).unwrap_or_default()
        ),
    )
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (
            1,
            "grid geometry reproduction",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            2,
            "receive-radius bound",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            3,
            "null at grid centers",
            Duration::from_secs(30),
            criterion_3,
        ),
        (4, "phase winding", Duration::from_secs(10), criterion_4),
        (5, "modem exactness", Duration::from_secs(1), criterion_5),
        (
            6,
            "BER oracle agreement",
            Duration::from_secs(120),
            criterion_6,
        ),
        (7, "capacity ordering", Duration::from_secs(60), criterion_7),
        (8, "interior maxima", Duration::from_secs(120), criterion_8),
        (9, "distance study", Duration::from_secs(120), criterion_9),
        (
            10,
            "paraxial validity",
            Duration::from_secs(30),
            criterion_10,
        ),
    ];
    let mut failed = Vec::new();
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        println!(
            "criterion {n:>2} {}: {name}: {} [{:.2}s / {}s budget]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
