//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdcmac::contention::contention_overhead;
use fdcmac::montecarlo::{simulate, SimConfig};
use fdcmac::optimizer::{
    compare_baselines, critical_sensing_power, optimize_config, verify_ts_shape, OptimizationResult,
    OptimizerSettings,
};
use fdcmac::sensing::{average_detection, calibrate_threshold, detection_p01, false_alarm_p00};
use fdcmac::throughput::evaluate;
use fdcmac::{
    db_to_linear, linear_to_db, AccessConfig, ContentionParams, Execution, PuModel, Scenario, SensingConfig,
    SicModel, TxMode,
};

const T: f64 = 15e-3;

fn scenario(tau_id: f64, tau_ac: f64, zeta: f64, xi: f64, mode: TxMode, p_max_db: f64) -> Scenario {
    Scenario {
        contention: ContentionParams::standard(40, 0.0022),
        pu: PuModel {
            tau_id_bar: tau_id,
            tau_ac_bar: tau_ac,
            t_eva: 40e-3,
            p_pu: db_to_linear(-20.0),
        },
        sic: SicModel { zeta, xi },
        sensing: SensingConfig::default(),
        access: AccessConfig::new(T, 2.44e-3, 0.0, db_to_linear(p_max_db), mode).unwrap(),
    }
}

fn high_qsic_fd() -> Scenario {
    scenario(0.15, 0.05, 0.08, 0.95, TxMode::Fdtx, 15.0)
}

fn db(x: f64) -> f64 {
    linear_to_db(x).unwrap_or(f64::NEG_INFINITY)
}

fn describe(r: &OptimizationResult) -> String {
    format!(
        "T_S* = {:.3} ms, P_sen* = {:.4} dB, NT* = {:.4}",
        r.t_s_star * 1e3,
        db(r.p_sen_star),
        r.nt_star
    )
}

struct Verdict {
    pass: bool,
    detail: String,
}

type Check = Result<Verdict, String>;

fn verdict(pass: bool, detail: String) -> Check {
    Ok(Verdict { pass, detail })
}

fn within_rel(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn critical_power() -> Check {
    let sc = SensingConfig::default();
    let p_dat = db_to_linear(15.0);
    let low = db(critical_sensing_power(p_dat, &sc, &SicModel { zeta: 0.7, xi: 1.0 }));
    let high = db(critical_sensing_power(p_dat, &sc, &SicModel { zeta: 0.08, xi: 1.0 }));
    verdict(
        (low - 6.6294).abs() <= 1e-3 && (high - 19.9201).abs() <= 1e-3,
        format!("{low:.4} dB (want 6.6294), {high:.4} dB (want 19.9201)"),
    )
}

fn fd_optimum(opt: &OptimizationResult) -> Check {
    let pass = (opt.t_s_star - 2.44e-3).abs() <= 0.3e-3
        && (db(opt.p_sen_star) - 4.6552).abs() <= 0.5
        && within_rel(opt.nt_star, 2.3924, 0.02);
    verdict(pass, format!("{} (want 2.44 ms, 4.6552 dB, 2.3924)", describe(opt)))
}

fn low_qsic_boundary(settings: &OptimizerSettings) -> Check {
    let s = scenario(0.15, 0.05, 0.8, 0.95, TxMode::Fdtx, 15.0);
    let opt = optimize_config(&s, settings).map_err(|e| e.to_string())?;
    let pass = opt.t_s_star == T && opt.p_sen_star == s.access.p_max && within_rel(opt.nt_star, 1.6757, 0.02);
    verdict(pass, format!("{} (want 15 ms, 15 dB, 1.6757)", describe(&opt)))
}

fn hd_optimum(settings: &OptimizerSettings, fd: &OptimizationResult) -> Check {
    let s = scenario(0.15, 0.05, 0.08, 0.95, TxMode::Hdtx, 15.0);
    let opt = optimize_config(&s, settings).map_err(|e| e.to_string())?;
    let pass = (opt.t_s_star - 3.5e-3).abs() <= 0.3e-3
        && (db(opt.p_sen_star) - 5.6897).abs() <= 0.5
        && within_rel(opt.nt_star, 1.4802, 0.02)
        && opt.nt_star < fd.nt_star;
    verdict(
        pass,
        format!(
            "{} (want 3.5 ms, 5.6897 dB, 1.4802); FD NT* = {:.4}",
            describe(&opt),
            fd.nt_star
        ),
    )
}

fn ts_shape_structure() -> Check {
    let low = scenario(0.5, 0.05, 0.7, 1.0, TxMode::Fdtx, 15.0);
    let p_crit = critical_sensing_power(low.access.p_dat, &low.sensing, &low.sic);
    let above = verify_ts_shape(&low, p_crit * db_to_linear(1.0), 3, Execution::Parallel).map_err(|e| e.to_string())?;
    let below = verify_ts_shape(&low, p_crit * db_to_linear(-1.0), 3, Execution::Parallel).map_err(|e| e.to_string())?;

    let high = scenario(0.5, 0.05, 0.08, 1.0, TxMode::Fdtx, 15.0);
    let mut violations = Vec::new();
    for (name, s, p_db) in [
        ("high-QSIC 5 dB", &high, 5.0),
        ("high-QSIC 10 dB", &high, 10.0),
        ("high-QSIC 4.6552 dB", &high_qsic_fd(), 4.6552),
    ] {
        let d = verify_ts_shape(s, db_to_linear(p_db), 200, Execution::Parallel).map_err(|e| e.to_string())?;
        violations.push((name, d.concavity_violations));
    }
    let pass = above.right_derivative > 0.0
        && below.right_derivative < 0.0
        && violations.iter().all(|(_, v)| *v == 0);
    verdict(
        pass,
        format!(
            "dNT/dT_S at T: {:+.4} above, {:+.4} below critical power; concavity violations {:?}",
            above.right_derivative, below.right_derivative, violations
        ),
    )
}

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let mode = if rng.random::<bool>() { TxMode::Fdtx } else { TxMode::Hdtx };
    let mut s = scenario(
        rng.random_range(0.1..1.0),
        rng.random_range(0.02..0.2),
        rng.random_range(0.01..0.9),
        rng.random_range(0.5..1.0),
        mode,
        15.0,
    );
    s.contention = ContentionParams::standard(rng.random_range(5..60), rng.random_range(0.001..0.02));
    s.access.p_sen = db_to_linear(rng.random_range(-5.0..15.0));
    s.access.t_s = rng.random_range(1e-3..14e-3);
    s
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut configs = vec![high_qsic_fd().with_p_sen(db_to_linear(4.6552))];
    configs.extend((0..5).map(|_| random_scenario(&mut rng)));

    let mut notes = Vec::new();
    let mut pass = true;
    for (i, s) in configs.iter().enumerate() {
        let closed = evaluate(s).map_err(|e| e.to_string())?;
        let sim = simulate(s, &SimConfig::new(1_000_000, 1000 + i as u64)).map_err(|e| e.to_string())?;
        let nt_ok = (sim.nt_estimate - closed.nt).abs() <= 3.0 * sim.nt_std_error + 0.01 * closed.nt;
        let b = [closed.b1, closed.b2, closed.b3];
        let mut worst: f64 = 0.0;
        for (c, (bits, p)) in sim.cases.iter().zip(b.iter().zip(closed.case_probabilities)) {
            let z_joint = (c.bits_per_cycle - bits).abs() / c.bits_per_cycle_se;
            let z_cond = (c.conditional_bits - bits / p).abs() / c.conditional_bits_se;
            worst = worst.max(z_joint).max(z_cond);
        }
        let ok = nt_ok && worst <= 3.0;
        pass &= ok;
        notes.push(format!(
            "#{i}: {:.4} vs {:.4} ± {:.1e}, worst case z = {:.2}{}",
            sim.nt_estimate,
            closed.nt,
            sim.nt_std_error,
            worst,
            if ok { "" } else { " !" }
        ));
    }
    verdict(pass, notes.join("; "))
}

fn baseline_ordering(settings: &OptimizerSettings) -> Check {
    let mut pass_order = true;
    let mut notes = Vec::new();
    let mut single_non_monotone = false;
    for zeta in [0.2, 0.7] {
        let mut singles = Vec::new();
        for p_db in [5.0, 10.0, 15.0, 20.0, 25.0] {
            let s = scenario(0.15, 0.075, zeta, 0.85, TxMode::Fdtx, p_db);
            let c = compare_baselines(&s, settings).map_err(|e| e.to_string())?;
            let ok = c.fdc.nt >= c.single_stage.nt && c.fdc.nt >= c.half_duplex.nt;
            pass_order &= ok;
            singles.push(c.single_stage.nt);
            notes.push(format!(
                "ζ={zeta} P={p_db}: {:.3}/{:.3}/{:.3}{}",
                c.fdc.nt,
                c.single_stage.nt,
                c.half_duplex.nt,
                if ok { "" } else { " !" }
            ));
        }
        if zeta == 0.7 {
            let peak = singles
                .iter()
                .enumerate()
                .fold(0, |b, (i, &v)| if v > singles[b] { i } else { b });
            let rises = singles[..=peak].windows(2).all(|w| w[1] >= w[0]);
            let falls = singles[peak..].windows(2).all(|w| w[1] <= w[0]);
            single_non_monotone = peak > 0 && peak + 1 < singles.len() && rises && falls;
        }
    }
    verdict(
        pass_order && single_non_monotone,
        format!(
            "FDC/single/HD: {}; single-stage rises then falls for ζ=0.7: {single_non_monotone}",
            notes.join(", ")
        ),
    )
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sc = SensingConfig::default();

    let mut boundary_gap: f64 = 0.0;
    for _ in 0..100 {
        let sic = SicModel {
            zeta: rng.random_range(0.0..1.0),
            xi: rng.random_range(0.0..1.0),
        };
        let t_s = rng.random_range(1e-4..15e-3);
        let p_sen = db_to_linear(rng.random_range(-10.0..20.0));
        let eps = rng.random_range(0.5..3.0) * (1.0 + sic.interference(p_sen));
        let p_pu = db_to_linear(rng.random_range(-30.0..0.0));
        let a = detection_p01(eps, t_s, t_s, p_sen, p_pu, &sc, &sic).map_err(|e| e.to_string())?;
        let b = false_alarm_p00(eps, t_s, p_sen, &sc, &sic).map_err(|e| e.to_string())?;
        boundary_gap = boundary_gap.max((a - b).abs());
    }

    let mut round_trip: f64 = 0.0;
    for _ in 0..30 {
        let s = random_scenario(&mut rng);
        let target = rng.random_range(0.3..0.95);
        let eps = calibrate_threshold(s.access.t_s, s.access.p_sen, target, &s.pu, &s.sensing, &s.sic)
            .map_err(|e| e.to_string())?;
        let pd = average_detection(eps, s.access.t_s, s.access.p_sen, &s.pu, &s.sensing, &s.sic)
            .map_err(|e| e.to_string())?;
        round_trip = round_trip.max((pd - target).abs());
    }

    let cp = ContentionParams::standard(40, 0.0022);
    let st = contention_overhead(&cp).map_err(|e| e.to_string())?;
    let q = st.p_coll / (1.0 - st.p_idle);
    let n = 1_000_000;
    let (mut sc_, mut sc2, mut si, mut si2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let mut c = 0.0;
        while rng.random::<f64>() < q {
            c += 1.0;
        }
        let mut i = 0.0;
        while rng.random::<f64>() < st.p_idle {
            i += 1.0;
        }
        sc_ += c;
        sc2 += c * c;
        si += i;
        si2 += i * i;
    }
    let nf = n as f64;
    let (mc, mi) = (sc_ / nf, si / nf);
    let zc = (mc - st.n_coll_bar).abs() / ((sc2 / nf - mc * mc) / nf).sqrt();
    let zi = (mi - st.t_idle_bar).abs() / ((si2 / nf - mi * mi) / nf).sqrt();

    let s = high_qsic_fd().with_p_sen(db_to_linear(4.6552));
    let sim = SimConfig::new(100_000, 31);
    let a = simulate(&s, &sim).map_err(|e| e.to_string())?;
    let b = simulate(&s, &SimConfig { execution: Execution::Sequential, ..sim }).map_err(|e| e.to_string())?;
    let deterministic = a == b;

    verdict(
        boundary_gap <= 1e-12 && round_trip <= 1e-9 && zc <= 3.0 && zi <= 3.0 && deterministic,
        format!(
            "boundary gap {boundary_gap:.1e}, calibration residual {round_trip:.1e}, contention z = ({zc:.2}, {zi:.2}), seed-deterministic {deterministic}"
        ),
    )
}

fn main() -> ExitCode {
    let settings = OptimizerSettings::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, start: Instant, r: Check| {
        let (pass, detail) = match r {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {name} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    report(1, "critical sensing power", t, critical_power());

    let t = Instant::now();
    let fd = optimize_config(&high_qsic_fd(), &settings);
    let fd_check = fd.as_ref().map_err(|e| e.to_string()).and_then(fd_optimum);
    report(2, "high-QSIC FDTx optimum", t, fd_check);

    let t = Instant::now();
    report(3, "low-QSIC boundary optimum", t, low_qsic_boundary(&settings));

    let t = Instant::now();
    let hd = match &fd {
        Ok(fd) => hd_optimum(&settings, fd),
        Err(e) => Err(e.to_string()),
    };
    report(4, "high-QSIC HDTx optimum", t, hd);

    let t = Instant::now();
    report(5, "throughput shape in sensing time", t, ts_shape_structure());

    let t = Instant::now();
    report(6, "closed form vs Monte Carlo", t, oracle_equivalence());

    let t = Instant::now();
    report(7, "baseline ordering", t, baseline_ordering(&settings));

    let t = Instant::now();
    report(8, "property suites", t, property_suites());

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
