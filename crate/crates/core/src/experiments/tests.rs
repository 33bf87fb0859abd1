use super::*;
use crate::net::init_dgm;

fn constant_net(in_dim: usize, out_dim: usize, value: f64) -> DgmParams {
    let mut p = init_dgm(in_dim, out_dim, 3, 1, 0).unwrap();
    p.theta.iter_mut().for_each(|x| *x = 0.0);
    let n = p.len();
    p.theta[n - out_dim..].iter_mut().for_each(|x| *x = value);
    p
}

fn small_config(problem: &str, dir: &Path) -> String {
    format!(
        r#"{{"problem": "{problem}", "scheme": "all", "q": 3, "N": 2, "epochs": 1, "lr": 1e-3,
            "batch": 4, "seed": 5, "outputs": "{}", "width": 3, "depth": 1, "grid": 16,
            "diagnostic_times": 3}}"#,
        dir.display()
    )
}

#[test]
fn conserved_quantities_by_hand() {
    let p = constant_net(3, 1, 0.42);
    assert!((total_heat(&p, 0.3, 32).unwrap() - 0.42).abs() < 1e-13);
    let z = constant_net(3, 2, 0.0);
    assert_eq!(wave_energy(&z, 0.5, 0.7, 16).unwrap(), 0.0);
    assert!(wave_energy(&p, 0.5, 0.7, 16).is_err());

    let e = wave_energy_of(
        |x| {
            let (sx, cx) = (PI * x[0]).sin_cos();
            let (sy, cy) = (PI * x[1]).sin_cos();
            Ok((0.0, vec![PI * cx * sy, PI * sx * cy]))
        },
        0.5,
        2,
        256,
    )
    .unwrap();
    let want = PI * PI / 16.0;
    assert!((e / want - 1.0).abs() < 1e-3, "{e} vs {want}");
}

#[test]
fn wave_coefficients() {
    let r = WaveReference::from_initial(|x, y| (PI * x).sin() * (PI * y).sin(), 0.5, 8, ModeCount::PerIndex, 50);
    assert!((r.coefficient(1, 1).unwrap() - 1.0).abs() < 1e-12);
    for &(m, n, a) in &r.terms {
        if (m, n) != (1, 1) {
            assert!(a.abs() <= 1e-6, "A_{m}{n} = {a}");
        }
    }
    let zero = WaveReference::from_initial(|_, _| 0.0, 0.5, 8, ModeCount::PerIndex, 10);
    assert_eq!(zero.eval(0.3, 0.4, 0.9), 0.0);

    // polar-coordinate adaptive quadrature of the disk initial value
    let w = WaveReference::new(&ProblemSpec::new(ProblemKind::Wave2d), 8, ModeCount::PerIndex);
    assert_eq!(w.terms.len(), 64);
    assert!((w.coefficient(1, 1).unwrap() - 0.17576639059983973).abs() <= 1e-6);
    assert!((w.coefficient(2, 3).unwrap() + 0.1362578072977591).abs() <= 1e-6);
    assert!((w.coefficient(2, 1).unwrap() - 0.18505251494486977).abs() <= 1e-6);
    // symmetric about y = 1/2
    assert!(w.coefficient(3, 2).unwrap().abs() <= 1e-6);

    let t = WaveReference::new(&ProblemSpec::new(ProblemKind::Wave2d), 8, ModeCount::Total);
    assert_eq!(t.terms.len(), 8);
    assert_eq!(
        &t.terms[..3].iter().map(|t| (t.0, t.1)).collect::<Vec<_>>(),
        &[(1, 1), (1, 2), (2, 1)]
    );
}

#[test]
fn heat_reference() {
    let prob = ProblemSpec::new(ProblemKind::Heat2d);
    let r = HeatReference::new(&prob, 48);
    // ∫ u0 = π/200 - 1/(50π)
    let mass = PI / 200.0 - 1.0 / (50.0 * PI);
    assert!((r.coeffs[0][0] - mass).abs() < 1e-7, "{}", r.coeffs[0][0]);
    // Neumann: total heat stays put while the profile flattens
    assert!((r.eval(0.6, 0.7, 0.0) - 1.0).abs() < 0.05);
    assert!(r.eval(0.6, 0.7, 1.0) < 0.2);
    let heat = |t: f64| {
        let m = midpoints(64);
        m.iter()
            .flat_map(|&x| m.iter().map(move |&y| (x, y)))
            .map(|(x, y)| r.eval(x, y, t))
            .sum::<f64>()
            / 4096.0
    };
    assert!((heat(0.5) - mass).abs() < 1e-6);
}

#[test]
fn misfit_grid() {
    let z = constant_net(3, 1, 0.0);
    let rows = misfit_field(&z, &|_, _| 0.0, 1.0, 16).unwrap();
    assert_eq!(rows.len(), 256);
    assert!(rows.iter().all(|r| r[2] == 0.0));
    let mut buf = Vec::new();
    write_misfit_csv(&rows, "# rkpinn v0 seed=1", &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 256 + 2);
    assert_eq!(text.lines().nth(1), Some("x,y,misfit"));

    let p = constant_net(3, 1, 0.25);
    let rows = misfit_field(&p, &|_, _| 0.25, 1.0, 16).unwrap();
    assert!(rows.iter().all(|r| r[2] == 0.0));
}

#[test]
fn config_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&small_config("heat2d", dir.path())).unwrap();
    assert_eq!(cfg.schemes().len(), 4);
    assert_eq!(cfg.problem_spec().coeff, 0.02);

    let one = small_config("wave2d", dir.path()).replace(r#""scheme": "all""#, r#""scheme": "lobatto""#);
    assert_eq!(
        ExperimentConfig::from_json(&one).unwrap().schemes(),
        vec![SchemeName::Lobatto]
    );
    let many = small_config("wave2d", dir.path()).replace(r#""scheme": "all""#, r#""scheme": ["gauss", "uniform"]"#);
    assert_eq!(
        ExperimentConfig::from_json(&many).unwrap().schemes(),
        vec![SchemeName::Gauss, SchemeName::Uniform]
    );

    let err = |text: String| match ExperimentConfig::from_json(&text) {
        Err(Error::Config(m)) => m,
        other => panic!("{other:?}"),
    };
    let m = err(small_config("heat2d", dir.path()).replace(r#""lr""#, r#""learning_rate""#));
    assert!(m.contains("learning_rate"), "{m}");
    let m = err(small_config("heat2d", dir.path()).replace(r#""scheme": "all""#, r#""scheme": "euler""#));
    assert!(m.contains("scheme"), "{m}");
    let m = err(small_config("heat3d", dir.path()));
    assert!(m.contains("heat3d") && m.contains("line"), "{m}");
    let m = err(small_config("heat2d", dir.path()).replace(r#""grid": 16"#, r#""grid": 8"#));
    assert!(m.contains("grid"), "{m}");
}

#[test]
fn heat_smoke_run_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&small_config("heat2d", dir.path())).unwrap();
    let s = run_experiment(&cfg).unwrap();
    assert_eq!(s.results.len(), 4);
    for label in ["gauss3", "lobatto3", "radau3", "uniform"] {
        let hist = fs::read_to_string(dir.path().join(format!("{label}_history.csv"))).unwrap();
        assert_eq!(hist.lines().count(), 3, "{label}");
        assert_eq!(
            hist.lines().next(),
            Some(format!("# rkpinn v{} seed=5", crate::VERSION).as_str())
        );
        let diag = fs::read_to_string(dir.path().join(format!("{label}_diagnostic.csv"))).unwrap();
        assert_eq!(diag.lines().nth(1), Some("t,total_heat"));
        assert_eq!(diag.lines().count(), 2 + 3);
        let mis = fs::read_to_string(dir.path().join(format!("{label}_misfit.csv"))).unwrap();
        assert_eq!(mis.lines().count(), 2 + 256);
        assert!(dir.path().join(format!("{label}.ckpt")).exists());
        assert!(s.get(label).unwrap().drift.is_finite());
    }
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2 + 4);
}

#[test]
fn wave_and_baseline_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(&small_config("wave2d", dir.path())).unwrap();
    cfg.epochs = 0;
    let s = uniform_time_baseline(&cfg).unwrap();
    assert_eq!(s.results.len(), 1);
    assert!(s.get("uniform").unwrap().final_loss.is_nan());
    let diag = fs::read_to_string(dir.path().join("uniform_diagnostic.csv")).unwrap();
    assert!(diag.starts_with(&format!(
        "# rkpinn v{} seed=5 modes=8 mode_count=per_index\nt,wave_energy",
        crate::VERSION
    )));
}

#[test]
fn discontinuous_heat_reports_smoothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(&small_config("heat2d_discontinuous", dir.path())).unwrap();
    cfg.set_schemes(&[SchemeName::Radau]);
    let s = run_experiment(&cfg).unwrap();
    assert!(s.results[0].smoothing_tv.unwrap() >= 0.0);

    let mut cfg = ExperimentConfig::from_json(&small_config("heat1d", dir.path())).unwrap();
    cfg.set_schemes(&[SchemeName::Gauss]);
    let s = run_experiment(&cfg).unwrap();
    assert!(s.results[0].rel_l2.unwrap() > 0.0);
    let mis = fs::read_to_string(dir.path().join("gauss3_misfit.csv")).unwrap();
    assert_eq!(mis.lines().nth(1), Some("x,misfit"));
}
