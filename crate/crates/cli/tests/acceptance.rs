//! The eight gate checks for the whole toolchain, one test per check.
//! Each prints a single `ACCEPTANCE <n> PASS` line once its assertions
//! hold, so a bare `cargo test --test acceptance -- --nocapture` reads as
//! a checklist. Tolerances are pinned here, not shared with library code.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::process::Command;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cvcluster_core::{
    allowed_processes, comb_g, conserves_orders, dual_rail_nullifiers, edge_weights, lattice_2d,
    macronode_nullifiers, overlap_integral, overlap_integral_with_points, partial_transpose,
    ppt_scan, quadripartite_g, staggering_substitution, supermodes, symplectic_defect,
    symplectic_from_g, time_varying_lattice, BinRange, Component, CovarianceState,
    enumerate_bipartitions, FreqWindow, HGIndex, ModeId, PumpComponent, PumpSpec, QuadratureBasis,
    QuadratureForm, Spatial,
};

/// Margin by which every bipartition must clear the PPT bound away from
/// the separable endpoints.
const PPT_GAP: f64 = 1e-6;
/// How close the surviving endpoint bipartition must sit to exactly 1.
const UNIT_TOL: f64 = 1e-9;
/// Elementwise bound for the sorted-value symmetry under theta mirror.
const SYMMETRY_TOL: f64 = 1e-9;
/// Squeezed-variance agreement with the flat law and the series oracle.
const VARIANCE_TOL: f64 = 1e-9;
/// Terms kept in the series matrix exponential oracle.
const SERIES_TERMS: usize = 30;
/// Edge-weight normalization and endpoint identities.
const NORMALIZATION_TOL: f64 = 1e-12;
/// Term-by-term coefficient agreement of the two macronode pipelines.
const COEFFICIENT_TOL: f64 = 1e-12;
/// Same-bin lattice weights against the analytic a or c value.
const WEIGHT_TOL: f64 = 1e-12;
/// Allowed deviation of S Omega S^T from Omega.
const DEFECT_TOL: f64 = 1e-10;
/// Allowed deviation of pure-state symplectic eigenvalues from 1.
const PURITY_TOL: f64 = 1e-9;
/// Quadrature value stability between two resolutions.
const QUADRATURE_TOL: f64 = 1e-12;

const WINDOW: (i32, i32) = (-2, 4);
const BINS: (i32, i32) = (0, 5);
const PUMPS: (i32, i32) = (1, 3);
const QUARTER: f64 = PI / 4.0;

fn window() -> FreqWindow {
    FreqWindow::new(WINDOW.0, WINDOW.1).unwrap()
}

fn bins() -> BinRange {
    BinRange::new(BINS.0, BINS.1).unwrap()
}

fn dual(theta1: f64, theta2: f64) -> PumpSpec {
    PumpSpec::dual(PUMPS.0, theta1, PUMPS.1, theta2)
}

#[test]
fn criterion_1_ppt_scan_certifies_inseparability_except_at_endpoints() {
    let gamma = 0.1;
    let bipartitions = enumerate_bipartitions(4).unwrap();
    let values = |theta: f64| -> Vec<f64> {
        let scan = ppt_scan(&[theta], gamma).unwrap();
        (0..bipartitions.len()).map(|j| scan.value(0, j)).collect()
    };

    for theta in [PI / 16.0, PI / 8.0, 3.0 * PI / 16.0] {
        for (j, v) in values(theta).iter().enumerate() {
            assert!(
                *v < 1.0 - PPT_GAP,
                "theta {theta}: {} fails the PPT bound at {v}",
                bipartitions[j].label()
            );
        }
    }

    for (theta, survivor) in [(0.0, "13|24"), (QUARTER, "14|23")] {
        for (j, v) in values(theta).iter().enumerate() {
            if bipartitions[j].label() == survivor {
                assert!(
                    (v - 1.0).abs() <= UNIT_TOL,
                    "{survivor} should sit at 1 for theta {theta}, got {v}"
                );
            } else {
                assert!(
                    *v < 1.0 - PPT_GAP,
                    "only {survivor} may touch 1 at theta {theta}; {} is at {v}",
                    bipartitions[j].label()
                );
            }
        }
    }

    for i in 0..=8 {
        let theta = QUARTER * f64::from(i) / 8.0;
        let mut here = values(theta);
        let mut mirrored = values(QUARTER - theta);
        here.sort_by(f64::total_cmp);
        mirrored.sort_by(f64::total_cmp);
        for (l, r) in here.iter().zip(&mirrored) {
            assert!((l - r).abs() <= SYMMETRY_TOL, "mirror asymmetry at theta {theta}: {l} vs {r}");
        }
    }

    println!("ACCEPTANCE 1 PASS: PPT < 1 on all 7 cuts off the endpoints, 13|24 / 14|23 at 1 on them, mirror-symmetric values");
}

fn series_covariance(g: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let n = g.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(g);
    m.view_mut((n, n), (n, n)).copy_from(&(-g));
    let x = m * (2.0 * gamma);
    let mut term = DMatrix::identity(2 * n, 2 * n);
    let mut sum = term.clone();
    for j in 1..SERIES_TERMS {
        term = (&term * &x) / (j as f64);
        sum += &term;
    }
    sum
}

#[test]
fn criterion_2_squeezed_variances_follow_the_flat_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let theta = rng.gen_range(0.0..=QUARTER);
        let graph = quadripartite_g(theta);
        for gamma in [0.05, 0.1, 0.3] {
            let state = CovarianceState::from_graph(&graph, gamma).unwrap();
            let oracle = series_covariance(graph.matrix(), gamma);
            let expected = (-SQRT_2 * gamma).exp();
            let mut squeezed = 0;
            for sm in supermodes(&graph).into_iter().filter(|s| s.is_squeezed()) {
                let variance = state.quadratic_form(&sm.coefficients).unwrap();
                assert!(
                    (variance - expected).abs() <= VARIANCE_TOL,
                    "theta {theta}, gamma {gamma}: variance {variance} vs law {expected}"
                );
                let series = (sm.coefficients.transpose() * &oracle * &sm.coefficients)[(0, 0)];
                assert!(
                    (variance - series).abs() <= VARIANCE_TOL,
                    "theta {theta}, gamma {gamma}: variance {variance} vs series {series}"
                );
                squeezed += 1;
            }
            assert_eq!(squeezed, 4, "the four-mode block squeezes four supermodes");
        }
    }
    println!("ACCEPTANCE 2 PASS: all squeezed supermode variances equal exp(-sqrt(2) gamma) and the 30-term series oracle");
}

#[test]
fn criterion_3_edge_weights_stay_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let t1 = rng.gen_range(0.0..=QUARTER);
        let t2 = rng.gen_range(0.0..=QUARTER);
        let w = edge_weights(t1, t2);
        let sum = w.a * w.a + w.b * w.b + w.c * w.c + w.d * w.d;
        assert!((sum - 1.0).abs() <= NORMALIZATION_TOL, "({t1}, {t2}) sums to {sum}");
    }

    let w = edge_weights(QUARTER, QUARTER);
    assert!((w.r - 1.0).abs() <= NORMALIZATION_TOL);
    assert!((w.b - FRAC_1_SQRT_2).abs() <= NORMALIZATION_TOL);
    assert!((w.d - FRAC_1_SQRT_2).abs() <= NORMALIZATION_TOL);

    let w = edge_weights(0.0, 0.0);
    assert!((w.r - FRAC_1_SQRT_2).abs() <= NORMALIZATION_TOL);
    assert!((w.a - FRAC_1_SQRT_2).abs() <= NORMALIZATION_TOL);
    assert!((w.c - FRAC_1_SQRT_2).abs() <= NORMALIZATION_TOL);

    println!("ACCEPTANCE 3 PASS: a^2+b^2+c^2+d^2 = 1 on 1000 random angle pairs and the endpoint weights are exact");
}

fn shift_to_bin(form: &QuadratureForm, bin: i32) -> QuadratureForm {
    let mut out = QuadratureForm::new();
    for (mode, component, w) in form.terms() {
        assert_eq!(component, Component::Q, "wire nullifiers are Q-only");
        out.add_q(ModeId::at_bin(mode.spatial, mode.freq, bin), w);
    }
    out
}

/// A wire nullifier pushed through the staggering substitution at `bin`,
/// on the sqrt(2) scale the staggered generators use.
fn staggered_wire(form: &QuadratureForm, bin: i32) -> QuadratureForm {
    let mut out = staggering_substitution(&shift_to_bin(form, bin)).unwrap();
    out.scale(SQRT_2);
    out
}

fn find_wire(forms: &[QuadratureForm], spatial: Spatial, freq: i32) -> &QuadratureForm {
    forms
        .iter()
        .find(|f| f.coefficient(ModeId::new(spatial, freq), Component::Q) == 1.0)
        .expect("one wire nullifier per rail and frequency")
}

#[test]
fn criterion_4_macronode_closed_forms_match_the_mechanical_pipeline() {
    let bins = BinRange::new(0, 3).unwrap();
    let k = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut pairs = vec![(0.0, 0.0), (0.0, QUARTER), (QUARTER, 0.0), (QUARTER, QUARTER)];
    for _ in 0..10 {
        pairs.push((rng.gen_range(0.0..=QUARTER), rng.gen_range(0.0..=QUARTER)));
    }

    for (t1, t2) in pairs {
        let pump = dual(t1, t2);
        let wires = dual_rail_nullifiers(&pump, window()).unwrap();
        let mset = macronode_nullifiers(&pump, window(), bins).unwrap();
        let mut checked = 0;
        for (i, mac) in mset.macronodes.iter().enumerate() {
            if mac.bin() != k {
                continue;
            }
            let xh = find_wire(&wires.forms, Spatial::H, mac.freq());
            let xv = find_wire(&wires.forms, Spatial::V, mac.freq());

            let mut plus = staggered_wire(xv, k - 1);
            plus.add_scaled(&staggered_wire(xh, k), 1.0);
            plus.scale(0.5);
            let mut minus = staggered_wire(xv, k - 1);
            minus.add_scaled(&staggered_wire(xh, k), -1.0);
            minus.scale(0.5);

            let dp = mset.forms[2 * i].max_coefficient_diff(&plus);
            let dm = mset.forms[2 * i + 1].max_coefficient_diff(&minus);
            assert!(dp <= COEFFICIENT_TOL, "({t1}, {t2}) n={} X+: diff {dp}", mac.freq());
            assert!(dm <= COEFFICIENT_TOL, "({t1}, {t2}) n={} X-: diff {dm}", mac.freq());
            checked += 1;
        }
        assert_eq!(checked, 5, "five frequencies host a macronode at bin {k}");
    }
    println!("ACCEPTANCE 4 PASS: closed-form macronode nullifiers equal substitute-then-recombine on 14 angle pairs");
}

#[test]
fn criterion_5_lattice_topologies_match_the_angle_table() {
    let lat = |t1, t2| lattice_2d(&dual(t1, t2), window(), bins()).unwrap();

    let bilayer = lat(QUARTER, QUARTER);
    assert_eq!(
        bilayer.bulk_graph().connected_components().len(),
        2,
        "both-quarter pump splits the bulk into two square layers"
    );

    for (t1, t2) in [(0.0, QUARTER), (QUARTER, 0.0)] {
        let hex = lat(t1, t2);
        let w = edge_weights(t1, t2);
        let expected = if t1 == 0.0 { w.a } else { w.c };
        let g = hex.bulk_graph();
        assert!(
            g.edges().iter().any(|e| e.u.time != e.v.time),
            "({t1}, {t2}): some edge joins distinct bins"
        );
        let mut same_bin = 0;
        for e in g.edges().iter().filter(|e| e.u.time == e.v.time) {
            assert!(
                (e.weight.abs() - expected).abs() <= WEIGHT_TOL,
                "({t1}, {t2}): same-bin edge at {} instead of {expected}",
                e.weight
            );
            same_bin += 1;
        }
        assert!(same_bin > 0, "({t1}, {t2}): hexagonal pattern keeps same-bin couplings");
    }

    let diagonal = lat(0.0, 0.0);
    assert!(
        diagonal.graph.edges().iter().all(|e| e.u.time == e.v.time),
        "zero angles leave the bins uncoupled"
    );

    println!("ACCEPTANCE 5 PASS: bilayer-square, hexagonal, and bin-diagonal topologies appear at their angles");
}

fn alternating_pump(even: (f64, f64), odd: (f64, f64)) -> PumpSpec {
    let mut map1 = BTreeMap::new();
    let mut map2 = BTreeMap::new();
    for k in BINS.0..=BINS.1 + 1 {
        let (t1, t2) = if k.rem_euclid(2) == 0 { even } else { odd };
        map1.insert(k, t1);
        map2.insert(k, t2);
    }
    PumpSpec {
        components: vec![
            PumpComponent::new(PUMPS.0, 0.0).with_schedule(map1),
            PumpComponent::new(PUMPS.1, 0.0).with_schedule(map2),
        ],
    }
}

/// Edges whose earliest endpoint sits in `bin`, rebased to that bin, with
/// exact weights. Equal fingerprints two bins apart mean the graph repeats
/// with period 2.
fn bin_fingerprint(
    graph: &cvcluster_core::ClusterGraph,
    bin: i32,
) -> Vec<(i32, char, i32, i32, char, i32, u64)> {
    let mut out: Vec<_> = graph
        .edges()
        .iter()
        .filter(|e| e.u.time.min(e.v.time) == bin)
        .map(|e| {
            (
                e.u.freq,
                e.u.spatial.letter(),
                e.u.time - bin,
                e.v.freq,
                e.v.spatial.letter(),
                e.v.time - bin,
                e.weight.to_bits(),
            )
        })
        .collect();
    out.sort_unstable();
    out
}

fn bulk_weight_multiset(lat: &cvcluster_core::Lattice) -> Vec<String> {
    let mut out: Vec<String> = lat
        .bulk_graph()
        .edges()
        .iter()
        .map(|e| format!("{:.9e}", e.weight.abs()))
        .collect();
    out.sort_unstable();
    out
}

#[test]
fn criterion_6_time_varying_schedules_repeat_and_differ() {
    let hex_hex = alternating_pump((0.0, QUARTER), (QUARTER, 0.0));
    let hex_square = alternating_pump((0.0, QUARTER), (QUARTER, QUARTER));

    // One extra bin so that bins 1..=4 all have complete neighborhoods;
    // the macronode pair at the top bin needs its successor in range.
    let deep = BinRange::new(0, 6).unwrap();
    for (name, pump) in [("hex/hex", &hex_hex), ("hex/square", &hex_square)] {
        let lat = time_varying_lattice(pump, window(), deep).unwrap();
        let sig = |k| bin_fingerprint(&lat.graph, k);
        assert_eq!(sig(1), sig(3), "{name}: interior bins repeat with period 2");
        assert_eq!(sig(2), sig(4), "{name}: interior bins repeat with period 2");
        assert_ne!(sig(1), sig(2), "{name}: adjacent bins differ, so the period is exactly 2");
    }

    let wa = bulk_weight_multiset(&time_varying_lattice(&hex_hex, window(), bins()).unwrap());
    let wb = bulk_weight_multiset(&time_varying_lattice(&hex_square, window(), bins()).unwrap());
    assert_ne!(wa, wb, "the two schedules leave different bulk edge-weight multisets");

    // Constant schedule through the time-varying path, byte for byte
    // against the static lattice, at the command-line level.
    let bin = env!("CARGO_BIN_EXE_cvcluster");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("constant.toml");
    std::fs::write(
        &config,
        concat!(
            "schedule_period = 1\n",
            "[[schedule]]\n",
            "bin = 0\n",
            "theta1 = \"0.125pi\"\n",
            "theta2 = \"0.25pi\"\n",
        ),
    )
    .unwrap();
    let static_out = dir.path().join("static.json");
    let varying_out = dir.path().join("varying.json");
    let status = Command::new(bin)
        .args(["lattice", "--theta1", "0.125pi", "--theta2", "0.25pi", "--out"])
        .arg(&static_out)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(bin)
        .args(["time-varying", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&varying_out)
        .status()
        .unwrap();
    assert!(status.success());
    let static_bytes = std::fs::read(&static_out).unwrap();
    let varying_bytes = std::fs::read(&varying_out).unwrap();
    assert!(!static_bytes.is_empty());
    assert_eq!(static_bytes, varying_bytes, "constant schedule must reproduce the static file");

    println!("ACCEPTANCE 6 PASS: period-2 alternation, byte-identical constant schedule, non-isomorphic bulk patterns");
}

#[test]
fn criterion_7_gaussian_core_contracts_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);

    let comb = comb_g(&dual(PI / 8.0, PI / 8.0), window()).unwrap();
    let mut graphs = vec![comb.graph];
    for _ in 0..8 {
        graphs.push(quadripartite_g(rng.gen_range(0.0..=QUARTER)));
    }

    for graph in &graphs {
        let gamma = rng.gen_range(0.0..=0.5);
        let s = symplectic_from_g(graph, gamma).unwrap();
        let defect = symplectic_defect(&s).unwrap();
        assert!(defect <= DEFECT_TOL, "defect {defect}");

        let state = CovarianceState::from_graph(graph, gamma).unwrap();
        for nu in state.symplectic_eigenvalues().unwrap() {
            assert!((nu - 1.0).abs() <= PURITY_TOL, "eigenvalue {nu} breaks purity");
        }

        let v = state.matrix();
        for subset in [vec![0], vec![1, 2], vec![0, graph.dim() - 1]] {
            let pt = partial_transpose(v, &subset).unwrap();
            let back = partial_transpose(&pt, &subset).unwrap();
            assert_eq!(&back, v, "partial transpose must be an exact involution");
        }
    }

    let basis = QuadratureBasis::new(vec![
        ModeId::new(Spatial::H, 0),
        ModeId::new(Spatial::V, 0),
        ModeId::new(Spatial::H, 1),
    ])
    .unwrap();
    let dim = basis.dim();
    let vacuum = CovarianceState::vacuum(basis);
    assert_eq!(vacuum.matrix(), &DMatrix::identity(dim, dim), "vacuum is the exact identity");

    let frozen = CovarianceState::from_graph(&quadripartite_g(0.3), 0.0).unwrap();
    assert_eq!(frozen.matrix(), &DMatrix::identity(8, 8), "gamma 0 returns the exact identity");

    println!("ACCEPTANCE 7 PASS: symplectic defect, purity, involutive partial transpose, and exact vacuum identities hold");
}

#[test]
fn criterion_8_selection_rules_match_the_parity_fast_path() {
    let h = Spatial::H.hg();
    let v = Spatial::V.hg();
    let pumps = [HGIndex::new(2, 0), HGIndex::new(1, 1), HGIndex::new(0, 2)];
    let pairs = [(h, h), (h, v), (v, v)];
    let allowed = allowed_processes(2).unwrap();
    assert_eq!(allowed.len(), 3);

    for pump in pumps {
        for (signal, idler) in pairs {
            let value = overlap_integral(pump, signal, idler).unwrap();
            let parity_even = (pump.m + signal.m + idler.m) % 2 == 0
                && (pump.n + signal.n + idler.n) % 2 == 0;

            if parity_even {
                assert!(value != 0.0, "{pump} -> ({signal}, {idler}) is parity-even, overlap must not vanish");
            } else {
                assert!(
                    value == 0.0 && value.to_bits() == 0,
                    "{pump} -> ({signal}, {idler}) is parity-forbidden, overlap must vanish exactly"
                );
            }

            let fine = overlap_integral_with_points(pump, signal, idler, 96).unwrap();
            assert!(
                (value - fine).abs() <= QUADRATURE_TOL,
                "{pump} -> ({signal}, {idler}): quadrature not converged, {value} vs {fine}"
            );

            let selected = allowed.iter().any(|p| {
                p.pump == pump
                    && ((p.signal, p.idler) == (signal, idler)
                        || (p.signal, p.idler) == (idler, signal))
            });
            if selected {
                assert!(conserves_orders(pump, signal, idler));
                assert!(parity_even, "every selected channel passes the parity fast path");
                assert!(value.abs() > 1e-3, "selected channel has a solid overlap, got {value}");
            }
        }
    }

    println!("ACCEPTANCE 8 PASS: parity-forbidden overlaps vanish exactly; the three selected channels are nonzero and parity-allowed");
}
