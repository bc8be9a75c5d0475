//! End-to-end acceptance checks. Each test covers one acceptance criterion
//! and prints a single `ACCEPTANCE <k> PASS` line on success; a failed
//! assertion marks the criterion failed.

use gkm_crystal::cartan::{builtin, RootVec};
use gkm_crystal::crystal::{
    graph_isomorphic, tensor_crystal_combinatorial, CrystalGraph, ExtInt, TensorModule,
};
use gkm_crystal::freealg::{UmAlgebra, Word};
use gkm_crystal::global::{balanced_check, global_basis_v};
use gkm_crystal::harness::{SuiteConfig, SuiteReport};
use gkm_crystal::modrep::{build_crystal, CrystalData, HwModule};
use gkm_crystal::qarith::{DvrLattice, QMatrix, Rat, ScalarQ};
use gkm_crystal::vrep::VModule;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn pass(criterion: u32, summary: &str) {
    println!("ACCEPTANCE {criterion} PASS: {summary}");
}

/// Rank-1 real highest-weight crystals are single chains with the closed-form
/// string data: λ(h) = m gives m+1 nodes, ε(l-th) = l, φ = m − l, wt = m − 2l.
#[test]
fn criterion_1_rank_one_real_chains() {
    let start = Instant::now();
    for m in 0..=5i64 {
        let vm = VModule::new(builtin("sl2").unwrap(), vec![m], m + 1).unwrap();
        let graph = vm.crystal().unwrap().graph;
        assert_eq!(graph.nodes.len() as i64, m + 1, "m={m}: node count");
        assert_eq!(graph.edges.len() as i64, m, "m={m}: edge count");
        for (l, node) in graph.nodes.iter().enumerate() {
            let l = l as i64;
            assert_eq!(node.alpha, vec![l], "m={m} l={l}: level");
            assert_eq!(node.eps, vec![l], "m={m} l={l}: ε");
            assert_eq!(node.phi, vec![ExtInt::Fin(m - l)], "m={m} l={l}: φ");
            assert_eq!(node.wt, vec![m - 2 * l], "m={m} l={l}: weight");
        }
        for (l, edge) in graph.edges.iter().enumerate() {
            assert_eq!((edge.src, edge.dst, edge.i), (l, l + 1, 0), "m={m}: chain edge");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "rank-1 chains must finish within 1s");
    pass(1, "rank-1 real crystals are chains with ε=l, φ=m−l, wt=m−2l for m=0..5");
}

/// Rank-1 imaginary: zero pairing gives the singleton crystal; positive
/// pairing gives an infinite chain (truncated) with ε = l and φ ≡ ∞.
#[test]
fn criterion_2_rank_one_imaginary_chains() {
    let start = Instant::now();
    let datum = builtin("imag2").unwrap();
    let trivial = VModule::new(datum.clone(), vec![0], 3).unwrap().crystal().unwrap().graph;
    assert_eq!(trivial.nodes.len(), 1, "λ(h)=0: singleton crystal");
    assert!(trivial.edges.is_empty(), "λ(h)=0: no edges");

    let chain = VModule::new(datum, vec![3], 6).unwrap().crystal().unwrap().graph;
    assert_eq!(chain.nodes.len(), 7, "λ(h)=3 depth 6: seven nodes");
    assert_eq!(chain.edges.len(), 6, "λ(h)=3 depth 6: six edges");
    for (l, node) in chain.nodes.iter().enumerate() {
        assert_eq!(node.eps, vec![l as i64], "l={l}: ε");
        assert_eq!(node.phi, vec![ExtInt::Inf], "l={l}: φ must be ∞");
    }
    for (l, edge) in chain.edges.iter().enumerate() {
        assert_eq!((edge.src, edge.dst, edge.i), (l, l + 1, 0));
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "imaginary chains must finish within 1s");
    pass(2, "rank-1 imaginary crystals: singleton at λ(h)=0, ∞-φ chain at λ(h)=3");
}

/// Weight-space dimensions from the exact Gram rank agree with the rank
/// specialized at random rational q and with the crystal cardinality, for
/// all |α| ≤ 4 on the rank-2 and rank-3 data. Runs through the CLI so the
/// spot-check path is exercised end to end.
#[test]
fn criterion_3_dimensions_match_specializations_and_crystal_counts() {
    let start = Instant::now();
    for (datum, lambda) in [("gkm2", "1,1"), ("monster3", "1,1,0")] {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_gkm"))
            .args([
                "dims",
                "--datum",
                datum,
                "--lambda",
                lambda,
                "--depth",
                "4",
                "--spot-check",
                "--seed",
                "42",
            ])
            .output()
            .expect("dims subcommand runs");
        assert!(
            out.status.success(),
            "{datum}: dims --spot-check exited nonzero: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8(out.stdout).unwrap();
        let mut rows = 0;
        for line in stdout.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let dim: usize = fields[fields.len() - 3].parse().unwrap();
            let count: usize = fields[fields.len() - 2].parse().unwrap();
            let specialized: usize = fields[fields.len() - 1].parse().unwrap();
            assert_eq!(dim, count, "{datum} row {line}: dimension vs crystal count");
            assert_eq!(dim, specialized, "{datum} row {line}: dimension vs specialized rank");
            rows += 1;
        }
        assert!(rows > 10, "{datum}: expected a nontrivial dimension table");
    }
    assert!(start.elapsed().as_secs() < 120, "dimension cross-check must finish within 2min");
    pass(3, "exact Gram ranks equal specialized ranks and crystal counts for |α| ≤ 4");
}

fn tensor_graphs(name: &str, lam: &[i64], mu: &[i64], depth: i64) -> (CrystalGraph, CrystalGraph) {
    let datum = builtin(name).unwrap();
    let tensor = TensorModule::new(&datum, lam, mu, depth).unwrap();
    let (g1, g2) = tensor.factor_data();
    let comb = tensor_crystal_combinatorial(&datum, &g1.graph, &g2.graph, depth).unwrap();
    let alg = tensor.crystal().unwrap().graph;
    (comb, alg)
}

/// The combinatorial tensor-product crystal coincides with the crystal
/// computed from the tensor module, as a label-preserving graph isomorphism.
#[test]
fn criterion_4_tensor_rule_matches_algebraic_crystal() {
    let start = Instant::now();
    let cases: [(&str, Vec<i64>, Vec<i64>); 4] = [
        ("sl2", vec![1], vec![1]),
        ("gkm2", vec![1, 1], vec![0, 1]),
        ("monster3", vec![1, 0, 0], vec![0, 0, 1]),
        ("monster3", vec![0, 1, 0], vec![1, 0, 0]),
    ];
    for (name, lam, mu) in cases {
        let (comb, alg) = tensor_graphs(name, &lam, &mu, 3);
        let outcome = graph_isomorphic(&comb, &alg);
        assert!(
            outcome.isomorphic(),
            "{name} λ={lam:?} μ={mu:?}: {}",
            outcome.discrepancy.unwrap_or_default()
        );
    }
    assert!(start.elapsed().as_secs() < 120, "tensor comparison must finish within 2min");
    pass(4, "combinatorial and algebraic tensor crystals are isomorphic at depth 3");
}

/// String-count identity: dim (f_iⁿ V(λ))_{λ−α} equals the number of crystal
/// elements at α with ε_i ≥ n, for |α| ≤ 4 and n ≤ 3.
#[test]
fn criterion_5_string_count_identity() {
    let datum = builtin("gkm2").unwrap();
    let vm = VModule::new(datum.clone(), vec![1, 1], 4).unwrap();
    let data = vm.crystal().unwrap();
    let mut checked = 0;
    for alpha in datum.alphas_to_depth(4) {
        for i in 0..datum.n() {
            for n in 1..=3i64 {
                let image_dim = match alpha.minus_n(i, n) {
                    None => 0,
                    Some(src) => {
                        let mut level = src.clone();
                        let mut mat = QMatrix::identity(HwModule::dim(&vm, &src).unwrap());
                        for _ in 0..n {
                            mat = vm.f_mat(i, &level).unwrap().mul(&mat);
                            level = level.plus(i);
                        }
                        mat.rank()
                    }
                };
                let count = data
                    .graph
                    .nodes
                    .iter()
                    .filter(|b| b.alpha == alpha.0 && b.eps[i] >= n)
                    .count();
                assert_eq!(
                    image_dim, count,
                    "α={alpha} i={i} n={n}: image dimension vs ε-count"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 50);
    pass(5, "dim(f_iⁿV(λ)) at each weight equals #{{b : ε_i(b) ≥ n}} for |α| ≤ 4, n ≤ 3");
}

/// Global bases: closed forms in rank 1 (divided powers for a real index,
/// plain powers for an imaginary one), and in rank 2 every element passes
/// its certificates with the per-weight balancedness check.
#[test]
fn criterion_6_global_bases() {
    let start = Instant::now();
    // Rank-1 real: G(b_l) = f^(l) v, a single unit coefficient on the
    // divided word.
    let vm = VModule::new(builtin("sl2").unwrap(), vec![3], 3).unwrap();
    let data = vm.crystal().unwrap();
    let basis = global_basis_v(&vm, &data, 10).unwrap();
    assert_eq!(basis.elements.len(), 4);
    for (l, e) in basis.elements.iter().enumerate() {
        assert_eq!(e.divided_coeffs.len(), 1, "sl2 l={l}: single divided word");
        let (w, c) = &e.divided_coeffs[0];
        assert_eq!(*w, Word::repeated(0, l), "sl2 l={l}: divided power");
        assert!(c.is_one(), "sl2 l={l}: unit coefficient");
    }
    // Rank-1 imaginary: G(b_l) = f^l v (no divided-power normalization).
    let vm = VModule::new(builtin("imag2").unwrap(), vec![1], 4).unwrap();
    let data = vm.crystal().unwrap();
    let basis = global_basis_v(&vm, &data, 10).unwrap();
    assert_eq!(basis.elements.len(), 5);
    for (l, e) in basis.elements.iter().enumerate() {
        assert_eq!(e.divided_coeffs.len(), 1, "imag2 l={l}: single word");
        let (w, c) = &e.divided_coeffs[0];
        assert_eq!(*w, Word::repeated(0, l), "imag2 l={l}: plain power");
        assert!(c.is_one(), "imag2 l={l}: unit coefficient");
    }
    // Rank 2: certificates and balancedness at every weight.
    let vm = VModule::new(builtin("gkm2").unwrap(), vec![1, 1], 3).unwrap();
    let data = vm.crystal().unwrap();
    let basis = global_basis_v(&vm, &data, 10).unwrap();
    assert!(!basis.elements.is_empty());
    for e in &basis.elements {
        assert!(
            e.certificates.all_pass(),
            "gkm2 node {}: certificates {:?}",
            e.node_id,
            e.certificates
        );
    }
    for (alpha, residues) in &data.nodes {
        let report = balanced_check(
            vm.v_basis(alpha).unwrap(),
            &data.lattices[alpha],
            residues,
            &basis,
            alpha,
        );
        assert!(report.passed(), "gkm2 level {alpha}: {:?}", report.failures);
    }
    assert!(start.elapsed().as_secs() < 300, "global bases must finish within 5min");
    pass(6, "global bases match closed forms in rank 1 and certify + balance in rank 2");
}

fn assert_all_nonvacuous_and_clean(report: &SuiteReport) {
    for case in &report.cases {
        assert!(!case.negative_control);
        for rep in &case.reports {
            assert!(rep.instances > 0, "{} {}: vacuous", case.datum, rep.id);
            assert_eq!(
                rep.failure_count, 0,
                "{} {}: {:?}",
                case.datum, rep.id, rep.failures
            );
        }
        assert!(case.passed);
    }
    assert!(report.passed);
}

/// The fifteen interlocking statements hold with nonzero instance counts on
/// all four standard data at depth 3, and a corrupted lattice is caught
/// with an explicit witness.
#[test]
fn criterion_7_statement_suite_and_negative_control() {
    let start = Instant::now();
    let report = gkm_crystal::harness::run_suite(&SuiteConfig::default_config()).unwrap();
    assert_all_nonvacuous_and_clean(&report);

    let control = SuiteConfig::from_path(std::path::Path::new(
        "../../fixtures/negative-control.toml",
    ))
    .unwrap();
    let control_report = gkm_crystal::harness::run_suite(&control).unwrap();
    let case = &control_report.cases[0];
    assert!(case.negative_control);
    assert!(case.corruption.is_some());
    let witnesses: Vec<&String> =
        case.reports.iter().flat_map(|r| r.failures.iter()).collect();
    assert!(!witnesses.is_empty(), "the corrupted lattice must produce a witness");
    assert!(witnesses.iter().all(|w| !w.is_empty()));
    assert!(case.passed, "a control case passes exactly by failing");
    assert!(control_report.passed);
    assert!(
        start.elapsed().as_secs() < 600,
        "statement suite must finish within 10min"
    );
    pass(7, "statements A–O pass nonvacuously on all four data; the control is caught");
}

fn form_at_zero(gram_basis: &QMatrix, lattice: &DvrLattice) -> Vec<Vec<Rat>> {
    let b = QMatrix::from_cols(lattice.basis().to_vec(), gram_basis.rows());
    b.transpose().mul(&gram_basis.mul(&b)).eval0().expect("lattice form is regular at 0")
}

fn check_crystal_limit_gram(data: &CrystalData, gram0: &[(RootVec, Vec<Vec<Rat>>)], unit: bool) {
    for (alpha, f0) in gram0 {
        let nodes = &data.nodes[alpha];
        for (k, rk) in nodes.iter().enumerate() {
            for (l, rl) in nodes.iter().enumerate() {
                let mut value = Rat::zero();
                for (a, ra) in rk.iter().enumerate() {
                    for (b, rb) in rl.iter().enumerate() {
                        value += ra * rb * &f0[a][b];
                    }
                }
                if k != l {
                    assert!(value.is_zero(), "level {alpha} ({k},{l}): off-diagonal {value}");
                } else {
                    assert!(value.is_integer(), "level {alpha} ({k}): non-integer {value}");
                    assert!(value > Rat::zero(), "level {alpha} ({k}): non-positive {value}");
                    if unit {
                        assert!(value.is_one(), "level {alpha} ({k}): expected 1, got {value}");
                    }
                }
            }
        }
    }
}

/// The crystal-limit Gram matrix is diagonal with positive integer entries
/// on B(λ) and B(∞), and is the identity whenever no diagonal Cartan entry
/// vanishes.
#[test]
fn criterion_8_crystal_limit_orthogonality() {
    let weights: [(&str, Vec<i64>); 5] = [
        ("sl2", vec![2]),
        ("heis", vec![1]),
        ("imag2", vec![1]),
        ("gkm2", vec![1, 1]),
        ("monster3", vec![1, 1, 0]),
    ];
    for (name, lam) in weights {
        let datum = builtin(name).unwrap();
        let unit = (0..datum.n()).all(|i| datum.a(i, i) != 0);
        // Highest-weight side.
        let vm = VModule::new(datum.clone(), lam, 3).unwrap();
        let data = vm.crystal().unwrap();
        let gram0: Vec<(RootVec, Vec<Vec<Rat>>)> = data
            .lattices
            .iter()
            .map(|(a, l)| (a.clone(), vm.lattice_form_at_zero(l, a).unwrap()))
            .collect();
        check_crystal_limit_gram(&data, &gram0, unit);
        // Negative-half side.
        let um = UmAlgebra::new(datum, 3).unwrap();
        let data = build_crystal(&um).unwrap();
        let gram0: Vec<(RootVec, Vec<Vec<Rat>>)> = data
            .lattices
            .iter()
            .map(|(a, l)| (a.clone(), form_at_zero(&um.level(a).unwrap().gram_basis, l)))
            .collect();
        check_crystal_limit_gram(&data, &gram0, unit);
    }
    pass(8, "crystal-limit Gram is diagonal positive-integer, identity when all a_ii ≠ 0");
}

fn dot(a: &[ScalarQ], b: &[ScalarQ]) -> ScalarQ {
    a.iter().zip(b).map(|(x, y)| x.mul(y)).fold(ScalarQ::zero(), |s, t| s.add(&t))
}

/// Star invariance of L(∞) and the form characterization of membership,
/// on 100 sampled lattice elements of the rank-2 datum up to height 4.
#[test]
fn criterion_9_star_invariance_of_the_lattice() {
    let datum = builtin("gkm2").unwrap();
    let um = UmAlgebra::new(datum.clone(), 4).unwrap();
    let data = build_crystal(&um).unwrap();
    let levels: Vec<&RootVec> = data
        .lattices
        .keys()
        .filter(|a| a.height() >= 1 && data.lattices[*a].dim() > 0)
        .collect();
    assert!(!levels.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for sample in 0..100 {
        let alpha = levels[sample % levels.len()];
        let lattice = &data.lattices[alpha];
        let gram = &um.level(alpha).unwrap().gram_basis;
        // Random A₀-combination of the lattice basis, kept out of qL by a
        // unit constant term on one coefficient.
        let dim = lattice.dim();
        let pivot = rng.gen_range(0..dim);
        let mut u = vec![ScalarQ::zero(); gram.rows()];
        for (k, b) in lattice.basis().iter().enumerate() {
            let mut coeff = ScalarQ::zero();
            for j in 0..3i64 {
                let c = if k == pivot && j == 0 {
                    1 + rng.gen_range(0..=3)
                } else {
                    rng.gen_range(-2..=2)
                };
                coeff = coeff.add(&ScalarQ::from_int(c).mul(&ScalarQ::q_pow(j)));
            }
            for (acc, x) in u.iter_mut().zip(b) {
                *acc = acc.add(&x.mul(&coeff));
            }
        }
        assert!(lattice.contains(&u), "sample {sample}: u ∈ L(∞) by construction");
        // Star invariance: u* stays in the lattice, with form value in A₀.
        let star = um.star_mat(alpha).unwrap().apply(&u);
        assert!(lattice.contains(&star), "sample {sample} at {alpha}: u* leaves L(∞)");
        let norm = dot(&star, &gram.apply(&star));
        assert!(norm.in_a0(), "sample {sample} at {alpha}: (u*,u*) ∉ A₀: {norm}");
        // Membership characterization: scaling by q⁻¹ leaves the lattice
        // and the form detects it.
        let outside: Vec<ScalarQ> =
            u.iter().map(|c| c.mul(&ScalarQ::q_pow(-1))).collect();
        assert!(!lattice.contains(&outside), "sample {sample}: u/q ∉ L(∞)");
        let bad = dot(&outside, &gram.apply(&outside));
        assert!(!bad.in_a0(), "sample {sample}: (u/q, u/q) must fall outside A₀");
    }
    pass(9, "star preserves L(∞) and the form characterizes membership on 100 samples");
}
