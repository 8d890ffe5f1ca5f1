mod common;

use common::{cfg, generator, max_abs_diff, random_density, random_hermitian};
use ndarray::Array2;
use proptest::prelude::*;
use vibrecoil_core::config::sigma_plus;
use vibrecoil_core::dynamics::step_rk4;
use vibrecoil_core::greens::greens_directional;
use vibrecoil_core::scenarios::geometry;
use vibrecoil_core::{greens, Basis, DensityMatrix, C64};

/// Closed-form kernel: (3/4)(−i) e^{ix} [(1 − w)/x + (1 − 3w)(i/x² − 1/x³)],
/// w = |R̂·q̂|², so 2 Re g is the familiar pair decay rate.
fn kernel_oracle(r: &[f64; 3]) -> C64 {
    let q = sigma_plus();
    let x = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let proj = q[0] * r[0] + q[1] * r[1] + q[2] * r[2];
    let w = proj.norm_sqr() / (x * x);
    let i = C64::new(0.0, 1.0);
    let f = (i * x).exp() * ((1.0 - w) / x + (1.0 - 3.0 * w) * (i / (x * x) - 1.0 / (x * x * x)));
    -i * f * 0.75
}

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = [f64; 3]> {
    [lo..hi, lo..hi, lo..hi]
}

fn unit() -> impl Strategy<Value = [f64; 3]> {
    vec3(-1.0, 1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.05)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        })
}

fn separation() -> impl Strategy<Value = [f64; 3]> {
    vec3(-12.0, 12.0).prop_filter("not too close", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.25)
}

fn hermitian_defect(a: &Array2<C64>) -> f64 {
    let h = a.t().mapv(|c| c.conj());
    max_abs_diff(a, &h)
}

fn small_system(n: usize, n_vib: usize, laser: bool, seed: u64) -> String {
    // atoms on a jittered line, at least 0.3λ apart
    let positions: Vec<String> = (0..n)
        .map(|j| {
            let s = (seed.wrapping_mul(2654435761).wrapping_add(j as u64 * 97) % 1000) as f64 / 1000.0;
            format!("[{}, {}, {}]", j as f64 * 2.5 + s, 0.3 * s, -0.2 * s)
        })
        .collect();
    let laser = if laser {
        "[laser]\nrabi = 0.3\ndetuning = -0.4\ndirection = [0.0, 0.6, 0.8]\n"
    } else {
        ""
    };
    format!(
        "[system]\npositions = [{}]\noscillation = [0.48, 0.6, 0.64]\n[trap]\nkappa = 0.07\nomega_t = 1.3\n[basis]\nn_vib = {n_vib}\n{laser}",
        positions.join(", ")
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_closed_form(r in separation()) {
        let g = greens(&r, &sigma_plus()).unwrap();
        let want = kernel_oracle(&r);
        prop_assert!((g - want).norm() < 1e-12 * (1.0 + want.norm()), "{g} vs {want}");
    }

    #[test]
    fn kernel_is_even(r in separation()) {
        let q = sigma_plus();
        let a = greens(&r, &q).unwrap();
        let b = greens(&[-r[0], -r[1], -r[2]], &q).unwrap();
        prop_assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn directional_derivatives_match_finite_differences(r in separation(), u in unit()) {
        let q = sigma_plus();
        let [_, g1, g2] = greens_directional(&r, &q, &u).unwrap();
        let h = 1e-3;
        let at = |s: f64| kernel_oracle(&[r[0] + s * u[0], r[1] + s * u[1], r[2] + s * u[2]]);
        let (m, z, p) = (at(-h), at(0.0), at(h));
        let (m2, p2) = (at(-2.0 * h), at(2.0 * h));
        // fourth-order stencils
        let d1 = (m2 - p2 + (p - m) * 8.0) / (12.0 * h);
        let d2 = (-(m2 + p2) + (m + p) * 16.0 - z * 30.0) / (12.0 * h * h);
        prop_assert!((g1 - d1).norm() < 1e-7 * (1.0 + g1.norm()), "g1 {g1} fd {d1}");
        prop_assert!((g2 - d2).norm() < 1e-6 * (1.0 + g2.norm()), "g2 {g2} fd {d2}");
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        n in 1usize..4, n_vib in 2usize..4, laser: bool, seed in 0u64..10_000,
    ) {
        let g = generator(&cfg(&small_system(n, n_vib, laser, seed)));
        let d = (n + 1) * n_vib.pow(n as u32);
        let rho = random_hermitian(d, seed);
        let out = g.apply(&DensityMatrix::from_matrix(rho.clone())).unwrap();
        let tr: C64 = out.diag().sum();
        let scale = rho.iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(tr.norm() < 1e-12 * scale * d as f64, "trace {tr}");
        prop_assert!(hermitian_defect(&out) < 1e-13 * scale * d as f64);
    }

    #[test]
    fn generator_is_linear(n in 1usize..3, seed in 0u64..10_000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = generator(&cfg(&small_system(n, 3, true, seed)));
        let d = (n + 1) * 3usize.pow(n as u32);
        let (x, y) = (random_hermitian(d, seed), random_hermitian(d, seed + 1));
        let ap = |m: &Array2<C64>| g.apply(&DensityMatrix::from_matrix(m.clone())).unwrap();
        let lhs = ap(&(&x * C64::from(a) + &y * C64::from(b)));
        let rhs = ap(&x) * C64::from(a) + ap(&y) * C64::from(b);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn rk4_step_keeps_a_density_matrix(n in 1usize..3, seed in 0u64..10_000) {
        let g = generator(&cfg(&small_system(n, 2, true, seed)));
        let d = (n + 1) * 2usize.pow(n as u32);
        let mut rho = DensityMatrix::from_matrix(random_density(d, seed));
        for _ in 0..20 {
            rho = step_rk4(&g, &rho, 0.01).unwrap();
        }
        let m = rho.matrix();
        let tr: C64 = m.diag().sum();
        prop_assert!((tr - 1.0).norm() < 1e-12);
        prop_assert!(hermitian_defect(m) < 1e-14);
    }

    #[test]
    fn basis_index_round_trip(n in 1usize..5, n_vib in 2usize..5, mask in 1u32..16) {
        let q: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        prop_assume!(!q.is_empty());
        let b = Basis::new(n, n_vib, &q, u64::MAX).unwrap();
        prop_assert_eq!(b.dim(), (n + 1) * n_vib.pow(q.len() as u32));
        for f in 0..b.dim() {
            let (j, occ) = b.state(f);
            prop_assert_eq!(b.index(j, &occ).unwrap(), f);
        }
    }

    #[test]
    fn array_builder_counts_and_spacing(rows in 1usize..7, cols in 1usize..7, d in 0.5f64..10.0) {
        let p = geometry::array(rows, cols, d);
        prop_assert_eq!(p.len(), rows * cols);
        let mut nearest = f64::INFINITY;
        for a in 0..p.len() {
            for b in 0..a {
                let s = ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2) + (p[a][2] - p[b][2]).powi(2)).sqrt();
                nearest = nearest.min(s);
            }
        }
        if p.len() > 1 {
            prop_assert!((nearest - d).abs() < 1e-12 * d);
        }
        let c: Vec<f64> = (0..3).map(|k| p.iter().map(|x| x[k]).sum::<f64>() / p.len() as f64).collect();
        prop_assert!(c.iter().all(|x| x.abs() < 1e-9 * d));
    }
}
