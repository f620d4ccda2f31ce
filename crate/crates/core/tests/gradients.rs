mod support;

use syge::ModelKind;

#[test]
fn analytic_gradients_match_finite_differences() {
    for h in [1e-3, 1e-5] {
        for kind in ModelKind::ALL {
            for dim in [2, 4, 6] {
                for i in 0..100u64 {
                    let seed = (dim as u64) << 32 | i;
                    let err = support::fd_relative_error(kind, dim, seed, h);
                    assert!(err < 1e-4, "{kind} n={dim} seed={seed} h={h}: relative error {err:e}");
                }
            }
        }
    }
}

#[test]
fn f32_score_agrees_with_f64_shadow() {
    let mut rng = syge::Rng::new(11);
    for kind in ModelKind::ALL {
        let p64 = support::random_params(kind, 6, 4, 8, &mut rng);
        let p32 = p64.cast::<f32>();
        for h in 0..6 {
            let tr = syge::Triple::new(h, h % 4, 5 - h);
            let a = p64.score(tr).unwrap();
            let b = p32.score(tr).unwrap() as f64;
            assert!(support::rel_close(a, b, 1e-4), "{kind}: {a} vs {b}");
        }
    }
}
