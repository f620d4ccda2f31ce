use syge::{count_params, ModelKind};

#[test]
fn parameter_counts_at_text8_scale() {
    let expected = [
        (ModelKind::Dm, 51.6e6),
        (ModelKind::Mure, 21.5e6),
        (ModelKind::RotE, 21.5e6),
        (ModelKind::RefE, 21.5e6),
        (ModelKind::AttE, 21.6e6),
    ];
    for (kind, want) in expected {
        let got = count_params(kind, 72_000, 88, 300) as f64;
        assert!((got - want).abs() / want <= 0.02, "{kind}: {got} vs {want}");
    }
}
