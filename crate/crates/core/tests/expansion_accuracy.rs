use gaplab_core::exact::{erlang_a_expected_queue, mmn_expected_queue};
use gaplab_core::expansions::{erlang_a_qbar1, erlang_a_qhat1, fluid_qbar, hw_qbar, hw_qhat, Exponential};
use gaplab_core::prescription::rate_fit;
use gaplab_core::QueueParams;

const GRID: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

#[test]
fn halfin_whitt_residual_vanishes_at_root_n_rate() {
    // √n·eₙ(x) limits, from a 50-digit evaluation at n = 10⁶.
    for (x, scaled_limit) in [(0.5f64, -0.0778f64), (1.0, -0.0431), (2.0, 0.0038)] {
        let mut residuals = Vec::new();
        for n in GRID {
            let params = QueueParams::new(n, 1.0).unwrap();
            let r = n.sqrt();
            let eq = mmn_expected_queue(&params, n + r * x).unwrap();
            let e = eq - r * hw_qbar(x).unwrap() - hw_qhat(x).unwrap();
            residuals.push((n, e.abs()));
        }
        for w in residuals.windows(2) {
            assert!(w[1].1 < w[0].1, "x = {x}: {residuals:?}");
        }
        let fit = rate_fit(&residuals).unwrap();
        assert!(fit.slope <= -0.4, "x = {x}: slope {}", fit.slope);
        let (n, e) = residuals[residuals.len() - 1];
        assert!((n.sqrt() * e - scaled_limit.abs()).abs() < 5e-3, "x = {x}: {}", n.sqrt() * e);
    }
}

#[test]
fn erlang_a_leading_term_is_order_one() {
    for gamma in [0.5, 1.0, 2.0] {
        for x in [-0.5, 0.0, 0.5, 1.0] {
            let mut trend = Vec::new();
            for n in [1e2, 1e3, 1e4, 1e5] {
                let r: f64 = n;
                let servers = (r + r.sqrt() * x).round();
                let xl = (servers - r) / r.sqrt();
                let params = QueueParams::with_abandonment(n, 1.0, gamma).unwrap();
                let eq = erlang_a_expected_queue(&params, servers as u64).unwrap();
                let leading = eq - r.sqrt() * erlang_a_qbar1(xl, 1.0, gamma).unwrap();
                assert!(leading.abs() < 1.0, "γ = {gamma}, x = {x}, n = {n}: {leading}");
                trend.push(leading - erlang_a_qhat1(xl, 1.0, gamma).unwrap());
            }
            assert!(trend[3].abs() < trend[0].abs(), "γ = {gamma}, x = {x}: {trend:?}");
        }
    }
}

#[test]
fn fluid_limit_in_overload() {
    let patience = Exponential::new(1.0).unwrap();
    let qbar = fluid_qbar(0.8, 1.0, &patience).unwrap();
    assert!((qbar - 0.2).abs() < 1e-15);
    let mut offsets = Vec::new();
    for n in [1e2, 1e3, 1e4, 1e5] {
        let params = QueueParams::with_abandonment(n, 1.0, 1.0).unwrap();
        let eq = erlang_a_expected_queue(&params, (0.8 * n).round() as u64).unwrap();
        offsets.push(eq - n * qbar);
        if n == 1e4 {
            assert!((eq / n - 0.2).abs() < 1e-3);
        }
    }
    assert!(offsets.iter().all(|o| o.abs() < 1.0), "{offsets:?}");
}
