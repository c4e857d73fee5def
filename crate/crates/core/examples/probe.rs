use lcwave_core::charsolver::*;
use lcwave_core::initial::*;
use lcwave_core::model::LeslieParams;

fn main() {
    let p = LeslieParams::special();
    let det_tol = 1e-8;
    for eps in [0.04, 0.02, 0.01] {
        let fam = BlowupFamily { epsilon: eps, ..BlowupFamily::default_demo() };
        let data = build_blowup_data(&p, &fam, 0.6, 256).unwrap();
        let g = build_gamma0(&data, &p).unwrap();
        for n in [1024usize, 2048, 4096] {
            let t0 = std::time::Instant::now();
            let st = integrate_semilinear(&g, &FluxSource::Zero, &p, n, n, 0.3).unwrap();
            let mut tstar = f64::INFINITY; let mut xstar = f64::NAN;
            for k in 0..st.valid.len() {
                if st.valid[k] && 1.0 + st.z[k].cos() < det_tol && st.t[k] < tstar {
                    tstar = st.t[k]; xstar = st.x[k];
                }
            }
            println!("eps={eps} n={n}: t*={tstar:.6} x*={xstar:.6}  ({:?})", t0.elapsed());
        }
    }
}
