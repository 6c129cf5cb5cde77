use stargraph_core::limitdist::{f_tilde, density_f_x_eta, LimitParams};
fn main() {
    for &(eta, alpha) in &[(0.5, 2u32), (2.0, 2), (0.5, 3), (1.0, 3), (2.0, 3), (0.05, 3)] {
        let p = LimitParams { alpha, eta, cutoff: 400.0, tol: 1e-10 };
        let (v, e) = f_tilde(&p).unwrap();
        println!("rust ftilde(eta={eta}, alpha={alpha}) = {v:.12} (err {e:.2e})");
    }
    for &(s, eta, alpha) in &[(-0.25, 1.0, 2u32), (-1.0, 1.0, 2), (-4.0, 1.0, 2), (-1.0, 2.0, 3)] {
        let p = LimitParams { alpha, eta, cutoff: 400.0, tol: 1e-10 };
        let (v, e) = density_f_x_eta(s, &p).unwrap();
        println!("rust density(sigma={s}, eta={eta}, alpha={alpha}) = {v:.12} (err {e:.2e})");
    }
}
