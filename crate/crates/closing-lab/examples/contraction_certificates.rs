//! Certify infinitesimal contraction of map iterates and propagate the
//! certificate to deep first-return maps.
//!
//! ```bash
//! cargo run --example contraction_certificates
//! ```

use closing_lab::segment_map::{
    propagate_contraction, Branch, CertificateOutcome, ReturnMap, Segment,
};

fn main() -> closing_lab::Result<()> {
    let toy = ReturnMap::new(
        Segment::centered(-1.0, 0.9)?,
        vec![Branch::affine(-1.0, 0.9, 0.05, -0.001)],
    )?;
    match toy.contraction_certificate(0.1, 64, 1e-4)? {
        CertificateOutcome::Certified(cert) => {
            println!(
                "toy map: infinitesimal contraction at n = {}, kappa = {} (sup {} on grid {})",
                cert.n, cert.kappa, cert.sup_witness, cert.grid_resolution
            );
            // re-check on a 10x finer grid
            let finer = toy.sup_abs_deriv(cert.n, cert.grid_resolution / 10.0)?;
            println!("  finer-grid sup {} still below kappa", finer.sup);
        }
        CertificateOutcome::Failed { best_n, best_sup } => {
            println!("toy map: no certificate (best sup {best_sup} at n = {best_n})")
        }
    }

    // a map that needs four iterates to contract below 1/2
    let slow = ReturnMap::new(
        Segment::centered(-1.0, 1.0)?,
        vec![Branch::affine(-1.0, 1.0, -0.8, 0.0)],
    )?;
    if let CertificateOutcome::Certified(cert) = slow.contraction_certificate(0.5, 64, 1e-4)? {
        println!(
            "slope -0.8: |DP^{}| < {} (0.8^4 = {})",
            cert.n,
            cert.kappa,
            0.8f64.powi(4)
        );
        // how deep a first return must be before it contracts below K = 0.1
        let prop = propagate_contraction(&cert, 0.8, 0.1)?;
        println!(
            "  propagation: L0 = {}, d = {}, induced returns contract below 0.1 past depth {}",
            prop.l0, prop.d, prop.return_depth
        );
    }

    // an isometry never certifies
    let iet = closing_lab::iet::Iet::rotation(0.618033988749894848)?.as_return_map(0.0)?;
    match iet.contraction_certificate(0.9, 64, 1e-3)? {
        CertificateOutcome::Failed { best_n, best_sup } => {
            println!("golden rotation: no certificate, sup stays {best_sup} (checked to n = 64, best n = {best_n})")
        }
        CertificateOutcome::Certified(_) => unreachable!("|DE| = 1 everywhere"),
    }
    Ok(())
}
