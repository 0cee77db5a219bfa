//! Covariance matrices, symplectic spectra and entropies of small Gaussian states.

use twqkd::gaussian::{
    apply_symplectic, g_entropy, state_entropy, symplectic_eigenvalues, tmsv_covariance, SourceSpec, SymplecticTransform,
};

fn main() -> twqkd::Result<()> {
    let src = SourceSpec::new(0.5)?;
    let tmsv = tmsv_covariance(&src);
    println!("TMSV, N_S = {}:\n{}", src.n_s(), tmsv.matrix());
    println!("symplectic eigenvalues {:?}", symplectic_eigenvalues(&tmsv)?);
    println!("S(SW) = {:.3e} bits (pure)", state_entropy(&tmsv)?);

    let signal = tmsv.select_modes(&[0])?;
    println!("S(S) = {:.12} bits, g(N_S) = {:.12}", state_entropy(&signal)?, g_entropy(src.n_s())?);

    // a 30% loss on the signal, as a beam splitter against vacuum
    let joint = tmsv.direct_sum(&twqkd::gaussian::CovarianceMatrix::vacuum(1));
    let lossy = apply_symplectic(&joint, &SymplecticTransform::beam_splitter(0.7)?, &[0, 2])?;
    let sw = lossy.select_modes(&[0, 1])?;
    println!("after loss: nu = {:?}, S = {:.6} bits", symplectic_eigenvalues(&sw)?, state_entropy(&sw)?);
    Ok(())
}
