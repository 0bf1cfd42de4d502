//! Codebook quantization of lightning patches, a Born machine trained on the
//! codeword frequencies, and synthetic patches sampled under readout noise.

use qkscreen::generative::{
    empirical_distribution, encode, fit_codebook, index_tv, mitigate_index, sample_qcbm_indices,
    synthesize_source, train_qcbm, tv_dense, SpsaConfig, TrainingStage,
};
use qkscreen::wxdata::{generate_synthetic, SyntheticConfig};

fn main() -> qkscreen::Result<()> {
    let data = generate_synthetic(&SyntheticConfig::new(100, 4))?;
    let k = 6;
    let codebook = fit_codebook(&data.lght, k, 50, 1)?;
    let indices = encode(&data.lght, &codebook)?;
    let target = empirical_distribution(&indices, k)?;
    println!("cluster sizes {:?}", codebook.cluster_sizes);

    let warm = train_qcbm(
        &target,
        k,
        4,
        &TrainingStage::ExactWarmStart { init: None },
        &SpsaConfig::with_iterations(1000),
        2,
    )?;
    println!("warm start: TV {:.4} -> {:.4}, per start {:?}", warm.training_history[0], warm.final_loss, warm.restart_losses);

    let noise = 0.05;
    let refined = train_qcbm(
        &target,
        k,
        4,
        &TrainingStage::SampledRefine { shots: 2000, noise_p: noise, warm_start: warm.params.clone() },
        &SpsaConfig::with_iterations(100),
        3,
    )?;
    println!("refined: noisy TV {:.4}, exact TV {:.4}", refined.final_loss, tv_dense(&refined.probabilities()?, &target.sparse()));

    let samples: Vec<usize> = sample_qcbm_indices(&refined, 5000, 9, noise)?
        .into_iter()
        .map(mitigate_index)
        .collect();
    println!("mitigated codeword TV to training: {:.4}", index_tv(&samples, &indices, k));
    let synthetic = synthesize_source(&refined, &codebook, 16, 9, noise)?;
    println!("synthetic tensor {} {:?}", synthetic.name, synthetic.shape());
    Ok(())
}
