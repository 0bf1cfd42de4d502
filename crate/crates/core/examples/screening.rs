//! Full screening table on synthetic scenes: PCA to M components, angle and
//! IQP kernels, g against √N and SVM complexities on target and adversarial
//! labels. At the default C = 1 the complexity s is capped at √N, so rows
//! come out ClassicalSufficient; raise `svm.c` to let s grow past it.

use qkscreen::kernelscreen::{binarize_labels, screen, DataMatrix, ScreenConfig};
use qkscreen::wxdata::{generate_synthetic, SyntheticConfig};

fn main() -> qkscreen::Result<()> {
    let data = generate_synthetic(&SyntheticConfig::new(74, 11))?;
    let rows: Vec<Vec<f64>> = (0..data.len())
        .map(|i| data.lght.patch_f64(i).into_iter().chain(data.sat.patch_f64(i)).collect())
        .collect();
    // label: scene peak VIL at or above 32
    let peaks: Vec<f64> = (0..data.len())
        .map(|i| data.targ.grid(i, 0).iter().fold(0.0f64, |m, &v| m.max(v as f64)))
        .collect();
    let labels = binarize_labels(&peaks, 32.0);
    let cfg = ScreenConfig {
        ms: vec![2, 4, 8],
        adversarial: true,
        ..ScreenConfig::default()
    };
    let report = screen(&DataMatrix::from_rows(&rows)?, &labels, &cfg)?;
    print!("{}", report.to_csv());
    Ok(())
}
