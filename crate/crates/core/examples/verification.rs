//! Contingency scores of an under-forecasting model before and after
//! histogram-matching calibration, written as a performance diagram.

use rand::Rng;
use rand_distr::StandardNormal;

use qkscreen::wxdata::{generate_synthetic, PatchTensor, SyntheticConfig};
use qkscreen::wxverify::{evaluate, fit_target_calibration, performance_diagram, summary_columns, LevelThresholds};

fn main() -> qkscreen::Result<()> {
    let data = generate_synthetic(&SyntheticConfig::new(80, 31))?;
    // a noisy forecast that is systematically 40% too weak
    let mut rng = qkscreen::rng::rng_from_seed(5);
    let weak: Vec<f32> = data
        .targ
        .data()
        .iter()
        .map(|&v| {
            let noise: f64 = rng.sample(StandardNormal);
            (0.6 * v as f64 * (1.0 + 0.2 * noise)).max(0.0) as f32
        })
        .collect();
    let pred = PatchTensor::new("weak", data.targ.shape(), data.targ.channels.clone(), data.targ.units.clone(), weak)?;

    let (cal_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|i| i % 2 == 0);
    let cal = fit_target_calibration(&pred.select(&cal_idx)?, &data.targ.select(&cal_idx)?)?;
    let test_pred = pred.select(&test_idx)?;
    let test_truth = data.targ.select(&test_idx)?;

    let levels = LevelThresholds::default();
    let mut rows = evaluate("weak uncal", &test_pred, &test_truth, &levels)?;
    rows.extend(evaluate("weak cal", &cal.apply(&test_pred)?, &test_truth, &levels)?);
    for model in ["weak uncal", "weak cal"] {
        println!("{model}: {:?}", summary_columns(&rows, model, 2));
    }
    let points: Vec<_> = rows.iter().filter(|r| r.level == 2).map(|r| r.diagram_point()).collect();
    let diagram = performance_diagram(&points, 40);
    let stem = std::env::temp_dir().join("qkscreen_performance_diagram");
    diagram.write(&stem)?;
    println!("wrote {}.svg and .csv", stem.display());
    Ok(())
}
