//! Quanvolutional features from lightning channels through a sampled
//! dictionary, then a ridge readout of the three target products.

use qkscreen::featuremaps::EncodingKind;
use qkscreen::quanvolve::{
    build_dictionary, fit_readout, pixel_design, target_matrix, FeatureSource, QuanvLayer, QuanvLayerSpec,
};
use qkscreen::wxdata::{generate_synthetic, split, SyntheticConfig};
use qkscreen::wxverify::Product;

fn main() -> qkscreen::Result<()> {
    let data = generate_synthetic(&SyntheticConfig::new(80, 21))?;
    let parts = split(data.len(), (0.6, 0.2, 0.2), 1)?;
    let train = data.lght.select(&parts.train)?;

    let spec = QuanvLayerSpec::new(EncodingKind::Angle, 2, 2, 4, 500, 7);
    let layer = QuanvLayer::fit(spec, &train)?;
    let dict = build_dictionary(&layer, &train, 256, 3, false)?;
    println!("dictionary: {} entries from {} patches, spec {}", dict.len(), dict.population, &dict.spec_fingerprint[..12]);

    let features = |idx: &[usize]| layer.quanvolve_image(&data.lght.select(idx)?, FeatureSource::Dictionary(&dict));
    let f_train = features(&parts.train)?;
    let f_test = features(&parts.test)?;
    println!("feature maps {:?}", f_train.shape());

    let y_train = target_matrix(&data.targ.select(&parts.train)?);
    let y_test = target_matrix(&data.targ.select(&parts.test)?);
    let model = fit_readout(&pixel_design(&f_train, (32, 32), 2)?, &y_train, 1e-3)?;
    let pred = model.predict(&pixel_design(&f_test, (32, 32), 2)?)?;
    for p in Product::ALL {
        let c = p.channel();
        let mean = y_train.column(c).mean();
        let mse = (pred.column(c) - y_test.column(c)).norm_squared() / y_test.nrows() as f64;
        let base = y_test.column(c).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y_test.nrows() as f64;
        println!("{p}: test MSE {mse:.2} (train-mean predictor {base:.2})");
    }
    Ok(())
}
