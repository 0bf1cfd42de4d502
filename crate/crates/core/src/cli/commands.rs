use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::seq::index::sample;
use serde_json::{json, Value};

use super::{
    ensure_dir, hash_stems, usage, write_report, CliError, CliResult, EncodingArg, Envelope, EvaluateArgs,
    FitReadoutArgs, GenDataArgs, ModeArg, QuanvolveArgs, QvaeArgs, QvaeSource, ScreenArgs, VERSION,
};
use crate::error::Error;
use crate::featuremaps::EncodingKind;
use crate::generative::{
    empirical_distribution, encode, fit_codebook, index_tv, sample_qcbm_indices, synthesize_source, train_qcbm,
    mitigate_index, tv_dense, SpsaConfig, TrainingStage,
};
use crate::kernelscreen::{binarize_labels, screen as run_screen, DataMatrix, KernelMode, ScreenConfig, SvmConfig};
use crate::qsim::MAX_QUBITS;
use crate::quanvolve::{
    build_dictionary, fit_readout as fit_ridge, pixel_design, predictions_to_tensor, target_matrix, FeatureSource,
    QuanvLayer, QuanvLayerSpec, ReadoutModel,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::wxdata::{generate_synthetic, read_tensor, split, write_tensor, PatchTensor, SyntheticConfig};
use crate::wxverify::{
    evaluate as score, fit_target_calibration, performance_diagram, summary_columns, LevelThresholds, MetricsRow,
    Product,
};

fn envelope<'a, F: serde::Serialize, R: serde::Serialize>(
    command: &'static str,
    flags: &'a F,
    seeds: BTreeMap<&'static str, u64>,
    inputs: BTreeMap<String, String>,
    result: R,
) -> Envelope<'a, F, R> {
    Envelope {
        tool: "qkscreen",
        version: VERSION,
        command,
        flags,
        seeds,
        inputs,
        result,
    }
}

fn population_is_config(e: Error) -> CliError {
    match e {
        Error::PopulationTooSmall { .. } => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other),
    }
}

fn kind(e: EncodingArg) -> EncodingKind {
    match e {
        EncodingArg::Angle => EncodingKind::Angle,
        EncodingArg::Iqp => EncodingKind::Iqp,
    }
}

pub(super) fn gen_data(a: &GenDataArgs) -> CliResult<()> {
    if a.scenes == 0 {
        return Err(usage("--scenes must be at least 1"));
    }
    let cfg = SyntheticConfig::new(a.scenes, a.seed);
    let t0 = Instant::now();
    let data = generate_synthetic(&cfg)?;
    ensure_dir(&a.out)?;
    let mut stems = Vec::new();
    let mut shapes = BTreeMap::new();
    for (stem, tensor) in data.parts() {
        let path = a.out.join(stem);
        write_tensor(tensor, &path)?;
        shapes.insert(stem, tensor.shape());
        stems.push(path);
    }
    let refs: Vec<&Path> = stems.iter().map(PathBuf::as_path).collect();
    let outputs = hash_stems(&refs)?;
    let result = json!({ "config": cfg, "shapes": shapes, "outputs": outputs });
    write_report(
        &a.out.join("gen-data.json"),
        &envelope("gen-data", a, BTreeMap::from([("seed", a.seed)]), BTreeMap::new(), result),
    )?;
    info!("gen-data: {} scenes in {:.1?}", a.scenes, t0.elapsed());
    Ok(())
}

pub(super) fn screen(a: &ScreenArgs) -> CliResult<()> {
    if let Some(&m) = a.pcs.iter().find(|&&m| m == 0 || m > MAX_QUBITS) {
        return Err(usage(format!(
            "--pcs {m} is outside 1..={MAX_QUBITS}: each component becomes one qubit and the simulator stops at {MAX_QUBITS}"
        )));
    }
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    if a.shots == Some(0) {
        return Err(usage("--shots must be at least 1"));
    }
    if !(a.svm_c > 0.0) {
        return Err(usage("--svm-c must be positive"));
    }
    if a.sources.is_empty() {
        return Err(usage("--sources needs at least one input group"));
    }
    let levels = LevelThresholds::default();
    let vil_levels = levels.get(Product::Vil);
    if a.label_level == 0 || a.label_level > vil_levels.len() {
        return Err(usage(format!("--label-level must lie in 1..={}", vil_levels.len())));
    }
    let threshold = vil_levels[a.label_level - 1];

    let mut stems: Vec<PathBuf> = a.sources.iter().map(|s| a.data.join(s.stem())).collect();
    stems.push(a.data.join("targ"));
    let tensors: Vec<PatchTensor> = stems.iter().map(|s| read_tensor(s)).collect::<crate::Result<_>>()?;
    let (inputs, targ) = tensors.split_at(tensors.len() - 1);
    let targ = &targ[0];
    let total = targ.len();
    if a.n > total {
        return Err(usage(format!("--n {} exceeds the {total} available scenes", a.n)));
    }
    let mut picks = sample(&mut rng_from_seed(derive_seed(a.seed, 1)), total, a.n).into_vec();
    picks.sort_unstable();

    let rows: Vec<Vec<f64>> = picks
        .iter()
        .map(|&i| inputs.iter().flat_map(|t| t.patch_f64(i)).collect())
        .collect();
    let peak: Vec<f64> = picks
        .iter()
        .map(|&i| {
            targ.grid(i, Product::Vil.channel())
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64))
        })
        .collect();
    let labels = binarize_labels(&peak, threshold);
    let data = DataMatrix::from_rows(&rows)?.with_row_ids(picks.iter().map(|i| format!("scene{i}")).collect())?;

    let mode = match a.mode {
        ModeArg::Exact => KernelMode::Exact,
        ModeArg::Sampled => KernelMode::Sampled {
            shots: a.shots.expect("required by clap"),
            seed: derive_seed(a.seed, 2),
        },
    };
    let cfg = ScreenConfig {
        ms: a.pcs.clone(),
        encodings: a.encoding.iter().map(|&e| kind(e)).collect(),
        mode,
        svm: SvmConfig {
            c: a.svm_c,
            ..SvmConfig::default()
        },
        seed: a.seed,
        adversarial: a.adversarial,
        ..ScreenConfig::default()
    };
    let t0 = Instant::now();
    let report = run_screen(&data, &labels, &cfg)?;
    info!("screen: {} rows in {:.1?}", report.rows.len(), t0.elapsed());

    ensure_dir(&a.out)?;
    crate::wxdata::write_atomic(&a.out.join("screen.csv"), report.to_csv().as_bytes())?;
    let refs: Vec<&Path> = stems.iter().map(PathBuf::as_path).collect();
    let positives = labels.iter().filter(|&&l| l > 0.0).count();
    let result = json!({
        "scenes": picks,
        "label_threshold": threshold,
        "positive_labels": positives,
        "report": report,
    });
    let seeds = BTreeMap::from([
        ("seed", a.seed),
        ("scene_draw", derive_seed(a.seed, 1)),
        ("kernel_shots", derive_seed(a.seed, 2)),
    ]);
    write_report(&a.out.join("screen.json"), &envelope("screen", a, seeds, hash_stems(&refs)?, result))?;
    Ok(())
}

pub(super) fn qvae(a: &QvaeArgs) -> CliResult<()> {
    if a.codebook_k == 0 || a.codebook_k > MAX_QUBITS {
        return Err(usage(format!(
            "--codebook-k {} is outside 1..={MAX_QUBITS}: one qubit per codeword and the simulator stops at {MAX_QUBITS}",
            a.codebook_k
        )));
    }
    if !(0.0..0.5).contains(&a.noise_p) {
        return Err(usage("--noise-p must lie in [0, 0.5)"));
    }
    if a.shots == 0 || a.layers == 0 {
        return Err(usage("--shots and --layers must be at least 1"));
    }
    let stem = a.data.join(match a.source {
        QvaeSource::Lght => "lght",
        QvaeSource::Sat => "sat",
    });
    let source = read_tensor(&stem)?;
    let seeds = BTreeMap::from([
        ("seed", a.seed),
        ("codebook", derive_seed(a.seed, 1)),
        ("warm_start", derive_seed(a.seed, 2)),
        ("refine", derive_seed(a.seed, 3)),
        ("synthesis", derive_seed(a.seed, 4)),
    ]);
    let k = a.codebook_k;

    let t0 = Instant::now();
    let codebook = fit_codebook(&source, k, a.codebook_iters, seeds["codebook"]).map_err(population_is_config)?;
    let indices = encode(&source, &codebook)?;
    let target = empirical_distribution(&indices, k)?;
    info!("qvae: codebook k={k} in {:.1?}", t0.elapsed());

    let t0 = Instant::now();
    let warm = train_qcbm(
        &target,
        k,
        a.layers,
        &TrainingStage::ExactWarmStart { init: None },
        &SpsaConfig {
            restarts: a.restarts,
            ..SpsaConfig::with_iterations(a.iters)
        },
        seeds["warm_start"],
    )?;
    info!("qvae: warm start TV {:.4} in {:.1?}", warm.final_loss, t0.elapsed());
    let t0 = Instant::now();
    let refine = train_qcbm(
        &target,
        k,
        a.layers,
        &TrainingStage::SampledRefine {
            shots: a.shots,
            noise_p: a.noise_p,
            warm_start: warm.params.clone(),
        },
        &SpsaConfig::with_iterations(a.refine_iters),
        seeds["refine"],
    )?;
    info!("qvae: refine TV {:.4} in {:.1?}", refine.final_loss, t0.elapsed());
    let sparse = target.sparse();
    let refine_exact = tv_dense(&refine.probabilities()?, &sparse);

    let synthetic = synthesize_source(&refine, &codebook, a.out, seeds["synthesis"], a.noise_p)?;
    let mitigated: Vec<usize> = if a.out == 0 {
        Vec::new()
    } else {
        sample_qcbm_indices(&refine, a.out, seeds["synthesis"], a.noise_p)?
            .into_iter()
            .map(mitigate_index)
            .collect()
    };

    ensure_dir(&a.out_dir)?;
    codebook.save(&a.out_dir.join("codebook"))?;
    warm.save(&a.out_dir.join("qcbm_warm.json"))?;
    refine.save(&a.out_dir.join("qcbm.json"))?;
    let out_stem = a.out_dir.join(format!("{}_synthetic", stem.file_name().unwrap().to_string_lossy()));
    write_tensor(&synthetic, &out_stem)?;

    let result = json!({
        "codebook": { "k": k, "cluster_sizes": codebook.cluster_sizes, "iterations": codebook.iterations },
        "target": target.probabilities,
        "warm_start": {
            "initial_loss": warm.training_history[0],
            "final_loss": warm.final_loss,
            "iterations": a.iters,
            "restart_losses": warm.restart_losses,
            "history": warm.training_history,
        },
        "refine": {
            "initial_loss": refine.training_history[0],
            "final_loss": refine.final_loss,
            "exact_tv": refine_exact,
            "shots": a.shots,
            "noise_p": a.noise_p,
            "iterations": a.refine_iters,
            "history": refine.training_history,
        },
        "synthetic": {
            "patches": a.out,
            "shape": synthetic.shape(),
            "mitigated_tv_to_training": if mitigated.is_empty() { Value::Null } else { index_tv(&mitigated, &indices, k).into() },
        },
    });
    write_report(&a.out_dir.join("qvae.json"), &envelope("qvae", a, seeds, hash_stems(&[&stem])?, result))?;
    Ok(())
}

const SPLITS: [&str; 3] = ["train", "cal", "test"];

pub(super) fn quanvolve(a: &QuanvolveArgs) -> CliResult<()> {
    if a.patch == 0 || a.stride == 0 {
        return Err(usage("--patch and --stride must be at least 1"));
    }
    if a.patch * a.patch > MAX_QUBITS {
        return Err(usage(format!("--patch {} needs {} qubits; the simulator stops at {MAX_QUBITS}", a.patch, a.patch * a.patch)));
    }
    if a.shots == 0 || a.dict_k == 0 {
        return Err(usage("--shots and --dict-k must be at least 1"));
    }
    let fractions = (a.split[0], a.split[1], a.split[2]);
    let src_stem = a.data.join(a.source.stem());
    let targ_stem = a.data.join("targ");
    let source = read_tensor(&src_stem)?;
    let targ = read_tensor(&targ_stem)?;
    if source.len() != targ.len() {
        return Err(Error::invalid(format!("{} source scenes but {} target scenes", source.len(), targ.len())).into());
    }
    let seeds = BTreeMap::from([
        ("seed", a.seed),
        ("split", derive_seed(a.seed, 1)),
        ("circuit", derive_seed(a.seed, 2)),
        ("dictionary", derive_seed(a.seed, 3)),
    ]);
    let parts = split(source.len(), fractions, seeds["split"]).map_err(|e| usage(e.to_string()))?;
    let index_sets = [&parts.train, &parts.cal, &parts.test];

    let spec = QuanvLayerSpec::new(kind(a.encoding), a.patch, a.stride, a.depth, a.shots, seeds["circuit"]);
    let train = source.select(&parts.train)?;
    let layer = QuanvLayer::fit(spec, &train)?;
    let t0 = Instant::now();
    let dict = build_dictionary(&layer, &train, a.dict_k, seeds["dictionary"], false).map_err(population_is_config)?;
    info!("quanvolve: dictionary of {} from {} patches in {:.1?}", dict.len(), dict.population, t0.elapsed());

    ensure_dir(&a.out)?;
    dict.save(&a.out.join("dictionary"))?;
    let mut shapes = BTreeMap::new();
    let t0 = Instant::now();
    for (name, idx) in SPLITS.iter().zip(index_sets) {
        let feats = layer.quanvolve_image(&source.select(idx)?, FeatureSource::Dictionary(&dict))?;
        write_tensor(&feats, &a.out.join(format!("features_{name}")))?;
        write_tensor(&targ.select(idx)?, &a.out.join(format!("targ_{name}")))?;
        shapes.insert(*name, feats.shape());
    }
    info!("quanvolve: features in {:.1?}", t0.elapsed());
    let result = json!({
        "spec": spec,
        "spec_fingerprint": spec.fingerprint(),
        "dictionary": { "k": dict.len(), "population": dict.population },
        "split": parts,
        "feature_shapes": shapes,
    });
    write_report(
        &a.out.join("quanvolve.json"),
        &envelope("quanvolve", a, seeds, hash_stems(&[&src_stem, &targ_stem])?, result),
    )?;
    Ok(())
}

fn provenance_usize(t: &PatchTensor, key: &str) -> crate::Result<usize> {
    t.provenance
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::invalid(format!("feature tensor {} lacks {key:?} provenance", t.name)))
}

fn per_product_mse(pred: &nalgebra::DMatrix<f64>, truth: &nalgebra::DMatrix<f64>) -> BTreeMap<&'static str, f64> {
    Product::ALL
        .iter()
        .map(|p| {
            let c = p.channel();
            let d = pred.column(c) - truth.column(c);
            (p.name(), d.norm_squared() / d.len() as f64)
        })
        .collect()
}

pub(super) fn fit_readout(a: &FitReadoutArgs) -> CliResult<()> {
    if !(a.ridge > 0.0) || !a.ridge.is_finite() {
        return Err(usage("--ridge must be positive"));
    }
    let stem = |s: &str| a.dir.join(s);
    let train_f = read_tensor(&stem("features_train"))?;
    let train_t = read_tensor(&stem("targ_train"))?;
    let stride = provenance_usize(&train_f, "stride")?;
    let [_, _, h, w] = train_t.shape();
    let x = pixel_design(&train_f, (h, w), stride)?;
    let y = target_matrix(&train_t);
    let t0 = Instant::now();
    let model: ReadoutModel = fit_ridge(&x, &y, a.ridge)?;
    info!("fit-readout: {} rows in {:.1?}", x.nrows(), t0.elapsed());
    let means: Vec<f64> = (0..y.ncols()).map(|c| y.column(c).mean()).collect();

    let mut input_stems = Vec::new();
    let mut scores = BTreeMap::new();
    for name in SPLITS {
        let fs = stem(&format!("features_{name}"));
        let ts = stem(&format!("targ_{name}"));
        let feats = read_tensor(&fs)?;
        let targ = read_tensor(&ts)?;
        let xs = pixel_design(&feats, (h, w), stride)?;
        let ys = target_matrix(&targ);
        let pred = model.predict(&xs)?;
        let constant = nalgebra::DMatrix::from_fn(ys.nrows(), ys.ncols(), |_, c| means[c]);
        scores.insert(
            name,
            json!({
                "mse": per_product_mse(&pred, &ys),
                "constant_mse": per_product_mse(&constant, &ys),
            }),
        );
        let mut out = predictions_to_tensor(&pred, &targ)?;
        out.name = format!("pred_{name}");
        write_tensor(&out, &stem(&format!("pred_{name}")))?;
        input_stems.push(fs);
        input_stems.push(ts);
    }
    let mut text = serde_json::to_string_pretty(&model).map_err(Error::from)?;
    text.push('\n');
    crate::wxdata::write_atomic(&stem("readout.json"), text.as_bytes())?;
    let refs: Vec<&Path> = input_stems.iter().map(PathBuf::as_path).collect();
    let result = json!({
        "features": x.ncols(),
        "targets": y.ncols(),
        "train_rows": x.nrows(),
        "target_means": means,
        "scores": scores,
    });
    write_report(&stem("fit-readout.json"), &envelope("fit-readout", a, BTreeMap::new(), hash_stems(&refs)?, result))?;
    Ok(())
}

pub(super) fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let levels = match &a.levels {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let l: LevelThresholds =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            l.validate().map_err(|e| usage(e.to_string()))?;
            l
        }
        None => LevelThresholds::default(),
    };
    let pred = read_tensor(&a.pred)?;
    let truth = read_tensor(&a.truth)?;
    let mut stems: Vec<&Path> = vec![&a.pred, &a.truth];
    let uncal_name = format!("{} uncal", a.model);
    let mut rows: Vec<MetricsRow> = score(&uncal_name, &pred, &truth, &levels)?;
    let mut summary = BTreeMap::new();
    summary.insert(uncal_name.clone(), summary_columns(&rows, &uncal_name, a.summary_level));
    let mut calibration = Value::Null;
    if let Some(cal) = &a.calibrate {
        let cal_pred = read_tensor(&cal[0])?;
        let cal_truth = read_tensor(&cal[1])?;
        stems.push(&cal[0]);
        stems.push(&cal[1]);
        let maps = fit_target_calibration(&cal_pred, &cal_truth)?;
        let calibrated = maps.apply(&pred)?;
        let cal_name = format!("{} cal", a.model);
        let cal_rows = score(&cal_name, &calibrated, &truth, &levels)?;
        summary.insert(cal_name.clone(), summary_columns(&cal_rows, &cal_name, a.summary_level));
        rows.extend(cal_rows);
        calibration = serde_json::to_value(&maps).map_err(Error::from)?;
    }

    let points: Vec<_> = rows.iter().map(MetricsRow::diagram_point).collect();
    let diagram = performance_diagram(&points, a.diagram_resolution);
    ensure_dir(&a.out)?;
    diagram.write(&a.out.join("performance_diagram"))?;
    let result = json!({
        "levels": levels,
        "summary_level": a.summary_level,
        "summary": summary,
        "rows": rows,
        "diagram_warnings": diagram.warnings,
        "calibration": calibration,
    });
    write_report(&a.out.join("metrics.json"), &envelope("evaluate", a, BTreeMap::new(), hash_stems(&stems)?, result))?;
    Ok(())
}
