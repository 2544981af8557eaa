//! Browser bindings: each operation takes a problem spec string and returns
//! JSON for the page in `www/`.

use std::sync::Arc;

use graybox_core::bits::BitVector;
use graybox_core::harness::{self, AnalyzeConfig, ProblemSpec};
use graybox_core::operators::{GrayBoxModel, WpxConfig};
use graybox_core::structure::DependencyCheck;
use graybox_core::{GrayBoxError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest instance the page will analyze exhaustively.
pub const MAX_ANALYZE_N: usize = 14;

fn spec(problem: &str) -> Result<ProblemSpec> {
    problem.parse()
}

fn bits(x: &BitVector) -> String {
    x.to_string()
}

/// Weighted VIG of an instance as a dense matrix, two random parents and
/// the wPX masks tried when mixing the first into the second.
pub fn vig_and_masks(problem: &str, vig: &str, strategy: &str, seed: u64) -> Result<Value> {
    let cfg = WpxConfig {
        vig_kind: vig.parse()?,
        strategy: strategy.parse()?,
    };
    let p = spec(problem)?.instantiate(0)?;
    let e = p
        .expansion_arc()
        .ok_or_else(|| GrayBoxError::MissingExpansion(p.name.clone()))?;
    let model = GrayBoxModel::new(Arc::clone(&e));
    let n = model.n();
    let all: Vec<usize> = (0..n).collect();
    let weights = model.local_weights(cfg.vig_kind, &all);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = BitVector::random(n, &mut rng);
    let b = BitVector::random(n, &mut rng);
    let masks = model.wpx_masks(&a, &b, cfg, &mut rng);
    let local = model.local_weights(cfg.vig_kind, &a.xor(&b).ones_indices());
    Ok(json!({
        "n": n,
        "weights": weights,
        "parents": [bits(&a), bits(&b)],
        "fitness": [e.evaluate_unchecked(&a), e.evaluate_unchecked(&b)],
        "differing": a.xor(&b).ones_indices(),
        "local_weights": local,
        "masks": masks,
    }))
}

fn analyze_one(problem: &str, seed: u64) -> Result<harness::AnalysisOutput> {
    let problem = spec(problem)?;
    if problem.n()? > MAX_ANALYZE_N {
        return Err(GrayBoxError::InvalidArgument(format!(
            "the page analyzes at most {MAX_ANALYZE_N} variables"
        )));
    }
    harness::analyze(&AnalyzeConfig {
        problem,
        checks: DependencyCheck::ALL.to_vec(),
        repetitions: 1,
        base_seed: seed,
    })
}

/// Epistasis of each dependency check before and after denoising.
pub fn denoise_study(problem: &str, seed: u64) -> Result<Value> {
    let out = analyze_one(problem, seed)?;
    Ok(json!({
        "removed_terms": out.removed_terms.first().copied().unwrap_or(0),
        "epistasis": out.epistasis,
        "cliques": out.cliques,
        "min_coefficients": out.min_coefficients,
    }))
}

/// Fitness along a walk from the complement of an optimum through a
/// minimum to the optimum, for the instance and its denoised surrogate.
pub fn cross_section(problem: &str, seed: u64) -> Result<Value> {
    let out = analyze_one(problem, seed)?;
    let original: Vec<f64> = out.cross_sections.iter().map(|r| r.fitness_original).collect();
    let surrogate: Vec<f64> = out.cross_sections.iter().map(|r| r.fitness_surrogate).collect();
    Ok(json!({ "original": original, "surrogate": surrogate }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = vigAndMasks)]
pub fn vig_and_masks_js(problem: &str, vig: &str, strategy: &str, seed: u32) -> std::result::Result<String, JsError> {
    to_js(vig_and_masks(problem, vig, strategy, seed.into()))
}

#[wasm_bindgen(js_name = denoiseStudy)]
pub fn denoise_study_js(problem: &str, seed: u32) -> std::result::Result<String, JsError> {
    to_js(denoise_study(problem, seed.into()))
}

#[wasm_bindgen(js_name = crossSection)]
pub fn cross_section_js(problem: &str, seed: u32) -> std::result::Result<String, JsError> {
    to_js(cross_section(problem, seed.into()))
}
