//! Browser demo: virtual-anchor geometry, one synthesized measurement with
//! matching pursuit, and a position-error-bound map. Each operation has a
//! plain Rust entry point returning a serializable value and a thin
//! `wasm_bindgen` wrapper returning JSON.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use mint_core::chest::matching_pursuit;
use mint_core::geometry::{build_virtual_anchors, expected_delay, FloorPlan, Point2, VirtualAnchor, SPEED_OF_LIGHT};
use mint_core::harness::ScenarioConfig;
use mint_core::signal::{make_pulse, synthesize_received, true_sinr, DmProfile};
use mint_core::uncertainty::{crlb_position, efim};

#[derive(Debug, Clone, Serialize)]
pub struct VaView {
    pub x: f64,
    pub y: f64,
    pub order: usize,
    pub walls: Vec<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Geometry {
    pub room: Vec<[[f64; 2]; 2]>,
    pub anchor: [f64; 2],
    pub vas: Vec<VaView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    /// Sample times in ns.
    pub t_ns: Vec<f64>,
    /// |r(t)|, normalized to a peak of 1.
    pub magnitude: Vec<f64>,
    /// True path lengths (m) of every VA, sorted.
    pub true_ranges: Vec<f64>,
    /// Estimated ranges (m) in detection order.
    pub est_ranges: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundMap {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major (y outer) sqrt(CRLB) in m; NaN where the geometry is singular.
    pub rmse_bound: Vec<f64>,
}

fn room(width: f64, height: f64) -> Result<FloorPlan, String> {
    FloorPlan::rectangle(0.0, 0.0, width, height).map_err(|e| e.to_string())
}

fn check_inside(w: f64, h: f64, p: Point2, what: &str) -> Result<(), String> {
    if !(p.x > 0.0 && p.x < w && p.y > 0.0 && p.y < h) {
        return Err(format!("{what} ({}, {}) is outside the room", p.x, p.y));
    }
    Ok(())
}

fn vas_for(width: f64, height: f64, anchor: Point2, order: usize) -> Result<Vec<VirtualAnchor>, String> {
    if order > 3 {
        return Err("order must be 0..=3".into());
    }
    check_inside(width, height, anchor, "anchor")?;
    build_virtual_anchors(&room(width, height)?, anchor, 0, order).map_err(|e| e.to_string())
}

pub fn geometry(width: f64, height: f64, ax: f64, ay: f64, order: usize) -> Result<Geometry, String> {
    let anchor = Point2::new(ax, ay);
    let vas = vas_for(width, height, anchor, order)?;
    Ok(Geometry {
        room: room(width, height)?
            .walls()
            .iter()
            .map(|w| [[w.endpoint_a.x, w.endpoint_a.y], [w.endpoint_b.x, w.endpoint_b.y]])
            .collect(),
        anchor: [ax, ay],
        vas: vas
            .iter()
            .map(|v| VaView {
                x: v.mean.x,
                y: v.mean.y,
                order: v.order,
                walls: v.wall_sequence.clone(),
            })
            .collect(),
    })
}

fn interferer(cfg: &ScenarioConfig, omega1: f64, onset: f64) -> Option<DmProfile> {
    (omega1 > 0.0).then(|| {
        let mut p = cfg.interferer.profile().with_onset(onset);
        p.omega1 = omega1;
        p
    })
}

/// One received signal at agent position `(px, py)` from an anchor at
/// `(ax, ay)` in a `width × height` room, with VAs up to order 2.
#[allow(clippy::too_many_arguments)]
pub fn measure(
    width: f64,
    height: f64,
    ax: f64,
    ay: f64,
    px: f64,
    py: f64,
    fc: f64,
    omega1: f64,
    seed: u64,
) -> Result<Measurement, String> {
    let cfg = ScenarioConfig::default();
    let p = Point2::new(px, py);
    check_inside(width, height, p, "agent")?;
    let vas = vas_for(width, height, Point2::new(ax, ay), 2)?;
    let w = cfg.waveform_at(fc).map_err(|e| e.to_string())?;
    let ch = cfg.channel_config();
    let pulse = make_pulse(&w, ch.sample_rate).map_err(|e| e.to_string())?;
    let prof = interferer(&cfg, omega1, expected_delay(p, &vas[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = synthesize_received(&ch, &pulse, p, &vas, &w, prof.as_ref(), cfg.channel.noise_psd, &mut rng)
        .map_err(|e| e.to_string())?;
    let est = matching_pursuit(&r, &pulse, cfg.estimation.num_mpc).map_err(|e| e.to_string())?;
    let peak = r.samples.iter().map(|s| s.norm()).fold(0.0, f64::max).max(1e-300);
    let mut true_ranges: Vec<f64> = vas.iter().map(|v| p.distance(v.mean)).collect();
    true_ranges.sort_by(f64::total_cmp);
    Ok(Measurement {
        t_ns: (0..r.samples.len()).map(|i| i as f64 / r.sample_rate * 1e9).collect(),
        magnitude: r.samples.iter().map(|s| s.norm() / peak).collect(),
        true_ranges,
        est_ranges: est.iter().map(|e| e.delay_hat * SPEED_OF_LIGHT).collect(),
    })
}

/// sqrt(CRLB) of the position over a grid, using the ground-truth SINR of
/// every VA (order ≤ 2) at carrier `fc` with the interferer at `omega1`.
#[allow(clippy::too_many_arguments)]
pub fn bound_map(width: f64, height: f64, ax: f64, ay: f64, fc: f64, omega1: f64, step: f64) -> Result<BoundMap, String> {
    if !(step >= 0.05) {
        return Err("grid step must be >= 0.05 m".into());
    }
    let cfg = ScenarioConfig::default();
    let vas = vas_for(width, height, Point2::new(ax, ay), 2)?;
    let w = cfg.waveform_at(fc).map_err(|e| e.to_string())?;
    let ch = cfg.channel_config();
    let beta = make_pulse(&w, ch.sample_rate).map_err(|e| e.to_string())?.beta;
    let nx = (width / step).floor() as usize;
    let ny = (height / step).floor() as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Point2::new((i as f64 + 0.5) * step, (j as f64 + 0.5) * step);
            let prof = interferer(&cfg, omega1, expected_delay(p, &vas[0]));
            let entries: Vec<(Point2, f64)> = vas
                .iter()
                .map(|v| (v.mean, true_sinr(&ch, p, v, &w, prof.as_ref(), cfg.channel.noise_psd)))
                .collect();
            out.push(crlb_position(&efim(p, &entries, beta)).map(f64::sqrt).unwrap_or(f64::NAN));
        }
    }
    Ok(BoundMap {
        x0: 0.5 * step,
        y0: 0.5 * step,
        dx: step,
        nx,
        ny,
        rmse_bound: out,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = virtualAnchors)]
pub fn virtual_anchors_js(width: f64, height: f64, ax: f64, ay: f64, order: usize) -> Result<String, JsValue> {
    to_js(geometry(width, height, ax, ay, order))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = measure)]
pub fn measure_js(
    width: f64,
    height: f64,
    ax: f64,
    ay: f64,
    px: f64,
    py: f64,
    fc: f64,
    omega1: f64,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(measure(width, height, ax, ay, px, py, fc, omega1, seed as u64))
}

#[wasm_bindgen(js_name = boundMap)]
pub fn bound_map_js(width: f64, height: f64, ax: f64, ay: f64, fc: f64, omega1: f64, step: f64) -> Result<String, JsValue> {
    to_js(bound_map(width, height, ax, ay, fc, omega1, step))
}
