use gradfuse::*;

fn edge_ratios(fused: &GrayPlane, vis: &GrayPlane, ir: &GrayPlane, size: usize) -> (f64, f64) {
    let f = sobel(fused, PaddingMode::Zero);
    let fv = sobel(vis, PaddingMode::Zero);
    let fi = sobel(ir, PaddingMode::Zero);
    let half = size / 2;
    let cols = [half - 1, half];
    let (mut fx, mut vx, mut fy, mut iy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in 1..size - 1 {
        for &c in &cols {
            fx += f.gx.get(r, c).abs();
            vx += fv.gx.get(r, c).abs();
            fy += f.gy.get(c, r).abs();
            iy += fi.gy.get(c, r).abs();
            n += 1.0;
        }
    }
    ((fx / n) / (vx / n), (fy / n) / (iy / n))
}

fn main() {
    let size = 64;
    let (ir, vis) = make_synthetic_pair(SyntheticKind::CrossEdge, size, 0.8).unwrap();
    for variant in LossVariant::ALL {
        let cfg = LossConfig::for_variant(variant);
        let opt = OptimizerConfig::default();
        let (fused, trace) = direct_fuse(&ir, &vis, &cfg, &opt).unwrap();
        let (rx, ry) = edge_ratios(&fused, &vis, &ir, size);
        // last index where the loss rises
        let mut last_rise = 0usize;
        let mut max_rise_after_10 = 0.0f64;
        for (i, w) in trace.loss_history.windows(2).enumerate() {
            if w[1] > w[0] {
                last_rise = i + 1;
                if i + 1 > 10 { max_rise_after_10 = max_rise_after_10.max(w[1] - w[0]); }
            }
        }
        println!(
            "{:6} iters={} first={:.6} final={:.6} min={:.6} last_rise_at={} max_rise_after10={:.2e} xr={:.4} yr={:.4}",
            variant.name(), trace.iterations_run, trace.loss_history[0], trace.final_loss,
            trace.loss_history.iter().cloned().fold(f64::INFINITY, f64::min),
            last_rise, max_rise_after_10, rx, ry
        );
    }
    // Visible-init run: genuine descent fixture.
    let opt = OptimizerConfig { init: InitMode::Visible, ..OptimizerConfig::default() };
    let (_, trace) = direct_fuse(&ir, &vis, &LossConfig::default(), &opt).unwrap();
    let mut last_rise = 0usize;
    for (i, w) in trace.loss_history.windows(2).enumerate() {
        if w[1] > w[0] { last_rise = i + 1; }
    }
    println!("visible-init: iters={} first={:.6} final={:.6} last_rise_at={}",
        trace.iterations_run, trace.loss_history[0], trace.final_loss, last_rise);

    let (ir2, vis2) = make_synthetic_pair(SyntheticKind::AntiDiagonalRamp, size, 0.8).unwrap();
    for variant in [LossVariant::Ours, LossVariant::Tcmoa] {
        let cfg = LossConfig::for_variant(variant);
        let (fused, _) = direct_fuse(&ir2, &vis2, &cfg, &OptimizerConfig::default()).unwrap();
        println!("ramp {:6} qabf={:.5}", variant.name(), qabf(&fused, &ir2, &vis2).unwrap());
    }
}
