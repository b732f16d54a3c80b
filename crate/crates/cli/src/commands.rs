use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cascadetrack_client::api::{EvaluateRequest, RenderRequest};
use cascadetrack_client::Client;
use cascadetrack_core::clearmot::DEFAULT_IOU_THRESHOLD;
use cascadetrack_core::mot_io::{read_detections, read_ground_truth, read_results, write_results};
use cascadetrack_core::TrackerConfig;
use serde::Serialize;

use crate::failure::Failure;
use crate::manifest::{sequence_name, RunManifest};

pub struct TrackArgs {
    pub detections: PathBuf,
    pub features: Option<PathBuf>,
    pub output: PathBuf,
    pub config: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

fn read_config(path: Option<&Path>) -> Result<TrackerConfig, Failure> {
    let Some(path) = path else {
        return Ok(TrackerConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))?;
    TrackerConfig::from_json_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p.display(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub async fn track(client: &Client, args: TrackArgs) -> Result<(), Failure> {
    let config = read_config(args.config.as_deref())?;
    let set = read_detections(&args.detections, args.features.as_deref(), &config)?;

    let session = client.create_session(&config).await?;
    let start = Instant::now();
    let mut outputs = Vec::new();
    let frames = set.dense_frames();
    for (frame, detections) in &frames {
        match client.step(session.session_id, *frame, detections).await {
            Ok(out) => outputs.push(out),
            Err(e) => {
                let _ = client.close_session(session.session_id).await;
                return Err(Failure::from(e));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    client.close_session(session.session_id).await?;

    write_results(&outputs, &args.output)?;
    let track_count = outputs
        .iter()
        .flat_map(|f| f.tracks.iter().map(|t| t.track_id))
        .collect::<BTreeSet<_>>()
        .len();
    if let Some(path) = &args.manifest {
        let manifest = RunManifest {
            sequence: sequence_name(&args.detections),
            detections: args.detections.clone(),
            features: args.features.clone(),
            config: session.config,
            output: args.output.clone(),
            frame_count: frames.len(),
            detection_count: set.detection_count(),
            track_count,
            wall_clock_ms: elapsed * 1e3,
            frames_per_second: if elapsed > 0.0 { frames.len() as f64 / elapsed } else { 0.0 },
        };
        write_json(Some(path), &manifest)?;
    }
    eprintln!(
        "tracked {} frames, {track_count} confirmed tracks -> {}",
        frames.len(),
        args.output.display()
    );
    Ok(())
}

pub async fn evaluate(client: &Client, gt: &Path, result: &Path, report: Option<&Path>) -> Result<(), Failure> {
    let ground_truth = read_ground_truth(gt)?.into_values().flatten().collect();
    let results = read_results(result)?;
    let metrics = client
        .evaluate(&EvaluateRequest {
            ground_truth,
            results,
            iou_threshold: DEFAULT_IOU_THRESHOLD,
        })
        .await?;
    write_json(report, &metrics)
}

pub async fn gate_check(client: &Client, samples: usize, seed: u64) -> Result<(), Failure> {
    let report = client.gate_check(samples, seed).await?;
    write_json(None, &report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Diagnostic(format!(
            "gate check failed: fraction {} outside [{}, {}]",
            report.fraction, report.lower, report.upper
        )))
    }
}

pub async fn render(client: &Client, result: &Path, (width, height): (u32, u32), out_dir: &Path) -> Result<(), Failure> {
    let outputs = read_results(result)?;
    let rendered = client
        .render(&RenderRequest {
            frame_width: width,
            frame_height: height,
            outputs,
            last_frame: None,
        })
        .await?;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir.display(), e))?;
    for frame in &rendered.frames {
        let path = out_dir.join(format!("{:06}.svg", frame.frame_index));
        std::fs::write(&path, &frame.svg).map_err(|e| Failure::io(path.display(), e))?;
    }
    eprintln!("rendered {} frames to {}", rendered.frames.len(), out_dir.display());
    Ok(())
}

pub async fn network(client: &Client) -> Result<(), Failure> {
    let shapes = client.descriptor_network().await?;
    println!("{:<28} {}", "input", shapes.input);
    for layer in &shapes.layers {
        println!("{:<28} {}", layer.name, layer.output);
    }
    Ok(())
}
