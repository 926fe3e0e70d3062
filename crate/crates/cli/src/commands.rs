use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use log::{info, warn};

use faceqa_core::annotator::{annotate_batch, clean_labels, CleaningConfig};
use faceqa_core::batch::Abort;
use faceqa_core::endpoint::mock::HashMock;
use faceqa_core::endpoint::Endpoint;
use faceqa_core::eval::{emit_report, run_benchmark, score, EvalOptions, EvalRecord, MetricsReport, RunMeta};
use faceqa_core::manifest::default_stage_spec;
use faceqa_core::qaforge::{
    assemble_mix, build_zeroshot_suite, gen_attribute_qa, gen_caption_pairs, reformulate_dataset, AdapterOptions,
    FeatureDescriptions, MixSpec, ZeroShotItem,
};
use faceqa_core::schema::{read_records, write_records, Mode, Record};
use faceqa_core::{AttributeSchema, FaceImageRef, PersonAnnotation, QAPair};

use crate::config::{FileConfig, Overrides, RunConfig};
use crate::http::HttpEndpoint;
use crate::{Cli, Command, MultiFace};

/// The endpoint stopped the batch; maps to exit code 2.
#[derive(Debug)]
pub struct EndpointFailure(pub String);

impl fmt::Display for EndpointFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "endpoint failure: {}", self.0)
    }
}

impl std::error::Error for EndpointFailure {}

fn aborted(abort: Option<Abort>, done: usize, total: usize) -> Result<()> {
    match abort {
        None => Ok(()),
        Some(a) => Err(EndpointFailure(format!(
            "{} (at item {}; {done} of {total} items written)",
            a.reason, a.at_index
        ))
        .into()),
    }
}

fn read<T: Record>(path: &Path, mode: Mode) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_records(BufReader::new(file), mode).with_context(|| format!("reading {}", path.display()))
}

fn write<T: Record>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_records(records, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {} {} records to {}", records.len(), T::KIND, path.display());
    Ok(())
}

fn write_opt<T: Record>(path: Option<&PathBuf>, records: &[T]) -> Result<()> {
    match path {
        Some(p) => write(p, records),
        None => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn schema(cfg: &RunConfig) -> Result<AttributeSchema> {
    match &cfg.schema {
        Some(p) => AttributeSchema::from_toml_file(p).with_context(|| format!("loading schema {}", p.display())),
        None => Ok(AttributeSchema::builtin()),
    }
}

fn cleaning(cfg: &RunConfig) -> Result<CleaningConfig> {
    match &cfg.cleaning {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing cleaning rules {}", p.display()))
        }
        None => Ok(CleaningConfig::default()),
    }
}

fn endpoint(cfg: &RunConfig) -> Result<Box<dyn Endpoint>> {
    let url = cfg
        .endpoint
        .as_deref()
        .context("no endpoint: pass --endpoint, set FACEQA_ENDPOINT or add `endpoint` to the config file")?;
    if let Some(rest) = url.strip_prefix("mock://") {
        let seed = if rest.is_empty() {
            0
        } else {
            rest.parse().with_context(|| format!("mock endpoint seed {rest:?} is not an integer"))?
        };
        return Ok(Box::new(HashMock::new(seed)));
    }
    if url.starts_with("http://") || url.starts_with("https://") {
        let token = std::env::var(&cfg.credential_env).ok().filter(|t| !t.is_empty());
        if token.is_none() {
            warn!("{} is not set; calling {url} without credentials", cfg.credential_env);
        }
        return Ok(Box::new(HttpEndpoint::new(url, token, Duration::from_secs(cfg.timeout_secs))?));
    }
    bail!("unsupported endpoint {url:?}: expected mock://SEED, http:// or https://")
}

/// Groups of consecutive-or-not records sharing an image, in first-appearance order.
fn by_image(annos: &[PersonAnnotation]) -> Vec<Vec<PersonAnnotation>> {
    let mut order: Vec<Vec<PersonAnnotation>> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for a in annos {
        let slot = *index.entry(a.image.id.as_str()).or_insert_with(|| {
            order.push(Vec::new());
            order.len() - 1
        });
        order[slot].push(a.clone());
    }
    order
}

pub fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(
        Overrides {
            seed: g.seed,
            strict: g.strict,
            endpoint: g.endpoint,
            credential_env: g.credential_env,
            concurrency: g.concurrency,
            retries: g.retries,
            qps: g.qps,
            timeout_secs: g.timeout_secs,
            schema: g.schema,
            cleaning: g.cleaning,
        },
        file,
    )?;
    let mode = cfg.mode;

    match cli.command {
        Command::Annotate {
            input,
            out,
            failures,
            report,
            responses,
        } => {
            let images: Vec<FaceImageRef> = read(&input, mode)?;
            let schema = schema(&cfg)?;
            let rules = cleaning(&cfg)?;
            let ep = endpoint(&cfg)?;
            let run = annotate_batch(&images, ep.as_ref(), &cfg.limits(), &schema, &rules);
            let annos = run.annotations();
            write(&out, &annos)?;
            let fails = run.failures();
            if !fails.is_empty() {
                warn!("{} of {} images produced no usable annotation", fails.len(), images.len());
            }
            write_opt(failures.as_ref(), &fails)?;
            write_opt(report.as_ref(), &run.drops())?;
            write_opt(responses.as_ref(), &run.raw_responses())?;
            let done = run.outcomes.iter().flatten().count();
            aborted(run.aborted, done, images.len())
        }

        Command::Clean { input, out, report } => {
            let annos: Vec<PersonAnnotation> = read(&input, mode)?;
            let schema = schema(&cfg)?;
            let rules = cleaning(&cfg)?;
            let mut kept = Vec::new();
            let mut drops = Vec::new();
            for group in by_image(&annos) {
                let outcome = clean_labels(&group, &schema, &rules);
                drops.extend(outcome.drop_records(&group[0].image.id));
                kept.extend(outcome.kept);
            }
            info!("kept {} of {} people", kept.len(), annos.len());
            write(&out, &kept)?;
            write_opt(report.as_ref(), &drops)
        }

        Command::Genqa {
            annos,
            out,
            multi_face,
            captions,
            skips,
        } => {
            let seed = cfg.require_seed("genqa")?;
            let people: Vec<PersonAnnotation> = read(&annos, mode)?;
            let schema = schema(&cfg)?;
            let mut pairs = Vec::new();
            let mut skipped = Vec::new();
            for group in by_image(&people) {
                let multi = match multi_face {
                    MultiFace::Auto => group.len() > 1,
                    MultiFace::On => true,
                    MultiFace::Off => false,
                };
                for p in &group {
                    let qa = gen_attribute_qa(p, multi, seed, &schema)
                        .with_context(|| format!("image {} person {}", p.image.id, p.person_index))?;
                    pairs.extend(qa.pairs);
                    skipped.extend(qa.skipped);
                }
            }
            write(&out, &pairs)?;
            write_opt(skips.as_ref(), &skipped)?;
            if let Some(path) = captions {
                let run = gen_caption_pairs(&people);
                if !run.skipped.is_empty() {
                    warn!("{} images have no caption text", run.skipped.len());
                }
                write(&path, &run.pairs)?;
            }
            Ok(())
        }

        Command::Reformulate {
            dataset,
            labels,
            out,
            image_root,
            skips,
            no_shuffle,
            no_descriptions,
        } => {
            let seed = cfg.require_seed("reformulate")?;
            let text = std::fs::read_to_string(&labels).with_context(|| format!("cannot read {}", labels.display()))?;
            let opts = AdapterOptions {
                image_root,
                seed,
                shuffle_options: !no_shuffle,
                describe_attributes: !no_descriptions,
            };
            let output = reformulate_dataset(dataset, &text, &opts).with_context(|| format!("reading {}", labels.display()))?;
            info!(
                "{dataset}: {} items, {} pairs, {} skipped questions",
                output.items,
                output.pairs.len(),
                output.skips.len()
            );
            write(&out, &output.pairs)?;
            write_opt(skips.as_ref(), &output.skips)
        }

        Command::Zeroshot {
            annos,
            descriptions,
            out,
            target,
        } => {
            let seed = cfg.require_seed("zeroshot")?;
            let items: Vec<ZeroShotItem> = read(&annos, mode)?;
            let desc = match descriptions {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?;
                    FeatureDescriptions::from_toml_str(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => FeatureDescriptions::default(),
            };
            let suite = build_zeroshot_suite(&items, &desc, seed, target)?;
            write(&out, &suite)
        }

        Command::Mix {
            spec,
            out,
            manifest,
            scale,
        } => {
            let mut mix = MixSpec::from_toml_file(&spec).with_context(|| format!("loading mix spec {}", spec.display()))?;
            if let Some(s) = cfg.seed {
                mix.seed = s;
            }
            let base = spec.parent().unwrap_or(Path::new("."));
            let mut inventories = BTreeMap::new();
            for src in &mix.sources {
                let rel = src
                    .path
                    .as_deref()
                    .with_context(|| format!("source {:?} has no path", src.role))?;
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                let lines: Vec<String> = text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect();
                inventories.insert(src.role.clone(), lines);
            }
            let output = assemble_mix(&mix, &inventories, scale)?;
            let mut body = output.records.join("\n");
            if !body.is_empty() {
                body.push('\n');
            }
            write_text(&out, &body)?;
            info!("wrote {} mixed records to {}", output.records.len(), out.display());
            write(&manifest, std::slice::from_ref(&output.manifest))
        }

        Command::Manifest { stage, scale, out } => {
            let mut spec = default_stage_spec(stage)?;
            if let Some(s) = scale {
                spec = spec.scaled(s);
            }
            if let Some(s) = cfg.seed {
                spec.data_mix.seed = s;
            }
            match out {
                Some(p) => write(&p, std::slice::from_ref(&spec)),
                None => {
                    write_records(std::slice::from_ref(&spec), std::io::stdout().lock())?;
                    Ok(())
                }
            }
        }

        Command::Eval {
            qa,
            out,
            benchmark,
            system,
        } => {
            let questions: Vec<QAPair> = read(&qa, mode)?;
            let benchmark = benchmark.unwrap_or_else(|| {
                qa.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "benchmark".to_string())
            });
            let ep = endpoint(&cfg)?;
            let run = run_benchmark(&questions, ep.as_ref(), &cfg.limits(), &EvalOptions { benchmark, system });
            let records = run.completed();
            write(&out, &records)?;
            aborted(run.aborted, records.len(), questions.len())
        }

        Command::Score { input, out, timestamp } => {
            let records: Vec<EvalRecord> = read(&input, mode)?;
            let report = score(&records, &RunMeta { seed: cfg.seed, timestamp })
                .with_context(|| format!("scoring {}", input.display()))?;
            info!(
                "{} on {}: accuracy {:.4}, parse rate {:.4} over {} questions",
                report.endpoint_id, report.benchmark, report.overall.accuracy, report.overall.parse_rate, report.overall.n
            );
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            write_text(&out, &text)
        }

        Command::Report { input, layout, out } => {
            let mut reports = Vec::new();
            for p in &input {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                let r: MetricsReport =
                    serde_json::from_str(&text).with_context(|| format!("{} is not a metrics report", p.display()))?;
                reports.push(r);
            }
            let rendered = emit_report(&reports, layout)?;
            print!("{}", rendered.table);
            if let Some(p) = out {
                let mut text = serde_json::to_string_pretty(&rendered.summary)?;
                text.push('\n');
                write_text(&p, &text)?;
            }
            Ok(())
        }
    }
}
