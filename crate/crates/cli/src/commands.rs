use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use netload_core::data::{
    basis_by_date, customer_indices, denormalize, encode_condition, generate_synthetic_dataset, io, prepare_dataset,
    split_dataset, Bounds, PreparedDataset,
};
use netload_core::denoiser::{Denoiser, Variant};
use netload_core::diffusion::{build_schedule, sample as run_sampler, write_loss_log, ConditionedDenoiser, Trainer};
use netload_core::metrics::{build_report, Ensemble, MetricReport};
use netload_core::numerics::Tensor;
use netload_core::solarphys::basis_matrix;
use netload_core::{Error, Result, STEPS_PER_DAY};

use crate::config::RunConfig;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))
}

pub fn basis(cfg: &RunConfig, out: &Path, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<()> {
    let weather = io::read_weather_csv(open(&cfg.weather_path()?)?, cfg.site())?;
    let template = cfg.pv_template()?;
    let azimuths = cfg.azimuths();
    let mut written = 0;
    for date in weather.dates() {
        if start.is_some_and(|s| date < s) || end.is_some_and(|e| date > e) {
            continue;
        }
        let day = weather.for_date(date);
        if day.len() != STEPS_PER_DAY {
            eprintln!("warning: skipping {date}: {} weather rows", day.len());
            continue;
        }
        let b = basis_matrix(&day, &template, &azimuths)?;
        io::write_basis_csv(create(&out.join(format!("basis_{date}.csv")))?, &b)?;
        written += 1;
    }
    println!("wrote {written} basis files to {}", out.display());
    Ok(())
}

pub fn synth_data(cfg: &RunConfig, out: &Path) -> Result<()> {
    let ds = generate_synthetic_dataset(&cfg.synthetic()?)?;
    io::write_netload_csv(create(&out.join("netload.csv"))?, &ds.profiles)?;
    io::write_components_csv(create(&out.join("components.csv"))?, &ds.profiles)?;
    io::write_pv_csv(create(&out.join("pv.csv"))?, &ds.pv)?;
    io::write_weather_csv(create(&out.join("weather.csv"))?, &ds.weather)?;
    println!(
        "wrote {} profiles for {} customers to {}",
        ds.profiles.len(),
        ds.pv.len(),
        out.display()
    );
    Ok(())
}

struct Loaded {
    data: PreparedDataset,
    weather: netload_core::solarphys::WeatherSeries,
}

fn load_data(cfg: &RunConfig) -> Result<Loaded> {
    let weather = io::read_weather_csv(open(&cfg.weather_path()?)?, cfg.site())?;
    let profiles = io::read_netload_csv(open(&cfg.netload_path()?)?)?;
    let pv = io::read_pv_csv(open(&cfg.pv_path()?)?)?;
    let data = prepare_dataset(
        profiles,
        pv,
        &weather,
        &cfg.pv_template()?,
        &cfg.azimuths(),
        cfg.capacity_scaling()?,
    )?;
    Ok(Loaded { data, weather })
}

fn model_dir(out: &Path, variant: Variant) -> PathBuf {
    out.join(variant.label())
}

pub fn train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let Loaded { data, .. } = load_data(cfg)?;
    let split = split_dataset(&data.profiles, cfg.split_ratio(), cfg.seed_split.unwrap_or(0))?;
    let dcfg = cfg.denoiser()?;
    let tcfg = cfg.train()?;
    let mut net = Denoiser::new(dcfg.clone(), cfg.seed_train.unwrap_or(0))?;
    if cfg.zero_init_phi.unwrap_or(false) {
        net.zero_physics_branch();
    }
    let dir = model_dir(out, dcfg.variant);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let mut trainer = Trainer::new(net, tcfg)?;
    let total = trainer.config().steps;
    trainer.fit_with(&data, &split.train, |r| {
        eprintln!("step {:>6}/{total}  loss {:.5}  lr {:.2e}", r.step, r.loss, r.learning_rate);
    })?;
    write_loss_log(create(&dir.join("loss.csv"))?, trainer.log())?;
    let ema = trainer.ema().shadow().clone();
    let model = trainer.model();
    model.save(&dir.join("model.ckpt"))?;
    model.save_params(&dir.join("ema.ckpt"), &ema)?;
    println!(
        "trained {} for {} steps on {} profiles; checkpoints in {}",
        dcfg.variant,
        total,
        split.train.len(),
        dir.display()
    );
    Ok(())
}

fn parse_condition(s: &str) -> Result<(u32, NaiveDate)> {
    let bad = || Error::Input(format!("condition `{s}` is not CUSTOMER_ID:YYYY-MM-DD"));
    let (id, date) = s.split_once(':').ok_or_else(bad)?;
    let id = id.trim().parse().map_err(|_| bad())?;
    let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|_| bad())?;
    Ok((id, date))
}

pub fn sample(cfg: &RunConfig, out: &Path, requested: &[String]) -> Result<()> {
    let variant = cfg.variant()?;
    let dir = model_dir(out, variant);
    let ckpt = dir.join("ema.ckpt");
    if !ckpt.exists() {
        return Err(Error::Input(format!(
            "no checkpoint at {}; run `netload train --variant {variant}` first",
            ckpt.display()
        )));
    }
    let saved = dir.join("config.toml");
    let mut cfg = cfg.clone();
    if saved.exists() {
        let mut trained = RunConfig::load(&saved)?;
        trained.overlay(&RunConfig {
            samples: cfg.samples,
            seed_sample: cfg.seed_sample,
            clip: cfg.clip.clone(),
            chunk_size: cfg.chunk_size,
            ..Default::default()
        });
        cfg = trained;
    }
    let net = Denoiser::load(cfg.denoiser()?, &ckpt)?;
    let tcfg = cfg.train()?;
    let schedule = build_schedule(tcfg.beta_1, tcfg.beta_last, tcfg.diffusion_steps)?;
    let Loaded { data, weather } = load_data(&cfg)?;

    let conditions: Vec<(u32, NaiveDate)> = if requested.is_empty() {
        let split = split_dataset(&data.profiles, cfg.split_ratio(), cfg.seed_split.unwrap_or(0))?;
        split.test.iter().map(|&i| (data.profiles[i].customer_id, data.profiles[i].date)).collect()
    } else {
        requested.iter().map(|s| parse_condition(s)).collect::<Result<_>>()?
    };
    if conditions.is_empty() {
        return Err(Error::Input("no conditions to sample".into()));
    }

    let mut index = data.customer_index.clone();
    let unseen: Vec<u32> = conditions.iter().map(|c| c.0).filter(|id| !index.contains_key(id)).collect();
    for id in customer_indices(unseen)?.into_keys() {
        eprintln!("warning: customer {id} was not in the training data; sampling anyway");
        let next = index.len();
        index.insert(id, next);
    }
    let pooled = Bounds::new(
        data.bounds.values().map(|b| b.min).fold(f64::INFINITY, f64::min),
        data.bounds.values().map(|b| b.max).fold(f64::NEG_INFINITY, f64::max),
    )?;

    let members = cfg.members()?;
    let basis = basis_by_date(&weather, &cfg.pv_template()?, &cfg.azimuths(), conditions.iter().map(|c| c.1))?;
    let mut cond_rows = Vec::new();
    let mut basis_rows = Vec::new();
    for &(id, date) in &conditions {
        let caps = data
            .capacities_for(id)
            .ok_or_else(|| Error::Input(format!("no PV metadata for customer {id}")))?;
        let c = encode_condition(index[&id], &caps, date)?;
        for _ in 0..members {
            cond_rows.push(c.as_slice().to_vec());
            basis_rows.push(basis[&date].data().to_vec());
        }
    }
    let cond = Tensor::from_rows(&cond_rows)?;
    let basis_t = Tensor::from_rows(&basis_rows)?;
    let predictor = ConditionedDenoiser {
        net: &net,
        cond: &cond,
        basis: (variant == Variant::PhysicsInformed).then_some(&basis_t),
    };
    let samples = run_sampler(&predictor, cond_rows.len(), &schedule, &cfg.sampler()?)?;

    let path = dir.join("samples.csv");
    let mut wtr = csv::Writer::from_writer(create(&path)?);
    let mut header = vec!["customer_id".to_string(), "date".to_string(), "member".to_string()];
    header.extend((0..STEPS_PER_DAY).map(|t| format!("t{t}")));
    wtr.write_record(&header).map_err(Error::from)?;
    for (k, &(id, date)) in conditions.iter().enumerate() {
        let bounds = data.bounds.get(&id).copied().unwrap_or(pooled);
        for j in 0..members {
            let kw = denormalize(samples.row(k * members + j), bounds);
            let mut row = vec![id.to_string(), date.to_string(), j.to_string()];
            row.extend(kw.iter().map(f64::to_string));
            wtr.write_record(&row).map_err(Error::from)?;
        }
    }
    wtr.flush()?;
    println!(
        "wrote {} trajectories ({} conditions x {members}) to {}",
        samples.rows(),
        conditions.len(),
        path.display()
    );
    Ok(())
}

type Grouped = Vec<((u32, NaiveDate), Vec<Vec<f64>>)>;

fn read_samples(path: &Path) -> Result<Grouped> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out: Grouped = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let err = |msg: &str| Error::Parse { line, msg: msg.to_string() };
        let id: u32 = rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| err("invalid customer_id"))?;
        let date = rec
            .get(1)
            .and_then(|v| NaiveDate::parse_from_str(v, "%Y-%m-%d").ok())
            .ok_or_else(|| err("invalid date"))?;
        let values = (3..3 + STEPS_PER_DAY)
            .map(|i| rec.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| err("invalid value")))
            .collect::<Result<Vec<_>>>()?;
        match out.last_mut() {
            Some((key, rows)) if *key == (id, date) => rows.push(values),
            _ => out.push(((id, date), vec![values])),
        }
    }
    Ok(out)
}

pub fn evaluate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let variants: Vec<Variant> = match &cfg.variant {
        Some(_) => vec![cfg.variant()?],
        None => vec![Variant::Baseline, Variant::PhysicsInformed],
    };
    // Without a data path of its own, use the one the models were trained on.
    let netload_path = match cfg.netload_path() {
        Ok(p) => p,
        Err(e) => variants
            .iter()
            .map(|&v| model_dir(out, v).join("config.toml"))
            .find(|p| p.exists())
            .map(|p| RunConfig::load(&p)?.netload_path())
            .unwrap_or(Err(e))?,
    };
    let profiles = io::read_netload_csv(open(&netload_path)?)?;
    let actual: BTreeMap<(u32, NaiveDate), &Vec<f64>> =
        profiles.iter().map(|p| ((p.customer_id, p.date), &p.values)).collect();
    let mut models = Vec::new();
    for v in variants {
        let path = model_dir(out, v).join("samples.csv");
        if !path.exists() {
            eprintln!("warning: no samples for {v} at {}", path.display());
            continue;
        }
        let ensembles = read_samples(&path)?
            .into_iter()
            .map(|((id, date), rows)| {
                let obs = actual
                    .get(&(id, date))
                    .ok_or_else(|| Error::Input(format!("no observed profile for customer {id} on {date}")))?;
                Ensemble::new(Tensor::from_rows(&rows)?, obs.to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        models.push((v.label().to_uppercase(), ensembles));
    }
    if models.is_empty() {
        return Err(Error::Input(format!("no samples found under {}", out.display())));
    }
    let report = build_report(&models)?;
    report.write_csv(create(&out.join("report.csv"))?)?;
    report.write_quantile_csv(create(&out.join("qs_by_quantile.csv"))?)?;
    report.write_crps_csv(create(&out.join("crps_by_slot.csv"))?)?;
    let text = report.to_text();
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn report(out: &Path, inputs: &[PathBuf]) -> Result<()> {
    let paths = if inputs.is_empty() { vec![out.join("report.csv")] } else { inputs.to_vec() };
    let mut rows = Vec::new();
    for p in &paths {
        rows.extend(MetricReport::read_csv(open(p)?)?.rows);
    }
    print!("{}", MetricReport { rows }.to_text());
    Ok(())
}
