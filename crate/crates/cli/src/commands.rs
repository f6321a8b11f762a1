use afrelay::montecarlo::{simulate, Metric, SimConfig};
use afrelay::oracle::k_reference;
use afrelay::performance::{bep, capacity, outage};
use afrelay::quadrature::QuadratureSpec;
use afrelay::relay::{
    cdf_eq, cdf_eq_quadrature, db_to_linear, pdf_eq, pdf_minbound, series_cdf_coeffs, ChannelParams,
};
use afrelay::series::{eval_k0_truncated, series_coeffs};
use afrelay::validation::{run_all, ValidationConfig};
use log::{info, warn};

use crate::output::{emit_table, emit_text, round_significant, Cell, Manifest, Sink, Table};
use crate::{BesselArgs, ChannelArgs, CoeffsArgs, CoeffsFormat, DistArgs, PerfArgs, PerfMetric, Status, ValidateArgs};

type CmdResult = anyhow::Result<Status>;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    afrelay::Error::Domain(msg.into()).into()
}

fn channel_manifest(m: &mut Manifest, c: &ChannelArgs) {
    m.param("lambda_sd", c.lambda_sd)
        .param("lambda_sr", c.lambda_sr)
        .param("lambda_rd", c.lambda_rd)
        .param("k", c.k);
}

pub fn coeffs(args: &CoeffsArgs, sink: &Sink) -> CmdResult {
    let tables = args
        .k
        .iter()
        .map(|&k| series_coeffs(args.nu, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = Manifest::new("coeffs", None);
    m.param("nu", args.nu).param("k", &args.k);
    let (table, format) = match args.format {
        CoeffsFormat::Csv | CoeffsFormat::Json => {
            let mut t = Table::new(&["k", "q", "a"]);
            for table in &tables {
                for (q, &a) in table.coefficients().iter().enumerate() {
                    t.push(vec![table.k().into(), q.into(), a.into()]);
                }
            }
            let f = if args.format == CoeffsFormat::Json {
                crate::output::Format::Json
            } else {
                crate::output::Format::Csv
            };
            (t, f)
        }
        CoeffsFormat::Table1 => {
            m.param("rounding", "4 significant digits");
            let names: Vec<String> = std::iter::once("q".to_string())
                .chain(args.k.iter().map(|k| format!("k={k}")))
                .collect();
            let mut t = Table {
                columns: names,
                rows: Vec::new(),
            };
            let depth = args.k.iter().copied().max().unwrap_or(0);
            for q in 0..=depth {
                let mut row = vec![Cell::from(q)];
                for table in &tables {
                    row.push(
                        table
                            .coefficients()
                            .get(q)
                            .map_or(Cell::Missing, |&a| Cell::Num(round_significant(a, 4))),
                    );
                }
                t.push(row);
            }
            (t, crate::output::Format::Csv)
        }
    };
    emit_table(&table, m, format, sink)?;
    Ok(Status::Ok)
}

pub fn bessel(args: &BesselArgs, sink: &Sink) -> CmdResult {
    if args.x.iter().any(|&x| !(x > 0.0)) || args.beta.iter().any(|&b| !(b > 0.0)) {
        return Err(usage("beta and x values must be positive"));
    }
    let spec = QuadratureSpec::default();
    let tables = if args.nu == 0.0 {
        None
    } else {
        Some(
            args.k
                .iter()
                .map(|&k| series_coeffs(args.nu, k))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    let mut t = Table::new(&["beta", "x", "k", "series", "oracle", "rel_error"]);
    for &beta in &args.beta {
        for &x in &args.x {
            let z = beta * x;
            let oracle = k_reference(args.nu, z, &spec)?;
            for (i, &k) in args.k.iter().enumerate() {
                let series = match &tables {
                    Some(ts) => ts[i].evaluate(z)?,
                    None => eval_k0_truncated(k, z)?.value,
                };
                let rel = ((series - oracle) / oracle).abs();
                t.push(vec![beta.into(), x.into(), k.into(), series.into(), oracle.into(), rel.into()]);
            }
        }
    }
    let mut m = Manifest::new("bessel", None);
    m.param("nu", args.nu)
        .param("k", &args.k)
        .param("beta", &args.beta)
        .param("x", &args.x);
    emit_table(&t, m, args.format, sink)?;
    Ok(Status::Ok)
}

pub fn dist(args: &DistArgs, sink: &Sink) -> CmdResult {
    let gamma = args.gamma_linear.unwrap_or_else(|| db_to_linear(args.gamma_db));
    let c = &args.channel;
    let p = ChannelParams::new(gamma, c.lambda_sd, c.lambda_sr, c.lambda_rd)?;
    if args.x.iter().any(|&x| !(x >= 0.0)) {
        return Err(usage("x values must be nonnegative"));
    }
    let coeffs = series_cdf_coeffs(&p, &series_coeffs(1.0, c.k)?)?;
    let histogram = if args.with_mc {
        let cfg = SimConfig::new(args.seed, args.samples).histogram(args.bins, 0.0, args.hist_max);
        let h = simulate(&p, &cfg, Metric::PdfHistogram)?
            .histogram()
            .expect("histogram metric");
        if h.warning() {
            warn!(
                "{:.2}% of simulated samples fall outside [0, {}); raise --hist-max",
                100.0 * h.out_of_range_fraction(),
                args.hist_max
            );
        }
        Some(h)
    } else {
        None
    };
    let spec = QuadratureSpec::default();
    let mut columns = vec!["x", "cdf_eq", "pdf_eq", "cdf_quadrature"];
    if args.with_mc {
        columns.push("mc_density");
    }
    if args.with_minbound {
        columns.push("minbound_density");
    }
    let mut t = Table::new(&columns);
    let mut excursions = 0usize;
    for &x in &args.x {
        let cdf = cdf_eq(&coeffs, x)?;
        excursions += usize::from(cdf.is_excursion());
        let mut row = vec![
            Cell::from(x),
            cdf.value.into(),
            pdf_eq(&coeffs, x)?.into(),
            cdf_eq_quadrature(&p, x, &spec)?.into(),
        ];
        if let Some(h) = &histogram {
            row.push(h.density_at(x).into());
        }
        if args.with_minbound {
            row.push(pdf_minbound(&p, x)?.into());
        }
        t.push(row);
    }
    if excursions > 0 {
        warn!("series CDF left [0, 1] at {excursions} grid points and was clamped");
    }
    let mut m = Manifest::new("dist", args.with_mc.then_some(args.seed));
    channel_manifest(&mut m, c);
    m.param("gamma", gamma).param("x", &args.x);
    if args.with_mc {
        m.param("samples", args.samples)
            .param("bins", args.bins)
            .param("hist_max", args.hist_max);
    }
    m.param("with_minbound", args.with_minbound);
    emit_table(&t, m, args.format, sink)?;
    Ok(Status::Ok)
}

pub fn perf(args: &PerfArgs, sink: &Sink) -> CmdResult {
    let c = &args.channel;
    let gammas: Vec<f64> = match &args.gamma_linear {
        Some(g) => g.clone(),
        None => args.gamma_db.iter().map(|&db| db_to_linear(db)).collect(),
    };
    if gammas.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
        return Err(usage("transmit SNR must be finite and nonnegative"));
    }
    let mut metrics = args.metrics.clone();
    metrics.sort();
    metrics.dedup();
    let threshold = db_to_linear(args.threshold_db);
    let base = ChannelParams::new(1.0, c.lambda_sd, c.lambda_sr, c.lambda_rd)?;
    let coeffs = series_cdf_coeffs(&base, &series_coeffs(1.0, c.k)?)?;
    if args.relays > 1 {
        info!("closed-form columns are single-relay; Monte Carlo uses {} relays", args.relays);
    }
    let capacity_scale = if args.bits { std::f64::consts::LN_2.recip() } else { 1.0 };
    let capacity_name = if args.bits { "capacity_bits" } else { "capacity_nats" };

    let mut columns = vec!["gamma_db".to_string(), "gamma".to_string()];
    for metric in &metrics {
        let name = match metric {
            PerfMetric::Outage => "outage",
            PerfMetric::Bep => "bep",
            PerfMetric::Capacity => capacity_name,
        };
        columns.push(name.to_string());
        if args.with_mc {
            columns.push(format!("mc_{name}"));
            columns.push(format!("mc_{name}_se"));
        }
    }
    let mut t = Table {
        columns,
        rows: Vec::new(),
    };
    for &gamma in &gammas {
        let gamma_db = if gamma > 0.0 { Some(10.0 * gamma.log10()) } else { None };
        let mut row = vec![Cell::from(gamma_db), Cell::from(gamma)];
        // At zero transmit SNR nothing gets through.
        let at_snr = if gamma > 0.0 { Some(coeffs.with_gamma(gamma)?) } else { None };
        let params = at_snr.as_ref().map(|s| *s.params());
        for metric in &metrics {
            let (closed, mc_metric, scale) = match metric {
                PerfMetric::Outage => (
                    at_snr.as_ref().map_or(Ok(1.0), |s| outage(s, threshold))?,
                    Metric::Outage { snr_threshold: threshold },
                    1.0,
                ),
                PerfMetric::Bep => (at_snr.as_ref().map_or(Ok(0.5), bep)?, Metric::Bep, 1.0),
                PerfMetric::Capacity => (
                    at_snr.as_ref().map_or(Ok(0.0), capacity)? * capacity_scale,
                    Metric::Capacity,
                    capacity_scale,
                ),
            };
            row.push(closed.into());
            if args.with_mc {
                match params {
                    Some(p) => {
                        let cfg = SimConfig::new(args.seed, args.samples).relays(args.relays);
                        let est = simulate(&p, &cfg, mc_metric)?.estimate().expect("scalar metric");
                        row.push((est.value * scale).into());
                        row.push((est.std_error * scale).into());
                    }
                    None => {
                        row.push(Cell::Missing);
                        row.push(Cell::Missing);
                    }
                }
            }
        }
        t.push(row);
    }
    let mut m = Manifest::new("perf", args.with_mc.then_some(args.seed));
    channel_manifest(&mut m, c);
    m.param("gamma", &gammas)
        .param("threshold_db", args.threshold_db)
        .param("metrics", metrics.iter().map(|x| format!("{x:?}").to_lowercase()).collect::<Vec<_>>())
        .param("bits", args.bits);
    if args.with_mc {
        m.param("samples", args.samples).param("relays", args.relays);
    }
    emit_table(&t, m, args.format, sink)?;
    Ok(Status::Ok)
}

pub fn validate(args: &ValidateArgs, sink: &Sink) -> CmdResult {
    if args.samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    let cfg = ValidationConfig {
        seed: args.seed,
        samples: args.samples,
    };
    let report = run_all(&cfg);
    for o in &report.outcomes {
        info!("{}", o.summary_line());
    }
    let mut m = Manifest::new("validate", Some(args.seed));
    m.param("samples", args.samples);
    emit_text(&report.render(), m, sink)?;
    Ok(if report.all_passed() {
        Status::Ok
    } else {
        Status::ValidationFailed
    })
}
