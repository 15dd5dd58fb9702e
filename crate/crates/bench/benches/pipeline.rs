use criterion::{black_box, criterion_group, criterion_main, Criterion};

use gcsl_core::bltl::check;
use gcsl_core::gcsl::parse_contract;
use gcsl_core::model::load_model;
use gcsl_core::sim::{simulate, SimConfig};
use gcsl_core::smc::{estimate, Mode, SmcConfig};
use gcsl_core::translate::{translate_contract, TranslateOptions};
use gcsl_core::{TimeSpan, TimeUnit};

const FIRE: &str = include_str!("../../../fixtures/fire.sosm");
const REQ2: &str = include_str!("../../../fixtures/req2.gcsl");
const REQ3: &str = include_str!("../../../fixtures/req3.gcsl");

fn pipeline(c: &mut Criterion) {
    let model = load_model(FIRE).unwrap();
    let req3 = parse_contract(REQ3).unwrap();
    let req2 = parse_contract(REQ2).unwrap();
    let seven_months = TimeSpan::new(7.0, TimeUnit::Month);
    let four_months = TimeSpan::new(4.0, TimeUnit::Month);
    let opts = TranslateOptions::default();

    c.bench_function("parse requirement 3", |b| b.iter(|| parse_contract(black_box(REQ3)).unwrap()));
    c.bench_function("translate requirement 3", |b| {
        b.iter(|| translate_contract(black_box(&req3), &model, seven_months, opts).unwrap())
    });

    let cfg = SimConfig::new(1, four_months);
    c.bench_function("simulate fire 4 months", |b| b.iter(|| simulate(&model, black_box(&cfg)).unwrap()));

    let long = simulate(&model, &SimConfig::new(1, seven_months)).unwrap();
    let f3 = translate_contract(&req3, &model, seven_months, opts).unwrap();
    c.bench_function("monitor requirement 3", |b| b.iter(|| check(&f3, black_box(&long), &model).unwrap()));

    let f2 = translate_contract(&req2, &model, four_months, opts).unwrap();
    let mut smc = SmcConfig::new(1, Mode::Fixed(8));
    smc.horizon = Some(four_months);
    smc.jobs = 1;
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("8 runs of requirement 2", |b| b.iter(|| estimate(&f2, &model, &smc).unwrap()));
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
