use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use cycdiag::cohomology::{cohomology_basis, power_op, Normalization};
use cycdiag::diagonal::{enumerate_pairs, DiagonalEngine};
use cycdiag::resolutions::{nf_words, PsiEngine};
use cycdiag::simplicial::AugSimplicialSet;
use cycdiag::straightening::Straightening;

fn engine(name: &str) -> DiagonalEngine {
    DiagonalEngine::new(Straightening::preset(name).unwrap())
}

fn psi_recursion(c: &mut Criterion) {
    let mut g = c.benchmark_group("psi");
    for (name, q) in [("3", 8usize), ("5a", 5)] {
        let st = Straightening::preset(name).unwrap();
        let words = nf_words(st.r(), q);
        g.bench_with_input(BenchmarkId::new(name, q), &words, |b, words| {
            b.iter_batched(
                || PsiEngine::new(st.clone()),
                |p| words.iter().map(|w| p.psi(w).unwrap().is_zero() as usize).sum::<usize>(),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn mu_composed(c: &mut Criterion) {
    let mut g = c.benchmark_group("mu_universal");
    g.sample_size(10);
    for (name, n, q) in [("3", 4, 6usize), ("5a", 2, 6)] {
        g.bench_function(BenchmarkId::new(name, format!("n{n}_q{q}")), |b| {
            b.iter_batched(|| engine(name), |e| e.mu_universal(n, q, 0).unwrap().len(), BatchSize::SmallInput)
        });
    }
    g.finish();
}

fn mu_direct(c: &mut Criterion) {
    let mut g = c.benchmark_group("mu_direct");
    g.sample_size(10);
    for (name, n, q) in [("3", 4, 6usize), ("5a", 2, 6)] {
        let e = engine(name);
        let pairs = enumerate_pairs(e.r(), n, q);
        g.bench_function(BenchmarkId::new(name, format!("n{n}_q{q}")), |b| {
            b.iter_batched(
                || engine(name),
                |e| pairs.iter().filter(|p| !e.coefficient_direct(p).unwrap().is_integer()).count(),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn power(c: &mut Criterion) {
    let mut g = c.benchmark_group("power_op");
    g.sample_size(10);
    let x = AugSimplicialSet::simplex_boundary(4);
    let h = cohomology_basis(&x, 3).unwrap();
    let class = h.generator(3, 0).unwrap();
    g.bench_function("r3_boundary4_P0", |b| {
        b.iter_batched(
            || engine("3"),
            |e| power_op(&e, &x, 0, &class, Normalization::Standard).unwrap().output.is_zero(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, psi_recursion, mu_composed, mu_direct, power);
criterion_main!(benches);
