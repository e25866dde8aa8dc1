// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "drfr/drfr.hpp"
#include "drfr/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace drfr;
using testing_support::random_matrix;
using testing_support::random_vector;

namespace {

// Pinned tolerances.
constexpr double kFdStep = 1e-5;
constexpr double kFdRelErr = 1e-4;
constexpr double kFdSeconds = 10.0;
constexpr double kMetricTol = 1e-9;
constexpr double kPsdTol = 1e-9;
constexpr double kTop1 = 0.90;
constexpr double kTop5 = 0.98;
constexpr double kE2eSeconds = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;
std::vector<EvalResult> all_results;  // every evaluation, for criterion 10

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// ---- 1 -----------------------------------------------------------------------

Matrix central_difference(Matrix param, const std::function<double(const Matrix&)>& f) {
    Matrix g(param.rows(), param.cols());
    for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double keep = param.data()[i];
        param.data()[i] = keep + kFdStep;
        const double up = f(param);
        param.data()[i] = keep - kFdStep;
        const double down = f(param);
        param.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * kFdStep);
    }
    return g;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i];
        const double n = numeric.data()[i];
        const double scale = std::max(std::abs(a), std::abs(n));
        worst = std::max(worst, scale < 1e-8 ? std::abs(a - n) : std::abs(a - n) / scale);
    }
    return worst;
}

bool near_hinge_kink(const Dataset& ds, const std::vector<QuartetIndex>& quartets,
                     const EmbeddingModel& emb, const DualMetric& m, double delta) {
    for (const auto& q : quartets) {
        const auto f = [&](std::size_t i) { return emb.embed(ds[i].features); };
        const double ya = mahalanobis(m.age, f(q.i_m), f(q.j_n)) - mahalanobis(m.age, f(q.i_m), f(q.j_m));
        const double yi = mahalanobis(m.ind, f(q.i_m), f(q.j_n)) - mahalanobis(m.ind, f(q.i_m), f(q.i_n));
        if (std::abs(ya - delta) < 1e-3 || std::abs(yi - delta) < 1e-3) return true;
    }
    return false;
}

void criterion_gradients() {
    const auto start = Clock::now();
    Rng rng(1001);
    double worst = 0.0;
    int points = 0;
    while (points < 20) {
        const auto ds = testing_support::random_grid(rng, 3, 3, 1, 4);
        const auto quartets = enumerate_quartets(ds);
        Hyperparams hyper;
        hyper.k_neighbors = 2;
        hyper.age_epsilon = 2;
        const auto graphs = build_graphs(ds, hyper);
        const EmbeddingModel emb(EmbeddingKind::Linear, random_matrix(rng, 3, 4, 0.5));
        const DualMetric m(MetricFactor(random_matrix(rng, 3, 3, 0.7)),
                           MetricFactor(random_matrix(rng, 2, 3, 0.7)));
        if (near_hinge_kink(ds, quartets, emb, m, hyper.margin_delta)) continue;
        ++points;
        const auto g = objective_gradients(ds, quartets, emb, m, graphs, hyper);
        const auto objective = [&](const EmbeddingModel& e, const DualMetric& d) {
            return total_objective(ds, quartets, e, d, graphs, hyper);
        };
        worst = std::max(worst, relative_error(g.dW, central_difference(emb.weights(), [&](const Matrix& w) {
                                                   return objective(EmbeddingModel(EmbeddingKind::Linear, w), m);
                                               })));
        worst = std::max(worst, relative_error(g.dL_age, central_difference(m.age.factor(), [&](const Matrix& l) {
                                                   return objective(emb, DualMetric(MetricFactor(l), m.ind));
                                               })));
        worst = std::max(worst, relative_error(g.dL_ind, central_difference(m.ind.factor(), [&](const Matrix& l) {
                                                   return objective(emb, DualMetric(m.age, MetricFactor(l)));
                                               })));
    }
    const double secs = seconds_since(start);
    report(1, "gradient vs central differences", worst < kFdRelErr && secs < kFdSeconds,
           fmt("20 points, max rel err %.3g (< %g), %.2f s (< %g s)", worst, kFdRelErr, secs, kFdSeconds));
}

// ---- 2 -----------------------------------------------------------------------

void criterion_metric_properties() {
    Rng rng(2002);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
        const MetricFactor m(random_matrix(rng, 1 + static_cast<Eigen::Index>(rng.below(8)), d));
        const Vector a = random_vector(rng, d), b = random_vector(rng, d), c = random_vector(rng, d);
        const double ab = mahalanobis(m, a, b);
        const double scale = std::max(1.0, ab);
        if (std::abs(ab - mahalanobis(m, b, a)) > kMetricTol * scale) ++bad;
        if (ab < -kMetricTol) ++bad;
        if (std::abs(mahalanobis(m, a, a)) > kMetricTol) ++bad;
        if (std::sqrt(ab) > std::sqrt(mahalanobis(m, a, c)) + std::sqrt(mahalanobis(m, c, b)) +
                                kMetricTol * std::max(1.0, std::sqrt(ab)))
            ++bad;
    }
    report(2, "metric properties", bad == 0,
           fmt("1000 random pairs/triples, %d violations of symmetry/non-negativity/identity/triangle at %g",
               bad, kMetricTol));
}

// ---- 3 -----------------------------------------------------------------------

void criterion_psd() {
    SyntheticSpec spec;
    spec.n_identities = 4;
    spec.ages = {20, 22, 24};
    spec.per_cell = 2;
    spec.dim = 6;
    const auto ds = generate_synthetic(spec);
    double worst_eig = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    for (const bool direct : {false, true}) {
        TrainConfig config;
        config.hyper.epochs = 10;
        config.hyper.batch_size = 12;
        config.hyper.k_neighbors = 3;
        config.direct_metric = direct;
        config.on_step = [&](const StepInfo& info) {
            ++steps;
            for (const auto* l : {&info.model->metric.age, &info.model->metric.ind}) {
                const Matrix m = l->mahalanobis_matrix();
                worst_eig = std::min(worst_eig, oracle::jacobi_eigen(0.5 * (m + m.transpose())).first(0));
            }
        };
        fit(ds, config);
    }

    Rng rng(3003);
    double worst_idem = 0.0, worst_oracle = 0.0;
    int closer = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix a = random_matrix(rng, 4, 4);
        const Matrix s = 0.5 * (a + a.transpose());
        const Matrix p = psd_project(s);
        worst_idem = std::max(worst_idem, (psd_project(p) - p).cwiseAbs().maxCoeff());
        worst_oracle = std::max(worst_oracle, (p - oracle::clamp_psd(s)).cwiseAbs().maxCoeff());
        const double dist = (s - p).norm();
        for (int probe = 0; probe < 20; ++probe) {
            const Matrix b = random_matrix(rng, 4, 4);
            if ((s - oracle::clamp_psd(p + 0.1 * b * b.transpose())).norm() < dist - kPsdTol) ++closer;
        }
    }
    const bool ok = worst_eig >= -kPsdTol && worst_idem <= kPsdTol && worst_oracle <= kPsdTol && closer == 0;
    report(3, "PSD suite", ok,
           fmt("%zu steps (factor + direct-M), min eig %.3g (>= -%g); 100 matrices: idempotence %.3g, "
               "vs clamp oracle %.3g (<= %g), %d closer PSD probes",
               steps, worst_eig, kPsdTol, worst_idem, worst_oracle, kPsdTol, closer));
}

// ---- 4 -----------------------------------------------------------------------

void criterion_mining() {
    Rng rng(4004);
    int mismatches = 0;
    std::size_t mined_total = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = testing_support::random_grid(rng, 4, 4, 2, 3);
        std::vector<std::size_t> all(ds.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        rng.shuffle(std::span<std::size_t>(all));
        const std::size_t size = 4 + static_cast<std::size_t>(rng.below(13));
        const std::vector<std::size_t> batch(all.begin(), all.begin() + size);
        const EmbeddingModel emb(EmbeddingKind::Linear, random_matrix(rng, 3, 3));
        const DualMetric m(MetricFactor(random_matrix(rng, 3, 3)), MetricFactor(random_matrix(rng, 3, 3)));
        const auto mined = mine_quartets(batch, ds, emb, m);
        mined_total += mined.size();
        if (!brute_force::same_selection(mined, brute_force::mine(batch, ds, emb, m))) ++mismatches;
    }
    report(4, "mining vs exhaustive selection", mismatches == 0,
           fmt("50 batches of <= 16 samples, %zu quartets mined, %d mismatches", mined_total, mismatches));
}

// ---- 5 -----------------------------------------------------------------------

void criterion_retrieval() {
    Rng rng(5005);
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(100);
        Dataset gallery;
        gallery.dim = 5;
        for (std::size_t i = 0; i < n; ++i) {
            Sample s;
            s.id = "g" + std::to_string(i);
            s.identity = static_cast<std::uint32_t>(rng.below(6));
            s.age = 20 + static_cast<std::uint32_t>(rng.below(6));
            // Roughly a fifth of the items duplicate an earlier one to exercise tie-breaks.
            s.features = (i > 0 && rng.uniform() < 0.2) ? gallery[rng.below(i)].features : random_vector(rng, 5);
            gallery.samples.push_back(std::move(s));
        }
        const Model model{EmbeddingModel(EmbeddingKind::Linear, random_matrix(rng, 4, 5)),
                          DualMetric(MetricFactor(random_matrix(rng, 4, 4)), MetricFactor(random_matrix(rng, 3, 4)))};
        const Query q{gallery[rng.below(n)], gallery[rng.below(n)]};
        const double lambda = rng.uniform(0.0, 2.0);
        const std::size_t k = 1 + rng.below(n);
        const std::size_t c = 1 + rng.below(n);
        const std::size_t kc = 1 + rng.below(c);
        if (retrieve(gallery, q, model, lambda, k) != brute_force::retrieve(gallery, q, model, lambda, k))
            ++mismatches;
        if (hierarchical_retrieve(gallery, q, model, c, kc) != brute_force::hierarchical(gallery, q, model, c, kc))
            ++mismatches;
    }
    report(5, "retrieval vs full-sort brute force", mismatches == 0,
           fmt("50 galleries of <= 100 items, dual + hierarchical, %d mismatches", mismatches));
}

// ---- 6 -----------------------------------------------------------------------

void criterion_quartet_spot_values() {
    const DualMetric eye(MetricFactor::identity(2), MetricFactor::identity(2));
    Vector p(2);
    p << 0.3, -1.7;
    const double delta = 1.0;
    const double collapse = quartet_loss(QuartetEmbeddings{p, p, p, p}, eye, delta).total;
    Vector a(2), b(2), c(2), d(2);
    a << 0, 0;
    b << 0, 1;
    c << 1, 0;
    d << 1, 1;
    const double example = quartet_loss(QuartetEmbeddings{a, b, c, d}, eye, delta).total;
    report(6, "quartet-loss spot values", collapse == 2.0 * delta && example == 2.0,
           fmt("collapse total %.17g (== 2*delta exactly), d=2 example total %.17g (== 2 exactly)", collapse,
               example));
}

// ---- 7, 8, 9 -------------------------------------------------------------------

SyntheticSpec benchmark_spec(double sigma, std::uint32_t draw) {
    SyntheticSpec spec;
    spec.n_identities = 10;
    spec.ages = parse_age_range("20:4:36");
    spec.per_cell = 3;
    spec.dim = 32;
    spec.separation = 4.0;
    spec.age_step = 1.0;
    spec.sigma = sigma;
    spec.seed = 7;
    spec.draw = draw;
    return spec;
}

// 100 seeded queries over the gallery: identity_ref (i, m), age_ref (j != i, n != m), target (i, n).
std::vector<EvalQuery> benchmark_queries(const Dataset& gallery) {
    Rng rng(123);
    std::vector<EvalQuery> queries;
    while (queries.size() < 100) {
        const auto a = rng.below(gallery.size());
        const auto b = rng.below(gallery.size());
        if (gallery[a].identity == gallery[b].identity || gallery[a].age == gallery[b].age) continue;
        std::size_t target = 0;
        while (gallery[target].identity != gallery[a].identity || gallery[target].age != gallery[b].age) ++target;
        queries.push_back({Query{gallery[a], gallery[b]}, target});
    }
    return queries;
}

// Fraction of samples whose nearest noise-free prototype carries their own labels.
double latent_oracle_accuracy(const SyntheticSpec& spec, const Dataset& ds) {
    const auto geometry = synthetic_geometry(spec);
    std::size_t correct = 0;
    for (const auto& s : ds.samples) {
        double best = 1e300;
        std::uint32_t id = 0, age = 0;
        for (std::uint32_t c = 0; c < spec.n_identities; ++c)
            for (const auto a : spec.ages) {
                const double dist = (s.features - synthetic_prototype(spec, geometry, c, a)).squaredNorm();
                if (dist < best) {
                    best = dist;
                    id = c;
                    age = a;
                }
            }
        correct += (id == s.identity && age == s.age) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct BenchmarkRun {
    double seconds = 0.0;
    double oracle = 0.0;
    EvalResult dual;
    EvalResult hierarchical;
    std::string checkpoint_bytes;
    std::string csv_bytes;
};

BenchmarkRun run_benchmark(double sigma) {
    BenchmarkRun run;
    const auto train_spec = benchmark_spec(sigma, 0);
    const auto gallery_spec = benchmark_spec(sigma, 1);
    const Dataset train = generate_synthetic(train_spec);
    const Dataset gallery = generate_synthetic(gallery_spec);
    run.oracle = latent_oracle_accuracy(gallery_spec, gallery);

    const auto start = Clock::now();
    TrainConfig config;  // library defaults throughout
    const TrainReport report = fit(train, config);
    const auto queries = benchmark_queries(gallery);
    const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 8, 10};
    run.dual = evaluate(gallery, queries, report.model, ks);
    EvalOptions hier;
    hier.method = RetrievalMethod::Hierarchical;
    hier.candidates = 20;
    run.hierarchical = evaluate(gallery, queries, report.model, ks, hier);
    run.seconds = seconds_since(start);

    std::ostringstream ckpt(std::ios::binary);
    write_checkpoint(ckpt, ModelCheckpoint{ModelCheckpoint::kVersion, report.model, config.hyper});
    run.checkpoint_bytes = ckpt.str();
    std::ostringstream csv;
    write_topk_csv(csv, run.dual);
    write_cmc_csv(csv, run.dual);
    write_topk_csv(csv, run.hierarchical);
    write_cmc_csv(csv, run.hierarchical);
    run.csv_bytes = csv.str();

    all_results.push_back(run.dual);
    all_results.push_back(run.hierarchical);
    return run;
}

void criteria_end_to_end() {
    const BenchmarkRun first = run_benchmark(0.3);
    const double top1 = first.dual.top_k_accuracy.at(1);
    const double top5 = first.dual.top_k_accuracy.at(5);
    report(7, "synthetic end-to-end (sigma 0.3)",
           first.oracle == 1.0 && top1 >= kTop1 && top5 >= kTop5 && first.seconds < kE2eSeconds,
           fmt("latent NN oracle %.3f (== 1), top-1 %.3f (>= %.2f), top-5 %.3f (>= %.2f), %.2f s (< %g s)",
               first.oracle, top1, kTop1, top5, kTop5, first.seconds, kE2eSeconds));

    const BenchmarkRun noisy = run_benchmark(0.8);
    const double dual1 = noisy.dual.top_k_accuracy.at(1);
    const double hier1 = noisy.hierarchical.top_k_accuracy.at(1);
    report(8, "dual-reference vs hierarchical (sigma 0.8)", dual1 >= hier1,
           fmt("DRFR top-1 %.3f >= hierarchical (C=20) top-1 %.3f", dual1, hier1));

    const BenchmarkRun second = run_benchmark(0.3);
    const bool same_ckpt = first.checkpoint_bytes == second.checkpoint_bytes;
    const bool same_csv = first.csv_bytes == second.csv_bytes;
    report(9, "determinism", same_ckpt && same_csv,
           fmt("checkpoint %zu bytes %s, evaluation CSVs %zu bytes %s", first.checkpoint_bytes.size(),
               same_ckpt ? "identical" : "DIFFER", first.csv_bytes.size(), same_csv ? "identical" : "DIFFER"));
}

// ---- 10 ----------------------------------------------------------------------

void criterion_monotone() {
    // A few extra evaluations on random models and galleries alongside the benchmark ones.
    Rng rng(1010);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = benchmark_spec(0.5 + rng.uniform(), 1);
        spec.seed = 100 + static_cast<std::uint64_t>(trial);
        const auto gallery = generate_synthetic(spec);
        const Model model{EmbeddingModel(EmbeddingKind::Linear, random_matrix(rng, 8, 32)),
                          DualMetric(MetricFactor(random_matrix(rng, 8, 8)), MetricFactor(random_matrix(rng, 8, 8)))};
        const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 8, 10};
        all_results.push_back(evaluate(gallery, benchmark_queries(gallery), model, ks));
    }
    std::size_t bad = 0;
    for (const auto& r : all_results) bad += is_monotone(r) ? 0 : 1;
    report(10, "monotone top-K and CMC", bad == 0,
           fmt("%zu evaluations, %zu non-monotone", all_results.size(), bad));
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<void()>>> criteria{
        {1, criterion_gradients},        {2, criterion_metric_properties},
        {3, criterion_psd},              {4, criterion_mining},
        {5, criterion_retrieval},        {6, criterion_quartet_spot_values},
        {7, criteria_end_to_end},        {10, criterion_monotone},
    };
    for (const auto& [id, run] : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            report(id, "threw", false, e.what());
        }
    }
    std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
