#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "drfr/drfr.hpp"

namespace drfr::cli {
namespace {

namespace fs = std::filesystem;

// ---- shared helpers --------------------------------------------------------

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::optional<double> parse_bandwidth(const std::string& text) {
    if (text == "auto") return std::nullopt;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !(value > 0.0)) {
        throw InvalidArgument("--t must be a positive number or 'auto', got '" + text + "'");
    }
    return value;
}

std::string format_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Looks `id` up in `refs` first (when given), then in `gallery`.
const Sample& lookup_reference(const std::string& id, const Dataset* refs, const Dataset& gallery,
                               const std::string& role) {
    if (refs) {
        if (const auto i = refs->find(id)) return (*refs)[*i];
    }
    if (const auto i = gallery.find(id)) return gallery[*i];
    throw DataError(role + " id '" + id + "' not found");
}

struct HyperFlags {
    Hyperparams hyper;
    std::string bandwidth = "auto";

    void add_graph(CLI::App* app) {
        app->add_option("--k", hyper.k_neighbors, "neighbours per per-age graph")
            ->capture_default_str();
        app->add_option("--t", bandwidth, "heat-kernel bandwidth or 'auto'")->capture_default_str();
        app->add_option("--epsilon", hyper.age_epsilon, "per-identity age window")
            ->capture_default_str();
    }

    void add_training(CLI::App* app) {
        add_graph(app);
        app->add_option("--delta", hyper.margin_delta, "hinge margin")->capture_default_str();
        app->add_option("--graph-weight", hyper.graph_weight, "locality penalty weight")
            ->capture_default_str();
        app->add_option("--eq-weight", hyper.equality_weight, "equality term weight")
            ->capture_default_str();
        app->add_option("--lambda", hyper.retrieve_lambda, "retrieval age weight stored in the model")
            ->capture_default_str();
        app->add_option("--lr", hyper.learning_rate, "learning rate")->capture_default_str();
        app->add_option("--momentum", hyper.momentum, "momentum")->capture_default_str();
        app->add_option("--batch", hyper.batch_size, "mini-batch size")->capture_default_str();
        app->add_option("--epochs", hyper.epochs, "epochs")->capture_default_str();
        app->add_option("--embed-dim", hyper.embed_dim, "joint space dimension, 0 = min(128, D)")
            ->capture_default_str();
        app->add_option("--seed", hyper.seed, "random seed (falls back to $DRFR_SEED)")
            ->envname("DRFR_SEED")
            ->capture_default_str();
    }

    Hyperparams resolved() const {
        Hyperparams h = hyper;
        h.bandwidth_t = parse_bandwidth(bandwidth);
        h.validate();
        return h;
    }
};

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    SyntheticSpec spec;
    std::string ages = "20:5:40";
    fs::path out;
};

int run_gen(const GenArgs& a, std::ostream& err) {
    SyntheticSpec spec = a.spec;
    spec.ages = parse_age_range(a.ages);
    const Dataset ds = generate_synthetic(spec);
    save_dataset(ds, a.out);
    err << "wrote " << ds.size() << " samples of dimension " << ds.dim << " to " << a.out.string()
        << '\n';
    return kOk;
}

// ---- graph -----------------------------------------------------------------

struct GraphArgs {
    HyperFlags flags;
    fs::path data;
    std::string prefix;
};

int run_graph(const GraphArgs& a, std::ostream& out) {
    const Dataset ds = load_dataset(a.data);
    require_valid(ds);
    const GraphSet graphs = build_graphs(ds, a.flags.resolved());
    out << "file,kind,label,nodes,edges,bandwidth\n";
    auto emit = [&](const SimilarityGraph& g, const char* kind) {
        const std::string name = a.prefix + kind + "_" + std::to_string(g.label()) + ".edges";
        auto file = open_output(name);
        write_edge_list(file, g, ds);
        if (!file) throw DataError("failed writing '" + name + "'");
        char bw[32];
        std::snprintf(bw, sizeof bw, "%.9g", g.bandwidth());
        out << name << ',' << kind << ',' << g.label() << ',' << g.nodes().size() << ','
            << g.edges().size() << ',' << bw << '\n';
    };
    for (const auto& g : graphs.per_age) emit(g, "age");
    for (const auto& g : graphs.per_identity) emit(g, "identity");
    return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    HyperFlags flags;
    fs::path data;
    fs::path out;
    std::string embedding = "linear";
    std::string resume;
    std::string objective_csv;
    bool direct_metric = false;
    int log_every = 1;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const Dataset ds = load_dataset(a.data);
    require_valid(ds);

    TrainConfig config;
    config.hyper = a.flags.resolved();
    config.direct_metric = a.direct_metric;
    config.log_every = a.log_every;
    config.log = &err;

    if (!a.resume.empty()) {
        const auto ckpt = load_checkpoint(a.resume);
        config.resume = ckpt.model;
        config.train_embedding = ckpt.model.embedding.kind() == EmbeddingKind::Linear;
        config.hyper.embed_dim = static_cast<int>(ckpt.model.embedding.out_dim());
    } else if (a.embedding == "pca") {
        std::size_t dim = resolve_embed_dim(config.hyper, ds.dim);
        if (dim > ds.size()) {
            err << "warning: " << dim << " components requested from " << ds.size()
                << " samples; trying " << ds.size() << '\n';
            dim = ds.size();
        }
        std::optional<EmbeddingModel> pca;
        try {
            pca = pca_fit(ds, dim);
        } catch (const RankDeficient& e) {
            if (e.rank() == 0) throw DataError("features have zero variance; PCA is undefined");
            err << "warning: " << e.what() << "; using " << e.rank() << " components\n";
            dim = e.rank();
            pca = pca_fit(ds, dim);
        }
        config.hyper.embed_dim = static_cast<int>(dim);
        // The projection is divided by the feature scale s so that embedded
        // distances start on the same scale as the linear initialisation.
        const EmbeddingModel frozen(EmbeddingKind::PCA, pca->weights() / feature_scale(ds));
        config.resume = Model{frozen, DualMetric(MetricFactor::identity(dim), MetricFactor::identity(dim))};
        config.train_embedding = false;
    }

    const TrainReport report = fit(ds, config);
    save_checkpoint(ModelCheckpoint{ModelCheckpoint::kVersion, report.model, config.hyper}, a.out);

    if (!a.objective_csv.empty()) {
        auto csv = open_output(a.objective_csv);
        csv << "epoch,objective\n";
        char buf[64];
        for (std::size_t e = 0; e < report.objective.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%.9g", report.objective[e]);
            csv << e << ',' << buf << '\n';
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", report.objective.back());
    out << "objective " << buf << '\n';
    err << "trained in " << report.seconds << " s; model written to " << a.out.string() << '\n';
    return kOk;
}

// ---- retrieve / baseline ----------------------------------------------------

struct RetrieveArgs {
    fs::path model;
    fs::path gallery;
    std::string refs;
    std::string identity_ref;
    std::string age_ref;
    std::size_t k = 10;
    std::optional<double> lambda;
    std::optional<std::size_t> candidates;
};

int run_retrieve(const RetrieveArgs& a, bool hierarchical, std::ostream& out) {
    const auto ckpt = load_checkpoint(a.model);
    const Dataset gallery = load_dataset(a.gallery);
    std::optional<Dataset> refs;
    if (!a.refs.empty()) refs = load_dataset(a.refs);
    const Dataset* ref_set = refs ? &*refs : nullptr;
    const Query query{lookup_reference(a.identity_ref, ref_set, gallery, "identity reference"),
                      lookup_reference(a.age_ref, ref_set, gallery, "age reference")};

    const RankedList list =
        hierarchical
            ? hierarchical_retrieve(gallery, query, ckpt.model,
                                    a.candidates.value_or(std::min<std::size_t>(100, gallery.size())),
                                    a.k)
            : retrieve(gallery, query, ckpt.model, a.lambda.value_or(ckpt.hyper.retrieve_lambda), a.k);

    out << "rank,id,identity,age,score\n";
    for (std::size_t r = 0; r < list.size(); ++r) {
        const auto& s = gallery[list[r].index];
        out << r + 1 << ',' << s.id << ',' << s.identity << ',' << s.age << ','
            << format_score(list[r].score) << '\n';
    }
    return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    fs::path model;
    fs::path gallery;
    fs::path queries;
    std::string refs;
    std::vector<std::size_t> ks{1, 2, 3, 4, 5, 8, 10};
    std::string method = "dual";
    std::optional<std::size_t> candidates;
    std::optional<double> lambda;
    std::uint32_t age_tolerance = 0;
    std::size_t cmc_depth = 50;
    std::string out_prefix;
};

// CSV "identity_ref_id,age_ref_id,target_id" with that header line.
std::vector<EvalQuery> read_queries(const fs::path& path, const Dataset* refs,
                                    const Dataset& gallery) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    std::vector<EvalQuery> queries;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
            if (!header) {
                if (line != "identity_ref_id,age_ref_id,target_id") {
                    throw ParseError(line_no, "header must be identity_ref_id,age_ref_id,target_id");
                }
                header = true;
                continue;
            }
            if (fields.size() != 3 || line.back() == ',') {
                throw ParseError(line_no, "expected 3 fields");
            }
            const auto target = gallery.find(fields[2]);
            if (!target) throw ParseError(line_no, "target id '" + fields[2] + "' not in gallery");
            queries.push_back(
                {Query{lookup_reference(fields[0], refs, gallery, "identity reference"),
                       lookup_reference(fields[1], refs, gallery, "age reference")},
                 *target});
        }
        if (!header) throw ParseError(0, "empty query file");
        if (queries.empty()) throw ParseError(0, "no queries after the header");
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path.string());
    } catch (const DataError& e) {
        throw ParseError(line_no, e.what(), path.string());
    }
    return queries;
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(a.model);
    const Dataset gallery = load_dataset(a.gallery);
    std::optional<Dataset> refs;
    if (!a.refs.empty()) refs = load_dataset(a.refs);
    const auto queries = read_queries(a.queries, refs ? &*refs : nullptr, gallery);

    EvalOptions options;
    options.method = a.method == "hierarchical" ? RetrievalMethod::Hierarchical : RetrievalMethod::Dual;
    options.lambda_age = a.lambda.value_or(ckpt.hyper.retrieve_lambda);
    options.candidates = a.candidates.value_or(std::min<std::size_t>(100, gallery.size()));
    options.age_tolerance = a.age_tolerance;
    options.cmc_depth = a.cmc_depth;

    const EvalResult result = evaluate(gallery, queries, ckpt.model, a.ks, options);
    if (!is_monotone(result)) throw Error("internal error: evaluation metrics are not monotone");

    write_topk_csv(out, result);
    if (!a.out_prefix.empty()) {
        auto topk = open_output(a.out_prefix + "topk.csv");
        write_topk_csv(topk, result);
        auto cmc = open_output(a.out_prefix + "cmc.csv");
        write_cmc_csv(cmc, result);
        if (!topk || !cmc) throw DataError("failed writing evaluation CSVs");
    }
    err << queries.size() << " queries evaluated\n";
    return kOk;
}

// ---- inspect ---------------------------------------------------------------

int run_inspect(const fs::path& model, std::ostream& out) {
    out << describe(load_checkpoint(model));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual-reference retrieval with jointly learned identity and age metrics", "drfr"};
    app.require_subcommand(1);
    app.fallthrough(false);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a synthetic identity/age dataset");
    gen->add_option("--identities", gen_args.spec.n_identities, "number of identities")
        ->capture_default_str();
    gen->add_option("--ages", gen_args.ages, "ages as start:step:end (inclusive)")
        ->capture_default_str();
    gen->add_option("--per-cell", gen_args.spec.per_cell, "samples per (identity, age)")
        ->capture_default_str();
    gen->add_option("--dim", gen_args.spec.dim, "feature dimension")->capture_default_str();
    gen->add_option("--separation", gen_args.spec.separation, "identity prototype spread")
        ->capture_default_str();
    gen->add_option("--age-step", gen_args.spec.age_step, "displacement per year")
        ->capture_default_str();
    gen->add_option("--sigma", gen_args.spec.sigma, "noise standard deviation")
        ->capture_default_str();
    gen->add_option("--seed", gen_args.spec.seed, "latent geometry seed (falls back to $DRFR_SEED)")
        ->envname("DRFR_SEED")
        ->capture_default_str();
    gen->add_option("--draw", gen_args.spec.draw, "noise draw; 0 = training draw")
        ->capture_default_str();
    gen->add_option("--out", gen_args.out, "output file (.csv for CSV, binary otherwise)")
        ->required();

    GraphArgs graph_args;
    auto* graph = app.add_subcommand("graph", "export the locality graphs as edge lists");
    graph->add_option("--data", graph_args.data, "dataset file")->required()->check(CLI::ExistingFile);
    graph->add_option("--out-prefix", graph_args.prefix, "prefix of the .edges files")->required();
    graph_args.flags.add_graph(graph);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "learn the embedding and both metrics");
    train->add_option("--data", train_args.data, "training dataset")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_args.out, "checkpoint to write")->required();
    train->add_option("--embedding", train_args.embedding, "linear (learned) or pca (frozen)")
        ->check(CLI::IsMember({"linear", "pca"}))
        ->capture_default_str();
    train->add_option("--resume", train_args.resume, "continue from a checkpoint")
        ->check(CLI::ExistingFile);
    train->add_flag("--direct-metric", train_args.direct_metric,
                    "optimise M directly with PSD projection");
    train->add_option("--log-every", train_args.log_every, "progress line every N epochs")
        ->capture_default_str();
    train->add_option("--objective-csv", train_args.objective_csv, "write epoch,objective");
    train_args.flags.add_training(train);

    auto add_retrieval = [](CLI::App* sub, RetrieveArgs& r) {
        sub->add_option("--model", r.model, "checkpoint")->required()->check(CLI::ExistingFile);
        sub->add_option("--gallery", r.gallery, "gallery dataset")->required()->check(CLI::ExistingFile);
        sub->add_option("--refs", r.refs, "dataset holding the reference samples (default: gallery)")
            ->check(CLI::ExistingFile);
        sub->add_option("--identity-ref", r.identity_ref, "id of the identity reference")->required();
        sub->add_option("--age-ref", r.age_ref, "id of the age reference")->required();
        sub->add_option("--k", r.k, "results to return")->capture_default_str();
    };
    RetrieveArgs retrieve_args;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "rank a gallery against two references");
    add_retrieval(retrieve_cmd, retrieve_args);
    retrieve_cmd->add_option("--lambda", retrieve_args.lambda, "age weight (default: from model)");

    RetrieveArgs baseline_args;
    auto* baseline = app.add_subcommand("baseline", "two-stage identity-then-age ranking");
    add_retrieval(baseline, baseline_args);
    baseline->add_option("--candidates", baseline_args.candidates,
                         "identity candidates kept (default: min(100, gallery size))");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "top-K accuracy and CMC over a query file");
    eval->add_option("--model", eval_args.model, "checkpoint")->required()->check(CLI::ExistingFile);
    eval->add_option("--gallery", eval_args.gallery, "gallery dataset")->required()->check(CLI::ExistingFile);
    eval->add_option("--queries", eval_args.queries, "CSV identity_ref_id,age_ref_id,target_id")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--refs", eval_args.refs, "dataset holding the reference samples (default: gallery)")
        ->check(CLI::ExistingFile);
    eval->add_option("--ks", eval_args.ks, "comma-separated K values")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--method", eval_args.method, "dual or hierarchical")
        ->check(CLI::IsMember({"dual", "hierarchical"}))
        ->capture_default_str();
    eval->add_option("--candidates", eval_args.candidates,
                     "hierarchical candidates (default: min(100, gallery size))");
    eval->add_option("--lambda", eval_args.lambda, "age weight (default: from model)");
    eval->add_option("--age-tolerance", eval_args.age_tolerance, "years of slack for a correct age")
        ->capture_default_str();
    eval->add_option("--cmc-depth", eval_args.cmc_depth, "CMC length cap")->capture_default_str();
    eval->add_option("--out", eval_args.out_prefix, "write <prefix>topk.csv and <prefix>cmc.csv");

    fs::path inspect_model;
    auto* inspect = app.add_subcommand("inspect", "summarise a checkpoint");
    inspect->add_option("--model", inspect_model, "checkpoint")->required()->check(CLI::ExistingFile);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("drfr");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return run_gen(gen_args, err);
        if (*graph) return run_graph(graph_args, out);
        if (*train) return run_train(train_args, out, err);
        if (*retrieve_cmd) return run_retrieve(retrieve_args, false, out);
        if (*baseline) return run_retrieve(baseline_args, true, out);
        if (*eval) return run_eval(eval_args, out, err);
        if (*inspect) return run_inspect(inspect_model, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace drfr::cli
